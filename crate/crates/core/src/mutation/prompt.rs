use serde::{Deserialize, Serialize};

use crate::language::LanguageProfile;
use crate::model::MutationInstruction;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub language: String,
    pub instruction: MutationInstruction,
    pub code: String,
    pub rendered_prompt: String,
}

pub fn build_prompt(profile: &LanguageProfile, instruction: &MutationInstruction, code: &str) -> PromptRequest {
    let rendered_prompt = format!(
        "Given the following {} program, please {}:\n\n{}",
        profile.display_name,
        instruction.text_for(&profile.id),
        code
    );
    PromptRequest {
        language: profile.id.clone(),
        instruction: instruction.clone(),
        code: code.to_string(),
        rendered_prompt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;
    use crate::language::builtin_profile;
    use proptest::prelude::*;

    fn instruction(id: &str) -> MutationInstruction {
        default_catalog().into_iter().find(|i| i.id == id).unwrap()
    }

    #[test]
    fn renders_template() {
        let c = builtin_profile("c").unwrap();
        let req = build_prompt(&c, &instruction("agg-array"), &c.seed_code);
        assert!(req.rendered_prompt.starts_with("Given the following C program, please add array code:"));
        assert_eq!(
            req.rendered_prompt,
            "Given the following C program, please add array code:\n\nint f(int a) { return 0; }"
        );
    }

    #[test]
    fn swift_union_swapped_for_enumeration() {
        let swift = builtin_profile("swift").unwrap();
        let req = build_prompt(&swift, &instruction("agg-union"), "func f(a: Int) -> Int { return a }");
        assert!(req.rendered_prompt.contains("please add enumeration code usage:"));
        assert!(!req.rendered_prompt.contains("union"));
    }

    proptest! {
        #[test]
        fn code_appears_verbatim(code in "[ -~\n\t]{1,200}") {
            let c = builtin_profile("c").unwrap();
            let req = build_prompt(&c, &instruction("cond-complicate"), &code);
            prop_assert!(req.rendered_prompt.ends_with(&code));
            let prefix = "Given the following C program, please make a condition more complicated:\n\n";
            prop_assert_eq!(&req.rendered_prompt[..prefix.len()], prefix);
            prop_assert_eq!(&req.rendered_prompt[prefix.len()..], code.as_str());
        }
    }
}
