//! Producing the next mutant: pick an instruction, render the prompt, ask a
//! provider, pull the code back out of its answer.

mod extract;
mod prompt;
mod provider;
mod stub;

pub use extract::extract_code;
pub use prompt::{build_prompt, PromptRequest};
pub use provider::{ENDPOINT_ENV, MODEL_ENV, MutationProvider, ProviderConfig, ProviderKind, RemoteProvider};
pub use stub::{default_stub_rules, StubProvider, StubRule};

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::language::{builtin_profile, LanguageProfile};
use crate::model::{Category, Deadness, MutationInstruction, SourceProgram, Strategy};

/// Step-0 program for `language`.
pub fn seed_for(language: &str) -> Result<SourceProgram> {
    let profile = builtin_profile(language)?;
    Ok(seed_from_profile(&profile))
}

pub fn seed_from_profile(profile: &LanguageProfile) -> SourceProgram {
    SourceProgram::seed(profile.id.clone(), profile.seed_code.clone())
}

/// The subset of `catalog` that may be sampled for `strategy` given the
/// current `code`.
pub fn eligible_instructions<'c>(
    strategy: Strategy,
    catalog: &'c [MutationInstruction],
    profile: &LanguageProfile,
    code: &str,
) -> Vec<&'c MutationInstruction> {
    let has_control_flow = profile.has_control_flow(code);
    catalog
        .iter()
        .filter(|i| strategy != Strategy::DeadCode || i.deadness == Deadness::Dead)
        .filter(|i| i.category != Category::Conditionals || has_control_flow)
        .collect()
}

/// Uniform draw from the eligible instructions.
pub fn sample_instruction<'c, R: Rng + ?Sized>(
    strategy: Strategy,
    rng: &mut R,
    catalog: &'c [MutationInstruction],
    profile: &LanguageProfile,
    code: &str,
) -> Result<&'c MutationInstruction> {
    eligible_instructions(strategy, catalog, profile, code)
        .choose(rng)
        .copied()
        .ok_or_else(|| Error::NoEligibleInstruction { strategy: strategy.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeds() {
        let c = seed_for("c").unwrap();
        assert_eq!(c.code, "int f(int a) { return 0; }");
        assert_eq!(c.step_index, 0);
        assert!(c.lineage.is_empty());
        assert!(matches!(seed_for("fortran"), Err(Error::UnknownLanguage(_))));
    }

    #[test]
    fn conditionals_need_existing_control_flow() {
        let cat = default_catalog();
        let c = builtin_profile("c").unwrap();
        let seed = eligible_instructions(Strategy::MultiCompiler, &cat, &c, &c.seed_code);
        assert_eq!(seed.len(), 13);
        let with_if = eligible_instructions(Strategy::MultiCompiler, &cat, &c, "int f(int a) { if (a) {} return 0; }");
        assert_eq!(with_if.len(), 15);
    }

    #[test]
    fn dead_code_sessions_only_sample_dead_instructions() {
        let cat = default_catalog();
        let c = builtin_profile("c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let ins = sample_instruction(Strategy::DeadCode, &mut rng, &cat, &c, "if (0) {}").unwrap();
            assert!(ins.text.contains("dead"), "{}", ins.text);
        }
    }

    #[test]
    fn empty_catalog_has_nothing_to_sample() {
        let c = builtin_profile("c").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_instruction(Strategy::MultiCompiler, &mut rng, &[], &c, "x").unwrap_err();
        assert!(matches!(err, Error::NoEligibleInstruction { .. }));
    }

    #[test]
    fn sequence_is_reproducible_for_fixed_seed() {
        let cat = default_catalog();
        let c = builtin_profile("c").unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| sample_instruction(Strategy::Pipeline, &mut rng, &cat, &c, "if").unwrap().id.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }
}
