use crate::error::{Error, Result};
use crate::language::LanguageProfile;

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// A sentence of prose rather than a line of code.
fn is_prose(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() {
        return true;
    }
    let starts_alpha = t.chars().next().is_some_and(char::is_alphabetic);
    let ends_sentence = t.ends_with(['.', ':', '!', '?']);
    let has_code_punct = t.contains(['{', '}', ';', '(', ')', '=', '#', '[', ']', '<', '>']);
    starts_alpha && ends_sentence && t.contains(' ') && !has_code_punct
}

/// Pulls program text out of a provider response.
///
/// The first fenced block wins. Without fences the whole response is used if
/// it defines the function under test, minus surrounding prose lines.
pub fn extract_code(raw: &str, profile: &LanguageProfile) -> Result<String> {
    let lines: Vec<&str> = raw.lines().collect();
    if let Some(open) = lines.iter().position(|l| is_fence(l)) {
        let body: Vec<&str> = lines[open + 1..].iter().take_while(|l| !is_fence(l)).copied().collect();
        let code = trim_blank(&body).join("\n");
        return if code.trim().is_empty() { Err(Error::ExtractionFailed) } else { Ok(code) };
    }
    if !profile.defines_function(raw) {
        return Err(Error::ExtractionFailed);
    }
    let first = lines.iter().position(|l| !is_prose(l));
    let last = lines.iter().rposition(|l| !is_prose(l));
    match (first, last) {
        (Some(a), Some(b)) => Ok(lines[a..=b].join("\n")),
        _ => Err(Error::ExtractionFailed),
    }
}

fn trim_blank<'a>(lines: &[&'a str]) -> Vec<&'a str> {
    let first = lines.iter().position(|l| !l.trim().is_empty());
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    match (first, last) {
        (Some(a), Some(b)) => lines[a..=b].to_vec(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::builtin_profile;
    use proptest::prelude::*;

    fn c() -> LanguageProfile {
        builtin_profile("c").unwrap()
    }

    #[test]
    fn single_fence() {
        let raw = "Here is the program:\n```c\nint f(int a){return 0;}\n```";
        assert_eq!(extract_code(raw, &c()).unwrap(), "int f(int a){return 0;}");
    }

    #[test]
    fn first_of_two_fences() {
        let raw = "A:\n```c\nint f(int a){return 1;}\n```\nB:\n```\nint f(int a){return 2;}\n```\n";
        assert_eq!(extract_code(raw, &c()).unwrap(), "int f(int a){return 1;}");
    }

    #[test]
    fn prose_only_fails() {
        assert!(matches!(extract_code("Sure! I added the loop.", &c()), Err(Error::ExtractionFailed)));
        assert!(matches!(extract_code("```c\n\n```", &c()), Err(Error::ExtractionFailed)));
    }

    #[test]
    fn unfenced_code_loses_surrounding_prose() {
        let raw = "Sure, here you go:\nint f(int a) {\n  return a;\n}\nI hope this helps.";
        assert_eq!(extract_code(raw, &c()).unwrap(), "int f(int a) {\n  return a;\n}");
    }

    #[test]
    fn unterminated_fence_runs_to_end() {
        let raw = "```c\nint f(int a) { return 0; }\n";
        assert_eq!(extract_code(raw, &c()).unwrap(), "int f(int a) { return 0; }");
    }

    fn code_line() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z_]{1,8} = [0-9]{1,3};".prop_map(|s| format!("  {s}")),
            Just("  if (a > 1) {".to_string()),
            Just("  }".to_string()),
            Just("#include <stdio.h>".to_string()),
            Just("  // note".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn idempotent_on_success(
            prose in "[A-Z][a-z]{2,8} [a-z]{2,8}[.:!]",
            before in proptest::collection::vec(code_line(), 0..4),
            after in proptest::collection::vec(code_line(), 0..4),
            fenced in any::<bool>(),
        ) {
            let mut code = before.clone();
            code.push("int f(int a) {".into());
            code.extend(after.clone());
            code.push("  return a;".into());
            code.push("}".into());
            let body = code.join("\n");
            let raw = if fenced {
                format!("{prose}\n```c\n{body}\n```\nDone here.")
            } else {
                format!("{prose}\n{body}\nDone here.")
            };
            let once = extract_code(&raw, &c()).unwrap();
            let twice = extract_code(&once, &c()).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once, body);
        }
    }
}
