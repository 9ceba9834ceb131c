//! Deterministic stand-in for an LLM.
//!
//! Each instruction id maps to a textual rewrite of the function under test.
//! Inserted lines carry a `/* spN */` marker so later rewrites can number
//! fresh identifiers.

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{MutationProvider, PromptRequest};
use crate::error::{Error, Result};
use crate::language::{LanguageProfile, SignatureStyle};

/// One rewrite. Templates may use `{n}` (fresh insertion number) and `{arg}`
/// (name of the first parameter).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StubRule {
    /// Insert one line before the function's final statement.
    Insert {
        line: String,
        /// From this insertion number on, emit a line that does not parse.
        #[serde(default)]
        invalid_from: Option<usize>,
    },
    /// Rewrite the first condition without changing its meaning.
    ComplicateCondition {
        #[serde(default)]
        dead_only: bool,
    },
    /// Append a parameter and insert a line that reads it.
    AddArgument { param: String, use_line: String },
}

impl StubRule {
    fn insert(line: &str) -> Self {
        StubRule::Insert { line: line.to_string(), invalid_from: None }
    }
}

/// Built-in rule table for the default catalog.
pub fn default_stub_rules(style: SignatureStyle) -> BTreeMap<String, StubRule> {
    let inserts: [(&str, &str); 12] = match style {
        SignatureStyle::CLike => [
            ("cf-conditional", "if ({arg} > {n}) { {arg} += {n}; }"),
            ("cf-nested-conditional", "if ({arg} > {n} || {arg} < -{n}) { if ({arg} % 2 == 0) { {arg} -= 1; } }"),
            ("cf-dead-conditional", "if (0) { {arg} += {n}; }"),
            ("cf-dead-nested-conditional", "if ({arg} > 100 && {arg} < 50) { if ({arg} % 3 == 0) { {arg} += {n}; } }"),
            ("cf-loop", "for (int i{n} = 0; i{n} < 4 && {arg} < 100; i{n}++) { {arg} += i{n}; }"),
            ("cf-dead-loop", "while ({arg} > 100 && {arg} < 50) { {arg} -= {n}; }"),
            (
                "cf-nested-loop",
                "for (int i{n} = 0; i{n} < 3; i{n}++) { for (int j{n} = 0; j{n} < 2 && {arg} < 100; j{n}++) { {arg} += j{n}; } }",
            ),
            ("cf-dead-nested-loop", "for (int i{n} = 0; i{n} < 0; i{n}++) { while ({arg} > 100 && {arg} < 50) { {arg} -= 1; } }"),
            ("agg-array", "int arr{n}[3] = { {arg}, {arg} + 1, {arg} + 2 }; {arg} = arr{n}[1] - 1;"),
            ("agg-pointers", "int *p{n} = &{arg}; *p{n} += {n};"),
            ("agg-struct", "struct { int v; int w; } s{n} = { {arg}, {n} }; {arg} = s{n}.v + s{n}.w;"),
            ("agg-union", "union { int i; unsigned int u; } u{n}; u{n}.i = {arg}; {arg} = (int)u{n}.u;"),
        ],
        SignatureStyle::Rust => [
            ("cf-conditional", "let mut v{n} = {arg}; if v{n} > {n} { v{n} += {n}; }"),
            ("cf-nested-conditional", "let mut v{n} = {arg}; if v{n} > {n} || v{n} < -{n} { if v{n} % 2 == 0 { v{n} -= 1; } }"),
            ("cf-dead-conditional", "let mut v{n} = {arg}; if false { v{n} += {n}; }"),
            ("cf-dead-nested-conditional", "let mut v{n} = {arg}; if v{n} > 100 && v{n} < 50 { if v{n} % 3 == 0 { v{n} += {n}; } }"),
            ("cf-loop", "let mut v{n} = {arg}; for i in 0..4 { if v{n} < 100 { v{n} += i; } }"),
            ("cf-dead-loop", "let mut v{n} = {arg}; while v{n} > 100 && v{n} < 50 { v{n} -= {n}; }"),
            ("cf-nested-loop", "let mut v{n} = {arg}; for i in 0..3 { for j in 0..2 { if v{n} < 100 { v{n} += i * j; } } }"),
            ("cf-dead-nested-loop", "let mut v{n} = {arg}; for _i in 0..0 { while v{n} > 100 && v{n} < 50 { v{n} -= 1; } }"),
            ("agg-array", "let arr{n} = [{arg}, {arg} + 1, {arg} + 2]; let _w{n} = arr{n}[1];"),
            ("agg-pointers", "let mut v{n} = {arg}; let p{n} = &mut v{n}; *p{n} += {n};"),
            ("agg-struct", "struct S{n} { v: i32 } let s{n} = S{n} { v: {arg} }; let _w{n} = s{n}.v;"),
            ("agg-union", "union U{n} { i: i32, u: u32 } let u{n} = U{n} { i: {arg} }; let _w{n} = unsafe { u{n}.u };"),
        ],
        SignatureStyle::Swift => [
            ("cf-conditional", "var v{n} = {arg}; if v{n} > {n} { v{n} += {n} }"),
            ("cf-nested-conditional", "var v{n} = {arg}; if v{n} > {n} || v{n} < -{n} { if v{n} % 2 == 0 { v{n} -= 1 } }"),
            ("cf-dead-conditional", "var v{n} = {arg}; if false { v{n} += {n} }"),
            ("cf-dead-nested-conditional", "var v{n} = {arg}; if v{n} > 100 && v{n} < 50 { if v{n} % 3 == 0 { v{n} += {n} } }"),
            ("cf-loop", "var v{n} = {arg}; for i in 0..<4 { if v{n} < 100 { v{n} += i } }"),
            ("cf-dead-loop", "var v{n} = {arg}; while v{n} > 100 && v{n} < 50 { v{n} -= {n} }"),
            ("cf-nested-loop", "var v{n} = {arg}; for i in 0..<3 { for j in 0..<2 { if v{n} < 100 { v{n} += i * j } } }"),
            ("cf-dead-nested-loop", "var v{n} = {arg}; for _ in 0..<0 { while v{n} > 100 && v{n} < 50 { v{n} -= 1 } }"),
            ("agg-array", "let arr{n} = [{arg}, {arg} + 1, {arg} + 2]; _ = arr{n}[1]"),
            ("agg-pointers", "var v{n} = {arg}; withUnsafeMutablePointer(to: &v{n}) { $0.pointee += {n} }"),
            ("agg-struct", "struct S{n} { var v: Int }; let s{n} = S{n}(v: {arg}); _ = s{n}.v"),
            ("agg-union", "enum E{n} { case i(Int), u(UInt) }; let e{n} = E{n}.i({arg}); _ = e{n}"),
        ],
    };
    let mut rules: BTreeMap<String, StubRule> =
        inserts.iter().map(|(id, line)| (id.to_string(), StubRule::insert(line))).collect();
    rules.insert("cond-complicate".into(), StubRule::ComplicateCondition { dead_only: false });
    rules.insert("cond-dead-complicate".into(), StubRule::ComplicateCondition { dead_only: true });
    let (param, use_line) = match style {
        SignatureStyle::CLike => ("int b{n}", "{arg} += b{n};"),
        SignatureStyle::Rust => ("b{n}: i32", "let _w{n} = b{n};"),
        SignatureStyle::Swift => ("b{n}: Int", "_ = b{n}"),
    };
    rules.insert("fn-arguments".into(), StubRule::AddArgument { param: param.into(), use_line: use_line.into() });
    rules
}

/// Offline provider that applies a fixed rule per instruction id.
#[derive(Debug, Clone)]
pub struct StubProvider {
    profile: LanguageProfile,
    rules: BTreeMap<String, StubRule>,
}

const MARKER: &str = "/* sp";

impl StubProvider {
    pub fn new(profile: LanguageProfile) -> Self {
        let rules = default_stub_rules(profile.signature_style);
        StubProvider { profile, rules }
    }

    /// Overrides or adds rules on top of the defaults.
    pub fn with_rules(mut self, rules: BTreeMap<String, StubRule>) -> Self {
        self.rules.extend(rules);
        self
    }

    /// Applies the rule for `instruction_id` to `code`.
    pub fn transform(&self, instruction_id: &str, code: &str) -> Result<String> {
        let rule = self.rules.get(instruction_id).ok_or_else(|| Error::MissingStubRule(instruction_id.into()))?;
        let code = expand_one_line_body(code, &self.profile);
        let n = code.matches(MARKER).count() + 1;
        let arg = self.first_param(&code).unwrap_or_else(|| "a".into());
        let fill = |t: &str| t.replace("{n}", &n.to_string()).replace("{arg}", &arg);
        Ok(match rule {
            StubRule::Insert { line, invalid_from } => {
                let text = match invalid_from {
                    Some(k) if n >= *k => format!("SYNTAX_ERROR {n} @@ (("),
                    _ => fill(line),
                };
                insert_line(&code, &self.profile, &format!("{text} {MARKER}{n} */"))
            }
            StubRule::ComplicateCondition { dead_only } => complicate_condition(&code, &self.profile, *dead_only),
            StubRule::AddArgument { param, use_line } => {
                let with_param = add_parameter(&code, &self.profile, &fill(param));
                insert_line(&with_param, &self.profile, &format!("{} {MARKER}{n} */", fill(use_line)))
            }
        })
    }

    fn first_param(&self, code: &str) -> Option<String> {
        let (_, params, _) = definition_spans(code, &self.profile)?;
        let first = code[params].split(',').next()?.trim().to_string();
        let name = match self.profile.signature_style {
            SignatureStyle::CLike => first
                .rsplit(|c: char| c.is_whitespace() || c == '*' || c == '&')
                .next()
                .map(str::to_string),
            SignatureStyle::Rust | SignatureStyle::Swift => {
                let head = first.split(':').next()?.trim();
                head.split_whitespace().last().map(str::to_string)
            }
        }?;
        (!name.is_empty() && name != "void").then_some(name)
    }
}

impl MutationProvider for StubProvider {
    fn mutate(&self, request: &PromptRequest) -> Result<String> {
        let code = self.transform(&request.instruction.id, &request.code)?;
        Ok(format!(
            "Here is the updated {} program:\n```{}\n{}\n```\n",
            self.profile.display_name, self.profile.extension, code
        ))
    }

    fn describe(&self) -> String {
        format!("stub({})", self.profile.id)
    }
}

/// Byte ranges of the definition: parameters through `{`, the parameter
/// list, and the body between the braces.
fn definition_spans(
    code: &str,
    profile: &LanguageProfile,
) -> Option<(std::ops::Range<usize>, std::ops::Range<usize>, std::ops::Range<usize>)> {
    let (params, open) = profile.locate_definition(code)?;
    let close = matching_brace(code, open)?;
    Some((params.start..open + 1, params, open + 1..close))
}

fn matching_brace(code: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, b) in code.bytes().enumerate().skip(open) {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// `int f(int a) { return 0; }` becomes a three-line definition.
fn expand_one_line_body(code: &str, profile: &LanguageProfile) -> String {
    let Some((_, _, body)) = definition_spans(code, profile) else {
        return code.to_string();
    };
    let inner = &code[body.clone()];
    if inner.contains('\n') {
        return code.to_string();
    }
    let stmt = inner.trim();
    let middle = if stmt.is_empty() { "\n".to_string() } else { format!("\n    {stmt}\n") };
    format!("{}{}{}", &code[..body.start], middle, &code[body.end..])
}

fn insert_line(code: &str, profile: &LanguageProfile, line: &str) -> String {
    let Some((_, _, body)) = definition_spans(code, profile) else {
        return format!("{code}\n{line}");
    };
    let inner = &code[body.clone()];
    let lines: Vec<&str> = inner.split('\n').collect();
    // index of the final statement line, if it is a return or tail expression
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let insert_at = match last {
        Some(i) => {
            let t = lines[i].trim();
            let is_tail = t.starts_with("return") || !(t.ends_with(';') || t.ends_with('}'));
            if is_tail {
                i
            } else {
                i + 1
            }
        }
        None => lines.len().saturating_sub(1),
    };
    let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    out.insert(insert_at, format!("    {line}"));
    format!("{}{}{}", &code[..body.start], out.join("\n"), &code[body.end..])
}

fn add_parameter(code: &str, profile: &LanguageProfile, param: &str) -> String {
    let Some((_, params, _)) = definition_spans(code, profile) else {
        return code.to_string();
    };
    let existing = code[params.clone()].trim();
    let new_params = if existing.is_empty() || existing == "void" {
        param.to_string()
    } else {
        format!("{existing}, {param}")
    };
    format!("{}{}{}", &code[..params.start], new_params, &code[params.end..])
}

fn complicate_condition(code: &str, profile: &LanguageProfile, dead_only: bool) -> String {
    let eq = Regex::new(r"\b(if|while)\s*\(\s*([A-Za-z_]\w*)\s*==\s*(-?\d+)\s*\)").unwrap();
    if !dead_only {
        if let Some(c) = eq.captures(code) {
            let m = c.get(0).unwrap();
            let (kw, var, val) = (&c[1], &c[2], &c[3]);
            return format!("{}{kw} ({var} >= {val} && {var} <= {val}){}", &code[..m.start()], &code[m.end()..]);
        }
    }
    let dead_literal = match profile.signature_style {
        SignatureStyle::CLike => Regex::new(r"\bif\s*\(\s*0\s*\)").unwrap(),
        _ => Regex::new(r"\bif\s+false\b").unwrap(),
    };
    if let Some(m) = dead_literal.find(code) {
        let replacement = match profile.signature_style {
            SignatureStyle::CLike => "if (0 && sizeof(int) > 1)",
            _ => "if false && 1 > 0",
        };
        return format!("{}{}{}", &code[..m.start()], replacement, &code[m.end()..]);
    }
    let kw = Regex::new(r"\b(if|while)\b").unwrap();
    let Some(m) = kw.find(code) else {
        return code.to_string();
    };
    let after = m.end();
    match profile.signature_style {
        SignatureStyle::CLike => {
            let Some(rel) = code[after..].find('(') else { return code.to_string() };
            let open = after + rel;
            let Some(close) = matching_paren(code, open) else { return code.to_string() };
            let cond = &code[open + 1..close];
            format!("{}(({cond}) && 1 == 1){}", &code[..open], &code[close + 1..])
        }
        _ => {
            let Some(rel) = code[after..].find('{') else { return code.to_string() };
            let brace = after + rel;
            let cond = code[after..brace].trim();
            format!("{} ({cond}) && 1 == 1 {}", &code[..after], &code[brace..])
        }
    }
}

fn matching_paren(code: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, b) in code.bytes().enumerate().skip(open) {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::builtin_profile;

    fn stub(lang: &str) -> StubProvider {
        StubProvider::new(builtin_profile(lang).unwrap())
    }

    #[test]
    fn dead_conditional_lands_inside_f() {
        let s = stub("c");
        let out = s.transform("cf-dead-conditional", "int f(int a) { return 0; }").unwrap();
        assert_eq!(out, "int f(int a) {\n    if (0) { a += 1; } /* sp1 */\n    return 0;\n}");
    }

    #[test]
    fn complicates_equality_condition() {
        let s = stub("c");
        let code = "int f(int x) {\n    if (x == 10) { x += 1; }\n    return 0;\n}";
        let out = s.transform("cond-complicate", code).unwrap();
        assert!(out.contains("if (x >= 10 && x <= 10)"), "{out}");
    }

    #[test]
    fn dead_condition_rewrite_keeps_it_dead() {
        let s = stub("c");
        let code = "int f(int a) {\n    if (0) { a += 1; } /* sp1 */\n    return 0;\n}";
        let out = s.transform("cond-dead-complicate", code).unwrap();
        assert!(out.contains("if (0 && sizeof(int) > 1)"), "{out}");
    }

    #[test]
    fn numbering_advances_per_insertion() {
        let s = stub("c");
        let one = s.transform("agg-array", "int f(int a) { return 0; }").unwrap();
        let two = s.transform("agg-pointers", &one).unwrap();
        assert!(two.contains("arr1") && two.contains("p2"), "{two}");
    }

    #[test]
    fn add_argument_extends_signature() {
        let s = stub("c");
        let out = s.transform("fn-arguments", "int f(int a) { return 0; }").unwrap();
        assert!(out.starts_with("int f(int a, int b1) {"), "{out}");
        assert!(out.contains("a += b1;"));
        let sig = builtin_profile("c").unwrap().signature(&out).unwrap();
        assert_eq!(sig.params.len(), 2);
    }

    #[test]
    fn rust_tail_expression_stays_last() {
        let s = stub("rust");
        let seed = builtin_profile("rust").unwrap().seed_code;
        let out = s.transform("agg-array", &seed).unwrap();
        assert!(out.trim_end().ends_with("0\n}"), "{out}");
        assert!(out.starts_with("#![no_main]"));
    }

    #[test]
    fn invalid_from_injects_garbage() {
        let mut rules = BTreeMap::new();
        rules.insert(
            "agg-array".to_string(),
            StubRule::Insert { line: "{arg} += {n};".into(), invalid_from: Some(2) },
        );
        let s = stub("c").with_rules(rules);
        let one = s.transform("agg-array", "int f(int a) { return 0; }").unwrap();
        assert!(!one.contains("SYNTAX_ERROR"));
        let two = s.transform("agg-array", &one).unwrap();
        assert!(two.contains("SYNTAX_ERROR"));
    }

    #[test]
    fn unknown_rule_is_an_error() {
        assert!(matches!(stub("c").transform("nope", "int f(int a) {}"), Err(Error::MissingStubRule(_))));
    }
}
