//! Per-language knobs: seed program, the function under test, how to wrap
//! it in an executable driver, and which dynamic-analysis builds exist.

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureStyle {
    CLike,
    Rust,
    Swift,
}

/// Commands for building and reading a line-coverage run.
///
/// `build` gets `{input}` and `{output}`; `report` additionally gets
/// `{stem}` (input file name without extension) and must print gcov text
/// format on stdout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageTool {
    pub build: String,
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub id: String,
    pub display_name: String,
    pub extension: String,
    pub seed_code: String,
    #[serde(default = "default_symbol")]
    pub function_symbol: String,
    pub signature_style: SignatureStyle,
    /// Wraps the mutant; `{code}` and `{calls}` are substituted.
    pub driver_template: String,
    /// One call whose result is accumulated; `{call}` is substituted.
    pub call_template: String,
    /// One call to a function returning nothing.
    pub void_call_template: String,
    /// Lines removed from the mutant before wrapping it in a driver.
    #[serde(default)]
    pub driver_strip_lines: Vec<String>,
    /// Keywords whose presence makes condition-rewriting instructions eligible.
    #[serde(default = "default_control_keywords")]
    pub control_keywords: Vec<String>,
    #[serde(default)]
    pub sanitizer_builds: Vec<String>,
    #[serde(default)]
    pub coverage: Option<CoverageTool>,
}

fn default_symbol() -> String {
    "f".into()
}

fn default_control_keywords() -> Vec<String> {
    ["if", "for", "while"].map(String::from).to_vec()
}

const C_DRIVER: &str = "{code}\n\nint main(void) {\n  volatile long sizeprobe_sink = 0;\n{calls}\n  return 0;\n}\n";
const RUST_DRIVER: &str = "{code}\n\nfn main() {\n    let mut sizeprobe_sink: i64 = 0;\n{calls}\n    std::hint::black_box(sizeprobe_sink);\n}\n";
const SWIFT_DRIVER: &str = "{code}\n\nvar sizeprobeSink = 0\n{calls}\nprint(sizeprobeSink == Int.min ? 1 : 0)\n";

fn c_profile(id: &str, display: &str, ext: &str, cc: &str) -> LanguageProfile {
    LanguageProfile {
        id: id.into(),
        display_name: display.into(),
        extension: ext.into(),
        seed_code: "int f(int a) { return 0; }".into(),
        function_symbol: default_symbol(),
        signature_style: SignatureStyle::CLike,
        driver_template: C_DRIVER.into(),
        call_template: "  sizeprobe_sink += (long){call};".into(),
        void_call_template: "  {call};".into(),
        driver_strip_lines: Vec::new(),
        control_keywords: default_control_keywords(),
        sanitizer_builds: vec![
            format!("{cc} -fsanitize=address,undefined -fno-sanitize-recover=all -g -O0 {{input}} -o {{output}}"),
            format!("{cc} -fsanitize=memory -g -O0 {{input}} -o {{output}}"),
        ],
        coverage: Some(CoverageTool {
            build: format!("{} --coverage -O0 {{input}} -o {{output}}", if ext == "c" { "gcc" } else { "g++" }),
            report: "gcov -t {output}-{stem}.gcda".into(),
        }),
    }
}

/// Built-in profiles for C, C++, Rust and Swift.
pub fn builtin_profiles() -> BTreeMap<String, LanguageProfile> {
    let mut out = BTreeMap::new();
    out.insert("c".into(), c_profile("c", "C", "c", "clang"));
    out.insert("cpp".into(), c_profile("cpp", "C++", "cpp", "clang++"));
    out.insert(
        "rust".into(),
        LanguageProfile {
            id: "rust".into(),
            display_name: "Rust".into(),
            extension: "rs".into(),
            seed_code: "#![no_main]\n#[no_mangle]\npub fn f(a: i32) -> i32 { 0 }".into(),
            function_symbol: default_symbol(),
            signature_style: SignatureStyle::Rust,
            driver_template: RUST_DRIVER.into(),
            call_template: "    sizeprobe_sink = sizeprobe_sink.wrapping_add({call} as i64);".into(),
            void_call_template: "    {call};".into(),
            driver_strip_lines: vec!["#![no_main]".into()],
            control_keywords: ["if", "for", "while", "loop", "match"].map(String::from).to_vec(),
            sanitizer_builds: Vec::new(),
            coverage: None,
        },
    );
    out.insert(
        "swift".into(),
        LanguageProfile {
            id: "swift".into(),
            display_name: "Swift".into(),
            extension: "swift".into(),
            seed_code: "func f(a: Int) -> Int { return a }".into(),
            function_symbol: default_symbol(),
            signature_style: SignatureStyle::Swift,
            driver_template: SWIFT_DRIVER.into(),
            call_template: "sizeprobeSink &+= Int({call})".into(),
            void_call_template: "{call}".into(),
            driver_strip_lines: Vec::new(),
            control_keywords: ["if", "for", "while", "guard", "repeat", "switch"].map(String::from).to_vec(),
            sanitizer_builds: Vec::new(),
            coverage: None,
        },
    );
    out
}

pub fn builtin_profile(language: &str) -> Result<LanguageProfile> {
    builtin_profiles()
        .remove(&language.to_ascii_lowercase())
        .ok_or_else(|| Error::UnknownLanguage(language.to_string()))
}

/// Parsed definition of the function under test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSignature {
    pub returns_value: bool,
    /// Argument labels for languages with labelled calls; `None` for positional.
    pub params: Vec<Option<String>>,
}

impl LanguageProfile {
    fn definition_regex(&self) -> Regex {
        let sym = regex::escape(&self.function_symbol);
        let pattern = match self.signature_style {
            SignatureStyle::CLike => format!(
                r"(?:^|[\s;{{}}])(?P<ret>[A-Za-z_][\w\s\*&:<>]*?)\s*\b{sym}\s*\((?P<params>[^()]*)\)\s*(?:const\s*)?\{{"
            ),
            SignatureStyle::Rust => {
                format!(r"\bfn\s+{sym}\s*\((?P<params>[^()]*)\)\s*(?:->\s*(?P<ret>[^{{]+?))?\s*\{{")
            }
            SignatureStyle::Swift => {
                format!(r"\bfunc\s+{sym}\s*\((?P<params>[^()]*)\)\s*(?:->\s*(?P<ret>[^{{]+?))?\s*\{{")
            }
        };
        Regex::new(&pattern).expect("definition pattern compiles")
    }

    /// Byte range of the parameter list and index of the body's opening brace.
    pub fn locate_definition(&self, code: &str) -> Option<(std::ops::Range<usize>, usize)> {
        let caps = self.definition_regex().captures(code)?;
        Some((caps.name("params")?.range(), caps.get(0)?.end() - 1))
    }

    pub fn defines_function(&self, code: &str) -> bool {
        self.signature(code).is_some()
    }

    pub fn signature(&self, code: &str) -> Option<FunctionSignature> {
        let caps = self.definition_regex().captures(code)?;
        let ret = caps.name("ret").map(|m| m.as_str().trim()).unwrap_or("");
        let returns_value = match self.signature_style {
            SignatureStyle::CLike => {
                let words: Vec<_> = ret.split_whitespace().collect();
                !(words.contains(&"void") && !ret.contains('*'))
            }
            SignatureStyle::Rust | SignatureStyle::Swift => !ret.is_empty() && ret != "()" && ret != "Void",
        };
        let raw = caps.name("params").map(|m| m.as_str().trim()).unwrap_or("");
        let params = if raw.is_empty() || raw == "void" {
            Vec::new()
        } else {
            raw.split(',')
                .map(|p| match self.signature_style {
                    SignatureStyle::Swift => {
                        let head = p.split(':').next().unwrap_or("").trim();
                        head.split_whitespace().next().filter(|l| *l != "_").map(String::from)
                    }
                    _ => None,
                })
                .collect()
        };
        Some(FunctionSignature { returns_value, params })
    }

    /// True when the code already has a loop or conditional to rewrite.
    pub fn has_control_flow(&self, code: &str) -> bool {
        let words: Vec<&str> = code.split(|c: char| !(c.is_alphanumeric() || c == '_')).collect();
        self.control_keywords.iter().any(|k| words.contains(&k.as_str()))
    }

    pub fn has_entry_point(&self, code: &str) -> bool {
        let pattern = match self.signature_style {
            SignatureStyle::CLike => r"\bmain\s*\(",
            SignatureStyle::Rust => r"\bfn\s+main\s*\(",
            SignatureStyle::Swift => r"@main\b",
        };
        Regex::new(pattern).expect("static regex").is_match(code)
    }
}
