//! Wrapping a mutant in an entry point so it can be executed.

use crate::error::{Error, Result};
use crate::language::{LanguageProfile, SignatureStyle};
use crate::model::SourceProgram;

/// Splits a parameter list at top-level commas.
fn split_params(params: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in params.char_indices() {
        match c {
            '(' | '[' | '<' | '{' => depth += 1,
            ')' | ']' | '>' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(params[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = params[start..].trim();
    if !last.is_empty() {
        out.push(last);
    }
    out
}

const C_ARITHMETIC: [&str; 14] = [
    "int", "long", "short", "char", "unsigned", "signed", "float", "double", "_Bool", "bool", "size_t", "int32_t",
    "int64_t", "uint32_t",
];

/// C parameter type: the declaration minus its trailing identifier.
fn c_param_type(param: &str) -> String {
    let p = param.trim();
    if let Some(bracket) = p.find('[') {
        let head = p[..bracket].trim_end();
        let ty = head.trim_end_matches(|c: char| c.is_alphanumeric() || c == '_').trim_end();
        return format!("{ty} *");
    }
    let end = p.trim_end_matches(|c: char| c.is_alphanumeric() || c == '_');
    let ty = end.trim_end();
    if ty.is_empty() || ty.ends_with("struct") || ty.ends_with("union") || ty.ends_with("enum") {
        p.to_string()
    } else {
        ty.to_string()
    }
}

fn c_argument(param: &str, value: i64, cpp: bool) -> String {
    let ty = c_param_type(param);
    if ty.contains('*') {
        format!("({ty})sizeprobe_buf")
    } else if ty.split_whitespace().any(|w| C_ARITHMETIC.contains(&w)) || ty.trim_start_matches("const ").starts_with("enum") {
        format!("({ty})({value})")
    } else if cpp {
        format!("{ty}{{}}")
    } else {
        format!("({ty}){{0}}")
    }
}

const RUST_NUMERIC: [&str; 14] =
    ["i8", "i16", "i32", "i64", "i128", "isize", "u8", "u16", "u32", "u64", "u128", "usize", "f32", "f64"];

fn rust_argument(param: &str, value: i64) -> String {
    let ty = param.split_once(':').map_or("", |(_, t)| t.trim());
    if RUST_NUMERIC.contains(&ty) {
        format!("({value}) as {ty}")
    } else if ty == "bool" {
        format!("{}", value > 0)
    } else {
        "Default::default()".into()
    }
}

fn swift_argument(param: &str, value: i64) -> String {
    let (head, ty) = param.split_once(':').unwrap_or((param, "Int"));
    let label = head.split_whitespace().next().filter(|l| *l != "_");
    let ty = ty.split('=').next().unwrap_or("").trim();
    let arg = match ty {
        "Int" | "Int8" | "Int16" | "Int32" | "Int64" => format!("{ty}(truncatingIfNeeded: {value})"),
        "UInt" | "UInt8" | "UInt16" | "UInt32" | "UInt64" => format!("{ty}(truncatingIfNeeded: {value})"),
        "Double" | "Float" => format!("{ty}({value})"),
        "Bool" => format!("{}", value > 0),
        "[Int]" => format!("[{value}, 0, 1]"),
        _ => format!("{ty}()"),
    };
    match label {
        Some(l) => format!("{l}: {arg}"),
        None => arg,
    }
}

/// Returns `program` extended with an entry point that calls the function
/// under test once per input, accumulating results into a sink.
///
/// A program that already has an entry point is returned unchanged. Lines in
/// `driver_strip_lines` are blanked rather than removed so line numbers stay
/// aligned with the original.
pub fn synthesize_driver(program: &SourceProgram, profile: &LanguageProfile, inputs: &[i64]) -> Result<SourceProgram> {
    let corrupted = || Error::SignatureCorrupted { symbol: profile.function_symbol.clone() };
    let signature = profile.signature(&program.code).ok_or_else(corrupted)?;
    if profile.has_entry_point(&program.code) {
        return Ok(program.clone());
    }
    let (range, _) = profile.locate_definition(&program.code).ok_or_else(corrupted)?;
    let params = split_params(&program.code[range]);
    let params: Vec<&str> = params.into_iter().filter(|p| *p != "void").collect();
    let cpp = profile.extension != "c";
    let mut calls = Vec::new();
    for v in inputs {
        let args: Vec<String> = params
            .iter()
            .map(|p| match profile.signature_style {
                SignatureStyle::CLike => c_argument(p, *v, cpp),
                SignatureStyle::Rust => rust_argument(p, *v),
                SignatureStyle::Swift => swift_argument(p, *v),
            })
            .collect();
        let call = format!("{}({})", profile.function_symbol, args.join(", "));
        let template = if signature.returns_value { &profile.call_template } else { &profile.void_call_template };
        calls.push(template.replace("{call}", &call));
    }
    if profile.signature_style == SignatureStyle::CLike && params.iter().any(|p| c_param_type(p).contains('*')) {
        calls.insert(0, "  static long sizeprobe_buf[64];".into());
    }
    let code: Vec<&str> = program
        .code
        .lines()
        .map(|l| if profile.driver_strip_lines.iter().any(|s| s == l.trim()) { "" } else { l })
        .collect();
    let text = profile.driver_template.replace("{code}", &code.join("\n")).replace("{calls}", &calls.join("\n"));
    Ok(program.with_code(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::builtin_profile;

    fn drive(lang: &str, code: &str) -> Result<String> {
        let p = builtin_profile(lang).unwrap();
        synthesize_driver(&SourceProgram::seed(lang, code), &p, &[-1, 0, 1, 10]).map(|s| s.code)
    }

    #[test]
    fn c_seed_driver_calls_each_input() {
        let out = drive("c", "int f(int a) { return 0; }").unwrap();
        assert!(out.starts_with("int f(int a) { return 0; }\n"));
        for v in ["(int)(-1)", "(int)(0)", "(int)(1)", "(int)(10)"] {
            assert!(out.contains(&format!("sizeprobe_sink += (long)f({v});")), "{out}");
        }
        assert!(out.contains("int main(void)"));
    }

    #[test]
    fn renamed_function_is_corrupted() {
        assert!(matches!(drive("c", "int g(int a) { return 0; }"), Err(Error::SignatureCorrupted { .. })));
    }

    #[test]
    fn swift_uses_labels() {
        let out = drive("swift", "func f(a: Int) -> Int { return a }").unwrap();
        assert!(out.contains("f(a: Int(truncatingIfNeeded: -1))"), "{out}");
        assert!(out.contains("f(a: Int(truncatingIfNeeded: 10))"), "{out}");
    }

    #[test]
    fn rust_drops_no_main_and_keeps_line_numbers() {
        let src = "#![no_main]\n#[no_mangle]\npub fn f(a: i32) -> i32 { 0 }";
        let out = drive("rust", src).unwrap();
        assert!(!out.contains("no_main"));
        assert_eq!(out.lines().nth(2), Some("pub fn f(a: i32) -> i32 { 0 }"));
        assert!(out.contains("f((10) as i32)"));
    }

    #[test]
    fn pointers_void_and_existing_main() {
        let out = drive("c", "void f(int *p, int n) { p[0] = n; }").unwrap();
        assert!(out.contains("  f((int *)sizeprobe_buf, (int)(1));"), "{out}");
        assert!(out.contains("static long sizeprobe_buf[64];"));
        let arr = drive("c", "int f(int a[4]) { return a[0]; }").unwrap();
        assert!(arr.contains("f((int *)sizeprobe_buf)"), "{arr}");
        let st = drive("c", "struct S { int x; };\nint f(struct S s) { return s.x; }").unwrap();
        assert!(st.contains("f((struct S){0})"), "{st}");
        let has_main = "int f(int a) { return a; }\nint main(void) { return f(1); }";
        assert_eq!(drive("c", has_main).unwrap(), has_main);
    }
}
