// Compile one program at two flags and count instructions. Uses the
// scripted compiler from `fixtures/`, so it runs anywhere.

use sizeprobe::language::builtin_profile;
use sizeprobe::model::{CompilerSpec, SourceProgram};
use sizeprobe::toolchain::{compile_to_asm, instruction_count, ToolchainSettings, DEFAULT_COMMENT_LEADERS};

pub fn run_example() -> sizeprobe::Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let spec = CompilerSpec {
        id: "fake".into(),
        family: String::new(),
        invocation: format!("{fixtures}/fakecc.sh base=3 per=2 inflate_by=4 inflate_flag=-Oz -- {{flags}} {{input}} {{output}}"),
        version_label: String::new(),
        channel: Default::default(),
        size_opt_flag: "-Oz".into(),
        perf_opt_flag: "-O3".into(),
        other_flags: vec![],
        languages: vec![],
        object_invocation: None,
    };
    let profile = builtin_profile("c")?;
    let program = SourceProgram::seed("c", "int f(int a) {\n  a += 1;\n  a *= 2;\n  return a;\n}\n");
    let dir = tempfile::tempdir().expect("tempdir");
    for flag in ["-O3", "-Oz"] {
        let out = compile_to_asm(&spec, flag, &program, &profile, dir.path(), &ToolchainSettings::default())?;
        println!("{flag}: {} instructions", out.size_value().unwrap_or(0));
    }
    let asm = "f:\n\t.cfi_startproc\n\tmovl\t%edi, %eax\n# comment\n\tret\n";
    assert_eq!(instruction_count(asm, &DEFAULT_COMMENT_LEADERS), 2);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
