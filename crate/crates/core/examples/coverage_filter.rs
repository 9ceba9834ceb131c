// The dead-code filter with real gcc and gcov: an inserted `if (0)` body is
// never executed, a busy loop the model called "dead" is.

use sizeprobe::filters::dead_code_filter;
use sizeprobe::language::builtin_profile;
use sizeprobe::model::{Fraction, SizeRef, SourceProgram, Strategy, ViolationCandidate};
use sizeprobe::toolchain::{resolve_program, ToolchainSettings};

fn candidate(code: &str) -> ViolationCandidate {
    let seed = SourceProgram::seed("c", "int f(int a) { return 0; }");
    let program = seed.mutated(code, "cf-dead-conditional");
    let side = |size, step| SizeRef { compiler_id: "gcc".into(), opt_flag: "-Os".into(), size, step };
    ViolationCandidate::new(Strategy::DeadCode, &program, side(2, 0), side(5, 1), Fraction::ZERO)
}

pub fn run_example() -> sizeprobe::Result<()> {
    if resolve_program("gcc").is_none() || resolve_program("gcov").is_none() {
        println!("gcc/gcov not installed; skipping");
        return Ok(());
    }
    let profile = builtin_profile("c")?;
    let settings = ToolchainSettings::default();
    let dir = tempfile::tempdir().expect("tempdir");
    let dead = "int f(int a) {\n  if (0) { a += 1; }\n  return 0;\n}\n";
    let live = "int f(int a) {\n  for (int i = 0; i < 3; i++) { a += 1; a -= 1; }\n  return 0;\n}\n";
    for (name, code) in [("if (0)", dead), ("busy loop", live)] {
        let rec = dead_code_filter(&candidate(code), "int f(int a) { return 0; }", &profile, &dir.path().join(name.replace(' ', "_")), &settings)?;
        println!("{name}: {:?} ({})", rec.status, rec.detail);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
