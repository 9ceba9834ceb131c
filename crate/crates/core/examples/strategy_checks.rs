// The four differential checks on hand-written compile outcomes.

use sizeprobe::model::{CompileOutcome, Fraction, SizeMeasurement, SizeMetric, SourceProgram};
use sizeprobe::strategies::{dead_code_check, multi_compiler_check, pipeline_check, version_check};

fn outcome(id: &str, flag: &str, size: u64) -> CompileOutcome {
    CompileOutcome {
        compiler_id: id.into(),
        opt_flag: flag.into(),
        success: true,
        assembly: String::new(),
        diagnostics: String::new(),
        size: Some(SizeMeasurement { metric: SizeMetric::InstructionCount, value: size }),
        wall_time: 0.0,
    }
}

pub fn run_example() -> sizeprobe::Result<()> {
    let seed = SourceProgram::seed("c", "int f(int a) { return 0; }");
    let step3 = seed.mutated("...", "cf-dead-loop").mutated("...", "cf-dead-conditional").mutated("...", "agg-array");

    if let Some(c) = dead_code_check(&outcome("gcc", "-Os", 9), &outcome("gcc", "-Os", 3), &step3) {
        println!("dead code:  {}", c.inequality());
    }
    let pipeline = [outcome("clang", "-Oz", 12), outcome("clang", "-O3", 2)];
    if let Some(c) = pipeline_check(&pipeline, "-Oz", &step3, Fraction::new(5, 100))? {
        println!("pipeline:   {}", c.inequality());
    }
    let released = [outcome("gcc-13", "-Os", 20), outcome("gcc-12", "-Os", 21)];
    if let Some(c) = version_check(&released, &outcome("gcc-trunk", "-Os", 24), &step3, Fraction::ZERO)? {
        println!("version:    {}", c.inequality());
    }
    let multi = [outcome("gcc", "-Os", 25), outcome("clang", "-Oz", 34)];
    if let Some(c) = multi_compiler_check(&multi, &step3, Fraction::new(10, 100))? {
        println!("multi:      {} (ratio {})", c.inequality(), c.ratio);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
