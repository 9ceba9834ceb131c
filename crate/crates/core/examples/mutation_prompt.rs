// Sample instructions the way an episode does and apply them with the
// offline stub provider.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sizeprobe::catalog::default_catalog;
use sizeprobe::language::builtin_profile;
use sizeprobe::model::Strategy;
use sizeprobe::mutation::{build_prompt, extract_code, sample_instruction, seed_for, MutationProvider, StubProvider};

pub fn run_example() -> sizeprobe::Result<()> {
    let profile = builtin_profile("c")?;
    let catalog = default_catalog();
    let stub = StubProvider::new(profile.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut program = seed_for("c")?;
    for _ in 0..3 {
        let instruction = sample_instruction(Strategy::DeadCode, &mut rng, &catalog, &profile, &program.code)?;
        let prompt = build_prompt(&profile, instruction, &program.code);
        println!("--- prompt ---\n{}", prompt.rendered_prompt);
        let code = extract_code(&stub.mutate(&prompt)?, &profile)?;
        program = program.mutated(code, &instruction.id);
    }
    println!("--- after {} steps ({}) ---\n{}", program.step_index, program.lineage.join(", "), program.code);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
