use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sizeprobe::catalog::{default_catalog, DEAD_INSTRUCTION_IDS};
use sizeprobe::language::builtin_profile;
use sizeprobe::model::Strategy;
use sizeprobe::mutation::sample_instruction;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const CODE: &str = "int f(int a) {\n  if (a) { a = 1; }\n  return 0;\n}";

fn counts(strategy: Strategy, draws: usize, seed: u64) -> BTreeMap<String, u64> {
    let profile = builtin_profile("c").unwrap();
    let catalog = default_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for _ in 0..draws {
        let i = sample_instruction(strategy, &mut rng, &catalog, &profile, CODE).unwrap();
        *out.entry(i.id.clone()).or_insert(0) += 1;
    }
    out
}

fn chi_square_p(observed: &BTreeMap<String, u64>, categories: usize, draws: usize) -> f64 {
    let expected = draws as f64 / categories as f64;
    let stat: f64 = observed.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((categories - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn uniform_over_all_fifteen() {
    let c = counts(Strategy::MultiCompiler, 10_000, 42);
    assert_eq!(c.len(), 15);
    let p = chi_square_p(&c, 15, 10_000);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn dead_code_draws_only_dead_instructions_uniformly() {
    let c = counts(Strategy::DeadCode, 5_000, 7);
    let mut keys: Vec<&str> = c.keys().map(String::as_str).collect();
    keys.sort();
    let mut dead = DEAD_INSTRUCTION_IDS.to_vec();
    dead.sort();
    assert_eq!(keys, dead);
    assert!(chi_square_p(&c, 5, 5_000) > 0.01);
}
