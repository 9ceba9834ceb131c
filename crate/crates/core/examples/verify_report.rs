// Write a report, read it back and recompile it from scratch.

use std::path::Path;

use sizeprobe::config::{load_config, ConfigOverrides};
use sizeprobe::report::{verify, Report};
use sizeprobe::session::run_campaign;
use sizeprobe::toolchain::ToolchainSettings;

pub fn run_example() -> sizeprobe::Result<()> {
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fake-multi.toml");
    let work = tempfile::tempdir().expect("tempdir");
    let flags = ConfigOverrides { workdir: Some(work.path().to_path_buf()), episodes: Some(1), ..Default::default() };
    let cfg = load_config(Some(&cfg_path), &|_| None, &flags)?;
    let result = run_campaign(&cfg, None)?;
    let Some(rel) = result.summary.episodes[0].report.clone() else {
        println!("no violation found");
        return Ok(());
    };
    let report = Report::load(&result.dir.join(rel))?;
    let outcome = verify(&report, &work.path().join("verify"), &ToolchainSettings::default())?;
    println!("stored {} recomputed {}: {}", outcome.stored_decision, outcome.recomputed_decision, outcome.detail);
    assert!(outcome.matches());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
