// A full offline campaign: stub mutations, two scripted compilers, reports
// and summary written under a temporary work directory.

use std::path::Path;

use sizeprobe::config::{load_config, ConfigOverrides};
use sizeprobe::session::run_campaign;

pub fn run_example() -> sizeprobe::Result<()> {
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fake-multi.toml");
    let work = tempfile::tempdir().expect("tempdir");
    let flags = ConfigOverrides { workdir: Some(work.path().to_path_buf()), episodes: Some(3), ..Default::default() };
    let cfg = load_config(Some(&cfg_path), &|_| None, &flags)?;
    let result = run_campaign(&cfg, None)?;
    println!("{}", result.summary.stats.table_row());
    for ep in &result.summary.episodes {
        println!("{} {:?} after {} steps: {}", ep.episode_id, ep.end, ep.steps, ep.lineage.join(" > "));
    }
    for (name, report) in &result.reports {
        println!("{name}: {}", report.inequality);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
