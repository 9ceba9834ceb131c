// Screen a report against a set of "released" compilers, here scripted
// revisions where only r09 and later inflate.

use std::path::Path;

use sizeprobe::config::{load_config, ConfigOverrides};
use sizeprobe::dedup::{release_screen, CommandRevisionProvider};
use sizeprobe::report::{Report, ReportRecheck};
use sizeprobe::session::run_campaign;
use sizeprobe::toolchain::ToolchainSettings;

pub fn run_example() -> sizeprobe::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let work = tempfile::tempdir().expect("tempdir");
    let flags = ConfigOverrides { workdir: Some(work.path().to_path_buf()), episodes: Some(1), ..Default::default() };
    let cfg = load_config(Some(&root.join("configs/fake-multi.toml")), &|_| None, &flags)?;
    let result = run_campaign(&cfg, None)?;
    let (_, report): &(String, Report) = result.reports.first().expect("the scripted pair always diverges");

    let provider = CommandRevisionProvider::new(format!(
        "{} out={} bad_from=9",
        root.join("fixtures/revprovider.sh").display(),
        work.path().join("revs").display()
    ));
    let base = report.matrix.iter().find(|e| e.compiler.id == report.offender.compiler_id).expect("offender").compiler.clone();
    let mut releases = Vec::new();
    for rev in ["r03", "r08", "r12"] {
        releases.extend(provider.compiler_at(&base, rev)?);
    }
    let recheck = ReportRecheck { report: report.clone(), settings: ToolchainSettings::default(), scratch: work.path().join("screen") };
    let sig = release_screen(&recheck, &releases)?;
    for (v, e) in sig.version_ids.iter().zip(&sig.exhibits) {
        println!("{v}: {}", if *e { "exhibits" } else { "clean" });
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
