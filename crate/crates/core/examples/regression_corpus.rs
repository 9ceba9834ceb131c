// Check the bundled corpus against gcc and clang when they are installed.
// Outcomes depend on the local compiler versions.

use std::path::Path;

use sizeprobe::config::load_compilers;
use sizeprobe::corpus::{bundled_manifest_path, verify_corpus, CorpusManifest};
use sizeprobe::toolchain::ToolchainSettings;

pub fn run_example() -> sizeprobe::Result<()> {
    let manifest = CorpusManifest::load(&bundled_manifest_path())?;
    let compilers = load_compilers(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/local.toml"))?;
    let scratch = tempfile::tempdir().expect("tempdir");
    for (entry, verdict) in verify_corpus(&manifest, &compilers, scratch.path(), &ToolchainSettings::default()) {
        println!("{:<14} {:<16} {:<10} {}", entry.id, entry.strategy, verdict.label(), verdict.detail());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
