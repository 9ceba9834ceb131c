//! Regression corpus: known missed-optimization programs checked against
//! whatever compilers are installed locally. Never fails on a no-trigger.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::builtin_profile;
use crate::model::{CompileOutcome, CompilerSpec, SourceProgram, Strategy};
use crate::strategies::{build_matrix, evaluate, MatrixEntry, StrategyConfig};
use crate::toolchain::{compile_to_asm, ToolchainSettings};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub id: String,
    pub file: String,
    /// Step-0 program for dead-code entries.
    #[serde(default)]
    pub baseline: Option<String>,
    pub language: String,
    pub strategy: Strategy,
    /// Compiler family the report was filed against; preferred when present.
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub note: String,
    /// 1-based lines restored by hand.
    #[serde(default)]
    pub reconstructed: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusManifest {
    #[serde(default)]
    pub entry: Vec<CorpusEntry>,
    #[serde(skip)]
    pub root: PathBuf,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: CorpusManifest =
            toml::from_str(&text).map_err(|e| Error::config("corpus", e.to_string()))?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn source(&self, entry: &CorpusEntry) -> Result<String> {
        let path = self.root.join(&entry.file);
        std::fs::read_to_string(&path).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum CorpusVerdict {
    Triggered(String),
    NotTriggered(String),
    Skipped(String),
}

impl CorpusVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            CorpusVerdict::Triggered(_) => "trigger",
            CorpusVerdict::NotTriggered(_) => "no-trigger",
            CorpusVerdict::Skipped(_) => "skipped",
        }
    }

    pub fn detail(&self) -> &str {
        match self {
            CorpusVerdict::Triggered(d) | CorpusVerdict::NotTriggered(d) | CorpusVerdict::Skipped(d) => d,
        }
    }
}

fn compile_all(
    matrix: &[MatrixEntry],
    program: &SourceProgram,
    language: &str,
    dir: &Path,
    settings: &ToolchainSettings,
) -> std::result::Result<Vec<CompileOutcome>, String> {
    let profile = builtin_profile(language).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for e in matrix {
        let sub = dir.join(format!("step-{}", program.step_index)).join(&e.compiler.id);
        std::fs::create_dir_all(&sub).map_err(|e| e.to_string())?;
        let o = compile_to_asm(&e.compiler, &e.opt_flag, program, &profile, &sub, settings)
            .map_err(|err| format!("{} {}: {err}", e.compiler.id, e.opt_flag))?;
        if !o.success {
            let first = o.diagnostics.lines().next().unwrap_or_default().to_string();
            return Err(format!("{} {} failed: {first}", e.compiler.id, e.opt_flag));
        }
        out.push(o);
    }
    Ok(out)
}

/// Checks one entry against the compilers that accept its language.
pub fn verify_entry(
    manifest: &CorpusManifest,
    entry: &CorpusEntry,
    compilers: &[CompilerSpec],
    scratch: &Path,
    settings: &ToolchainSettings,
) -> CorpusVerdict {
    let mut usable: Vec<CompilerSpec> = compilers.iter().filter(|c| c.accepts(&entry.language)).cloned().collect();
    if let Some(f) = &entry.family {
        if entry.strategy != Strategy::MultiCompiler && usable.iter().any(|c| c.family() == f) {
            usable.retain(|c| c.family() == f);
        }
    }
    if usable.is_empty() {
        return CorpusVerdict::Skipped(format!("no compiler accepts {}", entry.language));
    }
    let cfg = StrategyConfig::new(entry.strategy);
    let matrix = match build_matrix(&cfg, &usable) {
        Ok(m) => m,
        Err(e) => return CorpusVerdict::Skipped(e.to_string()),
    };
    if entry.strategy == Strategy::MultiCompiler && matrix.len() < 2 {
        return CorpusVerdict::Skipped("need two compilers".into());
    }
    let code = match manifest.source(entry) {
        Ok(c) => c,
        Err(e) => return CorpusVerdict::Skipped(e.to_string()),
    };
    let dir = scratch.join(&entry.id);
    let seed = SourceProgram::seed(&entry.language, "");
    let program = seed.mutated(code, "corpus");
    let step1 = match compile_all(&matrix, &program, &entry.language, &dir, settings) {
        Ok(o) => o,
        Err(e) => return CorpusVerdict::Skipped(e),
    };
    let step0 = match &entry.baseline {
        Some(file) => {
            let base = match std::fs::read_to_string(manifest.root.join(file)) {
                Ok(c) => c,
                Err(e) => return CorpusVerdict::Skipped(e.to_string()),
            };
            match compile_all(&matrix, &SourceProgram::seed(&entry.language, base), &entry.language, &dir, settings) {
                Ok(o) => o,
                Err(e) => return CorpusVerdict::Skipped(e),
            }
        }
        None if entry.strategy == Strategy::DeadCode => {
            return CorpusVerdict::Skipped("dead_code entry without a baseline".into())
        }
        None => Vec::new(),
    };
    let sizes: Vec<String> =
        step1.iter().map(|o| format!("{} {}={}", o.compiler_id, o.opt_flag, o.size_value().unwrap_or(0))).collect();
    match evaluate(&cfg, &matrix, &step1, &step0, &program) {
        Ok(Some(c)) => CorpusVerdict::Triggered(c.inequality()),
        Ok(None) => CorpusVerdict::NotTriggered(sizes.join(", ")),
        Err(e) => CorpusVerdict::Skipped(e.to_string()),
    }
}

pub fn verify_corpus(
    manifest: &CorpusManifest,
    compilers: &[CompilerSpec],
    scratch: &Path,
    settings: &ToolchainSettings,
) -> Vec<(CorpusEntry, CorpusVerdict)> {
    manifest
        .entry
        .iter()
        .map(|e| {
            let v = verify_entry(manifest, e, compilers, scratch, settings);
            log::info!("{}: {} {}", e.id, v.label(), v.detail());
            (e.clone(), v)
        })
        .collect()
}

/// The manifest shipped with the crate.
pub fn bundled_manifest_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join("manifest.toml")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_manifest_parses_and_files_exist() {
        let m = CorpusManifest::load(&bundled_manifest_path()).unwrap();
        assert_eq!(m.entry.len(), 11);
        for e in &m.entry {
            let src = m.source(e).unwrap();
            for &line in &e.reconstructed {
                assert!(src.lines().nth(line - 1).unwrap().contains('%'), "{} line {line}", e.id);
            }
            if e.strategy == Strategy::DeadCode {
                assert!(e.baseline.is_some(), "{}", e.id);
            }
        }
    }

    #[test]
    fn no_compiler_is_skipped() {
        let m = CorpusManifest::load(&bundled_manifest_path()).unwrap();
        let v = verify_entry(&m, &m.entry[0], &[], Path::new("/nonexistent"), &ToolchainSettings::default());
        assert_eq!(v.label(), "skipped");
    }
}
