use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::compile::write_source;
use super::process::{expand, resolve_program, run_shell, shell_quote};
use super::ToolchainSettings;
use crate::error::Result;
use crate::language::LanguageProfile;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Executable lines and their counts; absent when the run did not finish.
    pub line_counts: Option<BTreeMap<usize, u64>>,
    pub terminated: bool,
    pub exit_status: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverageOutcome {
    Report(CoverageReport),
    BuildFailed(String),
    /// No coverage tooling configured or installed for the language.
    Unavailable,
}

/// Parses `gcov -t` text: `count:line:source`, where count is a number,
/// `-` for non-executable lines, or `#####`/`=====` for never-executed ones.
pub fn parse_gcov(text: &str) -> BTreeMap<usize, u64> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let mut parts = line.splitn(3, ':');
        let (Some(count), Some(lineno)) = (parts.next(), parts.next()) else { continue };
        let Ok(lineno) = lineno.trim().parse::<usize>() else { continue };
        if lineno == 0 {
            continue;
        }
        let count = count.trim().trim_end_matches('*');
        let value = match count {
            "-" => continue,
            "#####" | "=====" => 0,
            n => match n.parse::<u64>() {
                Ok(v) => v,
                Err(_) => continue,
            },
        };
        *out.entry(lineno).or_insert(0) += value;
    }
    out
}

/// Builds the driver-wrapped program with coverage counters at `-O0`, runs
/// it and collects per-line counts.
pub fn line_coverage(
    driver_code: &str,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<CoverageOutcome> {
    let Some(tool) = &profile.coverage else { return Ok(CoverageOutcome::Unavailable) };
    if resolve_program(&tool.build).is_none() || resolve_program(&tool.report).is_none() {
        return Ok(CoverageOutcome::Unavailable);
    }
    let stem = "covsrc";
    let input = write_source(dir, stem, &profile.extension, driver_code)?;
    let exe = "covprog";
    let vars = [("input", shell_quote(&input)), ("output", exe.to_string()), ("stem", stem.to_string())];
    let vars: Vec<(&str, &str)> = vars.iter().map(|(k, v)| (*k, v.as_str())).collect();
    let build = run_shell(&expand(&tool.build, &vars), dir, settings.compile_timeout())?;
    if !build.success() {
        let why = if build.timed_out { "coverage build timed out".to_string() } else { build.stderr };
        return Ok(CoverageOutcome::BuildFailed(why));
    }
    let run = run_shell(&format!("./{exe}"), dir, settings.run_timeout())?;
    if run.timed_out {
        return Ok(CoverageOutcome::Report(CoverageReport { line_counts: None, terminated: false, exit_status: None }));
    }
    let report = run_shell(&expand(&tool.report, &vars), dir, settings.compile_timeout())?;
    let line_counts = report.success().then(|| parse_gcov(&report.stdout));
    Ok(CoverageOutcome::Report(CoverageReport { line_counts, terminated: true, exit_status: run.exit_code }))
}
