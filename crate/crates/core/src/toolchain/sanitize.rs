use std::path::Path;

use serde::{Deserialize, Serialize};

use super::compile::write_source;
use super::process::{expand, resolve_program, run_shell, shell_quote};
use super::ToolchainSettings;
use crate::error::Result;
use crate::language::LanguageProfile;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum SanitizerVerdict {
    Clean,
    Flagged(String),
    Timeout,
    /// The instrumented build itself failed.
    BuildFailed(String),
    /// No sanitizer build is configured or installed for the language.
    Unavailable,
}

fn excerpt(text: &str) -> String {
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("Sanitizer") || l.contains("runtime error") || l.contains("SUMMARY"))
        .take(6)
        .collect();
    if lines.is_empty() {
        text.lines().take(6).collect::<Vec<_>>().join("\n")
    } else {
        lines.join("\n")
    }
}

/// Builds the driver-wrapped program with each of the profile's sanitizer
/// configurations and runs it.
///
/// The first flagged or timed-out run decides. Configurations whose
/// compiler is not installed are skipped.
pub fn run_sanitized(
    driver_code: &str,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<SanitizerVerdict> {
    let available: Vec<&String> =
        profile.sanitizer_builds.iter().filter(|b| resolve_program(b).is_some()).collect();
    if available.is_empty() {
        return Ok(SanitizerVerdict::Unavailable);
    }
    let input = write_source(dir, "driver", &profile.extension, driver_code)?;
    let mut build_failure = None;
    let mut built_any = false;
    for (k, build) in available.iter().enumerate() {
        let exe = format!("san-{k}");
        let cmd = expand(build, &[("input", &shell_quote(&input)), ("output", &exe)]);
        let b = run_shell(&cmd, dir, settings.compile_timeout())?;
        if !b.success() {
            build_failure.get_or_insert_with(|| if b.timed_out { "build timed out".to_string() } else { excerpt(&b.stderr) });
            continue;
        }
        built_any = true;
        let run = run_shell(&format!("./{exe}"), dir, settings.run_timeout())?;
        if run.timed_out {
            return Ok(SanitizerVerdict::Timeout);
        }
        if !run.success() || run.stderr.contains("Sanitizer") || run.stderr.contains("runtime error") {
            let report = excerpt(&run.stderr);
            let report = if report.is_empty() { format!("exit status {:?}", run.exit_code) } else { report };
            return Ok(SanitizerVerdict::Flagged(report));
        }
    }
    Ok(match (built_any, build_failure) {
        (false, Some(msg)) => SanitizerVerdict::BuildFailed(msg),
        _ => SanitizerVerdict::Clean,
    })
}
