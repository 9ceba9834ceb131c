//! False-positive filters run on every candidate, in a fixed order:
//! monotonic size, sanitizers, the optional external validator, dead code.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::{LanguageProfile, SignatureStyle};
use crate::model::{FilterKind, FilterRecord, FilterStatus, Fraction, SourceProgram, Strategy, ViolationCandidate};
use crate::toolchain::{
    expand, line_coverage, run_sanitized, run_shell, shell_quote, source, synthesize_driver, write_source,
    CoverageOutcome, SanitizerVerdict, ToolchainSettings,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSettings {
    /// Reject any step-to-step decrease, not just a drop below step 0.
    pub strict_monotonic: bool,
    pub sanitizers: bool,
    /// Dead-code candidates need a passing coverage check to be confirmed.
    pub require_dead_code_filter: bool,
    /// Shell command run on the driver-wrapped program (`{input}`); exit 0
    /// passes.
    pub external_validator: Option<String>,
    /// Rejection share above which a filter is reported as suspicious.
    pub health_warning_fraction: Fraction,
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterSettings {
            strict_monotonic: false,
            sanitizers: true,
            require_dead_code_filter: true,
            external_validator: None,
            health_warning_fraction: Fraction::new(1, 10),
        }
    }
}

impl FilterSettings {
    /// Filters that must record `Pass` for a candidate to be confirmed.
    pub fn required(&self, strategy: Strategy) -> Vec<FilterKind> {
        let mut req = vec![FilterKind::MonotonicSize];
        if strategy == Strategy::DeadCode && self.require_dead_code_filter {
            req.push(FilterKind::DeadCode);
        }
        req
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotonicVerdict {
    Pass,
    Reject(usize),
}

/// Every mutation adds code, so a size that falls below the step-0 size
/// suggests the optimizer deleted something it considered unreachable.
pub fn monotonic_size_filter(sizes: &[u64], strict: bool) -> MonotonicVerdict {
    let Some(&base) = sizes.first() else { return MonotonicVerdict::Pass };
    for (k, w) in sizes.windows(2).enumerate() {
        let now = w[1];
        if now < base || (strict && now < w[0]) {
            return MonotonicVerdict::Reject(k + 1);
        }
    }
    MonotonicVerdict::Pass
}

fn record(filter: FilterKind, status: FilterStatus, detail: impl Into<String>) -> FilterRecord {
    FilterRecord { filter, status, detail: detail.into() }
}

/// Applies the monotonic rule to each size series and rejects on the first
/// offending series.
pub fn monotonic_record(series: &BTreeMap<String, Vec<u64>>, strict: bool) -> FilterRecord {
    for (label, sizes) in series {
        if let MonotonicVerdict::Reject(k) = monotonic_size_filter(sizes, strict) {
            return record(
                FilterKind::MonotonicSize,
                FilterStatus::Reject,
                format!("{label}: size {} at step {k} below step-0 size {} ({sizes:?})", sizes[k], sizes[0]),
            );
        }
    }
    record(FilterKind::MonotonicSize, FilterStatus::Pass, format!("{} size series non-shrinking", series.len()))
}

pub fn sanitizer_filter(
    program: &SourceProgram,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<FilterRecord> {
    let kind = FilterKind::Sanitizer;
    if profile.sanitizer_builds.is_empty() {
        return Ok(record(kind, FilterStatus::Skipped, format!("no sanitizer build for {}", profile.id)));
    }
    let driver = match synthesize_driver(program, profile, &settings.driver_inputs) {
        Ok(d) => d,
        Err(e @ Error::SignatureCorrupted { .. }) => return Ok(record(kind, FilterStatus::Skipped, e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(match run_sanitized(&driver.code, profile, dir, settings)? {
        SanitizerVerdict::Clean => record(kind, FilterStatus::Pass, "clean"),
        SanitizerVerdict::Flagged(report) => record(kind, FilterStatus::Reject, report),
        SanitizerVerdict::Timeout => record(kind, FilterStatus::Reject, "timeout: program did not terminate"),
        SanitizerVerdict::BuildFailed(msg) => {
            record(kind, FilterStatus::Skipped, format!("sanitizer build failed: {}", first_line(&msg)))
        }
        SanitizerVerdict::Unavailable => record(kind, FilterStatus::Skipped, "sanitizer toolchain not installed"),
    })
}

fn first_line(s: &str) -> &str {
    s.lines().find(|l| !l.trim().is_empty()).unwrap_or("")
}

/// Runs `command` on the driver-wrapped program; exit 0 passes.
pub fn external_validator_filter(
    command: &str,
    program: &SourceProgram,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<FilterRecord> {
    let kind = FilterKind::ExternalValidator;
    let driver = match synthesize_driver(program, profile, &settings.driver_inputs) {
        Ok(d) => d,
        Err(e) => return Ok(record(kind, FilterStatus::Skipped, e.to_string())),
    };
    let input = write_source(dir, "validate", &profile.extension, &driver.code)?;
    let run = run_shell(&expand(command, &[("input", &shell_quote(&input))]), dir, settings.run_timeout())?;
    Ok(if run.timed_out {
        record(kind, FilterStatus::Reject, "timeout")
    } else if run.success() {
        record(kind, FilterStatus::Pass, "validator accepted")
    } else {
        record(kind, FilterStatus::Reject, first_line(&format!("{}\n{}", run.stderr, run.stdout)).to_string())
    })
}

/// Checks that the code inserted since `baseline_code` never runs.
///
/// The mutant is re-laid out one statement per line, built with coverage
/// counters and driven with the fixed inputs. Every inserted statement line
/// must have count zero and the program must terminate.
pub fn dead_code_filter(
    candidate: &ViolationCandidate,
    baseline_code: &str,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<FilterRecord> {
    let kind = FilterKind::DeadCode;
    if candidate.strategy != Strategy::DeadCode {
        return Ok(record(kind, FilterStatus::Skipped, "not a dead-code candidate"));
    }
    let paren_headers = profile.signature_style == SignatureStyle::CLike;
    let (norm, lines) = source::inserted_statement_lines(baseline_code, &candidate.program.code, paren_headers);
    if lines.is_empty() {
        return Ok(record(kind, FilterStatus::Pass, "no inserted statements"));
    }
    let normalized = candidate.program.with_code(norm.text.clone());
    let driver = match synthesize_driver(&normalized, profile, &settings.driver_inputs) {
        Ok(d) => d,
        Err(e) => return Ok(record(kind, FilterStatus::Reject, format!("driver: {e}"))),
    };
    let report = match line_coverage(&driver.code, profile, dir, settings)? {
        CoverageOutcome::Unavailable => {
            return Ok(record(kind, FilterStatus::Skipped, format!("no coverage tooling for {}", profile.id)))
        }
        CoverageOutcome::BuildFailed(msg) => {
            return Ok(record(kind, FilterStatus::Reject, format!("coverage build failed: {}", first_line(&msg))))
        }
        CoverageOutcome::Report(r) => r,
    };
    if !report.terminated {
        return Ok(record(kind, FilterStatus::Reject, "timeout: program did not terminate"));
    }
    let Some(counts) = report.line_counts else {
        return Ok(record(kind, FilterStatus::Reject, "no coverage data produced"));
    };
    let text: Vec<&str> = norm.text.lines().collect();
    let live: Vec<String> = lines
        .iter()
        .filter_map(|l| {
            let n = counts.get(l).copied().unwrap_or(0);
            (n > 0).then(|| format!("line {l} ran {n}x: {}", text.get(l - 1).map_or("", |s| s.trim())))
        })
        .collect();
    Ok(if live.is_empty() {
        record(kind, FilterStatus::Pass, format!("{} inserted statement line(s), all count 0", lines.len()))
    } else {
        record(kind, FilterStatus::Reject, format!("live code: {}", live.join("; ")))
    })
}

/// Everything the filter pipeline needs besides the candidate.
pub struct FilterContext<'a> {
    pub profile: &'a LanguageProfile,
    pub toolchain: &'a ToolchainSettings,
    pub settings: &'a FilterSettings,
    /// Step-0 code, the reference for what counts as inserted.
    pub baseline_code: &'a str,
    /// Size per step at the reference flag, keyed by compiler.
    pub size_series: &'a BTreeMap<String, Vec<u64>>,
    pub scratch: &'a Path,
}

/// Runs the filters in order, stopping at the first rejection.
pub fn run_filters(candidate: &ViolationCandidate, ctx: &FilterContext<'_>) -> Result<Vec<FilterRecord>> {
    let mut evidence = Vec::new();
    let mono = monotonic_record(ctx.size_series, ctx.settings.strict_monotonic);
    let stop = |r: &FilterRecord| r.status == FilterStatus::Reject;
    if stop(&mono) {
        evidence.push(mono);
        return Ok(evidence);
    }
    evidence.push(mono);

    let san = if ctx.settings.sanitizers {
        sanitizer_filter(&candidate.program, ctx.profile, &ctx.scratch.join("sanitize"), ctx.toolchain)?
    } else {
        record(FilterKind::Sanitizer, FilterStatus::Skipped, "disabled")
    };
    let rejected = stop(&san);
    evidence.push(san);
    if rejected {
        return Ok(evidence);
    }

    if let Some(cmd) = &ctx.settings.external_validator {
        let ext =
            external_validator_filter(cmd, &candidate.program, ctx.profile, &ctx.scratch.join("validate"), ctx.toolchain)?;
        let rejected = stop(&ext);
        evidence.push(ext);
        if rejected {
            return Ok(evidence);
        }
    }

    evidence.push(dead_code_filter(candidate, ctx.baseline_code, ctx.profile, &ctx.scratch.join("coverage"), ctx.toolchain)?);
    Ok(evidence)
}

/// Per-filter rejection counts across a campaign.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterHealth {
    pub candidates: u64,
    pub rejected_by: BTreeMap<FilterKind, u64>,
}

impl FilterHealth {
    pub fn record(&mut self, evidence: &[FilterRecord]) {
        self.candidates += 1;
        for r in evidence.iter().filter(|r| r.status == FilterStatus::Reject) {
            *self.rejected_by.entry(r.filter).or_default() += 1;
        }
    }

    /// Filters rejecting more than `limit` of candidates.
    pub fn warnings(&self, limit: Fraction) -> Vec<String> {
        if self.candidates == 0 {
            return Vec::new();
        }
        self.rejected_by
            .iter()
            .filter(|(_, n)| **n as u128 * limit.den as u128 > self.candidates as u128 * limit.num as u128)
            .map(|(k, n)| {
                format!(
                    "{k:?} rejected {n} of {} candidates ({}), above {}",
                    self.candidates,
                    Fraction::new(*n, self.candidates).as_percent(),
                    limit.as_percent()
                )
            })
            .collect()
    }
}
