//! Value types shared across the harness, plus the threshold arithmetic every
//! differential strategy reduces to.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Non-negative exact fraction `num / den`, always stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };

    /// # Panics
    /// Panics if `den` is zero.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "fraction with zero denominator");
        let g = gcd(num, den).max(1);
        Fraction { num: num / g, den: den / g }
    }

    /// Parses a plain decimal such as `0.05` or `1` into an exact fraction.
    pub fn from_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) || frac_part.len() > 18 {
            return None;
        }
        let den = 10u64.checked_pow(frac_part.len() as u32)?;
        let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
        let num = int.checked_mul(den)?.checked_add(frac)?;
        Some(Fraction::new(num, den))
    }

    /// Exact conversion of the shortest decimal rendering of `value`.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        Fraction::from_decimal(&format!("{value}"))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Two decimals, rounded half up in integer arithmetic.
    pub fn as_percent(self) -> String {
        let den = self.den as u128;
        let hundredths = (self.num as u128 * 20_000 + den) / (2 * den);
        format!("{}.{:02}%", hundredths / 100, hundredths % 100)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `offender > baseline * (1 + threshold)`, evaluated in exact integer arithmetic.
pub fn threshold_exceeded(offender: u64, baseline: u64, threshold: Fraction) -> Result<bool> {
    if baseline == 0 {
        return Err(Error::DegenerateBaseline);
    }
    let lhs = offender as u128 * threshold.den as u128;
    let rhs = baseline as u128 * (threshold.den as u128 + threshold.num as u128);
    Ok(lhs > rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DeadCode,
    Pipeline,
    SingleCompiler,
    MultiCompiler,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::DeadCode,
        Strategy::Pipeline,
        Strategy::SingleCompiler,
        Strategy::MultiCompiler,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::DeadCode => "dead_code",
            Strategy::Pipeline => "pipeline",
            Strategy::SingleCompiler => "single_compiler",
            Strategy::MultiCompiler => "multi_compiler",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == norm)
            .ok_or_else(|| Error::config("strategy", format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    ControlFlow,
    Conditionals,
    AggregatesPointers,
    FunctionArguments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deadness {
    Dead,
    Live,
}

/// One prompt fragment from the instruction catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationInstruction {
    pub id: String,
    pub category: Category,
    pub text: String,
    pub deadness: Deadness,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_language_text: BTreeMap<String, String>,
}

impl MutationInstruction {
    /// The fragment to render for `language`, honoring per-language overrides.
    pub fn text_for(&self, language: &str) -> &str {
        self.per_language_text
            .get(language)
            .map(String::as_str)
            .unwrap_or(&self.text)
    }
}

pub fn content_digest(code: &str) -> String {
    hex::encode(Sha256::digest(code.as_bytes()))
}

/// A program in an episode, with the instruction lineage that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub language: String,
    pub code: String,
    pub step_index: usize,
    pub lineage: Vec<String>,
    pub parent_digest: Option<String>,
}

impl SourceProgram {
    pub fn seed(language: impl Into<String>, code: impl Into<String>) -> Self {
        SourceProgram {
            language: language.into(),
            code: code.into(),
            step_index: 0,
            lineage: Vec::new(),
            parent_digest: None,
        }
    }

    /// The successor produced by applying `instruction_id` to this program.
    pub fn mutated(&self, code: impl Into<String>, instruction_id: &str) -> Self {
        let mut lineage = self.lineage.clone();
        lineage.push(instruction_id.to_string());
        SourceProgram {
            language: self.language.clone(),
            code: code.into(),
            step_index: self.step_index + 1,
            lineage,
            parent_digest: Some(self.digest()),
        }
    }

    /// Same lineage, different text (driver wrapping, normalization).
    pub fn with_code(&self, code: impl Into<String>) -> Self {
        SourceProgram { code: code.into(), ..self.clone() }
    }

    pub fn digest(&self) -> String {
        content_digest(&self.code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    #[default]
    Release,
    Trunk,
}

/// One compiler installation and how to invoke it.
///
/// `invocation` is a shell command template; `{input}`, `{output}` and
/// `{flags}` are substituted per run, with the command executed inside the
/// run's scratch directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilerSpec {
    pub id: String,
    #[serde(default)]
    pub family: String,
    pub invocation: String,
    #[serde(default)]
    pub version_label: String,
    #[serde(default)]
    pub channel: Channel,
    #[serde(default = "default_size_flag")]
    pub size_opt_flag: String,
    #[serde(default = "default_perf_flag")]
    pub perf_opt_flag: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub other_flags: Vec<String>,
    /// Languages this compiler accepts; empty means any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub languages: Vec<String>,
    /// Template producing an object file, used by the text-section metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_invocation: Option<String>,
}

fn default_size_flag() -> String {
    "-Oz".into()
}

fn default_perf_flag() -> String {
    "-O3".into()
}

impl CompilerSpec {
    pub fn family(&self) -> &str {
        if self.family.is_empty() {
            &self.id
        } else {
            &self.family
        }
    }

    pub fn accepts(&self, language: &str) -> bool {
        self.languages.is_empty() || self.languages.iter().any(|l| l == language)
    }

    /// Size flag first, then the performance flag, then any extras; no repeats.
    pub fn pipeline_flags(&self) -> Vec<String> {
        let mut flags = vec![self.size_opt_flag.clone()];
        for f in std::iter::once(&self.perf_opt_flag).chain(&self.other_flags) {
            if !flags.contains(f) {
                flags.push(f.clone());
            }
        }
        flags
    }

    pub fn validate(&self) -> Result<()> {
        let key = format!("compilers.{}.invocation", self.id);
        if self.id.trim().is_empty() {
            return Err(Error::config("compilers.id", "compiler id must be non-empty"));
        }
        for placeholder in ["{input}", "{output}"] {
            if !self.invocation.contains(placeholder) {
                return Err(Error::config(key, format!("missing {placeholder} placeholder")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMetric {
    #[default]
    InstructionCount,
    TextSectionBytes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SizeMeasurement {
    pub metric: SizeMetric,
    pub value: u64,
}

/// Result of one compiler invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileOutcome {
    pub compiler_id: String,
    pub opt_flag: String,
    pub success: bool,
    pub assembly: String,
    pub diagnostics: String,
    pub size: Option<SizeMeasurement>,
    pub wall_time: f64,
}

impl CompileOutcome {
    pub fn failed(compiler_id: &str, opt_flag: &str, diagnostics: impl Into<String>, wall_time: f64) -> Self {
        CompileOutcome {
            compiler_id: compiler_id.to_string(),
            opt_flag: opt_flag.to_string(),
            success: false,
            assembly: String::new(),
            diagnostics: diagnostics.into(),
            size: None,
            wall_time,
        }
    }

    pub fn size_value(&self) -> Option<u64> {
        self.size.filter(|_| self.success).map(|s| s.value)
    }
}

/// `(compiler, flag, size)` triple naming one side of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SizeRef {
    pub compiler_id: String,
    pub opt_flag: String,
    pub size: u64,
    /// Episode step the size was measured at.
    pub step: usize,
}

impl SizeRef {
    pub fn of(outcome: &CompileOutcome, step: usize) -> Option<Self> {
        Some(SizeRef {
            compiler_id: outcome.compiler_id.clone(),
            opt_flag: outcome.opt_flag.clone(),
            size: outcome.size_value()?,
            step,
        })
    }
}

/// A suspicious size delta awaiting false-positive filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationCandidate {
    pub strategy: Strategy,
    pub program: SourceProgram,
    pub baseline: SizeRef,
    pub offender: SizeRef,
    pub ratio: Fraction,
    pub threshold: Fraction,
}

impl ViolationCandidate {
    pub fn new(
        strategy: Strategy,
        program: &SourceProgram,
        baseline: SizeRef,
        offender: SizeRef,
        threshold: Fraction,
    ) -> Self {
        let ratio = if baseline.size == 0 {
            Fraction::new(offender.size, 1)
        } else {
            Fraction::new(offender.size, baseline.size)
        };
        ViolationCandidate { strategy, program: program.clone(), baseline, offender, ratio, threshold }
    }

    /// Re-derives the trigger decision from the recorded triple alone.
    pub fn holds(&self) -> bool {
        match self.strategy {
            Strategy::DeadCode => self.offender.size > self.baseline.size,
            _ => threshold_exceeded(self.offender.size, self.baseline.size, self.threshold)
                .unwrap_or(false),
        }
    }

    /// Human-readable form of the inequality that fired.
    pub fn inequality(&self) -> String {
        let o = &self.offender;
        let b = &self.baseline;
        match self.strategy {
            Strategy::DeadCode => format!(
                "size_step{}({}, {}) = {} > size_step{}({}, {}) = {}",
                o.step, o.compiler_id, o.opt_flag, o.size, b.step, b.compiler_id, b.opt_flag, b.size
            ),
            _ => format!(
                "size({}, {}) = {} > (1 + {}) * size({}, {}) = (1 + {}) * {}",
                o.compiler_id,
                o.opt_flag,
                o.size,
                self.threshold,
                b.compiler_id,
                b.opt_flag,
                self.threshold,
                b.size
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    MonotonicSize,
    Sanitizer,
    ExternalValidator,
    DeadCode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStatus {
    Pass,
    Reject,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub filter: FilterKind,
    pub status: FilterStatus,
    pub detail: String,
}

/// Fingerprint of a violation across released compiler versions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ViolationSignature {
    pub version_ids: Vec<String>,
    pub exhibits: Vec<bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotations: BTreeMap<String, String>,
    #[serde(default)]
    pub culprit_revision: Option<String>,
}

impl ViolationSignature {
    pub fn new(version_ids: Vec<String>, exhibits: Vec<bool>) -> Self {
        assert_eq!(version_ids.len(), exhibits.len(), "exhibits must align with version ids");
        ViolationSignature { version_ids, exhibits, annotations: BTreeMap::new(), culprit_revision: None }
    }

    pub fn is_duplicate_of(&self, other: &ViolationSignature) -> bool {
        let same_screen = self.version_ids == other.version_ids && self.exhibits == other.exhibits;
        let same_culprit = matches!(
            (&self.culprit_revision, &other.culprit_revision),
            (Some(a), Some(b)) if a == b
        );
        same_screen || same_culprit
    }

    /// Reproduces on no release: only the bleeding edge shows it.
    pub fn is_trunk_only(&self) -> bool {
        self.exhibits.iter().all(|e| !e)
    }

    /// Some version exhibits both, yet the vectors differ.
    pub fn overlaps(&self, other: &ViolationSignature) -> bool {
        self.version_ids == other.version_ids
            && self.exhibits != other.exhibits
            && self.exhibits.iter().zip(&other.exhibits).any(|(a, b)| *a && *b)
    }
}

/// A candidate that survived every required filter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub candidate: ViolationCandidate,
    pub filter_evidence: Vec<FilterRecord>,
    pub signature: Option<ViolationSignature>,
    pub report_path: Option<std::path::PathBuf>,
}

impl Violation {
    /// Confirms `candidate` only if no record rejects and every filter in
    /// `required` passed.
    pub fn confirm(
        candidate: ViolationCandidate,
        filter_evidence: Vec<FilterRecord>,
        required: &[FilterKind],
    ) -> Option<Self> {
        if filter_evidence.iter().any(|r| r.status == FilterStatus::Reject) {
            return None;
        }
        let passed = |kind: &FilterKind| {
            filter_evidence.iter().any(|r| r.filter == *kind && r.status == FilterStatus::Pass)
        };
        if !required.iter().all(passed) {
            return None;
        }
        Some(Violation { candidate, filter_evidence, signature: None, report_path: None })
    }
}

/// Aggregate campaign numbers, one row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub total_programs: u64,
    pub compilable: u64,
    pub violations: u64,
    pub steps_min: Option<usize>,
    pub steps_mean: Option<f64>,
    pub steps_max: Option<usize>,
    pub compilable_percent: String,
    pub violations_percent: String,
}

impl SessionStats {
    pub fn percent(part: u64, whole: u64) -> String {
        if whole == 0 {
            "0.00%".into()
        } else {
            Fraction::new(part, whole).as_percent()
        }
    }

    /// `Total programs | Compilable | Violations | Avg. steps (min / max)`.
    pub fn table_row(&self) -> String {
        let steps = match (self.steps_mean, self.steps_min, self.steps_max) {
            (Some(mean), Some(min), Some(max)) => format!("{mean:.2} ({min} / {max})"),
            _ => "-".into(),
        };
        format!(
            "{} | {} ({}) | {} ({}) | {}",
            self.total_programs,
            self.compilable,
            self.compilable_percent,
            self.violations,
            self.violations_percent,
            steps
        )
    }
}
