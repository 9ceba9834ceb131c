//! Violation reports: canonical JSON plus a shell reproduction script, and
//! re-checking a report against local toolchains.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dedup::{Exhibit, Recheck};
use crate::error::{Error, IoContext, Result};
use crate::language::{builtin_profile, LanguageProfile};
use crate::model::{
    CompileOutcome, CompilerSpec, FilterRecord, Fraction, SizeMetric, SizeRef, SourceProgram, Strategy,
    ViolationCandidate, ViolationSignature,
};
use crate::strategies::{evaluate, MatrixEntry, StrategyConfig};
use crate::toolchain::{compile_to_asm, expand, flag_slug, shell_quote, ToolchainSettings};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub language: String,
    pub strategy: Strategy,
    pub metric: SizeMetric,
    pub program: SourceProgram,
    /// Step-0 program the episode started from.
    pub baseline_program: SourceProgram,
    pub matrix: Vec<MatrixEntry>,
    /// Sizes at the violating step, then at step 0.
    pub sizes: Vec<SizeRef>,
    pub baseline: SizeRef,
    pub offender: SizeRef,
    pub ratio: Fraction,
    pub threshold: Fraction,
    pub inequality: String,
    pub decision: bool,
    pub filter_evidence: Vec<FilterRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<ViolationSignature>,
    pub repro_script: String,
}

impl Report {
    pub fn new(
        candidate: &ViolationCandidate,
        filter_evidence: &[FilterRecord],
        baseline_program: &SourceProgram,
        matrix: &[MatrixEntry],
        step_outcomes: &[CompileOutcome],
        step0_outcomes: &[CompileOutcome],
        metric: SizeMetric,
    ) -> Self {
        let step = candidate.program.step_index;
        let sizes = step_outcomes
            .iter()
            .filter_map(|o| SizeRef::of(o, step))
            .chain(step0_outcomes.iter().filter_map(|o| SizeRef::of(o, 0)))
            .collect();
        let mut report = Report {
            schema_version: SCHEMA_VERSION,
            language: candidate.program.language.clone(),
            strategy: candidate.strategy,
            metric,
            program: candidate.program.clone(),
            baseline_program: baseline_program.clone(),
            matrix: matrix.to_vec(),
            sizes,
            baseline: candidate.baseline.clone(),
            offender: candidate.offender.clone(),
            ratio: candidate.ratio,
            threshold: candidate.threshold,
            inequality: candidate.inequality(),
            decision: candidate.holds(),
            filter_evidence: filter_evidence.to_vec(),
            signature: None,
            repro_script: String::new(),
        };
        report.repro_script = repro_script(&report);
        report
    }

    pub fn candidate(&self) -> ViolationCandidate {
        ViolationCandidate {
            strategy: self.strategy,
            program: self.program.clone(),
            baseline: self.baseline.clone(),
            offender: self.offender.clone(),
            ratio: self.ratio,
            threshold: self.threshold,
        }
    }

    /// Canonical text: sorted keys, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            other => return Err(Error::Report(format!("unsupported schema_version {other:?}"))),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Report::from_json(&std::fs::read_to_string(path).at(path)?)
    }

    /// Writes `<dir>/<name>.json` and `<dir>/<name>.repro.sh`.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).at(dir)?;
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, self.to_canonical_json()?).at(&path)?;
        let sh = dir.join(format!("{name}.repro.sh"));
        std::fs::write(&sh, &self.repro_script).at(&sh)?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            let _ = std::fs::set_permissions(&sh, std::fs::Permissions::from_mode(0o755));
        }
        Ok(path)
    }

    fn entry_for(&self, side: &SizeRef) -> Option<&MatrixEntry> {
        self.matrix.iter().find(|e| e.compiler.id == side.compiler_id && e.opt_flag == side.opt_flag)
    }

    pub fn strategy_config(&self) -> StrategyConfig {
        let mut cfg = StrategyConfig::new(self.strategy);
        match self.strategy {
            Strategy::DeadCode => {}
            Strategy::Pipeline => cfg.pipeline_threshold = self.threshold,
            Strategy::SingleCompiler => cfg.single_compiler_threshold = self.threshold,
            Strategy::MultiCompiler => cfg.multi_compiler_threshold = self.threshold,
        }
        cfg
    }
}

const HEREDOC: &str = "SIZEPROBE_SOURCE";

fn compile_line(entry: &MatrixEntry, input: &str, output: &str) -> String {
    let flags = shell_quote(&entry.opt_flag);
    let mut cmd = expand(&entry.compiler.invocation, &[("input", input), ("output", output), ("flags", &flags)]);
    if !entry.compiler.invocation.contains("{flags}") {
        cmd = format!("{cmd} {flags}");
    }
    cmd
}

/// Shell script that recompiles the compared configurations in a fresh
/// directory and prints each assembly file's instruction count.
pub fn repro_script(report: &Report) -> String {
    let ext = builtin_profile(&report.language).map(|p| p.extension).unwrap_or_else(|_| "src".into());
    let mut s = String::from("#!/bin/sh\n");
    s.push_str(&format!("# {} violation: {}\n", report.strategy, report.inequality));
    s.push_str("set -e\nwork=$(mktemp -d)\ncd \"$work\"\n");
    s.push_str(&format!("cat > mutant.{ext} <<'{HEREDOC}'\n{}\n{HEREDOC}\n", report.program.code));
    let mut lines = Vec::new();
    if report.strategy == Strategy::DeadCode {
        s.push_str(&format!("cat > baseline.{ext} <<'{HEREDOC}'\n{}\n{HEREDOC}\n", report.baseline_program.code));
        if let Some(e) = report.entry_for(&report.offender) {
            let slug = flag_slug(&e.opt_flag);
            lines.push(format!("# step {} ({} {})", report.baseline.step, e.compiler.id, e.opt_flag));
            lines.push(compile_line(e, &format!("baseline.{ext}"), &format!("baseline-{}-{slug}.s", e.compiler.id)));
            lines.push(format!("# step {} ({} {})", report.offender.step, e.compiler.id, e.opt_flag));
            lines.push(compile_line(e, &format!("mutant.{ext}"), &format!("mutant-{}-{slug}.s", e.compiler.id)));
        }
    } else {
        for side in [&report.baseline, &report.offender] {
            if let Some(e) = report.entry_for(side) {
                lines.push(format!("# {} {}", e.compiler.id, e.opt_flag));
                let out = format!("mutant-{}-{}.s", e.compiler.id, flag_slug(&e.opt_flag));
                lines.push(compile_line(e, &format!("mutant.{ext}"), &out));
            }
        }
    }
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    s.push_str("for f in *.s; do\n  n=$(sed -e 's/#.*//' -e 's|//.*||' -e 's/;.*//' \"$f\" | grep -v -E '^[[:space:]]*($|\\.)' | grep -c -v -E ':[[:space:]]*$' || true)\n  echo \"$f $n\"\ndone\n");
    s
}

/// Outcome of re-running a report's check with local toolchains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub stored_decision: bool,
    /// The stored inequality re-evaluated from the stored sizes alone.
    pub record_consistent: bool,
    /// Whether recompiling reproduces a candidate with the same offender.
    pub recomputed_decision: bool,
    pub sizes: Vec<SizeRef>,
    pub detail: String,
}

impl VerifyOutcome {
    pub fn matches(&self) -> bool {
        self.record_consistent && self.stored_decision == self.recomputed_decision
    }
}

fn compile_matrix(
    matrix: &[MatrixEntry],
    program: &SourceProgram,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<Vec<CompileOutcome>> {
    matrix
        .iter()
        .map(|e| {
            let sub = dir.join(&e.compiler.id);
            match compile_to_asm(&e.compiler, &e.opt_flag, program, profile, &sub, settings) {
                Err(Error::CompileTimeout { .. }) => Ok(CompileOutcome::failed(&e.compiler.id, &e.opt_flag, "timeout", 0.0)),
                other => other,
            }
        })
        .collect()
}

/// Recompiles the report's program (and for dead code its baseline) with
/// `matrix` and evaluates the report's strategy.
pub fn recheck_matrix(
    report: &Report,
    matrix: &[MatrixEntry],
    scratch: &Path,
    settings: &ToolchainSettings,
) -> Result<(Option<ViolationCandidate>, Vec<CompileOutcome>, Vec<CompileOutcome>)> {
    let profile = builtin_profile(&report.language)?;
    let settings = ToolchainSettings { metric: report.metric, ..settings.clone() };
    let outcomes = compile_matrix(matrix, &report.program, &profile, &scratch.join("program"), &settings)?;
    let step0 = if report.strategy == Strategy::DeadCode {
        compile_matrix(matrix, &report.baseline_program, &profile, &scratch.join("baseline"), &settings)?
    } else {
        Vec::new()
    };
    let candidate = evaluate(&report.strategy_config(), matrix, &outcomes, &step0, &report.program).or_else(|e| match e {
        Error::DegenerateBaseline => Ok(None),
        other => Err(other),
    })?;
    Ok((candidate, outcomes, step0))
}

/// Re-derives the report's decision from its record and from a fresh
/// compile with the compilers it names.
pub fn verify(report: &Report, scratch: &Path, settings: &ToolchainSettings) -> Result<VerifyOutcome> {
    let record_consistent = report.candidate().holds() == report.decision;
    let (candidate, outcomes, step0) = recheck_matrix(report, &report.matrix, scratch, settings)?;
    let step = report.program.step_index;
    let sizes: Vec<SizeRef> = outcomes
        .iter()
        .filter_map(|o| SizeRef::of(o, step))
        .chain(step0.iter().filter_map(|o| SizeRef::of(o, 0)))
        .collect();
    let failures: Vec<String> = outcomes
        .iter()
        .chain(&step0)
        .filter(|o| !o.success)
        .map(|o| format!("{} {} failed: {}", o.compiler_id, o.opt_flag, o.diagnostics.lines().next().unwrap_or("")))
        .collect();
    let detail = match (&candidate, failures.is_empty()) {
        (Some(c), _) => c.inequality(),
        (None, true) => "no candidate".into(),
        (None, false) => failures.join("; "),
    };
    Ok(VerifyOutcome {
        stored_decision: report.decision,
        record_consistent,
        recomputed_decision: candidate.is_some_and(|c| c.offender.compiler_id == report.offender.compiler_id),
        sizes,
        detail,
    })
}

/// [`Recheck`] backed by a report: the given compiler replaces the
/// offender's compiler in the report's matrix.
pub struct ReportRecheck {
    pub report: Report,
    pub settings: ToolchainSettings,
    pub scratch: PathBuf,
}

impl Recheck for ReportRecheck {
    fn recheck(&self, compiler: &CompilerSpec) -> Result<Exhibit> {
        let offender_id = &self.report.offender.compiler_id;
        let mut matrix: Vec<MatrixEntry> = Vec::new();
        for e in &self.report.matrix {
            if &e.compiler.id == offender_id {
                matrix.push(MatrixEntry { compiler: compiler.clone(), opt_flag: e.opt_flag.clone() });
            } else if e.compiler.id != compiler.id {
                matrix.push(e.clone());
            }
        }
        if self.report.strategy == crate::model::Strategy::SingleCompiler {
            for e in &mut matrix {
                e.compiler.channel = if e.compiler.id == compiler.id {
                    crate::model::Channel::Trunk
                } else {
                    crate::model::Channel::Release
                };
            }
        }
        let dir = self.scratch.join(flag_slug(&compiler.id));
        let (candidate, outcomes, step0) = recheck_matrix(&self.report, &matrix, &dir, &self.settings)?;
        if let Some(fail) = outcomes.iter().chain(&step0).find(|o| !o.success) {
            return Ok(Exhibit::CompileFailed(format!("{} {}: {}", fail.compiler_id, fail.opt_flag, fail.diagnostics.trim())));
        }
        Ok(match candidate {
            Some(c) if c.offender.compiler_id == compiler.id => Exhibit::Triggers,
            _ => Exhibit::Clean,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FilterKind, FilterStatus};

    fn spec(id: &str, inv: &str) -> CompilerSpec {
        CompilerSpec {
            id: id.into(),
            family: id.into(),
            invocation: inv.into(),
            version_label: String::new(),
            channel: Default::default(),
            size_opt_flag: "-Oz".into(),
            perf_opt_flag: "-O3".into(),
            other_flags: vec![],
            languages: vec![],
            object_invocation: None,
        }
    }

    fn sample() -> Report {
        let base = SourceProgram::seed("c", "int f(int a) { return 0; }");
        let prog = base.mutated("int f(int a) { return a; }", "agg-array");
        let a = SizeRef { compiler_id: "a".into(), opt_flag: "-Oz".into(), size: 3, step: 1 };
        let b = SizeRef { compiler_id: "b".into(), opt_flag: "-Oz".into(), size: 30, step: 1 };
        let cand = ViolationCandidate::new(Strategy::MultiCompiler, &prog, a, b, Fraction::new(1, 10));
        let matrix = vec![
            MatrixEntry { compiler: spec("a", "cc-a -S {flags} {input} -o {output}"), opt_flag: "-Oz".into() },
            MatrixEntry { compiler: spec("b", "cc-b -S {flags} {input} -o {output}"), opt_flag: "-Oz".into() },
        ];
        let ev = vec![FilterRecord { filter: FilterKind::MonotonicSize, status: FilterStatus::Pass, detail: "ok".into() }];
        Report::new(&cand, &ev, &base, &matrix, &[], &[], SizeMetric::InstructionCount)
    }

    #[test]
    fn canonical_round_trip() {
        let r = sample();
        let text = r.to_canonical_json().unwrap();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_canonical_json().unwrap(), text);
        assert!(text.find("\"baseline\"").unwrap() < text.find("\"strategy\"").unwrap());
        assert!(r.decision);
    }

    #[test]
    fn multi_repro_has_two_compile_lines() {
        let script = sample().repro_script;
        assert_eq!(script.lines().filter(|l| l.starts_with("cc-")).count(), 2, "{script}");
        assert!(script.contains("cc-b -S -Oz mutant.c -o mutant-b-Oz.s"));
    }

    #[test]
    fn schema_version_is_checked() {
        let text = sample().to_canonical_json().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(Report::from_json(&text), Err(Error::Report(_))));
    }
}
