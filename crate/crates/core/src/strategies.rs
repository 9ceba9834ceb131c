//! The four differential checks. Each maps one step's compile outcomes to at
//! most one [`ViolationCandidate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    threshold_exceeded, Channel, CompileOutcome, CompilerSpec, Fraction, SizeRef, SourceProgram, Strategy,
    ViolationCandidate,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub pipeline_threshold: Fraction,
    pub multi_compiler_threshold: Fraction,
    pub single_compiler_threshold: Fraction,
    /// Overrides every compiler's own size flag when set.
    pub reference_opt_flag: Option<String>,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy) -> Self {
        StrategyConfig {
            strategy,
            pipeline_threshold: Fraction::new(5, 100),
            multi_compiler_threshold: Fraction::new(10, 100),
            single_compiler_threshold: Fraction::ZERO,
            reference_opt_flag: None,
        }
    }

    /// Threshold of the active strategy; dead code has none.
    pub fn threshold(&self) -> Fraction {
        match self.strategy {
            Strategy::DeadCode => Fraction::ZERO,
            Strategy::Pipeline => self.pipeline_threshold,
            Strategy::SingleCompiler => self.single_compiler_threshold,
            Strategy::MultiCompiler => self.multi_compiler_threshold,
        }
    }

    pub fn reference_flag<'a>(&'a self, spec: &'a CompilerSpec) -> &'a str {
        self.reference_opt_flag.as_deref().unwrap_or(&spec.size_opt_flag)
    }
}

/// One `(compiler, flag)` cell compiled at every step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub compiler: CompilerSpec,
    pub opt_flag: String,
}

/// Lays out the compile matrix a strategy needs from the configured compilers.
pub fn build_matrix(cfg: &StrategyConfig, compilers: &[CompilerSpec]) -> Result<Vec<MatrixEntry>> {
    let first = compilers.first().ok_or_else(|| Error::config("compilers", "need at least one compiler"))?;
    let entry = |c: &CompilerSpec, f: &str| MatrixEntry { compiler: c.clone(), opt_flag: f.to_string() };
    Ok(match cfg.strategy {
        Strategy::DeadCode => vec![entry(first, cfg.reference_flag(first))],
        Strategy::Pipeline => {
            let mut flags = first.pipeline_flags();
            if let Some(r) = &cfg.reference_opt_flag {
                flags.retain(|f| f != r);
                flags.insert(0, r.clone());
            }
            flags.iter().map(|f| entry(first, f)).collect()
        }
        Strategy::SingleCompiler => {
            let trunks = compilers.iter().filter(|c| c.channel == Channel::Trunk).count();
            if trunks != 1 {
                return Err(Error::config("compilers", format!("single_compiler needs exactly one trunk entry, found {trunks}")));
            }
            compilers.iter().map(|c| entry(c, cfg.reference_flag(c))).collect()
        }
        Strategy::MultiCompiler => compilers.iter().map(|c| entry(c, cfg.reference_flag(c))).collect(),
    })
}

fn size_ref(outcome: &CompileOutcome, step: usize) -> Option<SizeRef> {
    SizeRef::of(outcome, step)
}

/// Candidate iff the step's size exceeds the step-0 size for the same
/// compiler and flag.
pub fn dead_code_check(
    step_outcome: &CompileOutcome,
    baseline_outcome: &CompileOutcome,
    program: &SourceProgram,
) -> Option<ViolationCandidate> {
    let offender = size_ref(step_outcome, program.step_index)?;
    let baseline = size_ref(baseline_outcome, 0)?;
    (offender.size > baseline.size)
        .then(|| ViolationCandidate::new(Strategy::DeadCode, program, baseline, offender, Fraction::ZERO))
}

/// Candidate iff the size flag's output exceeds the smallest output of any
/// other flag by more than `threshold`.
pub fn pipeline_check(
    outcomes: &[CompileOutcome],
    size_flag: &str,
    program: &SourceProgram,
    threshold: Fraction,
) -> Result<Option<ViolationCandidate>> {
    let step = program.step_index;
    let Some(offender) = outcomes.iter().find(|o| o.opt_flag == size_flag).and_then(|o| size_ref(o, step)) else {
        return Ok(None);
    };
    let others: Option<Vec<SizeRef>> =
        outcomes.iter().filter(|o| o.opt_flag != size_flag).map(|o| size_ref(o, step)).collect();
    let Some(baseline) = others.and_then(|v| v.into_iter().min_by(|a, b| (a.size, &a.opt_flag).cmp(&(b.size, &b.opt_flag)))) else {
        return Ok(None);
    };
    Ok(threshold_exceeded(offender.size, baseline.size, threshold)?
        .then(|| ViolationCandidate::new(Strategy::Pipeline, program, baseline, offender, threshold)))
}

/// Candidate iff trunk's output exceeds the smallest output among released
/// versions by more than `threshold`. Any failed compile skips the step.
/// Ties go to the lexicographically smallest id.
pub fn version_check(
    released: &[CompileOutcome],
    trunk: &CompileOutcome,
    program: &SourceProgram,
    threshold: Fraction,
) -> Result<Option<ViolationCandidate>> {
    let step = program.step_index;
    let Some(offender) = size_ref(trunk, step) else { return Ok(None) };
    let sizes: Option<Vec<SizeRef>> = released.iter().map(|o| size_ref(o, step)).collect();
    let Some(baseline) = sizes.and_then(|v| v.into_iter().min_by(|a, b| (a.size, &a.compiler_id).cmp(&(b.size, &b.compiler_id)))) else {
        return Ok(None);
    };
    Ok(threshold_exceeded(offender.size, baseline.size, threshold)?
        .then(|| ViolationCandidate::new(Strategy::SingleCompiler, program, baseline, offender, threshold)))
}

/// Candidate iff the largest output exceeds the smallest by more than
/// `threshold`. Ties on either side go to the lexicographically smallest id.
pub fn multi_compiler_check(
    outcomes: &[CompileOutcome],
    program: &SourceProgram,
    threshold: Fraction,
) -> Result<Option<ViolationCandidate>> {
    let step = program.step_index;
    let Some(sizes) = outcomes.iter().map(|o| size_ref(o, step)).collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    if sizes.len() < 2 {
        return Ok(None);
    }
    let offender = sizes
        .iter()
        .max_by(|a, b| a.size.cmp(&b.size).then_with(|| b.compiler_id.cmp(&a.compiler_id)))
        .cloned()
        .expect("non-empty");
    let baseline = sizes
        .iter()
        .min_by(|a, b| a.size.cmp(&b.size).then_with(|| a.compiler_id.cmp(&b.compiler_id)))
        .cloned()
        .expect("non-empty");
    if offender.compiler_id == baseline.compiler_id && offender.opt_flag == baseline.opt_flag {
        return Ok(None);
    }
    Ok(threshold_exceeded(offender.size, baseline.size, threshold)?
        .then(|| ViolationCandidate::new(Strategy::MultiCompiler, program, baseline, offender, threshold)))
}

/// Runs the configured strategy over one step. `outcomes` and `step0` are
/// aligned with `matrix`.
pub fn evaluate(
    cfg: &StrategyConfig,
    matrix: &[MatrixEntry],
    outcomes: &[CompileOutcome],
    step0: &[CompileOutcome],
    program: &SourceProgram,
) -> Result<Option<ViolationCandidate>> {
    match cfg.strategy {
        Strategy::DeadCode => Ok(match (outcomes.first(), step0.first()) {
            (Some(o), Some(b)) => dead_code_check(o, b, program),
            _ => None,
        }),
        Strategy::Pipeline => {
            let flag = matrix.first().map(|e| e.opt_flag.as_str()).unwrap_or_default();
            pipeline_check(outcomes, flag, program, cfg.pipeline_threshold)
        }
        Strategy::SingleCompiler => {
            let Some(t) = matrix.iter().position(|e| e.compiler.channel == Channel::Trunk) else {
                return Ok(None);
            };
            let released: Vec<CompileOutcome> =
                outcomes.iter().enumerate().filter(|(i, _)| *i != t).map(|(_, o)| o.clone()).collect();
            version_check(&released, &outcomes[t], program, cfg.single_compiler_threshold)
        }
        Strategy::MultiCompiler => multi_compiler_check(outcomes, program, cfg.multi_compiler_threshold),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SizeMeasurement, SizeMetric};
    use proptest::prelude::*;

    fn out(id: &str, flag: &str, size: u64) -> CompileOutcome {
        CompileOutcome {
            compiler_id: id.into(),
            opt_flag: flag.into(),
            success: true,
            assembly: String::new(),
            diagnostics: String::new(),
            size: Some(SizeMeasurement { metric: SizeMetric::InstructionCount, value: size }),
            wall_time: 0.0,
        }
    }

    fn prog(step: usize) -> SourceProgram {
        let mut p = SourceProgram::seed("c", "int f(int a) { return 0; }");
        for _ in 0..step {
            p = p.mutated(p.code.clone(), "cf-dead-conditional");
        }
        p
    }

    fn t(s: &str) -> Fraction {
        Fraction::from_decimal(s).unwrap()
    }

    #[test]
    fn dead_code_examples() {
        let base = out("gcc", "-Os", 3);
        assert!(dead_code_check(&out("gcc", "-Os", 3), &base, &prog(2)).is_none());
        let c = dead_code_check(&out("gcc", "-Os", 9), &base, &prog(2)).unwrap();
        assert_eq!((c.offender.size, c.baseline.size, c.offender.step, c.baseline.step), (9, 3, 2, 0));
        assert!(dead_code_check(&out("gcc", "-Os", 2), &base, &prog(2)).is_none());
    }

    #[test]
    fn pipeline_examples() {
        let p = prog(1);
        let c = pipeline_check(&[out("clang", "-Oz", 40), out("clang", "-O3", 4)], "-Oz", &p, t("0.05")).unwrap();
        let c = c.unwrap();
        assert_eq!(c.baseline.opt_flag, "-O3");
        assert_eq!(c.ratio, Fraction::new(10, 1));
        assert!(pipeline_check(&[out("c", "-Oz", 100), out("c", "-O3", 96)], "-Oz", &p, t("0.05")).unwrap().is_none());
        assert!(pipeline_check(&[out("c", "-Oz", 10), out("c", "-O3", 10)], "-Oz", &p, t("0.05")).unwrap().is_none());
        let three = [out("c", "-Oz", 30), out("c", "-O3", 20), out("c", "-O2", 12)];
        assert_eq!(pipeline_check(&three, "-Oz", &p, t("0.05")).unwrap().unwrap().baseline.opt_flag, "-O2");
    }

    #[test]
    fn version_examples() {
        let p = prog(1);
        let c = version_check(&[out("gcc-13.3", "-Os", 8)], &out("gcc-trunk", "-Os", 12), &p, Fraction::ZERO);
        assert_eq!(c.unwrap().unwrap().baseline.compiler_id, "gcc-13.3");
        assert!(version_check(&[out("r", "-Os", 10)], &out("t", "-Os", 10), &p, Fraction::ZERO).unwrap().is_none());
        let failed = CompileOutcome::failed("r", "-Os", "boom", 0.0);
        assert!(version_check(&[failed, out("q", "-Os", 1)], &out("t", "-Os", 10), &p, Fraction::ZERO)
            .unwrap()
            .is_none());
        let prog_then_regress = [out("g12", "-Os", 20), out("g13", "-Os", 8), out("g14", "-Os", 10)];
        let c = version_check(&prog_then_regress, &out("t", "-Os", 10), &p, Fraction::ZERO).unwrap().unwrap();
        assert_eq!(c.baseline.compiler_id, "g13");
    }

    #[test]
    fn multi_examples() {
        let p = prog(1);
        let c = multi_compiler_check(&[out("clang", "-Oz", 3), out("gcc", "-Os", 30)], &p, t("0.10")).unwrap();
        assert_eq!(c.unwrap().offender.compiler_id, "gcc");
        assert!(multi_compiler_check(&[out("a", "-Oz", 100), out("b", "-Oz", 109)], &p, t("0.10")).unwrap().is_none());
        let c = multi_compiler_check(&[out("a", "-Oz", 100), out("b", "-Oz", 111)], &p, t("0.10")).unwrap().unwrap();
        assert_eq!((c.offender.compiler_id.as_str(), c.ratio), ("b", Fraction::new(111, 100)));
        let tie = [out("z", "-Oz", 50), out("m", "-Oz", 50), out("a", "-Oz", 10)];
        assert_eq!(multi_compiler_check(&tie, &p, t("0.10")).unwrap().unwrap().offender.compiler_id, "m");
    }

    #[test]
    fn zero_baseline_is_an_error() {
        let p = prog(1);
        let r = multi_compiler_check(&[out("a", "-Oz", 0), out("b", "-Oz", 5)], &p, t("0.10"));
        assert!(matches!(r, Err(Error::DegenerateBaseline)));
    }

    proptest! {
        #[test]
        fn candidates_recheck_and_scale(sizes in proptest::collection::vec(1u64..500, 2..6), k in 1u64..50, tenths in 0u64..=10) {
            let p = prog(1);
            let thr = Fraction::new(tenths, 100);
            let outs: Vec<_> = sizes.iter().enumerate().map(|(i, s)| out(&format!("c{i}"), "-Oz", *s)).collect();
            let scaled: Vec<_> = sizes.iter().enumerate().map(|(i, s)| out(&format!("c{i}"), "-Oz", s * k)).collect();
            let a = multi_compiler_check(&outs, &p, thr).unwrap();
            let b = multi_compiler_check(&scaled, &p, thr).unwrap();
            prop_assert_eq!(a.is_some(), b.is_some());
            if let Some(c) = a {
                prop_assert!(c.holds());
            }
            let base = out("g", "-Os", sizes[0]);
            prop_assert!(dead_code_check(&base, &base, &p).is_none());
        }
    }
}
