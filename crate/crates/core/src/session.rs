//! Episodes (seed to termination) and campaigns (episodes under a budget).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{default_catalog, load_catalog, validate_catalog};
use crate::config::CampaignConfig;
use crate::error::{Error, IoContext, Result};
use crate::filters::{run_filters, FilterContext, FilterHealth};
use crate::language::{builtin_profile, LanguageProfile};
use crate::model::{
    Channel, CompileOutcome, FilterRecord, MutationInstruction, SessionStats, SourceProgram, Strategy, Violation,
};
use crate::mutation::{build_prompt, extract_code, sample_instruction, seed_from_profile, MutationProvider};
use crate::report::Report;
use crate::strategies::{build_matrix, evaluate, MatrixEntry, StrategyConfig};
use crate::toolchain::compile_to_asm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeEnd {
    Violation,
    ExhaustedSteps,
    CompileFailure,
    ProviderFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub instruction: String,
    pub code: String,
    /// `"<compiler> <flag>"` to size; failed compiles are absent.
    pub sizes: BTreeMap<String, u64>,
    pub compiled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filter_evidence: Vec<FilterRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode_id: String,
    pub index: u64,
    pub end: EpisodeEnd,
    /// Mutations applied; for a compile failure this includes the failing one.
    pub steps: usize,
    pub lineage: Vec<String>,
    pub records: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything an episode shares with its campaign.
pub struct Campaign {
    pub config: CampaignConfig,
    pub campaign_id: String,
    pub dir: PathBuf,
    pub profile: LanguageProfile,
    pub catalog: Vec<MutationInstruction>,
    pub strategy: StrategyConfig,
    pub matrix: Vec<MatrixEntry>,
    pub seed: SourceProgram,
    pub step0: Vec<CompileOutcome>,
    pub provider: Arc<dyn MutationProvider>,
}

pub fn episode_id(index: u64) -> String {
    format!("ep-{index:06}")
}

fn label(e: &MatrixEntry) -> String {
    format!("{} {}", e.compiler.id, e.opt_flag)
}

/// Compiles `program` on every matrix entry under `dir/<compiler-id>/`.
/// Timeouts become failed outcomes.
pub fn compile_matrix(
    matrix: &[MatrixEntry],
    program: &SourceProgram,
    profile: &LanguageProfile,
    dir: &Path,
    config: &CampaignConfig,
) -> Result<Vec<CompileOutcome>> {
    matrix
        .iter()
        .map(|e| {
            let sub = dir.join(&e.compiler.id);
            match compile_to_asm(&e.compiler, &e.opt_flag, program, profile, &sub, &config.toolchain) {
                Err(Error::CompileTimeout { compiler_id, opt_flag, secs }) => {
                    Ok(CompileOutcome::failed(&compiler_id, &opt_flag, "timeout", secs))
                }
                other => other,
            }
        })
        .collect()
}

impl Campaign {
    /// Resolves the profile, catalog, matrix and provider, and compiles the
    /// seed on every matrix entry.
    pub fn prepare(config: &CampaignConfig, provider: Option<Arc<dyn MutationProvider>>) -> Result<Self> {
        config.validate()?;
        let profile = builtin_profile(&config.language)?;
        let catalog = match &config.catalog {
            Some(p) => load_catalog(p)?,
            None => default_catalog(),
        };
        validate_catalog(&catalog)?;
        let strategy = config.strategy_config()?;
        let matrix = build_matrix(&strategy, &config.compilers)?;
        let provider = match provider {
            Some(p) => p,
            None => Arc::from(config.provider.build(&profile)?),
        };
        let campaign_id = config.campaign_id();
        let dir = config.workdir.join(&campaign_id);
        let seed = seed_from_profile(&profile);
        let step0 = compile_matrix(&matrix, &seed, &profile, &dir.join("step-0"), config)?;
        for o in &step0 {
            if !o.success {
                return Err(Error::SeedDoesNotCompile {
                    compiler_id: o.compiler_id.clone(),
                    opt_flag: o.opt_flag.clone(),
                    diagnostics: o.diagnostics.trim().to_string(),
                });
            }
        }
        Ok(Campaign { config: config.clone(), campaign_id, dir, profile, catalog, strategy, matrix, seed, step0, provider })
    }

    /// Matrix entries whose sizes feed the monotonic filter: the size flag
    /// only, so pipeline sessions track just their first entry.
    fn reference_series(&self) -> Vec<usize> {
        match self.strategy.strategy {
            Strategy::Pipeline => vec![0],
            _ => (0..self.matrix.len()).collect(),
        }
    }

    fn gate(&self, outcomes: &[CompileOutcome]) -> (bool, Option<String>) {
        if self.strategy.strategy == Strategy::SingleCompiler {
            let trunk_ok = self
                .matrix
                .iter()
                .zip(outcomes)
                .all(|(e, o)| e.compiler.channel != Channel::Trunk || o.success);
            let released_failed: Vec<&str> = outcomes.iter().filter(|o| !o.success).map(|o| o.compiler_id.as_str()).collect();
            let note = (!released_failed.is_empty()).then(|| format!("step skipped: {} failed", released_failed.join(", ")));
            (trunk_ok, note)
        } else {
            (outcomes.iter().all(|o| o.success), None)
        }
    }

    fn mutate(&self, instruction: &MutationInstruction, program: &SourceProgram) -> Result<String> {
        let prompt = build_prompt(&self.profile, instruction, &program.code);
        let raw = self.provider.mutate(&prompt)?;
        match extract_code(&raw, &self.profile) {
            Ok(code) => Ok(code),
            Err(Error::ExtractionFailed) => {
                log::debug!("extraction failed, retrying once");
                extract_code(&self.provider.mutate(&prompt)?, &self.profile)
            }
            Err(e) => Err(e),
        }
    }

    /// Runs one episode. Reports for confirmed violations go to `sink`.
    pub fn run_episode(&self, index: u64, sink: &ReportSink, health: &Mutex<FilterHealth>) -> Result<EpisodeRecord> {
        let episode_id = episode_id(index);
        let ep_dir = self.dir.join(&episode_id);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        let mut program = self.seed.clone();
        let series_idx = self.reference_series();
        let mut series: BTreeMap<String, Vec<u64>> = series_idx
            .iter()
            .map(|i| (label(&self.matrix[*i]), self.step0[*i].size_value().into_iter().collect()))
            .collect();
        let mut records = Vec::new();
        let finish = |end, steps, program: &SourceProgram, records, report, error| EpisodeRecord {
            episode_id: episode_id.clone(),
            index,
            end,
            steps,
            lineage: program.lineage.clone(),
            records,
            report,
            error,
        };

        for step in 1..=self.config.max_steps {
            let instruction =
                sample_instruction(self.strategy.strategy, &mut rng, &self.catalog, &self.profile, &program.code)?;
            let code = match self.mutate(instruction, &program) {
                Ok(c) => c,
                Err(e @ (Error::ProviderTimeout { .. }
                | Error::ProviderUnavailable { .. }
                | Error::ExtractionFailed
                | Error::MissingStubRule(_))) => {
                    return Ok(finish(EpisodeEnd::ProviderFailure, step - 1, &program, records, None, Some(e.to_string())));
                }
                Err(e) => return Err(e),
            };
            program = program.mutated(code, &instruction.id);
            let step_dir = ep_dir.join(format!("step-{step}"));
            let outcomes = compile_matrix(&self.matrix, &program, &self.profile, &step_dir, &self.config)?;
            let sizes: BTreeMap<String, u64> = self
                .matrix
                .iter()
                .zip(&outcomes)
                .filter_map(|(e, o)| o.size_value().map(|s| (label(e), s)))
                .collect();
            let mut rec = StepRecord {
                step,
                instruction: instruction.id.clone(),
                code: program.code.clone(),
                sizes,
                compiled: outcomes.iter().all(|o| o.success),
                candidate: None,
                filter_evidence: Vec::new(),
                note: None,
            };
            let (ok, note) = self.gate(&outcomes);
            if !ok {
                let diag: Vec<String> = outcomes
                    .iter()
                    .filter(|o| !o.success)
                    .map(|o| format!("{} {}: {}", o.compiler_id, o.opt_flag, o.diagnostics.lines().next().unwrap_or("")))
                    .collect();
                rec.note = Some(diag.join("; "));
                records.push(rec);
                return Ok(finish(EpisodeEnd::CompileFailure, step, &program, records, None, None));
            }
            if note.is_some() {
                rec.note = note;
                records.push(rec);
                continue;
            }
            for i in &series_idx {
                if let Some(s) = outcomes[*i].size_value() {
                    series.entry(label(&self.matrix[*i])).or_default().push(s);
                }
            }
            let candidate = match evaluate(&self.strategy, &self.matrix, &outcomes, &self.step0, &program) {
                Ok(c) => c,
                Err(Error::DegenerateBaseline) => {
                    rec.note = Some("baseline size 0; comparison skipped".into());
                    None
                }
                Err(e) => return Err(e),
            };
            let Some(candidate) = candidate else {
                records.push(rec);
                continue;
            };
            rec.candidate = Some(candidate.inequality());
            let ctx = FilterContext {
                profile: &self.profile,
                toolchain: &self.config.toolchain,
                settings: &self.config.filters,
                baseline_code: &self.seed.code,
                size_series: &series,
                scratch: &step_dir.join("filters"),
            };
            let evidence = run_filters(&candidate, &ctx)?;
            health.lock().expect("health lock").record(&evidence);
            rec.filter_evidence = evidence.clone();
            records.push(rec);
            let required = self.config.filters.required(self.strategy.strategy);
            if let Some(violation) = Violation::confirm(candidate, evidence, &required) {
                let report = Report::new(
                    &violation.candidate,
                    &violation.filter_evidence,
                    &self.seed,
                    &self.matrix,
                    &outcomes,
                    &self.step0,
                    self.config.toolchain.metric,
                );
                let path = sink.emit(&episode_id, &report)?;
                return Ok(finish(EpisodeEnd::Violation, step, &program, records, Some(path), None));
            }
        }
        Ok(finish(EpisodeEnd::ExhaustedSteps, self.config.max_steps, &program, records, None, None))
    }
}

/// Serialised writer for violation reports.
pub struct ReportSink {
    dir: PathBuf,
    written: Mutex<Vec<(String, Report)>>,
}

impl ReportSink {
    pub fn new(dir: PathBuf) -> Self {
        ReportSink { dir, written: Mutex::new(Vec::new()) }
    }

    /// Writes the report and returns its path relative to the campaign dir.
    pub fn emit(&self, name: &str, report: &Report) -> Result<String> {
        let mut guard = self.written.lock().expect("sink lock");
        report.write(&self.dir, name)?;
        guard.push((name.to_string(), report.clone()));
        Ok(format!("reports/{name}.json"))
    }

    pub fn reports(&self) -> Vec<(String, Report)> {
        let mut v = self.written.lock().expect("sink lock").clone();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

/// Table-2 style aggregates over episode records. Provider failures produced
/// no program and are left out.
pub fn compute_stats(records: &[EpisodeRecord]) -> SessionStats {
    let counted: Vec<&EpisodeRecord> = records.iter().filter(|r| r.end != EpisodeEnd::ProviderFailure).collect();
    let total = counted.len() as u64;
    let compilable = counted.iter().filter(|r| r.end != EpisodeEnd::CompileFailure).count() as u64;
    let violations = counted.iter().filter(|r| r.end == EpisodeEnd::Violation).count() as u64;
    let steps: Vec<usize> = counted.iter().map(|r| r.steps).collect();
    SessionStats {
        total_programs: total,
        compilable,
        violations,
        steps_min: steps.iter().min().copied(),
        steps_mean: (!steps.is_empty()).then(|| steps.iter().sum::<usize>() as f64 / steps.len() as f64),
        steps_max: steps.iter().max().copied(),
        compilable_percent: SessionStats::percent(compilable, total),
        violations_percent: SessionStats::percent(violations, total),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub campaign_id: String,
    pub language: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub stats: SessionStats,
    pub episodes: Vec<EpisodeSummary>,
    pub filter_health: FilterHealth,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode_id: String,
    pub end: EpisodeEnd,
    pub steps: usize,
    pub lineage: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

pub struct CampaignResult {
    pub dir: PathBuf,
    pub summary: CampaignSummary,
    pub records: Vec<EpisodeRecord>,
    pub reports: Vec<(String, Report)>,
}

/// Runs episodes until the episode count or wall-clock budget is used up,
/// on `config.jobs` worker threads.
pub fn run_campaign(config: &CampaignConfig, provider: Option<Arc<dyn MutationProvider>>) -> Result<CampaignResult> {
    let campaign = Campaign::prepare(config, provider)?;
    std::fs::create_dir_all(&campaign.dir).at(&campaign.dir)?;
    let sink = ReportSink::new(campaign.dir.join("reports"));
    let health = Mutex::new(FilterHealth::default());
    let next = AtomicU64::new(0);
    let deadline = Instant::now() + Duration::from_secs_f64(config.time_budget_secs.max(0.0));
    let records: Mutex<Vec<EpisodeRecord>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..config.jobs {
            scope.spawn(|| loop {
                if failure.lock().expect("lock").is_some() {
                    return;
                }
                match config.episodes {
                    Some(n) if next.load(Ordering::SeqCst) >= n => return,
                    None if Instant::now() >= deadline => return,
                    _ => {}
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                if config.episodes.is_some_and(|n| index >= n) {
                    return;
                }
                match campaign.run_episode(index, &sink, &health) {
                    Ok(rec) => {
                        log::info!("{} {:?} after {} step(s)", rec.episode_id, rec.end, rec.steps);
                        if let Err(e) = persist_episode(&campaign.dir, &rec) {
                            failure.lock().expect("lock").get_or_insert(e);
                        }
                        records.lock().expect("lock").push(rec);
                    }
                    Err(e) => {
                        failure.lock().expect("lock").get_or_insert(e);
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    let mut records = records.into_inner().expect("lock");
    records.sort_by_key(|r| r.index);
    let stats = compute_stats(&records);
    let filter_health = health.into_inner().expect("lock");
    let warnings = filter_health.warnings(config.filters.health_warning_fraction);
    for w in &warnings {
        log::warn!("{w}");
    }
    let summary = CampaignSummary {
        campaign_id: campaign.campaign_id.clone(),
        language: config.language.clone(),
        strategy: campaign.strategy.strategy,
        seed: config.seed,
        stats,
        episodes: records
            .iter()
            .map(|r| EpisodeSummary {
                episode_id: r.episode_id.clone(),
                end: r.end,
                steps: r.steps,
                lineage: r.lineage.clone(),
                report: r.report.clone(),
            })
            .collect(),
        filter_health,
        warnings,
    };
    let path = campaign.dir.join("summary.json");
    let text = serde_json::to_string_pretty(&serde_json::to_value(&summary)?)? + "\n";
    std::fs::write(&path, text).at(&path)?;
    Ok(CampaignResult { dir: campaign.dir.clone(), summary, records, reports: sink.reports() })
}

fn persist_episode(campaign_dir: &Path, rec: &EpisodeRecord) -> Result<()> {
    let dir = campaign_dir.join(&rec.episode_id);
    std::fs::create_dir_all(&dir).at(&dir)?;
    let path = dir.join("episode.json");
    let text = serde_json::to_string_pretty(&serde_json::to_value(rec)?)? + "\n";
    std::fs::write(&path, text).at(&path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(end: EpisodeEnd, steps: usize) -> EpisodeRecord {
        EpisodeRecord {
            episode_id: String::new(),
            index: 0,
            end,
            steps,
            lineage: vec![],
            records: vec![],
            report: None,
            error: None,
        }
    }

    #[test]
    fn stats_from_records() {
        let rs = vec![
            rec(EpisodeEnd::Violation, 2),
            rec(EpisodeEnd::CompileFailure, 3),
            rec(EpisodeEnd::ExhaustedSteps, 10),
            rec(EpisodeEnd::ProviderFailure, 0),
        ];
        let s = compute_stats(&rs);
        assert_eq!((s.total_programs, s.compilable, s.violations), (3, 2, 1));
        assert_eq!(s.compilable_percent, "66.67%");
        assert_eq!(s.violations_percent, "33.33%");
        assert_eq!((s.steps_min, s.steps_max), (Some(2), Some(10)));
        assert_eq!(s.steps_mean, Some(5.0));
        assert_eq!(s.table_row(), "3 | 2 (66.67%) | 1 (33.33%) | 5.00 (2 / 10)");
    }

    #[test]
    fn empty_stats() {
        let s = compute_stats(&[]);
        assert_eq!(s.total_programs, 0);
        assert_eq!(s.steps_mean, None);
        assert_eq!(s.compilable_percent, "0.00%");
    }
}
