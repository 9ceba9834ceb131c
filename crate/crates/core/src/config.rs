//! Campaign configuration: TOML file, environment and flags, merged in that
//! order of increasing precedence, then validated.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::filters::FilterSettings;
use crate::language::builtin_profile;
use crate::model::{Channel, CompilerSpec, Fraction, Strategy};
use crate::mutation::{ProviderConfig, ProviderKind, ENDPOINT_ENV, MODEL_ENV};
use crate::strategies::StrategyConfig;
use crate::toolchain::ToolchainSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub language: String,
    pub strategy: Option<Strategy>,
    pub compilers: Vec<CompilerSpec>,
    /// TOML file of `[[compiler]]` entries; those accepting `language` are
    /// appended to `compilers`.
    pub compilers_file: Option<PathBuf>,
    /// Instruction catalog; the built-in one when absent.
    pub catalog: Option<PathBuf>,
    pub provider: ProviderConfig,
    pub pipeline_threshold: f64,
    pub multi_compiler_threshold: f64,
    pub single_compiler_threshold: f64,
    pub reference_opt_flag: Option<String>,
    pub max_steps: usize,
    pub seed: u64,
    /// Fixed episode count; overrides the time budget.
    pub episodes: Option<u64>,
    pub time_budget_secs: f64,
    pub jobs: usize,
    pub workdir: PathBuf,
    pub campaign_id: Option<String>,
    pub toolchain: ToolchainSettings,
    pub filters: FilterSettings,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            language: "c".into(),
            strategy: None,
            compilers: Vec::new(),
            compilers_file: None,
            catalog: None,
            provider: ProviderConfig::default(),
            pipeline_threshold: 0.05,
            multi_compiler_threshold: 0.10,
            single_compiler_threshold: 0.0,
            reference_opt_flag: None,
            max_steps: 10,
            seed: 0,
            episodes: None,
            time_budget_secs: 8.0 * 3600.0,
            jobs: 1,
            workdir: PathBuf::from("sizeprobe-work"),
            campaign_id: None,
            toolchain: ToolchainSettings::default(),
            filters: FilterSettings::default(),
        }
    }
}

/// Values given on the command line; `None` leaves the lower layers alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub language: Option<String>,
    pub strategy: Option<Strategy>,
    pub compilers_file: Option<PathBuf>,
    pub provider: Option<ProviderKind>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub time_budget_secs: Option<f64>,
    pub episodes: Option<u64>,
    pub max_steps: Option<usize>,
    pub pipeline_threshold: Option<f64>,
    pub multi_compiler_threshold: Option<f64>,
    pub single_compiler_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub workdir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompilersFile {
    #[serde(default)]
    compiler: Vec<CompilerSpec>,
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

fn substitute_dir(spec: &mut CompilerSpec, dir: &Path) {
    let d = absolute(dir).display().to_string();
    spec.invocation = spec.invocation.replace("{config_dir}", &d);
    if let Some(o) = &mut spec.object_invocation {
        *o = o.replace("{config_dir}", &d);
    }
}

/// Parses a compiler matrix file. `{config_dir}` in invocations becomes the
/// file's directory.
pub fn load_compilers(path: &Path) -> Result<Vec<CompilerSpec>> {
    let text = std::fs::read_to_string(path).at(path)?;
    let mut parsed: CompilersFile = toml::from_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for c in &mut parsed.compiler {
        substitute_dir(c, dir);
    }
    Ok(parsed.compiler)
}

/// Merges defaults, the optional file at `path`, the environment (looked up
/// through `env`) and `flags`, then validates the result.
pub fn load_config(
    path: Option<&Path>,
    env: &dyn Fn(&str) -> Option<String>,
    flags: &ConfigOverrides,
) -> Result<CampaignConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).at(p)?;
            let mut cfg: CampaignConfig = toml::from_str(&text)?;
            let dir = p.parent().unwrap_or(Path::new("."));
            for c in &mut cfg.compilers {
                substitute_dir(c, dir);
            }
            for rel in [&mut cfg.compilers_file, &mut cfg.catalog].into_iter().flatten() {
                if rel.is_relative() {
                    *rel = dir.join(&*rel);
                }
            }
            cfg
        }
        None => CampaignConfig::default(),
    };

    if let Some(v) = env(ENDPOINT_ENV).filter(|v| !v.is_empty()) {
        cfg.provider.endpoint = Some(v);
    }
    if let Some(v) = env(MODEL_ENV).filter(|v| !v.is_empty()) {
        cfg.provider.model = Some(v);
    }

    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = &flags.$field { cfg.$field = v.clone().into(); } )* };
    }
    take!(language, compilers_file, time_budget_secs, max_steps, pipeline_threshold, multi_compiler_threshold,
          single_compiler_threshold, seed, workdir, jobs);
    if flags.strategy.is_some() {
        cfg.strategy = flags.strategy;
    }
    if flags.episodes.is_some() {
        cfg.episodes = flags.episodes;
    }
    if let Some(k) = flags.provider {
        cfg.provider.kind = k;
    }
    if let Some(e) = &flags.endpoint {
        cfg.provider.endpoint = Some(e.clone());
    }
    if let Some(m) = &flags.model {
        cfg.provider.model = Some(m.clone());
    }

    if let Some(file) = cfg.compilers_file.clone() {
        let language = cfg.language.clone();
        cfg.compilers.extend(load_compilers(&file)?.into_iter().filter(|c| c.accepts(&language)));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fraction(key: &str, value: f64) -> Result<Fraction> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::config(key, format!("must be within [0, 1], got {value}")));
    }
    Fraction::from_f64(value).ok_or_else(|| Error::config(key, format!("not representable as a decimal: {value}")))
}

impl CampaignConfig {
    pub fn strategy(&self) -> Result<Strategy> {
        self.strategy.ok_or_else(|| Error::config("strategy", "no strategy given"))
    }

    pub fn strategy_config(&self) -> Result<StrategyConfig> {
        Ok(StrategyConfig {
            strategy: self.strategy()?,
            pipeline_threshold: fraction("pipeline_threshold", self.pipeline_threshold)?,
            multi_compiler_threshold: fraction("multi_compiler_threshold", self.multi_compiler_threshold)?,
            single_compiler_threshold: fraction("single_compiler_threshold", self.single_compiler_threshold)?,
            reference_opt_flag: self.reference_opt_flag.clone(),
        })
    }

    /// `seed-<seed>-<strategy>` unless set explicitly.
    pub fn campaign_id(&self) -> String {
        match (&self.campaign_id, self.strategy) {
            (Some(id), _) => id.clone(),
            (None, Some(s)) => format!("seed-{}-{}", self.seed, s),
            (None, None) => format!("seed-{}", self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let strategy = self.strategy()?;
        builtin_profile(&self.language).map_err(|_| Error::config("language", format!("unknown language `{}`", self.language)))?;
        self.strategy_config()?;
        if self.max_steps < 1 {
            return Err(Error::config("max_steps", "must be at least 1"));
        }
        if self.jobs < 1 {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        if self.episodes.is_none() && !(self.time_budget_secs >= 0.0) {
            return Err(Error::config("time_budget_secs", "must be non-negative"));
        }
        let mut ids = BTreeSet::new();
        for c in &self.compilers {
            c.validate()?;
            if !ids.insert(c.id.as_str()) {
                return Err(Error::config("compilers", format!("duplicate compiler id `{}`", c.id)));
            }
            if !c.accepts(&self.language) {
                return Err(Error::config("compilers", format!("`{}` does not accept {}", c.id, self.language)));
            }
        }
        let n = self.compilers.len();
        match strategy {
            Strategy::DeadCode | Strategy::Pipeline if n < 1 => {
                return Err(Error::config("compilers", format!("need ≥1 compiler for {strategy}")));
            }
            Strategy::DeadCode | Strategy::Pipeline if n > 1 => {
                log::warn!("{strategy} uses only the first compiler; {} more ignored", n - 1);
            }
            Strategy::SingleCompiler => {
                if n < 2 {
                    return Err(Error::config("compilers", "need ≥2 versions for single_compiler"));
                }
                let trunks = self.compilers.iter().filter(|c| c.channel == Channel::Trunk).count();
                if trunks != 1 {
                    return Err(Error::config("compilers", format!("need exactly one trunk entry, found {trunks}")));
                }
            }
            Strategy::MultiCompiler => {
                let families: BTreeSet<&str> = self.compilers.iter().map(|c| c.family()).collect();
                if families.len() < 2 {
                    return Err(Error::config("compilers", "need ≥2 compiler families for multi_compiler"));
                }
            }
            _ => {}
        }
        self.provider.validate()?;
        Ok(())
    }
}
