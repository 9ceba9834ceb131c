use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sizeprobe::catalog::{default_catalog, load_catalog, render_catalog};
use sizeprobe::config::{load_compilers, load_config, ConfigOverrides};
use sizeprobe::corpus::{bundled_manifest_path, verify_corpus, CorpusManifest};
use sizeprobe::dedup::{bisect_with_provider, release_screen, CommandRevisionProvider};
use sizeprobe::model::Strategy;
use sizeprobe::mutation::ProviderKind;
use sizeprobe::report::{verify, Report, ReportRecheck};
use sizeprobe::session::run_campaign;
use sizeprobe::toolchain::ToolchainSettings;

#[derive(Parser)]
#[command(name = "sizeprobe", version, about = "Differential testing for missed code-size optimizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mutation campaign.
    Run(RunArgs),
    /// Recompile a saved report, or check the regression corpus.
    Verify {
        report: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<Option<PathBuf>>,
        /// Compiler matrix used with --corpus.
        #[arg(long)]
        compilers: Option<PathBuf>,
        #[arg(long, default_value = "sizeprobe-verify")]
        scratch: PathBuf,
    },
    /// Re-check a report against released compilers.
    Screen {
        report: PathBuf,
        #[arg(long)]
        releases: PathBuf,
        #[arg(long, default_value = "sizeprobe-screen")]
        scratch: PathBuf,
    },
    /// Find the first revision that exhibits a report.
    Bisect {
        report: PathBuf,
        /// File with one revision per line, oldest first.
        #[arg(long)]
        revisions: PathBuf,
        /// Command printing the compiler path for the revision appended to it.
        #[arg(long)]
        provider_command: String,
        #[arg(long, default_value = "sizeprobe-bisect")]
        scratch: PathBuf,
    },
    /// Print the mutation instruction catalog.
    Catalog {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        language: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    #[arg(long)]
    compilers: Option<PathBuf>,
    #[arg(long, value_parser = parse_provider)]
    provider: Option<ProviderKind>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Wall-clock budget: plain seconds or a number with s, m or h.
    #[arg(long, value_parser = parse_budget)]
    time_budget: Option<f64>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    threshold_pipeline: Option<f64>,
    #[arg(long)]
    threshold_multi: Option<f64>,
    #[arg(long)]
    threshold_single: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workdir: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: sizeprobe::Error| e.to_string())
}

fn parse_provider(s: &str) -> Result<ProviderKind, String> {
    match s {
        "stub" => Ok(ProviderKind::Stub),
        "remote" => Ok(ProviderKind::Remote),
        _ => Err(format!("unknown provider `{s}` (stub or remote)")),
    }
}

fn parse_budget(s: &str) -> Result<f64, String> {
    let (num, mult) = match s.chars().last() {
        Some('h') => (&s[..s.len() - 1], 3600.0),
        Some('m') => (&s[..s.len() - 1], 60.0),
        Some('s') => (&s[..s.len() - 1], 1.0),
        _ => (s, 1.0),
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("bad duration `{s}`"))?;
    if v < 0.0 {
        return Err(format!("negative duration `{s}`"));
    }
    Ok(v * mult)
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let flags = ConfigOverrides {
        language: args.language,
        strategy: args.strategy,
        compilers_file: args.compilers,
        provider: args.provider,
        endpoint: args.endpoint,
        model: args.model,
        time_budget_secs: args.time_budget,
        episodes: args.episodes,
        max_steps: args.max_steps,
        pipeline_threshold: args.threshold_pipeline,
        multi_compiler_threshold: args.threshold_multi,
        single_compiler_threshold: args.threshold_single,
        seed: args.seed,
        workdir: args.workdir,
        jobs: args.jobs,
    };
    let env = |k: &str| std::env::var(k).ok();
    let cfg = load_config(args.config.as_deref(), &env, &flags)?;
    let result = run_campaign(&cfg, None)?;
    println!("campaign {} in {}", result.summary.campaign_id, result.dir.display());
    println!("programs | compilable | violations | steps mean (min / max)");
    println!("{}", result.summary.stats.table_row());
    for (name, r) in &result.reports {
        println!("{name}: {}", r.inequality);
    }
    Ok(())
}

fn verify_report(path: &Path, scratch: &Path) -> anyhow::Result<bool> {
    let report = Report::load(path).with_context(|| format!("loading {}", path.display()))?;
    let out = verify(&report, scratch, &ToolchainSettings::default())?;
    println!("stored decision:     {}", out.stored_decision);
    println!("record consistent:   {}", out.record_consistent);
    println!("recomputed decision: {}", out.recomputed_decision);
    println!("{}", out.detail);
    Ok(out.matches())
}

fn verify_corpus_cmd(manifest: Option<PathBuf>, compilers: Option<PathBuf>, scratch: &Path) -> anyhow::Result<()> {
    let Some(compilers) = compilers else { bail!("--corpus needs --compilers") };
    let manifest = CorpusManifest::load(&manifest.unwrap_or_else(bundled_manifest_path))?;
    let compilers = load_compilers(&compilers)?;
    for (entry, verdict) in verify_corpus(&manifest, &compilers, scratch, &ToolchainSettings::default()) {
        println!("{:<14} {:<10} {}", entry.id, verdict.label(), verdict.detail());
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Verify { report, corpus, compilers, scratch } => match (report, corpus) {
            (_, Some(manifest)) => verify_corpus_cmd(manifest, compilers, &scratch),
            (Some(report), None) => {
                if verify_report(&report, &scratch)? {
                    Ok(())
                } else {
                    bail!("report does not reproduce")
                }
            }
            (None, None) => bail!("give a report path or --corpus"),
        },
        Command::Screen { report, releases, scratch } => {
            let report = Report::load(&report)?;
            let releases = load_compilers(&releases)?;
            let recheck = ReportRecheck { report, settings: ToolchainSettings::default(), scratch };
            let sig = release_screen(&recheck, &releases)?;
            println!("{}", serde_json::to_string_pretty(&sig)?);
            Ok(())
        }
        Command::Bisect { report, revisions, provider_command, scratch } => {
            let report = Report::load(&report)?;
            let text = std::fs::read_to_string(&revisions).with_context(|| revisions.display().to_string())?;
            let revs: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
            let base = report
                .matrix
                .iter()
                .find(|e| e.compiler.id == report.offender.compiler_id)
                .map(|e| e.compiler.clone())
                .context("offender compiler missing from the report matrix")?;
            let mut provider = CommandRevisionProvider::new(provider_command);
            provider.timeout = Duration::from_secs(3600);
            let recheck = ReportRecheck { report, settings: ToolchainSettings::default(), scratch };
            let out = bisect_with_provider(&revs, &provider, &base, &recheck)?;
            println!("first bad revision: {}", out.culprit);
            println!("probes: {} search + {} endpoint", out.search_probes, out.endpoint_probes);
            if !out.skipped.is_empty() {
                println!("skipped: {}", out.skipped.join(", "));
            }
            Ok(())
        }
        Command::Catalog { file, language } => {
            let catalog = match file {
                Some(p) => load_catalog(&p)?,
                None => default_catalog(),
            };
            match language {
                Some(l) => {
                    for i in &catalog {
                        println!("{:<28} {}", i.id, i.text_for(&l));
                    }
                }
                None => print!("{}", render_catalog(&catalog)),
            }
            Ok(())
        }
    }
}
