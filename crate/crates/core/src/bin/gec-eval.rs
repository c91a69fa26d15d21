use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gec_eval::config::{ModelConfig, RunConfig};
use gec_eval::corpus::StdDevKind;
use gec_eval::pipeline;
use gec_eval::prompts::PromptId;
use gec_eval::ranking::{Aggregate, Precision};
use gec_eval::{Error, Language, Result};

const DEFAULT_CONFIG: &str = "gec-eval.toml";

#[derive(Parser)]
#[command(name = "gec-eval", version, about = "Reference-less evaluation of LLM grammatical error correction")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = DEFAULT_CONFIG)]
    config: PathBuf,
    /// Comma-separated subset of en,de,it,sv.
    #[arg(long, global = true, value_delimiter = ',')]
    languages: Vec<Language>,
    /// Comma-separated model ids; unknown ids are added with default settings.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Vec<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    prompts: Vec<PromptId>,
    /// Replay file used instead of `<out>/corrections.jsonl`.
    #[arg(long, global = true)]
    offline_corrections: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of scoring runs for `stability`.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Validate config and service reachability, then exit.
    #[arg(long, global = true)]
    dry_run: bool,
    /// `macro` or `per-language`.
    #[arg(long, global = true)]
    aggregate: Option<Aggregate>,
    /// Rank on unrounded values.
    #[arg(long, global = true)]
    full_precision: bool,
    /// `population` or `sample`.
    #[arg(long, global = true, value_parser = parse_stddev)]
    stddev: Option<StdDevKind>,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus statistics per language.
    Summarize,
    /// Query the models and fill the corrections cache.
    Generate,
    /// Score corrections into the score cache and cell table.
    Score,
    /// Rank models from scored cells, or from a metric table.
    Rank {
        /// CSV with a `model` column and metric columns.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Write every report table.
    Report,
    /// Compare repeated scoring runs.
    Stability {
        /// Existing run directories to compare instead of `--runs`.
        #[arg(long, value_delimiter = ',')]
        run_dirs: Vec<PathBuf>,
    },
    /// Count recurrent output patterns.
    Patterns,
}

fn parse_stddev(s: &str) -> std::result::Result<StdDevKind, String> {
    match s {
        "population" => Ok(StdDevKind::Population),
        "sample" => Ok(StdDevKind::Sample),
        _ => Err(format!("unknown stddev `{s}` (population, sample)")),
    }
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = if g.config.exists() {
        RunConfig::load(&g.config)?
    } else if g.config.as_os_str() == DEFAULT_CONFIG {
        RunConfig::default()
    } else {
        return Err(Error::Config(format!("config file {} not found", g.config.display())));
    };
    cfg.apply_env(|k| std::env::var(k).ok());
    if !g.languages.is_empty() {
        cfg.languages = g.languages.clone();
    }
    if !g.prompts.is_empty() {
        cfg.prompts = g.prompts.clone();
    }
    if !g.models.is_empty() {
        let mut models = Vec::new();
        for id in &g.models {
            let m = cfg.models.iter().find(|m| &m.id == id).cloned().unwrap_or(ModelConfig {
                id: id.clone(),
                served_name: None,
                endpoint: None,
            });
            models.push(m);
        }
        cfg.models = models;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    if let Some(a) = g.aggregate {
        cfg.ranking.aggregate = a;
    }
    if g.full_precision {
        cfg.ranking.precision = Precision::Full;
    }
    if let Some(s) = g.stddev {
        cfg.corpus.stddev = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.global)?;
    if cli.global.dry_run {
        for line in pipeline::dry_run(&cfg)? {
            println!("{line}");
        }
        return Ok(());
    }
    let offline = cli.global.offline_corrections.as_deref();
    match cli.command {
        Command::Summarize => {
            let summary = pipeline::run_summarize(&cfg)?;
            print!("{}", summary.to_aligned_table());
        }
        Command::Generate => {
            let n = pipeline::run_generate(&cfg)?.len();
            println!("{n} corrections in {}", cfg.out_dir.join(pipeline::CORRECTIONS_FILE).display());
        }
        Command::Score => {
            let set = pipeline::run_score(&cfg, offline)?;
            println!("{} cells scored into {}", set.cells.len(), cfg.out_dir.display());
        }
        Command::Rank { table: Some(table) } => {
            let result = pipeline::run_rank_table(&cfg, &table)?;
            for (model, rank) in result.global.ordered() {
                println!("{rank:>3}  {model}");
            }
        }
        Command::Rank { table: None } => {
            let set = pipeline::run_rank(&cfg)?;
            for (model, rank) in set.overall.global.ordered() {
                println!("{rank:>3}  {model}");
            }
        }
        Command::Report => {
            for p in pipeline::run_report(&cfg, offline)? {
                println!("{}", p.display());
            }
        }
        Command::Stability { run_dirs } => {
            let report = match cli.global.runs {
                Some(n) => pipeline::run_stability_repeat(&cfg, offline, n)?,
                None if run_dirs.len() >= 2 => pipeline::run_stability(&cfg, &run_dirs)?,
                None => return Err(Error::Config("stability needs --runs N or --run-dirs a,b".into())),
            };
            println!(
                "max deviation {:.6} over {} cell metrics",
                report.max_deviation(),
                report.entries.len()
            );
        }
        Command::Patterns => {
            for c in pipeline::run_patterns(&cfg, offline)? {
                println!("{:>6}  {} {} {:?}", c.count, c.rule.language, c.rule.model, c.rule.pattern);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}
