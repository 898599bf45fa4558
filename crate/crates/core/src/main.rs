use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semilab::harness::{self, ExperimentConfig, Format, Verdict, REGISTRY};
use semilab::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "semilab", version, about = "Semi-log-convexity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its outputs.
    Run {
        experiment_id: String,
        /// JSON configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Root seed (overrides the config's `seed`).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// List registered experiments.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn run(
    id: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    format: OutFormat,
) -> Result<Verdict, Error> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::from_path(&p)?,
        None => ExperimentConfig::new(id.clone()),
    };
    if cfg.experiment_id != id {
        return Err(Error::Config(format!("config is for `{}`, not `{id}`", cfg.experiment_id)));
    }
    if seed.is_some() {
        cfg.seed = seed;
    }
    let dir = out.or(cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let result = harness::run(&cfg)?;
    let format = match format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    for p in harness::emit(&result, &dir, format)? {
        eprintln!("wrote {}", p.display());
    }
    let m = &result.metadata;
    for (k, v) in &m.fitted {
        eprintln!("{k} = {v:e}");
    }
    for n in &m.notes {
        eprintln!("note: {n}");
    }
    if let Some((i, _)) = &m.first_violation {
        eprintln!("first violating row: {i}");
    }
    println!("{}: {:?} ({} rows, {:.2}s)", m.experiment_id, m.verdict, result.table.rows.len(), m.wall_time_s);
    Ok(m.verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in REGISTRY {
                let kind = if e.stochastic { "seeded" } else { "exact" };
                println!("{:<24} {:<7} {}", e.id, kind, e.statement);
            }
            ExitCode::SUCCESS
        }
        Command::Run { experiment_id, config, out, seed, format } => match run(experiment_id, config, out, seed, format) {
            Ok(Verdict::Fail) => ExitCode::from(1),
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                match e.kind() {
                    ErrorKind::Usage => ExitCode::from(2),
                    ErrorKind::Numeric => ExitCode::from(3),
                }
            }
        },
    }
}
