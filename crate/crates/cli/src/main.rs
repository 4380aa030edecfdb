mod commands;
mod config;
mod error;
mod parse;
mod svg;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{ExperimentConfig, Format, SCHEMA_VERSION};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "bsgeom", version, about = "Experiments with the solvable Baumslag-Solitar groups BS(1,n)")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Base n of BS(1,n) and of the n-adic numbers.
    #[arg(long, global = true, default_value_t = 2)]
    n: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Maximum number of group elements held during ball enumeration.
    #[arg(long, global = true, env = "BSGEOM_BALL_BUDGET", default_value_t = bsgeom::bsgroup::DEFAULT_BALL_BUDGET)]
    ball_budget: usize,
    /// Maximum breakpoints of a piecewise-linear power before falling back to bounds.
    #[arg(long, global = true, env = "BSGEOM_BREAKPOINT_CAP", default_value_t = bsgeom::quasisim::DEFAULT_BREAKPOINT_CAP)]
    breakpoint_cap: usize,
    /// Number of points in conjugacy test grids.
    #[arg(long, global = true, default_value_t = 4097)]
    grid_size: usize,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Expansion, digits and distances of n-adic numbers.
    Nadic(commands::NadicArgs),
    /// Finite truncation of the tree below a clone.
    Tree(commands::TreeArgs),
    /// Evaluate a word in a, b (uppercase for inverses).
    Word(commands::WordArgs),
    /// Ball growth of BS(1,n) or of Z^2.
    Growth(commands::GrowthArgs),
    /// Distance bounds between two points of the fiber complex.
    Dist(commands::DistArgs),
    /// Barycenter of an ideal triangle over a leaf.
    Barycenter(commands::BarycenterArgs),
    /// Conjugate a piecewise-linear map to a translation or a dilation.
    Conjugate(commands::ConjugateArgs),
    /// Count group elements moving a compact block to meet itself.
    Census(commands::CensusArgs),
    /// Minimal contraction of one clone into another.
    Contract(commands::ContractArgs),
    /// Presentations of virtually BS-type groups.
    Classify(commands::ClassifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Nadic(_) => "nadic",
            Command::Tree(_) => "tree",
            Command::Word(_) => "word",
            Command::Growth(_) => "growth",
            Command::Dist(_) => "dist",
            Command::Barycenter(_) => "barycenter",
            Command::Conjugate(_) => "conjugate",
            Command::Census(_) => "census",
            Command::Contract(_) => "contract",
            Command::Classify(_) => "classify",
        }
    }
}

/// Result of a subcommand before it is wrapped with the config hash.
pub enum Artifact {
    Json(serde_json::Value),
    Csv(String),
    Svg(String),
}

fn render(cfg: &ExperimentConfig, art: Artifact) -> Result<String, CliError> {
    let hash = cfg.hash();
    Ok(match art {
        Artifact::Json(v) => {
            let doc = serde_json::json!({
                "schema": format!("bsgeom.{}.v{}", cfg.command, SCHEMA_VERSION),
                "configHash": hash,
                "config": cfg,
                "result": v,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Artifact::Csv(body) => format!("# configHash={hash}\n{body}"),
        Artifact::Svg(body) => match body.split_once('\n') {
            Some((head, rest)) => format!("{head}\n<!-- configHash={hash} -->\n{rest}"),
            None => body,
        },
    })
}

fn run(cli: Cli) -> Result<String, CliError> {
    let g = cli.global;
    let cfg = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        n: g.n,
        ball_budget: g.ball_budget,
        breakpoint_cap: g.breakpoint_cap,
        grid_size: g.grid_size,
        tolerance: g.tolerance,
        seed: g.seed,
        format: g.format,
        command: cli.command.name().to_string(),
        args: serde_json::to_value(&cli.command)?
            .get(cli.command.name())
            .cloned()
            .unwrap_or(serde_json::Value::Null),
    };
    cfg.validate()?;
    let art = match &cli.command {
        Command::Nadic(a) => commands::nadic(&cfg, a)?,
        Command::Tree(a) => commands::tree(&cfg, a)?,
        Command::Word(a) => commands::word(&cfg, a)?,
        Command::Growth(a) => commands::growth(&cfg, a)?,
        Command::Dist(a) => commands::dist(&cfg, a)?,
        Command::Barycenter(a) => commands::barycenter(&cfg, a)?,
        Command::Conjugate(a) => commands::conjugate(&cfg, a)?,
        Command::Census(a) => commands::census(&cfg, a)?,
        Command::Contract(a) => commands::contract(&cfg, a)?,
        Command::Classify(a) => commands::classify(&cfg, a)?,
    };
    render(&cfg, art)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
