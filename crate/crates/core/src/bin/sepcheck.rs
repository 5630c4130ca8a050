use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sepcheck::criteria::{CriterionKind, Tolerances, DEFAULT_CRITERION_TOL};
use sepcheck::linalg::DEFAULT_RANK_TOL;
use sepcheck::prodspan::DEFAULT_RESTARTS;
use sepcheck::report::{
    cmd_analyze, cmd_prodspan, cmd_sweep, cmd_typicality, cmd_zoo_list, cmd_zoo_state, exit_code, Grid, StateSource,
    TypicalitySource,
};
use sepcheck::{Error, Result};

#[derive(Parser)]
#[command(name = "sepcheck", version, about = "Separability checks for bipartite mixed states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run separability criteria on one state.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated subset of inorder,entropic,ppt,avg-ent (default: all).
        #[arg(long, default_value = "")]
        criteria: String,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate criteria over a parameter grid of a family.
    Sweep {
        #[arg(long)]
        family: String,
        /// Fixed parameters, K=V.
        #[arg(long = "param")]
        params: Vec<String>,
        /// START:STOP:STEP for the family's sweep parameter.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "")]
        criteria: String,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact likely-string counts against 2^{nS}.
    Typicality {
        #[command(flatten)]
        source: OptionalSourceArgs,
        /// Probability vector, comma-separated; alternative to a state.
        #[arg(long, value_delimiter = ',')]
        spectrum: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Product-vector search, span checks and decomposition certificate.
    Prodspan {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List state families, or write one member as a state file.
    Zoo {
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// State file (JSON).
    #[arg(long)]
    state: Option<PathBuf>,
    /// Family name (see `sepcheck zoo`).
    #[arg(long)]
    family: Option<String>,
    /// Family parameter, K=V (repeatable).
    #[arg(long = "param")]
    params: Vec<String>,
}

impl SourceArgs {
    fn source(&self) -> Result<StateSource> {
        StateSource::from_flags(self.state.clone(), self.family.clone(), &self.params)
    }
}

#[derive(Args)]
struct OptionalSourceArgs {
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "param")]
    params: Vec<String>,
}

#[derive(Args)]
struct TolArgs {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol_rank: f64,
    /// Margin on every criterion inequality.
    #[arg(long, default_value_t = DEFAULT_CRITERION_TOL)]
    tol_criterion: f64,
}

impl TolArgs {
    fn get(&self) -> Tolerances {
        Tolerances { rank: self.tol_rank, criterion: self.tol_criterion }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parse { context: path.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    if format == Some(Format::Csv) {
        return Err(Error::Parse {
            context: "--format".into(),
            message: format!("csv output is available for sweep and typicality, not {command}"),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { source, criteria, tol, out } => {
            json_only(out.format, "analyze")?;
            let report = cmd_analyze(&source.source()?, &CriterionKind::parse_list(&criteria)?, &tol.get())?;
            emit(&report.to_json(), out.out.as_ref())
        }
        Command::Sweep { family, params, grid, criteria, threads, tol, out } => {
            let table = cmd_sweep(
                &family,
                &params,
                &Grid::parse(&grid)?,
                &CriterionKind::parse_list(&criteria)?,
                &tol.get(),
                threads,
            )?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => table.to_csv()?,
                Format::Json => table.to_json(),
            };
            emit(&text, out.out.as_ref())
        }
        Command::Typicality { source, spectrum, n, out } => {
            let src = match (spectrum.is_empty(), source.state, source.family) {
                (false, None, None) if source.params.is_empty() => TypicalitySource::Spectrum(spectrum),
                (true, state, family) => TypicalitySource::State(StateSource::from_flags(state, family, &source.params)?),
                _ => {
                    return Err(Error::Parse {
                        context: "--spectrum".into(),
                        message: "give either --spectrum or a state source".into(),
                    })
                }
            };
            let report = cmd_typicality(&src, &n)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => report.to_json(),
                Format::Csv => report.typicality.as_ref().expect("typicality section").to_csv()?,
            };
            emit(&text, out.out.as_ref())
        }
        Command::Prodspan { source, n, restarts, seed, tol, out } => {
            json_only(out.format, "prodspan")?;
            let report = cmd_prodspan(&source.source()?, n, restarts, seed, &tol.get())?;
            emit(&report.to_json(), out.out.as_ref())
        }
        Command::Zoo { family, params, out } => {
            let text = match family {
                Some(f) => cmd_zoo_state(&f, &params)?.to_json(),
                None => {
                    let mut s = serde_json::to_string_pretty(&cmd_zoo_list()).expect("listing serializes");
                    s.push('\n');
                    s
                }
            };
            emit(&text, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
