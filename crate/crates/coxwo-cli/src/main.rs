//! `coxwo`: command-line front end. Machine-readable JSON goes to standard output and
//! prose to standard error.

mod commands;
mod scan;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coxwo::{catalog, CoxeterSystem};
use serde::Deserialize;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "coxwo", version, about = "Weak order, closure and convexity computations on Coxeter root systems")]
struct Cli {
    /// System spec JSON, or the name of a bundled system such as `affine_c2`.
    #[arg(long, short, global = true)]
    system: Option<String>,
    /// JSON file with default `depth`, `budget`, `orbit_depth`, `tol` and `seed`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Root store depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Node budget of the join search.
    #[arg(long, global = true, env = "COXWO_BUDGET")]
    budget: Option<usize>,
    /// Word length of imaginary orbit samples.
    #[arg(long, global = true)]
    orbit_depth: Option<usize>,
    /// Float tolerance for limit estimates.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, env = "COXWO_SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a system and print its normalized spec and invariants.
    Define { path: Option<String> },
    /// List positive roots up to the store depth.
    Roots,
    /// Decide whether the join of the given words exists.
    Join {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Greatest common prefix of the given words.
    Meet {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// 2-closure or cone closure of a root set literal.
    Closure {
        #[arg(long, conflicts_with = "cone")]
        two: bool,
        #[arg(long)]
        cone: bool,
        set: String,
    },
    /// Closed, convex and separable flags of a root set literal.
    Classify {
        set: String,
        /// Treat the set as a finite set rather than the window part of a larger one.
        #[arg(long)]
        finite: bool,
    },
    /// Inversions, connectedness and accumulation of an infinite word.
    Infword {
        literal: String,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long)]
        compare: Option<String>,
    },
    /// Clusters of normalized roots near the isotropic cone.
    Limits,
    /// The imaginary domain K and an orbit sample.
    Imaginary,
    /// Experimental probes: join existence against cone finiteness, or orbit and root
    /// limits of an infinite word.
    Probe {
        #[arg(long, value_parser = ["3.5"], conflicts_with = "conjecture")]
        question: Option<String>,
        #[arg(long, value_parser = ["4.8"])]
        conjecture: Option<String>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        args: Vec<String>,
    },
    /// Render the projective picture of a rank-3 (or rank-2) system as SVG.
    Plot {
        #[arg(long)]
        svg: PathBuf,
        /// Figure spec JSON: highlighted sets, depth, orbit depth, labels.
        spec: Option<PathBuf>,
    },
    /// Batch driver over a directory of system specs.
    Scan {
        #[arg(long)]
        systems: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub depth: usize,
    pub budget: usize,
    pub orbit_depth: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            depth: 10,
            budget: 100_000,
            orbit_depth: 12,
            tol: 1e-6,
            seed: 7,
        }
    }
}

impl Config {
    fn resolve(file: Option<&Path>, o: &Overrides) -> Result<Self, CliError> {
        let mut c = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", p.display())))?
            }
            None => Config::default(),
        };
        c.depth = o.depth.unwrap_or(c.depth);
        c.budget = o.budget.unwrap_or(c.budget);
        c.orbit_depth = o.orbit_depth.unwrap_or(c.orbit_depth);
        c.tol = o.tol.unwrap_or(c.tol);
        c.seed = o.seed.unwrap_or(c.seed);
        Ok(c)
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Input(e.to_string())
    }
}

/// What a command produced.
pub struct Output {
    pub json: Value,
    pub summary: String,
    /// Some verdict ran out of budget.
    pub exhausted: bool,
}

impl Output {
    pub fn new(json: Value, summary: impl Into<String>) -> Self {
        Output {
            json,
            summary: summary.into(),
            exhausted: false,
        }
    }
}

pub fn load_system(spec: &str) -> Result<CoxeterSystem, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("{spec}: {e}")))?;
        return CoxeterSystem::from_json(&text).map_err(|e| input(format!("{spec}: {e}")));
    }
    let stem = spec.trim_end_matches(".json");
    catalog::all()
        .into_iter()
        .find(|(file, _)| file.trim_end_matches(".json") == stem)
        .map(|(_, s)| s)
        .ok_or_else(|| input(format!("no system file or bundled system named {spec:?}")))
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let config = Config::resolve(cli.config.as_deref(), &cli.overrides)?;
    let mut out = dispatch(cli, &config)?;
    if let Some(fields) = out.json.as_object_mut() {
        fields.entry("depth").or_insert(config.depth.into());
    }
    Ok(out)
}

fn dispatch(cli: Cli, config: &Config) -> Result<Output, CliError> {
    let config = config.clone();
    let system = || -> Result<CoxeterSystem, CliError> {
        let spec = cli.system.as_deref().ok_or_else(|| input("this command needs --system"))?;
        load_system(spec)
    };
    use commands as c;
    match cli.command {
        Command::Define { path } => {
            let spec = path.or(cli.system.clone()).ok_or_else(|| input("define needs a path"))?;
            c::define(&load_system(&spec)?, &config)
        }
        Command::Roots => c::roots(&system()?, &config),
        Command::Join { words } => c::join(&system()?, &words, &config),
        Command::Meet { words } => c::meet(&system()?, &words),
        Command::Closure { two, cone, set } => {
            if two == cone {
                return Err(input("choose one of --two or --cone"));
            }
            c::closure(&system()?, &set, two, &config)
        }
        Command::Classify { set, finite } => c::classify(&system()?, &set, finite, &config),
        Command::Infword { literal, n, compare } => c::infword(&system()?, &literal, n, compare.as_deref(), &config),
        Command::Limits => c::limits(&system()?, &config),
        Command::Imaginary => c::imaginary(&system()?, &config),
        Command::Probe { question, conjecture, n, args } => match (question, conjecture) {
            (Some(_), None) => c::probe_join(&system()?, &args, &config),
            (None, Some(_)) => c::probe_limits(&system()?, &args, n, &config),
            _ => Err(input("probe needs --question 3.5 or --conjecture 4.8")),
        },
        Command::Plot { svg, spec } => svg::plot(&system()?, &svg, spec.as_deref(), &config),
        Command::Scan { systems, samples } => scan::scan(&systems, samples, &config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(out)) => {
            println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
            if !out.summary.is_empty() {
                eprintln!("{}", out.summary);
            }
            if out.exhausted {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Ok(Err(CliError::Input(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal assertion failed");
            ExitCode::from(4)
        }
    }
}
