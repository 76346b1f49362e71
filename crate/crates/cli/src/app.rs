//! Argument parsing, file and stream handling, and the exit-code contract.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use framecast::perturbation::DEFAULT_TRIALS;
use framecast::Tolerances;
use serde_json::Value;

use crate::commands::{self, Generated, Outcome, SampledCondition, DEFAULT_CONJECTURE_TRIALS};
use crate::document::{canonical_bytes, parse_document, Input, Kind};
use crate::error::CliError;

pub const TOL_ENV: &str = "FRAMECAST_TOL_IDENTITY";

#[derive(Debug, Parser)]
#[command(name = "framecast", version, about = "Frame and iterated-operator analysis over JSON documents")]
pub struct Cli {
    /// Identity tolerance; overrides FRAMECAST_TOL_IDENTITY.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_identity: Option<f64>,

    /// Relative rank cutoff for singular values.
    #[arg(long, global = true, value_name = "TOL")]
    pub rank_tol: Option<f64>,

    /// Output path, `-` for stdout.
    #[arg(long, short, global = true, default_value = "-")]
    pub out: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OpVec {
    #[arg(long)]
    pub op: String,
    #[arg(long = "vec")]
    pub vector: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame bounds and frame-sequence spectrum of a system.
    Analyze { system: String },

    /// Orbit `{T^k φ}`: finite system document or infinite-orbit report.
    #[command(group(clap::ArgGroup::new("horizon").required(true).args(["steps", "infinite"])))]
    Iterate {
        #[command(flatten)]
        input: OpVec,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        infinite: bool,
    },

    /// Operator mapping each vector of a system to its successor.
    Recover { system: String },

    /// Stein-equation test of whether an orbit is a frame.
    RepresentCheck {
        #[command(flatten)]
        input: OpVec,
    },

    /// Multiplication-operator form of a Hermitian operator.
    Diagonalize {
        #[command(flatten)]
        input: OpVec,
    },

    /// Perturbation bounds of G relative to F. With --l1/--l2 the scalar
    /// condition is sampled instead of using the operator-norm distance.
    Perturb {
        reference: String,
        perturbed: String,
        #[arg(long, requires = "l2")]
        l1: Option<f64>,
        #[arg(long, requires = "l1")]
        l2: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Search for a generalized-eigenspace decomposition with frame orbits.
    Conjecture {
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = DEFAULT_CONJECTURE_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Example operators and generators.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
        /// Where to write the generator vector, if the kind has one.
        #[arg(long, global = true)]
        vec_out: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Diagonal of distinct N-th roots of unity with the all-ones generator.
    Harmonic { dim: usize, size: usize },
    /// Seeded random operator with spectral radius rho, and a random generator.
    Contraction {
        dim: usize,
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Single Jordan block.
    Jordan {
        #[arg(allow_negative_numbers = true)]
        lambda: f64,
        size: usize,
    },
}

/// Process-level I/O: stdin for `-` inputs, stdout for `-` outputs.
pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Value of `FRAMECAST_TOL_IDENTITY`, if set.
    pub tol_env: Option<String>,
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Malformed(format!("{name} must be a positive finite number (got {value})")))
    }
}

pub fn tolerances(cli: &Cli, tol_env: Option<&str>) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(raw) = tol_env {
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Malformed(format!("{TOL_ENV}={raw:?} is not a number")))?;
        tol = tol.with_identity(positive(TOL_ENV, v)?);
    }
    if let Some(v) = cli.tol_identity {
        tol = tol.with_identity(positive("--tol-identity", v)?);
    }
    if let Some(v) = cli.rank_tol {
        tol = tol.with_rank(positive("--rank-tol", v)?);
    }
    Ok(tol)
}

struct Reader<'a, 'b> {
    io: &'b mut Io<'a>,
    stdin_used: bool,
}

impl Reader<'_, '_> {
    fn read(&mut self, path: &str, kind: Kind) -> Result<Input, CliError> {
        let text = if path == "-" {
            if self.stdin_used {
                return Err(CliError::Malformed("only one input may be read from stdin".into()));
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.io
                .stdin
                .read_to_string(&mut s)
                .map_err(|e| CliError::Malformed(format!("cannot read stdin: {e}")))?;
            s
        } else {
            fs::read_to_string(PathBuf::from(path))
                .map_err(|e| CliError::Malformed(format!("cannot read {path}: {e}")))?
        };
        parse_document(&text, kind, path)
    }
}

fn write_doc(io: &mut Io<'_>, path: &str, doc: &Value) -> Result<(), CliError> {
    let bytes = canonical_bytes(doc);
    if path == "-" {
        io.stdout
            .write_all(&bytes)
            .and_then(|_| io.stdout.flush())
            .map_err(|e| CliError::Malformed(format!("cannot write stdout: {e}")))
    } else {
        fs::write(path, bytes).map_err(|e| CliError::Malformed(format!("cannot write {path}: {e}")))
    }
}

fn execute(cli: &Cli, io: &mut Io<'_>) -> Result<i32, CliError> {
    let tol = tolerances(cli, io.tol_env.clone().as_deref())?;
    let mut r = Reader { io, stdin_used: false };

    let outcome: Outcome = match &cli.command {
        Command::Analyze { system } => commands::analyze(&r.read(system, Kind::System)?, &tol)?,
        Command::Iterate { input, steps, infinite } => {
            let op = r.read(&input.op, Kind::Operator)?;
            let v = r.read(&input.vector, Kind::Vector)?;
            match (steps, infinite) {
                (Some(k), false) => commands::iterate_steps(&op, &v, *k, &tol)?,
                _ => commands::iterate_infinite(&op, &v, &tol)?,
            }
        }
        Command::Recover { system } => commands::recover(&r.read(system, Kind::System)?, &tol)?,
        Command::RepresentCheck { input } => {
            let op = r.read(&input.op, Kind::Operator)?;
            let v = r.read(&input.vector, Kind::Vector)?;
            commands::represent_check(&op, &v, &tol)?
        }
        Command::Diagonalize { input } => {
            let op = r.read(&input.op, Kind::Operator)?;
            let v = r.read(&input.vector, Kind::Vector)?;
            commands::diagonalize(&op, &v, &tol)?
        }
        Command::Perturb { reference, perturbed, l1, l2, trials, seed } => {
            let f = r.read(reference, Kind::System)?;
            let g = r.read(perturbed, Kind::System)?;
            let sampled = match (*l1, *l2) {
                (Some(lambda1), Some(lambda2)) => Some(SampledCondition {
                    lambda1,
                    lambda2,
                    trials: *trials,
                    seed: *seed,
                }),
                _ => None,
            };
            commands::perturb(&f, &g, sampled, &tol)?
        }
        Command::Conjecture { op, trials, seed } => {
            commands::conjecture(&r.read(op, Kind::Operator)?, *trials, *seed, &tol)?
        }
        Command::Generate { kind, vec_out } => {
            let generated = match kind {
                GenerateKind::Harmonic { dim, size } => commands::generate_harmonic(*dim, *size, &tol)?,
                GenerateKind::Contraction { dim, rho, seed } => {
                    commands::generate_contraction(*dim, *rho, *seed, &tol)?
                }
                GenerateKind::Jordan { lambda, size } => commands::generate_jordan(*lambda, *size, &tol)?,
            };
            return write_generated(io, &cli.out, vec_out.as_deref(), &generated).map(|_| 0);
        }
    };
    write_doc(io, &cli.out, &outcome.document)?;
    Ok(outcome.exit_code)
}

fn write_generated(io: &mut Io<'_>, op_out: &str, vec_out: Option<&str>, g: &Generated) -> Result<(), CliError> {
    match (vec_out, &g.vector) {
        (Some(path), Some(v)) => {
            if path == "-" && op_out == "-" {
                return Err(CliError::Malformed("--out and --vec-out cannot both be stdout".into()));
            }
            write_doc(io, op_out, &g.operator)?;
            write_doc(io, path, v)
        }
        (Some(_), None) => Err(CliError::Malformed("this kind has no generator vector".into())),
        (None, _) => write_doc(io, op_out, &g.operator),
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { &mut *io.stdout } else { &mut *io.stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}
