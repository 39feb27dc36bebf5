//! Command-line front end and the JSON document formats.
//!
//! Exit codes: 0 success, 1 parse/IO error, 2 unsolvable, 3 refinement did
//! not converge, 4 verification residual above tolerance.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::MomentError;
use crate::lattice::{MomentSpec, MultiIndex};
use crate::synthesis::{solve, AtomicMeasure, SolverConfig};
use crate::verify::{random_instance, report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_UNSOLVABLE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_RESIDUAL: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        ComplexPair { re: z.re, im: z.im }
    }
}

impl From<ComplexPair> for Complex64 {
    fn from(p: ComplexPair) -> Self {
        Complex64::new(p.re, p.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentEntry {
    pub k: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// `{"n": .., "moments": [{"k": [..], "re": .., "im": ..}, ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub n: usize,
    pub moments: Vec<MomentEntry>,
}

impl ProblemDocument {
    pub fn from_spec(spec: &MomentSpec) -> Self {
        ProblemDocument {
            n: spec.n(),
            moments: spec
                .iter()
                .map(|(k, v)| MomentEntry { k: k.entries().to_vec(), re: v.re, im: v.im })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> Result<MomentSpec, MomentError> {
        let zeros = self.moments.iter().filter(|e| e.k.iter().all(|&x| x == 0)).count();
        if zeros != 1 {
            return Err(MomentError::InvalidSpec(format!(
                "exactly one moment must have the zero index (found {zeros})"
            )));
        }
        MomentSpec::new(
            self.n,
            self.moments
                .iter()
                .map(|e| (MultiIndex::new(e.k.clone()), Complex64::new(e.re, e.im)))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub z: Vec<ComplexPair>,
    pub w: f64,
}

/// `{"n": .., "scale": .., "atoms": [{"z": [{"re": .., "im": ..}, ..], "w": ..}, ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDocument {
    pub n: usize,
    /// Polytorus radius of the atoms; informational.
    pub scale: f64,
    pub atoms: Vec<AtomEntry>,
}

impl MeasureDocument {
    pub fn from_measure(measure: &AtomicMeasure, scale: f64) -> Self {
        MeasureDocument {
            n: measure.n,
            scale,
            atoms: measure
                .atoms
                .iter()
                .zip(&measure.weights)
                .map(|(z, &w)| AtomEntry { z: z.iter().map(|&c| c.into()).collect(), w })
                .collect(),
        }
    }

    pub fn to_measure(&self) -> Result<AtomicMeasure, MomentError> {
        AtomicMeasure::new(
            self.n,
            self.atoms.iter().map(|a| a.z.iter().map(|&p| p.into()).collect()).collect(),
            self.atoms.iter().map(|a| a.w).collect(),
        )
    }
}

/// Failure of a CLI step, carrying the exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn io(message: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, message: message.into() }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        let code = match e {
            MomentError::Unsolvable(_) => EXIT_UNSOLVABLE,
            MomentError::ConvergenceFailure { .. } => EXIT_CONVERGENCE,
            _ => EXIT_IO,
        };
        CliError { code, message: e.to_string() }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn read_problem(path: &Path) -> Result<MomentSpec, CliError> {
    Ok(read_json::<ProblemDocument>(path)?.to_spec()?)
}

pub fn read_measure(path: &Path) -> Result<AtomicMeasure, CliError> {
    Ok(read_json::<MeasureDocument>(path)?.to_measure()?)
}

/// Report path for a measure output: same basename, `.report` extension.
pub fn report_path(output: &Path) -> PathBuf {
    output.with_extension("report")
}

fn solve_file(input: &Path, output: &Path, config: &SolverConfig) -> Result<String, CliError> {
    let spec = read_problem(input)?;
    let sol = solve(&spec, config)?;
    let rep = report(&spec, &sol.measure, config)?;
    write_json(output, &MeasureDocument::from_measure(&sol.measure, sol.radius))?;
    write_json(&report_path(output), &rep)?;
    Ok(rep.summary())
}

fn finish(result: Result<String, CliError>) -> i32 {
    match result {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Solves the problem document at `input`, writing the measure to `output`
/// and the report next to it.
pub fn cmd_solve(input: &Path, output: &Path, config: &SolverConfig) -> i32 {
    finish(solve_file(input, output, config))
}

/// Solves every problem document in `dir` in parallel; outputs go to
/// `<stem>.measure.json` and `<stem>.measure.report`. Returns the first
/// nonzero exit code in file-name order.
pub fn cmd_solve_batch(dir: &Path, config: &SolverConfig) -> i32 {
    let mut inputs: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
                name.ends_with(".json") && !name.ends_with(".measure.json") && !name.ends_with(".truth.json")
            })
            .collect(),
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return EXIT_IO;
        }
    };
    inputs.sort();
    let results: Vec<(PathBuf, Result<String, CliError>)> = inputs
        .par_iter()
        .map(|input| {
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
            let output = input.with_file_name(format!("{stem}.measure.json"));
            (input.clone(), solve_file(input, &output, config))
        })
        .collect();
    let mut code = EXIT_OK;
    for (input, result) in results {
        match result {
            Ok(summary) => println!("{}: {summary}", input.display()),
            Err(e) => {
                eprintln!("{}: error: {}", input.display(), e.message);
                if code == EXIT_OK {
                    code = e.code;
                }
            }
        }
    }
    code
}

/// Checks a measure against a problem; exit 0 iff the max residual is at
/// most `tol * max(1, max|s_k|)`.
pub fn cmd_verify(problem: &Path, measure: &Path, tol: Option<f64>) -> i32 {
    let run = || -> Result<i32, CliError> {
        let spec = read_problem(problem)?;
        let mu = read_measure(measure)?;
        if mu.n != spec.n() {
            return Err(MomentError::DimensionMismatch { expected: spec.n(), got: mu.n }.into());
        }
        let config = SolverConfig { tol, ..SolverConfig::default() };
        let rep = report(&spec, &mu, &config)?;
        let tol = config.tol_for(spec.n());
        println!("{}", serde_json::to_string_pretty(&rep).map_err(|e| CliError::io(e.to_string()))?);
        println!("{}", rep.summary());
        if rep.passes(tol) {
            println!("PASS (tol {tol:e})");
            Ok(EXIT_OK)
        } else {
            println!("FAIL (tol {tol:e})");
            Ok(EXIT_RESIDUAL)
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub atoms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

/// Path of the ground-truth measure written next to a generated problem.
pub fn truth_path(output: &Path) -> PathBuf {
    output.with_extension("truth.json")
}

/// Writes a seeded problem document and its ground-truth measure.
pub fn cmd_random(args: &RandomArgs, output: &Path, truth: Option<&Path>) -> i32 {
    let run = || -> Result<String, CliError> {
        let (spec, mu) = random_instance(args.n, args.d, args.atoms, args.seed, args.radius)?;
        let truth = truth.map(Path::to_path_buf).unwrap_or_else(|| truth_path(output));
        write_json(output, &ProblemDocument::from_spec(&spec))?;
        write_json(&truth, &MeasureDocument::from_measure(&mu, mu.support_radius()))?;
        Ok(format!("wrote {} and {}", output.display(), truth.display()))
    };
    finish(run())
}

#[derive(Debug, Parser)]
#[command(name = "cmoment", version, about = "Truncated moment problems in C^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct SolveFlags {
    /// Residual tolerance relative to max(1, max|s_k|)
    #[arg(long)]
    tol: Option<f64>,
    /// Grid points per angular dimension
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = crate::operator::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long = "box-degree")]
    box_degree: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disable moment pre-scaling
    #[arg(long = "no-normalize")]
    no_normalize: bool,
}

impl SolveFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            grid: self.grid,
            margin: self.margin,
            box_degree: self.box_degree,
            seed: self.seed,
            normalize: if self.no_normalize { Some(false) } else { None },
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem document
    Solve {
        input: Option<PathBuf>,
        output: Option<PathBuf>,
        /// Solve every problem document in a directory
        #[arg(long, conflicts_with_all = ["input", "output"])]
        batch: Option<PathBuf>,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Verify a measure against a problem
    Verify {
        problem: PathBuf,
        measure: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Generate a seeded problem with a known solution
    Random {
        output: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        args: RandomArgs,
    },
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve { input, output, batch, flags } => {
            let config = flags.config();
            if let Err(e) = config.validate() {
                eprintln!("error: {e}");
                return EXIT_IO;
            }
            match (batch, input, output) {
                (Some(dir), _, _) => cmd_solve_batch(&dir, &config),
                (None, Some(input), Some(output)) => cmd_solve(&input, &output, &config),
                _ => {
                    eprintln!("error: solve needs INPUT and OUTPUT, or --batch DIR");
                    EXIT_IO
                }
            }
        }
        Command::Verify { problem, measure, tol } => cmd_verify(&problem, &measure, tol),
        Command::Random { output, truth, args } => cmd_random(&args, &output, truth.as_deref()),
    }
}
