//! The `gisk` command line: argument definitions and command dispatch.
//!
//! Exit codes: 0 success, 1 mathematical negative (unstable input, failed
//! constraint, failing suite), 2 usage or parse error.

pub mod io;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use gisk_core::continuity::{path_csv_header, path_csv_rows, uniform_grid, verify_path, PathKind};
use gisk_core::dhym::{dhym_coefficients, reduce_coefficients, scan_theta_window, DhymSpec};
use gisk_core::figures::{figure_data, FigureKind, FigureParams};
use gisk_core::proplab::{run_named_suite, SuiteConfig, SUITES};
use gisk_core::sampling::{rng_from_seed, sample_level_set};
use gisk_core::stability::{check_stability, dominance, is_cy, phi, polyhedron_slacks, psi, root_dominates, slacks_admissible, tee};
use gisk_core::{FullCoeffs, GiskError, Status};
use serde::Serialize;

use crate::io::*;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Negative(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Negative(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Negative(m) => f.write_str(m),
        }
    }
}

impl From<GiskError> for CliError {
    fn from(e: GiskError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Negative(e.to_string())
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// A closed downstream pipe (`gisk ... | head`) is not an error.
fn quiet_pipe(r: std::io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(io_err),
    }
}

#[derive(Debug, Parser)]
#[command(name = "gisk", version, about = "Stability, root maps and continuity paths for general inverse sigma_k equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Thm41,
    P42,
    Eq48,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Map21,
    Polyhedron22,
    Path41,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability certificate of a coefficient file; exit 0 iff strictly stable.
    Check { file: PathBuf },
    /// Coefficients to root tuple.
    Phi {
        file: PathBuf,
        /// Also map back and report the relative reconstruction error.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Root tuple `{"n", "x": [x_{n-2}, ..., x_0]}` to coefficients.
    Psi {
        file: PathBuf,
        #[arg(long)]
        roundtrip: bool,
    },
    /// Largest admissible scaling of the lower coefficients.
    Tee { file: PathBuf },
    /// Membership of `c` in the dominance polyhedron of `d`; exit 0 iff inside.
    Polyhedron {
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        d: PathBuf,
    },
    /// Whether the first cone of `d` lies inside that of `c`; exit 0 iff it does.
    Dominance {
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        d: PathBuf,
    },
    /// Expand the phase equation at angle `theta`, or scan angles with `--scan`.
    Dhym {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "scan")]
        theta: Option<f64>,
        /// Number of interior grid angles on (0, pi) to classify.
        #[arg(long, conflicts_with = "theta")]
        scan: Option<usize>,
    },
    /// Remove the `n-1` term of a full coefficient file `{"n", "c"}`.
    Reduce { file: PathBuf },
    /// Build and check a continuity path; exit 0 iff every grid point passes.
    Path {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, value_enum, default_value = "thm41")]
        which: Which,
        /// Bend parameter for `eq48`; defaults to the critical value.
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<f64>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Also write the per-point table here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Curve samples for the reference pictures.
    Figures {
        #[arg(long, value_enum)]
        which: FigureArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        extent: Option<f64>,
        /// Reference coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        d: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run property suites; exit 0 iff all pass.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, env = "GISK_SEED", default_value_t = 42)]
        seed: u64,
        /// Sampled points per coefficient draw.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Coefficient draws per dimension.
        #[arg(long, default_value_t = 4)]
        draws: usize,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Replay a single case index of one suite.
        #[arg(long)]
        case: Option<usize>,
    },
    /// Sample points on the level set bounding the stable component.
    Levelset {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, env = "GISK_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn emit<T: Serialize, W: Write>(out: &mut W, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    quiet_pipe(writeln!(out, "{text}"))
}

fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let to_usage = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => quiet_pipe(Err(io)),
        other => Err(CliError::Usage(format!("{other:?}"))),
    };
    w.write_record(header).or_else(to_usage)?;
    for row in rows {
        w.write_record(row).or_else(to_usage)?;
    }
    quiet_pipe(w.flush())
}

fn code(ok: bool) -> i32 {
    if ok {
        0
    } else {
        1
    }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check { file } => {
            let input = load_coeffs(file)?;
            let certificate = check_stability(&input.coeffs);
            let ok = certificate.status == Status::StrictlyStable;
            emit(out, &CheckOutput { schema: SCHEMA, input, certificate })?;
            Ok(code(ok))
        }
        Command::Phi { file, roundtrip } => {
            let input = load_coeffs(file)?;
            let roots = phi(&input.coeffs)?;
            let roundtrip_error = if *roundtrip {
                Some(rel_err(&psi(&roots)?.d, &input.coeffs.d))
            } else {
                None
            };
            emit(out, &PhiOutput { schema: SCHEMA, input, roots, roundtrip_error })?;
            Ok(0)
        }
        Command::Psi { file, roundtrip } => {
            let roots = load_roots(file)?;
            let coeffs = psi(&roots)?;
            let roundtrip_error = if *roundtrip {
                Some(rel_err(&phi(&coeffs)?.x, &roots.x))
            } else {
                None
            };
            emit(out, &PsiOutput { schema: SCHEMA, roots, coeffs, roundtrip_error })?;
            Ok(0)
        }
        Command::Tee { file } => {
            let input = load_coeffs(file)?;
            let value = tee(&input.coeffs)?;
            let is_cy = is_cy(&input.coeffs);
            emit(out, &TeeOutput { schema: SCHEMA, input, tee: value, is_cy })?;
            Ok(0)
        }
        Command::Polyhedron { c, d } => {
            let (c, d) = (load_coeffs(c)?.coeffs, load_coeffs(d)?.coeffs);
            let slacks = polyhedron_slacks(&c, &d)?;
            let inside = slacks_admissible(&slacks, &phi(&d)?);
            emit(out, &PolyhedronOutput { schema: SCHEMA, c, d, inside, slacks })?;
            Ok(code(inside))
        }
        Command::Dominance { c, d } => {
            let (c, d) = (load_coeffs(c)?.coeffs, load_coeffs(d)?.coeffs);
            let verdict = dominance(&c, &d)?;
            let by_roots = root_dominates(&c, &d)?;
            let ok = verdict.dominates;
            emit(out, &DominanceOutput { schema: SCHEMA, c, d, verdict, root_dominates: by_roots })?;
            Ok(code(ok))
        }
        Command::Dhym { n, theta, scan } => {
            if let Some(points) = scan {
                let scan = scan_theta_window(*n, *points)?;
                let found = scan.stable_window.is_some();
                emit(out, &ScanOutput { schema: SCHEMA, scan })?;
                return Ok(code(found));
            }
            let spec = DhymSpec { n: *n, theta: theta.expect("clap requires theta without scan") };
            let full = dhym_coefficients(spec)?;
            let reduction = reduce_coefficients(&full)?;
            let certificate = check_stability(&reduction.reduced);
            emit(out, &DhymOutput { schema: SCHEMA, spec, full, reduction, certificate })?;
            Ok(0)
        }
        Command::Reduce { file } => {
            let raw: CoeffFile = read_json(file)?;
            let Some(c) = raw.c else {
                return Err(CliError::Usage("reduce expects a full coefficient file {\"n\", \"c\"}".into()));
            };
            let full = FullCoeffs::new(raw.n, c)?;
            let reduction = reduce_coefficients(&full)?;
            let certificate = check_stability(&reduction.reduced);
            emit(out, &ReduceOutput { schema: SCHEMA, full, reduction, certificate })?;
            Ok(0)
        }
        Command::Path { model, coeffs, which, ell, grid, csv, format } => {
            let m = load_model(model)?;
            let d = load_coeffs(coeffs)?.coeffs;
            let kind = match which {
                Which::Thm41 => PathKind::Thm41,
                Which::P42 => PathKind::P42,
                Which::Eq48 => PathKind::Eq48 {
                    ell: ell.unwrap_or_else(|| gisk_core::continuity::eq48_critical_ell(&d)),
                },
            };
            if *grid < 2 {
                return Err(CliError::Usage("grid needs at least two points".into()));
            }
            let report = verify_path(&d, &m, kind, &uniform_grid(*grid))?;
            let header = path_csv_header(report.n);
            let rows = path_csv_rows(&report);
            if let Some(path) = csv {
                let file = std::fs::File::create(path).map_err(io_err)?;
                write_csv(file, &header, &rows)?;
            }
            match format {
                Format::Json => emit(out, &report)?,
                Format::Csv => write_csv(&mut *out, &header, &rows)?,
            }
            Ok(code(report.all_pass))
        }
        Command::Figures { which, n, points, extent, d, ell, format } => {
            let kind = match which {
                FigureArg::Map21 => FigureKind::Map21,
                FigureArg::Polyhedron22 => FigureKind::Polyhedron22,
                FigureArg::Path41 => FigureKind::Path41,
            };
            let mut params = FigureParams::default_for(kind);
            params.n = n.unwrap_or(params.n);
            params.points = points.unwrap_or(params.points);
            params.extent = extent.unwrap_or(params.extent);
            params.d = d.clone();
            params.ell = *ell;
            // Every figure failure is a bad request, never a mathematical answer.
            let fig = figure_data(kind, &params).map_err(|e| CliError::Usage(e.to_string()))?;
            match format {
                Format::Json => emit(out, &fig)?,
                Format::Csv => {
                    let rows: Vec<Vec<String>> = fig
                        .rows
                        .iter()
                        .map(|r| std::iter::once(r.series.clone()).chain(r.values.iter().map(|v| v.to_string())).collect())
                        .collect();
                    write_csv(&mut *out, &fig.csv_header(), &rows)?;
                }
            }
            Ok(0)
        }
        Command::Verify { suite, seed, samples, draws, dims, tolerance, jobs, case } => {
            let cfg = SuiteConfig {
                master_seed: *seed,
                samples_per_case: *samples,
                coeff_draws: *draws,
                dims: dims.clone(),
                tolerance: *tolerance,
                jobs: *jobs,
                only_case: *case,
            };
            let names: Vec<&str> = if suite == "all" {
                if case.is_some() {
                    return Err(CliError::Usage("--case replays one suite; name it with --suite".into()));
                }
                SUITES.to_vec()
            } else if SUITES.contains(&suite.as_str()) {
                vec![suite.as_str()]
            } else {
                return Err(CliError::Usage(format!("unknown suite {suite:?}; choose from {} or all", SUITES.join(", "))));
            };
            let mut suites = Vec::new();
            for name in names {
                suites.push(run_named_suite(name, &cfg)?);
            }
            let passed = suites.iter().all(|s| s.passed);
            for s in suites.iter().filter(|s| !s.passed) {
                eprintln!("suite {} failed {} of {} checks", s.suite_name, s.failure_count, s.checks_run);
                for f in s.failures.iter().take(5) {
                    eprintln!(
                        "  replay: gisk verify --suite {} --seed {} --samples {} --draws {} --dims {} --case {}   # {}",
                        s.suite_name,
                        seed,
                        samples,
                        draws,
                        dims.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                        f.case,
                        f.check
                    );
                }
            }
            emit(out, &VerifyOutput { schema: SCHEMA, suites, passed })?;
            Ok(code(passed))
        }
        Command::Levelset { file, count, seed, format } => {
            let coeffs = load_coeffs(file)?.coeffs;
            let roots = phi(&coeffs)?;
            let mut rng = rng_from_seed(*seed);
            let mut points = Vec::with_capacity(*count);
            for _ in 0..*count {
                let p = sample_level_set(&mut rng, &coeffs, roots.x0(), 10_000)
                    .ok_or_else(|| CliError::Negative("level-set sampler exhausted its attempts".into()))?;
                points.push(p);
            }
            match format {
                Format::Json => emit(out, &LevelSetOutput { schema: SCHEMA, seed: *seed, coeffs, roots, points })?,
                Format::Csv => {
                    let header: Vec<String> = (1..=coeffs.n).map(|i| format!("lambda{i}")).collect();
                    let rows: Vec<Vec<String>> =
                        points.iter().map(|p| p.iter().map(|v| v.to_string()).collect()).collect();
                    write_csv(&mut *out, &header, &rows)?;
                }
            }
            Ok(0)
        }
    }
}

/// Parses `args` (without the program name) and runs, for in-process use.
pub fn run_args<W: Write>(args: &[&str], out: &mut W) -> Result<i32, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("gisk").chain(args.iter().copied()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (Result<i32, CliError>, String) {
        let mut buf = Vec::new();
        let r = run_args(args, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(GiskError::NotStable).exit_code(), 1);
        assert_eq!(CliError::from(GiskError::DegreeTooLow { min: 2, got: 1 }).exit_code(), 2);
        assert_eq!(CliError::from(GiskError::InvalidParameter("x".into())).exit_code(), 2);
    }

    #[test]
    fn parse_errors_are_usage() {
        let (r, _) = run_str(&["dhym", "--n", "three", "--theta", "1"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
        let (r, _) = run_str(&["dhym", "--n", "3", "--theta", "1", "--scan", "5"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
    }

    #[test]
    fn figures_in_process() {
        let (r, text) = run_str(&["figures", "--which", "polyhedron22", "--points", "3"]);
        assert_eq!(r.unwrap(), 0);
        assert!(text.lines().count() > 3);
        let (r, _) = run_str(&["figures", "--which", "map21", "--d", "1,2,3"]);
        assert!(r.is_err());
    }

    #[test]
    fn dhym_json_round_trips() {
        let (r, text) = run_str(&["dhym", "--n", "4", "--theta", "2.5"]);
        assert_eq!(r.unwrap(), 0);
        let parsed: DhymOutput = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.spec.n, 4);
        assert_eq!(serde_json::to_string_pretty(&parsed).unwrap(), text.trim_end());
    }

    #[test]
    fn relative_error_is_symmetric() {
        assert_eq!(rel_err(&[2.0, 4.0], &[2.0, 4.0]), 0.0);
        assert_eq!(rel_err(&[1.0], &[3.0]), rel_err(&[3.0], &[1.0]));
    }
}
