//! Command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use redlight::cost::{expected_arrival, expected_arrival_mc, McEstimate};
use redlight::io::{csv_float, parse_problem, parse_trajectory, to_json, write_csv, ReportFile};
use redlight::kinematics::ProblemValidation;
use redlight::oracle::{dp_min_cost, perturbation_test, sweep_switch_velocity, DpGrid, SweepCurve};
use redlight::solver::{classify, RegionLabel};
use redlight::{solve, validate_problem, Error, PhasePattern, ProblemSpec, Trajectory};

#[derive(Debug, Parser)]
#[command(name = "redlight", version, about = "Optimal approach speed for a red light with a random green time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance and write the report as JSON.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected arrival time of a given trajectory.
    Evaluate {
        #[arg(long)]
        problem: PathBuf,
        /// Trajectory file or a solver report.
        #[arg(long)]
        trajectory: PathBuf,
        /// Also estimate by sampling this many green times.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Region labels over a (v0, d) grid as CSV.
    PhaseDiagram {
        #[arg(long)]
        problem: PathBuf,
        /// MIN:MAX:N
        #[arg(long)]
        v0: GridRange,
        /// MIN:MAX:N
        #[arg(long)]
        d: GridRange,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost against switch speed as CSV.
    SweepVc {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 401)]
        points: usize,
        /// Pattern family; defaults to the solved pattern.
        #[arg(long)]
        family: Option<PhasePattern>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independent checks of a solution.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Check feasibility and triviality.
    Validate {
        #[arg(long)]
        problem: PathBuf,
    },
}

#[derive(Debug, Args)]
struct OracleCommon {
    #[arg(long)]
    problem: PathBuf,
    /// JSON report destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV curve destination.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Grid dynamic program.
    Dp {
        #[command(flatten)]
        common: OracleCommon,
        /// Time step; defaults to horizon/400.
        #[arg(long)]
        dt: Option<f64>,
        /// Speed step; defaults to v_max/200.
        #[arg(long)]
        dv: Option<f64>,
    },
    /// Random distance-preserving perturbations.
    Perturb {
        #[command(flatten)]
        common: OracleCommon,
        /// Trajectory to perturb; defaults to the solution.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cost against switch speed.
    Sweep {
        #[command(flatten)]
        common: OracleCommon,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        family: Option<PhasePattern>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GridRange {
    min: f64,
    max: f64,
    n: usize,
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, n] = parts.as_slice() else { return Err(format!("expected MIN:MAX:N, got `{s}`")) };
        let min: f64 = min.parse().map_err(|e| format!("bad MIN: {e}"))?;
        let max: f64 = max.parse().map_err(|e| format!("bad MAX: {e}"))?;
        let n: usize = n.parse().map_err(|e| format!("bad N: {e}"))?;
        if n == 0 || !(min <= max) {
            return Err(format!("need N >= 1 and MIN <= MAX, got `{s}`"));
        }
        Ok(Self { min, max, n })
    }
}

impl GridRange {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| {
            if self.n == 1 {
                self.min
            } else {
                self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
            }
        })
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("problem rejected: {0}")]
    Rejected(ProblemValidation),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Rejected(_) | CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                Error::Rejected(_)
                | Error::Schema { .. }
                | Error::InvalidParameter { .. }
                | Error::InvalidTable(_)
                | Error::UnsupportedDistribution(..) => 2,
                _ => 1,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

fn load_problem(path: &Path) -> CliResult<ProblemSpec> {
    Ok(parse_problem(&read(path)?)?.to_spec()?)
}

fn load_trajectory(path: &Path, p: &ProblemSpec) -> CliResult<Trajectory> {
    Ok(parse_trajectory(&read(path)?)?.to_trajectory(p)?)
}

fn require_solvable(p: &ProblemSpec) -> CliResult<()> {
    let v = validate_problem(p);
    if v.is_solvable() {
        Ok(())
    } else {
        Err(CliError::Rejected(v))
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Core(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_csv(out: Option<&Path>, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::Core(e.into()))?;
            write_csv(file, header, rows)?;
        }
        None => write_csv(std::io::stdout().lock(), header, rows)?,
    }
    Ok(())
}

fn default_family(p: &ProblemSpec, family: Option<PhasePattern>) -> CliResult<PhasePattern> {
    match family {
        Some(f) => Ok(f),
        None => {
            require_solvable(p)?;
            Ok(solve(p)?.pattern)
        }
    }
}

fn sweep_rows(curve: &SweepCurve) -> Vec<Vec<String>> {
    curve.points.iter().map(|s| vec![csv_float(s.v_c), s.cost.map_or_else(String::new, csv_float)]).collect()
}

#[derive(Serialize)]
struct Evaluation {
    expected_arrival: f64,
    distance: f64,
    pattern: String,
    mc: Option<McEstimate>,
}

#[derive(Serialize)]
struct DpReport {
    cost: f64,
    dual_value: f64,
    mu: f64,
    distance: f64,
    pattern: String,
    steps: usize,
    speeds: usize,
    horizon: f64,
    solver_cost: Option<f64>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve { problem, out } => {
            let p = load_problem(&problem)?;
            require_solvable(&p)?;
            let r = solve(&p)?;
            emit(out.as_deref(), &to_json(&ReportFile::new(&r))?)
        }
        Command::Evaluate { problem, trajectory, mc, seed, out } => {
            let p = load_problem(&problem)?;
            let traj = load_trajectory(&trajectory, &p)?;
            let eval = Evaluation {
                expected_arrival: expected_arrival(&traj, &p)?,
                distance: traj.total_distance(),
                pattern: traj.pattern().to_string(),
                mc: mc.map(|n| expected_arrival_mc(&traj, &p, n, seed)),
            };
            emit(out.as_deref(), &to_json(&eval)?)
        }
        Command::PhaseDiagram { problem, v0, d, out } => {
            let p = load_problem(&problem)?;
            let mut rows = Vec::with_capacity(v0.n * d.n);
            for v in v0.values() {
                for dd in d.values() {
                    let q = p.with_start(v, dd);
                    let label = classify(&q, v, dd)?;
                    let cost = match &label {
                        RegionLabel::Pattern(_) => solve(&q).ok().map(|r| r.expected_arrival),
                        _ => None,
                    };
                    rows.push(vec![
                        csv_float(v),
                        csv_float(dd),
                        label.to_string(),
                        cost.map_or_else(String::new, csv_float),
                    ]);
                }
            }
            emit_csv(out.as_deref(), &["v0", "d", "pattern", "cost"], rows)
        }
        Command::SweepVc { problem, points, family, out } => {
            let p = load_problem(&problem)?;
            let family = default_family(&p, family)?;
            let curve = sweep_switch_velocity(&p, &family, points)?;
            emit_csv(out.as_deref(), &["v_c", "expected_cost"], sweep_rows(&curve))
        }
        Command::Oracle(OracleCommand::Dp { common, dt, dv }) => {
            let p = load_problem(&common.problem)?;
            require_solvable(&p)?;
            let mut grid = DpGrid::default_for(&p);
            if let Some(dt) = dt {
                if !(dt > 0.0) {
                    return Err(CliError::Input(format!("--dt must be positive, got {dt}")));
                }
                grid.steps = (grid.horizon / dt).ceil() as usize;
            }
            if let Some(dv) = dv {
                if !(dv > 0.0) {
                    return Err(CliError::Input(format!("--dv must be positive, got {dv}")));
                }
                grid.speeds = (p.v_max / dv).ceil() as usize;
            }
            let r = dp_min_cost(&p, &grid)?;
            let report = DpReport {
                cost: r.cost,
                dual_value: r.dual_value,
                mu: r.mu,
                distance: r.distance,
                pattern: r.pattern.to_string(),
                steps: grid.steps,
                speeds: grid.speeds,
                horizon: grid.horizon,
                solver_cost: solve(&p).ok().map(|s| s.expected_arrival),
            };
            if let Some(path) = &common.csv {
                let rows = r.trace.iter().map(|row| row.iter().map(|&x| csv_float(x)).collect()).collect();
                emit_csv(Some(path), &["t", "v", "x"], rows)?;
            }
            emit(common.out.as_deref(), &to_json(&report)?)
        }
        Command::Oracle(OracleCommand::Perturb { common, trajectory, n, seed }) => {
            let p = load_problem(&common.problem)?;
            require_solvable(&p)?;
            let traj = match trajectory {
                Some(path) => load_trajectory(&path, &p)?,
                None => solve(&p)?.trajectory,
            };
            let report = perturbation_test(&traj, &p, n, seed)?;
            emit(common.out.as_deref(), &to_json(&report)?)
        }
        Command::Oracle(OracleCommand::Sweep { common, points, family }) => {
            let p = load_problem(&common.problem)?;
            let family = default_family(&p, family)?;
            let curve = sweep_switch_velocity(&p, &family, points)?;
            if let Some(path) = &common.csv {
                emit_csv(Some(path), &["v_c", "expected_cost"], sweep_rows(&curve))?;
            }
            emit(common.out.as_deref(), &to_json(&curve)?)
        }
        Command::Validate { problem } => {
            let p = load_problem(&problem)?;
            let v = validate_problem(&p);
            if v.is_solvable() {
                emit(None, &to_json(&v)?)
            } else {
                Err(CliError::Rejected(v))
            }
        }
    }
}

#[derive(Serialize)]
struct Failure<'a> {
    status: &'static str,
    reasons: Vec<&'a str>,
    message: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REDLIGHT_LOG", "error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let codes: Vec<String> = match &e {
                CliError::Rejected(v) | CliError::Core(Error::Rejected(v)) => {
                    v.reasons.iter().map(|r| r.code.to_string()).collect()
                }
                CliError::Core(Error::Schema { .. }) => vec!["schema".into()],
                CliError::Core(Error::UnsupportedDistribution(..)) => vec!["unsupported-distribution".into()],
                _ if code == 2 => vec!["invalid-input".into()],
                _ => vec!["internal".into()],
            };
            let failure = Failure {
                status: if code == 2 { "rejected" } else { "error" },
                reasons: codes.iter().map(String::as_str).collect(),
                message: e.to_string(),
            };
            if let Ok(text) = to_json(&failure) {
                print!("{text}");
            }
            log::debug!("exit code {code}");
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
