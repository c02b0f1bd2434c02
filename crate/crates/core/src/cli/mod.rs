//! Experiment driver behind the `eikonal` binary.
//!
//! Commands: `run` (two-scale method), `reference` (whole-domain fine
//! solution), `model` (strip model problem) and `speedup` (flop model).
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::boundary::BoundaryData;
use crate::error::{Error, Result};
use crate::metrics::{linf, ErrorNorms, FlopModel, SpeedupEstimate};
use crate::slowness::SlownessKind;
use crate::theta::model::ModelProblem;
use crate::twoscale::{run, thread_pool, CoarseState, IterationRecord, Problem};

pub use config::{ExperimentConfig, ModelConfig, OutputConfig, ProblemConfig, SpeedupConfig};
use output::{num, opt, write_json, write_matrix, write_table};

#[derive(Debug, Parser)]
#[command(name = "eikonal", version, about = "Two-scale domain-decomposition Eikonal solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads, a count or `max` (default: available parallelism).
    #[arg(long, global = true, value_parser = parse_workers)]
    pub workers: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the snapshot interval (0 disables snapshots).
    #[arg(long, global = true)]
    pub snapshot_every: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the two-scale method and record its error history.
    Run,
    /// Solve on the whole fine grid.
    Reference,
    /// Run the strip model problem for a θ policy.
    Model,
    /// Print the flop-model speedup table.
    Speedup,
}

fn parse_workers(s: &str) -> std::result::Result<usize, String> {
    if s == "max" {
        return Ok(std::thread::available_parallelism().map_or(1, |n| n.get()));
    }
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(format!("expected a count or `max`: {e}")),
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        _ => 2,
    }
}

/// Parses `std::env::args` and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Loads the config, applies flag overrides and fills defaults.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Command::Speedup) => ExperimentConfig::parse("{}", "<default>")?,
        (None, _) => return Err(Error::Config("--config is required for this command".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(every) = cli.snapshot_every {
        cfg.output.snapshot_every = every;
    }
    cfg.resolve()
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    let pool = thread_pool(cli.workers)?;
    pool.install(|| match cli.command {
        Command::Run => cmd_run(&cfg),
        Command::Reference => cmd_reference(&cfg),
        Command::Model => cmd_model(&cfg),
        Command::Speedup => {
            let rows = cmd_speedup(&cfg, cli.out.as_deref())?;
            print!("{}", speedup_table(&rows));
            Ok(())
        }
    })
}

fn problem_section(cfg: &ExperimentConfig) -> Result<&ProblemConfig> {
    cfg.problem.as_ref().ok_or_else(|| Error::Config("config has no `problem` section".into()))
}

#[derive(Serialize)]
struct RunDiagnostics<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    seed: u64,
    /// `converged` or `max_iters`.
    status: &'static str,
    converged: bool,
    iterations: usize,
    reference_rounds: usize,
    reference_converged: bool,
    final_coarse_error: Option<ErrorNorms>,
    final_patched_error: Option<ErrorNorms>,
    /// `max |U − u|` on the skeleton at termination.
    coarse_fine_gap: f64,
    wall_ms: f64,
}

/// Error history of one trial: `(l1_rel, l1_abs, linf)` of `U^k` per `k`.
type Curve = Vec<(f64, f64, f64)>;

/// Runs every trial; with more than one, each gets its own subdirectory and
/// `mean_history.csv` averages them (a finished trial keeps its last value).
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<()> {
    let pc = problem_section(cfg)?;
    let out = &cfg.output.dir;
    let mut curves = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let dir = if cfg.trials == 1 { out.clone() } else { out.join(format!("trial_{t:02}")) };
        curves.push(run_trial(cfg, pc, cfg.seed + t as u64, &dir)?);
    }
    if cfg.trials > 1 {
        let len = curves.iter().map(Vec::len).max().unwrap_or(0);
        let rows = (0..len).map(|k| {
            let mut mean = (0.0, 0.0, 0.0);
            for c in &curves {
                let e = c[k.min(c.len() - 1)];
                mean = (mean.0 + e.0, mean.1 + e.1, mean.2 + e.2);
            }
            let n = curves.len() as f64;
            vec![k.to_string(), num(mean.0 / n), num(mean.1 / n), num(mean.2 / n)]
        });
        write_table(&out.join("mean_history.csv"), &["k", "l1_rel", "l1_abs", "linf"], rows)?;
    }
    Ok(())
}

const HISTORY_HEADER: [&str; 14] = [
    "k",
    "l1_rel",
    "l1_abs",
    "linf",
    "wall_ms",
    "converged",
    "patched_l1_rel",
    "patched_l1_abs",
    "patched_linf",
    "max_change",
    "winds_changed",
    "weighted_nodes",
    "max_theta_bar",
    "max_theta_used",
];

fn history_row(r: &IterationRecord, converged: bool) -> Vec<String> {
    let c = r.coarse_error;
    let p = r.patched_error;
    vec![
        r.k.to_string(),
        opt(c.map(|e| e.l1_rel)),
        opt(c.map(|e| e.l1_abs)),
        opt(c.map(|e| e.linf)),
        format!("{:.3}", r.wall_ms),
        converged.to_string(),
        opt(p.map(|e| e.l1_rel)),
        opt(p.map(|e| e.l1_abs)),
        opt(p.map(|e| e.linf)),
        opt(r.max_change),
        r.winds_changed.to_string(),
        r.weighted_nodes.to_string(),
        opt(r.max_theta_bar),
        opt(r.max_theta_used),
    ]
}

fn run_trial(cfg: &ExperimentConfig, pc: &ProblemConfig, seed: u64, dir: &Path) -> Result<Curve> {
    let start = Instant::now();
    let problem = pc.build(seed)?;
    let (reference, report) = problem.reference(cfg.solver.max_rounds);
    let every = cfg.output.snapshot_every;
    let mut snapshot_result = Ok(());
    let res = run(&problem, &cfg.solver, Some(&reference.values), |rec, coarse, _, patched| {
        if every > 0 && rec.k % every == 0 && snapshot_result.is_ok() {
            snapshot_result =
                write_fields(&problem, coarse, patched, &dir.join("snapshots"), &format!("_k{:04}", rec.k));
        }
    })?;
    snapshot_result?;

    let last = res.history.len() - 1;
    let rows = res.history.iter().enumerate().map(|(i, r)| history_row(r, res.converged && i == last));
    write_table(&dir.join("history.csv"), &HISTORY_HEADER, rows)?;
    if cfg.output.fields {
        write_fields(&problem, &res.coarse, &res.patched, dir, "")?;
    }
    let final_rec = &res.history[last];
    let diag = RunDiagnostics {
        command: "run",
        config: cfg,
        seed,
        status: if res.converged { "converged" } else { "max_iters" },
        converged: res.converged,
        iterations: res.iterations(),
        reference_rounds: report.rounds,
        reference_converged: report.converged,
        final_coarse_error: final_rec.coarse_error,
        final_patched_error: final_rec.patched_error,
        coarse_fine_gap: linf(&res.coarse.values, &res.fine.values)?,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&dir.join("diagnostics.json"), &diag)?;
    Ok(res.history.iter().filter_map(|r| r.coarse_error.map(|e| (e.l1_rel, e.l1_abs, e.linf))).collect())
}

/// `coarse.csv` (values on the unshifted coarse grid), `skeleton.csv` (every
/// coarse-family node with its wind) and `fine.csv` (patched subdomain
/// solutions), each name carrying `suffix`.
pub fn write_fields(problem: &Problem, coarse: &CoarseState, patched: &[f64], dir: &Path, suffix: &str) -> Result<()> {
    let spec = problem.spec();
    let sk = problem.skeleton();
    let (n, m) = (spec.n(), spec.m());
    let cny = if spec.dim() == 1 { 1 } else { n + 1 };
    let mut grid = Vec::with_capacity((n + 1) * cny);
    for a in 0..=n {
        for b in 0..cny {
            let p = sk.index(a * m, b * m).expect("coarse node lies on the skeleton");
            grid.push(coarse.values[p]);
        }
    }
    write_matrix(&dir.join(format!("coarse{suffix}.csv")), &grid, n + 1, cny)?;
    let rows = sk.nodes().iter().enumerate().map(|(p, &(gx, gy))| {
        let [x, y] = spec.point(gx, gy);
        let w = coarse.winds[p];
        vec![
            gx.to_string(),
            gy.to_string(),
            num(x),
            num(y),
            num(coarse.values[p]),
            w.x().to_string(),
            w.y().to_string(),
        ]
    });
    write_table(&dir.join(format!("skeleton{suffix}.csv")), &["gx", "gy", "x", "y", "U", "wx", "wy"], rows)?;
    let (nx, ny) = problem.lattice_shape();
    write_matrix(&dir.join(format!("fine{suffix}.csv")), patched, nx, ny)
}

#[derive(Serialize)]
struct ReferenceDiagnostics<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    rounds: usize,
    converged: bool,
    /// Against `r · distance` to the nearest source, for constant slowness
    /// and point sources.
    exact_error: Option<ErrorNorms>,
}

#[derive(Serialize)]
struct ModelReferenceDiagnostics<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    /// L1 norm of `u^f − u^{exact}` per unit strip area.
    discretization_error: f64,
}

/// Writes `reference.csv` for the `problem` section and
/// `model_reference.csv` for the `model` section.
pub fn cmd_reference(cfg: &ExperimentConfig) -> Result<()> {
    let out = &cfg.output.dir;
    if cfg.problem.is_none() && cfg.model.is_none() {
        return Err(Error::Config("config has neither a `problem` nor a `model` section".into()));
    }
    if let Some(pc) = &cfg.problem {
        let problem = pc.build(cfg.seed)?;
        let (field, report) = problem.reference(cfg.solver.max_rounds);
        let (nx, ny) = problem.lattice_shape();
        write_matrix(&out.join("reference.csv"), &field.values, nx, ny)?;
        let exact_error = match (&pc.slowness, &pc.boundary) {
            (SlownessKind::Constant { value }, BoundaryData::Points { points }) => {
                let spec = problem.spec();
                let exact: Vec<f64> = (0..nx * ny)
                    .map(|k| {
                        let [x, y] = spec.point(k / ny, k % ny);
                        points.iter().map(|q| value * (x - q[0]).hypot(y - q[1])).fold(f64::INFINITY, f64::min)
                    })
                    .collect();
                let cell = spec.fine_spacing().powi(spec.dim() as i32);
                Some(ErrorNorms::compute(&field.values, &exact, cell)?)
            }
            _ => None,
        };
        let diag = ReferenceDiagnostics {
            command: "reference",
            config: cfg,
            rounds: report.rounds,
            converged: report.converged,
            exact_error,
        };
        write_json(&out.join("reference.json"), &diag)?;
    }
    if let Some(mc) = &cfg.model {
        let mp = ModelProblem::new(mc.n, mc.m)?;
        let f = mp.fine_reference();
        write_matrix(&out.join("model_reference.csv"), &f.values, f.nx(), f.ny())?;
        let diag = ModelReferenceDiagnostics {
            command: "reference",
            config: cfg,
            discretization_error: mp.discretization_error(&f),
        };
        write_json(&out.join("model_reference.json"), &diag)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ModelDiagnostics<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    discretization_error: f64,
    final_linf: f64,
    /// First `k` with `max |U^k − u^f| ≤ 1e-12`, if reached.
    settled_at: Option<usize>,
}

/// `model.csv` with the error curve and `bounds.csv` with the per-node window
/// `(m̃, M̄)` and applied θ at every step.
pub fn cmd_model(cfg: &ExperimentConfig) -> Result<()> {
    let mc = cfg.model.as_ref().ok_or_else(|| Error::Config("config has no `model` section".into()))?;
    let out = &cfg.output.dir;
    let mp = ModelProblem::new(mc.n, mc.m)?;
    let run = mp.run(&mc.policy, mc.max_k)?;
    let rows = run.history.iter().map(|it| {
        vec![
            it.k.to_string(),
            num(it.linf),
            num(it.l1_abs),
            num(it.min_mbar),
            num(it.max_theta_used),
            num(it.settled_error),
        ]
    });
    write_table(&out.join("model.csv"), &["k", "linf", "l1_abs", "min_Mbar", "max_theta_used", "settled_error"], rows)?;
    let rows = run.steps.iter().enumerate().flat_map(|(s, step)| {
        (1..=mc.n).flat_map(move |i| {
            (1..=mc.m).map(move |j| {
                let p = i * (mc.m + 1) + j;
                vec![
                    (s + 1).to_string(),
                    i.to_string(),
                    j.to_string(),
                    num(step.lower[p]),
                    num(step.upper[p]),
                    num(step.theta[p]),
                ]
            })
        })
    });
    write_table(&out.join("bounds.csv"), &["k", "i", "j", "lower", "upper", "theta"], rows)?;
    let diag = ModelDiagnostics {
        command: "model",
        config: cfg,
        discretization_error: mp.discretization_error(&mp.fine_reference()),
        final_linf: run.history.last().map_or(f64::NAN, |it| it.linf),
        settled_at: run.history.iter().find(|it| it.linf <= 1e-12).map(|it| it.k),
    };
    write_json(&out.join("model.json"), &diag)
}

/// Evaluates the flop model for every configured case; writes
/// `speedup.csv` when `out` is given.
pub fn cmd_speedup(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<(FlopModel, SpeedupEstimate)>> {
    let cases = cfg.speedup.clone().unwrap_or_default().cases;
    let rows: Vec<(FlopModel, SpeedupEstimate)> = cases
        .into_iter()
        .map(|c| FlopModel::new(c.n, c.m, c.d, c.c).map(|f| (f, f.speedup_threshold())))
        .collect::<Result<_>>()?;
    if let Some(dir) = out {
        let table = rows.iter().map(|(f, s)| {
            vec![
                f.n.to_string(),
                f.m.to_string(),
                f.d.to_string(),
                f.c.to_string(),
                num(s.threshold),
                num(s.serial_fine),
                num(s.coarse_phase),
                num(s.fine_phase),
            ]
        });
        write_table(
            &dir.join("speedup.csv"),
            &["N", "M", "d", "C", "threshold", "serial_fine", "coarse_phase", "fine_phase"],
            table,
        )?;
    }
    Ok(rows)
}

pub fn speedup_table(rows: &[(FlopModel, SpeedupEstimate)]) -> String {
    let mut s = format!(
        "{:>5} {:>5} {:>2} {:>4} {:>12} {:>14} {:>14} {:>14}\n",
        "N", "M", "d", "C", "threshold", "serial", "coarse/iter", "fine/iter"
    );
    for (f, e) in rows {
        s.push_str(&format!(
            "{:>5} {:>5} {:>2} {:>4} {:>12.2} {:>14.4e} {:>14.4e} {:>14.4e}\n",
            f.n, f.m, f.d, f.c, e.threshold, e.serial_fine, e.coarse_phase, e.fine_phase
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 3, "model": {"n": 4, "m": 4}}"#).unwrap();
        let cli = Cli::try_parse_from([
            "eikonal",
            "model",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            "elsewhere",
            "--snapshot-every",
            "2",
        ])
        .unwrap();
        let cfg = resolve_config(&cli).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.output.dir, PathBuf::from("elsewhere"));
        assert_eq!(cfg.output.snapshot_every, 2);
    }

    #[test]
    fn workers_accepts_count_or_max() {
        assert_eq!(parse_workers("3"), Ok(3));
        assert!(parse_workers("max").unwrap() >= 1);
        assert!(parse_workers("0").is_err());
        assert!(parse_workers("many").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
    }

    #[test]
    fn default_speedup_table_leads_with_20_by_100() {
        let cfg = ExperimentConfig::parse("{}", "t").unwrap();
        let rows = cmd_speedup(&cfg, None).unwrap();
        assert_eq!((rows[0].0.n, rows[0].0.m), (20, 100));
        assert!(speedup_table(&rows).lines().count() == rows.len() + 1);
    }
}
