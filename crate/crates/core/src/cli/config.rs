//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryData;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::metrics::FlopModel;
use crate::slowness::{SlownessField, SlownessKind};
use crate::theta::model::{ModelProblem, ThetaPolicy};
use crate::theta::ThetaParams;
use crate::twoscale::{Problem, SolverOptions};

/// Rough bytes held per fine lattice node during a run.
const BYTES_PER_NODE: f64 = 64.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Independent runs with seeds `seed, seed + 1, …`.
    #[serde(default = "one")]
    pub trials: usize,
    /// Upper bound on the estimated working set, in MiB.
    #[serde(default = "default_memory")]
    pub memory_mb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speedup: Option<SpeedupConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> usize {
    1
}

fn default_memory() -> f64 {
    8192.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "two")]
    pub dim: usize,
    /// Coarse cells per axis.
    pub n: usize,
    /// Fine cells per coarse cell.
    pub m: usize,
    pub slowness: SlownessKind,
    #[serde(default = "origin")]
    pub boundary: BoundaryData,
}

fn two() -> usize {
    2
}

fn origin() -> BoundaryData {
    BoundaryData::point(0.0, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_max_k")]
    pub max_k: usize,
    #[serde(default = "default_policy")]
    pub policy: ThetaPolicy,
}

fn default_max_k() -> usize {
    30
}

fn default_policy() -> ThetaPolicy {
    ThetaPolicy::Estimated { params: ThetaParams::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedupConfig {
    pub cases: Vec<FlopModel>,
}

impl Default for SpeedupConfig {
    fn default() -> Self {
        let case = |n, m, d, c| FlopModel { n, m, d, c };
        Self {
            cases: vec![
                case(20, 100, 2, 10),
                case(10, 50, 2, 10),
                case(14, 100, 2, 10),
                case(32, 32, 2, 10),
                case(10, 100, 1, 10),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write field snapshots every this many iterations; 0 disables them.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Write final field CSVs.
    #[serde(default = "yes")]
    pub fields: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), snapshot_every: 0, fields: true }
    }
}

impl ExperimentConfig {
    /// Reads and parses a config file. Parse errors carry `path:line:column`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
    }

    /// Fills defaults that depend on the grid and checks every section.
    pub fn resolve(mut self) -> Result<Self> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.memory_mb > 0.0) {
            return Err(Error::Config("memory_mb must be positive".into()));
        }
        self.solver.validate()?;
        if let Some(p) = &mut self.problem {
            let spec = p.spec()?;
            if let SlownessKind::Squares { line_tol, .. } = &mut p.slowness {
                line_tol.get_or_insert(spec.fine_spacing() / 2.0);
            }
            p.boundary.validate(p.dim)?;
            SlownessField::from_catalog(&p.slowness, self.seed)?;
            let nodes = ((spec.fine_cells() + 1) as f64).powi(p.dim as i32);
            let need = nodes * BYTES_PER_NODE / (1024.0 * 1024.0);
            if need > self.memory_mb {
                return Err(Error::Config(format!(
                    "problem: about {need:.0} MiB needed for {nodes} fine nodes, memory_mb is {}",
                    self.memory_mb
                )));
            }
        }
        if let Some(m) = &self.model {
            ModelProblem::new(m.n, m.m)?;
            m.policy.validate()?;
        }
        if let Some(s) = &self.speedup {
            for c in &s.cases {
                FlopModel::new(c.n, c.m, c.d, c.c)?;
            }
        }
        Ok(self)
    }
}

impl ProblemConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.n, self.m)
    }

    /// Samples the slowness for the given seed and builds the problem.
    pub fn build(&self, seed: u64) -> Result<Problem> {
        let field = SlownessField::from_catalog(&self.slowness, seed)?;
        Problem::new(self.spec()?, &field, self.boundary.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(
            r#"{"problem": {"n": 4, "m": 5, "slowness": {"kind": "constant", "value": 1}}}"#,
            "t",
        )
        .unwrap()
        .resolve()
        .unwrap();
        let p = c.problem.unwrap();
        assert_eq!(p.dim, 2);
        assert_eq!(p.boundary, BoundaryData::point(0.0, 0.0));
        assert_eq!(c.solver, SolverOptions::default());
        assert_eq!(c.trials, 1);
    }

    #[test]
    fn parse_error_is_line_anchored() {
        let err = ExperimentConfig::parse("{\n  \"seed\": 1,\n  \"bogus\": 2\n}", "cfg.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cfg.json:3:"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn squares_tolerance_defaults_to_half_h() {
        let c = ExperimentConfig::parse(
            r#"{"problem": {"n": 4, "m": 5, "slowness": {"kind": "squares", "eps": 0.1}}}"#,
            "t",
        )
        .unwrap()
        .resolve()
        .unwrap();
        match c.problem.unwrap().slowness {
            SlownessKind::Squares { line_tol, .. } => assert_eq!(line_tol, Some(0.025)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn memory_budget_enforced() {
        let c = ExperimentConfig::parse(
            r#"{"memory_mb": 1, "problem": {"n": 20, "m": 100, "slowness": {"kind": "constant", "value": 1}}}"#,
            "t",
        )
        .unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::parse(
            r#"{"problem": {"n": 4, "m": 5, "slowness": {"kind": "maze"}}, "model": {"n": 4, "m": 4}}"#,
            "t",
        )
        .unwrap()
        .resolve()
        .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::parse(&text, "t").unwrap(), c);
    }
}
