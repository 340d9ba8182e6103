//! Experiment configuration: one JSON document, unknown fields rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Generator, GeneratorKind};
use crate::error::{Error, Result};
use crate::estimation::{BasisKind, StateFamily};
use crate::operator::{DenseOperator, C64, DEFAULT_MAX_QUBITS};
use crate::search::SearchConfig;
use crate::sld::{SATURATION_TOL, SLD_KERNEL_TOL};
use crate::solver::SOLUTION_RESIDUAL_TOL;
use crate::state::{from_bloch, two_qubit_entangling_candidate, BlochCoefficients, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Fisher,
    Solve,
    Verify,
    Simulate,
    Scaling,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Fisher => "fisher",
            Task::Solve => "solve",
            Task::Verify => "verify",
            Task::Simulate => "simulate",
            Task::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCoefficients {
    pub c11: f64,
    pub c23: f64,
    pub c32: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    /// ½(𝟙 + σ₂)^{⊗n}
    OptimalSingleTensor,
    /// (|0…0⟩ + |1…1⟩)/√2
    Cat,
    /// ¼(𝟙𝟙 + c₁₁σ₁σ₁ + c₂₃σ₂σ₃ + c₃₂σ₃σ₂)
    #[serde(alias = "eq22")]
    EntangledPair(PairCoefficients),
    Bloch(BlochCoefficients),
    /// JSON file `{"real": [[…]], "imag": [[…]]}` holding the density matrix.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// p_j + p_k at or below this is SLD kernel.
    pub sld_kernel: f64,
    /// Both saturation residuals must be at or below this.
    pub saturation: f64,
    /// Residual of the optimal-state equation accepted as a solution.
    pub solution_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sld_kernel: SLD_KERNEL_TOL, saturation: SATURATION_TOL, solution_residual: SOLUTION_RESIDUAL_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub n_qubits: usize,
    pub generator: GeneratorKind,
    pub state: StateSpec,
    pub readout: BasisKind,
    /// Value of the parameter at which quantities are evaluated or simulated.
    pub x_true: f64,
    pub shots: u64,
    pub trials: usize,
    pub seed: u64,
    /// Probe sizes for `scaling`.
    pub n_list: Vec<usize>,
    pub max_qubits: usize,
    pub tolerances: Tolerances,
    pub search: SearchConfig,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: None,
            n_qubits: 1,
            generator: GeneratorKind::NonEntangling,
            state: StateSpec::OptimalSingleTensor,
            readout: BasisKind::ProductPm,
            x_true: 0.0,
            shots: 10_000,
            trials: 500,
            seed: 0,
            n_list: (1..=6).collect(),
            max_qubits: DEFAULT_MAX_QUBITS,
            tolerances: Tolerances::default(),
            search: SearchConfig::default(),
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    real: Vec<Vec<f64>>,
    #[serde(default)]
    imag: Option<Vec<Vec<f64>>>,
}

impl ExperimentConfig {
    /// Parse; serde reports line/column and field names on failure.
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let bad = |field: &str, why: String| Err(format!("config field `{field}`: {why}"));
        if self.max_qubits == 0 {
            return bad("max_qubits", "must be at least 1".into());
        }
        if self.n_qubits == 0 || self.n_qubits > self.max_qubits {
            return bad("n_qubits", format!("{} is outside 1..={}", self.n_qubits, self.max_qubits));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n == 0 || n > self.max_qubits) {
            return bad("n_list", format!("entry {n} is outside 1..={}", self.max_qubits));
        }
        if self.generator == GeneratorKind::Custom {
            return bad("generator", "only `nonentangling` and `entangling` are accepted".into());
        }
        if self.shots == 0 {
            return bad("shots", "must be at least 1".into());
        }
        for (name, v) in [
            ("tolerances.sld_kernel", self.tolerances.sld_kernel),
            ("tolerances.saturation", self.tolerances.saturation),
            ("tolerances.solution_residual", self.tolerances.solution_residual),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(name, format!("{v} must be positive"));
            }
        }
        if !self.x_true.is_finite() {
            return bad("x_true", "must be finite".into());
        }
        if self.search.starts == 0 {
            return bad("search.starts", "must be at least 1".into());
        }
        match &self.state {
            StateSpec::EntangledPair(_) if self.n_qubits != 2 => bad("state", "entangled_pair requires n_qubits = 2".into()),
            StateSpec::Bloch(b) if b.n_qubits() != self.n_qubits => {
                bad("state", format!("bloch coefficients describe {} qubit(s), n_qubits is {}", b.n_qubits(), self.n_qubits))
            }
            _ => Ok(()),
        }
    }

    pub fn generator(&self, n: usize) -> Result<Generator> {
        Generator::of_kind(self.generator, n)
    }

    /// Initial state for `n_qubits`.
    pub fn initial_state(&self, base_dir: Option<&Path>) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        match &self.state {
            StateSpec::OptimalSingleTensor => StateFamily::OptimalSingleTensor.build(n),
            StateSpec::Cat => {
                if n < 2 {
                    return Err(Error::InvalidArgument("cat state requires at least two qubits".into()));
                }
                StateFamily::Cat.build(n)
            }
            StateSpec::EntangledPair(c) => two_qubit_entangling_candidate(c.c11, c.c23, c.c32),
            StateSpec::Bloch(b) => from_bloch(b),
            StateSpec::File(path) => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", full.display())))?;
                let m: MatrixFile = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", full.display())))?;
                let dim = m.real.len();
                let imag = m.imag.unwrap_or_else(|| vec![vec![0.0; dim]; dim]);
                if imag.len() != dim || m.real.iter().chain(&imag).any(|r| r.len() != dim) {
                    return Err(Error::InvalidArgument(format!("{}: matrix must be square", full.display())));
                }
                let op = DenseOperator::from_fn(dim, |r, c| C64::new(m.real[r][c], imag[r][c]));
                let rho = DensityMatrix::new(op)?;
                if rho.n_qubits() != n {
                    return Err(Error::DimensionMismatch { expected: 1 << n, found: dim });
                }
                Ok(rho)
            }
        }
    }

    /// State family for `scaling`, which needs a state at every n.
    pub fn state_family(&self) -> std::result::Result<StateFamily, String> {
        match self.state {
            StateSpec::OptimalSingleTensor => Ok(StateFamily::OptimalSingleTensor),
            StateSpec::Cat => Ok(StateFamily::Cat),
            _ => Err("config field `state`: scaling needs `optimal_single_tensor` or `cat`".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn parses_state_variants() {
        let c = ExperimentConfig::from_json(r#"{"n_qubits": 2, "state": {"eq22": {"c11": 1, "c23": 1, "c32": 1}}}"#).unwrap();
        assert!((c.initial_state(None).unwrap().purity() - 1.0).abs() < 1e-10);
        let c = ExperimentConfig::from_json(r#"{"state": {"bloch": {"a": [0, 1, 0]}}}"#).unwrap();
        assert!((c.initial_state(None).unwrap().purity() - 1.0).abs() < 1e-10);
        let c = ExperimentConfig::from_json(r#"{"n_qubits": 3, "generator": "entangling", "state": "cat"}"#).unwrap();
        assert_eq!(c.initial_state(None).unwrap().n_qubits(), 3);
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let err = ExperimentConfig::from_json("{\n  \"n_qubits\": 1,\n  \"shotz\": 5\n}").unwrap_err();
        assert!(err.contains("shotz") && err.contains("line 3"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"search": {"startz": 1}}"#).unwrap_err();
        assert!(err.contains("startz"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        for (text, field) in [
            (r#"{"n_qubits": 0}"#, "n_qubits"),
            (r#"{"n_qubits": 11}"#, "n_qubits"),
            (r#"{"shots": 0}"#, "shots"),
            (r#"{"state": {"entangled_pair": {"c11": 1, "c23": 1, "c32": 1}}}"#, "state"),
            (r#"{"tolerances": {"saturation": -1}}"#, "tolerances.saturation"),
            (r#"{"generator": "custom"}"#, "generator"),
        ] {
            let err = ExperimentConfig::from_json(text).unwrap_err();
            assert!(err.contains(field), "{text}: {err}");
        }
    }

    #[test]
    fn matrix_file_state() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("rho.json"), r#"{"real": [[0.5, 0], [0, 0.5]], "imag": [[0, -0.5], [0.5, 0]]}"#).unwrap();
        let c = ExperimentConfig::from_json(r#"{"state": {"file": "rho.json"}}"#).unwrap();
        let rho = c.initial_state(Some(dir.path())).unwrap();
        assert!((rho.bloch_vector().unwrap()[1] - 1.0).abs() < 1e-12);
    }
}
