//! Monte Carlo simulation of prepare → evolve → read out → estimate.
//!
//! Outcome probabilities are evaluated from a Fourier model
//! p_ξ(x) = Re Σ_ω C_ξω e^{−ixω} built once in the generator eigenbasis, so
//! likelihood scans never re-exponentiate the generator.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::dynamics::{outcome_probabilities, product_pm_readout, state_derivative, evolve, Generator, GeneratorKind, ReadoutBasis};
use crate::error::{Error, Result};
use crate::operator::{hermitian_eigen, C64};
use crate::seed::derive_seed;
use crate::sld::{classical_fisher, cramer_rao_bound, quantum_fisher};
use crate::state::{cat_state, optimal_single_qubit, tensor_power, DensityMatrix, Sign};

/// Probabilities are clipped here before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
pub const GRID_POINTS: usize = 1024;
pub const GOLDEN_TOL: f64 = 1e-8;
/// Half-width of the finite difference used for the slope d⟨X_est⟩/dX.
pub const SLOPE_STEP: f64 = 0.01;
/// Frequencies closer than this are merged.
const FREQ_TOL: f64 = 1e-9;
/// Models with Fisher information at or below this at the interval centre are not identifiable.
pub const DEGENERATE_FISHER: f64 = 1e-10;

/// Observed readout counts in basis order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
}

impl ShotCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn get(&self, label: &str) -> Option<u64> {
        self.labels.iter().position(|l| l == label).map(|k| self.counts[k])
    }
}

/// Multinomial draw as a chain of conditional binomials, each by inverse CDF
/// from one uniform, so the same stream gives nearby counts for nearby
/// probabilities (the slope estimate relies on that coupling).
fn draw_counts(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            let u: f64 = rng.random();
            Binomial::new(q, remaining).expect("probability in (0, 1)").inverse_cdf(u)
        };
        counts[k] = c;
        remaining -= c;
        mass -= p;
    }
    counts
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    Ok(())
}

pub fn sample_readout(state_at_x: &DensityMatrix, basis: &ReadoutBasis, shots: u64, seed: u64) -> Result<ShotCounts> {
    check_shots(shots)?;
    let probs = outcome_probabilities(basis, state_at_x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ShotCounts { labels: basis.labels().iter().map(|s| s.to_string()).collect(), counts: draw_counts(&probs, shots, &mut rng) })
}

/// Initial state, generator and readout, with p_ξ(x) in Fourier form.
#[derive(Debug, Clone)]
pub struct Model {
    generator: Generator,
    initial: DensityMatrix,
    basis: ReadoutBasis,
    frequencies: Vec<f64>,
    /// `[outcome][frequency]`
    coefficients: Vec<Vec<C64>>,
}

impl Model {
    pub fn new(generator: Generator, initial: DensityMatrix, basis: ReadoutBasis) -> Result<Self> {
        let d = initial.dim();
        for found in [generator.op().dim(), basis.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        let eig = hermitian_eigen(generator.op())?;
        let v = &eig.vectors;
        // ρ in the generator eigenbasis and readout vectors' components there
        let rho_h = &(&v.adjoint() * initial.op()) * v;
        let overlaps: Vec<Vec<C64>> = basis.outcomes().iter().map(|o| v.adjoint().apply(&o.vector)).collect();
        let mut frequencies: Vec<f64> = Vec::new();
        let mut index = vec![0usize; d * d];
        for j in 0..d {
            for k in 0..d {
                let w = eig.values[j] - eig.values[k];
                let slot = match frequencies.iter().position(|f| (f - w).abs() < FREQ_TOL) {
                    Some(s) => s,
                    None => {
                        frequencies.push(w);
                        frequencies.len() - 1
                    }
                };
                index[j * d + k] = slot;
            }
        }
        let mut coefficients = vec![vec![C64::new(0.0, 0.0); frequencies.len()]; d];
        for (ov, out) in overlaps.iter().zip(coefficients.iter_mut()) {
            // ⟨e|j⟩ ρ_jk ⟨k|e⟩ with ⟨e|j⟩ = conj(ov_j)
            for j in 0..d {
                for k in 0..d {
                    out[index[j * d + k]] += ov[j].conj() * rho_h[(j, k)] * ov[k];
                }
            }
        }
        Ok(Self { generator, initial, basis, frequencies, coefficients })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.initial
    }

    pub fn basis(&self) -> &ReadoutBasis {
        &self.basis
    }

    fn phases(&self, x: f64) -> Vec<C64> {
        self.frequencies.iter().map(|w| C64::from_polar(1.0, -x * w)).collect()
    }

    /// p_ξ(x) in basis order.
    pub fn probabilities(&self, x: f64) -> Vec<f64> {
        let ph = self.phases(x);
        self.coefficients
            .iter()
            .map(|c| c.iter().zip(&ph).map(|(a, b)| a * b).sum::<C64>().re.clamp(0.0, 1.0))
            .collect()
    }

    /// dp_ξ/dx in basis order.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let ph = self.phases(x);
        self.coefficients
            .iter()
            .map(|c| {
                c.iter()
                    .zip(&ph)
                    .zip(&self.frequencies)
                    .map(|((a, b), w)| a * b * C64::new(0.0, -w))
                    .sum::<C64>()
                    .re
            })
            .collect()
    }

    /// Classical Fisher information of the readout at x.
    pub fn fisher(&self, x: f64) -> f64 {
        self.probabilities(x)
            .iter()
            .zip(self.derivatives(x))
            .filter(|(p, _)| **p > 1e-12)
            .map(|(p, dp)| dp * dp / p)
            .sum()
    }

    /// The evolved state, computed densely.
    pub fn state_at(&self, x: f64) -> Result<DensityMatrix> {
        evolve(&self.initial, &self.generator, x)
    }
}

pub fn log_likelihood(counts: &ShotCounts, model: &Model, x: f64) -> Result<f64> {
    if counts.counts.len() != model.basis.dim() {
        return Err(Error::DimensionMismatch { expected: model.basis.dim(), found: counts.counts.len() });
    }
    Ok(counts
        .counts
        .iter()
        .zip(model.probabilities(x))
        .filter(|(n, _)| **n > 0)
        .map(|(&n, p)| n as f64 * p.max(LOG_FLOOR).ln())
        .sum())
}

/// ln p on a fixed grid, shared by every estimate over the same interval.
#[derive(Debug, Clone)]
pub struct LikelihoodGrid {
    xs: Vec<f64>,
    /// `[grid point][outcome]`
    log_p: Vec<Vec<f64>>,
    interval: (f64, f64),
}

impl LikelihoodGrid {
    /// Fails with a degenerate-model error when the probabilities do not vary over
    /// the interval or the Fisher information vanishes at its centre.
    pub fn new(model: &Model, interval: (f64, f64)) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidArgument(format!("invalid search interval ({lo}, {hi})")));
        }
        let xs: Vec<f64> = (0..GRID_POINTS).map(|k| lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64).collect();
        let probs: Vec<Vec<f64>> = xs.iter().map(|&x| model.probabilities(x)).collect();
        let d = model.basis.dim();
        let spread = (0..d)
            .map(|k| {
                let (mn, mx) = probs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[k]), b.max(p[k])));
                mx - mn
            })
            .fold(0.0, f64::max);
        if spread <= 1e-12 {
            return Err(Error::DegenerateModel("outcome probabilities do not depend on the parameter".into()));
        }
        let centre = 0.5 * (lo + hi);
        let f = model.fisher(centre);
        if f <= DEGENERATE_FISHER {
            return Err(Error::DegenerateModel(format!(
                "classical Fisher information {f:.3e} at x = {centre} leaves the parameter unidentifiable"
            )));
        }
        let log_p = probs.into_iter().map(|p| p.into_iter().map(|v| v.max(LOG_FLOOR).ln()).collect()).collect();
        Ok(Self { xs, log_p, interval })
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Grid scan followed by golden-section refinement around the best grid point.
    pub fn estimate(&self, counts: &ShotCounts, model: &Model) -> Result<f64> {
        if counts.counts.len() != model.basis.dim() {
            return Err(Error::DimensionMismatch { expected: model.basis.dim(), found: counts.counts.len() });
        }
        let nz: Vec<(usize, f64)> = counts.counts.iter().enumerate().filter(|(_, &n)| n > 0).map(|(k, &n)| (k, n as f64)).collect();
        let mut best = (0, f64::NEG_INFINITY);
        for (g, lp) in self.log_p.iter().enumerate() {
            let v: f64 = nz.iter().map(|&(k, n)| n * lp[k]).sum();
            if v > best.1 {
                best = (g, v);
            }
        }
        let g = best.0;
        let a = self.xs[g.saturating_sub(1)];
        let b = self.xs[(g + 1).min(self.xs.len() - 1)];
        let f = |x: f64| -> f64 {
            let p = model.probabilities(x);
            nz.iter().map(|&(k, n)| n * p[k].max(LOG_FLOOR).ln()).sum()
        };
        Ok(golden_max(f, a, b, GOLDEN_TOL))
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Maximum-likelihood estimate of x over `interval`.
pub fn mle_estimate(counts: &ShotCounts, model: &Model, interval: (f64, f64)) -> Result<f64> {
    LikelihoodGrid::new(model, interval)?.estimate(counts, model)
}

/// Default search interval: one half-period either side of the true value.
pub fn default_interval(x_true: f64) -> (f64, f64) {
    (x_true - FRAC_PI_2, x_true + FRAC_PI_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub x_true: f64,
    /// Mean estimate at x_true.
    pub x_hat: f64,
    /// RMS of x̂/|slope| − x_true over trials.
    pub delta_x: f64,
    pub slope: f64,
    pub shots: u64,
    pub trials: usize,
    pub fisher: f64,
    /// 1/√(ν F), absent when F = 0.
    pub bound: Option<f64>,
}

/// Empirical units-corrected uncertainty.
///
/// Each trial draws three readouts — at x_true and x_true ± h — from one
/// derived stream, so the finite-difference slope uses common random numbers.
/// All draws share one likelihood grid centred on x_true.
pub fn uncertainty_run(model: &Model, x_true: f64, shots: u64, trials: usize, seed: u64) -> Result<EstimationResult> {
    check_shots(shots)?;
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let grid = LikelihoodGrid::new(model, default_interval(x_true))?;
    let points = [x_true, x_true - SLOPE_STEP, x_true + SLOPE_STEP];
    let probs: Vec<Vec<f64>> = points.iter().map(|&x| model.probabilities(x)).collect();
    let labels: Vec<String> = model.basis.labels().iter().map(|s| s.to_string()).collect();
    let estimates: Vec<[f64; 3]> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut out = [0.0; 3];
            for (k, p) in probs.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64]));
                let counts = ShotCounts { labels: labels.clone(), counts: draw_counts(p, shots, &mut rng) };
                out[k] = grid.estimate(&counts, model)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = |k: usize| estimates.iter().map(|e| e[k]).sum::<f64>() / n;
    let slope = (mean(2) - mean(1)) / (2.0 * SLOPE_STEP);
    if slope.abs() < 1e-12 || !slope.is_finite() {
        return Err(Error::DegenerateModel(format!("estimator slope {slope:.3e} is zero")));
    }
    let ms = estimates.iter().map(|e| (e[0] / slope.abs() - x_true).powi(2)).sum::<f64>() / n;
    let fisher = model.fisher(x_true);
    Ok(EstimationResult {
        x_true,
        x_hat: mean(0),
        delta_x: ms.sqrt(),
        slope,
        shots,
        trials,
        fisher,
        bound: cramer_rao_bound(fisher, shots).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    /// ½(𝟙 + σ₂)^{⊗n}
    OptimalSingleTensor,
    /// (|0…0⟩ + |1…1⟩)/√2
    Cat,
}

impl StateFamily {
    pub fn build(self, n: usize) -> Result<DensityMatrix> {
        match self {
            StateFamily::OptimalSingleTensor => tensor_power(&optimal_single_qubit(Sign::Plus), n),
            StateFamily::Cat if n == 1 => Ok(optimal_single_qubit(Sign::Plus)),
            StateFamily::Cat => cat_state(n, Sign::Plus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    #[default]
    ProductPm,
}

impl BasisKind {
    pub fn build(self, n: usize) -> Result<ReadoutBasis> {
        match self {
            BasisKind::ProductPm => product_pm_readout(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub f_classical: f64,
    pub f_quantum: f64,
    /// 1/√(ν F_classical); absent when F_classical vanishes.
    pub bound: Option<f64>,
    pub delta_x_empirical: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub x_true: f64,
    pub shots: u64,
    pub trials: usize,
    pub rows: Vec<ScalingRow>,
}

/// Fisher information and empirical δX for each probe size, at x = `x_true`.
/// Rows whose readout carries no information are flagged and not simulated.
#[allow(clippy::too_many_arguments)]
pub fn scaling_experiment(
    n_list: &[usize],
    generator_kind: GeneratorKind,
    state_family: StateFamily,
    basis_kind: BasisKind,
    shots: u64,
    trials: usize,
    seed: u64,
    x_true: f64,
) -> Result<ScalingTable> {
    check_shots(shots)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let g = Generator::of_kind(generator_kind, n)?;
        let basis = basis_kind.build(n)?;
        let rho0 = state_family.build(n)?;
        let model = Model::new(g.clone(), rho0, basis.clone())?;
        let rho_x = model.state_at(x_true)?;
        let d = state_derivative(&g, &rho_x)?;
        let f_classical = classical_fisher(&basis, &rho_x, &d)?;
        let f_quantum = quantum_fisher(&rho_x, &d)?;
        let degenerate = f_classical <= DEGENERATE_FISHER;
        let (bound, delta_x_empirical) = if degenerate || trials == 0 {
            (cramer_rao_bound(f_classical, shots).ok(), None)
        } else {
            let r = uncertainty_run(&model, x_true, shots, trials, derive_seed(seed, &[n as u64]))?;
            (cramer_rao_bound(f_classical, shots).ok(), Some(r.delta_x))
        };
        rows.push(ScalingRow { n, f_classical, f_quantum, bound, delta_x_empirical, degenerate });
    }
    Ok(ScalingTable { x_true, shots, trials, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_model() -> Model {
        Model::new(Generator::nonentangling(1).unwrap(), optimal_single_qubit(Sign::Plus), product_pm_readout(1).unwrap()).unwrap()
    }

    #[test]
    fn fourier_model_matches_dense_evolution() {
        for (kind, n) in [(GeneratorKind::NonEntangling, 3), (GeneratorKind::Entangling, 3), (GeneratorKind::Entangling, 2)] {
            let g = Generator::of_kind(kind, n).unwrap();
            let rho = crate::state::random_mixed_state(n, 11).unwrap();
            let b = ReadoutBasis::random(n, 4).unwrap();
            let m = Model::new(g.clone(), rho.clone(), b.clone()).unwrap();
            for x in [-1.3, 0.0, 0.4, 2.9] {
                let dense = outcome_probabilities(&b, &evolve(&rho, &g, x).unwrap()).unwrap();
                for (a, c) in m.probabilities(x).iter().zip(&dense) {
                    assert!((a - c).abs() < 1e-12);
                }
                let h = 1e-5;
                let (pp, pm) = (m.probabilities(x + h), m.probabilities(x - h));
                for (k, dp) in m.derivatives(x).iter().enumerate() {
                    assert!((dp - (pp[k] - pm[k]) / (2.0 * h)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn single_qubit_probability_law() {
        let m = single_model();
        for x in [-1.0, 0.0, 0.5, 2.0] {
            assert!((m.probabilities(x)[0] - 0.5 * (1.0 - x.sin())).abs() < 1e-12);
        }
        assert!((m.fisher(0.3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_examples() {
        let rho = optimal_single_qubit(Sign::Plus);
        let b = product_pm_readout(1).unwrap();
        let c = sample_readout(&rho, &b, 1_000_000, 1).unwrap();
        assert_eq!(c.total(), 1_000_000);
        assert!((c.get("+").unwrap() as f64 / 1e6 - 0.5).abs() < 0.002);
        assert_eq!(c, sample_readout(&rho, &b, 1_000_000, 1).unwrap());

        let plus = DensityMatrix::new(b.outcomes()[0].projector.clone()).unwrap();
        let c = sample_readout(&plus, &b, 100, 9).unwrap();
        assert_eq!(c.counts, vec![100, 0]);
        assert!(sample_readout(&plus, &b, 0, 9).is_err());
    }

    #[test]
    fn likelihood_examples() {
        let b = product_pm_readout(1).unwrap();
        let plus = DensityMatrix::new(b.outcomes()[0].projector.clone()).unwrap();
        // p(+|0) = 1 for the |+⟩ probe
        let m = Model::new(Generator::nonentangling(1).unwrap(), plus, b.clone()).unwrap();
        let c = ShotCounts { labels: vec!["+".into(), "-".into()], counts: vec![50, 0] };
        assert!(log_likelihood(&c, &m, 0.0).unwrap().abs() < 1e-12);

        let m2 = Model::new(
            Generator::nonentangling(2).unwrap(),
            tensor_power(&optimal_single_qubit(Sign::Plus), 2).unwrap(),
            product_pm_readout(2).unwrap(),
        )
        .unwrap();
        // at x = 0 every two-qubit outcome has probability ¼
        let c = ShotCounts { labels: vec!["++".into(), "+-".into(), "-+".into(), "--".into()], counts: vec![25; 4] };
        let expected = -100.0 * 2.0 * 2f64.ln();
        assert!((log_likelihood(&c, &m2, 0.0).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn plug_in_consistency() {
        let m = single_model();
        let p = m.probabilities(0.3);
        let counts = ShotCounts { labels: vec!["+".into(), "-".into()], counts: p.iter().map(|v| (v * 1e8).round() as u64).collect() };
        let x = mle_estimate(&counts, &m, default_interval(0.3)).unwrap();
        assert!((x - 0.3).abs() < 1e-4, "{x}");
    }

    #[test]
    fn degenerate_models() {
        // an eigenstate of the generator never changes
        let b = product_pm_readout(1).unwrap();
        let zero = DensityMatrix::from_ket(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let m = Model::new(Generator::nonentangling(1).unwrap(), zero, b).unwrap();
        let c = ShotCounts { labels: vec!["+".into(), "-".into()], counts: vec![5, 5] };
        assert!(matches!(mle_estimate(&c, &m, (-1.0, 1.0)), Err(Error::DegenerateModel(_))));

        let m = Model::new(Generator::nonentangling(2).unwrap(), cat_state(2, Sign::Plus).unwrap(), product_pm_readout(2).unwrap()).unwrap();
        let c = ShotCounts { labels: vec!["++".into(), "+-".into(), "-+".into(), "--".into()], counts: vec![5, 0, 0, 5] };
        assert!(matches!(mle_estimate(&c, &m, default_interval(0.0)), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn uncertainty_single_qubit() {
        let r = uncertainty_run(&single_model(), 0.0, 10_000, 200, 5).unwrap();
        assert!((r.delta_x - 0.01).abs() < 0.0015, "{r:?}");
        assert!((r.slope - 1.0).abs() < 0.1);
        let again = uncertainty_run(&single_model(), 0.0, 10_000, 200, 5).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn scaling_columns() {
        let t = scaling_experiment(&[1, 2, 3], GeneratorKind::NonEntangling, StateFamily::OptimalSingleTensor, BasisKind::ProductPm, 100, 0, 0, 0.0).unwrap();
        for (row, n) in t.rows.iter().zip([1.0, 2.0, 3.0]) {
            assert!((row.f_classical - n).abs() < 1e-9 && (row.f_quantum - n).abs() < 1e-9);
        }
        let t = scaling_experiment(&[2, 3], GeneratorKind::Entangling, StateFamily::OptimalSingleTensor, BasisKind::ProductPm, 100, 0, 0, 0.0).unwrap();
        assert!(t.rows[0].degenerate && t.rows[0].f_classical.abs() < 1e-12 && t.rows[0].bound.is_none());
        assert!((t.rows[1].f_classical - 1.0).abs() < 1e-9 && !t.rows[1].degenerate);
    }
}
