//! Multi-start penalized simplex search for optimal probe states.
//!
//! The outer search runs over state parameters; for each candidate state the
//! 1/λ values come from the exact least-squares fit, and the objective is
//! −⟨L²⟩ + μ·residual². After each local run that ends infeasible, μ is raised
//! and the simplex restarted from the current point.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Generator, ReadoutBasis};
use crate::error::{Error, Result};
use crate::operator::{check_qubits, commutator, DenseOperator, C64, I};
use crate::seed::derive_seed;
use crate::solver::{fit_readout_frame, solve_lambdas_given_state, Provenance, Solution};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub starts: usize,
    pub penalty: f64,
    /// Factor applied to the penalty on each continuation round.
    pub penalty_growth: f64,
    pub continuation_rounds: usize,
    pub max_evaluations: usize,
    pub simplex_tolerance: f64,
    pub initial_step: f64,
    pub feasibility_tolerance: f64,
    /// Solutions within this of the best ⟨L²⟩ are reported.
    pub tie_tolerance: f64,
    pub seed: u64,
    /// Search over mixed states ρ = AA†/tr(AA†) instead of pure states.
    pub mixed: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            penalty: 1e4,
            penalty_growth: 100.0,
            continuation_rounds: 4,
            max_evaluations: 5000,
            simplex_tolerance: 1e-9,
            initial_step: 0.3,
            feasibility_tolerance: 1e-7,
            tie_tolerance: 1e-6,
            seed: 0,
            mixed: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    /// Distinct feasible solutions within the tie tolerance of the best, in canonical order.
    pub solutions: Vec<Solution>,
    pub feasible_starts: usize,
    pub starts: usize,
    pub evaluations: usize,
}

impl SearchReport {
    pub fn best(&self) -> &Solution {
        &self.solutions[0]
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead with standard coefficients; stops when the simplex diameter
/// falls below `tol` or after `max_evals` evaluations.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal);
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect() };
    loop {
        simplex.sort_by(by_value);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < tol || evals >= max_evals {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst.0, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = point(&centroid, &xr, 0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = point(&centroid, &worst.0, 0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = point(&best, &s.0, 0.5);
                    s.1 = eval(&s.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(by_value);
    let (x, value) = simplex.swap_remove(0);
    SimplexResult { x, value, evaluations: evals }
}

/// Number of real parameters of the state family.
fn parameter_count(dim: usize, mixed: bool) -> usize {
    if mixed {
        2 * dim * dim
    } else {
        2 * dim - 2
    }
}

/// Pure state from d−1 hyperspherical angles and d−1 relative phases.
fn pure_ket(params: &[f64], dim: usize) -> Vec<C64> {
    let (angles, phases) = params.split_at(dim - 1);
    let mut amp = vec![0.0; dim];
    let mut remaining = 1.0;
    for k in 0..dim - 1 {
        amp[k] = remaining * angles[k].cos();
        remaining *= angles[k].sin();
    }
    amp[dim - 1] = remaining;
    let mut ket = Vec::with_capacity(dim);
    ket.push(C64::new(amp[0], 0.0));
    for k in 1..dim {
        ket.push(C64::from_polar(amp[k], phases[k - 1]));
    }
    ket
}

fn state_operator(params: &[f64], dim: usize, mixed: bool) -> DenseOperator {
    if mixed {
        let a = DenseOperator::from_fn(dim, |r, c| C64::new(params[2 * (r * dim + c)], params[2 * (r * dim + c) + 1]));
        let aa = &a * &a.adjoint();
        let t = aa.trace().re;
        if t <= 0.0 {
            return DenseOperator::identity(dim).scale_real(1.0 / dim as f64);
        }
        aa.scale_real(1.0 / t).hermitian_part()
    } else {
        let ket = pure_ket(params, dim);
        DenseOperator::outer(&ket, &ket)
    }
}

/// Precomputed readout-frame generator for fast objective evaluation.
struct Problem {
    dim: usize,
    mixed: bool,
    basis_u: DenseOperator,
    h_hat: DenseOperator,
}

impl Problem {
    /// (⟨L²⟩, residual) for the fitted λ; readout-frame quantities only.
    fn evaluate(&self, params: &[f64]) -> (f64, f64) {
        let rho = state_operator(params, self.dim, self.mixed);
        let rho_hat = &(&self.basis_u.adjoint() * &rho) * &self.basis_u;
        let b_hat = match commutator(&self.h_hat, &rho_hat) {
            Ok(c) => c.scale(-I),
            Err(_) => return (0.0, f64::INFINITY),
        };
        match fit_readout_frame(&rho_hat, &b_hat) {
            Ok(fit) => {
                let q = fit.inv_lambdas.iter().enumerate().map(|(k, l)| l * l * rho_hat[(k, k)].re).sum();
                (q, fit.residual)
            }
            Err(_) => (0.0, f64::INFINITY),
        }
    }
}

fn random_start(rng: &mut ChaCha8Rng, dim: usize, mixed: bool) -> Vec<f64> {
    if mixed {
        (0..2 * dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    } else {
        // start from a random pure state by sampling angles directly
        let mut p: Vec<f64> = (0..dim - 1).map(|_| rng.random_range(0.0..std::f64::consts::FRAC_PI_2)).collect();
        p.extend((0..dim - 1).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)));
        p
    }
}

struct StartResult {
    params: Vec<f64>,
    qfi: f64,
    residual: f64,
    evaluations: usize,
}

fn run_start(problem: &Problem, config: &SearchConfig, start: usize) -> StartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[start as u64]));
    let mut x = random_start(&mut rng, problem.dim, problem.mixed);
    let mut mu = config.penalty;
    let mut evaluations = 0;
    let mut step = config.initial_step;
    for _ in 0..=config.continuation_rounds {
        let objective = |p: &[f64]| {
            let (q, r) = problem.evaluate(p);
            -q + mu * r * r
        };
        let res = nelder_mead(objective, &x, step, config.simplex_tolerance, config.max_evaluations);
        evaluations += res.evaluations;
        x = res.x;
        if problem.evaluate(&x).1 <= config.feasibility_tolerance {
            break;
        }
        mu *= config.penalty_growth;
        step *= 0.1;
    }
    let (qfi, residual) = problem.evaluate(&x);
    StartResult { params: x, qfi, residual, evaluations }
}

/// Canonical key: Pauli coefficients rounded to six decimals.
fn canonical_key(rho: &DensityMatrix) -> Vec<i64> {
    match rho.pauli_expansion() {
        Ok(sum) => crate::operator::PauliString::all(rho.n_qubits())
            .map(|p| (sum.get(&p) * 1e6).round() as i64)
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Maximize ⟨L²⟩ over states satisfying the optimal-state equation for a fixed
/// readout. The best point found is returned; global optimality is not claimed.
pub fn search_optimal_state(
    generator: &Generator,
    basis: &ReadoutBasis,
    n_qubits: usize,
    config: &SearchConfig,
) -> Result<SearchReport> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    for found in [basis.dim(), generator.op().dim()] {
        if found != dim {
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
    }
    if config.starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let basis_u = basis.unitary();
    let h_hat = basis.to_readout_frame(generator.op())?;
    let problem = Problem { dim, mixed: config.mixed, basis_u, h_hat };
    debug_assert_eq!(parameter_count(dim, config.mixed), random_start(&mut ChaCha8Rng::seed_from_u64(0), dim, config.mixed).len());

    let runs: Vec<StartResult> = (0..config.starts).into_par_iter().map(|s| run_start(&problem, config, s)).collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let feasible: Vec<&StartResult> = runs.iter().filter(|r| r.residual <= config.feasibility_tolerance).collect();
    if feasible.is_empty() {
        let best_residual = runs.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
        return Err(Error::Infeasible { best_residual });
    }
    let best_qfi = feasible.iter().map(|r| r.qfi).fold(f64::NEG_INFINITY, f64::max);
    let mut keyed: Vec<(Vec<i64>, Solution)> = Vec::new();
    for r in feasible.iter().filter(|r| r.qfi >= best_qfi - config.tie_tolerance) {
        let state = DensityMatrix::new(state_operator(&r.params, dim, config.mixed))?;
        let fit = solve_lambdas_given_state(&state, basis, generator)?;
        let sol = crate::solver::solution_from_fit(state, basis, generator, &fit, Provenance::NumericSearch)?;
        keyed.push((canonical_key(&sol.state), sol));
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    Ok(SearchReport {
        solutions: keyed.into_iter().map(|(_, s)| s).collect(),
        feasible_starts: feasible.len(),
        starts: config.starts,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::product_pm_readout;

    #[test]
    fn simplex_minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], 0.5, 1e-10, 20_000);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn parametrization_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 4, 8] {
            let p = random_start(&mut rng, dim, false);
            assert_eq!(p.len(), parameter_count(dim, false));
            let norm: f64 = pure_ket(&p, dim).iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_optimum() {
        let cfg = SearchConfig { starts: 16, ..Default::default() };
        let g = Generator::nonentangling(1).unwrap();
        let b = product_pm_readout(1).unwrap();
        let r = search_optimal_state(&g, &b, 1, &cfg).unwrap();
        assert!((r.best().qfi - 1.0).abs() < 1e-6, "{}", r.best().qfi);
        // the optimum is the whole equator of pure states; ½(𝟙 ± σ₂) lie on it
        for s in &r.solutions {
            let a = s.state.bloch_vector().unwrap();
            assert!(a[2].abs() < 1e-4 && (a[0].hypot(a[1]) - 1.0).abs() < 1e-6, "{a:?}");
            assert_eq!(s.provenance, Provenance::NumericSearch);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SearchConfig { starts: 8, seed: 3, ..Default::default() };
        let g = Generator::entangling(2).unwrap();
        let b = product_pm_readout(2).unwrap();
        let a = search_optimal_state(&g, &b, 2, &cfg).unwrap();
        let c = search_optimal_state(&g, &b, 2, &cfg).unwrap();
        assert_eq!(a.best().qfi.to_bits(), c.best().qfi.to_bits());
        assert_eq!(a.solutions.len(), c.solutions.len());
    }
}
