//! Optimal-state equation ½{Σ_ξ (1/λ_ξ) E(ξ), ρ} = −i[H, ρ] for a fixed readout.
//!
//! For a fixed state the equation is linear in the real unknowns 1/λ_ξ and is
//! solved exactly in the least-squares sense. Closed-form families and the
//! even/odd parity behaviour of the entangling generator live here as well;
//! the numeric search over states is in [`crate::search`].

use serde::{Deserialize, Serialize};

use crate::dynamics::{outcome_probabilities, product_pm_readout, state_derivative, Generator, GeneratorKind, ReadoutBasis};
use crate::error::{Error, Result};
use crate::operator::{anticommutator, hermitian_eigen, DenseOperator, C64, I};
use crate::sld::{check_saturation, LambdaSpectrum, ZERO_PROBABILITY};
use crate::state::{optimal_single_qubit, tensor_power, two_qubit_entangling_candidate, DensityMatrix, Sign};

/// Largest residual for which a state/λ pair counts as a solution.
pub const SOLUTION_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    NumericSearch,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub state: DensityMatrix,
    pub inv_lambdas: LambdaSpectrum,
    /// ‖½{L, ρ} − ρ′‖_F with L = Σ (1/λ_ξ) E(ξ).
    pub residual: f64,
    /// ⟨L²⟩ for the same L.
    pub qfi: f64,
    pub provenance: Provenance,
}

impl Solution {
    fn build(
        state: DensityMatrix,
        basis: &ReadoutBasis,
        generator: &Generator,
        values: &[f64],
        unconstrained: &[bool],
        provenance: Provenance,
    ) -> Result<Self> {
        let residual = sol1_residual(&state, values, basis, generator)?;
        let probs = outcome_probabilities(basis, &state)?;
        let qfi = values.iter().zip(&probs).map(|(l, p)| l * l * p).sum();
        let inv_lambdas = LambdaSpectrum::from_real_with_status(&basis.labels(), values, &probs, unconstrained);
        Ok(Self { state, inv_lambdas, residual, qfi, provenance })
    }

    pub fn is_feasible(&self) -> bool {
        self.residual <= SOLUTION_RESIDUAL_TOL
    }

    /// L = Σ (1/λ_ξ) E(ξ)
    pub fn sld(&self, basis: &ReadoutBasis) -> Result<DenseOperator> {
        basis.diagonal_operator(&self.inv_lambdas.real_values())
    }
}

/// Wraps a least-squares fit into a [`Solution`], recomputing residual and ⟨L²⟩.
pub fn solution_from_fit(
    state: DensityMatrix,
    basis: &ReadoutBasis,
    generator: &Generator,
    fit: &LambdaFit,
    provenance: Provenance,
) -> Result<Solution> {
    Solution::build(state, basis, generator, &fit.inv_lambdas, &fit.unconstrained, provenance)
}

fn check_dims(state: &DensityMatrix, basis: &ReadoutBasis, generator: &Generator) -> Result<()> {
    for found in [basis.dim(), generator.op().dim()] {
        if found != state.dim() {
            return Err(Error::DimensionMismatch { expected: state.dim(), found });
        }
    }
    Ok(())
}

/// ‖½{Σ(1/λ_ξ)E_ξ, ρ} + i[H, ρ]‖_F
pub fn sol1_residual(state: &DensityMatrix, inv_lambdas: &[f64], basis: &ReadoutBasis, generator: &Generator) -> Result<f64> {
    check_dims(state, basis, generator)?;
    if inv_lambdas.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: inv_lambdas.len() });
    }
    let l = basis.diagonal_operator(inv_lambdas)?;
    let lhs = anticommutator(&l, state.op())?.scale_real(0.5);
    let rho_prime = state_derivative(generator, state)?;
    Ok((&lhs - &rho_prime).frobenius_norm())
}

/// Least-squares 1/λ values for a fixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFit {
    pub inv_lambdas: Vec<f64>,
    /// Outcomes of zero probability; their value does not enter the equation and is set to 0.
    pub unconstrained: Vec<bool>,
    pub residual: f64,
}

/// Minimal-norm least-squares fit in the readout frame, where every E(ξ) is
/// the diagonal unit e_ξ e_ξᵀ.
///
/// With A_ξ = ½{E_ξ, ρ̂}, the normal equations are G l = h with
/// G_ξη = ½|ρ̂_ξη|² + ½δ_ξη (ρ̂²)_ξξ and h_ξ = Re(ρ̂ B̂)_ξξ.
pub(crate) fn fit_readout_frame(rho_hat: &DenseOperator, b_hat: &DenseOperator) -> Result<LambdaFit> {
    let d = rho_hat.dim();
    let unconstrained: Vec<bool> = (0..d).map(|k| rho_hat[(k, k)].re <= ZERO_PROBABILITY).collect();
    let active: Vec<usize> = (0..d).filter(|&k| !unconstrained[k]).collect();
    let mut inv_lambdas = vec![0.0; d];
    if !active.is_empty() {
        let m = active.len();
        let rho_sq_diag: Vec<f64> = (0..d)
            .map(|k| (0..d).map(|j| rho_hat[(k, j)].norm_sqr()).sum())
            .collect();
        let g = DenseOperator::from_fn(m, |a, b| {
            let (x, y) = (active[a], active[b]);
            let mut v = 0.5 * rho_hat[(x, y)].norm_sqr();
            if a == b {
                v += 0.5 * rho_sq_diag[x];
            }
            C64::new(v, 0.0)
        });
        let h: Vec<f64> = active
            .iter()
            .map(|&x| (0..d).map(|j| rho_hat[(x, j)] * b_hat[(j, x)]).sum::<C64>().re)
            .collect();
        let eig = hermitian_eigen(&g)?;
        let cutoff = 1e-12 * eig.values.first().copied().unwrap_or(0.0).abs();
        for k in 0..m {
            let w = eig.values[k];
            if w.abs() <= cutoff {
                continue;
            }
            let v = eig.vector(k);
            let proj: C64 = v.iter().zip(&h).map(|(vi, hi)| vi.conj() * hi).sum();
            for (a, &x) in active.iter().enumerate() {
                inv_lambdas[x] += (v[a] * proj).re / w;
            }
        }
    }
    let mut r2 = 0.0;
    for j in 0..d {
        for k in 0..d {
            let m = rho_hat[(j, k)] * (0.5 * (inv_lambdas[j] + inv_lambdas[k])) - b_hat[(j, k)];
            r2 += m.norm_sqr();
        }
    }
    Ok(LambdaFit { inv_lambdas, unconstrained, residual: r2.sqrt() })
}

/// Best 1/λ for a fixed state; the residual is that of the optimal-state equation.
pub fn solve_lambdas_given_state(state: &DensityMatrix, basis: &ReadoutBasis, generator: &Generator) -> Result<LambdaFit> {
    check_dims(state, basis, generator)?;
    let rho_hat = basis.to_readout_frame(state.op())?;
    let b_hat = basis.to_readout_frame(&state_derivative(generator, state)?)?;
    fit_readout_frame(&rho_hat, &b_hat)
}

fn minus_count(label: &str) -> usize {
    label.chars().filter(|&c| c == '-').count()
}

/// Closed-form optimal states under the product ± readout.
///
/// * non-entangling, any n: ρ̃^{⊗n} with 1/λ = (#− − #+), additive over qubits;
/// * entangling, odd n: ρ̃^{⊗n} with 1/λ = i^{n+3} ∏_l (1/λ_{j_l}) = ±1;
/// * entangling, n = 2: the pure c₁₁ = c₂₃ = c₃₂ = 1 state with 1/λ₊₊ = −1, 1/λ₋₋ = 1,
///   the zero-probability outcomes unconstrained (reported as 0);
/// * entangling, n = 2·odd: tensor powers of the two-qubit state, λ from the exact fit.
///
/// The residual is checked on construction.
pub fn closed_form_solution(kind: GeneratorKind, n: usize) -> Result<Solution> {
    let generator = Generator::of_kind(kind, n)?;
    let basis = product_pm_readout(n)?;
    let labels = basis.labels();
    let single = optimal_single_qubit(Sign::Plus);
    let (state, values, unconstrained) = match kind {
        GeneratorKind::NonEntangling => {
            let values: Vec<f64> = labels.iter().map(|s| 2.0 * minus_count(s) as f64 - n as f64).collect();
            (tensor_power(&single, n)?, values, vec![false; labels.len()])
        }
        GeneratorKind::Entangling if n % 2 == 1 => {
            let phase = I.powu(n as u32 + 3).re;
            let values: Vec<f64> = labels
                .iter()
                .map(|s| phase * if (n - minus_count(s)).is_multiple_of(2) { 1.0 } else { -1.0 })
                .collect();
            (tensor_power(&single, n)?, values, vec![false; labels.len()])
        }
        GeneratorKind::Entangling if n == 2 => {
            let state = two_qubit_entangling_candidate(1.0, 1.0, 1.0)?;
            (state, vec![-1.0, 0.0, 0.0, 1.0], vec![false, true, true, false])
        }
        GeneratorKind::Entangling if n % 4 == 2 => {
            let base = two_qubit_entangling_candidate(1.0, 1.0, 1.0)?;
            let state = tensor_power(&base, n / 2)?;
            let fit = solve_lambdas_given_state(&state, &basis, &generator)?;
            (state, fit.inv_lambdas, fit.unconstrained)
        }
        GeneratorKind::Entangling => {
            return Err(Error::Unsupported(format!(
                "no stored base solution for the entangling generator at n = {n}"
            )))
        }
        GeneratorKind::Custom => return Err(Error::Unsupported("closed forms exist only for the built-in generators".into())),
    };
    let sol = Solution::build(state, &basis, &generator, &values, &unconstrained, Provenance::ClosedForm)?;
    if !sol.is_feasible() {
        return Err(Error::Infeasible { best_residual: sol.residual });
    }
    Ok(sol)
}

/// Even/odd behaviour of ρ̃^{⊗n} under the entangling generator and ± readout.
#[derive(Debug, Clone)]
pub struct ParityReport {
    pub n_qubits: usize,
    /// max |Re(1/λ)| over outcomes with nonzero probability.
    pub max_abs_real: f64,
    /// max |Im(1/λ)| over outcomes with nonzero probability.
    pub max_abs_imag: f64,
    pub saturated: bool,
    /// max |1/λ − i^{n+3} ∏ 1/λ_{j_l}| (odd n only).
    pub product_rule_deviation: Option<f64>,
    /// tr(L² ρ) with the minimal SLD.
    pub second_moment: f64,
    pub spectrum: LambdaSpectrum,
}

impl ParityReport {
    /// Pure-imaginary, non-saturating spectrum (the even-n signature).
    pub fn is_obstructed(&self) -> bool {
        self.max_abs_real <= 1e-9 && self.max_abs_imag >= 0.1 && !self.saturated
    }
}

pub fn verify_parity_obstruction(n: usize) -> Result<ParityReport> {
    let g = Generator::entangling(n)?;
    let basis = product_pm_readout(n)?;
    let rho = tensor_power(&optimal_single_qubit(Sign::Plus), n)?;
    let d = state_derivative(&g, &rho)?;
    let sat = check_saturation(&basis, &rho, &d)?;
    let spectrum = sat.spectrum.clone();
    let product_rule_deviation = (n % 2 == 1).then(|| {
        let phase = I.powu(n as u32 + 3);
        spectrum
            .entries
            .iter()
            .map(|e| {
                // single-qubit 1/λ₊ = −1, 1/λ₋ = +1
                let prod: f64 = e.label.chars().map(|c| if c == '+' { -1.0 } else { 1.0 }).product();
                (e.value - phase * prod).norm()
            })
            .fold(0.0, f64::max)
    });
    Ok(ParityReport {
        n_qubits: n,
        max_abs_real: spectrum.max_abs_real_supported(),
        max_abs_imag: spectrum.max_abs_imag_supported(),
        saturated: sat.saturated,
        product_rule_deviation,
        second_moment: crate::sld::second_moment(&sat.sld.op, &rho),
        spectrum,
    })
}

/// Measured residual of the composite rule ρ = ρ_{2^k}^{⊗(2m+1)} for the entangling generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeCheck {
    pub k: u32,
    pub m: usize,
    pub n_qubits: usize,
    pub residual: f64,
    pub qfi: f64,
    pub passed: bool,
}

/// Only the stored base solutions k ∈ {0, 1} (one and two qubits) are available.
pub fn composite_rule_check(k: u32, m: usize) -> Result<CompositeCheck> {
    let base = match k {
        0 => optimal_single_qubit(Sign::Plus),
        1 => two_qubit_entangling_candidate(1.0, 1.0, 1.0)?,
        _ => return Err(Error::Unsupported(format!("no stored base solution on 2^{k} qubits"))),
    };
    let copies = 2 * m + 1;
    let n = (1usize << k) * copies;
    let state = tensor_power(&base, copies)?;
    let generator = Generator::entangling(n)?;
    let basis = product_pm_readout(n)?;
    let fit = solve_lambdas_given_state(&state, &basis, &generator)?;
    let sol = Solution::build(state, &basis, &generator, &fit.inv_lambdas, &fit.unconstrained, Provenance::ClosedForm)?;
    Ok(CompositeCheck { k, m, n_qubits: n, residual: sol.residual, qfi: sol.qfi, passed: sol.is_feasible() })
}
