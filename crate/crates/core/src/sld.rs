//! Symmetric logarithmic derivative, Fisher information and saturation checks.
//!
//! The SLD L solves ½(Lρ + ρL) = ρ′. Two constructions are provided: the
//! eigenbasis formula L_jk = 2 O_jk / (p_j + p_k) in the eigenbasis of ρ, and
//! the readout-diagonal form Σ_ξ (1/λ_ξ) E(ξ) built from a fixed readout.

use serde::{Deserialize, Serialize};

use crate::dynamics::{clip_probability, expectation, ReadoutBasis};
use crate::error::{Error, Result};
use crate::operator::{anticommutator, hermitian_eigen, DenseOperator, C64, ZERO};
use crate::state::DensityMatrix;

/// Pairs with p_j + p_k at or below this are treated as kernel.
pub const SLD_KERNEL_TOL: f64 = 1e-10;
/// Allowed ‖½{L,ρ} − ρ′‖_F for an accepted SLD.
pub const SLD_RESIDUAL_TOL: f64 = 1e-8;
/// Both saturation residuals must be at or below this.
pub const SATURATION_TOL: f64 = 1e-8;
/// Outcomes with probability at or below this are zero-probability outcomes.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Largest numerator tolerated on a zero-probability outcome.
pub const ZERO_NUMERATOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SldRoute {
    EigenbasisFormula,
    ReadoutDiagonal,
}

#[derive(Debug, Clone)]
pub struct Sld {
    pub op: DenseOperator,
    pub route: SldRoute,
    /// Number of (j, k) pairs with p_j + p_k below the kernel threshold.
    pub kernel_dim: usize,
}

/// ‖½{L, ρ} − ρ′‖_F
pub fn defining_residual(l: &DenseOperator, rho: &DensityMatrix, rho_prime: &DenseOperator) -> Result<f64> {
    let lhs = anticommutator(l, rho.op())?.scale_real(0.5);
    if lhs.dim() != rho_prime.dim() {
        return Err(Error::DimensionMismatch { expected: lhs.dim(), found: rho_prime.dim() });
    }
    Ok((&lhs - rho_prime).frobenius_norm())
}

/// Minimal-norm SLD from the eigenbasis of ρ; kernel entries are zero.
pub fn sld_from_state(rho: &DensityMatrix, rho_prime: &DenseOperator, tol: f64) -> Result<Sld> {
    if rho_prime.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: rho_prime.dim() });
    }
    rho_prime.ensure_hermitian(crate::operator::HERMITIAN_TOL)?;
    let eig = hermitian_eigen(rho.op())?;
    let v = &eig.vectors;
    let o = &(&v.adjoint() * rho_prime) * v;
    let n = rho.dim();
    let mut kernel_dim = 0;
    let mut l_eig = DenseOperator::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let denom = eig.values[j] + eig.values[k];
            if denom > tol {
                l_eig[(j, k)] = o[(j, k)] * (2.0 / denom);
            } else {
                kernel_dim += 1;
            }
        }
    }
    let op = (&(v * &l_eig) * &v.adjoint()).hermitian_part();
    let residual = defining_residual(&op, rho, rho_prime)?;
    if residual > SLD_RESIDUAL_TOL {
        return Err(Error::InconsistentDerivative { residual });
    }
    Ok(Sld { op, route: SldRoute::EigenbasisFormula, kernel_dim })
}

/// Σ_ξ (1/λ_ξ) E(ξ)
pub fn sld_from_readout(basis: &ReadoutBasis, inv_lambdas: &[f64]) -> Result<Sld> {
    Ok(Sld { op: basis.diagonal_operator(inv_lambdas)?, route: SldRoute::ReadoutDiagonal, kernel_dim: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaStatus {
    Constrained,
    /// Zero-probability outcome with zero numerator; any value is admissible, 0 is reported.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEntry {
    pub label: String,
    /// 1/λ_ξ = tr(E L ρ) / tr(E ρ), possibly complex.
    pub value: C64,
    pub probability: f64,
    pub status: LambdaStatus,
}

/// Per-outcome inverse eigenvalues 1/λ_ξ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LambdaSpectrum {
    pub entries: Vec<LambdaEntry>,
}

impl LambdaSpectrum {
    /// Real-valued spectrum, all entries constrained.
    pub fn from_real(labels: &[&str], values: &[f64], probabilities: &[f64]) -> Self {
        Self::from_real_with_status(labels, values, probabilities, &vec![false; values.len()])
    }

    pub fn from_real_with_status(
        labels: &[&str],
        values: &[f64],
        probabilities: &[f64],
        unconstrained: &[bool],
    ) -> Self {
        let entries = labels
            .iter()
            .zip(values)
            .zip(probabilities)
            .zip(unconstrained)
            .map(|(((label, &v), &p), &free)| LambdaEntry {
                label: label.to_string(),
                value: C64::new(v, 0.0),
                probability: p,
                status: if free { LambdaStatus::Unconstrained } else { LambdaStatus::Constrained },
            })
            .collect();
        Self { entries }
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value.re).collect()
    }

    pub fn get(&self, label: &str) -> Option<C64> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.value)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.entries.iter().map(|e| e.value.im.abs()).fold(0.0, f64::max)
    }

    /// Over outcomes with nonzero probability.
    pub fn max_abs_real_supported(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.probability > ZERO_PROBABILITY)
            .map(|e| e.value.re.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_imag_supported(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.probability > ZERO_PROBABILITY)
            .map(|e| e.value.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_abs_imag() <= tol
    }

    pub fn unconstrained(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.status == LambdaStatus::Unconstrained).collect()
    }
}

/// 1/λ_ξ = tr(E(ξ) L ρ) / tr(E(ξ) ρ) for each readout outcome.
pub fn lambda_spectrum(
    basis: &ReadoutBasis,
    rho: &DensityMatrix,
    rho_prime: &DenseOperator,
    l_op: &DenseOperator,
) -> Result<LambdaSpectrum> {
    let d = basis.dim();
    for found in [rho.dim(), rho_prime.dim(), l_op.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let l_rho = l_op * rho.op();
    let mut entries = Vec::with_capacity(d);
    for o in basis.outcomes() {
        let p = expectation(&o.vector, rho.op()).re;
        let num = expectation(&o.vector, &l_rho);
        let (value, status) = if p <= ZERO_PROBABILITY {
            if num.norm() > ZERO_NUMERATOR {
                return Err(Error::UndefinedLambda { label: o.label.clone(), magnitude: num.norm() });
            }
            (ZERO, LambdaStatus::Unconstrained)
        } else {
            (num / p, LambdaStatus::Constrained)
        };
        entries.push(LambdaEntry { label: o.label.clone(), value, probability: clip_probability(p), status });
    }
    Ok(LambdaSpectrum { entries })
}

#[derive(Debug, Clone)]
pub struct SaturationReport {
    /// max_ξ |Im tr(ρ E(ξ) L)|
    pub im_condition_max: f64,
    /// ‖(L − Σ_ξ Re(1/λ_ξ) E(ξ)) ρ‖_F, i.e. the E(ξ)(L − 1/λ_ξ)ρ = 0 conditions.
    pub diagonal_residual: f64,
    pub saturated: bool,
    pub spectrum: LambdaSpectrum,
    pub sld: Sld,
}

pub fn check_saturation(
    basis: &ReadoutBasis,
    rho: &DensityMatrix,
    rho_prime: &DenseOperator,
) -> Result<SaturationReport> {
    let sld = sld_from_state(rho, rho_prime, SLD_KERNEL_TOL)?;
    let spectrum = lambda_spectrum(basis, rho, rho_prime, &sld.op)?;
    let im_condition_max = spectrum.max_abs_imag();
    let diag = basis.diagonal_operator(&spectrum.real_values())?;
    let diagonal_residual = (&(&sld.op - &diag) * rho.op()).frobenius_norm();
    let saturated = im_condition_max <= SATURATION_TOL && diagonal_residual <= SATURATION_TOL;
    Ok(SaturationReport { im_condition_max, diagonal_residual, saturated, spectrum, sld })
}

/// F = Σ_ξ tr(E ρ′)² / tr(E ρ).
pub fn classical_fisher(basis: &ReadoutBasis, rho: &DensityMatrix, rho_prime: &DenseOperator) -> Result<f64> {
    let d = basis.dim();
    for found in [rho.dim(), rho_prime.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let mut f = 0.0;
    for o in basis.outcomes() {
        let p = expectation(&o.vector, rho.op()).re;
        let dp = expectation(&o.vector, rho_prime).re;
        if p <= ZERO_PROBABILITY {
            if dp.abs() > ZERO_NUMERATOR {
                return Err(Error::SingularOutcome { label: o.label.clone(), derivative: dp });
            }
            continue;
        }
        f += dp * dp / p;
    }
    Ok(f)
}

/// 𝓕 = tr(L² ρ) with the minimal-norm SLD.
pub fn quantum_fisher(rho: &DensityMatrix, rho_prime: &DenseOperator) -> Result<f64> {
    let sld = sld_from_state(rho, rho_prime, SLD_KERNEL_TOL)?;
    Ok(second_moment(&sld.op, rho))
}

/// tr(L² ρ)
pub fn second_moment(l: &DenseOperator, rho: &DensityMatrix) -> f64 {
    (l * l).trace_product(rho.op()).re
}

/// δX ≥ 1/√(ν 𝓕) over ν repetitions.
pub fn cramer_rao_bound(fisher: f64, repetitions: u64) -> Result<f64> {
    if fisher.is_nan() || fisher <= 0.0 {
        return Err(Error::Unbounded(fisher));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    Ok(1.0 / (fisher * repetitions as f64).sqrt())
}
