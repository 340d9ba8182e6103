//! The sixteen bilinear equations of the two-qubit optimal-state problem.
//!
//! With ρ = ¼ Σ r_αβ σ_α⊗σ_β (r₀₀ = 1, a_i = r_i0, b_j = r_0j, c_ij = r_ij) and
//! the ± product readout, Σ(1/λ_ξ)E(ξ) = ¼(K₊₊₊ 𝟙𝟙 + K₊₋₋ σ₁𝟙 + K₋₊₋ 𝟙σ₁ + K₋₋₊ σ₁σ₁),
//! where K_{±±±} = 1/λ₊₊ ± 1/λ₊₋ ± 1/λ₋₊ ± 1/λ₋₋. Each equation is 16× the
//! coefficient of one Pauli string in ½{L, ρ} − ρ′, written as left minus right.

use crate::dynamics::{product_pm_readout, Generator, GeneratorKind};
use crate::error::{Error, Result};
use crate::operator::{anticommutator, commutator, pauli_dense, DenseOperator, PauliString, I};
use crate::state::BlochCoefficients;

/// Index into the K vector `[K₊₊₊, K₊₋₋, K₋₊₋, K₋₋₊]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSlot {
    Ppp = 0,
    Pmm = 1,
    Mpm = 2,
    Mmp = 3,
}

/// `weight · K[slot] · r[i][j]`, or `weight · r[i][j]` without a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub k: Option<KSlot>,
    pub coeff: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    /// Pauli string whose coefficient this equation is.
    pub pauli: &'static str,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSystem {
    pub kind: GeneratorKind,
    pub equations: Vec<Equation>,
}

use KSlot::{Mmp, Mpm, Pmm, Ppp};

const fn k(w: f64, s: KSlot, i: usize, j: usize) -> Term {
    Term { weight: w, k: Some(s), coeff: (i, j) }
}

const fn c(w: f64, i: usize, j: usize) -> Term {
    Term { weight: w, k: None, coeff: (i, j) }
}

/// The four equations common to every Pauli string with a σ₀/σ₁ pattern.
fn head(pauli: &'static str, order: [KSlot; 4], extra: Vec<Term>) -> Equation {
    let mut terms = vec![k(1.0, order[0], 0, 0), k(1.0, order[1], 1, 0), k(1.0, order[2], 0, 1), k(1.0, order[3], 1, 1)];
    terms.extend(extra);
    Equation { pauli, terms }
}

fn eq(pauli: &'static str, terms: Vec<Term>) -> Equation {
    Equation { pauli, terms }
}

impl CoefficientSystem {
    pub fn new(kind: GeneratorKind) -> Result<Self> {
        let equations = match kind {
            GeneratorKind::NonEntangling => vec![
                head("II", [Ppp, Pmm, Mpm, Mmp], vec![]),
                head("IX", [Mpm, Mmp, Ppp, Pmm], vec![c(4.0, 0, 2)]),
                head("XI", [Pmm, Ppp, Mmp, Mpm], vec![c(4.0, 2, 0)]),
                head("XX", [Mmp, Mpm, Pmm, Ppp], vec![c(4.0, 1, 2), c(4.0, 2, 1)]),
                eq("IY", vec![k(1.0, Ppp, 0, 2), k(1.0, Pmm, 1, 2), c(-4.0, 0, 1)]),
                eq("XY", vec![k(1.0, Pmm, 0, 2), k(1.0, Ppp, 1, 2), c(-4.0, 1, 1), c(4.0, 2, 2)]),
                eq("YI", vec![k(1.0, Ppp, 2, 0), k(1.0, Mpm, 2, 1), c(-4.0, 1, 0)]),
                eq("YX", vec![k(1.0, Mpm, 2, 0), k(1.0, Ppp, 2, 1), c(-4.0, 1, 1), c(4.0, 2, 2)]),
                eq("ZI", vec![k(1.0, Ppp, 3, 0), k(1.0, Mpm, 3, 1)]),
                eq("ZX", vec![k(1.0, Mpm, 3, 0), k(1.0, Ppp, 3, 1), c(4.0, 3, 2)]),
                eq("IZ", vec![k(1.0, Ppp, 0, 3), k(1.0, Pmm, 1, 3)]),
                eq("XZ", vec![k(1.0, Pmm, 0, 3), k(1.0, Ppp, 1, 3), c(4.0, 2, 3)]),
                eq("YY", vec![k(1.0, Ppp, 2, 2), k(-1.0, Mmp, 3, 3), c(-4.0, 1, 2), c(-4.0, 2, 1)]),
                eq("YZ", vec![k(1.0, Ppp, 2, 3), k(1.0, Mmp, 3, 2), c(-4.0, 1, 3)]),
                eq("ZY", vec![k(1.0, Mmp, 2, 3), k(1.0, Ppp, 3, 2), c(-4.0, 3, 1)]),
                eq("ZZ", vec![k(1.0, Ppp, 3, 3), k(-1.0, Mmp, 2, 2)]),
            ],
            GeneratorKind::Entangling => vec![
                head("II", [Ppp, Pmm, Mpm, Mmp], vec![]),
                head("XX", [Mmp, Mpm, Pmm, Ppp], vec![]),
                head("XI", [Pmm, Ppp, Mmp, Mpm], vec![c(4.0, 2, 3)]),
                head("IX", [Mpm, Mmp, Ppp, Pmm], vec![c(4.0, 3, 2)]),
                eq("ZI", vec![k(1.0, Ppp, 3, 0), k(1.0, Mpm, 3, 1)]),
                eq("YY", vec![k(1.0, Ppp, 2, 2), k(-1.0, Mmp, 3, 3)]),
                eq("IY", vec![k(1.0, Ppp, 0, 2), k(1.0, Pmm, 1, 2), c(-4.0, 3, 1)]),
                eq("YI", vec![k(1.0, Ppp, 2, 0), k(1.0, Mpm, 2, 1), c(-4.0, 1, 3)]),
                eq("ZX", vec![k(1.0, Mpm, 3, 0), k(1.0, Ppp, 3, 1), c(4.0, 0, 2)]),
                eq("IZ", vec![k(1.0, Ppp, 0, 3), k(1.0, Pmm, 1, 3)]),
                eq("XZ", vec![k(1.0, Pmm, 0, 3), k(1.0, Ppp, 1, 3), c(4.0, 2, 0)]),
                eq("ZZ", vec![k(1.0, Ppp, 3, 3), k(-1.0, Mmp, 2, 2)]),
                eq("YX", vec![k(1.0, Ppp, 2, 1), k(1.0, Mpm, 2, 0)]),
                eq("XY", vec![k(1.0, Ppp, 1, 2), k(1.0, Pmm, 0, 2)]),
                eq("ZY", vec![k(1.0, Ppp, 3, 2), k(1.0, Mmp, 2, 3), c(-4.0, 0, 1)]),
                eq("YZ", vec![k(1.0, Ppp, 2, 3), k(1.0, Mmp, 3, 2), c(-4.0, 1, 0)]),
            ],
            GeneratorKind::Custom => {
                return Err(Error::Unsupported("coefficient systems exist only for the built-in generators".into()))
            }
        };
        Ok(Self { kind, equations })
    }
}

/// `[K₊₊₊, K₊₋₋, K₋₊₋, K₋₋₊]` from `[1/λ₊₊, 1/λ₊₋, 1/λ₋₊, 1/λ₋₋]`.
pub fn k_values(inv: [f64; 4]) -> [f64; 4] {
    let [pp, pm, mp, mm] = inv;
    [pp + pm + mp + mm, pp + pm - mp - mm, pp - pm + mp - mm, pp - pm - mp + mm]
}

/// Inverse of [`k_values`].
pub fn inv_lambdas_from_k(k: [f64; 4]) -> [f64; 4] {
    // the map is a symmetric Hadamard matrix, so its inverse is itself over 4
    k_values(k).map(|v| v / 4.0)
}

/// r_αβ with r₀₀ = 1.
pub fn coefficient_array(coeffs: &BlochCoefficients) -> Result<[[f64; 4]; 4]> {
    match *coeffs {
        BlochCoefficients::TwoQubit { a, b, c } => {
            let mut r = [[0.0; 4]; 4];
            r[0][0] = 1.0;
            for i in 0..3 {
                r[i + 1][0] = a[i];
                r[0][i + 1] = b[i];
                for j in 0..3 {
                    r[i + 1][j + 1] = c[i][j];
                }
            }
            Ok(r)
        }
        BlochCoefficients::OneQubit { .. } => Err(Error::DimensionMismatch { expected: 2, found: 1 }),
    }
}

/// Left-minus-right values of the sixteen equations.
pub fn evaluate_two_qubit_system(sys: &CoefficientSystem, coeffs: &BlochCoefficients, k: [f64; 4]) -> Result<[f64; 16]> {
    let r = coefficient_array(coeffs)?;
    let mut out = [0.0; 16];
    for (o, e) in out.iter_mut().zip(&sys.equations) {
        *o = e
            .terms
            .iter()
            .map(|t| t.weight * t.k.map_or(1.0, |s| k[s as usize]) * r[t.coeff.0][t.coeff.1])
            .sum();
    }
    Ok(out)
}

/// The same sixteen values computed densely: 16 × the Pauli coefficients of
/// ½{L, ρ} − ρ′, in the equation order of `sys`. ρ need not be positive.
pub fn dense_two_qubit_residuals(sys: &CoefficientSystem, coeffs: &BlochCoefficients, inv: [f64; 4]) -> Result<[f64; 16]> {
    let rho_op = coeffs.pauli_sum().dense()?;
    let basis = product_pm_readout(2)?;
    let l = basis.diagonal_operator(&inv)?;
    let g = Generator::of_kind(sys.kind, 2)?;
    let rho_prime = state_derivative_unchecked(&g, &rho_op)?;
    let m = &anticommutator(&l, &rho_op)?.scale_real(0.5) - &rho_prime;
    let mut out = [0.0; 16];
    for (o, e) in out.iter_mut().zip(&sys.equations) {
        let p: PauliString = e.pauli.parse()?;
        // coefficient = tr(P M)/4; equation = 16 × coefficient
        *o = 4.0 * pauli_dense(&p)?.trace_product(&m).re;
    }
    Ok(out)
}

/// −i[H, ρ] for an operator that need not be a valid state.
fn state_derivative_unchecked(g: &Generator, rho: &DenseOperator) -> Result<DenseOperator> {
    Ok(commutator(g.op(), rho)?.scale(-I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coeffs(a: [f64; 3], b: [f64; 3], c: [[f64; 3]; 3]) -> BlochCoefficients {
        BlochCoefficients::TwoQubit { a, b, c }
    }

    fn random_coeffs(rng: &mut ChaCha8Rng) -> BlochCoefficients {
        let mut v = || rng.random_range(-1.0..1.0);
        coeffs([v(), v(), v()], [v(), v(), v()], [[v(), v(), v()], [v(), v(), v()], [v(), v(), v()]])
    }

    #[test]
    fn matches_dense_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [GeneratorKind::NonEntangling, GeneratorKind::Entangling] {
            let sys = CoefficientSystem::new(kind).unwrap();
            for _ in 0..50 {
                let st = random_coeffs(&mut rng);
                let inv = [0; 4].map(|_: i32| rng.random_range(-3.0..3.0));
                let a = evaluate_two_qubit_system(&sys, &st, k_values(inv)).unwrap();
                let b = dense_two_qubit_residuals(&sys, &st, inv).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-9, "{kind}: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn product_state_solution() {
        let sys = CoefficientSystem::new(GeneratorKind::NonEntangling).unwrap();
        let st = coeffs([0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [[0.0; 3], [0.0, 1.0, 0.0], [0.0; 3]]);
        let r = evaluate_two_qubit_system(&sys, &st, [0.0, -4.0, -4.0, 0.0]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn entangling_family() {
        let sys = CoefficientSystem::new(GeneratorKind::Entangling).unwrap();
        let st = coeffs([0.0; 3], [0.0; 3], [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        for free in [0.0, 0.7, -2.0] {
            let r = evaluate_two_qubit_system(&sys, &st, k_values([-1.0, free, free, 1.0])).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-12), "c={free}: {r:?}");
        }
    }

    #[test]
    fn zero_everything() {
        let sys = CoefficientSystem::new(GeneratorKind::NonEntangling).unwrap();
        // the identity component of ρ is fixed to 1, so only the K terms on r₀₀ survive
        let st = coeffs([0.0; 3], [0.0; 3], [[0.0; 3]; 3]);
        let r = evaluate_two_qubit_system(&sys, &st, [0.0; 4]).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn k_round_trip() {
        let inv = [0.3, -1.2, 2.0, 0.25];
        let back = inv_lambdas_from_k(k_values(inv));
        for (a, b) in inv.iter().zip(back) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
