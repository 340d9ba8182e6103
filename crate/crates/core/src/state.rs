//! Probe density matrices and the named states used throughout the crate.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    check_qubits, hermitian_eigen, pauli_expand, DenseOperator, PauliString, PauliSum, C64,
    HERMITIAN_TOL, ZERO,
};

/// Smallest eigenvalue tolerated before a state is rejected.
pub const PSD_TOL: f64 = -1e-9;
pub const TRACE_TOL: f64 = 1e-10;

/// Choice between the two branches of a symmetric family of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Sign::Plus)
        } else if v == -1.0 {
            Ok(Sign::Minus)
        } else {
            Err(Error::InvalidArgument(format!("sign must be ±1, got {v}")))
        }
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: DenseOperator,
    n_qubits: usize,
}

impl DensityMatrix {
    pub fn new(op: DenseOperator) -> Result<Self> {
        let n_qubits = op.n_qubits()?;
        check_qubits(n_qubits)?;
        op.ensure_hermitian(HERMITIAN_TOL)?;
        let trace = op.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let min_eigenvalue = *hermitian_eigen(&op)?.values.last().expect("nonempty spectrum");
        if min_eigenvalue < PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { op: op.hermitian_part(), n_qubits })
    }

    /// |ψ⟩⟨ψ| for a ket, normalized first.
    pub fn from_ket(ket: &[C64]) -> Result<Self> {
        let n_qubits = crate::operator::qubits_for_dim(ket.len())?;
        check_qubits(n_qubits)?;
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero ket".into()));
        }
        let v: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self { op: DenseOperator::outer(&v, &v).hermitian_part(), n_qubits })
    }

    pub fn op(&self) -> &DenseOperator {
        &self.op
    }

    pub fn into_op(self) -> DenseOperator {
        self.op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// tr ρ²
    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op).re
    }

    pub fn pauli_expansion(&self) -> Result<PauliSum> {
        pauli_expand(&self.op)
    }

    /// (a₁, a₂, a₃) with ρ = ½(𝟙 + a·σ); single-qubit states only.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.n_qubits != 1 {
            return Err(Error::InvalidArgument("Bloch vector needs a single qubit".into()));
        }
        let s = self.pauli_expansion()?;
        Ok([2.0 * s.coefficient("X"), 2.0 * s.coefficient("Y"), 2.0 * s.coefficient("Z")])
    }

    /// ρ ⊗ σ
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_qubits(self.n_qubits + other.n_qubits)?;
        Ok(Self { op: self.op.kron(&other.op), n_qubits: self.n_qubits + other.n_qubits })
    }
}

/// Pauli coefficients of a one- or two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlochCoefficients {
    /// ρ = ½(𝟙 + aᵢσᵢ)
    OneQubit { a: [f64; 3] },
    /// ρ = ¼(𝟙𝟙 + aᵢσᵢ𝟙 + bⱼ𝟙σⱼ + cᵢⱼσᵢσⱼ)
    TwoQubit { a: [f64; 3], b: [f64; 3], c: [[f64; 3]; 3] },
}

const AXES: [char; 3] = ['X', 'Y', 'Z'];

impl BlochCoefficients {
    pub fn n_qubits(&self) -> usize {
        match self {
            BlochCoefficients::OneQubit { .. } => 1,
            BlochCoefficients::TwoQubit { .. } => 2,
        }
    }

    /// The induced Pauli sum with the 1/2^N normalization applied.
    pub fn pauli_sum(&self) -> PauliSum {
        match *self {
            BlochCoefficients::OneQubit { a } => {
                let mut s = PauliSum::new(1);
                s.add_term(PauliString::identity(1), 0.5);
                for (k, &ax) in AXES.iter().enumerate() {
                    s.add_term(ax.to_string().parse().expect("axis"), 0.5 * a[k]);
                }
                s
            }
            BlochCoefficients::TwoQubit { a, b, c } => {
                let mut s = PauliSum::new(2);
                s.add_term(PauliString::identity(2), 0.25);
                for (i, &ai) in AXES.iter().enumerate() {
                    s.add_term(format!("{ai}I").parse().expect("axis"), 0.25 * a[i]);
                    s.add_term(format!("I{ai}").parse().expect("axis"), 0.25 * b[i]);
                    for (j, &aj) in AXES.iter().enumerate() {
                        s.add_term(format!("{ai}{aj}").parse().expect("axis"), 0.25 * c[i][j]);
                    }
                }
                s
            }
        }
    }

    /// Read coefficients back from a one- or two-qubit state.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let s = rho.pauli_expansion()?;
        match rho.n_qubits() {
            1 => Ok(BlochCoefficients::OneQubit { a: rho.bloch_vector()? }),
            2 => {
                let mut a = [0.0; 3];
                let mut b = [0.0; 3];
                let mut c = [[0.0; 3]; 3];
                for (i, &ai) in AXES.iter().enumerate() {
                    a[i] = 4.0 * s.coefficient(&format!("{ai}I"));
                    b[i] = 4.0 * s.coefficient(&format!("I{ai}"));
                    for (j, &aj) in AXES.iter().enumerate() {
                        c[i][j] = 4.0 * s.coefficient(&format!("{ai}{aj}"));
                    }
                }
                Ok(BlochCoefficients::TwoQubit { a, b, c })
            }
            n => Err(Error::Unsupported(format!("Bloch coefficients for {n} qubits"))),
        }
    }
}

pub fn from_bloch(coeffs: &BlochCoefficients) -> Result<DensityMatrix> {
    DensityMatrix::new(coeffs.pauli_sum().dense()?)
}

/// ½(𝟙 ± σ₂), the saturating single-qubit probe for σ₃/2 dynamics and ± readout.
pub fn optimal_single_qubit(sign: Sign) -> DensityMatrix {
    from_bloch(&BlochCoefficients::OneQubit { a: [0.0, sign.value(), 0.0] })
        .expect("pure single-qubit state is valid")
}

/// ρ^{⊗n}
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power must be at least 1".into()));
    }
    check_qubits(rho.n_qubits() * n)?;
    let mut acc = rho.clone();
    for _ in 1..n {
        acc = acc.tensor(rho)?;
    }
    Ok(acc)
}

/// (|0…0⟩ ± |1…1⟩)/√2 on n qubits.
pub fn cat_state(n: usize, sign: Sign) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("cat state needs at least 2 qubits".into()));
    }
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut ket = vec![ZERO; dim];
    ket[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    ket[dim - 1] = C64::new(sign.value() * FRAC_1_SQRT_2, 0.0);
    DensityMatrix::from_ket(&ket)
}

/// ¼(𝟙𝟙 + c₁₁σ₁σ₁ + c₂₃σ₂σ₃ + c₃₂σ₃σ₂)
pub fn two_qubit_entangling_candidate(c11: f64, c23: f64, c32: f64) -> Result<DensityMatrix> {
    let mut c = [[0.0; 3]; 3];
    c[0][0] = c11;
    c[1][2] = c23;
    c[2][1] = c32;
    from_bloch(&BlochCoefficients::TwoQubit { a: [0.0; 3], b: [0.0; 3], c })
}

/// Haar-random pure state from normalized complex Gaussian amplitudes.
pub fn random_pure_state(n_qubits: usize, seed: u64) -> Result<DensityMatrix> {
    check_qubits(n_qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DensityMatrix::from_ket(&random_ket(1 << n_qubits, &mut rng))
}

pub(crate) fn random_ket(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Random full-rank mixed state ρ = AA†/tr(AA†) with Gaussian A.
pub fn random_mixed_state(n_qubits: usize, seed: u64) -> Result<DensityMatrix> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = random_ket(dim * dim, &mut rng);
    let a = DenseOperator::from_row_major(entries)?;
    let aa = &a * &a.adjoint();
    let tr = aa.trace().re;
    DensityMatrix::new(aa.scale_real(1.0 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bloch_examples() {
        let r = from_bloch(&BlochCoefficients::OneQubit { a: [0.0, 1.0, 0.0] }).unwrap();
        let s = r.pauli_expansion().unwrap();
        assert!((s.coefficient("I") - 0.5).abs() < 1e-15);
        assert!((s.coefficient("Y") - 0.5).abs() < 1e-15);

        let mixed = from_bloch(&BlochCoefficients::OneQubit { a: [0.0; 3] }).unwrap();
        assert!((&mixed.op().scale_real(2.0) - &DenseOperator::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn overlong_bloch_vector_rejected() {
        let err = from_bloch(&BlochCoefficients::OneQubit { a: [0.0, 1.0, 0.5] }).unwrap_err();
        match err {
            Error::NotPositive { min_eigenvalue } => {
                let expected = 0.5 * (1.0 - (1.25f64).sqrt());
                assert!((min_eigenvalue - expected).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bloch_eigenvalues() {
        let a = [0.3, -0.2, 0.5];
        let r = from_bloch(&BlochCoefficients::OneQubit { a }).unwrap();
        let len = (a.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let eig = hermitian_eigen(r.op()).unwrap();
        assert!((eig.values[0] - 0.5 * (1.0 + len)).abs() < 1e-12);
        assert!((eig.values[1] - 0.5 * (1.0 - len)).abs() < 1e-12);
    }

    #[test]
    fn optimal_states_are_pure() {
        for sign in [Sign::Plus, Sign::Minus] {
            let r = optimal_single_qubit(sign);
            assert!((r.purity() - 1.0).abs() < 1e-12);
            let a = r.bloch_vector().unwrap();
            assert!((a[1] - sign.value()).abs() < 1e-12);
            assert!(a[0].abs() < 1e-12 && a[2].abs() < 1e-12);
        }
        // eigenvector of ½(𝟙+σ₂) with eigenvalue 1 is |i⟩
        let eig = hermitian_eigen(optimal_single_qubit(Sign::Plus).op()).unwrap();
        let v = eig.vector(0);
        let ratio = v[1] / v[0];
        assert!((ratio - crate::operator::I).norm() < 1e-12);
    }

    #[test]
    fn tensor_square_of_optimal() {
        let r = tensor_power(&optimal_single_qubit(Sign::Plus), 2).unwrap();
        let expected =
            PauliSum::from_terms(2, [("II", 0.25), ("YI", 0.25), ("IY", 0.25), ("YY", 0.25)])
                .unwrap();
        assert!(r.pauli_expansion().unwrap().max_difference(&expected) < 1e-14);
        let single = random_mixed_state(1, 5).unwrap();
        let same = tensor_power(&single, 1).unwrap();
        assert!((same.op() - single.op()).max_abs() < 1e-15);
    }

    #[test]
    fn tensor_power_purity_multiplies() {
        let r = random_mixed_state(1, 9).unwrap();
        let rr = tensor_power(&r, 2).unwrap();
        assert!((rr.purity() - r.purity().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn tensor_power_coefficients_factor() {
        let r = random_mixed_state(1, 21).unwrap();
        let single = r.pauli_expansion().unwrap();
        let pair = tensor_power(&r, 2).unwrap().pauli_expansion().unwrap();
        for (p, &c) in pair.terms() {
            let l = p.labels();
            let a = single.get(&PauliString::new(vec![l[0]]).unwrap());
            let b = single.get(&PauliString::new(vec![l[1]]).unwrap());
            assert!((c - a * b).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn tensor_power_cap() {
        let r = optimal_single_qubit(Sign::Plus);
        assert!(matches!(tensor_power(&r, 64), Err(Error::DimensionExceeded { .. })));
    }

    #[test]
    fn cat_state_entries_and_pauli_form() {
        let c = cat_state(2, Sign::Plus).unwrap();
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((c.op()[(r, col)].re - 0.5).abs() < 1e-15);
        }
        assert!((c.purity() - 1.0).abs() < 1e-12);
        // The ket definition gives +XX −YY +ZZ for the + branch.
        let s = c.pauli_expansion().unwrap();
        assert!((s.coefficient("XX") - 0.25).abs() < 1e-15);
        assert!((s.coefficient("YY") + 0.25).abs() < 1e-15);
        assert!((s.coefficient("ZZ") - 0.25).abs() < 1e-15);
        let m = cat_state(2, Sign::Minus).unwrap().pauli_expansion().unwrap();
        assert!((m.coefficient("XX") + 0.25).abs() < 1e-15);
        assert!((m.coefficient("YY") - 0.25).abs() < 1e-15);
    }

    #[test]
    fn entangling_candidate() {
        let pure = two_qubit_entangling_candidate(1.0, 1.0, 1.0).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let mixed = two_qubit_entangling_candidate(0.0, 0.0, 0.0).unwrap();
        assert!((mixed.purity() - 0.25).abs() < 1e-12);
        let flipped = two_qubit_entangling_candidate(1.0, -1.0, -1.0).unwrap();
        assert!((flipped.purity() - 1.0).abs() < 1e-12);
        assert!(matches!(
            two_qubit_entangling_candidate(1.0, 1.0, -1.0),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn random_pure_states() {
        let a = random_pure_state(3, 42).unwrap();
        let b = random_pure_state(3, 42).unwrap();
        assert_eq!(a.op(), b.op());
        assert!((a.op().trace().re - 1.0).abs() < 1e-12);
        assert!((a.purity() - 1.0).abs() < 1e-10);
        let mean_len: f64 = (0..1000)
            .map(|s| {
                let v = random_pure_state(1, s).unwrap().bloch_vector().unwrap();
                v.iter().map(|x| x * x).sum::<f64>().sqrt()
            })
            .sum::<f64>()
            / 1000.0;
        assert!((mean_len - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_trace() {
        let op = DenseOperator::identity(2);
        assert!(matches!(DensityMatrix::new(op), Err(Error::BadTrace { .. })));
    }
}
