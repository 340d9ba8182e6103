//! Parameter-dependent generators, state derivatives and projective readouts.
//!
//! Evolution is ρ(x) = U ρ U† with U = exp(−i x H). For H = σ₃/2 this rotates
//! the Bloch vector about +z by angle x, so ½(𝟙+σ₂) evolves to Bloch vector
//! (−sin x, cos x, 0) and p(+|x) = ½(1 − sin x) under the ± readout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    check_qubits, commutator, hermitian_eigen, pauli_dense, unitary_evolution, DenseOperator,
    Pauli, PauliString, C64, HERMITIAN_TOL, I,
};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    #[serde(rename = "nonentangling")]
    NonEntangling,
    Entangling,
    Custom,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::NonEntangling => "nonentangling",
            GeneratorKind::Entangling => "entangling",
            GeneratorKind::Custom => "custom",
        })
    }
}

/// Parameter-independent part H of the probe Hamiltonian X·H.
#[derive(Debug, Clone)]
pub struct Generator {
    kind: GeneratorKind,
    n_qubits: usize,
    op: DenseOperator,
}

impl Generator {
    /// ½ Σⱼ σ₃⁽ʲ⁾
    pub fn nonentangling(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut op = DenseOperator::zeros(1 << n);
        for site in 0..n {
            op = &op + &pauli_dense(&PauliString::single(n, site, Pauli::Z))?;
        }
        Ok(Self { kind: GeneratorKind::NonEntangling, n_qubits: n, op: op.scale_real(0.5) })
    }

    /// ½ σ₃^{⊗N}
    pub fn entangling(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let zs = PauliString::new(vec![Pauli::Z; n])?;
        Ok(Self {
            kind: GeneratorKind::Entangling,
            n_qubits: n,
            op: pauli_dense(&zs)?.scale_real(0.5),
        })
    }

    pub fn of_kind(kind: GeneratorKind, n: usize) -> Result<Self> {
        match kind {
            GeneratorKind::NonEntangling => Self::nonentangling(n),
            GeneratorKind::Entangling => Self::entangling(n),
            GeneratorKind::Custom => {
                Err(Error::InvalidArgument("custom generators need an operator".into()))
            }
        }
    }

    pub fn custom(op: DenseOperator) -> Result<Self> {
        let n_qubits = op.n_qubits()?;
        check_qubits(n_qubits)?;
        op.ensure_hermitian(HERMITIAN_TOL)?;
        Ok(Self { kind: GeneratorKind::Custom, n_qubits, op: op.hermitian_part() })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn op(&self) -> &DenseOperator {
        &self.op
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// ρ′ = −i[H, ρ]
pub fn state_derivative(g: &Generator, rho: &DensityMatrix) -> Result<DenseOperator> {
    check_dims(g.op.dim(), rho.dim())?;
    Ok(commutator(&g.op, rho.op())?.scale(-I).hermitian_part())
}

/// U ρ U† with U = exp(−i x H).
pub fn evolve(rho: &DensityMatrix, g: &Generator, x: f64) -> Result<DensityMatrix> {
    check_dims(g.op.dim(), rho.dim())?;
    let u = unitary_evolution(&g.op, x)?;
    let out = &(&u * rho.op()) * &u.adjoint();
    DensityMatrix::new(out.hermitian_part())
}

/// One readout outcome: label, basis vector and its projector.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: String,
    pub vector: Vec<C64>,
    pub projector: DenseOperator,
}

/// Complete orthonormal family of rank-1 projectors.
#[derive(Debug, Clone)]
pub struct ReadoutBasis {
    n_qubits: usize,
    outcomes: Vec<Outcome>,
}

const BASIS_TOL: f64 = 1e-10;

impl ReadoutBasis {
    /// Build from orthonormal vectors; checks completeness and orthogonality.
    pub fn from_vectors(labels: Vec<String>, vectors: Vec<Vec<C64>>) -> Result<Self> {
        let dim = vectors.len();
        let n_qubits = crate::operator::qubits_for_dim(dim)?;
        check_qubits(n_qubits)?;
        if labels.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: labels.len() });
        }
        for v in &vectors {
            check_dims(dim, v.len())?;
        }
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate().skip(i) {
                let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (ip - C64::new(target, 0.0)).norm() > BASIS_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "readout vectors {i} and {j} are not orthonormal (overlap {ip})"
                    )));
                }
            }
        }
        let outcomes = labels
            .into_iter()
            .zip(vectors)
            .map(|(label, vector)| {
                let projector = DenseOperator::outer(&vector, &vector);
                Outcome { label, vector, projector }
            })
            .collect();
        Ok(Self { n_qubits, outcomes })
    }

    /// Columns of a unitary as the readout vectors, labeled by index.
    pub fn from_unitary(u: &DenseOperator) -> Result<Self> {
        let labels = (0..u.dim()).map(|k| k.to_string()).collect();
        let vectors = (0..u.dim()).map(|k| u.column(k)).collect();
        Self::from_vectors(labels, vectors)
    }

    /// Eigenbasis of a random Hermitian matrix.
    pub fn random(n_qubits: usize, seed: u64) -> Result<Self> {
        use rand::SeedableRng;
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let entries = crate::state::random_ket(dim * dim, &mut rng);
        let h = DenseOperator::from_row_major(entries)?.hermitian_part();
        Self::from_unitary(&hermitian_eigen(&h)?.vectors)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|o| o.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o.label == label)
    }

    /// Unitary whose columns are the readout vectors.
    pub fn unitary(&self) -> DenseOperator {
        let d = self.dim();
        DenseOperator::from_fn(d, |r, c| self.outcomes[c].vector[r])
    }

    /// Σ_ξ c_ξ E(ξ)
    pub fn diagonal_operator(&self, coeffs: &[f64]) -> Result<DenseOperator> {
        check_dims(self.dim(), coeffs.len())?;
        let u = self.unitary();
        let d = self.dim();
        Ok(DenseOperator::from_fn(d, |r, c| {
            (0..d).map(|k| u[(r, k)] * coeffs[k] * u[(c, k)].conj()).sum()
        }))
    }

    /// Matrix of `a` in the readout basis, W† a W.
    pub fn to_readout_frame(&self, a: &DenseOperator) -> Result<DenseOperator> {
        check_dims(self.dim(), a.dim())?;
        let w = self.unitary();
        Ok(&(&w.adjoint() * a) * &w)
    }
}

/// Projective readout onto |±⟩ = (|0⟩ ± |1⟩)/√2 on every qubit; labels over
/// {+,−} in lexicographic order with + before −.
pub fn product_pm_readout(n: usize) -> Result<ReadoutBasis> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let amp = C64::new((dim as f64).sqrt().recip(), 0.0);
    let mut labels = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    for idx in 0..dim {
        // bit k of idx (from the left) set means "−" on qubit k
        let label: String =
            (0..n).map(|k| if (idx >> (n - 1 - k)) & 1 == 1 { '-' } else { '+' }).collect();
        // ⟨j|s₁…s_N⟩ = 2^{−N/2} Π_k s_k^{j_k}
        let vector = (0..dim)
            .map(|j| {
                let minus_hits = (idx & j).count_ones();
                if minus_hits % 2 == 1 {
                    -amp
                } else {
                    amp
                }
            })
            .collect();
        labels.push(label);
        vectors.push(vector);
    }
    ReadoutBasis::from_vectors(labels, vectors)
}

/// p(ξ|ρ) = tr(E(ξ)ρ), clipped into [0, 1], in basis order.
pub fn outcome_probabilities(basis: &ReadoutBasis, rho: &DensityMatrix) -> Result<Vec<f64>> {
    check_dims(basis.dim(), rho.dim())?;
    Ok(basis
        .outcomes()
        .iter()
        .map(|o| {
            let rv = rho.op().apply(&o.vector);
            let p: C64 = o.vector.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum();
            clip_probability(p.re)
        })
        .collect())
}

/// Probabilities at or below −1e-12 from roundoff are treated as zero.
pub fn clip_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// ⟨v|A|v⟩ for an outcome vector.
pub(crate) fn expectation(v: &[C64], a: &DenseOperator) -> C64 {
    let av = a.apply(v);
    v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli_expand, ZERO};
    use crate::state::{optimal_single_qubit, random_mixed_state, random_pure_state, Sign};

    fn pauli(s: &str) -> DenseOperator {
        pauli_dense(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn nonentangling_generators() {
        let g1 = Generator::nonentangling(1).unwrap();
        assert!((g1.op() - &pauli("Z").scale_real(0.5)).max_abs() < 1e-15);
        let g2 = Generator::nonentangling(2).unwrap();
        let expected = (&pauli("ZI") + &pauli("IZ")).scale_real(0.5);
        assert!((g2.op() - &expected).max_abs() < 1e-15);
        let eig = hermitian_eigen(g2.op()).unwrap();
        for (v, e) in eig.values.iter().zip([1.0, 0.0, 0.0, -1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        for n in 1..=5 {
            let g = Generator::nonentangling(n).unwrap();
            assert!(g.op().trace().norm() < 1e-14);
            let eig = hermitian_eigen(g.op()).unwrap();
            for k in 0..=n {
                let level = (n as f64 - 2.0 * k as f64) / 2.0;
                let mult = eig.values.iter().filter(|&&v| (v - level).abs() < 1e-12).count();
                let binom = (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
                assert_eq!(mult, binom, "n={n} level={level}");
            }
        }
    }

    #[test]
    fn entangling_generators() {
        let g1 = Generator::entangling(1).unwrap();
        assert!((g1.op() - Generator::nonentangling(1).unwrap().op()).max_abs() < 1e-15);
        let g2 = Generator::entangling(2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| g2.op()[(i, i)].re).collect();
        assert_eq!(diag, vec![0.5, -0.5, -0.5, 0.5]);
        for n in 1..=4 {
            let g = Generator::entangling(n).unwrap();
            let sq = g.op() * g.op();
            assert!((&sq - &DenseOperator::identity(1 << n).scale_real(0.25)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_of_optimal_state() {
        let g = Generator::nonentangling(1).unwrap();
        let d = state_derivative(&g, &optimal_single_qubit(Sign::Plus)).unwrap();
        assert!((&d - &pauli("X").scale_real(-0.5)).max_abs() < 1e-15);

        let mixed = DensityMatrix::new(DenseOperator::identity(4).scale_real(0.25)).unwrap();
        let g2 = Generator::entangling(2).unwrap();
        assert!(state_derivative(&g2, &mixed).unwrap().max_abs() < 1e-15);
        assert!(matches!(
            state_derivative(&g2, &optimal_single_qubit(Sign::Plus)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derivative_generic_bloch() {
        // −i[σ₃/2, ½(𝟙+a·σ)] = −½(a₂σ₁ − a₁σ₂)
        let a = [0.3, -0.4, 0.2];
        let rho = crate::state::from_bloch(&crate::state::BlochCoefficients::OneQubit { a })
            .unwrap();
        let d = state_derivative(&Generator::nonentangling(1).unwrap(), &rho).unwrap();
        let expected = (&pauli("X").scale_real(a[1]) - &pauli("Y").scale_real(a[0]))
            .scale_real(-0.5);
        assert!((&d - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn derivative_hermitian_traceless() {
        for seed in 0..10 {
            let rho = random_mixed_state(2, seed).unwrap();
            let d = state_derivative(&Generator::nonentangling(2).unwrap(), &rho).unwrap();
            assert!(d.is_hermitian(1e-12));
            assert!(d.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_of_optimal_state() {
        let g = Generator::nonentangling(1).unwrap();
        let rho = optimal_single_qubit(Sign::Plus);
        let same = evolve(&rho, &g, 0.0).unwrap();
        assert!((same.op() - rho.op()).max_abs() < 1e-14);

        let x = 0.7;
        let a = evolve(&rho, &g, x).unwrap().bloch_vector().unwrap();
        assert!((a[0] + x.sin()).abs() < 1e-12);
        assert!((a[1] - x.cos()).abs() < 1e-12);
        assert!(a[2].abs() < 1e-12);

        // finite-difference derivative at 0 against −i[H, ρ]
        let h = 1e-6;
        let plus = evolve(&rho, &g, h).unwrap();
        let minus = evolve(&rho, &g, -h).unwrap();
        let fd = (plus.op() - minus.op()).scale_real(0.5 / h);
        let exact = state_derivative(&g, &rho).unwrap();
        assert!((&fd - &exact).max_abs() < 1e-6);
    }

    #[test]
    fn evolution_preserves_purity_and_is_second_order() {
        let g = Generator::entangling(3).unwrap();
        let rho = random_pure_state(3, 17).unwrap();
        let out = evolve(&rho, &g, 1.3).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-10);

        let d = state_derivative(&g, &rho).unwrap();
        let err = |x: f64| {
            let e = evolve(&rho, &g, x).unwrap();
            (&(e.op() - rho.op()) - &d.scale_real(x)).frobenius_norm()
        };
        let (e3, e4) = (err(1e-3), err(1e-4));
        let ratio = e3 / e4;
        assert!((80.0..120.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn nonentangling_evolution_factorizes() {
        let r = random_mixed_state(1, 4).unwrap();
        let pair = r.tensor(&r).unwrap();
        let x = 0.41;
        let joint = evolve(&pair, &Generator::nonentangling(2).unwrap(), x).unwrap();
        let single = evolve(&r, &Generator::nonentangling(1).unwrap(), x).unwrap();
        let product = single.tensor(&single).unwrap();
        assert!((joint.op() - product.op()).max_abs() < 1e-10);
    }

    #[test]
    fn pm_readout_single_qubit() {
        let b = product_pm_readout(1).unwrap();
        assert_eq!(b.labels(), vec!["+", "-"]);
        let plus = (&DenseOperator::identity(2) + &pauli("X")).scale_real(0.5);
        let minus = (&DenseOperator::identity(2) - &pauli("X")).scale_real(0.5);
        assert!((&b.outcomes()[0].projector - &plus).max_abs() < 1e-15);
        assert!((&b.outcomes()[1].projector - &minus).max_abs() < 1e-15);
    }

    #[test]
    fn pm_readout_two_qubit_label() {
        let b = product_pm_readout(2).unwrap();
        assert_eq!(b.labels(), vec!["++", "+-", "-+", "--"]);
        let e = &b.outcomes()[b.index_of("+-").unwrap()].projector;
        let one = DenseOperator::identity(2);
        let x = pauli("X");
        let expected = (&one + &x).kron(&(&one - &x)).scale_real(0.25);
        assert!((e - &expected).max_abs() < 1e-15);
        let s = pauli_expand(e).unwrap();
        assert!((s.coefficient("XX") + 0.25).abs() < 1e-15);
    }

    #[test]
    fn pm_readout_completeness_and_orthogonality() {
        let b = product_pm_readout(3).unwrap();
        let mut sum = DenseOperator::zeros(8);
        for o in b.outcomes() {
            sum = &sum + &o.projector;
            assert!((&(&o.projector * &o.projector) - &o.projector).max_abs() < 1e-12);
            assert!((o.projector.trace().re - 1.0).abs() < 1e-12);
        }
        assert!((&sum - &DenseOperator::identity(8)).max_abs() < 1e-12);
        for (i, a) in b.outcomes().iter().enumerate() {
            for bb in &b.outcomes()[i + 1..] {
                assert!((&a.projector * &bb.projector).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_examples() {
        let b = product_pm_readout(1).unwrap();
        let p = outcome_probabilities(&b, &optimal_single_qubit(Sign::Plus)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let mixed = DensityMatrix::new(DenseOperator::identity(2).scale_real(0.5)).unwrap();
        let p = outcome_probabilities(&b, &mixed).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        let plus = DensityMatrix::new(b.outcomes()[0].projector.clone()).unwrap();
        let p = outcome_probabilities(&b, &plus).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
    }

    #[test]
    fn random_basis_is_valid() {
        let b = ReadoutBasis::random(2, 3).unwrap();
        let rho = random_mixed_state(2, 8).unwrap();
        let s: f64 = outcome_probabilities(&b, &rho).unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_orthonormal_rejected() {
        let v = vec![vec![C64::new(1.0, 0.0), ZERO], vec![C64::new(1.0, 0.0), ZERO]];
        assert!(ReadoutBasis::from_vectors(vec!["a".into(), "b".into()], v).is_err());
    }
}
