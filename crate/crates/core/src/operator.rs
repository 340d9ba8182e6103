//! Dense complex matrices and Pauli-string algebra for N-qubit operators.
//!
//! Conventions: σ₁ = [[0,1],[1,0]], σ₂ = [[0,−i],[i,0]], σ₃ = diag(1,−1) and
//! |0⟩ = (1,0). Qubit 1 is the leftmost (most significant) tensor factor, so
//! the computational basis index of |j₁…j_N⟩ is the binary number j₁…j_N.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default qubit cap (dense 1024 × 1024 operators).
pub const DEFAULT_MAX_QUBITS: usize = 10;

/// Tolerance used when an operator is required to be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

static MAX_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUBITS);

/// Current qubit cap for dense operators.
pub fn max_qubits() -> usize {
    MAX_QUBITS.load(Ordering::Relaxed)
}

/// Override the qubit cap. Intended to be called once from configuration.
pub fn set_max_qubits(cap: usize) {
    MAX_QUBITS.store(cap.max(1), Ordering::Relaxed);
}

pub(crate) fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    let cap = max_qubits();
    if n_qubits > cap {
        return Err(Error::DimensionExceeded { n_qubits, cap });
    }
    Ok(())
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseOperator({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for DenseOperator {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseOperator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Build from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_row_major(entries: Vec<C64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// |v⟩⟨w|
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        debug_assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |r, c| v[r] * w[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> Result<usize> {
        qubits_for_dim(self.dim)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|r| self.data[r * n..(r + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Frobenius inner product tr(A† B).
    pub fn inner(&self, rhs: &Self) -> C64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// tr(A B) without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * rhs.data[k * n + i];
            }
        }
        acc
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self[(r1, c1)];
                if x == ZERO {
                    continue;
                }
                for r2 in 0..b {
                    for c2 in 0..b {
                        out[(r1 * b + r2, c1 * b + c2)] = x * rhs[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    /// Largest |A − A†| entry.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    /// ½(A + A†)
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    fn check_same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rhs.dim });
        }
        Ok(())
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.matmul(rhs)
    }
}

/// AB − BA
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    a.check_same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// AB + BA
pub fn anticommutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    a.check_same_dim(b)?;
    Ok(&(a * b) + &(b * a))
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Entry (row, col) of the 2×2 matrix.
    fn entry(self, row: usize, col: usize) -> C64 {
        match (self, row, col) {
            (Pauli::I, r, c) if r == c => ONE,
            (Pauli::X, r, c) if r != c => ONE,
            (Pauli::Y, 0, 1) => -I,
            (Pauli::Y, 1, 0) => I,
            (Pauli::Z, 0, 0) => ONE,
            (Pauli::Z, 1, 1) => -ONE,
            _ => ZERO,
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> DenseOperator {
        DenseOperator::from_fn(2, |r, c| self.entry(r, c))
    }
}

/// Tensor product of single-qubit Paulis; index 0 is the leftmost factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("Pauli string must be nonempty".into()));
        }
        Ok(Self(labels))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n.max(1)])
    }

    /// σ at `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut v = vec![Pauli::I; n];
        v[site] = p;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Every string of length `n`, in lexicographic order I < X < Y < Z.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |mut idx| {
            let mut v = vec![Pauli::I; n];
            for slot in v.iter_mut().rev() {
                *slot = Pauli::ALL[idx % 4];
                idx /= 4;
            }
            PauliString(v)
        })
    }

    fn flip_mask(&self) -> usize {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |m, (k, _)| m | (1 << (n - 1 - k)))
    }

    /// The single nonzero entry in `row`: (column, value).
    fn row_entry(&self, row: usize) -> (usize, C64) {
        let n = self.0.len();
        let col = row ^ self.flip_mask();
        let mut v = ONE;
        for (k, p) in self.0.iter().enumerate() {
            let shift = n - 1 - k;
            v *= p.entry((row >> shift) & 1, (col >> shift) & 1);
        }
        (col, v)
    }

    /// tr(P A) computed from the one nonzero entry per row of P.
    pub fn trace_with(&self, a: &DenseOperator) -> C64 {
        (0..a.dim())
            .map(|r| {
                let (c, v) = self.row_entry(r);
                v * a[(c, r)]
            })
            .sum()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' | '0' => Ok(Pauli::I),
                'X' | '1' => Ok(Pauli::X),
                'Y' | '2' => Ok(Pauli::Y),
                'Z' | '3' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("bad Pauli symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(labels)
    }
}

/// Dense matrix of a Pauli string (ordered Kronecker product).
pub fn pauli_dense(p: &PauliString) -> Result<DenseOperator> {
    check_qubits(p.len())?;
    let dim = 1usize << p.len();
    let mut m = DenseOperator::zeros(dim);
    for r in 0..dim {
        let (c, v) = p.row_entry(r);
        m[(r, c)] = v;
    }
    Ok(m)
}

/// Coefficients below this magnitude are dropped from an expansion.
const EXPANSION_DROP: f64 = 1e-14;

/// Real-coefficient expansion of a Hermitian operator over Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn from_terms<'a>(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let mut sum = Self::new(n_qubits);
        for (label, coeff) in terms {
            let p: PauliString = label.parse()?;
            if p.len() != n_qubits {
                return Err(Error::DimensionMismatch { expected: n_qubits, found: p.len() });
            }
            sum.add_term(p, coeff);
        }
        Ok(sum)
    }

    pub fn add_term(&mut self, p: PauliString, coeff: f64) {
        *self.terms.entry(p).or_insert(0.0) += coeff;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, f64> {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a string given as text, zero when absent.
    pub fn coefficient(&self, label: &str) -> f64 {
        label.parse::<PauliString>().ok().and_then(|p| self.terms.get(&p).copied()).unwrap_or(0.0)
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    pub fn dense(&self) -> Result<DenseOperator> {
        check_qubits(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut m = DenseOperator::zeros(dim);
        for (p, &coeff) in &self.terms {
            for r in 0..dim {
                let (c, v) = p.row_entry(r);
                m[(r, c)] += v * coeff;
            }
        }
        Ok(m)
    }

    /// Largest coefficient-wise difference against another sum.
    pub fn max_difference(&self, other: &PauliSum) -> f64 {
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().map(|k| (self.get(k) - other.get(k)).abs()).fold(0.0, f64::max)
    }
}

/// Expand a Hermitian operator: coefficient of P is tr(P A)/2^N.
pub fn pauli_expand(a: &DenseOperator) -> Result<PauliSum> {
    let n = a.n_qubits()?;
    check_qubits(n)?;
    a.ensure_hermitian(HERMITIAN_TOL)?;
    let scale = 1.0 / a.dim() as f64;
    let mut sum = PauliSum::new(n);
    for p in PauliString::all(n) {
        let coeff = p.trace_with(a).re * scale;
        if coeff.abs() > EXPANSION_DROP {
            sum.terms.insert(p, coeff);
        }
    }
    Ok(sum)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: DenseOperator,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// V f(D) V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> DenseOperator {
        let n = self.vectors.dim();
        let v = &self.vectors;
        let fd: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        DenseOperator::from_fn(n, |r, c| (0..n).map(|k| v[(r, k)] * fd[k] * v[(c, k)].conj()).sum())
    }

    pub fn reconstruct(&self) -> DenseOperator {
        self.reconstruct_with(|x| C64::new(x, 0.0))
    }
}

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(a: &DenseOperator) -> Result<HermitianEigen> {
    a.ensure_hermitian(HERMITIAN_TOL)?;
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = DenseOperator::identity(n);
    let norm = m.frobenius_norm();
    let threshold = JACOBI_REL_TOL * norm;

    let off_norm = |m: &DenseOperator| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += m[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = norm == 0.0 || n < 2;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE || mag < 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Unitary W = diag(1, e^{-iφ}) · [[c, s], [−s, c]] acting on columns p, q.
                let phase = apq / mag;
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let w00 = C64::new(c, 0.0);
                let w01 = C64::new(s, 0.0);
                let w10 = -phase.conj() * s;
                let w11 = phase.conj() * c;
                for k in 0..n {
                    let x = m[(k, p)];
                    let y = m[(k, q)];
                    m[(k, p)] = x * w00 + y * w10;
                    m[(k, q)] = x * w01 + y * w11;
                }
                for k in 0..n {
                    let x = m[(p, k)];
                    let y = m[(q, k)];
                    m[(p, k)] = w00.conj() * x + w10.conj() * y;
                    m[(q, k)] = w01.conj() * x + w11.conj() * y;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * w00 + y * w10;
                    v[(k, q)] = x * w01 + y * w11;
                }
            }
        }
        sweep += 1;
        converged = off_norm(&m) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: sweep });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = DenseOperator::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// U = exp(−i·x·h) for Hermitian h.
pub fn unitary_evolution(h: &DenseOperator, x: f64) -> Result<DenseOperator> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.reconstruct_with(|lambda| C64::from_polar(1.0, -x * lambda)))
}

/// Kronecker product of a sequence of operators, left to right.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a DenseOperator>) -> DenseOperator {
    ops.into_iter()
        .fold(DenseOperator::identity(1), |acc, op| acc.kron(op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DenseOperator {
        let a = DenseOperator::from_fn(dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        a.hermitian_part()
    }

    fn p(s: &str) -> DenseOperator {
        pauli_dense(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn single_qubit_paulis() {
        assert_eq!(p("Z"), DenseOperator::diagonal(&[ONE, -ONE]));
        assert_eq!(p("II"), DenseOperator::identity(4));
    }

    #[test]
    fn xy_corner_entry() {
        assert!((p("XY")[(0, 3)] - (-I)).norm() < 1e-15);
        // cross-check against an explicit Kronecker product
        let kron = Pauli::X.matrix().kron(&Pauli::Y.matrix());
        assert_eq!(kron, p("XY"));
    }

    #[test]
    fn cap_is_enforced() {
        let long = "I".repeat(DEFAULT_MAX_QUBITS + 1);
        assert!(matches!(
            pauli_dense(&long.parse().unwrap()),
            Err(Error::DimensionExceeded { .. })
        ));
    }

    #[test]
    fn expand_half_identity_plus_y() {
        let rho = (&p("I") + &p("Y")).scale_real(0.5);
        let sum = pauli_expand(&rho).unwrap();
        assert_eq!(sum.terms().len(), 2);
        assert!((sum.coefficient("I") - 0.5).abs() < 1e-15);
        assert!((sum.coefficient("Y") - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expand_zero_is_empty() {
        assert!(pauli_expand(&DenseOperator::zeros(4)).unwrap().is_empty());
    }

    #[test]
    fn expand_rejects_non_hermitian() {
        let mut a = DenseOperator::zeros(2);
        a[(0, 1)] = ONE;
        assert!(matches!(pauli_expand(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expand_random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_hermitian(4, &mut rng);
            let back = pauli_expand(&a).unwrap().dense().unwrap();
            assert!((&back - &a).max_abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_orthogonality() {
        let strings: Vec<_> = PauliString::all(2).collect();
        for a in &strings {
            for b in &strings {
                let t = pauli_dense(a).unwrap().trace_product(&pauli_dense(b).unwrap());
                let expected = if a == b { 4.0 } else { 0.0 };
                assert!((t - C64::new(expected, 0.0)).norm() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn commutator_examples() {
        let c = commutator(&p("Z"), &p("Y")).unwrap();
        assert!((&c - &p("X").scale(C64::new(0.0, -2.0))).max_abs() < 1e-15);
        let ac = anticommutator(&p("X"), &p("Y")).unwrap();
        assert!(ac.max_abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(8, &mut rng);
        assert!(commutator(&a, &a).unwrap().max_abs() < 1e-14);
        assert!(matches!(
            commutator(&a, &p("X")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigen_of_sigma_y() {
        let eig = hermitian_eigen(&p("Y")).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |i⟩ = (|0⟩ + i|1⟩)/√2 up to a global phase
        let v = eig.vector(0);
        let overlap = v[0].conj() * s + v[1].conj() * I * s;
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        let w = eig.vector(1);
        let overlap = w[0].conj() * s - w[1].conj() * I * s;
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_identity() {
        let eig = hermitian_eigen(&DenseOperator::identity(8)).unwrap();
        assert!(eig.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eigen_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 4, 8, 16, 32] {
            let a = random_hermitian(dim, &mut rng);
            let eig = hermitian_eigen(&a).unwrap();
            let err = (&eig.reconstruct() - &a).frobenius_norm();
            assert!(err <= 1e-10 * a.frobenius_norm(), "dim {dim}: {err}");
            let vtv = &eig.vectors.adjoint() * &eig.vectors;
            assert!((&vtv - &DenseOperator::identity(dim)).frobenius_norm() <= 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn evolution_examples() {
        let h = p("Z").scale_real(0.5);
        let u = unitary_evolution(&h, std::f64::consts::PI).unwrap();
        let expected = DenseOperator::diagonal(&[
            C64::from_polar(1.0, -std::f64::consts::FRAC_PI_2),
            C64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
        ]);
        assert!((&u - &expected).max_abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(8, &mut rng);
        let u0 = unitary_evolution(&h, 0.0).unwrap();
        assert!((&u0 - &DenseOperator::identity(8)).max_abs() < 1e-12);

        let (x1, x2) = (0.37, -1.21);
        let lhs = &unitary_evolution(&h, x1).unwrap() * &unitary_evolution(&h, x2).unwrap();
        let rhs = unitary_evolution(&h, x1 + x2).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-10);
        let uu = &rhs * &rhs.adjoint();
        assert!((&uu - &DenseOperator::identity(8)).max_abs() < 1e-10);
    }
}
