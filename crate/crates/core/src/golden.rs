//! Golden verification suite: the library's reference results, each with its
//! measured residuals.

use serde::{Deserialize, Serialize};

use crate::dynamics::{product_pm_readout, state_derivative, Generator, GeneratorKind};
use crate::error::Result;
use crate::operator::{hermitian_eigen, pauli_dense, DenseOperator, Pauli, PauliString, PauliSum, C64};
use crate::search::{search_optimal_state, SearchConfig};
use crate::sld::{check_saturation, classical_fisher, cramer_rao_bound, quantum_fisher};
use crate::solver::{closed_form_solution, composite_rule_check, solve_lambdas_given_state, verify_parity_obstruction};
use crate::state::{
    cat_state, from_bloch, optimal_single_qubit, tensor_power, two_qubit_entangling_candidate, BlochCoefficients,
    DensityMatrix, Sign,
};
use crate::system::{evaluate_two_qubit_system, k_values, CoefficientSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let status = match (&self.error, self.passed) {
            (Some(_), _) => "ERROR",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        let mut s = format!("{status} {}", self.id);
        for m in &self.measurements {
            s.push_str(&format!(" {}={:.3e}", m.name, m.value));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        s
    }
}

/// Knobs for exercising the suite itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Sign applied to σ₂ when the single-qubit reference state is assembled.
    pub sigma_y_sign: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { sigma_y_sign: 1.0 }
    }
}

struct Outcome {
    passed: bool,
    measurements: Vec<Measurement>,
}

#[derive(Default)]
struct Tally {
    ok: bool,
    ms: Vec<Measurement>,
}

impl Tally {
    fn new() -> Self {
        Self { ok: true, ms: Vec::new() }
    }

    /// Records `value` and requires `value <= tol`.
    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.ok &= value <= tol;
        self.ms.push(Measurement { name: name.into(), value });
    }

    fn at_least(&mut self, name: &str, value: f64, floor: f64) {
        self.ok &= value >= floor;
        self.ms.push(Measurement { name: name.into(), value });
    }

    fn require(&mut self, cond: bool) {
        self.ok &= cond;
    }

    fn done(self) -> Result<Outcome> {
        Ok(Outcome { passed: self.ok, measurements: self.ms })
    }
}

type CheckFn = Box<dyn Fn(&SuiteOptions) -> Result<Outcome> + Send + Sync>;

struct Check {
    id: String,
    description: String,
    run: CheckFn,
}

fn check(id: impl Into<String>, description: impl Into<String>, run: impl Fn(&SuiteOptions) -> Result<Outcome> + Send + Sync + 'static) -> Check {
    Check { id: id.into(), description: description.into(), run: Box::new(run) }
}

fn pauli(s: &str) -> Result<DenseOperator> {
    pauli_dense(&s.parse::<PauliString>()?)
}

/// −Σ_j σ₁^{(j)}
fn minus_sum_x(n: usize) -> Result<DenseOperator> {
    let mut out = DenseOperator::zeros(1 << n);
    for j in 0..n {
        out = &out - &pauli_dense(&PauliString::single(n, j, Pauli::X))?;
    }
    Ok(out)
}

fn single_qubit_check(sign: Sign) -> impl Fn(&SuiteOptions) -> Result<Outcome> {
    move |opts| {
        let s = sign.value();
        // ρ̃ = ½(𝟙 ± σ₂), assembled from the σ₂ matrix
        let sy = Pauli::Y.matrix().scale_real(opts.sigma_y_sign);
        let rho = DensityMatrix::new((&DenseOperator::identity(2) + &sy.scale_real(s)).scale_real(0.5))?;
        let g = Generator::nonentangling(1)?;
        let b = product_pm_readout(1)?;
        let d = state_derivative(&g, &rho)?;
        let sat = check_saturation(&b, &rho, &d)?;
        let expected_l = pauli("X")?.scale_real(-s);
        let mut t = Tally::new();
        t.at_most("sld_error", (&sat.sld.op - &expected_l).max_abs(), 1e-9);
        let lp = sat.spectrum.get("+").unwrap_or(C64::new(f64::NAN, 0.0));
        let lm = sat.spectrum.get("-").unwrap_or(C64::new(f64::NAN, 0.0));
        t.at_most("lambda_error", (lp - C64::new(-s, 0.0)).norm().max((lm - C64::new(s, 0.0)).norm()), 1e-9);
        t.at_most("classical_fisher_error", (classical_fisher(&b, &rho, &d)? - 1.0).abs(), 1e-9);
        t.at_most("quantum_fisher_error", (quantum_fisher(&rho, &d)? - 1.0).abs(), 1e-9);
        t.at_most("im_condition", sat.im_condition_max, 1e-9);
        t.at_most("diagonal_residual", sat.diagonal_residual, 1e-9);
        t.require(sat.saturated);
        t.done()
    }
}

fn suite() -> Vec<Check> {
    let mut checks = vec![
        check("single-qubit-optimum-plus", "½(𝟙+σ₂): L = −σ₁, 1/λ± = ∓1, F = 𝓕 = 1, saturated", single_qubit_check(Sign::Plus)),
        check("single-qubit-optimum-minus", "½(𝟙−σ₂): L = +σ₁, 1/λ± = ±1, F = 𝓕 = 1, saturated", single_qubit_check(Sign::Minus)),
        check("sigma2-eigenbasis", "σ₂ has eigenvalues ±1 with eigenvectors (|0⟩ ± i|1⟩)/√2", |_| {
            let e = hermitian_eigen(&Pauli::Y.matrix())?;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let mut t = Tally::new();
            t.at_most("eigenvalue_error", (e.values[0] - 1.0).abs().max((e.values[1] + 1.0).abs()), 1e-12);
            // overlap magnitudes with |i⟩ and |ī⟩ are phase independent
            let ket_i = [C64::new(r, 0.0), C64::new(0.0, r)];
            let ket_ibar = [C64::new(r, 0.0), C64::new(0.0, -r)];
            let ov = |k: usize, w: &[C64; 2]| e.vector(k).iter().zip(w).map(|(a, b)| b.conj() * a).sum::<C64>().norm();
            t.at_most("eigenvector_error", (1.0 - ov(0, &ket_i)).abs().max((1.0 - ov(1, &ket_ibar)).abs()), 1e-12);
            t.done()
        }),
        check("bloch-sigma2-state", "a = (0, 1, 0) gives ½(𝟙+σ₂), a pure state", |_| {
            let rho = from_bloch(&BlochCoefficients::OneQubit { a: [0.0, 1.0, 0.0] })?;
            let expected = PauliSum::from_terms(1, [("I", 0.5), ("Y", 0.5)])?;
            let mut t = Tally::new();
            t.at_most("expansion_error", rho.pauli_expansion()?.max_difference(&expected), 1e-12);
            t.at_most("purity_error", (rho.purity() - 1.0).abs(), 1e-10);
            t.done()
        }),
        check("tensor-square", "ρ̃⊗ρ̃ = ¼(𝟙𝟙 + σ₂𝟙 + 𝟙σ₂ + σ₂σ₂)", |_| {
            let rho = tensor_power(&optimal_single_qubit(Sign::Plus), 2)?;
            let expected = PauliSum::from_terms(2, [("II", 0.25), ("YI", 0.25), ("IY", 0.25), ("YY", 0.25)])?;
            let mut t = Tally::new();
            t.at_most("expansion_error", rho.pauli_expansion()?.max_difference(&expected), 1e-12);
            t.done()
        }),
        check("cat-expansion", "(|00⟩ ± |11⟩)/√2 expands to ¼(𝟙𝟙 ± σ₁σ₁ ∓ σ₂σ₂ + σ₃σ₃) from the ket", |_| {
            let mut t = Tally::new();
            for sign in [Sign::Plus, Sign::Minus] {
                let s = sign.value();
                let e = cat_state(2, sign)?.pauli_expansion()?;
                let expected = PauliSum::from_terms(2, [("II", 0.25), ("XX", 0.25 * s), ("YY", -0.25 * s), ("ZZ", 0.25)])?;
                t.at_most("expansion_error", e.max_difference(&expected), 1e-12);
            }
            t.done()
        }),
        check("two-qubit-candidate-states", "c₁₁ = c₂₃ = c₃₂ = 1 is pure; flipping c₂₃, c₃₂ stays valid", |_| {
            let mut t = Tally::new();
            t.at_most("purity_error", (two_qubit_entangling_candidate(1.0, 1.0, 1.0)?.purity() - 1.0).abs(), 1e-10);
            t.at_most("flipped_purity_error", (two_qubit_entangling_candidate(1.0, -1.0, -1.0)?.purity() - 1.0).abs(), 1e-10);
            t.done()
        }),
        check("two-qubit-product-lambdas", "ρ̃⊗ρ̃, non-entangling: 1/λ = (−2, 0, 0, 2), exact solution", |_| {
            let rho = tensor_power(&optimal_single_qubit(Sign::Plus), 2)?;
            let fit = solve_lambdas_given_state(&rho, &product_pm_readout(2)?, &Generator::nonentangling(2)?)?;
            let err = fit.inv_lambdas.iter().zip([-2.0, 0.0, 0.0, 2.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let mut t = Tally::new();
            t.at_most("lambda_error", err, 1e-9);
            t.at_most("residual", fit.residual, 1e-9);
            t.done()
        }),
        check("two-qubit-product-fisher", "ρ̃⊗ρ̃: F = 2 = 4⟨Δ²H⟩", |_| {
            let rho = tensor_power(&optimal_single_qubit(Sign::Plus), 2)?;
            let g = Generator::nonentangling(2)?;
            let d = state_derivative(&g, &rho)?;
            let var = {
                let h = g.op();
                let m1 = h.trace_product(rho.op()).re;
                (h * h).trace_product(rho.op()).re - m1 * m1
            };
            let mut t = Tally::new();
            t.at_most("fisher_error", (classical_fisher(&product_pm_readout(2)?, &rho, &d)? - 2.0).abs(), 1e-9);
            t.at_most("variance_error", (4.0 * var - 2.0).abs(), 1e-9);
            t.done()
        }),
        check("sixteen-equations-nonentangling", "K₊₊₊ = K₋₋₊ = 0, K₋₊₋ = K₊₋₋ = −4 solves the non-entangling system at ρ̃⊗ρ̃", |_| {
            let sys = CoefficientSystem::new(GeneratorKind::NonEntangling)?;
            let st = BlochCoefficients::from_state(&tensor_power(&optimal_single_qubit(Sign::Plus), 2)?)?;
            let r = evaluate_two_qubit_system(&sys, &st, [0.0, -4.0, -4.0, 0.0])?;
            let mut t = Tally::new();
            t.at_most("max_residual", r.iter().map(|v| v.abs()).fold(0.0, f64::max), 1e-9);
            t.done()
        }),
        check("sixteen-equations-entangling", "1/λ₊₊ = −1, 1/λ₋₋ = 1, 1/λ₊₋ = 1/λ₋₊ = c solves the entangling system for any c", |_| {
            let sys = CoefficientSystem::new(GeneratorKind::Entangling)?;
            let st = BlochCoefficients::from_state(&two_qubit_entangling_candidate(1.0, 1.0, 1.0)?)?;
            let mut worst: f64 = 0.0;
            for c in [0.0, 0.7, -2.0] {
                let r = evaluate_two_qubit_system(&sys, &st, k_values([-1.0, c, c, 1.0]))?;
                worst = worst.max(r.iter().map(|v| v.abs()).fold(0.0, f64::max));
            }
            let mut t = Tally::new();
            t.at_most("max_residual", worst, 1e-9);
            t.done()
        }),
        check("cat-exclusion", "cat states do not solve the equation; their ± readout carries no information at x = 0", |_| {
            let g = Generator::nonentangling(2)?;
            let b = product_pm_readout(2)?;
            let mut t = Tally::new();
            for sign in [Sign::Plus, Sign::Minus] {
                let cat = cat_state(2, sign)?;
                t.at_least("best_residual", solve_lambdas_given_state(&cat, &b, &g)?.residual, 0.1);
                t.at_most("classical_fisher", classical_fisher(&b, &cat, &state_derivative(&g, &cat)?)?.abs(), 1e-10);
            }
            t.done()
        }),
        check("entangling-two-qubit-solution", "c₁₁ = c₂₃ = c₃₂ = 1 solves the entangling equation with ⟨L²⟩ = 1", |_| {
            let s = closed_form_solution(GeneratorKind::Entangling, 2)?;
            let mut t = Tally::new();
            t.at_most("residual", s.residual, 1e-9);
            t.at_most("qfi_error", (s.qfi - 1.0).abs(), 1e-8);
            t.done()
        }),
        check("shot-noise-bound", "1/√(ν𝓕) with 𝓕 = N gives 1/√N; ν = 10⁴, 𝓕 = 1 gives 0.01", |_| {
            let mut t = Tally::new();
            let worst = (1..=6).map(|n| (cramer_rao_bound(n as f64, 1).unwrap_or(f64::NAN) - 1.0 / (n as f64).sqrt()).abs()).fold(0.0, f64::max);
            t.at_most("bound_error", worst, 1e-15);
            t.at_most("repetition_error", (cramer_rao_bound(1.0, 10_000)? - 0.01).abs(), 1e-15);
            t.done()
        }),
        check("search-single-qubit", "numeric search at n = 1 reaches ⟨L²⟩ = 1 on the equator", |_| {
            let cfg = SearchConfig { starts: 16, ..Default::default() };
            let r = search_optimal_state(&Generator::nonentangling(1)?, &product_pm_readout(1)?, 1, &cfg)?;
            let mut t = Tally::new();
            t.at_most("qfi_error", (r.best().qfi - 1.0).abs(), 1e-6);
            let a = r.best().state.bloch_vector()?;
            t.at_most("a3", a[2].abs(), 1e-4);
            t.done()
        }),
        check("search-entangling-two-qubits", "numeric search at n = 2, entangling: ⟨L²⟩ = 1 with several optima", |_| {
            let r = search_optimal_state(&Generator::entangling(2)?, &product_pm_readout(2)?, 2, &SearchConfig::default())?;
            let mut t = Tally::new();
            t.at_most("qfi_error", (r.best().qfi - 1.0).abs(), 1e-6);
            t.require(!r.solutions.is_empty());
            t.done()
        }),
    ];
    for n in 1..=6 {
        checks.push(check(
            format!("nonentangling-scaling-{n}"),
            format!("ρ̃^⊗{n}: L = −Σσ₁, additive 1/λ, F = {n}"),
            move |_| {
                let s = closed_form_solution(GeneratorKind::NonEntangling, n)?;
                let b = product_pm_readout(n)?;
                let fit = solve_lambdas_given_state(&s.state, &b, &Generator::nonentangling(n)?)?;
                let additivity = fit
                    .inv_lambdas
                    .iter()
                    .zip(s.inv_lambdas.real_values())
                    .map(|(a, c)| (a - c).abs())
                    .fold(0.0, f64::max);
                let mut t = Tally::new();
                t.at_most("sld_error", (&s.sld(&b)? - &minus_sum_x(n)?).max_abs(), 1e-9);
                t.at_most("additivity_error", additivity, 1e-9);
                t.at_most("fisher_error", (s.qfi - n as f64).abs(), 1e-8);
                t.done()
            },
        ));
    }
    for n in [2, 4] {
        checks.push(check(
            format!("even-n-parity-{n}"),
            format!("ρ̃^⊗{n}, entangling: 1/λ purely imaginary, no saturation"),
            move |_| {
                let r = verify_parity_obstruction(n)?;
                let mut t = Tally::new();
                t.at_most("max_abs_real", r.max_abs_real, 1e-9);
                t.at_least("max_abs_imag", r.max_abs_imag, 0.1);
                t.require(!r.saturated);
                t.done()
            },
        ));
    }
    for n in [3, 5] {
        checks.push(check(
            format!("odd-n-parity-{n}"),
            format!("ρ̃^⊗{n}, entangling: 1/λ = i^(N+3)/∏λ = ±1, ⟨L²⟩ = 1"),
            move |_| {
                let r = verify_parity_obstruction(n)?;
                let s = closed_form_solution(GeneratorKind::Entangling, n)?;
                let mut t = Tally::new();
                t.at_most("product_rule_error", r.product_rule_deviation.unwrap_or(f64::INFINITY), 1e-9);
                t.at_most("max_abs_imag", r.max_abs_imag, 1e-9);
                t.at_most("second_moment_error", (r.second_moment - 1.0).abs(), 1e-8);
                t.at_most("closed_form_residual", s.residual, 1e-9);
                t.require(r.saturated);
                t.done()
            },
        ));
    }
    for (k, m) in [(1, 1), (0, 2)] {
        checks.push(check(
            format!("composite-rule-{}", (1usize << k) * (2 * m + 1)),
            format!("ρ_{}^⊗{} under the entangling generator: measured residual", 1 << k, 2 * m + 1),
            move |_| {
                let c = composite_rule_check(k, m)?;
                let mut t = Tally::new();
                t.at_most("residual", c.residual, 1e-7);
                t.done()
            },
        ));
    }
    checks
}

/// Runs every check whose id contains `filter`.
pub fn run_suite(filter: Option<&str>, opts: &SuiteOptions) -> Vec<CheckResult> {
    suite()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.id.contains(f)))
        .map(|c| match (c.run)(opts) {
            Ok(o) => CheckResult { id: c.id, description: c.description, passed: o.passed, measurements: o.measurements, error: None },
            Err(e) => CheckResult { id: c.id, description: c.description, passed: false, measurements: Vec::new(), error: Some(e.to_string()) },
        })
        .collect()
}

pub fn check_ids() -> Vec<String> {
    suite().into_iter().map(|c| c.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let results = run_suite(None, &SuiteOptions::default());
        for r in &results {
            println!("{}", r.line());
        }
        assert!(results.iter().all(|r| r.passed), "failing checks above");
    }

    #[test]
    fn flipped_sigma_y_is_caught() {
        let results = run_suite(Some("single-qubit-optimum"), &SuiteOptions { sigma_y_sign: -1.0 });
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| !r.passed));
    }

    #[test]
    fn ids_are_unique() {
        let mut ids = check_ids();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }
}
