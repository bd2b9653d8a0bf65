//! Closed-form bounds and numerical non-signaling certificates.
//!
//! Dimension bounds can be astronomically large, so they are also offered
//! in `log₂` form and compared there.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{apply_local, partial_trace_outer, HermitianOperator, Matrix, StateVector, C64};
use crate::pbsp::{abort_probability, det_povm_with_budget, prob_povm_with_budget, success_probability};
use crate::states::{bob_label, resource_state, ResourceSpec};

/// Absolute tolerance for probability and fidelity comparisons.
pub const BOUND_TOL: f64 = 1e-10;

/// Outcome of checking `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs − lhs`
    pub slack: f64,
}

impl BoundVerdict {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, satisfied: lhs <= rhs + BOUND_TOL, slack: rhs - lhs }
    }

    /// Compares `log₂` quantities with a relative tolerance.
    pub fn new_log2(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let tol = 1e-9 * lhs.abs().max(rhs.abs()).max(1.0);
        Self { name: name.into(), lhs, rhs, satisfied: lhs <= rhs + tol, slack: rhs - lhs }
    }
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `h(p) = −p log₂ p − (1 − p) log₂(1 − p)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability(p, "probability")?;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Qubits `n(1 − h(p))` any code packing `n` bits with success `p` needs.
pub fn nayak_min_qubits(n: f64, p: f64) -> Result<f64> {
    Ok(n * (1.0 - binary_entropy(p)?))
}

/// `log₂` of the minimal processor memory `(d/2)(1 − h(2ε))`.
pub fn uphp_lower_bound_log2(d: usize, epsilon: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::Domain(format!("error parameter must lie in [0, 1/2), got {epsilon}")));
    }
    nayak_min_qubits(d as f64 / 2.0, 1.0 - 2.0 * epsilon)
}

/// Minimal processor memory `2^{(d/2)(1 − h(2ε))}`; may be infinite for huge `d`.
pub fn uphp_lower_bound(d: usize, epsilon: f64) -> Result<f64> {
    Ok(uphp_lower_bound_log2(d, epsilon)?.exp2())
}

/// `1 − h(√(1 − F)) ≤ 4N log₂(d)/d` for protocols on independent resources.
/// The bound comes from a random access code with success `1 − √(1 − F)`,
/// so it only carries information when `F ≥ ¾`; see
/// [`pbsp_fidelity_bound_applies`].
pub fn pbsp_fidelity_bound_check(d: usize, n_ports: usize, fidelity: f64) -> Result<BoundVerdict> {
    check_probability(fidelity, "fidelity")?;
    let lhs = 1.0 - binary_entropy((1.0 - fidelity).sqrt())?;
    let rhs = 4.0 * n_ports as f64 * (d as f64).log2() / d as f64;
    Ok(BoundVerdict::new("independent-resource fidelity", lhs, rhs))
}

/// Whether `F` lies where the fidelity bound is derived (`F ≥ ¾`). Below it
/// the inequality can fail, e.g. `d = 53, N = 1, F = 1/53`.
pub fn pbsp_fidelity_bound_applies(fidelity: f64) -> bool {
    fidelity >= 0.75
}

/// Average fidelity `(F d + 1)/(d + 1)` from entanglement fidelity `F`.
pub fn avg_from_entanglement_fidelity(f: f64, d: usize) -> f64 {
    let d = d as f64;
    (f * d + 1.0) / (d + 1.0)
}

/// `⊗_i (I − |ψ⟩⟨ψ|)` on `B1..BN`: Bob finds `ψ` in none of his halves.
fn bob_failure(psi: &StateVector, n_ports: usize) -> Matrix {
    let d = psi.dim();
    let proj = HermitianOperator::projector(psi).into_matrix();
    let single = &Matrix::identity(d) - &proj;
    let mut out = Matrix::identity(1);
    for _ in 0..n_ports {
        out = out.kron(&single);
    }
    out
}

fn labels(v: &[String]) -> Vec<&str> {
    v.iter().map(|s| s.as_str()).collect()
}

fn expectation(phi: &[C64], a: &[C64]) -> f64 {
    phi.iter().zip(a).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Bob checking his own halves succeeds as often whether or not Alice
/// measured first; her measurement cannot signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbCertificate {
    /// `Tr[(I_A ⊗ M_⊤) Φ]`, Bob alone.
    pub p_t1: f64,
    /// `Σ_{x=0}^{N} Tr[(M_x ⊗ M_⊤) Φ]`, after Alice's measurement.
    pub p_t2: f64,
    /// The `x = 0` term of `p_t2`.
    pub abort_term: f64,
    /// Success probability of the probabilistic protocol.
    pub protocol_success: f64,
    pub verdict: BoundVerdict,
    pub passed: bool,
}

pub fn nonsignaling_prob_certificate(psi: &StateVector, spec: &ResourceSpec) -> Result<ProbCertificate> {
    if psi.dim() != spec.d {
        return Err(Error::Domain(format!("target has dimension {} but resource has d = {}", psi.dim(), spec.d)));
    }
    spec.check_dense()?;
    let layout = spec.layout();
    let phi = resource_state(spec)?;
    let phi = phi.amplitudes();
    let (alice, bob) = (spec.alice_labels(), spec.bob_labels());
    let success_op = &Matrix::identity(bob_failure(psi, spec.n_ports).rows()) - &bob_failure(psi, spec.n_ports);
    let b = apply_local(&layout, phi, &success_op, &labels(&bob))?;
    let p_t1 = expectation(phi, &b);
    let povm = prob_povm_with_budget(psi, spec.n_ports, spec.dense_budget)?;
    let (mut p_t2, mut abort_term, mut protocol_success) = (0.0, 0.0, 0.0);
    for (element, &x) in povm.elements().iter().zip(povm.labels()) {
        let a = apply_local(&layout, &b, element.matrix(), &labels(&alice))?;
        let t = expectation(phi, &a);
        p_t2 += t;
        if x == 0 {
            abort_term = t;
        } else {
            let plain = apply_local(&layout, phi, element.matrix(), &labels(&alice))?;
            protocol_success += expectation(phi, &plain);
        }
    }
    let verdict = BoundVerdict::new("protocol success vs Bob-alone success", protocol_success, p_t2);
    let passed = (p_t1 - p_t2).abs() <= BOUND_TOL
        && verdict.satisfied
        && (p_t2 - abort_term - protocol_success).abs() <= BOUND_TOL;
    Ok(ProbCertificate { p_t1, p_t2, abort_term, protocol_success, verdict, passed })
}

/// Failure of the deterministic protocol computed directly and as the
/// residual weight off `ψ` on the announced ports.
#[derive(Debug, Clone, PartialEq)]
pub struct FidCertificate {
    /// `1 − F` from normalized port states.
    pub direct: f64,
    /// `Σ_x Tr[(I − P)_{B_x} Tr_{AB_x̄}[(M'_x ⊗ I) Φ]]`.
    pub residual_sum: f64,
    /// `(1 − 1/d)^N`, failure of Bob checking alone.
    pub failure_bound: f64,
    /// `max_y ‖Σ_x Tr_{rest}[(M'_x ⊗ I) Φ]|_{B_y} − Tr_{rest} Φ|_{B_y}‖_max`.
    pub marginal_defect: f64,
    pub verdict: BoundVerdict,
    pub passed: bool,
}

impl FidCertificate {
    /// Whether the protocol attains the failure bound.
    pub fn saturated(&self) -> bool {
        (self.direct - self.failure_bound).abs() <= BOUND_TOL
    }
}

pub fn nonsignaling_fid_certificate(psi: &StateVector, spec: &ResourceSpec) -> Result<FidCertificate> {
    if psi.dim() != spec.d {
        return Err(Error::Domain(format!("target has dimension {} but resource has d = {}", psi.dim(), spec.d)));
    }
    spec.check_dense()?;
    let d = spec.d;
    let layout = spec.layout();
    let phi = resource_state(spec)?;
    let phi = phi.amplitudes();
    let alice = spec.alice_labels();
    let povm = det_povm_with_budget(psi, spec.n_ports, spec.dense_budget)?;
    let proj = HermitianOperator::projector(psi).into_matrix();
    let orth = &Matrix::identity(d) - &proj;
    let applied = povm
        .elements()
        .iter()
        .map(|e| apply_local(&layout, phi, e.matrix(), &labels(&alice)))
        .collect::<Result<Vec<_>>>()?;
    let (mut residual_sum, mut fidelity) = (0.0, 0.0);
    for (a, &x) in applied.iter().zip(povm.labels()) {
        let (_, m) = partial_trace_outer(&layout, a, phi, &[bob_label(x)])?;
        let p = m.trace().re;
        residual_sum += orth.matmul(&m).trace().re;
        // normalized port state, then weighted overlap with ψ
        let rho = m.scale_real(1.0 / p);
        fidelity += p * proj.matmul(&rho).trace().re;
    }
    let direct = 1.0 - fidelity;
    let mut marginal_defect: f64 = 0.0;
    for y in 1..=spec.n_ports {
        let keep = [bob_label(y)];
        let (_, reference) = partial_trace_outer(&layout, phi, phi, &keep)?;
        let mut sum = Matrix::zeros(d, d);
        for a in &applied {
            sum.add_scaled(&partial_trace_outer(&layout, a, phi, &keep)?.1, 1.0);
        }
        marginal_defect = marginal_defect.max(sum.max_abs_diff(&reference));
    }
    let failure_bound = abort_probability(d, spec.n_ports);
    let verdict = BoundVerdict::new("deterministic fidelity vs Bob-alone success", fidelity, success_probability(d, spec.n_ports));
    let passed = (direct - residual_sum).abs() <= BOUND_TOL && marginal_defect <= BOUND_TOL && verdict.satisfied;
    Ok(FidCertificate { direct, residual_sum, failure_bound, marginal_defect, verdict, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RegisterLayout;
    use crate::pbt::{pbt_entanglement_fidelity, PgmSpec};
    use crate::states::{haar_state, SeededRng, DATA_LABEL};
    use proptest::prelude::*;

    #[test]
    fn entropy_values() {
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // h(0.11) = −0.11 log₂ 0.11 − 0.89 log₂ 0.89
        let direct = -0.11 * 0.11f64.ln() / 2f64.ln() - 0.89 * 0.89f64.ln() / 2f64.ln();
        assert!((binary_entropy(0.11).unwrap() - direct).abs() < 1e-15);
        assert!((binary_entropy(0.11).unwrap() - 0.499_916).abs() < 1e-6);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn nayak_values() {
        assert_eq!(nayak_min_qubits(8.0, 1.0).unwrap(), 8.0);
        assert!(nayak_min_qubits(8.0, 0.5).unwrap().abs() < 1e-15);
        assert!((nayak_min_qubits(8.0, 0.9).unwrap() - 4.249).abs() < 1e-3);
    }

    #[test]
    fn uphp_bound_values() {
        assert!((uphp_lower_bound(6, 0.0).unwrap() - 8.0).abs() < 1e-12);
        let b = uphp_lower_bound(2, 0.1).unwrap();
        assert!((b.log2() - (1.0 - binary_entropy(0.2).unwrap())).abs() < 1e-12);
        assert!((b - 1.213).abs() < 1e-3);
        assert!(20.0 >= uphp_lower_bound_log2(2, 0.1).unwrap());
        assert!(uphp_lower_bound(2, 0.5).is_err());
    }

    #[test]
    fn fidelity_bound_examples() {
        let v = pbsp_fidelity_bound_check(2, 2, 0.75).unwrap();
        assert!(v.lhs.abs() < 1e-15);
        assert!((v.rhs - 4.0).abs() < 1e-15);
        assert!(v.satisfied);
        for d in [2, 4, 8, 16] {
            assert!(pbsp_fidelity_bound_check(d, 1, success_probability(d, 1)).unwrap().satisfied);
        }
        let v = pbsp_fidelity_bound_check(16, 1, 1.0).unwrap();
        assert_eq!(v.lhs, 1.0);
        assert!(v.satisfied);
        assert!(!pbsp_fidelity_bound_check(64, 1, 1.0).unwrap().satisfied);
        // outside the derivation's regime the inequality is not claimed
        let f = success_probability(53, 1);
        assert!(!pbsp_fidelity_bound_applies(f));
        assert!(!pbsp_fidelity_bound_check(53, 1, f).unwrap().satisfied);
    }

    #[test]
    fn average_fidelity() {
        assert_eq!(avg_from_entanglement_fidelity(1.0, 3), 1.0);
        assert!((avg_from_entanglement_fidelity(0.0, 2) - 1.0 / 3.0).abs() < 1e-15);
        let f = pbt_entanglement_fidelity(&PgmSpec::new(2, 1).unwrap()).unwrap();
        assert!((avg_from_entanglement_fidelity(f, 2) - 0.5).abs() < 1e-12);
    }

    fn targets(d: usize, rng: &mut SeededRng) -> Vec<StateVector> {
        let layout = RegisterLayout::single(DATA_LABEL, d).unwrap();
        let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut out = alloc::vec![
            StateVector::basis(layout.clone(), 0).unwrap(),
            StateVector::basis(layout.clone(), d - 1).unwrap(),
            StateVector::new(layout, alloc::vec![amp; d]).unwrap(),
        ];
        for _ in 0..3 {
            out.push(haar_state(d, rng).unwrap());
        }
        out
    }

    #[test]
    fn prob_certificate_examples() {
        let mut rng = SeededRng::new(40);
        for (d, n, p) in [(2, 2, 0.75), (3, 2, 5.0 / 9.0)] {
            let psi = haar_state(d, &mut rng).unwrap();
            let c = nonsignaling_prob_certificate(&psi, &ResourceSpec::new(d, n).unwrap()).unwrap();
            assert!(c.passed);
            assert!((c.p_t1 - p).abs() < 1e-10);
            assert!((c.p_t2 - p).abs() < 1e-10);
            assert!((c.p_t2 - c.abort_term - c.protocol_success).abs() < 1e-10);
        }
    }

    #[test]
    fn fid_certificate_examples() {
        let mut rng = SeededRng::new(41);
        for (n, fail) in [(2, 0.25), (3, 0.125)] {
            let psi = haar_state(2, &mut rng).unwrap();
            let c = nonsignaling_fid_certificate(&psi, &ResourceSpec::new(2, n).unwrap()).unwrap();
            assert!(c.passed);
            assert!((c.direct - fail).abs() < 1e-10);
            assert!((c.residual_sum - fail).abs() < 1e-10);
            assert!(c.marginal_defect < 1e-10);
            assert!(c.saturated());
        }
    }

    #[test]
    fn certificates_pass_on_adversarial_targets() {
        let mut rng = SeededRng::new(42);
        for d in 2..=3 {
            for n in 1..=3 {
                let spec = ResourceSpec::new(d, n).unwrap();
                for psi in targets(d, &mut rng) {
                    assert!(nonsignaling_prob_certificate(&psi, &spec).unwrap().passed, "d={d} N={n}");
                    let c = nonsignaling_fid_certificate(&psi, &spec).unwrap();
                    assert!(c.passed && c.saturated(), "d={d} N={n}");
                }
            }
        }
    }

    #[test]
    fn certificates_need_dense_budget() {
        let psi = StateVector::basis(RegisterLayout::single(DATA_LABEL, 2).unwrap(), 0).unwrap();
        let spec = ResourceSpec::new(2, 5).unwrap().with_budget(64);
        assert!(matches!(nonsignaling_prob_certificate(&psi, &spec), Err(Error::Capacity { .. })));
        assert!(matches!(nonsignaling_fid_certificate(&psi, &spec), Err(Error::Capacity { .. })));
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric_and_peaks_at_half(p in 0.0f64..=1.0) {
            let h = binary_entropy(p).unwrap();
            prop_assert!((h - binary_entropy(1.0 - p).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&h));
        }

        #[test]
        fn entropy_increases_towards_half(a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(binary_entropy(lo).unwrap() <= binary_entropy(hi).unwrap() + 1e-15);
        }

        #[test]
        fn uphp_bound_shrinks_with_error(d in 2usize..=64, a in 0.0f64..=0.25, b in 0.0f64..=0.25) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(uphp_lower_bound_log2(d, hi).unwrap() <= uphp_lower_bound_log2(d, lo).unwrap() + 1e-12);
        }

        #[test]
        fn fidelity_bound_rhs_grows_with_n(d in 2usize..=32, n in 1usize..=50) {
            let f = success_probability(d, n);
            let a = pbsp_fidelity_bound_check(d, n, f).unwrap();
            let b = pbsp_fidelity_bound_check(d, n + 1, f).unwrap();
            prop_assert!(b.rhs >= a.rhs);
        }

        #[test]
        fn constructed_fidelity_satisfies_bound(d in 2usize..=64, n in 1usize..=64) {
            prop_assume!(pbsp_fidelity_bound_applies(success_probability(d, n)));
            prop_assert!(pbsp_fidelity_bound_check(d, n, success_probability(d, n)).unwrap().satisfied);
        }
    }
}
