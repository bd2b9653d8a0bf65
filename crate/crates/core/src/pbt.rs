//! Standard port-based teleportation baseline: `N` EPR pairs and the pretty
//! good measurement (PGM) on Alice's side.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    apply_local, partial_trace_outer, pinv_sqrt, HermitianOperator, Matrix, RegisterLayout, StateVector, C64,
    PINV_CUTOFF,
};
use crate::pbsp::Povm;
use crate::states::{alice_label, bob_label, checked_pow, max_entangled_on, product_state, resource_state, ResourceSpec, DEFAULT_DENSE_BUDGET};

/// Completeness and positivity tolerance for the PGM.
pub const PGM_TOL: f64 = 1e-9;
/// Label of the register Alice teleports.
pub const INPUT_LABEL: &str = "A0";
/// Label of the reference purifying the teleported input.
pub const REFERENCE_LABEL: &str = "R";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmSpec {
    pub d: usize,
    pub n_ports: usize,
    /// Relative eigenvalue cutoff for the pseudo-inverse square root.
    pub cutoff: f64,
    pub dense_budget: usize,
}

impl PgmSpec {
    pub fn new(d: usize, n_ports: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("qudit dimension must be at least 2, got {d}")));
        }
        if n_ports < 1 {
            return Err(Error::Domain("at least one port is required".into()));
        }
        Ok(Self { d, n_ports, cutoff: PINV_CUTOFF, dense_budget: DEFAULT_DENSE_BUDGET })
    }

    pub fn with_budget(mut self, dense_budget: usize) -> Self {
        self.dense_budget = dense_budget;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// `A0, A1..AN`
    pub fn measurement_layout(&self) -> RegisterLayout {
        let regs = (0..=self.n_ports).map(|i| (alice_label(i), self.d));
        RegisterLayout::new(regs).expect("generated labels are unique")
    }

    fn check(&self, exponent: usize) -> Result<usize> {
        match checked_pow(self.d, exponent) {
            Some(dim) if dim <= self.dense_budget => Ok(dim),
            other => Err(Error::Capacity { required: other.unwrap_or(usize::MAX), budget: self.dense_budget }),
        }
    }
}

/// Normalized PGM signal `σ_x = φ⁺_{A0 Ax} ⊗ I / d^{N−1}` as a dense matrix.
fn signal(d: usize, n_ports: usize, x: usize) -> Matrix {
    let dim = d.pow(n_ports as u32 + 1);
    let weight = 1.0 / (d as f64 * (d as f64).powi(n_ports as i32 - 1));
    // digit k of an index, register A0 most significant
    let digit = |idx: usize, k: usize| (idx / d.pow((n_ports - k) as u32)) % d;
    Matrix::from_fn(dim, dim, |i, j| {
        let entangled = digit(i, 0) == digit(i, x) && digit(j, 0) == digit(j, x);
        let rest = (1..=n_ports).filter(|&k| k != x).all(|k| digit(i, k) == digit(j, k));
        if entangled && rest {
            C64::new(weight, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// PGM on `A0 A1..AN` with outcomes `1..N`. Any deficit `I − Σ M_x` left by a
/// rank-deficient signal average is shared equally among the outcomes.
pub fn pgm_povm(spec: &PgmSpec) -> Result<Povm> {
    spec.check(spec.n_ports + 1)?;
    let (d, n) = (spec.d, spec.n_ports);
    let layout = spec.measurement_layout();
    let dim = layout.total_dim();
    let signals: Vec<Matrix> = (1..=n).map(|x| signal(d, n, x)).collect();
    let mut rho = Matrix::zeros(dim, dim);
    for s in &signals {
        rho.add_scaled(s, 1.0);
    }
    let rho = HermitianOperator::from_rounded(layout.clone(), &rho)?;
    let inv = pinv_sqrt(&rho, spec.cutoff)?.into_matrix();
    let mut elements: Vec<Matrix> = signals.iter().map(|s| inv.matmul(s).matmul(&inv)).collect();
    let mut deficit = Matrix::identity(dim);
    for m in &elements {
        deficit.add_scaled(m, -1.0);
    }
    for m in elements.iter_mut() {
        m.add_scaled(&deficit, 1.0 / n as f64);
    }
    let elements = elements
        .iter()
        .map(|m| HermitianOperator::from_rounded(layout.clone(), m))
        .collect::<Result<Vec<_>>>()?;
    Povm::from_parts(layout, elements, (1..=n).collect())?.validated(PGM_TOL, PGM_TOL)
}

/// Entanglement fidelity of the standard protocol: half of `φ⁺_{R A0}` is
/// teleported and the weighted overlap of `(R, B_x)` with `φ⁺` is summed over
/// outcomes.
pub fn pbt_entanglement_fidelity(spec: &PgmSpec) -> Result<f64> {
    let povm = pgm_povm(spec)?;
    pbt_entanglement_fidelity_with(spec, &povm)
}

/// As [`pbt_entanglement_fidelity`] with a caller-supplied measurement on
/// `A0 A1..AN`.
pub fn pbt_entanglement_fidelity_with(spec: &PgmSpec, povm: &Povm) -> Result<f64> {
    spec.check(2 * spec.n_ports + 2)?;
    let (d, n) = (spec.d, spec.n_ports);
    if povm.layout() != &spec.measurement_layout() {
        return Err(Error::Layout(format!("measurement acts on {}", povm.layout())));
    }
    let input = max_entangled_on(d, REFERENCE_LABEL, INPUT_LABEL)?;
    let ports = resource_state(&ResourceSpec::new(d, n)?.with_budget(spec.dense_budget))?;
    let state = product_state(&[&input, &ports])?;
    let layout = state.layout().clone();
    let measured: Vec<String> = (0..=n).map(alice_label).collect();
    let measured: Vec<&str> = measured.iter().map(|s| s.as_str()).collect();
    let target = max_entangled_on(d, REFERENCE_LABEL, "B")?;
    let mut total = 0.0;
    for (element, &x) in povm.elements().iter().zip(povm.labels()) {
        let a = apply_local(&layout, state.amplitudes(), element.matrix(), &measured)?;
        let keep = [String::from(REFERENCE_LABEL), bob_label(x)];
        let (_, m) = partial_trace_outer(&layout, &a, state.amplitudes(), &keep)?;
        total += overlap(&m, &target);
    }
    Ok(total)
}

fn overlap(m: &Matrix, phi: &StateVector) -> f64 {
    let v = phi.amplitudes();
    let mv = m.apply(v);
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Success probability `N/(N − 1 + d²)` of probabilistic PBT with the
/// optimal measurement on EPR pairs.
pub fn prob_pbt_formula(d: usize, n_ports: usize) -> f64 {
    let n = n_ports as f64;
    n / (n - 1.0 + (d * d) as f64)
}

/// Entanglement fidelity `p + (1 − p)/d²` obtained by replacing a failure
/// with a random correction.
pub fn fidelity_from_prob(p: f64, d: usize) -> f64 {
    p + (1.0 - p) / (d * d) as f64
}

/// Lower bound `1 − (d² − 1)/N` on the standard protocol's entanglement
/// fidelity; vacuous when nonpositive.
pub fn standard_fidelity_bound(d: usize, n_ports: usize) -> f64 {
    1.0 - ((d * d) as f64 - 1.0) / n_ports as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbsp::success_probability;
    use proptest::prelude::*;

    /// Closed form for qubit standard PBT from the literature, used as an
    /// independent oracle for the dense PGM evaluation.
    fn qubit_oracle(n: usize) -> f64 {
        let nf = n as f64;
        let mut s = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            let kf = k as f64;
            let t = (nf - 2.0 * kf - 1.0) / (kf + 1.0).sqrt() + (nf - 2.0 * kf + 1.0) / (nf - kf + 1.0).sqrt();
            s += t * t * binom;
            binom = binom * (nf - kf) / (kf + 1.0);
        }
        s / 2f64.powi(n as i32 + 3)
    }

    #[test]
    fn single_port_pgm_is_identity() {
        let povm = pgm_povm(&PgmSpec::new(2, 1).unwrap()).unwrap();
        assert_eq!(povm.len(), 1);
        assert!(povm.elements()[0].matrix().max_abs_diff(&Matrix::identity(4)) < 1e-12);
    }

    #[test]
    fn pgm_is_valid() {
        for (d, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)] {
            let povm = pgm_povm(&PgmSpec::new(d, n).unwrap()).unwrap();
            let check = povm.check().unwrap();
            assert!(check.completeness_residual < 1e-9, "d={d} N={n}");
            assert!(check.min_eigenvalue > -1e-9, "d={d} N={n}");
        }
    }

    #[test]
    fn single_port_fidelity_is_one_quarter() {
        let f = pbt_entanglement_fidelity(&PgmSpec::new(2, 1).unwrap()).unwrap();
        assert!((f - 0.25).abs() < 1e-12);
    }

    #[test]
    fn qubit_fidelity_matches_closed_form() {
        for n in 1..=5 {
            let f = pbt_entanglement_fidelity(&PgmSpec::new(2, n).unwrap()).unwrap();
            assert!((f - qubit_oracle(n)).abs() < 1e-9, "N={n}: dense {f} vs {}", qubit_oracle(n));
        }
    }

    #[test]
    fn fidelity_is_monotone_and_respects_bound() {
        let mut prev = 0.0;
        for n in 1..=5 {
            let f = pbt_entanglement_fidelity(&PgmSpec::new(2, n).unwrap()).unwrap();
            assert!(f >= prev - 1e-12);
            assert!(f >= standard_fidelity_bound(2, n) - 1e-12);
            prev = f;
        }
        let f = pbt_entanglement_fidelity(&PgmSpec::new(3, 2).unwrap()).unwrap();
        assert!(f >= 1.0 / 9.0 - 1e-12);
    }

    #[test]
    fn capacity_error() {
        let spec = PgmSpec::new(2, 6).unwrap().with_budget(1 << 10);
        assert!(matches!(pbt_entanglement_fidelity(&spec), Err(Error::Capacity { .. })));
    }

    #[test]
    fn formula_rows() {
        assert!((prob_pbt_formula(2, 1) - 0.25).abs() < 1e-15);
        assert!((prob_pbt_formula(2, 100) - 100.0 / 103.0).abs() < 1e-15);
        assert!((fidelity_from_prob(1.0, 3) - 1.0).abs() < 1e-15);
        assert!((fidelity_from_prob(0.0, 2) - 0.25).abs() < 1e-15);
        let p = prob_pbt_formula(2, 5);
        assert!((fidelity_from_prob(p, 2) - 0.71875).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pbsp_dominates_prob_pbt(d in 2usize..=16, n in 1usize..=200) {
            prop_assert!(success_probability(d, n) >= prob_pbt_formula(d, n) - 1e-15);
        }

        #[test]
        fn prob_pbt_stays_below_one(d in 2usize..=16, n in 1usize..=100_000) {
            let p = prob_pbt_formula(d, n);
            prop_assert!(p > 0.0 && p < 1.0);
        }
    }
}
