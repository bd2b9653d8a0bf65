//! Port-based state preparation.
//!
//! Alice holds `A1..AN` of `N` copies of `φ⁺_d`, measures the port POVM built
//! from the classical description of `ψ`, and announces the outcome `x`; Bob's
//! register `B_x` then holds `ψ` (probabilistic variant, `x ≥ 1`) or a state
//! close to it (deterministic variant).
//!
//! Three evaluators are provided: a dense oracle on the full `d^{2N}` state,
//! a closed-form structured path valid for any `N`, and Monte Carlo sampling.

mod formulas;
mod povm;
mod sampling;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

pub use formulas::{
    abort_probability, binomial_identity_lhs, deterministic_orthogonal_weight,
    deterministic_port_probability, port_success_weight, success_probability,
};
pub use povm::{
    det_povm, det_povm_with_budget, prob_povm, prob_povm_with_budget, Povm, PovmCheck,
    POVM_COMPLETENESS_TOL, POVM_PSD_TOL,
};
pub use sampling::{sample_outcomes, sample_tally, worst_case_fidelity, SampleTally, SampledRun, WorstCaseEstimate};

use crate::error::{Error, Result};
use crate::linalg::{apply_local, partial_trace_outer, DensityOperator, Matrix, RegisterLayout, StateVector};
use crate::states::{bob_label, resource_state, ResourceSpec};

/// Outcomes with probability below this carry no conditional state.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Outcomes `0..N`, `0` = abort.
    Probabilistic,
    /// Outcomes `1..N`, never aborts.
    Deterministic,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Probabilistic => "probabilistic",
            Variant::Deterministic => "deterministic",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One measurement outcome and Bob's conditional state on port `B_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub outcome: usize,
    pub probability: f64,
    /// `None` for the abort outcome and for outcomes of negligible probability.
    pub bob_state: Option<DensityOperator>,
}

/// Exact or empirical description of one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelResult {
    pub variant: Variant,
    pub outcomes: Vec<ProtocolOutcome>,
    /// `Σ_{x≥1} p_x`.
    pub success_probability: f64,
    /// Probabilistic: smallest fidelity to `ψ` over success outcomes (NaN when
    /// none occurred). Deterministic: channel fidelity `Σ_x p_x F(ρ_{B_x}, ψ)`.
    pub worst_case_fidelity_estimate: f64,
}

impl ChannelResult {
    /// Computes the summary fields from outcomes and the target state.
    pub fn from_outcomes(variant: Variant, outcomes: Vec<ProtocolOutcome>, psi: &StateVector) -> Result<Self> {
        let success_probability = outcomes.iter().filter(|o| o.outcome >= 1).map(|o| o.probability).sum();
        let mut min_fid = f64::NAN;
        let mut weighted = 0.0;
        for o in outcomes.iter().filter(|o| o.outcome >= 1) {
            if let Some(rho) = &o.bob_state {
                let f = state_fidelity(rho, psi)?;
                weighted += o.probability * f;
                min_fid = if min_fid.is_nan() { f } else { min_fid.min(f) };
            }
        }
        let worst_case_fidelity_estimate = match variant {
            Variant::Probabilistic => min_fid,
            Variant::Deterministic => weighted,
        };
        Ok(Self { variant, outcomes, success_probability, worst_case_fidelity_estimate })
    }

    pub fn outcome(&self, x: usize) -> Option<&ProtocolOutcome> {
        self.outcomes.iter().find(|o| o.outcome == x)
    }

    pub fn probability(&self, x: usize) -> f64 {
        self.outcome(x).map_or(0.0, |o| o.probability)
    }

    /// `Σ_{x≥1} p_x F(ρ_{B_x}, ψ)`; for the probabilistic variant this is the
    /// success probability times the conditional fidelity.
    pub fn channel_fidelity(&self, psi: &StateVector) -> Result<f64> {
        let mut f = 0.0;
        for o in self.outcomes.iter().filter(|o| o.outcome >= 1) {
            if let Some(rho) = &o.bob_state {
                f += o.probability * state_fidelity(rho, psi)?;
            }
        }
        Ok(f)
    }

    /// Bob's output averaged over success outcomes and renormalized, on a
    /// single register labeled `label`.
    pub fn output_state(&self, label: &str) -> Result<DensityOperator> {
        let mut acc: Option<(RegisterLayout, Matrix)> = None;
        let mut total = 0.0;
        for o in self.outcomes.iter().filter(|o| o.outcome >= 1) {
            let Some(rho) = &o.bob_state else { continue };
            let (layout, m) = acc.get_or_insert_with(|| {
                let d = rho.dim();
                (RegisterLayout::single(label, d).expect("nonzero dim"), Matrix::zeros(d, d))
            });
            if layout.total_dim() != rho.dim() {
                return Err(Error::Layout("port states have different dimensions".into()));
            }
            m.add_scaled(rho.matrix(), o.probability);
            total += o.probability;
        }
        let (layout, m) = acc.ok_or_else(|| Error::Domain("no success outcome carries a state".into()))?;
        DensityOperator::new(layout, m.scale_real(1.0 / total))
    }

    /// Largest deviation in outcome probabilities or port states.
    pub fn max_abs_diff(&self, other: &ChannelResult) -> f64 {
        let mut worst = (self.success_probability - other.success_probability).abs();
        let labels = self.outcomes.iter().chain(&other.outcomes).map(|o| o.outcome);
        for x in labels {
            worst = worst.max((self.probability(x) - other.probability(x)).abs());
            let a = self.outcome(x).and_then(|o| o.bob_state.as_ref());
            let b = other.outcome(x).and_then(|o| o.bob_state.as_ref());
            match (a, b) {
                (Some(a), Some(b)) if a.dim() == b.dim() => worst = worst.max(a.matrix().max_abs_diff(b.matrix())),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
        worst
    }
}

/// `⟨ψ|ρ|ψ⟩` for a single-register `ρ`, ignoring register labels.
pub fn state_fidelity(rho: &DensityOperator, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::Layout(format!("state of dimension {} vs target of dimension {}", rho.dim(), psi.dim())));
    }
    let psi = psi.relabel(rho.layout().clone())?;
    Ok(rho.overlap(&psi)?.clamp(0.0, 1.0))
}

fn check_target(psi: &StateVector, spec: &ResourceSpec) -> Result<()> {
    if psi.dim() != spec.d {
        return Err(Error::Domain(format!("target has dimension {} but resource has d = {}", psi.dim(), spec.d)));
    }
    Ok(())
}

/// Dense evaluation of the probabilistic protocol on `N` copies of `φ⁺_d`.
pub fn run_probabilistic(psi: &StateVector, spec: &ResourceSpec) -> Result<ChannelResult> {
    spec.check_dense()?;
    run_with_resource(psi, spec, Variant::Probabilistic, &resource_state(spec)?)
}

/// Dense evaluation of the deterministic protocol on `N` copies of `φ⁺_d`.
pub fn run_deterministic(psi: &StateVector, spec: &ResourceSpec) -> Result<ChannelResult> {
    spec.check_dense()?;
    run_with_resource(psi, spec, Variant::Deterministic, &resource_state(spec)?)
}

/// Dense evaluation with an arbitrary pure resource on `A1..AN, B1..BN`.
pub fn run_with_resource(
    psi: &StateVector,
    spec: &ResourceSpec,
    variant: Variant,
    resource: &StateVector,
) -> Result<ChannelResult> {
    check_target(psi, spec)?;
    spec.check_dense()?;
    let layout = spec.layout();
    if resource.layout() != &layout {
        return Err(Error::Layout(format!("resource layout {} does not match {layout}", resource.layout())));
    }
    let povm = match variant {
        Variant::Probabilistic => prob_povm_with_budget(psi, spec.n_ports, spec.dense_budget)?,
        Variant::Deterministic => det_povm_with_budget(psi, spec.n_ports, spec.dense_budget)?,
    };
    let alice = spec.alice_labels();
    let alice: Vec<&str> = alice.iter().map(|s| s.as_str()).collect();
    let phi = resource.amplitudes();
    let mut outcomes = Vec::with_capacity(povm.len());
    for (element, &x) in povm.elements().iter().zip(povm.labels()) {
        let a = apply_local(&layout, phi, element.matrix(), &alice)?;
        let p: f64 = phi.iter().zip(&a).map(|(f, g)| (f.conj() * g).re).sum();
        let bob_state = if x == 0 || p < NEGLIGIBLE_PROBABILITY {
            None
        } else {
            let (l, m) = partial_trace_outer(&layout, &a, phi, &[bob_label(x)])?;
            Some(DensityOperator::new(l, m.hermitian_part().scale_real(1.0 / p))?)
        };
        outcomes.push(ProtocolOutcome { outcome: x, probability: p.clamp(0.0, 1.0), bob_state });
    }
    ChannelResult::from_outcomes(variant, outcomes, psi)
}

/// Dense state of port `B_port` conditioned on the abort outcome.
pub fn abort_port_state(psi: &StateVector, spec: &ResourceSpec, port: usize) -> Result<DensityOperator> {
    check_target(psi, spec)?;
    if port < 1 || port > spec.n_ports {
        return Err(Error::Domain(format!("port {port} outside 1..={}", spec.n_ports)));
    }
    spec.check_dense()?;
    let layout = spec.layout();
    let povm = prob_povm_with_budget(psi, spec.n_ports, spec.dense_budget)?;
    let m0 = povm.element(0).expect("abort element present");
    let alice = spec.alice_labels();
    let alice: Vec<&str> = alice.iter().map(|s| s.as_str()).collect();
    let phi = resource_state(spec)?;
    let a = apply_local(&layout, phi.amplitudes(), m0.matrix(), &alice)?;
    let (l, m) = partial_trace_outer(&layout, &a, phi.amplitudes(), &[bob_label(port)])?;
    let p = m.trace().re;
    if p < NEGLIGIBLE_PROBABILITY {
        return Err(Error::Numeric("abort outcome has negligible probability".into()));
    }
    DensityOperator::new(l, m.hermitian_part().scale_real(1.0 / p))
}

/// Closed-form evaluation valid for any `N`: each port independently holds
/// `ψ` with probability `1/d`, and the announced port is uniform over those
/// that do.
pub fn structured_run(psi: &StateVector, spec: &ResourceSpec, variant: Variant) -> Result<ChannelResult> {
    check_target(psi, spec)?;
    let (d, n) = (spec.d, spec.n_ports);
    let w = port_success_weight(d, n);
    let target = DensityOperator::from_pure(psi);
    let mut outcomes = Vec::with_capacity(n + 1);
    match variant {
        Variant::Probabilistic => {
            outcomes.push(ProtocolOutcome { outcome: 0, probability: abort_probability(d, n), bob_state: None });
            for x in 1..=n {
                let bob = DensityOperator::new(port_layout(x, d)?, target.matrix().clone())?;
                outcomes.push(ProtocolOutcome { outcome: x, probability: w, bob_state: Some(bob) });
            }
        }
        Variant::Deterministic => {
            let p = w + abort_probability(d, n) / n as f64;
            let c = deterministic_orthogonal_weight(d, n);
            let proj = target.matrix();
            let orth = &Matrix::identity(d) - proj;
            let mut m = proj.scale_real(w);
            m.add_scaled(&orth, c);
            let rho = m.scale_real(1.0 / p);
            for x in 1..=n {
                let bob = DensityOperator::new(port_layout(x, d)?, rho.clone())?;
                outcomes.push(ProtocolOutcome { outcome: x, probability: p, bob_state: Some(bob) });
            }
        }
    }
    ChannelResult::from_outcomes(variant, outcomes, psi)
}

fn port_layout(x: usize, d: usize) -> Result<RegisterLayout> {
    RegisterLayout::single(&bob_label(x), d)
}

/// Dense when `d^{2N}` fits in the budget, structured otherwise.
pub fn run_auto(psi: &StateVector, spec: &ResourceSpec, variant: Variant) -> Result<ChannelResult> {
    if spec.check_dense().is_ok() {
        run_with_resource(psi, spec, variant, &resource_state(spec)?)
    } else {
        structured_run(psi, spec, variant)
    }
}
