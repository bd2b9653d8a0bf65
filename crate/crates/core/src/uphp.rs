//! Universal programmable hybrid processor (UPHP) built from the
//! deterministic port protocol, and the random access code it yields.
//!
//! The program state for a unitary `U` is `N` copies of `(I ⊗ U)φ⁺_d`.
//! Running the deterministic protocol for a classical input `ψ` on it leaves
//! `U ρ_{B_x} U†` on the announced port, so the processor inherits the
//! protocol's input-independent fidelity.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bounds::nayak_min_qubits;
use crate::error::{Error, Result};
use crate::linalg::{embed_local, partial_trace_matrix, trace_distance, DensityOperator, HermitianOperator, Matrix, RegisterLayout, StateVector};
use crate::pbsp::{abort_probability, det_povm_with_budget, run_with_resource, success_probability, Povm, Variant};
use crate::states::{
    bob_label, boolean_unitary, program_state_with_budget, ResourceSpec, Unitary, DATA_LABEL, DEFAULT_DENSE_BUDGET,
};

/// Port count, memory size and how far the integer port count overshoots the
/// real-valued memory bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryPlan {
    pub d: usize,
    pub epsilon: f64,
    pub n_ports: usize,
    /// `log₂ m = 2N log₂ d`.
    pub log2_m: f64,
    /// `m = d^{2N}` when it fits in 128 bits.
    pub m: Option<u128>,
    /// `log₂ (1/ε)^{4 d ln d}`, the memory the real-valued port count needs.
    pub log2_upper_bound: f64,
    /// `log₂ m − log₂ bound`; rounding `N` up costs at most `2 log₂ d`.
    pub log2_slack: f64,
}

impl MemoryPlan {
    /// Largest slack rounding can cause: a factor `d²`.
    pub fn max_log2_slack(&self) -> f64 {
        2.0 * (self.d as f64).log2()
    }
}

/// `N = ⌈d ln(1/ε²)⌉` (at least 1) and `m = d^{2N}`.
pub fn plan_memory(d: usize, epsilon: f64) -> Result<MemoryPlan> {
    if d < 2 {
        return Err(Error::Domain(format!("data dimension must be at least 2, got {d}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("error parameter must lie in (0, 1), got {epsilon}")));
    }
    let df = d as f64;
    let real_n = -2.0 * df * epsilon.ln();
    // absorb rounding so exact integers such as 2·ln(e²) = 4 are not bumped
    let n_ports = ((real_n - 1e-9 * real_n.max(1.0)).ceil() as usize).max(1);
    let log2_m = 2.0 * n_ports as f64 * df.log2();
    let m = u32::try_from(2 * n_ports).ok().and_then(|e| (d as u128).checked_pow(e));
    let log2_upper_bound = 4.0 * df * df.ln() * (1.0 / epsilon).log2();
    Ok(MemoryPlan { d, epsilon, n_ports, log2_m, m, log2_upper_bound, log2_slack: log2_m - log2_upper_bound })
}

/// Processor loaded with the program state for `U` on `N` ports.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridProcessor {
    program: Unitary,
    n_ports: usize,
    dense_budget: usize,
}

impl HybridProcessor {
    pub fn new(program: Unitary, n_ports: usize) -> Result<Self> {
        if program.dim() < 2 {
            return Err(Error::Domain("program unitary must act on dimension at least 2".into()));
        }
        if n_ports < 1 {
            return Err(Error::Domain("at least one port is required".into()));
        }
        Ok(Self { program, n_ports, dense_budget: DEFAULT_DENSE_BUDGET })
    }

    pub fn with_budget(mut self, dense_budget: usize) -> Self {
        self.dense_budget = dense_budget;
        self
    }

    pub fn d(&self) -> usize {
        self.program.dim()
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn program(&self) -> &Unitary {
        &self.program
    }

    pub fn memory_log2(&self) -> f64 {
        2.0 * self.n_ports as f64 * (self.d() as f64).log2()
    }

    /// `d^{2N}`, `None` past 128 bits.
    pub fn memory_dim(&self) -> Option<u128> {
        u32::try_from(2 * self.n_ports).ok().and_then(|e| (self.d() as u128).checked_pow(e))
    }

    /// `1 − (1 − 1/d)^N`, the fidelity of every output with `U|ψ⟩`.
    pub fn fidelity(&self) -> f64 {
        success_probability(self.d(), self.n_ports)
    }

    pub fn resource_spec(&self) -> Result<ResourceSpec> {
        Ok(ResourceSpec::new(self.d(), self.n_ports)?.with_budget(self.dense_budget))
    }
}

/// Output `F U|ψ⟩⟨ψ|U† + (1 − F) U(I − |ψ⟩⟨ψ|)U†/(d − 1)` on register `D`,
/// from the closed form; the memory is never materialized.
pub fn apply_processor(psi: &StateVector, proc: &HybridProcessor) -> Result<DensityOperator> {
    let d = proc.d();
    if psi.dim() != d {
        return Err(Error::Domain(format!("input has dimension {} but processor has d = {d}", psi.dim())));
    }
    let f = proc.fidelity();
    let out = proc.program.apply(psi)?;
    let proj = DensityOperator::from_pure(&out).matrix().clone();
    let orth = &Matrix::identity(d) - &proj;
    let mut m = proj.scale_real(f);
    m.add_scaled(&orth, (1.0 - f) / (d - 1) as f64);
    DensityOperator::new(RegisterLayout::single(DATA_LABEL, d)?, m)
}

/// Same output computed by running the deterministic protocol on the dense
/// program state.
pub fn apply_processor_dense(psi: &StateVector, proc: &HybridProcessor) -> Result<DensityOperator> {
    let spec = proc.resource_spec()?;
    let program = program_state_with_budget(&proc.program, proc.n_ports, proc.dense_budget)?;
    run_with_resource(psi, &spec, Variant::Deterministic, &program)?.output_state(DATA_LABEL)
}

/// `√(1 − F) = (1 − 1/d)^{N/2}`, an upper bound on `½‖output − U ψ U†‖₁`.
pub fn trace_error(proc: &HybridProcessor) -> f64 {
    abort_probability(proc.d(), proc.n_ports).sqrt()
}

/// Measured `½‖output − U ψ U†‖₁` for one input.
pub fn measured_trace_distance(psi: &StateVector, proc: &HybridProcessor) -> Result<f64> {
    let out = apply_processor(psi, proc)?;
    let ideal = proc.program.apply(psi)?.relabel(out.layout().clone())?;
    trace_distance(&out, &DensityOperator::from_pure(&ideal))
}

/// Random access code from a processor programmed with `U_f`, where
/// `U_f |x⟩|y⟩ = |x⟩|y ⊕ f(x)⟩` on `d = 2^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QracInstance {
    pub k: usize,
    pub f: Vec<bool>,
    pub epsilon: f64,
    pub plan: MemoryPlan,
    pub processor: HybridProcessor,
}

/// Builds the code for `f` (length `2^k`) with port count from
/// [`plan_memory`]`(2^{k+1}, ε)`. Requires `0 < ε < ¼`.
pub fn build_qrac(f: &[bool], k: usize, epsilon: f64) -> Result<QracInstance> {
    if k < 1 || k >= usize::BITS as usize - 2 {
        return Err(Error::Domain(format!("index bits must be at least 1, got {k}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::Domain(format!("error parameter must lie in (0, 1/4), got {epsilon}")));
    }
    let d = 1usize << (k + 1);
    let plan = plan_memory(d, epsilon)?;
    let processor = HybridProcessor::new(boolean_unitary(f, k)?, plan.n_ports)?;
    Ok(QracInstance { k, f: f.to_vec(), epsilon, plan, processor })
}

impl QracInstance {
    pub fn d(&self) -> usize {
        self.processor.d()
    }

    /// Number of encoded bits, `2^k = d/2`.
    pub fn n_bits(&self) -> usize {
        self.f.len()
    }

    /// Probability that the last output qubit reads `f(x)` when the
    /// processor runs on `|x, 0⟩`.
    pub fn guess(&self, x: usize) -> Result<f64> {
        if x >= self.n_bits() {
            return Err(Error::Domain(format!("index {x} outside 0..{}", self.n_bits())));
        }
        let layout = RegisterLayout::single(DATA_LABEL, self.d())?;
        let input = StateVector::basis(layout, 2 * x)?;
        let out = apply_processor(&input, &self.processor)?;
        let y = usize::from(self.f[x]);
        Ok((0..self.n_bits()).map(|a| out.matrix()[(2 * a + y, 2 * a + y)].re).sum())
    }

    /// `F + (1 − F)(d/2 − 1)/(d − 1)`, the same for every index.
    pub fn closed_form_guess(&self) -> f64 {
        let f = self.processor.fidelity();
        let d = self.d() as f64;
        f + (1.0 - f) * (d / 2.0 - 1.0) / (d - 1.0)
    }

    /// Smallest guessing probability over all indices.
    pub fn min_guess(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for x in 0..self.n_bits() {
            lo = lo.min(self.guess(x)?);
        }
        Ok(lo)
    }

    /// `1 − 2ε`
    pub fn target(&self) -> f64 {
        1.0 - 2.0 * self.epsilon
    }

    /// `log₂ m ≥ (d/2)(1 − h(2ε))` must hold for any such code.
    pub fn nayak_consistent(&self) -> Result<bool> {
        let need = nayak_min_qubits(self.n_bits() as f64, self.target())?;
        Ok(self.processor.memory_log2() >= need - 1e-9 * need.abs().max(1.0))
    }
}

/// Memory measurement `{M_x^0, M_x^1}` reading bit `y` of index `x`:
/// `M_x^y = Σ_j M'_j ⊗ (I_{d/2} ⊗ |y⟩⟨y|)_{B_j}`, the pull-back of the
/// last-qubit measurement through the processor with input `|x, 0⟩`.
/// Dense, so only for small `N`.
pub fn qrac_measurement_povm(proc: &HybridProcessor, x: usize) -> Result<Povm> {
    let d = proc.d();
    if !d.is_multiple_of(2) {
        return Err(Error::Domain(format!("data dimension {d} has no trailing qubit")));
    }
    if x >= d / 2 {
        return Err(Error::Domain(format!("index {x} outside 0..{}", d / 2)));
    }
    let spec = proc.resource_spec()?;
    let dim = spec.check_dense()?;
    let layout = spec.layout();
    let input = StateVector::basis(RegisterLayout::single(DATA_LABEL, d)?, 2 * x)?;
    let ports = det_povm_with_budget(&input, proc.n_ports, proc.dense_budget)?;
    let alice = spec.alice_labels();
    let mut elements = Vec::with_capacity(2);
    for y in 0..2 {
        let bit = Matrix::from_real_diagonal(&(0..d).map(|i| if i % 2 == y { 1.0 } else { 0.0 }).collect::<Vec<_>>());
        let mut total = Matrix::zeros(dim, dim);
        for (element, &j) in ports.elements().iter().zip(ports.labels()) {
            let b: String = bob_label(j);
            let mut labels: Vec<&str> = alice.iter().map(|s| s.as_str()).collect();
            labels.push(&b);
            total.add_scaled(&embed_local(&layout, &element.matrix().kron(&bit), &labels)?, 1.0);
        }
        elements.push(HermitianOperator::from_rounded(layout.clone(), &total)?);
    }
    Povm::from_parts(layout, elements, alloc::vec![0, 1])?
        .validated(crate::pbsp::POVM_COMPLETENESS_TOL, crate::pbsp::POVM_PSD_TOL)
}

/// Channel-then-measure readout `[Pr(y = 0), Pr(y = 1)]` of the last output
/// qubit when the processor with input `|x, 0⟩` runs on memory state `rho`.
/// Dense reference for [`qrac_measurement_povm`].
pub fn qrac_channel_readout(proc: &HybridProcessor, x: usize, rho: &DensityOperator) -> Result<[f64; 2]> {
    let d = proc.d();
    if !d.is_multiple_of(2) || x >= d / 2 {
        return Err(Error::Domain(format!("index {x} invalid for data dimension {d}")));
    }
    let spec = proc.resource_spec()?;
    spec.check_dense()?;
    let layout = spec.layout();
    if rho.layout() != &layout {
        return Err(Error::Layout(format!("memory state lives on {}, expected {layout}", rho.layout())));
    }
    let input = StateVector::basis(RegisterLayout::single(DATA_LABEL, d)?, 2 * x)?;
    let ports = det_povm_with_budget(&input, proc.n_ports, proc.dense_budget)?;
    let alice = spec.alice_labels();
    let alice: Vec<&str> = alice.iter().map(|s| s.as_str()).collect();
    let mut out = Matrix::zeros(d, d);
    for (m, &j) in ports.elements().iter().zip(ports.labels()) {
        let applied = embed_local(&layout, m.matrix(), &alice)?.matmul(rho.matrix());
        out.add_scaled(&partial_trace_matrix(&layout, &applied, &[bob_label(j)])?.1, 1.0);
    }
    let read = |y: usize| (0..d / 2).map(|a| out[(2 * a + y, 2 * a + y)].re).sum::<f64>();
    Ok([read(0), read(1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fidelity;
    use crate::states::{haar_state, haar_unitary, SeededRng};
    use proptest::prelude::*;

    #[test]
    fn plan_examples() {
        let p = plan_memory(2, (-1.0f64).exp()).unwrap();
        assert_eq!(p.n_ports, 4);
        assert_eq!(p.m, Some(256));
        let p = plan_memory(2, 0.1).unwrap();
        assert_eq!(p.n_ports, 10);
        assert_eq!(p.m, Some(1 << 20));
        // (1/ε)^{4 d ln d} = 10^{8 ln 2}
        let log10_bound = p.log2_upper_bound * 2f64.log10();
        assert!((log10_bound - 8.0 * 2f64.ln()).abs() < 1e-12);
        assert!((log10_bound - 5.545).abs() < 1e-3);
        assert!(p.log2_slack >= 0.0 && p.log2_slack <= p.max_log2_slack());
        let p = plan_memory(3, 0.999_999).unwrap();
        assert_eq!(p.n_ports, 1);
        assert_eq!(p.m, Some(9));
    }

    #[test]
    fn plan_rejects_bad_epsilon() {
        assert!(plan_memory(2, 1.0).is_err());
        assert!(plan_memory(2, 0.0).is_err());
        assert!(plan_memory(1, 0.5).is_err());
    }

    #[test]
    fn identity_program_reproduces_protocol_fidelity() {
        let mut rng = SeededRng::new(30);
        let proc = HybridProcessor::new(Unitary::identity(3), 4).unwrap();
        let psi = haar_state(3, &mut rng).unwrap();
        let out = apply_processor(&psi, &proc).unwrap();
        let f = out.overlap(&psi.relabel(out.layout().clone()).unwrap()).unwrap();
        assert!((f - success_probability(3, 4)).abs() < 1e-12);
    }

    #[test]
    fn random_program_fidelity() {
        let mut rng = SeededRng::new(31);
        let u = haar_unitary(2, &mut rng).unwrap();
        let proc = HybridProcessor::new(u.clone(), 3).unwrap();
        for _ in 0..20 {
            let psi = haar_state(2, &mut rng).unwrap();
            let out = apply_processor(&psi, &proc).unwrap();
            let target = DensityOperator::from_pure(&u.apply(&psi).unwrap());
            assert!((fidelity(&out, &target).unwrap() - 0.875).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_program_state_matches_closed_form() {
        let mut rng = SeededRng::new(32);
        for (d, n) in [(2, 1), (2, 2), (3, 2)] {
            let proc = HybridProcessor::new(haar_unitary(d, &mut rng).unwrap(), n).unwrap();
            let psi = haar_state(d, &mut rng).unwrap();
            let dense = apply_processor_dense(&psi, &proc).unwrap();
            let fast = apply_processor(&psi, &proc).unwrap();
            assert!(dense.matrix().max_abs_diff(fast.matrix()) < 1e-10, "d={d} N={n}");
        }
    }

    #[test]
    fn trace_error_bounds_measured_distance() {
        let mut rng = SeededRng::new(33);
        for _ in 0..20 {
            let proc = HybridProcessor::new(haar_unitary(2, &mut rng).unwrap(), 4).unwrap();
            assert!((trace_error(&proc) - 0.25).abs() < 1e-15);
            let psi = haar_state(2, &mut rng).unwrap();
            assert!(measured_trace_distance(&psi, &proc).unwrap() <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn trace_error_decreases_in_n() {
        let mut prev = 1.0;
        for n in 1..=20 {
            let e = trace_error(&HybridProcessor::new(Unitary::identity(2), n).unwrap());
            assert!(e < prev);
            prev = e;
        }
        assert_eq!(abort_probability(2, 0).sqrt(), 1.0);
    }

    #[test]
    fn processor_error_is_input_independent() {
        let mut rng = SeededRng::new(34);
        let proc = HybridProcessor::new(haar_unitary(3, &mut rng).unwrap(), 5).unwrap();
        let ds: Vec<f64> = (0..20)
            .map(|_| measured_trace_distance(&haar_state(3, &mut rng).unwrap(), &proc).unwrap())
            .collect();
        let lo = ds.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= 1e-10);
    }

    #[test]
    fn qrac_example_k1() {
        let q = build_qrac(&[true, false], 1, 0.2).unwrap();
        assert_eq!(q.d(), 4);
        assert_eq!(q.plan.n_ports, 13);
        let f = 1.0 - 0.75f64.powi(13);
        let want = f + (1.0 - f) / 3.0;
        // independent arithmetic: 1 − (2/3)(3/4)^13
        assert!((want - (1.0 - 2.0 / 3.0 * 0.75f64.powi(13))).abs() < 1e-15);
        assert!((want - 0.984_161_8).abs() < 1e-7);
        for x in 0..2 {
            assert!((q.guess(x).unwrap() - want).abs() < 1e-12);
        }
        assert!((q.closed_form_guess() - want).abs() < 1e-15);
        assert!(q.min_guess().unwrap() >= 0.6);
        assert!(q.nayak_consistent().unwrap());
    }

    #[test]
    fn qrac_guess_is_symmetric_under_flip() {
        let zeros = build_qrac(&[false; 4], 2, 0.1).unwrap();
        let ones = build_qrac(&[true; 4], 2, 0.1).unwrap();
        for x in 0..4 {
            let (a, b) = (zeros.guess(x).unwrap(), ones.guess(x).unwrap());
            assert!((a - b).abs() < 1e-14);
            assert!(a >= 0.8);
        }
    }

    #[test]
    fn qrac_rejects_bad_parameters() {
        assert!(build_qrac(&[true, false], 1, 0.25).is_err());
        assert!(build_qrac(&[true, false], 1, 0.0).is_err());
        assert!(build_qrac(&[true], 0, 0.1).is_err());
        assert!(build_qrac(&[true, false, true], 1, 0.1).is_err());
    }

    /// Random full-rank state on the memory registers.
    fn random_mixed(layout: &RegisterLayout, rng: &mut SeededRng) -> DensityOperator {
        let n = layout.total_dim();
        let g = Matrix::from_fn(n, n, |_, _| rng.complex_normal());
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        DensityOperator::new(layout.clone(), m.scale_real(1.0 / tr)).unwrap()
    }

    #[test]
    fn qrac_measurement_matches_channel() {
        let mut rng = SeededRng::new(35);
        let proc = HybridProcessor::new(boolean_unitary(&[true, false], 1).unwrap(), 1).unwrap();
        let spec = proc.resource_spec().unwrap();
        for x in 0..2 {
            let povm = qrac_measurement_povm(&proc, x).unwrap();
            assert!(povm.completeness_residual() < 1e-10);
            assert!(povm.check().unwrap().min_eigenvalue > -1e-10);
            let input = StateVector::basis(RegisterLayout::single(DATA_LABEL, 4).unwrap(), 2 * x).unwrap();
            let ports = det_povm_with_budget(&input, 1, DEFAULT_DENSE_BUDGET).unwrap();
            let alice: Vec<String> = spec.alice_labels();
            let alice: Vec<&str> = alice.iter().map(|s| s.as_str()).collect();
            for _ in 0..20 {
                let rho = random_mixed(&spec.layout(), &mut rng);
                // channel oracle: measure ports, keep B_j, read the last qubit
                let mut out = Matrix::zeros(4, 4);
                for (m, &j) in ports.elements().iter().zip(ports.labels()) {
                    let full = embed_local(&spec.layout(), m.matrix(), &alice).unwrap();
                    let (_, part) = partial_trace_matrix(&spec.layout(), &full.matmul(rho.matrix()), &[bob_label(j)]).unwrap();
                    out = &out + &part;
                }
                let readout = qrac_channel_readout(&proc, x, &rho).unwrap();
                for y in 0..2 {
                    let direct: f64 = (0..2).map(|a| out[(2 * a + y, 2 * a + y)].re).sum();
                    let via = povm.element(y).unwrap().expectation_density(&rho).unwrap();
                    assert!((direct - via).abs() < 1e-10);
                    assert!((readout[y] - direct).abs() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn processor_fidelity_identity(d in 2usize..=4, n in 1usize..=30, seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let u = haar_unitary(d, &mut rng).unwrap();
            let proc = HybridProcessor::new(u.clone(), n).unwrap();
            let psi = haar_state(d, &mut rng).unwrap();
            let out = apply_processor(&psi, &proc).unwrap();
            let f = out.overlap(&u.apply(&psi).unwrap().relabel(out.layout().clone()).unwrap()).unwrap();
            prop_assert!((f - success_probability(d, n)).abs() < 1e-10);
        }

        #[test]
        fn qrac_meets_target(k in 1usize..=3, eps in 0.01f64..0.24, seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let f: Vec<bool> = (0..1usize << k).map(|_| rng.below(2) == 1).collect();
            let q = build_qrac(&f, k, eps).unwrap();
            prop_assert!(q.min_guess().unwrap() >= q.target());
            prop_assert!(q.nayak_consistent().unwrap());
        }

        #[test]
        fn memory_accounting(d in 2usize..=16, eps in 0.001f64..0.999) {
            let p = plan_memory(d, eps).unwrap();
            prop_assert_eq!(p.log2_m, 2.0 * p.n_ports as f64 * (d as f64).log2());
            prop_assert!(p.log2_slack <= p.max_log2_slack() + 1e-9);
        }
    }
}
