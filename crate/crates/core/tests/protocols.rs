use approx::assert_abs_diff_eq;

use pbsp_core::bounds::{avg_from_entanglement_fidelity, pbsp_fidelity_bound_check, uphp_lower_bound_log2};
use pbsp_core::pbsp::{
    run_deterministic, run_with_resource, sample_tally, structured_run, success_probability, SampleTally, Variant,
};
use pbsp_core::pbt::{fidelity_from_prob, pbt_entanglement_fidelity, prob_pbt_formula, PgmSpec};
use pbsp_core::states::{haar_state, haar_unitary, program_state, ResourceSpec, SeededRng, DATA_LABEL};
use pbsp_core::uphp::{apply_processor, plan_memory, HybridProcessor};
use pbsp_core::{Error, RegisterLayout, StateVector};

#[test]
fn program_state_rotates_every_port_state() {
    let mut rng = SeededRng::new(1);
    let u = haar_unitary(3, &mut rng).unwrap();
    let psi = haar_state(3, &mut rng).unwrap();
    let spec = ResourceSpec::new(3, 2).unwrap();
    let plain = run_deterministic(&psi, &spec).unwrap();
    let programmed = run_with_resource(&psi, &spec, Variant::Deterministic, &program_state(&u, 2).unwrap()).unwrap();
    for (a, b) in plain.outcomes.iter().zip(&programmed.outcomes) {
        assert_abs_diff_eq!(a.probability, b.probability, epsilon = 1e-12);
        let rotated = a.bob_state.as_ref().unwrap().conjugate_by(u.matrix()).unwrap();
        let got = b.bob_state.as_ref().unwrap();
        assert!(rotated.matrix().max_abs_diff(got.matrix()) < 1e-10);
    }
}

#[test]
fn merged_parallel_streams_estimate_fidelity() {
    let spec = ResourceSpec::new(3, 4).unwrap();
    let mut total = SampleTally::empty(Variant::Deterministic, 3, 4);
    for stream in 0..8 {
        let part = sample_tally(&spec, Variant::Deterministic, 5_000, &mut SeededRng::derive(99, stream)).unwrap();
        total.merge(&part).unwrap();
    }
    let f = success_probability(3, 4);
    assert_eq!(total.trials, 40_000);
    assert!((total.estimate() - f).abs() <= 4.0 * total.sigma(f));
    for x in 1..=4 {
        assert!((total.frequency(x) - 0.25).abs() < 0.02);
    }
}

#[test]
fn structured_processor_agrees_with_structured_protocol() {
    let mut rng = SeededRng::new(3);
    let psi = haar_state(4, &mut rng).unwrap();
    let proc = HybridProcessor::new(pbsp_core::states::Unitary::identity(4), 25).unwrap();
    let out = apply_processor(&psi, &proc).unwrap();
    let run = structured_run(&psi, &ResourceSpec::new(4, 25).unwrap(), Variant::Deterministic).unwrap();
    let avg = run.output_state(DATA_LABEL).unwrap();
    assert!(out.matrix().max_abs_diff(avg.matrix()) < 1e-12);
}

#[test]
fn pbsp_outperforms_standard_pbt() {
    for n in 1..=4 {
        let f_pbt = pbt_entanglement_fidelity(&PgmSpec::new(2, n).unwrap()).unwrap();
        let f_prob = fidelity_from_prob(prob_pbt_formula(2, n), 2);
        assert!(success_probability(2, n) > f_pbt);
        assert!(success_probability(2, n) > f_prob);
        assert!(avg_from_entanglement_fidelity(f_pbt, 2) >= f_pbt);
    }
}

#[test]
fn constructed_memory_exceeds_lower_bound() {
    for d in [2usize, 4, 8, 16] {
        for eps in [0.2, 0.1, 0.01] {
            let plan = plan_memory(d, eps).unwrap();
            assert!(plan.log2_m >= uphp_lower_bound_log2(d, eps).unwrap());
            let v = pbsp_fidelity_bound_check(d, plan.n_ports, success_probability(d, plan.n_ports)).unwrap();
            assert!(v.satisfied, "d={d} ε={eps}: {v:?}");
        }
    }
}

#[test]
fn errors_are_typed() {
    let psi = StateVector::basis(RegisterLayout::single(DATA_LABEL, 2).unwrap(), 0).unwrap();
    let spec = ResourceSpec::new(2, 12).unwrap().with_budget(1 << 16);
    assert!(matches!(run_deterministic(&psi, &spec), Err(Error::Capacity { .. })));
    assert!(matches!(ResourceSpec::new(1, 3), Err(Error::Domain(_))));
    assert!(matches!(plan_memory(2, 1.5), Err(Error::Domain(_))));
}
