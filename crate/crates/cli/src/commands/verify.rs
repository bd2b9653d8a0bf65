use pbsp_core::bounds::{
    nonsignaling_fid_certificate, nonsignaling_prob_certificate, pbsp_fidelity_bound_applies, pbsp_fidelity_bound_check,
    uphp_lower_bound_log2,
};
use pbsp_core::linalg::{fidelity, trace_distance};
use pbsp_core::pbsp::{
    det_povm_with_budget, prob_povm_with_budget, run_deterministic, run_probabilistic, structured_run, success_probability,
    Povm, Variant, POVM_COMPLETENESS_TOL, POVM_PSD_TOL,
};
use pbsp_core::pbt::{pbt_entanglement_fidelity_with, pgm_povm, standard_fidelity_bound, PgmSpec, PGM_TOL};
use pbsp_core::states::{boolean_unitary, SeededRng};
use pbsp_core::uphp::{
    apply_processor, apply_processor_dense, build_qrac, plan_memory, qrac_channel_readout, qrac_measurement_povm,
    trace_error, HybridProcessor,
};
use pbsp_core::{DensityOperator, Matrix, RegisterLayout};

use super::{close, haar_program, haar_target, pairs, per_point, rng_for, Purpose};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Row, Verdict};

const TOL: f64 = 1e-10;
/// Relative size of the injected completeness defect.
const PERTURBATION: f64 = 1e-3;

/// All invariant suites; every row must pass.
pub fn verify(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = per_point(&pairs(&cfg.d, &cfg.n), |i, &(d, n)| protocol_suite(cfg, i, d, n))?;
    let offset = cfg.d.len() * cfg.n.len();
    rows.extend(per_point(&cfg.d, |i, &d| fuchs_van_de_graaf(cfg.seed, offset + i, d))?);
    let offset = offset + cfg.d.len();
    rows.extend(per_point(&pairs(&cfg.d, &cfg.eps), |_, &(d, eps)| memory_bound(d, eps))?);
    rows.extend(per_point(&cfg.eps, |_, &eps| qrac_guess(eps))?);
    rows.push(qrac_pullback(cfg.seed, offset)?);
    Ok(rows)
}

fn completeness_row(task: &str, d: usize, n: usize, povm: &Povm, tol: f64) -> Result<Row, CliError> {
    let check = povm.check()?;
    Ok(Row::new(task)
        .d(d)
        .n(n)
        .formula(0.0)
        .dense(Some(check.completeness_residual))
        .verdict(Verdict::from_check(check.passes(tol, tol.max(POVM_PSD_TOL)))))
}

fn protocol_suite(cfg: &RunConfig, point: usize, d: usize, n: usize) -> Result<Vec<Row>, CliError> {
    let spec = pbsp_core::states::ResourceSpec::new(d, n)?.with_budget(cfg.dense_budget);
    spec.check_dense()?;
    let psi = haar_target(d, cfg.seed, point)?;
    let row = |task: &str| Row::new(task).d(d).n(n);
    let mut rows = Vec::new();

    let mut prob = prob_povm_with_budget(&psi, n, cfg.dense_budget)?;
    let mut det = det_povm_with_budget(&psi, n, cfg.dense_budget)?;
    if cfg.perturb {
        prob = prob.with_scaled_element(0, 1.0 + PERTURBATION)?;
        det = det.with_scaled_element(0, 1.0 + PERTURBATION)?;
    }
    rows.push(completeness_row("povm-completeness-prob", d, n, &prob, POVM_COMPLETENESS_TOL)?);
    rows.push(completeness_row("povm-completeness-det", d, n, &det, POVM_COMPLETENESS_TOL)?);

    let f = success_probability(d, n);
    let dense_prob = run_probabilistic(&psi, &spec)?;
    let dense_det = run_deterministic(&psi, &spec)?;
    let p = dense_prob.success_probability;
    let fid = dense_det.worst_case_fidelity_estimate;
    rows.push(row("dense-vs-formula-prob").formula(f).dense(Some(p)).verdict(close(p, f, TOL)));
    rows.push(row("dense-vs-formula-det").formula(f).dense(Some(fid)).verdict(close(fid, f, TOL)));
    let diff = dense_prob
        .max_abs_diff(&structured_run(&psi, &spec, Variant::Probabilistic)?)
        .max(dense_det.max_abs_diff(&structured_run(&psi, &spec, Variant::Deterministic)?));
    rows.push(row("dense-vs-structured").formula(0.0).dense(Some(diff)).verdict(Verdict::from_check(diff <= TOL)));

    let pc = nonsignaling_prob_certificate(&psi, &spec)?;
    rows.push(row("nonsignaling-prob").formula(pc.p_t1).dense(Some(pc.protocol_success)).verdict(Verdict::from_check(pc.passed)));
    let fc = nonsignaling_fid_certificate(&psi, &spec)?;
    let ok = fc.passed && fc.saturated();
    rows.push(row("nonsignaling-fid").formula(fc.failure_bound).dense(Some(fc.direct)).verdict(Verdict::from_check(ok)));

    let bound = if pbsp_fidelity_bound_applies(fid) {
        let v = pbsp_fidelity_bound_check(d, n, fid)?;
        row("fidelity-bound").formula(v.rhs).dense(Some(v.lhs)).verdict(Verdict::from_check(v.satisfied))
    } else {
        row("fidelity-bound").verdict(Verdict::NotApplicable)
    };
    rows.push(bound);

    let proc = HybridProcessor::new(haar_program(d, cfg.seed, point)?, n)?.with_budget(cfg.dense_budget);
    let out = apply_processor_dense(&psi, &proc)?;
    let closed = apply_processor(&psi, &proc)?;
    let ideal = proc.program().apply(&psi)?.relabel(out.layout().clone())?;
    let dist = trace_distance(&out, &DensityOperator::from_pure(&ideal))?;
    let err = trace_error(&proc);
    let ok = dist <= err + TOL && out.matrix().max_abs_diff(closed.matrix()) <= TOL;
    rows.push(row("uphp-trace-error").formula(err).dense(Some(dist)).verdict(Verdict::from_check(ok)));

    let pgm = PgmSpec::new(d, n)?.with_budget(cfg.dense_budget);
    let measurement = pgm_povm(&pgm)?;
    rows.push(completeness_row("pgm-completeness", d, n, &measurement, PGM_TOL)?);
    let ent = pbt_entanglement_fidelity_with(&pgm, &measurement)?;
    let lb = standard_fidelity_bound(d, n);
    let verdict = if lb <= 0.0 { Verdict::Vacuous } else { Verdict::from_check(ent >= lb - TOL) };
    rows.push(row("pbt-ent-bound").formula(lb).dense(Some(ent)).verdict(verdict));
    Ok(rows)
}

fn random_mixed(layout: &RegisterLayout, rng: &mut SeededRng) -> Result<DensityOperator, CliError> {
    let n = layout.total_dim();
    let g = Matrix::from_fn(n, n, |_, _| rng.complex_normal());
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    Ok(DensityOperator::new(layout.clone(), m.scale_real(1.0 / tr))?)
}

/// `1 − √F ≤ T ≤ √(1 − F)` on random mixed states.
fn fuchs_van_de_graaf(seed: u64, point: usize, d: usize) -> Result<Vec<Row>, CliError> {
    let mut rng = rng_for(seed, point, Purpose::Mixed);
    let layout = RegisterLayout::single("D", d)?;
    let (mut worst_lower, mut worst_upper) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..20 {
        let rho = random_mixed(&layout, &mut rng)?;
        let sigma = random_mixed(&layout, &mut rng)?;
        let f = fidelity(&rho, &sigma)?;
        let t = trace_distance(&rho, &sigma)?;
        worst_lower = worst_lower.min(t - (1.0 - f.sqrt()));
        worst_upper = worst_upper.min((1.0 - f).sqrt() - t);
    }
    let margin = worst_lower.min(worst_upper);
    Ok(vec![Row::new("fuchs-van-de-graaf").d(d).dense(Some(margin)).verdict(Verdict::from_check(margin >= -TOL))])
}

/// Planned memory meets the lower bound for every `(d, ε)` with `ε < ½`.
fn memory_bound(d: usize, eps: f64) -> Result<Vec<Row>, CliError> {
    let plan = plan_memory(d, eps)?;
    let lb = uphp_lower_bound_log2(d, eps)?;
    let ok = lb <= plan.log2_m * (1.0 + 1e-9) && plan.log2_slack >= -1e-9 && plan.log2_slack <= plan.max_log2_slack() + 1e-9;
    Ok(vec![Row::new("uphp-memory-bound")
        .d(d)
        .n(plan.n_ports)
        .eps(eps)
        .formula(lb)
        .dense(Some(plan.log2_m))
        .verdict(Verdict::from_check(ok))])
}

/// Two-bit code (`k = 1`): every index guessed at the closed-form rate,
/// which reaches `1 − 2ε`.
fn qrac_guess(eps: f64) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for f in [[false, false], [false, true], [true, false], [true, true]] {
        let q = build_qrac(&f, 1, eps)?;
        let formula = q.closed_form_guess();
        let dense = q.min_guess()?;
        let ok = (dense - formula).abs() <= 1e-9 && formula >= q.target() && q.nayak_consistent()?;
        let name = format!("qrac-guess-f{}{}", u8::from(f[0]), u8::from(f[1]));
        rows.push(Row::new(name).d(q.d()).n(q.plan.n_ports).eps(eps).formula(formula).dense(Some(dense)).verdict(Verdict::from_check(ok)));
    }
    Ok(rows)
}

/// The memory measurement reproduces the processor's readout on a random
/// mixed memory state (`d = 4`, one port).
fn qrac_pullback(seed: u64, point: usize) -> Result<Row, CliError> {
    let proc = HybridProcessor::new(boolean_unitary(&[false, true], 1)?, 1)?;
    let layout = proc.resource_spec()?.layout();
    let rho = random_mixed(&layout, &mut rng_for(seed, point, Purpose::Mixed))?;
    let mut worst: f64 = 0.0;
    for x in 0..2 {
        let povm = qrac_measurement_povm(&proc, x)?;
        let readout = qrac_channel_readout(&proc, x, &rho)?;
        for (y, element) in povm.elements().iter().enumerate() {
            worst = worst.max((element.expectation_density(&rho)? - readout[y]).abs());
        }
    }
    Ok(Row::new("qrac-pullback").d(4).n(1).formula(0.0).dense(Some(worst)).verdict(Verdict::from_check(worst <= TOL)))
}
