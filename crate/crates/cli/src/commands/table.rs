use pbsp_core::bounds::{nayak_min_qubits, uphp_lower_bound_log2};
use pbsp_core::linalg::trace_distance;
use pbsp_core::pbsp::{run_deterministic, run_probabilistic, success_probability, Variant};
use pbsp_core::pbt::{fidelity_from_prob, pbt_entanglement_fidelity, prob_pbt_formula, standard_fidelity_bound, PgmSpec};
use pbsp_core::states::{ResourceSpec, SeededRng};
use pbsp_core::uphp::{apply_processor_dense, build_qrac, plan_memory, trace_error, HybridProcessor};
use pbsp_core::{DensityOperator, Error};

use super::{chunked_tally, close, haar_program, haar_target, pairs, per_point, rng_for, sample_verdict, Purpose};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Row, Verdict};

const DENSE_TOL: f64 = 1e-10;

/// `Ok(None)` when the dense evaluation does not fit the budget.
fn optional<T>(r: Result<T, Error>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Capacity { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Success probability and deterministic fidelity per `(d, N)`.
pub fn table_pbsp(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.n), |i, &(d, n)| {
        let rows = [
            ("pbsp-prob", success_probability(d, n)),
            ("pbsp-det", success_probability(d, n)),
        ];
        if d < 2 || n < 1 {
            return Ok(rows.iter().map(|&(t, f)| Row::new(t).d(d).n(n).formula(f).verdict(Verdict::Degenerate)).collect());
        }
        let spec = ResourceSpec::new(d, n)?.with_budget(cfg.dense_budget);
        let dense_ok = spec.check_dense().is_ok();
        let psi = haar_target(d, cfg.seed, i)?;
        let mut out = Vec::with_capacity(2);
        for (variant, (task, formula)) in [Variant::Probabilistic, Variant::Deterministic].into_iter().zip(rows) {
            let dense = if dense_ok {
                Some(match variant {
                    Variant::Probabilistic => run_probabilistic(&psi, &spec)?.success_probability,
                    Variant::Deterministic => run_deterministic(&psi, &spec)?.worst_case_fidelity_estimate,
                })
            } else {
                None
            };
            let tally = chunked_tally(&spec, variant, cfg.trials, cfg.seed, i)?;
            let (est, sigma) = (tally.estimate(), tally.sigma(formula));
            let mut verdict = sample_verdict(formula, est, sigma);
            if let Some(v) = dense {
                verdict = verdict.and(close(v, formula, DENSE_TOL));
            }
            out.push(Row::new(task).d(d).n(n).formula(formula).dense(dense).sampled(est, sigma).verdict(verdict));
        }
        Ok(out)
    })
}

/// Standard port-based teleportation baseline per `(d, N)`.
pub fn table_pbt(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.n), |_, &(d, n)| {
        let p = prob_pbt_formula(d, n);
        let bound = standard_fidelity_bound(d, n);
        let pgm = PgmSpec::new(d, n)?.with_budget(cfg.dense_budget);
        let dense = optional(pbt_entanglement_fidelity(&pgm))?;
        let verdict = match dense {
            _ if bound <= 0.0 => Verdict::Vacuous,
            Some(f) => Verdict::from_check(f >= bound - DENSE_TOL),
            None => Verdict::Unchecked,
        };
        Ok(vec![
            Row::new("pbt-prob").d(d).n(n).formula(p),
            Row::new("pbt-prob-fidelity").d(d).n(n).formula(fidelity_from_prob(p, d)),
            Row::new("pbt-ent-fidelity").d(d).n(n).formula(bound).dense(dense).verdict(verdict),
        ])
    })
}

/// Memory plan, bounds and accuracy of the programmable processor per `(d, ε)`.
pub fn table_uphp(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.eps), |i, &(d, eps)| {
        let plan = plan_memory(d, eps)?;
        let n = plan.n_ports;
        let row = |task: &str| Row::new(task).d(d).n(n).eps(eps);
        let lower = if eps < 0.5 {
            let lb = uphp_lower_bound_log2(d, eps)?;
            row("uphp-log2-lower-bound").formula(lb).verdict(Verdict::from_check(lb <= plan.log2_m + 1e-9 * plan.log2_m))
        } else {
            row("uphp-log2-lower-bound").verdict(Verdict::Vacuous)
        };
        let proc = HybridProcessor::new(haar_program(d, cfg.seed, i)?, n)?.with_budget(cfg.dense_budget);
        let (mut fid, mut dist) = (None, None);
        if proc.resource_spec()?.check_dense().is_ok() {
            let psi = haar_target(d, cfg.seed, i)?;
            let out = apply_processor_dense(&psi, &proc)?;
            let ideal = proc.program().apply(&psi)?.relabel(out.layout().clone())?;
            fid = Some(out.overlap(&ideal)?);
            dist = Some(trace_distance(&out, &DensityOperator::from_pure(&ideal))?);
        }
        let f = proc.fidelity();
        let err = trace_error(&proc);
        let fid_verdict = fid.map_or(Verdict::Unchecked, |v| close(v, f, 1e-9));
        let dist_verdict = dist.map_or(Verdict::Unchecked, |v| Verdict::from_check(v <= err + 1e-9));
        Ok(vec![
            row("uphp-ports").formula(n as f64),
            row("uphp-log2-memory").formula(plan.log2_m),
            row("uphp-log2-upper-bound").formula(plan.log2_upper_bound),
            lower,
            row("uphp-fidelity").formula(f).dense(fid).verdict(fid_verdict),
            row("uphp-trace-error").formula(err).dense(dist).verdict(dist_verdict),
        ])
    })
}

/// Random access code from the processor per `(d, ε)`, `d = 2^{k+1}`.
pub fn table_qrac(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.eps), |i, &(d, eps)| {
        let k = d.trailing_zeros() as usize - 1;
        let mut bits = rng_for(cfg.seed, i, Purpose::Function);
        let f: Vec<bool> = (0..d / 2).map(|_| bits.below(2) == 1).collect();
        let q = build_qrac(&f, k, eps)?;
        let n = q.plan.n_ports;
        let formula = q.closed_form_guess();
        let dense = q.min_guess()?;
        let est = sample_guess(&q.processor, cfg.trials, &mut rng_for(cfg.seed, i, Purpose::Guess));
        let sigma = (formula * (1.0 - formula) / cfg.trials as f64).sqrt();
        let verdict = Verdict::from_check(formula >= q.target())
            .and(close(dense, formula, 1e-9))
            .and(sample_verdict(formula, est, sigma));
        let need = nayak_min_qubits(q.n_bits() as f64, q.target())?;
        let row = |task: &str| Row::new(task).d(d).n(n).eps(eps);
        Ok(vec![
            row("qrac-guess").formula(formula).dense(Some(dense)).sampled(est, sigma).verdict(verdict),
            row("qrac-target").formula(q.target()),
            row("qrac-log2-memory").formula(q.plan.log2_m),
            row("qrac-nayak-min").formula(need).verdict(Verdict::from_check(q.nayak_consistent()?)),
        ])
    })
}

/// Each trial: every port holds the programmed output with probability
/// `1/d`; if none does, the output is uniform on the orthogonal complement,
/// which reads the right bit with probability `(d/2 − 1)/(d − 1)`.
fn sample_guess(proc: &HybridProcessor, trials: u64, rng: &mut SeededRng) -> f64 {
    let d = proc.d();
    let lucky = (d as f64 / 2.0 - 1.0) / (d as f64 - 1.0);
    let hits = (0..trials)
        .filter(|_| (0..proc.n_ports()).any(|_| rng.below(d) == 0) || rng.bernoulli(lucky))
        .count();
    hits as f64 / trials as f64
}
