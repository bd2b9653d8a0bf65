use pbsp_core::bounds::{nayak_min_qubits, uphp_lower_bound_log2};
use pbsp_core::uphp::{build_qrac, plan_memory};

use super::{pairs, per_point, rng_for, Purpose};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Row, Verdict};

/// Port count and memory size for each `(d, ε)`.
pub fn uphp_plan(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.eps), |_, &(d, eps)| {
        let plan = plan_memory(d, eps)?;
        let row = |task: &str| Row::new(task).d(d).n(plan.n_ports).eps(eps);
        let slack_ok = plan.log2_slack >= -1e-9 && plan.log2_slack <= plan.max_log2_slack() + 1e-9;
        let mut rows = vec![
            row("plan-ports").formula(plan.n_ports as f64),
            row("plan-log2-memory").formula(plan.log2_m),
        ];
        if let Some(m) = plan.m {
            rows.push(row("plan-memory").formula(m as f64));
        }
        rows.push(row("plan-log2-upper-bound").formula(plan.log2_upper_bound));
        rows.push(row("plan-log2-slack").formula(plan.log2_slack).verdict(Verdict::from_check(slack_ok)));
        if eps < 0.5 {
            let lb = uphp_lower_bound_log2(d, eps)?;
            rows.push(row("plan-log2-lower-bound").formula(lb).verdict(Verdict::from_check(lb <= plan.log2_m * (1.0 + 1e-9))));
        } else {
            rows.push(row("plan-log2-lower-bound").verdict(Verdict::Vacuous));
        }
        Ok(rows)
    })
}

/// One random access code per `(d, ε)`: guessing probability for every index.
pub fn qrac_demo(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.eps), |i, &(d, eps)| {
        let k = d.trailing_zeros() as usize - 1;
        let mut bits = rng_for(cfg.seed, i, Purpose::Function);
        let f: Vec<bool> = (0..d / 2).map(|_| bits.below(2) == 1).collect();
        let q = build_qrac(&f, k, eps)?;
        let formula = q.closed_form_guess();
        let row = |task: String| Row::new(task).d(d).n(q.plan.n_ports).eps(eps);
        let mut rows = Vec::with_capacity(q.n_bits() + 3);
        for (x, &bit) in f.iter().enumerate() {
            let g = q.guess(x)?;
            let ok = (g - formula).abs() <= 1e-9 && g >= q.target();
            rows.push(row(format!("qrac-index-{x}-bit-{}", u8::from(bit))).formula(formula).dense(Some(g)).verdict(Verdict::from_check(ok)));
        }
        rows.push(row("qrac-target".into()).formula(q.target()));
        rows.push(row("qrac-log2-memory".into()).formula(q.plan.log2_m));
        let need = nayak_min_qubits(q.n_bits() as f64, q.target())?;
        rows.push(row("qrac-nayak-min".into()).formula(need).verdict(Verdict::from_check(q.nayak_consistent()?)));
        Ok(rows)
    })
}
