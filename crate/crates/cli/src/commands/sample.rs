use pbsp_core::pbsp::{abort_probability, deterministic_port_probability, port_success_weight, success_probability, Variant};
use pbsp_core::states::ResourceSpec;

use super::{chunked_tally, pairs, per_point, sample_verdict};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Row;

/// Monte Carlo estimates with per-outcome frequencies, each against its
/// closed form.
pub fn sample(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    per_point(&pairs(&cfg.d, &cfg.n), |i, &(d, n)| {
        let spec = ResourceSpec::new(d, n)?;
        let mut rows = Vec::new();
        for variant in [Variant::Probabilistic, Variant::Deterministic] {
            let tally = chunked_tally(&spec, variant, cfg.trials, cfg.seed, i)?;
            let prefix = match variant {
                Variant::Probabilistic => "sample-prob",
                Variant::Deterministic => "sample-det",
            };
            let row = |task: String, formula: f64, est: f64| {
                let sigma = tally.sigma(formula);
                Row::new(task).d(d).n(n).formula(formula).sampled(est, sigma).verdict(sample_verdict(formula, est, sigma))
            };
            let mut block = vec![row(prefix.to_string(), success_probability(d, n), tally.estimate())];
            let first = match variant {
                Variant::Probabilistic => 0,
                Variant::Deterministic => 1,
            };
            for x in first..=n {
                let formula = match (variant, x) {
                    (Variant::Probabilistic, 0) => abort_probability(d, n),
                    (Variant::Probabilistic, _) => port_success_weight(d, n),
                    (Variant::Deterministic, _) => deterministic_port_probability(d, n),
                };
                block.push(row(format!("{prefix}-outcome-{x}"), formula, tally.frequency(x)));
            }
            rows.extend(block);
        }
        Ok(rows)
    })
}
