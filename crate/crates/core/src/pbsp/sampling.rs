use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{ChannelResult, ProtocolOutcome, Variant};
use crate::error::{Error, Result};
use crate::linalg::{DensityOperator, Matrix, RegisterLayout, StateVector};
use crate::states::{bob_label, haar_state, ResourceSpec, SeededRng};

/// Outcome counts from Monte Carlo trials. Tallies from independent streams
/// combine with [`SampleTally::merge`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleTally {
    pub variant: Variant,
    pub d: usize,
    pub n_ports: usize,
    pub trials: u64,
    /// Indexed by outcome; entry 0 counts aborts.
    pub counts: Vec<u64>,
    /// Per outcome, trials where the announced port really held the target.
    pub hits: Vec<u64>,
}

impl SampleTally {
    pub fn empty(variant: Variant, d: usize, n_ports: usize) -> Self {
        Self { variant, d, n_ports, trials: 0, counts: alloc::vec![0; n_ports + 1], hits: alloc::vec![0; n_ports + 1] }
    }

    pub fn merge(&mut self, other: &SampleTally) -> Result<()> {
        if (self.variant, self.d, self.n_ports) != (other.variant, other.d, other.n_ports) {
            return Err(Error::Domain("cannot merge tallies of different protocols".into()));
        }
        self.trials += other.trials;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        Ok(())
    }

    pub fn frequency(&self, outcome: usize) -> f64 {
        self.counts.get(outcome).map_or(0.0, |&c| c as f64 / self.trials as f64)
    }

    /// Fraction of trials that did not abort.
    pub fn success_rate(&self) -> f64 {
        1.0 - self.frequency(0)
    }

    /// Fraction of trials where Bob's port holds the target; for the
    /// deterministic variant this estimates the channel fidelity.
    pub fn hit_rate(&self) -> f64 {
        self.hits.iter().sum::<u64>() as f64 / self.trials as f64
    }

    /// The quantity the closed form predicts: success probability
    /// (probabilistic) or channel fidelity (deterministic).
    pub fn estimate(&self) -> f64 {
        match self.variant {
            Variant::Probabilistic => self.success_rate(),
            Variant::Deterministic => self.hit_rate(),
        }
    }

    /// Binomial standard error `√(p(1−p)/trials)` at probability `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Tally plus the empirical channel it describes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRun {
    pub tally: SampleTally,
    pub empirical: ChannelResult,
    /// Observed outcome of each trial, in order.
    pub sequence: Vec<usize>,
}

fn one_trial(d: usize, n_ports: usize, variant: Variant, rng: &mut SeededRng, found: &mut Vec<usize>) -> (usize, bool) {
    found.clear();
    for port in 1..=n_ports {
        if rng.below(d) == 0 {
            found.push(port);
        }
    }
    if found.is_empty() {
        match variant {
            Variant::Probabilistic => (0, false),
            Variant::Deterministic => (1 + rng.below(n_ports), false),
        }
    } else {
        (found[rng.below(found.len())], true)
    }
}

fn run_trials(spec: &ResourceSpec, variant: Variant, trials: u64, rng: &mut SeededRng, mut seq: Option<&mut Vec<usize>>) -> Result<SampleTally> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let mut tally = SampleTally::empty(variant, spec.d, spec.n_ports);
    let mut found = Vec::with_capacity(spec.n_ports);
    for _ in 0..trials {
        let (x, hit) = one_trial(spec.d, spec.n_ports, variant, rng, &mut found);
        tally.counts[x] += 1;
        if hit {
            tally.hits[x] += 1;
        }
        if let Some(s) = seq.as_deref_mut() {
            s.push(x);
        }
    }
    tally.trials = trials;
    Ok(tally)
}

/// Monte Carlo counts only; the target state does not affect outcome
/// statistics, so none is needed.
pub fn sample_tally(spec: &ResourceSpec, variant: Variant, trials: u64, rng: &mut SeededRng) -> Result<SampleTally> {
    run_trials(spec, variant, trials, rng, None)
}

/// Monte Carlo run: each port holds the target with probability `1/d`
/// independently, and the announced port is uniform among those that do.
/// Only outcomes that occurred are listed in the empirical result.
pub fn sample_outcomes(
    psi: &StateVector,
    spec: &ResourceSpec,
    variant: Variant,
    trials: u64,
    rng: &mut SeededRng,
) -> Result<SampledRun> {
    if psi.dim() != spec.d {
        return Err(Error::Domain(format!("target has dimension {} but resource has d = {}", psi.dim(), spec.d)));
    }
    let mut sequence = Vec::with_capacity(trials.min(1 << 20) as usize);
    let tally = run_trials(spec, variant, trials, rng, Some(&mut sequence))?;
    let d = spec.d;
    let proj = DensityOperator::from_pure(psi).matrix().clone();
    let orth = (&Matrix::identity(d) - &proj).scale_real(1.0 / (d - 1) as f64);
    let mut outcomes = Vec::new();
    for (x, (&count, &hit)) in tally.counts.iter().zip(&tally.hits).enumerate() {
        if count == 0 {
            continue;
        }
        let bob_state = if x == 0 {
            None
        } else {
            let mut m = proj.scale_real(hit as f64 / count as f64);
            m.add_scaled(&orth, (count - hit) as f64 / count as f64);
            Some(DensityOperator::new(RegisterLayout::single(&bob_label(x), d)?, m)?)
        };
        outcomes.push(ProtocolOutcome { outcome: x, probability: count as f64 / trials as f64, bob_state });
    }
    let empirical = ChannelResult::from_outcomes(variant, outcomes, psi)?;
    Ok(SampledRun { tally, empirical, sequence })
}

/// Summary of fidelities over Haar-random inputs. `min` is an estimate of
/// the worst case, not a certified infimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseEstimate {
    pub min: f64,
    pub mean: f64,
    /// Population variance of the sampled fidelities.
    pub variance: f64,
    pub samples: usize,
}

/// Runs `runner(ψ, N)` on `samples` Haar-random `ψ` of dimension `d`.
pub fn worst_case_fidelity<F>(mut runner: F, d: usize, n_ports: usize, samples: usize, rng: &mut SeededRng) -> Result<WorstCaseEstimate>
where
    F: FnMut(&StateVector, usize) -> Result<f64>,
{
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let psi = haar_state(d, rng)?;
        values.push(runner(&psi, n_ports)?);
    }
    let mean = values.iter().sum::<f64>() / samples as f64;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / samples as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WorstCaseEstimate { min, mean, variance, samples })
}
