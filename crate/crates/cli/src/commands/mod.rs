//! Report builders, one per subcommand.

mod extra;
mod sample;
mod table;
mod verify;

pub use extra::{qrac_demo, uphp_plan};
pub use sample::sample;
pub use table::{table_pbsp, table_pbt, table_qrac, table_uphp};
pub use verify::verify;

use pbsp_core::pbsp::{sample_tally, SampleTally, Variant};
use pbsp_core::states::{haar_state, haar_unitary, ResourceSpec, SeededRng, Unitary};
use pbsp_core::StateVector;
use rayon::prelude::*;

use crate::error::CliError;
use crate::report::{Row, Verdict};

/// Trials per independent random stream.
const CHUNK: u64 = 1 << 16;

/// Random-stream purposes; each grid point draws from its own streams.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Purpose {
    SampleProb = 0,
    SampleDet = 1,
    Target = 2,
    Program = 3,
    Function = 4,
    Guess = 5,
    Mixed = 6,
}

fn stream(point: usize, purpose: Purpose, chunk: u64) -> u64 {
    ((point as u64) << 40) | ((purpose as u64) << 32) | chunk
}

fn rng_for(seed: u64, point: usize, purpose: Purpose) -> SeededRng {
    SeededRng::derive(seed, stream(point, purpose, 0))
}

fn haar_target(d: usize, seed: u64, point: usize) -> Result<StateVector, CliError> {
    Ok(haar_state(d, &mut rng_for(seed, point, Purpose::Target))?)
}

fn haar_program(d: usize, seed: u64, point: usize) -> Result<Unitary, CliError> {
    Ok(haar_unitary(d, &mut rng_for(seed, point, Purpose::Program))?)
}

/// Monte Carlo tally split into fixed-size chunks on derived streams, so the
/// result does not depend on the thread count.
fn chunked_tally(spec: &ResourceSpec, variant: Variant, trials: u64, seed: u64, point: usize) -> Result<SampleTally, CliError> {
    let purpose = match variant {
        Variant::Probabilistic => Purpose::SampleProb,
        Variant::Deterministic => Purpose::SampleDet,
    };
    let chunks = trials.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(trials - c * CHUNK);
            let mut rng = SeededRng::derive(seed, stream(point, purpose, c));
            sample_tally(spec, variant, n, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = SampleTally::empty(variant, spec.d, spec.n_ports);
    for part in &parts {
        total.merge(part)?;
    }
    Ok(total)
}

/// Flags a Monte Carlo estimate more than three standard errors from the
/// formula value.
fn sample_verdict(formula: f64, estimate: f64, sigma: f64) -> Verdict {
    if (estimate - formula).abs() <= 3.0 * sigma + 1e-12 {
        Verdict::Pass
    } else {
        Verdict::Flag
    }
}

fn close(a: f64, b: f64, tol: f64) -> Verdict {
    Verdict::from_check((a - b).abs() <= tol)
}

fn pairs<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

/// Evaluates `f` on every point in parallel; rows keep grid order.
fn per_point<P, F>(points: &[P], f: F) -> Result<Vec<Row>, CliError>
where
    P: Sync,
    F: Fn(usize, &P) -> Result<Vec<Row>, CliError> + Sync,
{
    let blocks = points.par_iter().enumerate().map(|(i, p)| f(i, p)).collect::<Result<Vec<_>, _>>()?;
    Ok(blocks.into_iter().flatten().collect())
}
