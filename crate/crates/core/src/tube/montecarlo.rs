//! Rejection-sampling estimate of the tube volume.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::nearest::nearest_param;
use super::TubeSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MIN_MC_SAMPLES: usize = 1000;

/// Samples per independent stream; the partition is fixed so results do not
/// depend on the thread count.
const STREAM_LEN: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: usize,
    pub box_volume: f64,
}

/// Uniform samples in the inflated bounding box, counted when inside the
/// tube. Stream `k` uses ChaCha8 seeded with `seed` on stream number `k`.
pub fn montecarlo_volume<T: Scalar>(spec: &TubeSpec<T>, n: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples { got: n, min: MIN_MC_SAMPLES });
    }
    let (lo, hi) = spec.bounding_box();
    let lo: Vec<f64> = lo.iter().map(|x| x.to_f64_lossy()).collect();
    let hi: Vec<f64> = hi.iter().map(|x| x.to_f64_lossy()).collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let radius = spec.radius();
    let streams = n.div_ceil(STREAM_LEN);
    let hits: u64 = (0..streams)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = STREAM_LEN.min(n - k * STREAM_LEN);
            let mut x = vec![T::zero(); lo.len()];
            let mut hits = 0u64;
            for _ in 0..count {
                for (c, xi) in x.iter_mut().enumerate() {
                    *xi = T::lit(rng.gen_range(lo[c]..hi[c]));
                }
                if nearest_param(spec, &x).1 < radius {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let p = hits as f64 / n as f64;
    Ok(MonteCarloEstimate {
        estimate: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / n as f64).sqrt(),
        hits,
        samples: n,
        box_volume,
    })
}
