//! Deterministic point sources in the unit cube.
//!
//! Every point is addressed by its index, so evaluation can be split across
//! threads without changing the sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Halton sequence; the seed shifts the starting index.
    Halton { seed: u64 },
    /// Independent uniform coordinates from a ChaCha8 stream per point.
    Uniform { seed: u64 },
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::Halton { seed: 0 }
    }
}

impl Sampler {
    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Halton { .. } => "halton",
            Sampler::Uniform { .. } => "uniform",
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            Sampler::Halton { seed } | Sampler::Uniform { seed } => seed,
        }
    }

    /// Fills `out` with the coordinates of point `k`, all in the open
    /// interval `(0, 1)`.
    pub fn fill(&self, k: u64, out: &mut [f64]) {
        match *self {
            Sampler::Halton { seed } => {
                let index = k.wrapping_add(seed).wrapping_add(1);
                let primes = primes(out.len());
                for (o, &p) in out.iter_mut().zip(&primes) {
                    *o = radical_inverse(index, p);
                }
            }
            Sampler::Uniform { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k);
                for o in out.iter_mut() {
                    // [0, 1) → (0, 1]
                    *o = 1.0 - rng.gen::<f64>();
                }
            }
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Standard normal coordinates by Box–Muller from uniform pairs in `(0, 1]`.
pub(crate) fn gaussians(u: &[f64], out: &mut [f64]) {
    debug_assert!(u.len() >= 2 * out.len().div_ceil(2));
    for (k, pair) in out.chunks_mut(2).enumerate() {
        let r = (-2.0 * u[2 * k].ln()).sqrt();
        let th = std::f64::consts::TAU * u[2 * k + 1];
        pair[0] = r * th.cos();
        if pair.len() > 1 {
            pair[1] = r * th.sin();
        }
    }
}

/// Number of uniforms consumed by [`gaussians`] for `m` outputs.
pub(crate) fn gaussian_cost(m: usize) -> usize {
    2 * m.div_ceil(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_digits() {
        let s = Sampler::Halton { seed: 0 };
        let mut x = [0.0; 3];
        s.fill(0, &mut x);
        assert_eq!(x, [0.5, 1.0 / 3.0, 0.2]);
        s.fill(4, &mut x);
        // index 5 = 101₂ = 12₃ = 10₅, digits mirrored about the radix point
        assert_eq!(x[0], 0.625);
        assert!((x[1] - 7.0 / 9.0).abs() < 1e-15 && (x[2] - 0.04).abs() < 1e-15);
        assert_eq!(primes(8), [2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn uniform_is_addressable() {
        let s = Sampler::Uniform { seed: 11 };
        let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
        s.fill(17, &mut a);
        s.fill(3, &mut b);
        s.fill(17, &mut b);
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn halton_mean_and_gaussian_moments() {
        let s = Sampler::Halton { seed: 0 };
        let n = 20_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        let mut u = [0.0; 4];
        let mut z = [0.0; 3];
        for k in 0..n {
            s.fill(k, &mut u);
            gaussians(&u, &mut z);
            m1 += z[0] + z[2];
            m2 += z[0] * z[0] + z[1] * z[1];
        }
        assert!((m1 / n as f64).abs() < 0.02);
        assert!((m2 / (2 * n) as f64 - 1.0).abs() < 0.02);
    }
}
