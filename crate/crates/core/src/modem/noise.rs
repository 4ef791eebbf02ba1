//! Seeded channel noise.
//!
//! Every pulse interval draws from its own ChaCha stream, so the noise added
//! to a burst is identical however the work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Distribution of the additive channel noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLaw {
    None,
    Gaussian,
    Uniform,
}

/// Generator for one pulse interval.
pub fn interval_rng(seed: u64, interval: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(interval);
    rng
}

/// Adds zero-mean noise of variance `sigma2` to `buf`, using one stream per
/// block of `interval` samples.
pub fn add_noise(buf: &mut [f64], law: NoiseLaw, sigma2: f64, seed: u64, interval: usize) {
    if law == NoiseLaw::None || sigma2 == 0.0 {
        return;
    }
    let sigma = sigma2.sqrt();
    let half_width = (3.0 * sigma2).sqrt();
    buf.par_chunks_mut(interval.max(1))
        .enumerate()
        .for_each(|(j, chunk)| {
            let mut rng = interval_rng(seed, j as u64);
            for v in chunk.iter_mut() {
                *v += match law {
                    NoiseLaw::Gaussian => sigma * rng.sample::<f64, _>(StandardNormal),
                    NoiseLaw::Uniform => rng.random_range(-half_width..half_width),
                    NoiseLaw::None => 0.0,
                };
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    }

    #[test]
    fn variance_matches_for_both_laws() {
        for law in [NoiseLaw::Gaussian, NoiseLaw::Uniform] {
            let mut buf = vec![0.0; 200_000];
            add_noise(&mut buf, law, 2.5, 7, 25);
            let (mean, var) = moments(&buf);
            assert!(mean.abs() < 0.02);
            assert!((var - 2.5).abs() / 2.5 < 0.02, "{law:?}: {var}");
        }
    }

    #[test]
    fn uniform_is_bounded() {
        let mut buf = vec![0.0; 10_000];
        add_noise(&mut buf, NoiseLaw::Uniform, 1.0, 3, 10);
        let a = 3f64.sqrt();
        assert!(buf.iter().all(|v| v.abs() <= a));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let mut buf = vec![0.0; 50_000];
                add_noise(&mut buf, NoiseLaw::Gaussian, 1.0, 42, 73);
                buf
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn none_is_silent() {
        let mut buf = vec![1.0; 10];
        add_noise(&mut buf, NoiseLaw::None, 1.0, 1, 5);
        assert!(buf.iter().all(|&v| v == 1.0));
    }
}
