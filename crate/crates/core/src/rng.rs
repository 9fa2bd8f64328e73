//! Random streams and the Brownian displacement draw.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::Vec3;

pub type TrialRng = ChaCha8Rng;

/// Independent stream for one trial. ChaCha exposes 2⁶⁴ streams per key, so
/// the stream depends only on `(seed, trial)` and never on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Per-axis standard deviation of one Brownian step, `√(2 D dt)`.
pub fn step_sigma(diffusion: f64, dt: f64) -> f64 {
    (2.0 * diffusion * dt).sqrt()
}

/// Three independent `N(0, 2 D dt)` components.
pub fn displacement_sample<R: Rng + ?Sized>(rng: &mut R, diffusion: f64, dt: f64) -> Vec3 {
    scaled_gaussian(rng, step_sigma(diffusion, dt))
}

#[inline]
pub(crate) fn scaled_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vec3 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Vec3::new(x * sigma, y * sigma, z * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_for_fig1_step() {
        assert!((step_sigma(8.0, 1e-5) - 0.012_649_110_640_673_518).abs() < 1e-15);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, trial| {
            let mut r = trial_rng(seed, trial);
            (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn displacement_moments() {
        let (d, dt) = (8.0, 1e-5);
        let n = 1_000_000;
        let var = 2.0 * d * dt;
        let mut rng = trial_rng(2024, 0);
        let mut sum = [0.0f64; 3];
        let mut sum_sq = [0.0f64; 3];
        for _ in 0..n {
            let v = displacement_sample(&mut rng, d, dt);
            for (i, c) in [v.x, v.y, v.z].into_iter().enumerate() {
                sum[i] += c;
                sum_sq[i] += c * c;
            }
        }
        let nf = n as f64;
        for i in 0..3 {
            let mean = sum[i] / nf;
            let sample_var = sum_sq[i] / nf - mean * mean;
            assert!(mean.abs() < 4.0 * var.sqrt() / nf.sqrt(), "axis {i} mean {mean}");
            assert!((sample_var / var - 1.0).abs() < 0.01, "axis {i} var {sample_var}");
        }
    }
}
