//! Multiplicative Gaussian detector noise for synthetic fit exercises.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use talbot_core::{DemagSeries, FarFieldFrame};

use crate::error::{CliError, Result};

/// Recorded in output metadata so the perturbation can be matched elsewhere.
pub const GENERATOR: &str =
    "ChaCha8 (rand_chacha seed_from_u64); each pixel in frame order times Normal(1, sigma_rel), clamped at 0";

/// Multiplies every pixel of every frame by an independent Normal(1, sigma) draw.
pub fn apply_noise(series: &DemagSeries, sigma: f64, seed: u64) -> Result<DemagSeries> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(CliError::Config(format!(
            "noise.sigma_rel must be finite and non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(series.clone());
    }
    let normal =
        Normal::new(1.0, sigma).map_err(|e| CliError::Config(format!("noise.sigma_rel: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = series
        .frames
        .iter()
        .map(|f| {
            let noisy = f
                .intensity
                .iter()
                .map(|v| (v * normal.sample(&mut rng)).max(0.0))
                .collect();
            FarFieldFrame::new(f.coordinates.clone(), noisy)
        })
        .collect();
    Ok(DemagSeries {
        frames,
        ..series.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> DemagSeries {
        let frame = FarFieldFrame::new((0..4000).map(|i| i as f64).collect(), vec![2.0; 4000]);
        DemagSeries::new(1e-3, 1.0, vec![0.0, 1e-8], vec![frame.clone(), frame]).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        assert_eq!(apply_noise(&series(), 0.0, 3).unwrap(), series());
    }

    #[test]
    fn seeded_noise_is_reproducible_and_has_the_right_spread() {
        let a = apply_noise(&series(), 0.01, 42).unwrap();
        let b = apply_noise(&series(), 0.01, 42).unwrap();
        let c = apply_noise(&series(), 0.01, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let rel: Vec<f64> = a
            .frames
            .iter()
            .flat_map(|f| f.intensity.iter().map(|v| v / 2.0 - 1.0))
            .collect();
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        let sd = (rel.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / rel.len() as f64).sqrt();
        assert!(mean.abs() < 1e-3);
        assert!((sd - 0.01).abs() < 5e-4, "sd {sd}");
    }

    #[test]
    fn negative_sigma_is_rejected() {
        assert!(apply_noise(&series(), -0.1, 0).is_err());
    }
}
