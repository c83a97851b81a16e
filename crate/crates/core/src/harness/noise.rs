//! SNR measurement and noise injection.
//!
//! Noise is drawn from `ChaCha8Rng` and rescaled so that the realized SNR hits
//! the requested value exactly (up to rounding), rather than targeting a
//! variance.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Name of the generator behind every random draw in the harness.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// Independent generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn frobenius_sq(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// `10 log10(||X||_F^2 / ||X - Y||_F^2)`. Returns `+inf` when `Y == X`.
pub fn snr_db(clean: &Array2<f64>, noisy: &Array2<f64>) -> Result<f64> {
    if clean.dim() != noisy.dim() {
        return Err(Error::ShapeMismatch(format!(
            "SNR of {:?} against {:?}",
            clean.dim(),
            noisy.dim()
        )));
    }
    let signal = frobenius_sq(clean);
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let err: f64 = clean
        .iter()
        .zip(noisy.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / err).log10())
}

/// Noise distribution before energy scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// i.i.d. standard Gaussian.
    Gaussian,
    /// Standard Gaussian plus, with probability `impulse_prob` per entry, an
    /// impulse of `+-impulse_scale` (in units of the Gaussian's std).
    Mixed {
        impulse_prob: f64,
        impulse_scale: f64,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if let NoiseModel::Mixed {
            impulse_prob,
            impulse_scale,
        } = *self
        {
            if !(0.0..=1.0).contains(&impulse_prob) {
                return Err(Error::param(format!(
                    "impulse probability must be in [0, 1], got {impulse_prob}"
                )));
            }
            if !(impulse_scale.is_finite() && impulse_scale >= 0.0) {
                return Err(Error::param(format!(
                    "impulse scale must be finite and >= 0, got {impulse_scale}"
                )));
            }
        }
        Ok(())
    }

    /// Unscaled noise matrix of the given shape.
    pub fn draw<R: Rng>(&self, shape: (usize, usize), rng: &mut R) -> Array2<f64> {
        let mut noise =
            Array2::from_shape_simple_fn(shape, || rng.sample::<f64, _>(StandardNormal));
        if let NoiseModel::Mixed {
            impulse_prob,
            impulse_scale,
        } = *self
        {
            for v in noise.iter_mut() {
                if rng.random::<f64>() < impulse_prob {
                    *v += if rng.random::<bool>() {
                        impulse_scale
                    } else {
                        -impulse_scale
                    };
                }
            }
        }
        noise
    }
}

/// Adds `noise`, rescaled so that `snr_db(clean, result) == target_snr_db`.
pub fn add_scaled_noise(
    clean: &Array2<f64>,
    mut noise: Array2<f64>,
    target_snr_db: f64,
) -> Result<Array2<f64>> {
    if !target_snr_db.is_finite() {
        return Err(Error::param(format!(
            "target SNR must be finite, got {target_snr_db}"
        )));
    }
    if clean.dim() != noise.dim() {
        return Err(Error::ShapeMismatch(
            "noise shape differs from signal".into(),
        ));
    }
    let signal = frobenius_sq(clean);
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let drawn = frobenius_sq(&noise);
    if drawn == 0.0 {
        return Err(Error::param("drawn noise has zero energy"));
    }
    let target = signal / 10f64.powf(target_snr_db / 10.0);
    noise *= (target / drawn).sqrt();
    Ok(clean + &noise)
}

/// `X + N` with white Gaussian `N` scaled to the target SNR. Deterministic in `seed`.
pub fn add_white_noise(clean: &Array2<f64>, target_snr_db: f64, seed: u64) -> Result<Array2<f64>> {
    let mut rng = stream_rng(seed, 0);
    let noise = NoiseModel::Gaussian.draw(clean.dim(), &mut rng);
    add_scaled_noise(clean, noise, target_snr_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn snr_reference_points() {
        let x = array![[3.0, 4.0]];
        // ||X||^2 = 25
        let y = array![[0.0, 0.0]];
        assert!((snr_db(&x, &y).unwrap() - 0.0).abs() < 1e-12);
        let y = array![[3.0, 4.0 + 2.5f64.sqrt()]];
        assert!((snr_db(&x, &y).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(snr_db(&x, &x).unwrap(), f64::INFINITY);
        assert!(matches!(
            snr_db(&array![[0.0]], &array![[1.0]]),
            Err(Error::ZeroSignal)
        ));
        assert!(snr_db(&x, &array![[1.0]]).is_err());
    }

    #[test]
    fn white_noise_hits_target_exactly() {
        let x = Array2::from_shape_fn((7, 9), |(i, t)| (i as f64 + 1.0) * (t as f64).sin() + 0.3);
        for target in [-10.0, 0.0, 3.3, 20.0] {
            let y = add_white_noise(&x, target, 11).unwrap();
            assert!((snr_db(&x, &y).unwrap() - target).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_energy_for_ten_db() {
        // ||X||^2 = 100 -> ||N||^2 = 10
        let x = Array2::from_elem((4, 25), 1.0);
        let y = add_white_noise(&x, 10.0, 3).unwrap();
        assert!((frobenius_sq(&(&y - &x)) - 10.0).abs() < 1e-6);
    }

    #[test]
    fn same_seed_same_noise() {
        let x = Array2::from_elem((3, 3), 2.0);
        assert_eq!(
            add_white_noise(&x, 0.0, 9).unwrap(),
            add_white_noise(&x, 0.0, 9).unwrap()
        );
        assert_ne!(
            add_white_noise(&x, 0.0, 9).unwrap(),
            add_white_noise(&x, 0.0, 10).unwrap()
        );
    }

    #[test]
    fn streams_are_independent() {
        let a: u64 = stream_rng(1, 0).random();
        let b: u64 = stream_rng(1, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, stream_rng(1, 0).random::<u64>());
    }

    #[test]
    fn mixed_noise_has_impulses() {
        let model = NoiseModel::Mixed {
            impulse_prob: 0.2,
            impulse_scale: 50.0,
        };
        let n = model.draw((50, 50), &mut stream_rng(5, 0));
        let big = n.iter().filter(|v| v.abs() > 20.0).count();
        assert!(big > 300 && big < 700, "{big}");
        assert!(NoiseModel::Mixed {
            impulse_prob: 1.5,
            impulse_scale: 1.0
        }
        .validate()
        .is_err());
    }
}
