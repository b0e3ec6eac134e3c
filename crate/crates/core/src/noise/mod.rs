//! Rician noise synthesis and automatic noise-level estimation.

mod rng;
mod wavelet;

pub use rng::{gaussian_pair, philox4x32};
pub use wavelet::{dwt_hhh, dwt_hhh_with, DetailFilter, Haar, HhhField};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{mad_sigma, xi_correction};
use crate::volume::Volume3D;

/// Full-scale intensity of 8-bit data; "p% noise" means `sigma = p / 100 * 255`.
pub const EIGHT_BIT_MAX: f64 = 255.0;

const MAX_ITERATIONS: u32 = 100;
const CONVERGENCE_TOL: f64 = 1e-6;

/// Gaussian noise level of `percent` of `reference_max`.
pub fn sigma_for_percent(percent: f64, reference_max: f64) -> f64 {
    percent / 100.0 * reference_max
}

/// Parameters of a synthetic Rician corruption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Standard deviation of each of the two Gaussian components.
    pub sigma_n: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_n: f64, seed: u64) -> Self {
        Self { sigma_n, seed }
    }
}

/// Corrupts a magnitude volume with Rician noise: `M = sqrt((A + n1)^2 + n2^2)`.
///
/// `n1, n2 ~ N(0, sigma_n^2)` are drawn from the counter stream of each
/// voxel's linear index, so the result is identical for any thread count.
pub fn add_rician(volume: &Volume3D, model: NoiseModel) -> Result<Volume3D> {
    if !(model.sigma_n.is_finite() && model.sigma_n >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be finite and >= 0, got {}",
            model.sigma_n
        )));
    }
    volume.check_magnitude()?;
    let sigma = model.sigma_n;
    let mut out = vec![0.0f32; volume.len()];
    out.par_iter_mut()
        .zip(volume.data().par_iter())
        .enumerate()
        .for_each(|(i, (o, &a))| {
            let (n1, n2) = gaussian_pair(model.seed, i as u64);
            let re = a as f64 + sigma * n1;
            let im = sigma * n2;
            *o = (re * re + im * im).sqrt() as f32;
        });
    Ok(volume.with_data(out))
}

/// Result of the wavelet-based noise estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    /// MAD scale of the HHH coefficients (magnitude domain).
    pub sigma_hat: f64,
    /// Foreground SNR at the converged noise level.
    pub theta_hat: f64,
    /// Gaussian-component standard deviation after the Rician correction.
    pub sigma_n_hat: f64,
    pub iterations: u32,
}

/// Estimates the Gaussian-component noise level of a Rician magnitude volume.
///
/// `sigma_hat` is the MAD of the single-level Haar HHH subband. The Rician
/// correction `sigma_n = sqrt(sigma_hat^2 / xi(theta))` depends on the SNR
/// `theta`, which in turn depends on `sigma_n`; the pair is resolved by
/// fixed-point iteration with `theta = mean(foreground) / sigma_n`, where the
/// foreground is every voxel brighter than the global mean.
pub fn estimate_noise(volume: &Volume3D) -> Result<NoiseEstimate> {
    volume.check_magnitude()?;
    let hhh = dwt_hhh(volume)?;
    let sigma_hat = mad_sigma(&hhh.data)?;
    if sigma_hat == 0.0 {
        return Ok(NoiseEstimate {
            sigma_hat: 0.0,
            theta_hat: 0.0,
            sigma_n_hat: 0.0,
            iterations: 0,
        });
    }
    let signal = foreground_mean(volume);

    let mut sigma_n = sigma_hat;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let theta = signal / sigma_n;
        let next = (sigma_hat * sigma_hat / xi_correction(theta)?).sqrt();
        let change = (next - sigma_n).abs() / sigma_n;
        sigma_n = next;
        if change < CONVERGENCE_TOL {
            break;
        }
    }
    Ok(NoiseEstimate {
        sigma_hat,
        theta_hat: signal / sigma_n,
        sigma_n_hat: sigma_n,
        iterations,
    })
}

/// Mean of the voxels strictly above the global mean (all voxels if none are).
fn foreground_mean(volume: &Volume3D) -> f64 {
    let mean = volume.mean();
    let (sum, count) = volume
        .data()
        .iter()
        .filter(|&&v| v as f64 > mean)
        .fold((0.0f64, 0usize), |(s, c), &v| (s + v as f64, c + 1));
    if count == 0 {
        mean
    } else {
        sum / count as f64
    }
}
