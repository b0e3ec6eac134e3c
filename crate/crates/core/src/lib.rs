//! Rician-aware denoising for 3D magnitude MRI.
//!
//! The crate provides the conventional-approach estimator ([`denoise::ca_filter`])
//! and its non-local extension ([`denoise::nlca_filter`]), together with what
//! is needed to evaluate them on synthetic data: Rician noise injection,
//! wavelet-based noise estimation, RMSE/SSIM metrics and volume I/O.
//!
//! ```
//! use nlca::denoise::{nlca_filter, DenoiseParams};
//! use nlca::noise::{add_rician, NoiseModel};
//! use nlca::phantom::brain_phantom;
//!
//! let truth = brain_phantom([24, 24, 24]);
//! let noisy = add_rician(&truth, NoiseModel::new(12.75, 7)).unwrap();
//! let clean = nlca_filter(&noisy, &DenoiseParams::with_sigma(12.75)).unwrap();
//!
//! let before = nlca::metrics::rmse(&truth, &noisy).unwrap();
//! let after = nlca::metrics::rmse(&truth, &clean).unwrap();
//! assert!(after < before);
//! ```

pub mod denoise;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod special;
pub mod volume;
mod window;

pub use error::{Error, Result};
pub use volume::Volume3D;

// Book chapters are compiled as doctests so their snippets stay runnable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/volumes.md")]
    mod volumes {}
    #[doc = include_str!("../../../book/src/rician-noise.md")]
    mod rician_noise {}
    #[doc = include_str!("../../../book/src/noise-estimation.md")]
    mod noise_estimation {}
    #[doc = include_str!("../../../book/src/conventional-approach.md")]
    mod conventional_approach {}
    #[doc = include_str!("../../../book/src/non-local.md")]
    mod non_local {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
}
