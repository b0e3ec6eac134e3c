//! The conventional-approach (CA) estimator and its non-local extension (NLCA).
//!
//! Both filters estimate the noise-free amplitude from the Rician identity
//! `E[M^2] = A^2 + 2 sigma^2`:
//!
//! ```text
//! A_hat = sqrt(max(<M^2> - 2 sigma^2, 0))
//! ```
//!
//! CA takes `<M^2>` over the local patch. NLCA scans a larger search cube and
//! keeps a candidate voxel only when its patch mean and patch second moment are
//! both within fixed ratios of the centre patch's; `<M^2>` is then the plain
//! average of the accepted candidates' patch second moments.

mod moments;

pub use moments::{MomentTables, PatchMoments};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::{mirror_table, Volume3D};

/// Parameters shared by [`ca_filter`] and [`nlca_filter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseParams {
    /// Standard deviation of the underlying Gaussian noise.
    pub sigma_n: f64,
    /// Patch half-width; 1 gives a 3x3x3 patch.
    pub patch_radius: usize,
    /// Search half-width; 5 gives an 11x11x11 search cube.
    pub search_radius: usize,
    /// Bound on the patch-mean ratio, in (0, 1].
    pub c1: f64,
    /// Bound on the patch second-moment ratio, in (0, 1].
    pub c2: f64,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        Self {
            sigma_n: 0.0,
            patch_radius: 1,
            search_radius: 5,
            c1: 0.9,
            c2: 0.5,
        }
    }
}

impl DenoiseParams {
    pub fn with_sigma(sigma_n: f64) -> Self {
        Self {
            sigma_n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_n.is_finite() && self.sigma_n >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma_n
            )));
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {c}")));
            }
        }
        Ok(())
    }
}

/// `sqrt(max(second_moment - 2 sigma^2, 0))`
#[inline]
pub fn bias_corrected_amplitude(second_moment: f64, sigma_n: f64) -> f32 {
    (second_moment - 2.0 * sigma_n * sigma_n).max(0.0).sqrt() as f32
}

/// Local CA estimate over the `(2 patch_radius + 1)^3` neighbourhood of every voxel.
pub fn ca_filter(volume: &Volume3D, params: &DenoiseParams) -> Result<Volume3D> {
    params.validate()?;
    volume.check_magnitude()?;
    let tables = MomentTables::build(volume, params.patch_radius);
    let sigma = params.sigma_n;
    let out = tables
        .sqmean_field
        .data()
        .par_iter()
        .map(|&m2| bias_corrected_amplitude(m2 as f64, sigma))
        .collect();
    Ok(volume.with_data(out))
}

#[inline]
fn ratio_within(center: f64, candidate: f64, c: f64) -> bool {
    if center == 0.0 {
        // The ratio is undefined; only an exactly matching zero qualifies.
        return candidate == 0.0;
    }
    let r = candidate / center;
    r >= c && r <= 1.0 / c
}

/// Moment-ratio similarity test between a centre patch and a candidate.
///
/// Accepts iff `c1 <= <M_n>/<M_c> <= 1/c1` and `c2 <= <M_n^2>/<M_c^2> <= 1/c2`,
/// bounds inclusive. A zero centre moment matches only a zero candidate moment.
#[inline]
pub fn similarity_accept(center: PatchMoments, candidate: PatchMoments, c1: f64, c2: f64) -> bool {
    ratio_within(center.mean, candidate.mean, c1) && ratio_within(center.sqmean, candidate.sqmean, c2)
}

/// Non-local CA estimate with the given parameters.
pub fn nlca_filter(volume: &Volume3D, params: &DenoiseParams) -> Result<Volume3D> {
    params.validate()?;
    volume.check_magnitude()?;
    let tables = MomentTables::build(volume, params.patch_radius);
    nlca_filter_with_tables(&tables, params)
}

/// Non-local CA estimate from precomputed moment tables.
///
/// Candidates are visited in z, y, x order over the mirrored search cube and
/// their second moments summed in `f64` in that order.
pub fn nlca_filter_with_tables(tables: &MomentTables, params: &DenoiseParams) -> Result<Volume3D> {
    params.validate()?;
    let [nx, ny, nz] = tables.dims();
    let r = params.search_radius;
    let width = 2 * r + 1;
    let mx = mirror_table(nx, r);
    let my = mirror_table(ny, r);
    let mz = mirror_table(nz, r);
    let mean = tables.mean_field.data();
    let sq = tables.sqmean_field.data();
    let (c1, c2, sigma) = (params.c1, params.c2, params.sigma_n);

    let mut out = vec![0.0f32; nx * ny * nz];
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(z, slice)| {
        let zs = &mz[z * width..(z + 1) * width];
        for y in 0..ny {
            let ys = &my[y * width..(y + 1) * width];
            for x in 0..nx {
                let xs = &mx[x * width..(x + 1) * width];
                let c = x + nx * (y + ny * z);
                let center = PatchMoments::new(mean[c] as f64, sq[c] as f64);
                let mut sum = 0.0f64;
                let mut count = 0u32;
                for &zz in zs {
                    for &yy in ys {
                        let row = nx * (yy + ny * zz);
                        for &xx in xs {
                            let n = row + xx;
                            let cand = PatchMoments::new(mean[n] as f64, sq[n] as f64);
                            if similarity_accept(center, cand, c1, c2) {
                                sum += cand.sqmean;
                                count += 1;
                            }
                        }
                    }
                }
                // The centre always accepts itself, so count >= 1.
                slice[x + nx * y] = bias_corrected_amplitude(sum / count as f64, sigma);
            }
        }
    });
    Ok(tables.mean_field.with_data(out))
}

/// Voxel-wise `noisy - denoised`.
pub fn residual(noisy: &Volume3D, denoised: &Volume3D) -> Result<Volume3D> {
    if noisy.dims() != denoised.dims() {
        return Err(Error::DimsMismatch {
            left: noisy.dims(),
            right: denoised.dims(),
        });
    }
    let data = noisy
        .data()
        .iter()
        .zip(denoised.data())
        .map(|(a, b)| a - b)
        .collect();
    Ok(noisy.with_data(data))
}
