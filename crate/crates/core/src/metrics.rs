//! Full-reference quality metrics: RMSE and volumetric SSIM.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Volume3D;
use crate::window::box_mean;

/// Window and stabilising constants for [`ssim`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window_radius: usize,
    pub c1_const: f64,
    pub c2_const: f64,
}

impl SsimParams {
    /// The usual `(0.01 L)^2`, `(0.03 L)^2` constants for dynamic range `L`.
    pub fn for_dynamic_range(l: f64) -> Self {
        Self {
            window_radius: 3,
            c1_const: (0.01 * l).powi(2),
            c2_const: (0.03 * l).powi(2),
        }
    }
}

impl Default for SsimParams {
    /// 7x7x7 window, constants for 8-bit data (6.5025 and 58.5225).
    fn default() -> Self {
        Self {
            window_radius: 3,
            c1_const: 6.5025,
            c2_const: 58.5225,
        }
    }
}

/// RMSE and SSIM of one estimate against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub ssim: f64,
    pub voxel_count: usize,
    pub window_radius: usize,
    pub c1_const: f64,
    pub c2_const: f64,
}

fn check_dims(a: &Volume3D, b: &Volume3D) -> Result<()> {
    if a.dims() == b.dims() {
        Ok(())
    } else {
        Err(Error::DimsMismatch {
            left: a.dims(),
            right: b.dims(),
        })
    }
}

/// `sqrt(mean((a - b)^2))` over all voxels.
pub fn rmse(reference: &Volume3D, estimate: &Volume3D) -> Result<f64> {
    check_dims(reference, estimate)?;
    let sum: f64 = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok((sum / reference.len() as f64).sqrt())
}

/// Mean of the local SSIM map computed over cubic windows.
///
/// Local means, variances and the covariance use uniform weights over the
/// mirrored `(2 r + 1)^3` window, with population (divide-by-count) moments.
pub fn ssim(reference: &Volume3D, estimate: &Volume3D, params: &SsimParams) -> Result<f64> {
    check_dims(reference, estimate)?;
    if !(params.c1_const > 0.0 && params.c2_const > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "SSIM constants must be positive, got c1 = {}, c2 = {}",
            params.c1_const, params.c2_const
        )));
    }
    let dims = reference.dims();
    let r = params.window_radius;
    let x: Vec<f64> = reference.data().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = estimate.data().iter().map(|&v| v as f64).collect();

    let (mx, my) = rayon::join(|| box_mean(&x, dims, r), || box_mean(&y, dims, r));
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let exx = box_mean(&xx, dims, r);
    drop(xx);
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let eyy = box_mean(&yy, dims, r);
    drop(yy);
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let exy = box_mean(&xy, dims, r);
    drop(xy);

    let (c1, c2) = (params.c1_const, params.c2_const);
    let slice = dims[0] * dims[1];
    // Per-slice partial sums, then an ordered total: independent of thread count.
    let partial: Vec<f64> = (0..dims[2])
        .into_par_iter()
        .map(|z| {
            let mut s = 0.0;
            for i in z * slice..(z + 1) * slice {
                let (ux, uy) = (mx[i], my[i]);
                let vx = exx[i] - ux * ux;
                let vy = eyy[i] - uy * uy;
                let cov = exy[i] - ux * uy;
                let num = (2.0 * ux * uy + c1) * (2.0 * cov + c2);
                let den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
                s += num / den;
            }
            s
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / reference.len() as f64)
}

/// Bundles [`rmse`] and [`ssim`] with the parameters used.
pub fn report(reference: &Volume3D, estimate: &Volume3D, params: &SsimParams) -> Result<MetricsReport> {
    Ok(MetricsReport {
        rmse: rmse(reference, estimate)?,
        ssim: ssim(reference, estimate, params)?,
        voxel_count: reference.len(),
        window_radius: params.window_radius,
        c1_const: params.c1_const,
        c2_const: params.c2_const,
    })
}
