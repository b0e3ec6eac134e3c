//! Single-level separable wavelet analysis restricted to the all-detail subband.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::{mirror_index, Volume3D};

/// A two-tap-or-longer orthonormal analysis high-pass filter.
///
/// `detail` maps one input line of length `n >= 2` to its `ceil(n / 2)`
/// detail coefficients, reading past the end through mirror extension.
pub trait DetailFilter: Sync {
    fn detail(&self, line: &[f64], out: &mut [f64]);
}

/// Orthonormal Haar detail filter `(a - b) / sqrt(2)` on consecutive pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Haar;

impl DetailFilter for Haar {
    fn detail(&self, line: &[f64], out: &mut [f64]) {
        let n = line.len();
        debug_assert_eq!(out.len(), n.div_ceil(2));
        for (i, o) in out.iter_mut().enumerate() {
            let a = line[2 * i];
            // Odd lengths pair the last sample with its mirror image.
            let b = line[mirror_index(2 * i as isize + 1, n)];
            *o = (a - b) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
}

/// High-pass-on-every-axis detail coefficients at half resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct HhhField {
    pub dims: [usize; 3],
    pub data: Vec<f64>,
}

/// HHH subband of a single-level Haar decomposition.
pub fn dwt_hhh(volume: &Volume3D) -> Result<HhhField> {
    dwt_hhh_with(volume, &Haar)
}

/// HHH subband using `filter` along x, then y, then z.
pub fn dwt_hhh_with(volume: &Volume3D, filter: &dyn DetailFilter) -> Result<HhhField> {
    let dims = volume.dims();
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidVolume(format!(
            "wavelet analysis needs at least 2 voxels per axis, got {dims:?}"
        )));
    }
    let mut cur_dims = dims;
    let mut cur: Vec<f64> = volume.data().iter().map(|&v| v as f64).collect();
    for axis in 0..3 {
        let (next, next_dims) = filter_axis(&cur, cur_dims, axis, filter);
        cur = next;
        cur_dims = next_dims;
    }
    Ok(HhhField {
        dims: cur_dims,
        data: cur,
    })
}

/// Applies `filter` along `axis`, halving that dimension.
fn filter_axis(
    data: &[f64],
    dims: [usize; 3],
    axis: usize,
    filter: &dyn DetailFilter,
) -> (Vec<f64>, [usize; 3]) {
    let n = dims[axis];
    let half = n.div_ceil(2);
    let mut out_dims = dims;
    out_dims[axis] = half;
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let out_stride = match axis {
        0 => 1,
        1 => out_dims[0],
        _ => out_dims[0] * out_dims[1],
    };
    // Lines along `axis` are indexed by the other two coordinates.
    let (u_len, v_len) = match axis {
        0 => (dims[1], dims[2]),
        1 => (dims[0], dims[2]),
        _ => (dims[0], dims[1]),
    };
    let base = |u: usize, v: usize, d: [usize; 3]| match axis {
        0 => d[0] * (u + d[1] * v),
        1 => u + d[0] * d[1] * v,
        _ => u + d[0] * v,
    };

    let lines: Vec<Vec<f64>> = (0..u_len * v_len)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |line, uv| {
                let (u, v) = (uv % u_len, uv / u_len);
                let b = base(u, v, dims);
                for (i, s) in line.iter_mut().enumerate() {
                    *s = data[b + i * stride];
                }
                let mut out = vec![0.0; half];
                filter.detail(line, &mut out);
                out
            },
        )
        .collect();

    let mut out = vec![0.0; out_dims.iter().product()];
    for (uv, line) in lines.into_iter().enumerate() {
        let b = base(uv % u_len, uv / u_len, out_dims);
        for (i, v) in line.into_iter().enumerate() {
            out[b + i * out_stride] = v;
        }
    }
    (out, out_dims)
}
