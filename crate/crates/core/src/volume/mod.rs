//! Dense 3D scalar volumes and their on-disk formats.
//!
//! Voxels are stored in a single `Vec<f32>` with x varying fastest, then y,
//! then z. The linear index of `(x, y, z)` is `x + nx * (y + ny * z)`, which is
//! the byte layout of BrainWeb raw volumes and of uncompressed NIfTI data.

mod nifti;
mod raw;

pub use nifti::load_nifti;
pub use raw::{load_raw, load_raw_with_sidecar, save_raw, sidecar_path, Endianness, SampleType, VolumeHeader};

use crate::error::{Error, Result};

/// A dense 3D field of `f32` intensities with physical voxel spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    dims: [usize; 3],
    spacing: [f32; 3],
    data: Vec<f32>,
}

impl Volume3D {
    /// Wraps `data` (x-fastest order) as a volume, checking the shape invariants.
    pub fn new(dims: [usize; 3], spacing: [f32; 3], data: Vec<f32>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidVolume(format!("dims must be >= 1, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidVolume(format!(
                "spacing must be positive and finite, got {spacing:?}"
            )));
        }
        let expected = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::InvalidVolume(format!("dims {dims:?} overflow")))?;
        if data.len() != expected {
            return Err(Error::InvalidVolume(format!(
                "data length {} does not match dims {dims:?} ({expected} voxels)",
                data.len()
            )));
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    /// A volume with unit spacing where every voxel holds `value`.
    ///
    /// Panics if any dimension is zero.
    pub fn filled(dims: [usize; 3], value: f32) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "dims must be >= 1");
        Self {
            dims,
            spacing: [1.0; 3],
            data: vec![value; dims[0] * dims[1] * dims[2]],
        }
    }

    /// Builds a unit-spacing volume by evaluating `f(x, y, z)` in storage order.
    ///
    /// Panics if any dimension is zero.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f32) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "dims must be >= 1");
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self {
            dims,
            spacing: [1.0; 3],
            data,
        }
    }

    /// Same geometry as `self`, new voxel values.
    pub(crate) fn with_data(&self, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            dims: self.dims,
            spacing: self.spacing,
            data,
        }
    }

    pub fn with_spacing(mut self, spacing: [f32; 3]) -> Result<Self> {
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidVolume(format!(
                "spacing must be positive and finite, got {spacing:?}"
            )));
        }
        self.spacing = spacing;
        Ok(self)
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn spacing(&self) -> [f32; 3] {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Linear storage index of an in-range voxel.
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    /// Value at an in-range voxel. Panics when out of range.
    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        assert!(
            x < self.dims[0] && y < self.dims[1] && z < self.dims[2],
            "voxel ({x}, {y}, {z}) outside {:?}",
            self.dims
        );
        self.data[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: f32) {
        let i = self.index(x, y, z);
        self.data[i] = value;
    }

    /// Value at `(i, j, k)` with each index reflected back into range.
    ///
    /// Reflection does not repeat the edge sample: `-1` reads index `1` and
    /// `n` reads index `n - 2`. Axes of size one always read their single
    /// sample.
    #[inline]
    pub fn sample_mirrored(&self, i: isize, j: isize, k: isize) -> f32 {
        let x = mirror_index(i, self.dims[0]);
        let y = mirror_index(j, self.dims[1]);
        let z = mirror_index(k, self.dims[2]);
        self.data[self.index(x, y, z)]
    }

    /// Copies the box `origin .. origin + extent` into a new volume.
    pub fn crop(&self, origin: [usize; 3], extent: [usize; 3]) -> Result<Volume3D> {
        let in_range = (0..3).all(|a| {
            extent[a] >= 1
                && origin[a]
                    .checked_add(extent[a])
                    .is_some_and(|end| end <= self.dims[a])
        });
        if !in_range {
            return Err(Error::OutOfRange {
                origin,
                extent,
                dims: self.dims,
            });
        }
        let mut data = Vec::with_capacity(extent[0] * extent[1] * extent[2]);
        for z in origin[2]..origin[2] + extent[2] {
            for y in origin[1]..origin[1] + extent[1] {
                let start = self.index(origin[0], y, z);
                data.extend_from_slice(&self.data[start..start + extent[0]]);
            }
        }
        Volume3D::new(extent, self.spacing, data)
    }

    /// Crops a centered box of `extent` voxels (clamped to the volume size).
    pub fn crop_center(&self, extent: [usize; 3]) -> Result<Volume3D> {
        let extent = [
            extent[0].min(self.dims[0]),
            extent[1].min(self.dims[1]),
            extent[2].min(self.dims[2]),
        ];
        let origin = [
            (self.dims[0] - extent[0]) / 2,
            (self.dims[1] - extent[1]) / 2,
            (self.dims[2] - extent[2]) / 2,
        ];
        self.crop(origin, extent)
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    /// Arithmetic mean, accumulated sequentially in `f64`.
    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    /// Fails unless every voxel is finite and non-negative, as magnitude data must be.
    pub fn check_magnitude(&self) -> Result<()> {
        match self.data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidVolume(format!(
                "magnitude volume has invalid value {} at linear index {i}",
                self.data[i]
            ))),
        }
    }
}

/// Reflects `i` into `0..n` without repeating the edge sample.
///
/// The reflection is periodic with period `2 (n - 1)`, so arbitrarily distant
/// indices are handled, which matters when a window is wider than the axis.
#[inline]
pub fn mirror_index(i: isize, n: usize) -> usize {
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    if i >= 0 && (i as usize) < n {
        return i as usize;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Mirrored source indices for every position and window offset along one axis.
///
/// Entry `[p * (2r + 1) + (d + r)]` is `mirror_index(p + d, n)`.
pub(crate) fn mirror_table(n: usize, radius: usize) -> Vec<usize> {
    let width = 2 * radius + 1;
    let mut table = Vec::with_capacity(n * width);
    for p in 0..n as isize {
        for d in -(radius as isize)..=radius as isize {
            table.push(mirror_index(p + d, n));
        }
    }
    table
}
