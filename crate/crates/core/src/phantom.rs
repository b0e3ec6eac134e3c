//! Synthetic ground-truth volumes.
//!
//! [`brain_phantom`] stands in for a central crop of an 8-bit T1-weighted
//! brain volume when no real data is available. It is piecewise constant with
//! BrainWeb-like tissue levels and curved, folded tissue boundaries.

use crate::volume::Volume3D;

/// Tissue intensities of the brain phantom (8-bit, T1-like contrast).
pub mod tissue {
    pub const CSF: f32 = 40.0;
    pub const GREY: f32 = 105.0;
    pub const WHITE: f32 = 160.0;
    pub const VESSEL: f32 = 215.0;
}

/// A two-compartment volume: `low` for `x < nx / 2`, `high` elsewhere.
pub fn two_region(dims: [usize; 3], low: f32, high: f32) -> Volume3D {
    let split = dims[0] / 2;
    Volume3D::from_fn(dims, |x, _, _| if x < split { low } else { high })
}

/// Piecewise-constant brain-like phantom filling the whole field of view.
///
/// Layout in normalised coordinates `u, v, w` in `[-1, 1]`: a white-matter
/// core with a folded boundary, grey matter around it, thin CSF-filled sulci
/// through the grey band, two lateral ventricles and a few small bright
/// vessels. The geometry scales with `dims`.
pub fn brain_phantom(dims: [usize; 3]) -> Volume3D {
    // Each voxel averages SUPERSAMPLE^3 point samples, giving the partial-volume
    // blending real scans show at tissue boundaries.
    const SUPERSAMPLE: usize = 3;
    let coord = |i: usize, sub: usize, n: usize| {
        if n <= 1 {
            0.0
        } else {
            let pos = i as f64 + (sub as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
            2.0 * pos / (n - 1) as f64 - 1.0
        }
    };
    let inv = 1.0 / (SUPERSAMPLE * SUPERSAMPLE * SUPERSAMPLE) as f64;
    Volume3D::from_fn(dims, |x, y, z| {
        let mut sum = 0.0f64;
        for sz in 0..SUPERSAMPLE {
            for sy in 0..SUPERSAMPLE {
                for sx in 0..SUPERSAMPLE {
                    let p = [coord(x, sx, dims[0]), coord(y, sy, dims[1]), coord(z, sz, dims[2])];
                    sum += brain_tissue_at(p) as f64;
                }
            }
        }
        (sum * inv) as f32
    })
}

/// Tissue intensity of the continuous phantom at normalised position `p`.
fn brain_tissue_at([u, v, w]: [f64; 3]) -> f32 {
    const VESSELS: [([f64; 3], f64); 4] = [
        ([0.55, -0.35, 0.2], 0.08),
        ([-0.6, 0.45, -0.3], 0.07),
        ([0.1, 0.7, 0.55], 0.06),
        ([-0.2, -0.65, -0.6], 0.08),
    ];
    for (c, r) in &VESSELS {
        let d2 = (u - c[0]).powi(2) + (v - c[1]).powi(2) + (w - c[2]).powi(2);
        if d2 < r * r {
            return tissue::VESSEL;
        }
    }

    // Lateral ventricles.
    for side in [-1.0, 1.0] {
        let e = ((u - side * 0.2) / 0.09).powi(2) + ((v - 0.05) / 0.32).powi(2) + (w / 0.2).powi(2);
        if e < 1.0 {
            return tissue::CSF;
        }
    }

    // Folded white-matter boundary.
    let radius = (u * u + v * v + w * w).sqrt();
    let angle = v.atan2(u);
    let fold = 0.15 * (5.0 * angle).sin() * (3.5 * w + 0.5).cos() + 0.08 * (9.0 * w + 2.0 * u).sin();
    if radius < 1.0 + fold {
        return tissue::WHITE;
    }

    // Sulci: thin sheets crossing the grey band.
    let sheet = (7.0 * angle + 2.5 * w).sin();
    if radius > 1.05 && sheet.abs() < 0.15 {
        return tissue::CSF;
    }
    tissue::GREY
}
