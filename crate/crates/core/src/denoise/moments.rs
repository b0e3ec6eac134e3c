use crate::volume::Volume3D;
use crate::window::box_mean;

/// First and second moments of a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchMoments {
    pub mean: f64,
    pub sqmean: f64,
}

impl PatchMoments {
    pub fn new(mean: f64, sqmean: f64) -> Self {
        Self { mean, sqmean }
    }
}

/// Per-voxel patch moments `<M>` and `<M^2>` over a `(2r + 1)^3` window.
///
/// Both fields share the source geometry. Windows are mirrored at the
/// volume faces, so every voxel averages the same number of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTables {
    pub mean_field: Volume3D,
    pub sqmean_field: Volume3D,
    pub patch_radius: usize,
}

impl MomentTables {
    pub fn build(volume: &Volume3D, patch_radius: usize) -> Self {
        let dims = volume.dims();
        let values: Vec<f64> = volume.data().iter().map(|&v| v as f64).collect();
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        let to_f32 = |v: Vec<f64>| volume.with_data(v.into_iter().map(|x| x as f32).collect());
        let (mean, sqmean) = rayon::join(
            || box_mean(&values, dims, patch_radius),
            || box_mean(&squares, dims, patch_radius),
        );
        Self {
            mean_field: to_f32(mean),
            sqmean_field: to_f32(sqmean),
            patch_radius,
        }
    }

    #[inline]
    pub fn at(&self, index: usize) -> PatchMoments {
        PatchMoments {
            mean: self.mean_field.data()[index] as f64,
            sqmean: self.sqmean_field.data()[index] as f64,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.mean_field.dims()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_volume() {
        let t = MomentTables::build(&Volume3D::filled([5, 4, 6], 7.0), 1);
        assert!(t.mean_field.data().iter().all(|&v| v == 7.0));
        assert!(t.sqmean_field.data().iter().all(|&v| v == 49.0));
    }

    #[test]
    fn radius_zero_is_pointwise() {
        let v = Volume3D::from_fn([4, 3, 2], |x, y, z| (x + 3 * y) as f32 * 0.5 + z as f32);
        let t = MomentTables::build(&v, 0);
        assert_eq!(t.mean_field, v);
        for (s, m) in t.sqmean_field.data().iter().zip(v.data()) {
            assert_eq!(*s, m * m);
        }
    }

    #[test]
    fn matches_27_sample_windows() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        let v = Volume3D::from_fn([8, 8, 8], |_, _, _| rng.gen_range(0.0f32..255.0));
        let t = MomentTables::build(&v, 1);
        for z in 0..8isize {
            for y in 0..8isize {
                for x in 0..8isize {
                    let mut s = 0.0f64;
                    let mut s2 = 0.0f64;
                    for dz in -1..=1 {
                        for dy in -1..=1 {
                            for dx in -1..=1 {
                                let m = v.sample_mirrored(x + dx, y + dy, z + dz) as f64;
                                s += m;
                                s2 += m * m;
                            }
                        }
                    }
                    let i = v.index(x as usize, y as usize, z as usize);
                    let (mean, sq) = (s / 27.0, s2 / 27.0);
                    assert!((t.mean_field.data()[i] as f64 - mean).abs() <= 1e-4 * mean.abs());
                    assert!((t.sqmean_field.data()[i] as f64 - sq).abs() <= 1e-4 * sq.abs());
                    // Jensen
                    let tm = t.at(i);
                    assert!(tm.sqmean >= tm.mean * tm.mean * (1.0 - 1e-4));
                }
            }
        }
    }
}
