//! Separable cubic box means with mirror boundaries.

use rayon::prelude::*;

use crate::volume::mirror_table;

/// Mean of `values` over the `(2r + 1)^3` cube centred at every voxel.
///
/// `values` is in x-fastest order with shape `dims`. Sums run per axis
/// (x, then y, then z) in `f64`, each window accumulated from its lowest
/// offset to its highest, so the result does not depend on thread count.
pub(crate) fn box_mean(values: &[f64], dims: [usize; 3], radius: usize) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    debug_assert_eq!(values.len(), nx * ny * nz);
    let width = 2 * radius + 1;
    let slice = nx * ny;
    let mx = mirror_table(nx, radius);
    let my = mirror_table(ny, radius);
    let mz = mirror_table(nz, radius);

    let mut pass_x = vec![0.0f64; values.len()];
    pass_x
        .par_chunks_mut(nx)
        .zip(values.par_chunks(nx))
        .for_each(|(out, line)| {
            for (x, o) in out.iter_mut().enumerate() {
                *o = mx[x * width..(x + 1) * width].iter().map(|&i| line[i]).sum();
            }
        });

    let mut pass_y = vec![0.0f64; values.len()];
    pass_y
        .par_chunks_mut(slice)
        .zip(pass_x.par_chunks(slice))
        .for_each(|(out, src)| {
            for y in 0..ny {
                let rows = &my[y * width..(y + 1) * width];
                let out_row = &mut out[y * nx..(y + 1) * nx];
                for &r in rows {
                    let src_row = &src[r * nx..(r + 1) * nx];
                    for (o, s) in out_row.iter_mut().zip(src_row) {
                        *o += s;
                    }
                }
            }
        });
    drop(pass_x);

    let count = (width * width * width) as f64;
    let mut out = vec![0.0f64; values.len()];
    out.par_chunks_mut(slice).enumerate().for_each(|(z, out)| {
        for &zz in &mz[z * width..(z + 1) * width] {
            let src = &pass_y[zz * slice..(zz + 1) * slice];
            for (o, s) in out.iter_mut().zip(src) {
                *o += s;
            }
        }
        for o in out.iter_mut() {
            *o /= count;
        }
    });
    out
}
