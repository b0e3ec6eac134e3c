//! Counter-based Gaussian draws.
//!
//! Every voxel owns an independent stream addressed by `(seed, voxel index)`,
//! so the noise field does not depend on how voxels are split across threads.
//! The block function is Philox4x32 with 10 rounds. One Philox block gives two
//! 53-bit uniforms which the Box-Muller transform turns into the pair
//! `(n1, n2)`. Transcendentals come from `libm` so results match bit for bit
//! on every platform.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32-10 block function.
#[inline]
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Two independent standard normal draws for stream `index` under `seed`.
#[inline]
pub fn gaussian_pair(seed: u64, index: u64) -> (f64, f64) {
    let out = philox4x32(
        [index as u32, (index >> 32) as u32, 0, 0],
        [seed as u32, (seed >> 32) as u32],
    );
    let a = ((out[0] as u64) << 32) | out[1] as u64;
    let b = ((out[2] as u64) << 32) | out[3] as u64;
    // u1 in (0, 1] keeps the logarithm finite; u2 in [0, 1).
    let u1 = ((a >> 11) + 1) as f64 * TWO_POW_M53;
    let u2 = (b >> 11) as f64 * TWO_POW_M53;
    let r = (-2.0 * libm::log(u1)).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * libm::cos(phi), r * libm::sin(phi))
}
