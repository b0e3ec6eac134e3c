//! Modified Bessel functions, the Rician variance correction and the MAD scale estimate.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this argument the power series is used; above it the large-argument expansion.
const BESSEL_SERIES_LIMIT: f64 = 20.0;

/// Above this SNR the correction factor is evaluated from its expansion in `1 / theta^2`.
const XI_SERIES_THETA: f64 = 100.0;

/// Normal-consistency constant of the median absolute deviation.
pub const MAD_NORMAL_CONSTANT: f64 = 0.6745;

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Bessel argument must be finite, got {x}")))
    }
}

/// Power series of `I_nu(x)` for `nu` in {0, 1}, `x >= 0`.
fn series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..500u32 {
        let k = k as f64;
        term *= q / (k * (k + nu as f64));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `sqrt(2 pi x) e^{-x} I_nu(x)` from the large-argument expansion, `x > 0`.
fn asymptotic_bracket(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for k in 1..60u32 {
        let odd = (2 * k - 1) as f64;
        let next = term * -(mu - odd * odd) / (8.0 * k as f64 * x);
        // The expansion is asymptotic: stop at the smallest term.
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn scaled(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= BESSEL_SERIES_LIMIT {
        series(nu, ax) * (-ax).exp()
    } else {
        asymptotic_bracket(nu, ax) / (2.0 * PI * ax).sqrt()
    };
    if nu == 1 && x < 0.0 {
        -v
    } else {
        v
    }
}

/// Exponentially scaled `e^{-|x|} I0(x)`; finite for every finite `x`.
pub fn bessel_i0e(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(scaled(0, x))
}

/// Exponentially scaled `e^{-|x|} I1(x)`; finite for every finite `x`.
pub fn bessel_i1e(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(scaled(1, x))
}

fn unscale(x: f64, scaled: f64) -> Result<f64> {
    let ax = x.abs();
    if ax <= BESSEL_SERIES_LIMIT {
        return Ok(scaled * ax.exp());
    }
    // Split the exponential so values just below f64::MAX are still reachable.
    let half = (0.5 * ax).exp();
    let v = scaled * half * half;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(x))
    }
}

/// Modified Bessel function of the first kind, order 0.
///
/// Errors with [`Error::Overflow`] once the result exceeds `f64::MAX`
/// (|x| beyond roughly 713).
pub fn bessel_i0(x: f64) -> Result<f64> {
    check_finite(x)?;
    if x.abs() <= BESSEL_SERIES_LIMIT {
        return Ok(series(0, x.abs()));
    }
    unscale(x, scaled(0, x))
}

/// Modified Bessel function of the first kind, order 1 (odd in `x`).
pub fn bessel_i1(x: f64) -> Result<f64> {
    check_finite(x)?;
    if x.abs() <= BESSEL_SERIES_LIMIT {
        let v = series(1, x.abs());
        return Ok(if x < 0.0 { -v } else { v });
    }
    unscale(x, scaled(1, x))
}

/// Ratio of the Rician magnitude variance to the underlying Gaussian variance
/// at signal-to-noise ratio `theta`:
///
/// `xi(theta) = 2 + theta^2 - pi/8 exp(-theta^2/2) [(2 + theta^2) I0(theta^2/4) + theta^2 I1(theta^2/4)]^2`
///
/// The exponential is folded into scaled Bessel evaluations before squaring,
/// so nothing overflows; past `theta = 100` the expansion
/// `1 - u/2 - u^2/2 - 11 u^3 / 8` with `u = theta^-2` is used instead.
/// The result lies in `[2 - pi/2, 1)` and tends to 1 as `theta` grows.
pub fn xi_correction(theta: f64) -> Result<f64> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "SNR theta must be finite and >= 0, got {theta}"
        )));
    }
    if theta > XI_SERIES_THETA {
        return Ok(xi_large_theta(theta));
    }
    Ok(xi_scaled(theta))
}

pub(crate) fn xi_scaled(theta: f64) -> f64 {
    let t2 = theta * theta;
    let x = 0.25 * t2;
    // exp(-t2/2) * [..]^2 == [exp(-x) * ..]^2
    let bracket = (2.0 + t2) * scaled(0, x) + t2 * scaled(1, x);
    2.0 + t2 - PI / 8.0 * bracket * bracket
}

pub(crate) fn xi_large_theta(theta: f64) -> f64 {
    let u = 1.0 / (theta * theta);
    1.0 - u * (0.5 + u * (0.5 + u * 11.0 / 8.0))
}

/// Robust Gaussian scale estimate `median(|y|) / 0.6745`.
///
/// For an even number of samples the median is the mean of the two central
/// order statistics.
pub fn mad_sigma(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut abs: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    Ok(median_in_place(&mut abs) / MAD_NORMAL_CONSTANT)
}

/// Median of a nonempty slice, reordering it.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Plain power series, independent of the production code path.
    fn series_oracle(nu: u32, x: f64) -> f64 {
        let half = x / 2.0;
        let mut sum = 0.0;
        let mut k_fact = 1.0f64;
        for k in 0..120u32 {
            if k > 0 {
                k_fact *= k as f64;
            }
            let kn_fact = if nu == 0 { k_fact } else { k_fact * (k + 1) as f64 };
            sum += half.powi((2 * k + nu) as i32) / (k_fact * kn_fact);
        }
        sum
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn bessel_reference_points() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert_eq!(bessel_i1(0.0).unwrap(), 0.0);
        // High-precision reference values.
        assert_relative_eq!(bessel_i0(1.0).unwrap(), 1.2660658777520082, max_relative = 1e-12);
        assert_relative_eq!(bessel_i0(5.0).unwrap(), 27.239871823604446, max_relative = 1e-12);
        assert_relative_eq!(bessel_i1(1.0).unwrap(), 0.5651591039924850, max_relative = 1e-12);
        assert_eq!(bessel_i1(-2.0).unwrap(), -bessel_i1(2.0).unwrap());
    }

    #[test]
    fn bessel_matches_series_oracle_up_to_30() {
        let mut x = -30.0;
        while x <= 30.0 {
            let i0 = bessel_i0(x).unwrap();
            let i1 = bessel_i1(x).unwrap();
            assert_relative_eq!(i0, series_oracle(0, x.abs()), max_relative = 1e-8);
            let o1 = series_oracle(1, x.abs());
            assert_relative_eq!(i1, if x < 0.0 { -o1 } else { o1 }, max_relative = 1e-8);
            assert!(i0 >= 1.0);
            x += 0.37;
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        for nu in [0, 1] {
            let s = series(nu, BESSEL_SERIES_LIMIT) * (-BESSEL_SERIES_LIMIT).exp();
            let a = asymptotic_bracket(nu, BESSEL_SERIES_LIMIT) / (2.0 * PI * BESSEL_SERIES_LIMIT).sqrt();
            assert_relative_eq!(s, a, max_relative = 1e-10);
        }
    }

    #[test]
    fn large_arguments_and_overflow() {
        // Reference values from mpmath.
        assert_relative_eq!(bessel_i0(700.0).unwrap(), 1.5295933476718737e302, max_relative = 1e-8);
        assert_relative_eq!(bessel_i1(-700.0).unwrap(), -1.5285003902339007e302, max_relative = 1e-8);
        assert!(matches!(bessel_i0(720.0), Err(Error::Overflow(_))));
        assert!(matches!(bessel_i1(-720.0), Err(Error::Overflow(_))));
        assert!(bessel_i0e(1e6).unwrap().is_finite());
        assert!(bessel_i0(f64::NAN).is_err());
    }

    /// Literal evaluation of the correction factor with unscaled Bessel functions.
    fn xi_literal(theta: f64) -> f64 {
        let t2 = theta * theta;
        let x = t2 / 4.0;
        let b = (2.0 + t2) * bessel_i0(x).unwrap() + t2 * bessel_i1(x).unwrap();
        2.0 + t2 - PI / 8.0 * (-t2 / 2.0).exp() * b * b
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn xi_reference_points() {
        assert!((xi_correction(0.0).unwrap() - (2.0 - PI / 2.0)).abs() < 1e-9);
        assert!((xi_correction(100.0).unwrap() - 1.0).abs() < 1e-3);
        assert!((xi_correction(50.0).unwrap() - 1.0).abs() < 1e-3);
        // mpmath at 50 digits.
        assert_relative_eq!(xi_correction(1.0).unwrap(), 0.6019233344225712839, max_relative = 1e-12);
        assert_relative_eq!(xi_correction(3.0).unwrap(), 0.9347533522965257885, max_relative = 1e-12);
        assert_relative_eq!(xi_correction(20.0).unwrap(), 0.99874685326242922571, max_relative = 1e-12);
        assert_relative_eq!(xi_correction(1000.0).unwrap(), 0.99999949999949999862, max_relative = 1e-14);
    }

    #[test]
    fn xi_scaled_equals_literal_form() {
        for i in 0..=300 {
            let t = i as f64 * 0.1;
            assert_relative_eq!(xi_scaled(t), xi_literal(t), max_relative = 1e-11);
        }
    }

    #[test]
    fn xi_branches_continuous_at_switch() {
        let t = XI_SERIES_THETA;
        assert_relative_eq!(xi_scaled(t), xi_large_theta(t), max_relative = 1e-6);
    }

    #[test]
    fn xi_monotone_and_bounded() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = xi_correction(i as f64 * 0.1).unwrap();
            assert!(v >= prev, "xi decreased at {}", i as f64 * 0.1);
            assert!(v > 0.0 && v <= 2.0);
            prev = v;
        }
        assert!(xi_correction(-0.1).is_err());
        assert!(xi_correction(f64::INFINITY).is_err());
    }

    #[test]
    fn mad_examples() {
        assert_relative_eq!(
            mad_sigma(&[-1.0, 0.0, 1.0, 2.0, -2.0]).unwrap(),
            1.0 / 0.6745,
            max_relative = 1e-15
        );
        assert_eq!(mad_sigma(&[0.0; 9]).unwrap(), 0.0);
        assert_relative_eq!(mad_sigma(&[1.0, -3.0, 2.0, 4.0]).unwrap(), 2.5 / 0.6745);
        assert!(matches!(mad_sigma(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn mad_gaussian_consistency() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        let normal = Normal::new(0.0, 2.0).unwrap();
        let samples: Vec<f64> = (0..1_000_000).map(|_| normal.sample(&mut rng)).collect();
        let s = mad_sigma(&samples).unwrap();
        assert!((s - 2.0).abs() < 0.02, "mad sigma {s}");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mad_sign_invariant_and_linear(
                xs in prop::collection::vec(-1e3f64..1e3, 1..64),
                c in -50f64..50.0,
            ) {
                let base = mad_sigma(&xs).unwrap();
                let flipped: Vec<f64> = xs.iter().map(|v| -v).collect();
                prop_assert_eq!(mad_sigma(&flipped).unwrap(), base);
                let scaled: Vec<f64> = xs.iter().map(|v| c * v).collect();
                let s = mad_sigma(&scaled).unwrap();
                prop_assert!((s - c.abs() * base).abs() <= 1e-9 * (1.0 + c.abs() * base));
            }

            #[test]
            fn i1_is_odd(x in -700f64..700.0) {
                prop_assert_eq!(bessel_i1(-x).unwrap(), -bessel_i1(x).unwrap());
                prop_assert!(bessel_i0(x).unwrap() >= 1.0);
            }
        }
    }
}
