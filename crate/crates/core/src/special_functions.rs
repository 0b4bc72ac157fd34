//! Complementary error function of real and complex argument.
//!
//! The complex routines are built on the Faddeeva function
//! `w(z) = exp(-z²)·erfc(-iz)`: a Laplace continued fraction far from the
//! origin and the Zaghloul–Ali exponential sums elsewhere. Real `erfc` and
//! `erfcx` use Cody's rational approximations, which the Faddeeva sums need
//! internally as well.

// coefficient tables are kept exactly as published
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::{c, is_finite, re, Cplx, Real};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;

// Cody's coefficients: erf on |x| <= 0.46875.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const ERF_B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
// erfcx on 0.46875 < x <= 4.
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_09,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_13,
    881.952_221_241_769_09,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_3,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_86,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247_2,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
// erfcx on x > 4, in powers of 1/x².
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_34,
    0.360_344_899_949_804_44,
    0.125_781_726_111_229_25,
    0.016_083_785_148_742_277,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_098,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822_4,
    1.872_952_849_923_460_5,
    0.527_905_102_951_428_41,
    0.060_518_341_312_441_319,
    0.002_335_204_976_268_691_9,
];

const SMALL_ARG: f64 = 0.468_75;

fn erf_small<T: Real>(x: T) -> T {
    let z = x * x;
    let l = |i: usize| T::lit(ERF_A[i]);
    let m = |i: usize| T::lit(ERF_B[i]);
    let num = (((l(4) * z + l(0)) * z + l(1)) * z + l(2)) * z + l(3);
    let den = (((z + m(0)) * z + m(1)) * z + m(2)) * z + m(3);
    x * num / den
}

// exp(x²)·erfc(x) for x > 0.46875.
fn erfcx_large<T: Real>(y: T) -> T {
    if y <= T::lit(4.0) {
        let mut num = T::lit(ERFC_C[8]) * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + T::lit(ERFC_C[i])) * y;
            den = (den + T::lit(ERFC_D[i])) * y;
        }
        (num + T::lit(ERFC_C[7])) / (den + T::lit(ERFC_D[7]))
    } else if y < T::lit(5e7) {
        let z = (y * y).recip();
        let mut num = T::lit(ERFC_P[5]) * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + T::lit(ERFC_P[i])) * z;
            den = (den + T::lit(ERFC_Q[i])) * z;
        }
        let r = z * (num + T::lit(ERFC_P[4])) / (den + T::lit(ERFC_Q[4]));
        (T::lit(FRAC_1_SQRT_PI) - r) / y
    } else {
        T::lit(FRAC_1_SQRT_PI) / y
    }
}

// exp(-x²) with the argument split at 1/16 steps so rounding in x² does not
// turn into a relative error of order x²·eps.
fn exp_neg_square<T: Real>(x: T) -> T {
    let sixteen = T::lit(16.0);
    let head = (x * sixteen).trunc() / sixteen;
    let tail = (x - head) * (x + head);
    (-head * head).exp() * (-tail).exp()
}

fn exp_pos_square<T: Real>(x: T) -> T {
    let sixteen = T::lit(16.0);
    let head = (x * sixteen).trunc() / sixteen;
    let tail = (x - head) * (x + head);
    (head * head).exp() * tail.exp()
}

/// Real complementary error function.
pub fn erfc_real<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let y = x.abs();
    if y <= T::lit(SMALL_ARG) {
        return T::one() - erf_small(x);
    }
    let tail = if y >= T::lit(27.0) {
        T::zero()
    } else {
        erfcx_large(y) * exp_neg_square(y)
    };
    if x < T::zero() {
        T::lit(2.0) - tail
    } else {
        tail
    }
}

/// Real scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Overflows to `+inf` for very negative `x`, where the true value does.
pub fn erfcx_real<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let y = x.abs();
    if y <= T::lit(SMALL_ARG) {
        return (x * x).exp() * (T::one() - erf_small(x));
    }
    if x > T::zero() {
        return erfcx_large(y);
    }
    if x < T::lit(-26.7) {
        return T::infinity();
    }
    T::lit(2.0) * exp_pos_square(y) - erfcx_large(y)
}

#[inline]
fn sinc<T: Real>(x: T, sin_x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() - T::lit(1.0 / 6.0) * x * x
    } else {
        sin_x / x
    }
}

#[inline]
fn sinh_taylor<T: Real>(x: T) -> T {
    x * (T::one() + x * x * (T::lit(1.0 / 6.0) + T::lit(1.0 / 120.0) * x * x))
}

/// Faddeeva function `w(z) = exp(-z²)·erfc(-iz)` at full working precision.
pub fn faddeeva<T: Real>(z: Cplx<T>) -> Cplx<T> {
    let zero = T::zero();
    let x = z.re.abs();
    let y = z.im;
    let ya = y.abs();
    if z.re.is_nan() || y.is_nan() {
        return c(T::nan(), T::nan());
    }

    let relerr = T::epsilon();
    let a = T::PI() / (-(relerr * T::lit(0.5)).ln()).sqrt();
    let a2 = a * a;
    let cc = T::lit(2.0) / T::PI() * a;
    let ispi = T::lit(FRAC_1_SQRT_PI);

    let use_continued_fraction = ya > T::lit(7.0)
        || (x > T::lit(6.0)
            && (ya > T::lit(0.1) || (x > T::lit(8.0) && ya > T::lit(1e-10)) || x > T::lit(28.0)));

    if use_continued_fraction {
        // Evaluated at z or -z, whichever lies in the upper half-plane.
        let xs = if y < zero { -z.re } else { z.re };
        let w_upper = if x + ya > T::lit(4000.0) {
            if x + ya > T::lit(1e7) {
                // w(z) ~ i/(sqrt(pi) z), scaled against overflow
                if x > ya {
                    let yax = ya / xs;
                    let denom = ispi / (xs + yax * ya);
                    c(denom * yax, denom)
                } else if ya.is_infinite() {
                    c(zero, zero)
                } else {
                    let xya = xs / ya;
                    let denom = ispi / (xya * xs + ya);
                    c(denom, denom * xya)
                }
            } else {
                // two-term truncation i z / (sqrt(pi) (z² - 1/2))
                let dr = xs * xs - ya * ya - T::lit(0.5);
                let di = T::lit(2.0) * xs * ya;
                let denom = ispi / (dr * dr + di * di);
                c(denom * (xs * di - ya * dr), denom * (xs * dr + ya * di))
            }
        } else {
            // Number of continued-fraction terms (Poppe–Wijers style fit).
            let nu_terms = (T::lit(3.9)
                + T::lit(11.398) / (T::lit(0.08254) * x + T::lit(0.1421) * ya + T::lit(0.2023)))
            .floor();
            let mut wr = xs;
            let mut wi = ya;
            let mut nu = T::lit(0.5) * (nu_terms - T::one());
            while nu > T::lit(0.4) {
                let denom = nu / (wr * wr + wi * wi);
                wr = xs - wr * denom;
                wi = ya + wi * denom;
                nu = nu - T::lit(0.5);
            }
            let denom = ispi / (wr * wr + wi * wi);
            c(denom * wi, denom * wr)
        };
        if y < zero {
            // w(z) = 2 exp(-z²) - w(-z)
            let e = c((ya - xs) * (xs + ya), T::lit(2.0) * xs * y).exp();
            return e * T::lit(2.0) - w_upper;
        }
        return w_upper;
    }

    let mut sum1 = zero;
    let mut sum2 = zero;
    let mut sum3 = zero;
    let mut sum4 = zero;
    let mut sum5 = zero;

    if x < T::lit(10.0) {
        let mut prod2ax = T::one();
        let mut prodm2ax = T::one();
        let expx2;
        let exp2ax = (T::lit(2.0) * a * x).exp();
        let expm2ax = exp2ax.recip();
        if x < T::lit(5e-4) {
            // sum5 - sum4 accumulated together to avoid cancellation
            let x2 = x * x;
            expx2 = T::one() - x2 * (T::one() - T::lit(0.5) * x2);
            let two_ax = T::lit(2.0) * a * x;
            let exp2ax_t = T::one()
                + two_ax * (T::one() + two_ax * (T::lit(0.5) + T::lit(1.0 / 6.0) * two_ax));
            let expm2ax_t = T::one()
                - two_ax * (T::one() - two_ax * (T::lit(0.5) - T::lit(1.0 / 6.0) * two_ax));
            let mut n = 1usize;
            loop {
                let nf = T::count(n);
                let coef = (-a2 * nf * nf).exp() * expx2 / (a2 * nf * nf + y * y);
                prod2ax = prod2ax * exp2ax_t;
                prodm2ax = prodm2ax * expm2ax_t;
                sum1 = sum1 + coef;
                sum2 = sum2 + coef * prodm2ax;
                sum3 = sum3 + coef * prod2ax;
                sum5 = sum5 + coef * (T::lit(2.0) * a) * nf * sinh_taylor(T::lit(2.0) * a * nf * x);
                if coef * prod2ax < relerr * sum3 || n > 200 {
                    break;
                }
                n += 1;
            }
        } else {
            expx2 = (-x * x).exp();
            let mut n = 1usize;
            loop {
                let nf = T::count(n);
                let coef = (-a2 * nf * nf).exp() * expx2 / (a2 * nf * nf + y * y);
                prod2ax = prod2ax * exp2ax;
                prodm2ax = prodm2ax * expm2ax;
                sum1 = sum1 + coef;
                sum2 = sum2 + coef * prodm2ax;
                sum4 = sum4 + coef * prodm2ax * (a * nf);
                sum3 = sum3 + coef * prod2ax;
                sum5 = sum5 + coef * prod2ax * (a * nf);
                // sum5 decays slowest
                if coef * prod2ax * a * nf < relerr * sum5 || n > 200 {
                    break;
                }
                n += 1;
            }
        }

        let expx2erfcxy = if y > T::lit(-6.0) {
            expx2 * erfcx_real(y)
        } else {
            T::lit(2.0) * (y * y - x * x).exp()
        };
        let ret = if y > T::lit(5.0) {
            // imaginary terms cancel
            let sinxy = (x * y).sin();
            c(
                (expx2erfcxy - cc * y * sum1) * (T::lit(2.0) * x * y).cos()
                    + (cc * x * expx2) * sinxy * sinc(x * y, sinxy),
                zero,
            )
        } else {
            let xs = z.re;
            let sinxy = (xs * y).sin();
            let sin2xy = (T::lit(2.0) * xs * y).sin();
            let cos2xy = (T::lit(2.0) * xs * y).cos();
            let coef1 = expx2erfcxy - cc * y * sum1;
            let coef2 = cc * xs * expx2;
            c(
                coef1 * cos2xy + coef2 * sinxy * sinc(xs * y, sinxy),
                coef2 * sinc(T::lit(2.0) * xs * y, sin2xy) - coef1 * sin2xy,
            )
        };
        return ret
            + c(
                T::lit(0.5) * cc * y * (sum2 + sum3),
                (T::lit(0.5) * cc * (sum5 - sum4)).copysign(z.re),
            );
    }

    // x >= 10 with |y| tiny: only sum3 and sum5 contribute.
    let ret = re((-x * x).exp());
    let n0 = (x / a + T::lit(0.5)).floor();
    let dx = a * n0 - x;
    sum3 = (-dx * dx).exp() / (a2 * n0 * n0 + y * y);
    sum5 = a * n0 * sum3;
    let exp1 = (T::lit(4.0) * a * dx).exp();
    let mut exp1dn = T::one();
    let mut dn = 1usize;
    let finish = |sum3: T, sum5: T| {
        ret + c(
            T::lit(0.5) * cc * y * (sum2 + sum3),
            (T::lit(0.5) * cc * (sum5 - sum4)).copysign(z.re),
        )
    };
    while T::count(dn) < n0 {
        let dnf = T::count(dn);
        let np = n0 + dnf;
        let nm = n0 - dnf;
        let mut tp = (-(a * dnf + dx) * (a * dnf + dx)).exp();
        exp1dn = exp1dn * exp1;
        let mut tm = tp * exp1dn;
        tp = tp / (a2 * np * np + y * y);
        tm = tm / (a2 * nm * nm + y * y);
        sum3 = sum3 + tp + tm;
        sum5 = sum5 + a * (np * tp + nm * tm);
        if a * (np * tp + nm * tm) < relerr * sum5 {
            return finish(sum3, sum5);
        }
        dn += 1;
    }
    loop {
        let dnf = T::count(dn);
        let np = n0 + dnf;
        let tp = (-(a * dnf + dx) * (a * dnf + dx)).exp() / (a2 * np * np + y * y);
        sum3 = sum3 + tp;
        sum5 = sum5 + a * np * tp;
        if a * np * tp < relerr * sum5 || dn > 400 {
            return finish(sum3, sum5);
        }
        dn += 1;
    }
}

/// Scaled complementary error function `erfcx(z) = exp(z²)·erfc(z)`.
///
/// Finite wherever the true value is representable; in the right half-plane
/// it decays like `1/(z√π)` and never overflows.
pub fn erfcx_complex<T: Real>(z: Cplx<T>) -> Cplx<T> {
    if z.im == T::zero() {
        return re(erfcx_real(z.re));
    }
    faddeeva(c(-z.im, z.re))
}

/// Complementary error function `erfc(z) = 1 - erf(z)` of complex argument.
pub fn erfc_complex<T: Real>(z: Cplx<T>) -> Cplx<T> {
    if z.im == T::zero() {
        return re(erfc_real(z.re));
    }
    if z.re >= T::zero() {
        // exp(-z²)·w(iz), with the real part of -z² split for accuracy
        let (x, y) = (z.re, z.im);
        let phase = c(T::zero(), -T::lit(2.0) * x * y).exp();
        let modulus = exp_neg_square(x) * exp_pos_square(y);
        let scaled = faddeeva(c(-y, x));
        phase * scaled * modulus
    } else {
        re(T::lit(2.0)) - erfc_complex(-z)
    }
}

/// `∫₀^∞ exp(-a x² + b x) dx` for complex `a`, `b` with `Re(a) > 0`.
///
/// Closed form `½·√(π/a)·erfcx(-b / (2√a))` on the principal branch of `√a`.
pub fn gaussian_halfline_integral<T: Real>(a: Cplx<T>, b: Cplx<T>) -> Result<Cplx<T>> {
    if !(is_finite(a) && is_finite(b)) {
        return Err(Error::invalid("a, b", "must be finite"));
    }
    if !(a.re > T::zero()) {
        return Err(Error::invalid(
            "a",
            format!("Re(a) = {} must be positive", a.re),
        ));
    }
    let sqrt_a = a.sqrt();
    let arg = -b / (sqrt_a * T::lit(2.0));
    Ok(erfcx_complex(arg) * (T::PI().sqrt() * T::lit(0.5)) / sqrt_a)
}
