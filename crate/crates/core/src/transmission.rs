//! Asymptotic transmission coefficient `T(A, B)` and its limits.

use rayon::prelude::*;

use crate::delta_closed_form::BarrierSpec;
use crate::error::{Error, Result};
use crate::gaussian_packet::PacketSpec;
use crate::quadrature::{tanh_sinh, GaussKronrod};
use crate::scalar::Real;
use crate::special_functions::erfc_real;

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const MIN_REL_TOL: f64 = 1e-13;
pub const MAX_REL_TOL: f64 = 1e-3;

/// A-values of the default sweep.
pub const DEFAULT_SWEEP_A: [f64; 4] = [0.25, 1.0, 4.0, 25.0];
pub const DEFAULT_SWEEP_B_RANGE: (f64, f64) = (1e-3, 1e2);
pub const DEFAULT_SWEEP_POINTS: usize = 60;

/// Gaussian weight beyond this many standard deviations (`√B`) is dropped; the
/// tail mass is below 1e-31.
const TAIL_SIGMAS: f64 = 12.0;

/// Normalized barrier strength `A = (Z/p0)²` and momentum spread
/// `B = σ_p(0)/p0²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessPoint<T> {
    a: T,
    b: T,
}

impl<T: Real> DimensionlessPoint<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && a >= T::zero()) {
            return Err(Error::invalid(
                "A",
                format!("must be finite and non-negative, got {a}"),
            ));
        }
        if !(b.is_finite() && b > T::zero()) {
            return Err(Error::invalid(
                "B",
                format!("must be finite and positive, got {b}"),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> T {
        self.a
    }
    pub fn b(&self) -> T {
        self.b
    }
}

/// Quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionResult<T> {
    pub value: T,
    pub abs_err: T,
}

/// Plane-wave transmission `1/(1 + A)`.
pub fn plane_wave_t<T: Real>(a: T) -> Result<T> {
    if !(a.is_finite() && a >= T::zero()) {
        return Err(Error::invalid(
            "A",
            format!("must be finite and non-negative, got {a}"),
        ));
    }
    Ok((T::one() + a).recip())
}

/// `A = (Z/p0)²`, `B = (1+ρ²)/(2(s p0)²)`.
pub fn point_from_physical<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
) -> DimensionlessPoint<T> {
    let sp = spec.s() * spec.p0();
    DimensionlessPoint {
        a: barrier.a_parameter(spec),
        b: (T::one() + spec.rho() * spec.rho()) / (T::lit(2.0) * sp * sp),
    }
}

fn check_rel_tol<T: Real>(rel_tol: T) -> Result<()> {
    if rel_tol >= T::lit(MIN_REL_TOL) && rel_tol <= T::lit(MAX_REL_TOL) {
        Ok(())
    } else {
        Err(Error::invalid(
            "rel_tol",
            format!("must lie in [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}], got {rel_tol}"),
        ))
    }
}

/// Transmitted fraction `(1-y)²/((1-y)² + A)`, written to stay exact at `A = 0`.
fn fraction<T: Real>(gap: T, a: T) -> T {
    if a == T::zero() {
        T::one()
    } else {
        let g2 = gap * gap;
        g2 / (g2 + a)
    }
}

/// `T(A,B) = (2πB)^(-1/2) ∫_{-∞}^{1} exp(-y²/2B) (1-y)²/((1-y)² + A) dy`.
///
/// Adaptive Gauss–Kronrod on `[-12√B, min(1, 12√B)]`, with breakpoints at the
/// Gaussian scales and at the `√A`-wide dip below `y = 1`.
pub fn transmission_t<T: Real>(
    point: &DimensionlessPoint<T>,
    rel_tol: T,
) -> Result<TransmissionResult<T>> {
    check_rel_tol(rel_tol)?;
    let (a, b) = (point.a, point.b);
    let sb = b.sqrt();
    let lo = -T::lit(TAIL_SIGMAS) * sb;
    let hi = T::one().min(T::lit(TAIL_SIGMAS) * sb);
    let norm = (T::lit(2.0) * T::PI() * b).sqrt().recip();
    let two_b = T::lit(2.0) * b;
    let f = |y: T| norm * (-(y * y) / two_b).exp() * fraction(T::one() - y, a);

    let sa = a.sqrt();
    let mut points = vec![lo, hi];
    for k in [1.0, 4.0, 8.0] {
        points.push(-T::lit(k) * sb);
        points.push(T::lit(k) * sb);
    }
    points.push(T::zero());
    for k in [0.1, 1.0, 10.0] {
        points.push(T::one() - T::lit(k) * sa);
    }
    points.retain(|&p| p >= lo && p <= hi);
    points.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    points.dedup();

    let gk = GaussKronrod::new(T::lit(1e-15).max(T::epsilon()) * rel_tol, rel_tol);
    let est = gk.integrate_with_breaks(f, &points)?;
    Ok(TransmissionResult {
        value: est.value.max(T::zero()).min(T::one()),
        abs_err: est.abs_err,
    })
}

/// Independent evaluation of `T(A,B)` as the average of the plane-wave
/// transmission `p²/(p² + Z²)` over the incoming momenta `p < 0`.
///
/// With `p = p0(-1 + √B u)` and `u` standard normal this reads
/// `∫_{-∞}^{1/√B} φ(u) (1 - √B u)²/((1 - √B u)² + A) du`, evaluated by
/// tanh-sinh quadrature, whose nodes cluster at the cutoff where the dip sits.
pub fn momentum_average_t<T: Real>(
    point: &DimensionlessPoint<T>,
    rel_tol: T,
) -> Result<TransmissionResult<T>> {
    check_rel_tol(rel_tol)?;
    let (a, b) = (point.a, point.b);
    let sb = b.sqrt();
    let cutoff = sb.recip();
    let tail = T::lit(TAIL_SIGMAS);
    let phi_norm = (T::lit(2.0) * T::PI()).sqrt().recip();
    let f = |u: T| phi_norm * (-(u * u) / T::lit(2.0)).exp() * fraction(T::one() - sb * u, a);
    let abs_tol = T::lit(1e-15).max(T::epsilon()) * rel_tol;
    let upper = cutoff.min(tail);
    let left = tanh_sinh(f, -tail, T::zero(), abs_tol, rel_tol)?;
    let right = tanh_sinh(f, T::zero(), upper, abs_tol, rel_tol)?;
    let value = left.value + right.value;
    Ok(TransmissionResult {
        value: value.max(T::zero()).min(T::one()),
        abs_err: left.abs_err + right.abs_err,
    })
}

/// Interpolation `½ (1 + A/(1+B))^(-1) erfc(-1/√(2B))`.
pub fn interpolation_tapr<T: Real>(point: &DimensionlessPoint<T>) -> T {
    let (a, b) = (point.a, point.b);
    let moving = T::lit(0.5) * erfc_real(-(T::lit(2.0) * b).sqrt().recip());
    moving / (T::one() + a / (T::one() + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `B <= 0.1`: plane-wave value `1/(1+A)`.
    PlaneWave,
    /// `10 <= B <= A/10`: `B/(2A)`.
    Intermediate,
    /// `B >= max(100, 100A)`: one half.
    Saturated,
    General,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::PlaneWave => "PLANE_WAVE",
            Regime::Intermediate => "INTERMEDIATE",
            Regime::Saturated => "SATURATED",
            Regime::General => "GENERAL",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeEstimate<T> {
    pub regime: Regime,
    /// Limiting value of `T` in this regime, if one exists.
    pub prediction: Option<T>,
}

pub fn regime_classification<T: Real>(point: &DimensionlessPoint<T>) -> RegimeEstimate<T> {
    let (a, b) = (point.a, point.b);
    let hundred = T::lit(100.0);
    let (regime, prediction) = if b <= T::lit(0.1) {
        (Regime::PlaneWave, Some((T::one() + a).recip()))
    } else if b >= hundred.max(hundred * a) {
        (Regime::Saturated, Some(T::lit(0.5)))
    } else if b >= T::lit(10.0) && b <= a / T::lit(10.0) {
        (Regime::Intermediate, Some(b / (T::lit(2.0) * a)))
    } else {
        (Regime::General, None)
    };
    RegimeEstimate { regime, prediction }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub a: T,
    pub b: T,
    pub t: T,
    pub abs_err: T,
    pub t_apr: T,
    /// `T / T_apr`.
    pub ratio: T,
}

/// `n_points` values of `B` spanning `[lo, hi]`, endpoints included.
pub fn b_grid<T: Real>(lo: T, hi: T, n_points: usize, log_spacing: bool) -> Result<Vec<T>> {
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "B range",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if n_points < 2 {
        return Err(Error::invalid("n_points", "need at least two points"));
    }
    let last = T::count(n_points - 1);
    Ok((0..n_points)
        .map(|i| {
            if i == 0 {
                return lo;
            }
            if i == n_points - 1 {
                return hi;
            }
            let f = T::count(i) / last;
            if log_spacing {
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect())
}

/// `T`, `T_apr` and their ratio on an `A × B` grid, `A`-major with `B`
/// ascending. Rows are computed in parallel.
pub fn sweep<T: Real>(
    a_values: &[T],
    b_range: (T, T),
    n_points: usize,
    log_spacing: bool,
    rel_tol: T,
) -> Result<Vec<SweepRow<T>>> {
    check_rel_tol(rel_tol)?;
    let bs = b_grid(b_range.0, b_range.1, n_points, log_spacing)?;
    let points = a_values
        .iter()
        .flat_map(|&a| bs.iter().map(move |&b| DimensionlessPoint::new(a, b)))
        .collect::<Result<Vec<_>>>()?;
    points
        .par_iter()
        .map(|p| {
            let t = transmission_t(p, rel_tol)?;
            let t_apr = interpolation_tapr(p);
            Ok(SweepRow {
                a: p.a,
                b: p.b,
                t: t.value,
                abs_err: t.abs_err,
                t_apr,
                ratio: t.value / t_apr,
            })
        })
        .collect()
}
