//! Exact evolution of a Gaussian packet through a repulsive delta barrier
//! `V(x) = Z δ(x)`, plus its large-time asymptotic forms.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian_packet::{check_time, free_evolution_unchecked, mu_of_t, PacketSpec};
use crate::scalar::{c, Cplx, Real};
use crate::special_functions::erfcx_complex;

/// Barrier strength `Z` in natural units. `Z = 0` is the free particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec<T> {
    z: T,
}

impl<T: Real> BarrierSpec<T> {
    pub fn new(z: T) -> Result<Self> {
        if z.is_finite() && z >= T::zero() {
            Ok(Self { z })
        } else {
            Err(Error::invalid(
                "Z",
                format!("barrier strength must be finite and non-negative, got {z}"),
            ))
        }
    }

    pub fn strength(&self) -> T {
        self.z
    }

    /// `A = (Z/p0)²`.
    pub fn a_parameter(&self, spec: &PacketSpec<T>) -> T {
        let r = self.z / spec.p0();
        r * r
    }
}

/// Validity thresholds for the asymptotic forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards<T> {
    /// Below this `Re(D)`, [`asymptotic_left_wavefunction`] logs a warning.
    pub min_re_d: T,
    /// [`asymptotic_density`] requires `p0 t >= min_travel_ratio * x_c`.
    pub min_travel_ratio: T,
}

impl<T: Real> Default for Guards<T> {
    fn default() -> Self {
        Self {
            min_re_d: T::lit(5.0),
            min_travel_ratio: T::lit(20.0),
        }
    }
}

/// Numerator `γ(|x| + x_c) - i p0 s²` shared by `D` and the asymptotic form.
fn shifted_numerator<T: Real>(spec: &PacketSpec<T>, x: T) -> Cplx<T> {
    spec.gamma() * (x.abs() + spec.x_c()) - c(T::zero(), spec.p0() * spec.s() * spec.s())
}

/// `q = √(γ/μ)` on the principal branch. `Re(γ/μ) = s²/|μ|² > 0`, so the
/// root never meets the cut; `√(2γμ) = √2 μ q` then follows without one.
fn root_ratio<T: Real>(spec: &PacketSpec<T>, mu: Cplx<T>) -> Cplx<T> {
    (spec.gamma() / mu).sqrt()
}

fn d_unchecked<T: Real>(spec: &PacketSpec<T>, z: T, x: T, mu: Cplx<T>, q: Cplx<T>) -> Cplx<T> {
    (mu * z + shifted_numerator(spec, x)) / (mu * q * T::SQRT_2())
}

/// `D(x,t) = [Zμ + γ(|x| + x_c) - i p0 s²] / √(2γμ)`.
///
/// Fails with [`Error::Regime`] when `Re(D) <= 0`. A positive real part also
/// keeps `|arg D| < 3π/4`, the sector where the erfc asymptotic holds.
pub fn d_parameter<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    x: T,
    t: T,
) -> Result<Cplx<T>> {
    check_time(t)?;
    let mu = mu_of_t(spec, t);
    let d = d_unchecked(spec, barrier.z, x, mu, root_ratio(spec, mu));
    check_re_d(d, x, t)?;
    Ok(d)
}

fn check_re_d<T: Real>(d: Cplx<T>, x: T, t: T) -> Result<()> {
    if d.re > T::zero() {
        Ok(())
    } else {
        Err(Error::Regime(format!(
            "Re(D) = {} <= 0 at x = {x}, t = {t}",
            d.re
        )))
    }
}

/// Exact wavefunction in the presence of the barrier.
///
/// Evaluated as `ψ_free(x) - Z √(πμ/2γ) erfcx(D) ψ_free(-|x|)`, which is the
/// bracketed closed form with the exponential factor for `x > 0` folded into
/// the mirrored free packet. `erfc(D) exp(D²)` is a single `erfcx` call.
pub fn evolved_wavefunction<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    x: T,
    t: T,
) -> Result<Cplx<T>> {
    check_time(t)?;
    let free = free_evolution_unchecked(spec, x, t);
    if barrier.z == T::zero() {
        return Ok(free);
    }
    let mu = mu_of_t(spec, t);
    let q = root_ratio(spec, mu);
    let d = d_unchecked(spec, barrier.z, x, mu, q);
    check_re_d(d, x, t)?;
    let mirrored = if x > T::zero() {
        free_evolution_unchecked(spec, -x, t)
    } else {
        free
    };
    let factor = erfcx_complex(d) * (T::FRAC_PI_2().sqrt() * barrier.z) / q;
    Ok(free - factor * mirrored)
}

/// Large-time form for `x < 0`:
/// `ψ_free(x) N / (N + μZ)` with `N = γ(|x| + x_c) - i p0 s²`.
pub fn asymptotic_left_wavefunction<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    x: T,
    t: T,
) -> Result<Cplx<T>> {
    asymptotic_left_wavefunction_with(spec, barrier, x, t, &Guards::default())
}

pub fn asymptotic_left_wavefunction_with<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    x: T,
    t: T,
    guards: &Guards<T>,
) -> Result<Cplx<T>> {
    check_time(t)?;
    if !(x < T::zero()) {
        return Err(Error::invalid(
            "x",
            format!("asymptotic form needs x < 0, got {x}"),
        ));
    }
    let free = free_evolution_unchecked(spec, x, t);
    if barrier.z == T::zero() {
        return Ok(free);
    }
    let mu = mu_of_t(spec, t);
    let d = d_unchecked(spec, barrier.z, x, mu, root_ratio(spec, mu));
    check_re_d(d, x, t)?;
    if d.re < guards.min_re_d {
        log::warn!(
            "Re(D) = {} below {} at x = {x}, t = {t}; asymptotic form is inaccurate",
            d.re,
            guards.min_re_d
        );
    }
    let n = shifted_numerator(spec, x);
    Ok(free * n / (n + mu * barrier.z))
}

/// Which measure [`asymptotic_density`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityMeasure {
    /// Probability per unit length `x`.
    #[default]
    PerLength,
    /// Probability per unit `y`; includes the Jacobian `dx = t p0 dy`.
    PerY,
}

/// Asymptotic coordinate probability density at `x = x_c + p0 t (y - 1)`:
/// `[t √(π(1+ρ²))/s]^(-1) exp(-y²/2B) (1-y)²/((1-y)² + A)`.
pub fn asymptotic_density<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    y: T,
    t: T,
    measure: DensityMeasure,
) -> Result<T> {
    asymptotic_density_with(spec, barrier, y, t, measure, &Guards::default())
}

pub fn asymptotic_density_with<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    y: T,
    t: T,
    measure: DensityMeasure,
    guards: &Guards<T>,
) -> Result<T> {
    check_time(t)?;
    if !y.is_finite() {
        return Err(Error::invalid("y", "must be finite"));
    }
    if spec.p0() * t < guards.min_travel_ratio * spec.x_c() {
        return Err(Error::Regime(format!(
            "p0 t = {} is below {} x_c; the asymptotic density needs a longer time",
            spec.p0() * t,
            guards.min_travel_ratio
        )));
    }
    let rho2 = T::one() + spec.rho() * spec.rho();
    let free = spec.s() / (t * (T::PI() * rho2).sqrt());
    let sy = spec.s() * spec.p0() * y;
    let envelope = (-(sy * sy) / rho2).exp();
    let gap = (T::one() - y) * (T::one() - y);
    let a = barrier.a_parameter(spec);
    let shape = if a == T::zero() {
        T::one()
    } else {
        gap / (gap + a)
    };
    let density = free * envelope * shape;
    Ok(match measure {
        DensityMeasure::PerLength => density,
        DensityMeasure::PerY => density * t * spec.p0(),
    })
}

/// Wavefunction sampled on a uniform grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid<T> {
    t: T,
    x_values: Vec<T>,
    amplitudes: Vec<Cplx<T>>,
    dx: T,
}

impl<T: Real> WavefunctionGrid<T> {
    /// Wraps existing samples. `x_values` must be uniform and increasing.
    pub fn new(t: T, x_values: Vec<T>, amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        if x_values.len() < 2 {
            return Err(Error::invalid("x_values", "need at least two grid points"));
        }
        if x_values.len() != amplitudes.len() {
            return Err(Error::invalid("amplitudes", "length differs from x_values"));
        }
        let n = x_values.len();
        let dx = (x_values[n - 1] - x_values[0]) / T::count(n - 1);
        // differences of large coordinates lose digits
        let span = x_values[0].abs().max(x_values[n - 1].abs());
        let tol = (T::lit(1e-6) * dx).max(T::lit(8.0) * T::epsilon() * span);
        for (i, pair) in x_values.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if !(step > T::zero()) || (step - dx).abs() > tol {
                return Err(Error::invalid(
                    "x_values",
                    format!("not uniform and increasing at index {i}"),
                ));
            }
        }
        Ok(Self {
            t,
            x_values,
            amplitudes,
            dx,
        })
    }

    /// Samples `f` on `n` uniform points spanning `[x_min, x_max]`, in parallel.
    pub fn sample<F>(t: T, x_min: T, x_max: T, n: usize, f: F) -> Result<Self>
    where
        F: Fn(T) -> Result<Cplx<T>> + Sync,
    {
        if n < 2 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::invalid(
                "grid",
                "need n >= 2 and finite x_min < x_max",
            ));
        }
        let dx = (x_max - x_min) / T::count(n - 1);
        let x_values: Vec<T> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    x_max
                } else {
                    x_min + T::count(i) * dx
                }
            })
            .collect();
        let amplitudes = x_values
            .par_iter()
            .map(|&x| f(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            x_values,
            amplitudes,
            dx,
        })
    }

    pub fn t(&self) -> T {
        self.t
    }
    pub fn x_values(&self) -> &[T] {
        &self.x_values
    }
    pub fn amplitudes(&self) -> &[Cplx<T>] {
        &self.amplitudes
    }
    pub fn dx(&self) -> T {
        self.dx
    }
    pub fn len(&self) -> usize {
        self.x_values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.x_values.is_empty()
    }

    pub fn densities(&self) -> impl Iterator<Item = T> + '_ {
        self.amplitudes.iter().map(|a| a.norm_sqr())
    }

    /// Trapezoid integral of `|ψ|²` over the grid.
    pub fn norm(&self) -> T {
        trapezoid(self.densities(), self.len(), self.dx)
    }

    /// Trapezoid integral of `|ψ|²` over `x <= 0`, interpolating linearly
    /// inside the cell that straddles the origin.
    pub fn probability_left(&self) -> T {
        let mut total = T::zero();
        let half = T::lit(0.5);
        for i in 0..self.len() - 1 {
            let (x0, x1) = (self.x_values[i], self.x_values[i + 1]);
            if x0 >= T::zero() {
                break;
            }
            let (d0, d1) = (
                self.amplitudes[i].norm_sqr(),
                self.amplitudes[i + 1].norm_sqr(),
            );
            if x1 <= T::zero() {
                total = total + half * (d0 + d1) * (x1 - x0);
            } else {
                let frac = -x0 / (x1 - x0);
                let d_origin = d0 + frac * (d1 - d0);
                total = total + half * (d0 + d_origin) * (-x0);
            }
        }
        total
    }
}

pub(crate) fn trapezoid<T: Real>(values: impl Iterator<Item = T>, n: usize, dx: T) -> T {
    let half = T::lit(0.5);
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { half * v } else { v })
        .fold(T::zero(), |a, b| a + b)
        * dx
}

/// [`evolved_wavefunction`] on `n` uniform points spanning `[x_min, x_max]`.
pub fn sample_wavefunction<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    t: T,
    x_min: T,
    x_max: T,
    n: usize,
) -> Result<WavefunctionGrid<T>> {
    check_time(t)?;
    WavefunctionGrid::sample(t, x_min, x_max, n, |x| {
        evolved_wavefunction(spec, barrier, x, t)
    })
}

/// `∫_{x<0} |ψ(x,t)|²` of the exact solution, by the trapezoid rule on a
/// window holding every momentum within `8σ_p` of the mean, with 16 points
/// per shortest wavelength.
pub fn far_side_probability<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    t: T,
) -> Result<T> {
    check_time(t)?;
    let sigma_p =
        ((T::one() + spec.rho() * spec.rho()) / (T::lit(2.0) * spec.s() * spec.s())).sqrt();
    let k_max = spec.p0() + T::lit(8.0) * sigma_p;
    let x_lo = -(k_max * t + T::lit(8.0) * spec.s());
    let dx = T::lit(2.0) * T::PI() / (T::lit(16.0) * k_max);
    let n = (-x_lo / dx)
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::invalid("t", "window too large to sample"))?
        + 1;
    Ok(sample_wavefunction(spec, barrier, t, x_lo, T::zero(), n.max(2))?.norm())
}
