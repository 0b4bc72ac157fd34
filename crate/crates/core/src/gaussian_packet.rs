//! Correlated Gaussian initial state, its second moments, and free motion.
//!
//! Natural units `ħ = m = 1` throughout; [`UnitSystem`] converts from
//! dimensional inputs.

use crate::delta_closed_form::BarrierSpec;
use crate::error::{Error, Result};
use crate::scalar::{c, Cplx, Real};

/// Default lower bound on `x_c / s`.
///
/// Every closed-form result treats the initial packet as if it had no weight
/// behind the barrier; the neglected weight is of order `exp(-(x_c/s)²)`.
pub const DEFAULT_MIN_SEPARATION: f64 = 8.0;

/// Initial packet `ψ(x,0) = (πs²)^(-1/4) exp[-γ(x - x_c)²/(2s²) - i p0 x]`
/// with `γ = 1 - iρ`. The mean momentum is `-p0`, towards the barrier at the
/// origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec<T> {
    s: T,
    rho: T,
    x_c: T,
    p0: T,
}

impl<T: Real> PacketSpec<T> {
    /// Validated packet, including the far-field guard `x_c/s >= 8`.
    pub fn new(s: T, rho: T, x_c: T, p0: T) -> Result<Self> {
        let spec = Self::new_unguarded(s, rho, x_c, p0)?;
        spec.check_separation(T::lit(DEFAULT_MIN_SEPARATION))?;
        Ok(spec)
    }

    /// Validated packet without the far-field guard.
    pub fn new_unguarded(s: T, rho: T, x_c: T, p0: T) -> Result<Self> {
        positive_finite("s", s)?;
        positive_finite("x_c", x_c)?;
        positive_finite("p0", p0)?;
        if !rho.is_finite() {
            return Err(Error::invalid("rho", "must be finite"));
        }
        Ok(Self { s, rho, x_c, p0 })
    }

    pub fn s(&self) -> T {
        self.s
    }
    pub fn rho(&self) -> T {
        self.rho
    }
    pub fn x_c(&self) -> T {
        self.x_c
    }
    pub fn p0(&self) -> T {
        self.p0
    }

    /// `γ = 1 - iρ`.
    pub fn gamma(&self) -> Cplx<T> {
        c(T::one(), -self.rho)
    }

    /// Far-field ratio `x_c / s`.
    pub fn separation_ratio(&self) -> T {
        self.x_c / self.s
    }

    pub fn check_separation(&self, min_ratio: T) -> Result<()> {
        if self.separation_ratio() < min_ratio {
            return Err(Error::invalid(
                "x_c",
                format!(
                    "x_c/s = {} is below the far-field minimum {}",
                    self.separation_ratio(),
                    min_ratio
                ),
            ));
        }
        Ok(())
    }
}

fn positive_finite<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

/// Second moments of a Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet<T> {
    pub sigma_x: T,
    pub sigma_p: T,
    pub sigma_xp: T,
    /// Correlation coefficient `σ_xp / √(σ_x σ_p)`.
    pub r: T,
}

impl<T: Real> MomentSet<T> {
    /// `σ_x σ_p - σ_xp²`; equals 1/4 for every pure Gaussian.
    pub fn uncertainty_determinant(&self) -> T {
        self.sigma_x * self.sigma_p - self.sigma_xp * self.sigma_xp
    }
}

/// Initial wavefunction at `x`.
pub fn initial_wavefunction<T: Real>(spec: &PacketSpec<T>, x: T) -> Cplx<T> {
    let u = x - spec.x_c;
    let norm = (T::PI() * spec.s * spec.s).powf(T::lit(-0.25));
    let exponent =
        -spec.gamma() * (u * u / (T::lit(2.0) * spec.s * spec.s)) - c(T::zero(), spec.p0 * x);
    exponent.exp() * norm
}

/// Initial variances and covariance.
pub fn initial_moments<T: Real>(spec: &PacketSpec<T>) -> MomentSet<T> {
    let two = T::lit(2.0);
    let s2 = spec.s * spec.s;
    let sigma_x = s2 / two;
    let sigma_p = (T::one() + spec.rho * spec.rho) / (two * s2);
    let sigma_xp = spec.rho / two;
    MomentSet {
        sigma_x,
        sigma_p,
        sigma_xp,
        r: sigma_xp / (sigma_x * sigma_p).sqrt(),
    }
}

/// Correlation coefficient `r = ρ/√(1+ρ²)`.
pub fn correlation_from_rho<T: Real>(rho: T) -> T {
    rho / (T::one() + rho * rho).sqrt()
}

/// Inverse of [`correlation_from_rho`]: `ρ = r/√(1-r²)`.
pub fn rho_from_correlation<T: Real>(r: T) -> Result<T> {
    check_correlation(r)?;
    Ok(r / (T::one() - r * r).sqrt())
}

/// Effective Planck constant `1/√(1-r²)` in units of `ħ`.
pub fn effective_planck<T: Real>(r: T) -> Result<T> {
    check_correlation(r)?;
    Ok((T::one() - r * r).sqrt().recip())
}

fn check_correlation<T: Real>(r: T) -> Result<()> {
    if r.abs() < T::one() {
        Ok(())
    } else {
        Err(Error::invalid(
            "r",
            format!("|r| = {} must be below 1", r.abs()),
        ))
    }
}

/// Complex width parameter `μ(t) = s² + iγt = (s² + ρt) + it`.
pub fn mu_of_t<T: Real>(spec: &PacketSpec<T>, t: T) -> Cplx<T> {
    c(spec.s * spec.s + spec.rho * t, t)
}

/// Free evolution without any potential; `t >= 0`.
///
/// `ψ_free = [√π μ/s]^(-1/2) exp[-γ(x - x_c + p0 t)²/(2μ) - i p0 x - i p0² t/2]`.
pub fn free_evolution<T: Real>(spec: &PacketSpec<T>, x: T, t: T) -> Result<Cplx<T>> {
    check_time(t)?;
    Ok(free_evolution_unchecked(spec, x, t))
}

pub(crate) fn free_evolution_unchecked<T: Real>(spec: &PacketSpec<T>, x: T, t: T) -> Cplx<T> {
    let mu = mu_of_t(spec, t);
    let shift = x - spec.x_c + spec.p0 * t;
    let half = T::lit(0.5);
    let exponent = -spec.gamma() / mu * (half * shift * shift)
        - c(T::zero(), spec.p0 * x + half * spec.p0 * spec.p0 * t);
    // Im μ = t >= 0 keeps μ off the principal cut, even when s² + ρt < 0
    let amplitude = (mu * (T::PI().sqrt() / spec.s)).sqrt().inv();
    amplitude * exponent.exp()
}

/// Position variance of the free packet, `|μ(t)|²/(2s²)`.
///
/// Expands to `[s² + 2ρt + (1+ρ²)t²/s²]/2`, i.e. `σ_x + 2σ_xp t + σ_p t²`.
pub fn free_position_variance<T: Real>(spec: &PacketSpec<T>, t: T) -> T {
    let mu = mu_of_t(spec, t);
    mu.norm_sqr() / (T::lit(2.0) * spec.s * spec.s)
}

pub(crate) fn check_time<T: Real>(t: T) -> Result<()> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(
            "t",
            format!("time must be finite and non-negative, got {t}"),
        ))
    }
}

/// Mass and Planck constant of a dimensional problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem<T> {
    mass: T,
    hbar: T,
}

impl<T: Real> UnitSystem<T> {
    pub fn new(mass: T, hbar: T) -> Result<Self> {
        positive_finite("mass", mass)?;
        positive_finite("hbar", hbar)?;
        Ok(Self { mass, hbar })
    }

    pub fn natural() -> Self {
        Self {
            mass: T::one(),
            hbar: T::one(),
        }
    }

    pub fn mass(&self) -> T {
        self.mass
    }
    pub fn hbar(&self) -> T {
        self.hbar
    }

    /// `t -> ħt/m`.
    pub fn time(&self, t: T) -> T {
        self.hbar * t / self.mass
    }

    /// `p -> p/ħ`.
    pub fn momentum(&self, p: T) -> T {
        p / self.hbar
    }

    /// `Z -> mZ/ħ²`.
    pub fn strength(&self, z: T) -> T {
        self.mass * z / (self.hbar * self.hbar)
    }

    /// Converts dimensional packet and barrier parameters to natural units.
    /// Lengths and `ρ` are unchanged.
    pub fn to_natural_units(
        &self,
        s: T,
        rho: T,
        x_c: T,
        p0: T,
        z: T,
        guard: bool,
    ) -> Result<(PacketSpec<T>, BarrierSpec<T>)> {
        let p0 = self.momentum(p0);
        let packet = if guard {
            PacketSpec::new(s, rho, x_c, p0)?
        } else {
            PacketSpec::new_unguarded(s, rho, x_c, p0)?
        };
        Ok((packet, BarrierSpec::new(self.strength(z))?))
    }
}
