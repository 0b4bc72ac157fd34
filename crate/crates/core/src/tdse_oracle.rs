//! Brute-force references for the closed form: a Crank–Nicolson grid solver
//! and a direct quadrature of the propagator integral.

use rayon::prelude::*;

use crate::delta_closed_form::{trapezoid, BarrierSpec, WavefunctionGrid};
use crate::error::{Error, Result};
use crate::gaussian_packet::{check_time, initial_wavefunction, PacketSpec};
use crate::quadrature::GaussLegendre;
use crate::scalar::{c, Cplx, Real};

/// Smallest accepted grid.
pub const MIN_POINTS: usize = 1 << 12;

/// Fraction of the domain at each end watched for boundary contamination.
const OUTER_FRACTION: f64 = 0.05;

/// How the delta barrier enters the discrete Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierModel<T> {
    /// Derivative jump `ψ'(0+) - ψ'(0-) = 2Zψ(0)` folded into the second
    /// difference at the origin node, i.e. an on-site term `Z/dx`.
    JumpCondition,
    /// Normalized Gaussian of the given width carrying total strength `Z`.
    RegularizedGaussian { width: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
    dt: T,
    t_final: T,
    barrier_model: BarrierModel<T>,
    snapshot_times: Vec<T>,
    /// `dt <= ratio * dx`; `None` disables the guard.
    max_dt_over_dx: Option<T>,
    contamination_limit: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(x_min: T, x_max: T, n_points: usize, dt: T, t_final: T) -> Result<Self> {
        let cfg = Self {
            x_min,
            x_max,
            n_points,
            dt,
            t_final,
            barrier_model: BarrierModel::JumpCondition,
            snapshot_times: Vec::new(),
            max_dt_over_dx: Some(T::one()),
            contamination_limit: T::lit(1e-6),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grid of spacing `dx` covering at least `[x_min, x_max]`, with both ends
    /// moved outwards onto multiples of `dx` so that `x = 0` is a node.
    pub fn with_origin_node(x_min: T, x_max: T, dx: T, dt: T, t_final: T) -> Result<Self> {
        if !(dx > T::zero() && dx.is_finite()) {
            return Err(Error::invalid("dx", format!("must be positive, got {dx}")));
        }
        if !(x_min < T::zero() && x_max > T::zero()) {
            return Err(Error::invalid(
                "domain",
                "the barrier at x = 0 must lie strictly inside",
            ));
        }
        let left = (-x_min / dx).ceil();
        let right = (x_max / dx).ceil();
        let n = (left + right)
            .to_usize()
            .ok_or_else(|| Error::invalid("dx", "grid too large"))?
            + 1;
        Self::new(-left * dx, right * dx, n, dt, t_final)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.x_min < T::zero()
            && self.x_max > T::zero())
        {
            return Err(Error::invalid(
                "domain",
                "the barrier at x = 0 must lie strictly inside",
            ));
        }
        if self.n_points < MIN_POINTS {
            return Err(Error::invalid(
                "n_points",
                format!("need at least {MIN_POINTS} points, got {}", self.n_points),
            ));
        }
        let origin = self.origin_index_f();
        // rounding in x_min / dx grows with the index
        let slack = T::lit(1e-6).max(T::lit(16.0) * T::epsilon() * T::count(self.n_points));
        if (origin - origin.round()).abs() > slack {
            return Err(Error::invalid("domain", "x = 0 is not a grid node"));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if let Some(r) = self.max_dt_over_dx {
            if self.dt > r * self.dx() * (T::one() + T::lit(1e-12)) {
                return Err(Error::invalid(
                    "dt",
                    format!("dt = {} exceeds {} dx = {}", self.dt, r, r * self.dx()),
                ));
            }
        }
        check_time(self.t_final)?;
        for &s in &self.snapshot_times {
            if !(s >= T::zero() && s <= self.t_final) {
                return Err(Error::invalid(
                    "snapshot_times",
                    format!("{s} is outside [0, t_final]"),
                ));
            }
        }
        if let BarrierModel::RegularizedGaussian { width } = self.barrier_model {
            if !(width > T::zero() && width.is_finite()) {
                return Err(Error::invalid(
                    "width",
                    "regularized barrier needs a positive width",
                ));
            }
        }
        Ok(())
    }

    fn origin_index_f(&self) -> T {
        -self.x_min / self.dx()
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index_f().round().to_usize().unwrap_or(0)
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::count(self.n_points - 1)
    }
    pub fn x_min(&self) -> T {
        self.x_min
    }
    pub fn x_max(&self) -> T {
        self.x_max
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn dt(&self) -> T {
        self.dt
    }
    pub fn t_final(&self) -> T {
        self.t_final
    }
    pub fn barrier_model(&self) -> BarrierModel<T> {
        self.barrier_model
    }
    pub fn snapshot_times(&self) -> &[T] {
        &self.snapshot_times
    }

    pub fn x_at(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + T::count(i) * self.dx()
        }
    }

    pub fn with_snapshots(mut self, times: Vec<T>) -> Self {
        self.snapshot_times = times;
        self
    }
    pub fn with_barrier_model(mut self, model: BarrierModel<T>) -> Self {
        self.barrier_model = model;
        self
    }
    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }
    pub fn with_t_final(mut self, t_final: T) -> Self {
        self.t_final = t_final;
        self
    }
    pub fn with_step_ratio_limit(mut self, limit: Option<T>) -> Self {
        self.max_dt_over_dx = limit;
        self
    }
    pub fn with_contamination_limit(mut self, limit: T) -> Self {
        self.contamination_limit = limit;
        self
    }

    /// Same domain with the spacing halved; every old node stays a node.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * (self.n_points - 1) + 1,
            ..self.clone()
        }
    }
}

/// Result of one grid simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringOutcome<T> {
    /// `∫_{x<0} |ψ|²` at `t_final`; the origin node counts half on each side.
    pub transmitted: T,
    pub reflected: T,
    /// Largest `|N(t) - N(0)|` seen over all steps, with `N` the discrete norm.
    pub norm_drift: T,
    pub initial_norm: T,
    pub steps: usize,
    pub snapshots: Vec<WavefunctionGrid<T>>,
    pub final_state: WavefunctionGrid<T>,
}

/// Discrete Hamiltonian `-½ Δ + V`, stored as its diagonal; the off-diagonal
/// is the constant `-1/(2dx²)`.
fn hamiltonian_diagonal<T: Real>(cfg: &SolverConfig<T>, barrier: &BarrierSpec<T>) -> Vec<T> {
    let dx = cfg.dx();
    let kinetic = (dx * dx).recip();
    let z = barrier.strength();
    let mut diag = vec![kinetic; cfg.n_points];
    match cfg.barrier_model {
        BarrierModel::JumpCondition => {
            diag[cfg.origin_index()] = diag[cfg.origin_index()] + z / dx;
        }
        BarrierModel::RegularizedGaussian { width } => {
            let norm = z / (width * (T::lit(2.0) * T::PI()).sqrt());
            for (i, d) in diag.iter_mut().enumerate() {
                let u = cfg.x_at(i) / width;
                *d = *d + norm * (-(u * u) / T::lit(2.0)).exp();
            }
        }
    }
    diag
}

/// Crank–Nicolson propagator `(1 + ihH/2)^(-1)(1 - ihH/2)` with a
/// prefactored Thomas solve.
struct CrankNicolson<T: Real> {
    /// `ih/2` times the diagonal and off-diagonal of `H`.
    half_diag: Vec<Cplx<T>>,
    half_off: Cplx<T>,
    c_prime: Vec<Cplx<T>>,
    inv_pivot: Vec<Cplx<T>>,
    scratch: Vec<Cplx<T>>,
}

impl<T: Real> CrankNicolson<T> {
    fn new(diag: &[T], off: T, h: T) -> Self {
        let ih2 = c(T::zero(), h / T::lit(2.0));
        let half_diag: Vec<Cplx<T>> = diag.iter().map(|&d| ih2 * d).collect();
        let half_off = ih2 * off;
        let n = diag.len();
        let mut c_prime = vec![Cplx::default(); n];
        let mut inv_pivot = vec![Cplx::default(); n];
        let one = c(T::one(), T::zero());
        let mut prev = Cplx::default();
        for i in 0..n {
            let pivot = one + half_diag[i] - half_off * prev;
            inv_pivot[i] = pivot.inv();
            c_prime[i] = half_off * inv_pivot[i];
            prev = c_prime[i];
        }
        Self {
            half_diag,
            half_off,
            c_prime,
            inv_pivot,
            scratch: vec![Cplx::default(); n],
        }
    }

    /// Advances `psi` by one step in place and returns `Σ|ψ|²`.
    fn step(&mut self, psi: &mut [Cplx<T>]) -> T {
        let n = psi.len();
        let e = self.half_off;
        let d = &mut self.scratch;
        // right-hand side scaled by the pivots; independent across nodes
        for i in 0..n {
            let left = if i > 0 { psi[i - 1] } else { Cplx::default() };
            let right = if i + 1 < n {
                psi[i + 1]
            } else {
                Cplx::default()
            };
            d[i] = (psi[i] - self.half_diag[i] * psi[i] - e * (left + right)) * self.inv_pivot[i];
        }
        // c'_i = e / pivot_i, so the forward sweep needs one product per node
        let mut prev = Cplx::default();
        for (di, &ci) in d.iter_mut().zip(&self.c_prime) {
            prev = *di - ci * prev;
            *di = prev;
        }
        let mut sum = T::zero();
        let mut next = Cplx::default();
        // flushing far tails keeps the sweeps out of subnormal arithmetic
        let tiny = T::min_positive_value().sqrt();
        for i in (0..n).rev() {
            next = d[i] - self.c_prime[i] * next;
            if next.re.abs() < tiny && next.im.abs() < tiny {
                next = Cplx::default();
            }
            psi[i] = next;
            sum = sum + next.norm_sqr();
        }
        sum
    }
}

fn sum_density<T: Real>(psi: &[Cplx<T>]) -> T {
    psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
}

fn outer_probability<T: Real>(psi: &[Cplx<T>], dx: T) -> T {
    let k = ((psi.len() as f64) * OUTER_FRACTION).ceil() as usize;
    let n = psi.len();
    (sum_density(&psi[..k]) + sum_density(&psi[n - k..])) * dx
}

fn grid_from_state<T: Real>(cfg: &SolverConfig<T>, t: T, psi: &[Cplx<T>]) -> WavefunctionGrid<T> {
    let xs = (0..cfg.n_points).map(|i| cfg.x_at(i)).collect();
    WavefunctionGrid::new(t, xs, psi.to_vec()).expect("solver grid is uniform")
}

/// Evolves the sampled initial packet with Crank–Nicolson between hard walls.
///
/// Snapshot times are hit exactly by shortening the last step before each.
/// Fails with [`Error::BoundaryContamination`] if more than the configured
/// probability reaches the outer 5% of the domain at either end.
pub fn evolve_numeric<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<ScatteringOutcome<T>> {
    cfg.validate()?;
    let dx = cfg.dx();
    let mut psi: Vec<Cplx<T>> = (0..cfg.n_points)
        .map(|i| initial_wavefunction(spec, cfg.x_at(i)))
        .collect();
    let initial_norm = sum_density(&psi) * dx;
    let outer = outer_probability(&psi, dx);
    if outer > cfg.contamination_limit {
        return Err(Error::BoundaryContamination {
            time: 0.0,
            probability: outer.to_f64().unwrap_or(f64::NAN),
        });
    }

    let diag = hamiltonian_diagonal(cfg, barrier);
    let off = -(T::lit(2.0) * dx * dx).recip();

    let mut stops: Vec<T> = cfg.snapshot_times.clone();
    stops.push(cfg.t_final);
    stops.sort_by(|a, b| a.partial_cmp(b).expect("validated times"));

    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());
    let mut t = T::zero();
    let mut drift = T::zero();
    let mut steps = 0usize;
    let mut solver: Option<(T, CrankNicolson<T>)> = None;
    let check_every = 64usize;
    for (k, &stop) in stops.iter().enumerate() {
        let span = stop - t;
        if span > T::zero() {
            let count = (span / cfg.dt).ceil().to_usize().unwrap_or(1).max(1);
            let h = span / T::count(count);
            let rebuild = match &solver {
                Some((old, _)) => (*old - h).abs() > T::epsilon() * h * T::lit(4.0),
                None => true,
            };
            if rebuild {
                solver = Some((h, CrankNicolson::new(&diag, off, h)));
            }
            let cn = &mut solver.as_mut().expect("solver built").1;
            for i in 0..count {
                let norm = cn.step(&mut psi) * dx;
                drift = drift.max((norm - initial_norm).abs());
                steps += 1;
                if steps.is_multiple_of(check_every) || i + 1 == count {
                    let outer = outer_probability(&psi, dx);
                    if outer > cfg.contamination_limit {
                        let now = t + T::count(i + 1) * h;
                        return Err(Error::BoundaryContamination {
                            time: now.to_f64().unwrap_or(f64::NAN),
                            probability: outer.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
            }
            t = stop;
        }
        // the final stop is t_final itself; earlier ones are requested snapshots
        if k + 1 < stops.len() {
            snapshots.push(grid_from_state(cfg, stop, &psi));
        }
    }

    let o = cfg.origin_index();
    let left = sum_density(&psi[..o]);
    let right = sum_density(&psi[o + 1..]);
    let half_origin = psi[o].norm_sqr() / T::lit(2.0);
    Ok(ScatteringOutcome {
        transmitted: (left + half_origin) * dx,
        reflected: (right + half_origin) * dx,
        norm_drift: drift,
        initial_norm,
        steps,
        snapshots,
        final_state: grid_from_state(cfg, cfg.t_final, &psi),
    })
}

/// Smallest time after which the part of the packet still short of the barrier
/// can carry at most `tol` of transmitted probability, and at least `2 x_c/p0`.
///
/// A component of momentum `p < 0` has crossed once `|p| t > x_c + 6s`; the
/// estimate integrates `N(p; -p0, σ_p) p²/(p² + Z²)` over the slower ones.
pub fn default_t_final<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    tol: T,
) -> Result<T> {
    if !(tol > T::zero() && tol < T::one()) {
        return Err(Error::invalid("tol", "must lie in (0, 1)"));
    }
    let p0 = spec.p0();
    let z = barrier.strength();
    let var = (T::one() + spec.rho() * spec.rho()) / (T::lit(2.0) * spec.s() * spec.s());
    let sd = var.sqrt();
    let reach = spec.x_c() + T::lit(6.0) * spec.s();
    let gl = GaussLegendre::<T>::new(20);
    let lagging = |t: T| -> T {
        let p_star = reach / t;
        let f = |p: T| {
            let u = (p + p0) / sd;
            let weight = (-(u * u) / T::lit(2.0)).exp() / (sd * (T::lit(2.0) * T::PI()).sqrt());
            if z == T::zero() {
                weight
            } else {
                weight * p * p / (p * p + z * z)
            }
        };
        gl.composite(f, -p_star, T::zero(), 64)
    };
    let mut hi = T::lit(2.0) * spec.x_c() / p0;
    if lagging(hi) <= tol {
        return Ok(hi);
    }
    let mut lo = hi;
    for _ in 0..200 {
        lo = hi;
        hi = hi * T::lit(2.0);
        if lagging(hi) <= tol {
            break;
        }
    }
    if lagging(hi) > tol {
        return Err(Error::Numerical(
            "no finite time meets the lagging-probability target".into(),
        ));
    }
    for _ in 0..60 {
        let mid = (lo + hi) / T::lit(2.0);
        if lagging(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Grid with origin node holding the whole packet until `t_final`: both ends
/// sit `(p0 + 6√σ_p) t_final + 8s` from the start, padded so that the outer 5%
/// at each end stays empty.
pub fn default_config<T: Real>(
    spec: &PacketSpec<T>,
    t_final: T,
    dx: T,
    dt: T,
) -> Result<SolverConfig<T>> {
    check_time(t_final)?;
    let var = (T::one() + spec.rho() * spec.rho()) / (T::lit(2.0) * spec.s() * spec.s());
    let speed = spec.p0() + T::lit(6.0) * var.sqrt();
    let reach = speed * t_final + T::lit(8.0) * spec.s();
    let lo = (spec.x_c() - reach).min(-T::lit(8.0) * spec.s());
    let hi = spec.x_c() + reach;
    let pad = (hi - lo) * T::lit(OUTER_FRACTION / (1.0 - 2.0 * OUTER_FRACTION)) + T::lit(2.0) * dx;
    SolverConfig::with_origin_node(lo - pad, hi + pad, dx, dt, t_final)
}

/// Discretization of the direct propagator quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorQuadrature<T> {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Panel width for both the `x'` and the `u` integrals.
    pub panel_width: T,
    /// `x'` runs over `x_c ± support_widths · s`.
    pub support_widths: T,
    /// The `u` integral stops where `exp(-uZ)` falls below this.
    pub u_tail: T,
}

impl<T: Real> Default for PropagatorQuadrature<T> {
    fn default() -> Self {
        Self {
            order: 20,
            panel_width: T::lit(0.25),
            support_widths: T::lit(10.0),
            u_tail: T::lit(1e-14),
        }
    }
}

impl<T: Real> PropagatorQuadrature<T> {
    pub fn halved(&self) -> Self {
        Self {
            panel_width: self.panel_width / T::lit(2.0),
            ..*self
        }
    }
}

struct Nodes<T> {
    x: Vec<T>,
    w: Vec<T>,
}

fn composite_nodes<T: Real>(gl: &GaussLegendre<T>, breaks: &[T], width: T) -> Nodes<T> {
    let mut nodes = Nodes {
        x: Vec::new(),
        w: Vec::new(),
    };
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let panels = ((b - a) / width).ceil().to_usize().unwrap_or(1).max(1);
        let h = (b - a) / T::count(panels);
        for k in 0..panels {
            let lo = a + T::count(k) * h;
            for (x, w) in gl.mapped(lo, lo + h) {
                nodes.x.push(x);
                nodes.w.push(w);
            }
        }
    }
    nodes
}

/// `ψ(x,t)` from the propagator integral
/// `G_Z = G_0 - Z (2πit)^(-1/2) ∫_0^∞ exp[-uZ + i(|x| + |x'| + u)²/(2t)] du`,
/// integrated against the initial packet by composite Gauss–Legendre in `x'`
/// and `u`. Keeps `|x'|` as written.
pub fn propagator_direct<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    x: T,
    t: T,
    quad: &PropagatorQuadrature<T>,
) -> Result<Cplx<T>> {
    Ok(propagator_direct_many(spec, barrier, &[x], t, quad)?[0])
}

/// [`propagator_direct`] at many points, in parallel.
pub fn propagator_direct_many<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    xs: &[T],
    t: T,
    quad: &PropagatorQuadrature<T>,
) -> Result<Vec<Cplx<T>>> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::invalid(
            "t",
            format!("propagator needs t > 0, got {t}"),
        ));
    }
    if quad.order < 2
        || !(quad.panel_width > T::zero())
        || !(quad.u_tail > T::zero() && quad.u_tail < T::one())
    {
        return Err(Error::invalid(
            "quadrature",
            "need order >= 2, positive panel width, tail in (0,1)",
        ));
    }
    let gl = GaussLegendre::<T>::new(quad.order);
    let half_support = quad.support_widths * spec.s();
    let (lo, hi) = (spec.x_c() - half_support, spec.x_c() + half_support);
    let breaks: Vec<T> = if lo < T::zero() && hi > T::zero() {
        vec![lo, T::zero(), hi]
    } else {
        vec![lo, hi]
    };
    let xn = composite_nodes(&gl, &breaks, quad.panel_width);
    let weighted: Vec<Cplx<T>> =
        xn.x.iter()
            .zip(&xn.w)
            .map(|(&xp, &w)| initial_wavefunction(spec, xp) * w)
            .collect();
    let two_t = T::lit(2.0) * t;
    // (2πit)^(-1/2) on the principal branch
    let prefactor = c(T::zero(), T::lit(2.0) * T::PI() * t).sqrt().inv();
    let z = barrier.strength();
    let un = if z > T::zero() {
        let u_max = -quad.u_tail.ln() / z;
        composite_nodes(&gl, &[T::zero(), u_max], quad.panel_width)
    } else {
        Nodes {
            x: Vec::new(),
            w: Vec::new(),
        }
    };
    let phase = |arg: T| {
        let (s, co) = (arg * arg / two_t).sin_cos();
        c(co, s)
    };

    let values = xs
        .par_iter()
        .map(|&x| {
            let mut free = Cplx::<T>::default();
            for (&xp, &f) in xn.x.iter().zip(&weighted) {
                free = free + phase(x - xp) * f;
            }
            let mut reflected = Cplx::<T>::default();
            for (&u, &wu) in un.x.iter().zip(&un.w) {
                let mut inner = Cplx::default();
                for (&xp, &f) in xn.x.iter().zip(&weighted) {
                    inner = inner + phase(x.abs() + xp.abs() + u) * f;
                }
                reflected = reflected + inner * ((-u * z).exp() * wu);
            }
            prefactor * (free - reflected * z)
        })
        .collect();
    Ok(values)
}

/// Three runs refining one discretization parameter by halves.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSeries<T> {
    /// `dx` or `dt` of each run, coarsest first.
    pub steps: [T; 3],
    pub transmitted: [T; 3],
    /// `log2(|P1 - P2| / |P2 - P3|)` of the transmitted probabilities.
    pub transmitted_order: Option<T>,
    /// Discrete L² norms of successive wavefunction differences at
    /// `t_final`, taken on the coarsest grid's nodes.
    pub wavefunction_diffs: [T; 2],
    pub wavefunction_order: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub spatial: RefinementSeries<T>,
    pub temporal: RefinementSeries<T>,
    /// Second-order Richardson extrapolation of the spatial series.
    pub extrapolated_transmitted: T,
    /// Size of the Richardson correction plus the last temporal change.
    pub uncertainty: T,
}

fn observed_order<T: Real>(d1: T, d2: T) -> Option<T> {
    if d1 > T::zero() && d2 > T::zero() {
        Some((d1 / d2).log2())
    } else {
        None
    }
}

fn l2_on_coarse<T: Real>(
    a: &[Cplx<T>],
    stride_a: usize,
    b: &[Cplx<T>],
    stride_b: usize,
    n: usize,
    dx: T,
) -> T {
    let sum = (0..n).fold(T::zero(), |acc, i| {
        acc + (a[i * stride_a] - b[i * stride_b]).norm_sqr()
    });
    (sum * dx).sqrt()
}

fn series<T: Real>(
    runs: &[ScatteringOutcome<T>],
    steps: [T; 3],
    strides: [usize; 3],
    n: usize,
    dx: T,
) -> RefinementSeries<T> {
    let amps: Vec<&[Cplx<T>]> = runs.iter().map(|r| r.final_state.amplitudes()).collect();
    let d1 = l2_on_coarse(amps[0], strides[0], amps[1], strides[1], n, dx);
    let d2 = l2_on_coarse(amps[1], strides[1], amps[2], strides[2], n, dx);
    let p = [
        runs[0].transmitted,
        runs[1].transmitted,
        runs[2].transmitted,
    ];
    RefinementSeries {
        steps,
        transmitted: p,
        transmitted_order: observed_order((p[0] - p[1]).abs(), (p[1] - p[2]).abs()),
        wavefunction_diffs: [d1, d2],
        wavefunction_order: observed_order(d1, d2),
    }
}

/// Runs the solver at `(n, 2n-1, 4n-3)` points and at `(dt, dt/2, dt/4)`,
/// all six in parallel. The step-size guard is waived for the refined runs,
/// since each series varies only one parameter.
pub fn convergence_study<T: Real>(
    spec: &PacketSpec<T>,
    barrier: &BarrierSpec<T>,
    base: &SolverConfig<T>,
) -> Result<ConvergenceReport<T>> {
    base.validate()?;
    let loose = base
        .clone()
        .with_snapshots(Vec::new())
        .with_step_ratio_limit(None);
    let two = T::lit(2.0);
    let configs = vec![
        loose.clone(),
        loose.refined(),
        loose.refined().refined(),
        loose.clone().with_dt(base.dt / two),
        loose.clone().with_dt(base.dt / (two * two)),
    ];
    let runs = configs
        .par_iter()
        .map(|cfg| evolve_numeric(spec, barrier, cfg))
        .collect::<Result<Vec<_>>>()?;
    let n = base.n_points;
    let dx = base.dx();
    let spatial = series(
        &runs[0..3],
        [dx, dx / two, dx / (two * two)],
        [1, 2, 4],
        n,
        dx,
    );
    let temporal_runs = [runs[0].clone(), runs[3].clone(), runs[4].clone()];
    let temporal = series(
        &temporal_runs,
        [base.dt, base.dt / two, base.dt / (two * two)],
        [1, 1, 1],
        n,
        dx,
    );
    let p = spatial.transmitted;
    let correction = (p[2] - p[1]) / T::lit(3.0);
    let q = temporal.transmitted;
    Ok(ConvergenceReport {
        extrapolated_transmitted: p[2] + correction,
        uncertainty: correction.abs() + (q[2] - q[1]).abs(),
        spatial,
        temporal,
    })
}

/// `sqrt(Σ|a - f(x)|² dx / Σ|f(x)|² dx)` over the nodes of `grid`.
pub fn relative_l2<T: Real, F>(grid: &WavefunctionGrid<T>, reference: F) -> Result<T>
where
    F: Fn(T) -> Result<Cplx<T>> + Sync,
{
    let exact = grid
        .x_values()
        .par_iter()
        .map(|&x| reference(x))
        .collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    let diff = trapezoid(
        grid.amplitudes()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (*a - *b).norm_sqr()),
        n,
        grid.dx(),
    );
    let norm = trapezoid(exact.iter().map(|b| b.norm_sqr()), n, grid.dx());
    if norm > T::zero() {
        Ok((diff / norm).sqrt())
    } else {
        Ok(diff.sqrt())
    }
}
