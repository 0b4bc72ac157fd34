use std::f64::consts::PI;

use serde_json::json;

use delta_tunneling::delta_closed_form::{sample_wavefunction, WavefunctionGrid};
use delta_tunneling::gaussian_packet::free_position_variance;

use crate::args::{EvolveArgs, Layout};
use crate::output::{self, num};
use crate::physical::{Problem, REQUIRED};
use crate::CliError;

const HEADER: [&str; 4] = ["x", "re_psi", "im_psi", "density"];
const MIN_AUTO_POINTS: usize = 2001;
const POINTS_PER_WAVELENGTH: f64 = 16.0;

/// Symmetric window holding both the transmitted and the reflected part at
/// every requested time, with a spacing that resolves the fastest component.
fn auto_window(problem: &Problem, t_max: f64) -> (f64, f64, f64) {
    let p = &problem.packet;
    let sigma_p = ((1.0 + p.rho() * p.rho()) / (2.0 * p.s() * p.s())).sqrt();
    let spread = free_position_variance(p, t_max).sqrt();
    let half = p.x_c() + p.p0() * t_max + 8.0 * spread + 8.0 * p.s();
    let k_max = p.p0() + 8.0 * sigma_p;
    (-half, half, 2.0 * PI / (k_max * POINTS_PER_WAVELENGTH))
}

pub fn run(args: &EvolveArgs) -> Result<(), CliError> {
    let problem = args.physical.resolve(REQUIRED)?;
    for &t in &args.t {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Validation(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
    }
    if args.layout == Layout::PerTime && args.common.out.is_none() {
        return Err(CliError::Validation("--layout per-time needs --out".into()));
    }
    let natural: Vec<f64> = args.t.iter().map(|&t| problem.units.time(t)).collect();
    let t_max = natural.iter().cloned().fold(0.0, f64::max);
    let (auto_lo, auto_hi, auto_dx) = auto_window(&problem, t_max);
    let x_min = args.x_min.unwrap_or(auto_lo);
    let x_max = args.x_max.unwrap_or(auto_hi);
    if x_min.is_nan() || x_max.is_nan() || x_min >= x_max {
        return Err(CliError::Validation(format!(
            "empty window [{x_min}, {x_max}]"
        )));
    }
    let n = match args.n {
        Some(n) if n < 2 => return Err(CliError::Validation("--n must be at least 2".into())),
        Some(n) => n,
        None => (((x_max - x_min) / auto_dx).ceil() as usize + 1).max(MIN_AUTO_POINTS),
    };

    let grids = natural
        .iter()
        .map(|&t| sample_wavefunction(&problem.packet, &problem.barrier, t, x_min, x_max, n))
        .collect::<Result<Vec<_>, _>>()?;

    let meta = |files: Vec<String>| {
        problem.meta(
            "evolve",
            json!({
                "t": args.t,
                "x_min": x_min,
                "x_max": x_max,
                "n": n,
                "layout": format!("{:?}", args.layout).to_lowercase(),
                "files": files,
            }),
        )
    };
    match args.layout {
        Layout::Long => {
            let mut sink = output::csv_sink(args.common.out.as_deref())?;
            output::write_row(&mut sink, std::iter::once("t").chain(HEADER))?;
            for (t, grid) in args.t.iter().zip(&grids) {
                write_grid(&mut sink, Some(*t), grid)?;
            }
            output::finish(sink)?;
            if let Some(out) = &args.common.out {
                output::write_sidecar(out, &meta(vec![out.display().to_string()]))?;
            }
        }
        Layout::PerTime => {
            let out = args.common.out.as_deref().expect("checked above");
            let mut files = Vec::new();
            for (k, grid) in grids.iter().enumerate() {
                let path = output::per_time_path(out, k);
                let mut sink = output::csv_sink(Some(&path))?;
                output::write_row(&mut sink, HEADER)?;
                write_grid(&mut sink, None, grid)?;
                output::finish(sink)?;
                files.push(path.display().to_string());
            }
            output::write_sidecar(out, &meta(files))?;
        }
    }
    Ok(())
}

fn write_grid(
    sink: &mut output::CsvSink,
    t: Option<f64>,
    grid: &WavefunctionGrid<f64>,
) -> Result<(), CliError> {
    for (x, psi) in grid.x_values().iter().zip(grid.amplitudes()) {
        let mut row = Vec::with_capacity(5);
        if let Some(t) = t {
            row.push(num(t));
        }
        row.extend([num(*x), num(psi.re), num(psi.im), num(psi.norm_sqr())]);
        output::write_row(sink, &row)?;
    }
    Ok(())
}
