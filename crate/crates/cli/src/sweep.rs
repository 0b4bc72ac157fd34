use serde_json::json;

use delta_tunneling::transmission::{
    sweep, DEFAULT_SWEEP_A, DEFAULT_SWEEP_B_RANGE, DEFAULT_SWEEP_POINTS,
};

use crate::args::{SweepArgs, SweepMode};
use crate::output::{self, num};
use crate::CliError;

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let a_values = if args.a.is_empty() {
        DEFAULT_SWEEP_A.to_vec()
    } else {
        args.a.clone()
    };
    let b_min = args.b_min.unwrap_or(DEFAULT_SWEEP_B_RANGE.0);
    let b_max = args.b_max.unwrap_or(DEFAULT_SWEEP_B_RANGE.1);
    let points = args.points.unwrap_or(DEFAULT_SWEEP_POINTS);
    let rows = sweep(
        &a_values,
        (b_min, b_max),
        points,
        !args.linear,
        args.common.rel_tol,
    )?;

    let mut sink = output::csv_sink(args.common.out.as_deref())?;
    match args.mode {
        SweepMode::Fig1 => {
            output::write_row(&mut sink, ["A", "B", "T", "abs_err"])?;
            for r in &rows {
                output::write_row(&mut sink, [num(r.a), num(r.b), num(r.t), num(r.abs_err)])?;
            }
        }
        SweepMode::Fig2 => {
            output::write_row(&mut sink, ["A", "B", "T", "T_apr", "ratio"])?;
            for r in &rows {
                output::write_row(
                    &mut sink,
                    [num(r.a), num(r.b), num(r.t), num(r.t_apr), num(r.ratio)],
                )?;
            }
        }
    }
    output::finish(sink)?;
    if let Some(out) = &args.common.out {
        let meta = json!({
            "command": "sweep",
            "version": env!("CARGO_PKG_VERSION"),
            "mode": format!("{:?}", args.mode).to_lowercase(),
            "A": a_values,
            "b_min": b_min,
            "b_max": b_max,
            "points": points,
            "log_spacing": !args.linear,
            "rel_tol": args.common.rel_tol,
        });
        output::write_sidecar(out, &meta)?;
    }
    Ok(())
}
