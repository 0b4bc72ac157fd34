use serde_json::json;

use delta_tunneling::transmission::{
    interpolation_tapr, point_from_physical, regime_classification, transmission_t,
    DimensionlessPoint,
};

use crate::args::TransmitArgs;
use crate::output::{self, num};
use crate::physical::REQUIRED;
use crate::CliError;

pub fn run(args: &TransmitArgs) -> Result<(), CliError> {
    let (point, meta) = match (args.a, args.b) {
        (Some(a), Some(b)) => {
            if args.physical.any_given() {
                return Err(CliError::Validation(
                    "give either --A/--B or the physical parameters, not both".into(),
                ));
            }
            let meta = json!({ "command": "transmit", "version": env!("CARGO_PKG_VERSION"), "A": a, "B": b });
            (DimensionlessPoint::new(a, b)?, meta)
        }
        (None, None) => {
            let problem = args.physical.resolve(REQUIRED)?;
            let point = point_from_physical(&problem.packet, &problem.barrier);
            (point, problem.meta("transmit", json!({})))
        }
        _ => {
            return Err(CliError::Validation(
                "--A and --B must be given together".into(),
            ))
        }
    };
    let t = transmission_t(&point, args.common.rel_tol)?;
    let regime = regime_classification(&point);

    let mut sink = output::csv_sink(args.common.out.as_deref())?;
    output::write_row(&mut sink, ["A", "B", "T", "abs_err", "T_apr", "regime"])?;
    output::write_row(
        &mut sink,
        [
            num(point.a()),
            num(point.b()),
            num(t.value),
            num(t.abs_err),
            num(interpolation_tapr(&point)),
            regime.regime.label().to_string(),
        ],
    )?;
    output::finish(sink)?;
    if let Some(out) = &args.common.out {
        output::write_sidecar(out, &meta)?;
    }
    Ok(())
}
