use serde_json::{json, Value};

use delta_tunneling::delta_closed_form::BarrierSpec;
use delta_tunneling::gaussian_packet::{PacketSpec, UnitSystem};
use delta_tunneling::transmission::point_from_physical;

use crate::args::PhysicalArgs;
use crate::CliError;

/// Values used when a flag is absent; `None` makes the flag mandatory.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub s: Option<f64>,
    pub rho: Option<f64>,
    pub xc: Option<f64>,
    pub p0: Option<f64>,
    pub z: Option<f64>,
}

pub const REQUIRED: Defaults = Defaults {
    s: None,
    rho: Some(0.0),
    xc: None,
    p0: None,
    z: None,
};

/// Physical problem converted to natural units.
pub struct Problem {
    pub packet: PacketSpec<f64>,
    pub barrier: BarrierSpec<f64>,
    pub units: UnitSystem<f64>,
    /// Parameters as given, for the metadata sidecar.
    pub given: Value,
}

impl Problem {
    pub fn meta(&self, command: &str, extra: Value) -> Value {
        let point = point_from_physical(&self.packet, &self.barrier);
        let mut meta = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "units": { "mass": self.units.mass(), "hbar": self.units.hbar() },
            "parameters": self.given,
            "natural_units": {
                "s": self.packet.s(),
                "rho": self.packet.rho(),
                "xc": self.packet.x_c(),
                "p0": self.packet.p0(),
                "Z": self.barrier.strength(),
            },
            "A": point.a(),
            "B": point.b(),
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
            m.extend(e);
        }
        meta
    }
}

impl PhysicalArgs {
    pub fn any_given(&self) -> bool {
        self.s.is_some()
            || self.rho.is_some()
            || self.xc.is_some()
            || self.p0.is_some()
            || self.z.is_some()
    }

    pub fn resolve(&self, defaults: Defaults) -> Result<Problem, CliError> {
        let pick = |v: Option<f64>, d: Option<f64>, flag: &str| {
            v.or(d)
                .ok_or_else(|| CliError::Validation(format!("missing required flag --{flag}")))
        };
        let s = pick(self.s, defaults.s, "s")?;
        let rho = pick(self.rho, defaults.rho, "rho")?;
        let xc = pick(self.xc, defaults.xc, "xc")?;
        let p0 = pick(self.p0, defaults.p0, "p0")?;
        let z = pick(self.z, defaults.z, "Z")?;
        let units = match (self.mass, self.hbar) {
            (None, None) => UnitSystem::natural(),
            (m, h) => UnitSystem::new(m.unwrap_or(1.0), h.unwrap_or(1.0))?,
        };
        let (packet, barrier) = units.to_natural_units(s, rho, xc, p0, z, !self.allow_overlap)?;
        Ok(Problem {
            packet,
            barrier,
            units,
            given: json!({ "s": s, "rho": rho, "xc": xc, "p0": p0, "Z": z }),
        })
    }
}
