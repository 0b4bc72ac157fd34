use std::f64::consts::PI;

use delta_tunneling::delta_closed_form::{d_parameter, far_side_probability, BarrierSpec};
use delta_tunneling::gaussian_packet::PacketSpec;
use delta_tunneling::transmission::{point_from_physical, transmission_t};

#[test]
fn far_side_probability_settles_on_transmission_coefficient() {
    for (s, rho) in [(2.0, 0.0), (2.0, 1.0), (1.5, -0.5)] {
        let p: PacketSpec<f64> = PacketSpec::new(s, rho, 10.0 * s, 2.0).unwrap();
        let b = BarrierSpec::new(2.0).unwrap();
        let exact = transmission_t(&point_from_physical(&p, &b), 1e-10).unwrap();
        let t0 = 2.0 * p.x_c() / p.p0();
        let gaps: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|k| (far_side_probability(&p, &b, k * t0).unwrap() - exact.value).abs())
            .collect();
        assert!(gaps[2] <= 1e-3 + exact.abs_err, "s={s} rho={rho}: {gaps:?}");
        assert!(gaps[2] <= gaps[0] + 1e-6, "s={s} rho={rho}: {gaps:?}");
    }
}

#[test]
fn d_stays_inside_the_asymptotic_sector() {
    for (s, rho) in [(2.0, 0.0), (2.0, 1.0), (1.5, -0.5), (1.0, -2.0)] {
        let p = PacketSpec::new(s, rho, 10.0 * s, 2.0).unwrap();
        let b = BarrierSpec::new(2.0).unwrap();
        let t0 = 2.0 * p.x_c() / p.p0();
        for k in [0.05, 0.5, 1.0, 2.0, 4.0] {
            let t = k * t0;
            let reach = 5.0 * t + 10.0 * s;
            for i in 0..=400 {
                let x = -reach + 2.0 * reach * i as f64 / 400.0;
                let d = d_parameter(&p, &b, x, t).unwrap();
                assert!(d.arg().abs() < 0.75 * PI, "x={x} t={t}: D={d}");
            }
        }
    }
}
