use delta_tunneling::delta_closed_form::{evolved_wavefunction, BarrierSpec};
use delta_tunneling::gaussian_packet::{free_evolution, PacketSpec};
use delta_tunneling::tdse_oracle::*;
use delta_tunneling::transmission::{
    plane_wave_t, point_from_physical, transmission_t, DimensionlessPoint,
};
use delta_tunneling::{Error, SolverConfigF64, C64};

fn packet(s: f64, rho: f64, x_c: f64, p0: f64) -> PacketSpec<f64> {
    PacketSpec::new(s, rho, x_c, p0).unwrap()
}

fn barrier(z: f64) -> BarrierSpec<f64> {
    BarrierSpec::new(z).unwrap()
}

#[test]
fn config_validation() {
    assert!(SolverConfig::new(-10.0, 10.0, 4097, 1e-3, 1.0).is_ok());
    let small = SolverConfig::new(-10.0, 10.0, 256, 1e-3, 1.0).unwrap_err();
    assert!(small.is_validation());
    // 0 falls between nodes
    assert!(SolverConfig::new(-10.0, 10.001, 4097, 1e-3, 1.0).is_err());
    assert!(SolverConfig::new(1.0, 10.0, 4097, 1e-3, 1.0).is_err());
    // dt above dx
    assert!(SolverConfig::new(-10.0, 10.0, 4097, 0.01, 1.0).is_err());
    let relaxed = SolverConfig::new(-10.0, 10.0, 4097, 1e-3, 1.0)
        .unwrap()
        .with_dt(0.01)
        .with_step_ratio_limit(None);
    assert!(relaxed.validate().is_ok());
    let bad_snap = SolverConfig::new(-10.0, 10.0, 4097, 1e-3, 1.0)
        .unwrap()
        .with_snapshots(vec![2.0]);
    assert!(bad_snap.validate().is_err());
}

#[test]
fn origin_node_constructor_and_refinement() {
    let cfg: SolverConfigF64 =
        SolverConfig::with_origin_node(-10.03, 20.01, 0.005, 0.005, 1.0).unwrap();
    let o = cfg.origin_index();
    assert_eq!(cfg.x_at(o), 0.0);
    assert!(cfg.x_min() <= -10.03 && cfg.x_max() >= 20.01);
    assert!((cfg.dx() - 0.005f64).abs() < 1e-15);
    let fine = cfg.refined();
    assert_eq!(fine.n_points(), 2 * cfg.n_points() - 1);
    assert_eq!(fine.origin_index(), 2 * o);
    assert!((fine.x_at(2 * 17) - cfg.x_at(17)).abs() < 1e-12);
}

#[test]
fn unitary_and_probability_split() {
    let p = packet(1.0, 0.5, 10.0, 2.0);
    let b = barrier(2.0);
    let cfg = default_config(&p, 8.0, 0.02, 0.01).unwrap();
    let out = evolve_numeric(&p, &b, &cfg).unwrap();
    assert!(out.norm_drift <= 1e-9, "drift {}", out.norm_drift);
    assert!((out.initial_norm - 1.0).abs() < 1e-10);
    let total = out.final_state.norm();
    assert!((out.transmitted + out.reflected - out.initial_norm).abs() <= 1e-9);
    assert!((total - out.initial_norm).abs() < 1e-8);
    assert!(out.transmitted > 0.2 && out.transmitted < 0.6);
}

#[test]
fn free_packet_matches_analytic_form() {
    let p = packet(2.0, 0.0, 16.0, 0.5);
    let b = barrier(0.0);
    let t = 8.0;
    let cfg = default_config(&p, t, 4e-3, 4e-3).unwrap();
    let out = evolve_numeric(&p, &b, &cfg).unwrap();
    let l2 = relative_l2(&out.final_state, |x| free_evolution(&p, x, t)).unwrap();
    assert!(l2 < 1e-5, "relative L2 {l2}");
}

#[test]
fn correlated_packet_tracks_closed_form() {
    let p = packet(1.0, -1.0, 10.0, 1.0);
    let b = barrier(1.0);
    let cfg = default_config(&p, 16.0, 0.01, 0.01)
        .unwrap()
        .with_snapshots(vec![5.0]);
    let out = evolve_numeric(&p, &b, &cfg).unwrap();
    assert_eq!(out.snapshots.len(), 1);
    assert_eq!(out.snapshots[0].t(), 5.0);
    let before = relative_l2(&out.snapshots[0], |x| evolved_wavefunction(&p, &b, x, 5.0)).unwrap();
    let after = relative_l2(&out.final_state, |x| evolved_wavefunction(&p, &b, x, 16.0)).unwrap();
    assert!(before < 3e-3 && after < 1e-2, "{before} {after}");
}

#[test]
fn quasi_monochromatic_packet_recovers_plane_wave_transmission() {
    // B = 0.01 decides how the strength enters the origin row: the on-site
    // term Z/dx gives 1/(1+A); doubling it would give 1/(1+4A)
    let p0 = 2.0;
    let s = (1.0f64 / (2.0 * 0.01 * p0 * p0)).sqrt();
    let p = packet(s, 0.0, 10.0 * s, p0);
    for a in [0.25, 1.0, 4.0] {
        let b = barrier(p0 * f64::sqrt(a));
        let t_final = default_t_final(&p, &b, 1e-4).unwrap();
        let cfg = default_config(&p, t_final, 0.02, 0.02).unwrap();
        let out = evolve_numeric(&p, &b, &cfg).unwrap();
        let exact = transmission_t(&DimensionlessPoint::new(a, 0.01).unwrap(), 1e-10)
            .unwrap()
            .value;
        let plane = plane_wave_t(a).unwrap();
        assert!(
            (out.transmitted - exact).abs() < 1e-3,
            "A={a}: {} vs {exact}",
            out.transmitted
        );
        assert!((out.transmitted - plane).abs() < 0.01);
        assert!((out.transmitted - 1.0 / (1.0 + 4.0 * a)).abs() > 0.05);
    }
}

#[test]
fn regularized_barrier_approaches_jump_condition() {
    // a smooth barrier of width w differs from the jump by O(Z w)
    let p = packet(1.0, 0.0, 10.0, 2.0);
    let b = barrier(2.0);
    let base = default_config(&p, 10.0, 0.01, 0.01).unwrap();
    let jump = evolve_numeric(&p, &b, &base).unwrap().transmitted;
    let gaps: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&width| {
            let cfg = base
                .clone()
                .with_barrier_model(BarrierModel::RegularizedGaussian { width });
            (evolve_numeric(&p, &b, &cfg).unwrap().transmitted - jump).abs()
        })
        .collect();
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.4..=2.5).contains(&ratio), "{gaps:?}");
    }
    assert!(gaps[2] < 0.02);
    let bad = base.with_barrier_model(BarrierModel::RegularizedGaussian { width: 0.0 });
    assert!(evolve_numeric(&p, &b, &bad).is_err());
}

#[test]
fn boundary_contamination_is_reported() {
    let p = packet(1.0, 0.0, 10.0, 2.0);
    let cfg = SolverConfig::with_origin_node(-12.0, 25.0, 0.005, 0.005, 10.0).unwrap();
    match evolve_numeric(&p, &barrier(0.5), &cfg) {
        Err(Error::BoundaryContamination { time, probability }) => {
            assert!(time > 0.0 && time < 10.0);
            assert!(probability > 1e-6);
        }
        other => panic!("expected contamination, got {other:?}"),
    }
}

#[test]
fn default_final_time_grows_as_tolerance_tightens() {
    let p = packet(1.0, 0.0, 15.0, 1.0);
    let b = barrier(0.5);
    let loose = default_t_final(&p, &b, 1e-3).unwrap();
    let tight = default_t_final(&p, &b, 1e-5).unwrap();
    assert!(tight > loose && loose >= 30.0);
    // a narrow momentum distribution has no slow tail to wait for
    let narrow = packet(5.0, 0.0, 50.0, 3.0);
    assert!((default_t_final(&narrow, &b, 1e-4).unwrap() - 2.0 * 50.0 / 3.0).abs() < 1e-12);
    assert!(default_t_final(&p, &b, 0.0).is_err());
}

#[test]
fn propagator_quadrature_reduces_to_free_motion() {
    let p = packet(1.0, 0.7, 10.0, 2.0);
    let q = PropagatorQuadrature::default();
    for x in [-6.0, -1.0, 2.0, 5.0] {
        let d = propagator_direct(&p, &barrier(0.0), x, 3.0, &q).unwrap();
        let f = free_evolution(&p, x, 3.0).unwrap();
        assert!((d - f).norm() < 1e-8);
    }
    assert!(propagator_direct(&p, &barrier(1.0), 0.0, 0.0, &q).is_err());
}

#[test]
fn propagator_quadrature_matches_closed_form() {
    let p = packet(1.0, 0.0, 10.0, 2.0);
    let b = barrier(2.0);
    let q = PropagatorQuadrature::default();
    let d = propagator_direct(&p, &b, -5.0, 12.0, &q).unwrap();
    let halved = propagator_direct(&p, &b, -5.0, 12.0, &q.halved()).unwrap();
    let closed = evolved_wavefunction(&p, &b, -5.0, 12.0).unwrap();
    assert!((d - halved).norm() < 1e-9);
    assert!((d - closed).norm() / closed.norm() <= 1e-3);
}

#[test]
fn three_way_cross_validation() {
    let p = packet(1.0, 1.0, 10.0, 1.0);
    let b = barrier(1.0);
    let t = 14.0;
    let cfg = default_config(&p, t, 5e-3, 5e-3).unwrap();
    let grid = evolve_numeric(&p, &b, &cfg).unwrap().final_state;
    // 64 grid nodes across the bulk of the state
    let step = 200;
    let start = cfg.origin_index() - 24 * step;
    let idx: Vec<usize> = (0..64).map(|k| start + k * step).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| grid.x_values()[i]).collect();
    let direct = propagator_direct_many(&p, &b, &xs, t, &PropagatorQuadrature::default()).unwrap();
    let closed: Vec<C64> = xs
        .iter()
        .map(|&x| evolved_wavefunction(&p, &b, x, t).unwrap())
        .collect();
    let numeric: Vec<C64> = idx.iter().map(|&i| grid.amplitudes()[i]).collect();
    let rel = |a: &[C64], b: &[C64]| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let n: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (d / n).sqrt()
    };
    assert!(rel(&direct, &closed) < 1e-10);
    assert!(rel(&numeric, &closed) < 1e-3, "{}", rel(&numeric, &closed));
    assert!(rel(&numeric, &direct) < 1e-3);
}

#[test]
fn convergence_study_on_a_narrow_momentum_packet() {
    let p = packet(1.0, 0.0, 15.0, 10f64.sqrt());
    let b = barrier(10f64.sqrt());
    let t_final = default_t_final(&p, &b, 1e-5).unwrap();
    let base = default_config(&p, t_final, 0.04, 0.02).unwrap();
    let report = convergence_study(&p, &b, &base).unwrap();

    let order = report.spatial.transmitted_order.unwrap();
    assert!((1.8..=2.2).contains(&order), "spatial order {order}");
    let t = report.spatial.transmitted;
    let shrink = (t[0] - t[1]) / (t[1] - t[2]);
    assert!((3.5..=4.5).contains(&shrink));

    let exact = transmission_t(&point_from_physical(&p, &b), 1e-10)
        .unwrap()
        .value;
    assert!(
        (report.extrapolated_transmitted - exact).abs() <= report.uncertainty + 1e-5,
        "{} +- {} vs {exact}",
        report.extrapolated_transmitted,
        report.uncertainty
    );
    assert!(report.uncertainty < 1e-3);
}

#[test]
fn free_packet_temporal_order_is_two() {
    let p = packet(2.0, 0.0, 16.0, 1.0);
    let b = barrier(0.0);
    let base = default_config(&p, 4.0, 0.01, 0.01).unwrap();
    let report = convergence_study(&p, &b, &base).unwrap();
    let order = report.temporal.wavefunction_order.unwrap();
    assert!((1.8..=2.2).contains(&order), "temporal order {order}");
    let order = report.spatial.wavefunction_order.unwrap();
    assert!((1.8..=2.2).contains(&order), "spatial order {order}");
}
