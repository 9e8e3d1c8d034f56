use docksim::analysis::{classify_restitution, restitution};
use docksim::dynamics::{simulate, simulate_planar, simulate_spatial, Mode, Run};
use docksim::linear::inertia_for_reduced_mass;
use docksim::params::{approach_state_2d, validate};
use docksim::stability::{critical_delay, verdict_4th_order, Verdict, DEFAULT_NEUTRAL_BAND};
use docksim::{BodyParams, ChaserState2D, ChaserState3D, ContactParams, Error, InitialState, SimConfig, Spring};
use nalgebra::{Matrix3, Vector3};

fn baseline_body() -> BodyParams {
    let j = inertia_for_reduced_mass(60.0, 15.6, 0.3, 30f64.to_radians()).unwrap();
    BodyParams::planar(60.0, j, 0.3)
}

fn baseline_contact(b: f64) -> ContactParams {
    ContactParams::virtual_only(3000.0, b, 30f64.to_radians())
}

fn epsilon(b: f64, delay: f64, dt: f64) -> f64 {
    let body = baseline_body();
    let contact = baseline_contact(b);
    let initial = approach_state_2d(&body, &contact, 0.002, 0.02).unwrap();
    let mut cfg = SimConfig::new(delay, 0.6, InitialState::Planar(initial));
    cfg.dt = dt;
    let out = simulate_planar(&cfg, &body, &contact).unwrap();
    restitution(&out.events[0]).unwrap()
}

#[test]
fn restitution_grows_with_delay() {
    let eps: Vec<f64> = [0.0, 0.008, 0.016, 0.024].iter().map(|&h| epsilon(50.0, h, 1e-4)).collect();
    assert!(eps.windows(2).all(|w| w[1] >= w[0]), "{eps:?}");
}

#[test]
fn restitution_converges_in_step() {
    for b in [0.0, 50.0] {
        let coarse = epsilon(b, 0.016, 1e-4);
        let fine = epsilon(b, 0.016, 5e-5);
        assert!((coarse / fine - 1.0).abs() < 0.005, "b = {b}: {coarse} vs {fine}");
    }
}

#[test]
fn restitution_agrees_with_linear_verdict() {
    let body = baseline_body();
    for b in [0.0, 45.0, 70.0] {
        let linear = verdict_4th_order(&body, &baseline_contact(b), 0.016, DEFAULT_NEUTRAL_BAND).unwrap();
        let simulated = classify_restitution(epsilon(b, 0.016, 1e-4), 0.02);
        assert_eq!(simulated, linear.verdict, "b = {b}");
    }
    assert_eq!(
        verdict_4th_order(&body, &baseline_contact(0.0), 0.016, DEFAULT_NEUTRAL_BAND).unwrap().verdict,
        Verdict::Unstable
    );
}

#[test]
fn critical_delay_scales_inversely_with_stiffness() {
    let c = |k: f64| critical_delay(&docksim::linear::DdeCoefficients::new(60.0, 2.0, k)).unwrap();
    for k in [1e3, 1e4, 1e5] {
        let ratio = c(k) / c(2.0 * k);
        assert!((ratio / 2.0 - 1.0).abs() < 0.05, "k = {k}: ratio {ratio}");
    }
}

#[test]
fn short_run_has_no_events() {
    let body = baseline_body();
    let contact = baseline_contact(50.0);
    let initial = approach_state_2d(&body, &contact, 0.002, 0.02).unwrap();
    let cfg = SimConfig::new(0.016, 0.05, InitialState::Planar(initial));
    let run = simulate(&cfg, &body, &contact, Mode::Planar).unwrap();
    assert!(run.events().is_empty());
    assert_eq!(run.to_csv().lines().count(), 502);
}

#[test]
fn events_bracket_the_contact() {
    let body = baseline_body();
    let contact = baseline_contact(50.0);
    let initial = approach_state_2d(&body, &contact, 0.002, 0.02).unwrap();
    let cfg = SimConfig::new(0.016, 0.6, InitialState::Planar(initial));
    let out = simulate_planar(&cfg, &body, &contact).unwrap();
    assert_eq!(out.events.len(), 1);
    let e = out.events[0];
    // the tip starts 2 mm out at 20 mm/s
    assert!((e.t_in - 0.1).abs() < 1e-9);
    assert!(e.t_in < e.t_out && e.v_minus < 0.0 && e.v_plus > 0.0 && e.max_depth > 0.0);
    let inside = out.trajectory.samples.iter().filter(|s| s.in_contact()).count();
    assert!(((e.t_out - e.t_in) / 1e-4 - inside as f64).abs() <= 1.0);
}

#[test]
fn divergence_guard_trips() {
    let body = baseline_body();
    // bilateral contact far past the stabilisable delay grows without bound
    let contact = baseline_contact(0.0).with_activation(docksim::Activation::Bilateral);
    let initial = approach_state_2d(&body, &contact, 0.002, 0.02).unwrap();
    let mut cfg = SimConfig::new(0.05, 30.0, InitialState::Planar(initial));
    cfg.divergence_factor = 10.0;
    let err = simulate_planar(&cfg, &body, &contact).unwrap_err();
    assert!(matches!(err, Error::Diverged { .. } | Error::NonFinite { .. }), "{err}");
}

#[test]
fn spatial_state_must_be_planar_for_2d() {
    let body = baseline_body();
    let contact = baseline_contact(50.0);
    let initial = ChaserState3D {
        r: Vector3::new(0.01, 0.0, 0.0),
        v: Vector3::zeros(),
        d_c3: Vector3::z(),
        omega: Vector3::zeros(),
    };
    let cfg = SimConfig::new(0.016, 0.1, InitialState::Spatial(initial));
    assert!(matches!(simulate_planar(&cfg, &body, &contact), Err(Error::NotPlanar)));
    assert!(simulate_spatial(&cfg, &body, &contact).is_ok());
}

#[test]
fn attitude_column_stays_unit_over_a_million_steps() {
    let body = BodyParams {
        mass: 60.0,
        inertia: Matrix3::from_diagonal(&Vector3::new(2.0, 3.0, 4.0)),
        probe: Vector3::new(0.0, 0.0, 0.3),
    };
    let contact = ContactParams::virtual_only(3000.0, 50.0, 0.5);
    let initial = ChaserState3D {
        r: Vector3::new(0.0, 0.0, 5.0),
        v: Vector3::zeros(),
        d_c3: Vector3::new(0.0, 0.6, 0.8),
        omega: Vector3::new(0.3, 1.0, -0.2),
    };
    let mut cfg = SimConfig::new(0.016, 100.0, InitialState::Spatial(initial));
    cfg.record_every = 1000;
    let out = simulate_spatial(&cfg, &body, &contact).unwrap();
    assert_eq!(out.steps, 1_000_000);
    for s in &out.trajectory.samples {
        assert!((s.state.d_c3.norm() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn compliance_device_contact() {
    // three in-plane springs at 120 degrees plus one along the probe
    let star = |deg: f64| {
        let r = deg.to_radians();
        Spring {
            stiffness: 300.0,
            direction: Vector3::new(r.cos(), r.sin(), 0.0),
        }
    };
    let mut contact = ContactParams::virtual_only(1000.0, 60.0, 30f64.to_radians());
    contact.springs = vec![
        star(0.0),
        star(120.0),
        star(240.0),
        Spring {
            stiffness: 1500.0,
            direction: Vector3::z(),
        },
    ];
    let body = baseline_body();
    let initial = approach_state_2d(&body, &contact, 0.002, 0.015).unwrap();
    let cfg = SimConfig::new(0.016, 0.6, InitialState::Planar(initial));
    let v = validate(&body, &contact, &cfg).unwrap();
    let run = simulate(&v.sim, &v.body, &v.contact, Mode::Spatial).unwrap();
    let Run::Spatial(out) = run else { panic!("spatial run expected") };
    assert_eq!(out.events.len(), 1);
    let eps = restitution(&out.events[0]).unwrap();
    assert!(eps > 0.0 && eps < 1.5);
}

#[test]
fn planar_run_matches_embedding() {
    let body = baseline_body();
    let contact = baseline_contact(45.0);
    let initial = ChaserState2D {
        y: 0.01,
        v_y: 0.003,
        ..approach_state_2d(&body, &contact, 0.001, 0.01).unwrap()
    };
    let cfg = SimConfig::new(0.008, 0.5, InitialState::Planar(initial));
    let flat = simulate_planar(&cfg, &body, &contact).unwrap();
    let solid = simulate_spatial(&cfg, &body, &contact).unwrap();
    for (a, b) in flat.trajectory.samples.iter().zip(&solid.trajectory.samples) {
        let p = b.state.planar_projection();
        assert!((a.state.z - p.z).abs() < 1e-9 && (a.state.theta - p.theta).abs() < 1e-9);
        assert!((a.state.y - p.y).abs() < 1e-9);
        assert!((a.wrench.force - b.wrench.force).abs() < 1e-6);
    }
}
