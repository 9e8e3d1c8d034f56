//! Penetration kinematics and the spring-dashpot contact law.
//!
//! Sign convention: `depth < 0` means the probe tip is past the wall, so the
//! law `f = -k d - b d_dot` yields a positive (outward along the normal)
//! force during compression.

use nalgebra::Vector3;
use serde::Serialize;

use crate::params::{Activation, ChaserState2D, ChaserState3D, ContactParams, Spring};

/// Signed penetration depth [m] and its rate [m/s].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Penetration {
    pub depth: f64,
    pub rate: f64,
}

/// Contact force magnitude along the normal and torque about the centre of
/// mass, body frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Wrench {
    pub force: f64,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn force_vector(&self, normal: &Vector3<f64>) -> Vector3<f64> {
        self.force * normal
    }
}

/// `d = r.n + a.d_c3`, `d_dot = v.n + a.(-omega x d_c3)`, both from one sample.
pub fn penetration_3d(
    delayed: &ChaserState3D,
    probe: &Vector3<f64>,
    normal: &Vector3<f64>,
) -> Penetration {
    let d_c3_rate = -delayed.omega.cross(&delayed.d_c3);
    Penetration {
        depth: delayed.r.dot(normal) + probe.dot(&delayed.d_c3),
        rate: delayed.v.dot(normal) + probe.dot(&d_c3_rate),
    }
}

pub fn penetration_2d(delayed: &ChaserState2D, arm: f64) -> Penetration {
    let (s, c) = delayed.theta.sin_cos();
    Penetration {
        depth: delayed.z + arm * c,
        rate: delayed.v_z - arm * delayed.omega * s,
    }
}

/// Linear spring-dashpot force magnitude.
///
/// In unilateral mode the wall can only push: there is no force once the
/// tip has left the wall, and the dashpot cannot make the force negative
/// while the tip withdraws.
pub fn spring_dashpot_force(p: Penetration, stiffness: f64, damping: f64, activation: Activation) -> f64 {
    let f = -stiffness * p.depth - damping * p.rate;
    match activation {
        Activation::Bilateral => f,
        Activation::Unilateral if p.depth < 0.0 => f.max(0.0),
        Activation::Unilateral => 0.0,
    }
}

/// Scalar stiffness of the spring set projected on `normal`,
/// `sum k_i (l_i . n)^2`. Both must be expressed in the same frame.
pub fn effective_stiffness(springs: &[Spring], normal: &Vector3<f64>) -> f64 {
    springs
        .iter()
        .map(|s| {
            let c = s.direction.dot(normal);
            s.stiffness * c * c
        })
        .sum()
}

/// Largest effective stiffness over a set of candidate normal directions.
/// Useful as the time-invariant bound fed to the linear analysis.
pub fn max_effective_stiffness<'a>(
    springs: &[Spring],
    normals: impl IntoIterator<Item = &'a Vector3<f64>>,
) -> f64 {
    normals
        .into_iter()
        .map(|n| effective_stiffness(springs, n))
        .fold(0.0, f64::max)
}

/// Physical compliance plus virtual spring and damper:
/// `f = -(k_phi + k_v) d - b_v d_dot`.
pub fn hybrid_force(p: Penetration, k_phi: f64, contact: &ContactParams) -> f64 {
    spring_dashpot_force(
        p,
        k_phi + contact.virtual_stiffness,
        contact.virtual_damping,
        contact.activation,
    )
}

/// `tau_B = f (a x d_c3)` with the attitude column from the delayed sample.
pub fn contact_wrench_3d(force: f64, probe: &Vector3<f64>, delayed_d_c3: &Vector3<f64>) -> Wrench {
    Wrench {
        force,
        torque: force * probe.cross(delayed_d_c3),
    }
}

/// Planar torque about x: `-a f sin(theta(t - h))`.
pub fn contact_torque_2d(force: f64, arm: f64, delayed_theta: f64) -> f64 {
    -arm * force * delayed_theta.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DEG60: f64 = std::f64::consts::FRAC_PI_3;

    fn planar(z: f64, v_z: f64, theta: f64, omega: f64) -> ChaserState2D {
        ChaserState2D {
            y: 0.0,
            z,
            v_y: 0.0,
            v_z,
            theta,
            omega,
        }
    }

    #[test]
    fn penetration_3d_cancels() {
        let probe = Vector3::new(0.1, -0.2, 0.3);
        let d_c3 = Vector3::new(0.2, 0.3, 0.5).normalize();
        let n = Vector3::z();
        let s = ChaserState3D {
            r: Vector3::new(0.4, 0.7, -probe.dot(&d_c3)),
            v: Vector3::zeros(),
            d_c3,
            omega: Vector3::zeros(),
        };
        let p = penetration_3d(&s, &probe, &n);
        assert!(p.depth.abs() < 1e-15);
        assert_eq!(p.rate, 0.0);
    }

    #[test]
    fn penetration_3d_substitution() {
        let s = ChaserState3D {
            r: Vector3::new(0.0, 0.0, -0.151),
            v: Vector3::zeros(),
            d_c3: Vector3::new(0.0, DEG60.sin(), DEG60.cos()),
            omega: Vector3::zeros(),
        };
        let p = penetration_3d(&s, &Vector3::new(0.0, 0.0, 0.3), &Vector3::z());
        assert!((p.depth + 0.001).abs() < 1e-15);
    }

    #[test]
    fn penetration_2d_substitution() {
        let p = penetration_2d(&planar(-0.151, -0.015, DEG60, 0.0), 0.3);
        assert!((p.depth + 0.001).abs() < 1e-15);
        assert!((p.rate + 0.015).abs() < 1e-15);

        let p = penetration_2d(&planar(0.0, 0.0, DEG60, 0.1), 0.3);
        assert!((p.rate + 0.3 * 0.1 * DEG60.sin()).abs() < 1e-15);
        assert!((p.rate + 0.02598).abs() < 1e-5);
    }

    #[test]
    fn force_law_cases() {
        let bi = Activation::Bilateral;
        let uni = Activation::Unilateral;
        let p = |depth, rate| Penetration { depth, rate };
        assert!((spring_dashpot_force(p(-0.001, 0.0), 3000.0, 0.0, uni) - 3.0).abs() < 1e-12);
        assert_eq!(spring_dashpot_force(p(0.0, 0.0), 3000.0, 10.0, uni), 0.0);
        assert_eq!(spring_dashpot_force(p(0.001, 0.0), 3000.0, 0.0, uni), 0.0);
        assert!((spring_dashpot_force(p(0.001, 0.0), 3000.0, 0.0, bi) + 3.0).abs() < 1e-12);
        // withdrawing fast with little depth left: bilateral pulls, unilateral does not
        assert!(spring_dashpot_force(p(-1e-4, 0.05), 3000.0, 50.0, bi) < 0.0);
        assert_eq!(spring_dashpot_force(p(-1e-4, 0.05), 3000.0, 50.0, uni), 0.0);
    }

    #[test]
    fn hybrid_force_cases() {
        let mut c = ContactParams::virtual_only(0.0, 0.0, 0.5);
        let p = Penetration { depth: -0.002, rate: 0.0 };
        assert!((hybrid_force(p, 1000.0, &c) - 2.0).abs() < 1e-12);
        c.virtual_stiffness = 2000.0;
        assert!((hybrid_force(p, 1000.0, &c) - 6.0).abs() < 1e-12);
        c.virtual_stiffness = 0.0;
        c.virtual_damping = 50.0;
        let p = Penetration { depth: 0.0, rate: -0.02 };
        c.activation = Activation::Bilateral;
        assert!((hybrid_force(p, 0.0, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_stiffness_simple() {
        let n = Vector3::new(0.0, 0.6, 0.8);
        let aligned = [Spring { stiffness: 4000.0, direction: n }];
        assert!((effective_stiffness(&aligned, &n) - 4000.0).abs() < 1e-9);
        let ortho = [Spring {
            stiffness: 4000.0,
            direction: Vector3::new(0.0, 0.8, -0.6),
        }];
        assert!(effective_stiffness(&ortho, &n).abs() < 1e-12);
    }

    #[test]
    fn effective_stiffness_compliance_device() {
        // Star of three 1000 N/m springs at 120 deg in the body xy-plane, one
        // 4000 N/m spring along the probe, normal 45 deg off the probe axis in
        // the plane of the first spring. Direction cosines by hand:
        // l1.n = s, l2.n = l3.n = -s/2, l4.n = s, with s = sqrt(2)/2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let oracle = 1000.0 * s * s + 2.0 * 1000.0 * (s / 2.0) * (s / 2.0) + 4000.0 * s * s;
        assert!((oracle - 2750.0).abs() < 1e-9);

        let (s120, c120) = 120f64.to_radians().sin_cos();
        let springs = [
            Spring { stiffness: 1000.0, direction: Vector3::x() },
            Spring { stiffness: 1000.0, direction: Vector3::new(c120, s120, 0.0) },
            Spring { stiffness: 1000.0, direction: Vector3::new(c120, -s120, 0.0) },
            Spring { stiffness: 4000.0, direction: Vector3::z() },
        ];
        let n = Vector3::new(s, 0.0, s);
        assert!((effective_stiffness(&springs, &n) - oracle).abs() < 1e-9);
        let candidates = [Vector3::x(), n, Vector3::z()];
        assert!((max_effective_stiffness(&springs, &candidates) - 4000.0).abs() < 1e-9);
    }

    #[test]
    fn wrench_examples() {
        let probe = Vector3::new(0.0, 0.0, 0.3);
        let d_c3 = Vector3::new(0.0, DEG60.sin(), DEG60.cos());
        assert_eq!(contact_wrench_3d(0.0, &probe, &d_c3).torque, Vector3::zeros());
        // (0,0,a) x (0,s,c) = (-a s, 0, 0)
        let w = contact_wrench_3d(3.0, &probe, &d_c3);
        assert!((w.torque.x + 3.0 * 0.3 * DEG60.sin()).abs() < 1e-15);
        assert!((w.torque.x + 0.779423).abs() < 1e-6);
        assert_eq!((w.torque.y, w.torque.z), (0.0, 0.0));
        assert_eq!(w.force_vector(&Vector3::z()), Vector3::new(0.0, 0.0, 3.0));
    }

    fn unit_vector() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
    }

    fn planar_state() -> impl Strategy<Value = ChaserState2D> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..std::f64::consts::PI, -2.0..2.0f64)
            .prop_map(|(y, z, v_y, v_z, theta, omega)| ChaserState2D { y, z, v_y, v_z, theta, omega })
    }

    proptest! {
        #[test]
        fn planar_penetration_matches_spatial(s in planar_state(), arm in 0.01..2.0f64) {
            let p2 = penetration_2d(&s, arm);
            let p3 = penetration_3d(&s.embed(), &Vector3::new(0.0, 0.0, arm), &Vector3::z());
            prop_assert!((p2.depth - p3.depth).abs() < 1e-12);
            prop_assert!((p2.rate - p3.rate).abs() < 1e-12);
        }

        #[test]
        fn planar_torque_matches_spatial(s in planar_state(), arm in 0.01..2.0f64, f in -100.0..100.0f64) {
            let w = contact_wrench_3d(f, &Vector3::new(0.0, 0.0, arm), &s.embed().d_c3);
            prop_assert!((w.torque.x - contact_torque_2d(f, arm, s.theta)).abs() < 1e-12);
            prop_assert!(w.torque.y.abs() < 1e-12 && w.torque.z.abs() < 1e-12);
        }

        #[test]
        fn effective_stiffness_bounded(
            n in unit_vector(),
            springs in prop::collection::vec((0.0..5000.0f64, unit_vector()), 0..8),
        ) {
            let springs: Vec<_> = springs.into_iter()
                .map(|(stiffness, direction)| Spring { stiffness, direction })
                .collect();
            let total: f64 = springs.iter().map(|s| s.stiffness).sum();
            let k = effective_stiffness(&springs, &n);
            prop_assert!(k >= 0.0);
            prop_assert!(k <= total * (1.0 + 1e-12));
        }

        #[test]
        fn hybrid_superposes(
            depth in -0.01..0.01f64, rate in -0.1..0.1f64,
            k_phi in 0.0..5000.0f64, k_v in 0.0..5000.0f64, b_v in 0.0..200.0f64,
        ) {
            let mut c = ContactParams::virtual_only(k_v, b_v, 0.5).with_activation(Activation::Bilateral);
            let p = Penetration { depth, rate };
            let total = hybrid_force(p, k_phi, &c);
            let parts = spring_dashpot_force(p, k_phi, 0.0, c.activation)
                + spring_dashpot_force(p, k_v, 0.0, c.activation)
                - b_v * rate;
            prop_assert!((total - parts).abs() <= 1e-12 * (1.0 + total.abs()));
            c.activation = Activation::Unilateral;
            if depth < 0.0 && total > 0.0 {
                prop_assert_eq!(hybrid_force(p, k_phi, &c), total);
            }
        }

        #[test]
        fn unilateral_never_pulls(depth in -0.01..0.01f64, rate in -0.1..0.1f64, k in 0.0..5000.0f64, b in 0.0..200.0f64) {
            let f = spring_dashpot_force(Penetration { depth, rate }, k, b, Activation::Unilateral);
            prop_assert!(f >= 0.0);
            if depth >= 0.0 {
                prop_assert_eq!(f, 0.0);
            }
        }
    }
}
