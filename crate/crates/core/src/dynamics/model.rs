use nalgebra::{Matrix3, Vector3};

use super::State;
use crate::contact::{
    contact_torque_2d, contact_wrench_3d, effective_stiffness, hybrid_force, penetration_2d, penetration_3d,
    Penetration, Wrench,
};
use crate::params::{Activation, BodyParams, ChaserState2D, ChaserState3D, ContactParams};

/// Equations of motion of the chaser under the delayed contact force.
pub trait ContactModel {
    type State: State;

    /// Penetration and wrench generated by a delayed sample.
    fn contact(&self, delayed: &Self::State) -> (Penetration, Wrench);

    /// Time derivative given the current and the delayed state.
    fn rhs(&self, state: &Self::State, delayed: &Self::State) -> Self::State;

    /// Geometric (undelayed) penetration of a state.
    fn penetration(&self, state: &Self::State) -> Penetration;

    /// Kinetic energy plus the elastic energy of the virtual spring and any
    /// compliance springs at the current attitude.
    fn energy(&self, state: &Self::State) -> f64;

    /// Contact normal in the nozzle frame, used when exporting force vectors.
    fn normal(&self) -> Vector3<f64>;
}

fn elastic_energy(p: Penetration, stiffness: f64, activation: Activation) -> f64 {
    match activation {
        Activation::Unilateral if p.depth >= 0.0 => 0.0,
        _ => 0.5 * stiffness * p.depth * p.depth,
    }
}

/// Planar chaser: translation in (y, z), rotation about x.
#[derive(Debug, Clone)]
pub struct PlanarModel {
    pub mass: f64,
    pub inertia_x: f64,
    pub arm: f64,
    pub contact: ContactParams,
}

impl PlanarModel {
    pub fn new(body: &BodyParams, contact: &ContactParams) -> Self {
        Self {
            mass: body.mass,
            inertia_x: body.inertia_x(),
            arm: body.arm(),
            contact: contact.clone(),
        }
    }

    fn stiffness_at(&self, theta: f64) -> f64 {
        // nozzle normal expressed in the body frame is the attitude column
        let (s, c) = theta.sin_cos();
        effective_stiffness(&self.contact.springs, &Vector3::new(0.0, s, c))
    }
}

impl ContactModel for PlanarModel {
    type State = ChaserState2D;

    fn contact(&self, delayed: &ChaserState2D) -> (Penetration, Wrench) {
        let p = penetration_2d(delayed, self.arm);
        let f = hybrid_force(p, self.stiffness_at(delayed.theta), &self.contact);
        let tau = contact_torque_2d(f, self.arm, delayed.theta);
        (
            p,
            Wrench {
                force: f,
                torque: Vector3::new(tau, 0.0, 0.0),
            },
        )
    }

    fn rhs(&self, x: &ChaserState2D, delayed: &ChaserState2D) -> ChaserState2D {
        let (_, w) = self.contact(delayed);
        ChaserState2D {
            y: x.v_y,
            z: x.v_z,
            v_y: 0.0,
            v_z: w.force / self.mass,
            theta: x.omega,
            omega: w.torque.x / self.inertia_x,
        }
    }

    fn penetration(&self, x: &ChaserState2D) -> Penetration {
        penetration_2d(x, self.arm)
    }

    fn energy(&self, x: &ChaserState2D) -> f64 {
        let k = self.contact.virtual_stiffness + self.stiffness_at(x.theta);
        0.5 * self.mass * (x.v_y * x.v_y + x.v_z * x.v_z)
            + 0.5 * self.inertia_x * x.omega * x.omega
            + elastic_energy(self.penetration(x), k, self.contact.activation)
    }

    fn normal(&self) -> Vector3<f64> {
        Vector3::z()
    }
}

/// Full 12-state chaser.
#[derive(Debug, Clone)]
pub struct SpatialModel {
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    inertia_inv: Matrix3<f64>,
    pub probe: Vector3<f64>,
    pub contact: ContactParams,
}

impl SpatialModel {
    /// Panics if the inertia is singular; validated parameters never are.
    pub fn new(body: &BodyParams, contact: &ContactParams) -> Self {
        Self {
            mass: body.mass,
            inertia: body.inertia,
            inertia_inv: body.inertia.try_inverse().expect("inertia tensor must be invertible"),
            probe: body.probe,
            contact: contact.clone(),
        }
    }

    /// `J^-1 ((J w) x w + tau)`
    pub fn angular_acceleration(&self, omega: &Vector3<f64>, torque: &Vector3<f64>) -> Vector3<f64> {
        self.inertia_inv * ((self.inertia * omega).cross(omega) + torque)
    }
}

impl ContactModel for SpatialModel {
    type State = ChaserState3D;

    fn contact(&self, delayed: &ChaserState3D) -> (Penetration, Wrench) {
        let p = penetration_3d(delayed, &self.probe, &self.contact.normal);
        let k_phi = effective_stiffness(&self.contact.springs, &delayed.d_c3);
        let f = hybrid_force(p, k_phi, &self.contact);
        (p, contact_wrench_3d(f, &self.probe, &delayed.d_c3))
    }

    fn rhs(&self, x: &ChaserState3D, delayed: &ChaserState3D) -> ChaserState3D {
        let (_, w) = self.contact(delayed);
        ChaserState3D {
            r: x.v,
            v: w.force / self.mass * self.contact.normal,
            d_c3: -x.omega.cross(&x.d_c3),
            omega: self.angular_acceleration(&x.omega, &w.torque),
        }
    }

    fn penetration(&self, x: &ChaserState3D) -> Penetration {
        penetration_3d(x, &self.probe, &self.contact.normal)
    }

    fn energy(&self, x: &ChaserState3D) -> f64 {
        let k = self.contact.virtual_stiffness + effective_stiffness(&self.contact.springs, &x.d_c3);
        0.5 * self.mass * x.v.norm_squared()
            + 0.5 * x.omega.dot(&(self.inertia * x.omega))
            + elastic_energy(self.penetration(x), k, self.contact.activation)
    }

    fn normal(&self) -> Vector3<f64> {
        self.contact.normal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn baseline_body() -> BodyParams {
        BodyParams::planar(60.0, 1.4230, 0.3)
    }

    #[test]
    fn ballistic_coast_without_contact() {
        let body = BodyParams {
            mass: 10.0,
            inertia: Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            probe: Vector3::new(0.0, 0.0, 0.3),
        };
        let model = SpatialModel::new(&body, &ContactParams::virtual_only(3000.0, 50.0, 0.5));
        let s = ChaserState3D {
            r: Vector3::new(0.0, 0.0, 1.0),
            v: Vector3::new(0.01, 0.0, -0.02),
            d_c3: Vector3::z(),
            omega: Vector3::zeros(),
        };
        let ds = model.rhs(&s, &s);
        assert_eq!(ds.v, Vector3::zeros());
        assert_eq!(ds.omega, Vector3::zeros());
        assert_eq!(ds.r, s.v);
    }

    #[test]
    fn gyroscopic_only() {
        let body = BodyParams {
            mass: 1.0,
            inertia: Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            probe: Vector3::z(),
        };
        let model = SpatialModel::new(&body, &ContactParams::virtual_only(0.0, 0.0, 0.5));
        // (J w) x w = (1,2,3) x (1,1,1) = (-1, 2, -1); J^-1 -> (-1, 1, -1/3)
        let dw = model.angular_acceleration(&Vector3::new(1.0, 1.0, 1.0), &Vector3::zeros());
        assert!((dw - Vector3::new(-1.0, 1.0, -1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn nominal_state_drifts() {
        let body = baseline_body();
        let contact = ContactParams::virtual_only(3000.0, 50.0, 30f64.to_radians());
        let model = PlanarModel::new(&body, &contact);
        let s = crate::params::nominal_state_2d(&body, &contact).unwrap();
        let ds = model.rhs(&s, &s);
        assert!(ds.v_z.abs() < 1e-12 && ds.omega.abs() < 1e-12);
    }

    #[test]
    fn planar_substitution() {
        let body = baseline_body();
        let contact = ContactParams::virtual_only(3000.0, 0.0, 30f64.to_radians());
        let model = PlanarModel::new(&body, &contact);
        let theta = 60f64.to_radians();
        let delayed = ChaserState2D {
            z: -0.001 - 0.3 * theta.cos(),
            theta,
            ..Default::default()
        };
        let ds = model.rhs(&delayed, &delayed);
        assert!((ds.v_z - 0.05).abs() < 1e-12);
        assert!((ds.omega + 0.3 * 3.0 * theta.sin() / 1.4230).abs() < 1e-12);
        assert_eq!(ds.v_y, 0.0);
    }

    fn planar_state() -> impl Strategy<Value = ChaserState2D> {
        (-0.1..0.1f64, -0.3..0.0f64, -0.05..0.05f64, -0.05..0.05f64, 0.2..1.4f64, -0.5..0.5f64)
            .prop_map(|(y, z, v_y, v_z, theta, omega)| ChaserState2D { y, z, v_y, v_z, theta, omega })
    }

    proptest! {
        #[test]
        fn planar_embedding_matches(
            x in planar_state(), d in planar_state(),
            b in 0.0..100.0f64, unilateral in any::<bool>(),
        ) {
            let body = baseline_body();
            let mut contact = ContactParams::virtual_only(3000.0, b, 30f64.to_radians());
            if !unilateral {
                contact.activation = Activation::Bilateral;
            }
            let p2 = PlanarModel::new(&body, &contact);
            let p3 = SpatialModel::new(&body, &contact);
            let d2 = p2.rhs(&x, &d);
            let d3 = p3.rhs(&x.embed(), &d.embed());
            let (s, c) = x.theta.sin_cos();
            prop_assert!(d3.r.x.abs() < 1e-12 && d3.v.x.abs() < 1e-12 && d3.v.y.abs() < 1e-12);
            prop_assert!((d3.r.y - d2.y).abs() < 1e-12 && (d3.r.z - d2.z).abs() < 1e-12);
            prop_assert!((d3.v.z - d2.v_z).abs() < 1e-12);
            // d/dt (0, sin, cos) = theta_dot (0, cos, -sin)
            prop_assert!((d3.d_c3.y - d2.theta * c).abs() < 1e-12);
            prop_assert!((d3.d_c3.z + d2.theta * s).abs() < 1e-12);
            prop_assert!((d3.omega.x - d2.omega).abs() < 1e-12);
            prop_assert!(d3.omega.y.abs() < 1e-12 && d3.omega.z.abs() < 1e-12);
        }
    }
}
