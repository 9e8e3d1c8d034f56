//! Linearisation of the planar model about the nominal contact state.
//!
//! Perturbation states are ordered `(z, v_z, theta, omega)`. The change of
//! variables `T` maps them to `(z, v_z, d, d_dot)`, in which the penetration
//! pair obeys a scalar delay equation with the reduced mass.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Complex, Matrix4, Vector2, Vector4};
use serde::Serialize;

use crate::dynamics::{rk4_step, DelayLine};
use crate::params::{BodyParams, ChaserState2D, ContactParams};
use crate::{Error, Result};

/// Effective mass seen along the wall normal at the nominal contact point.
pub fn reduced_mass(mass: f64, inertia_x: f64, arm: f64, alpha: f64) -> f64 {
    let lever = arm * alpha.cos();
    mass / (1.0 + mass * lever * lever / inertia_x)
}

/// Inertia about x that yields `target` as reduced mass.
///
/// Requires `0 < target < mass` and `cos(alpha) != 0`.
pub fn inertia_for_reduced_mass(mass: f64, target: f64, arm: f64, alpha: f64) -> Result<f64> {
    let lever = arm * alpha.cos();
    if !(target > 0.0 && target < mass) {
        return Err(Error::Domain(format!(
            "reduced mass {target} must lie strictly between 0 and the mass {mass}"
        )));
    }
    if lever.abs() < 1e-12 {
        return Err(Error::Domain("frontal contact: reduced mass always equals the mass".into()));
    }
    Ok(mass * lever * lever / (mass / target - 1.0))
}

/// Coefficients of `mu d'' + beta d'(t-h) + kappa d(t-h) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DdeCoefficients {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl DdeCoefficients {
    pub fn new(mass: f64, damping: f64, stiffness: f64) -> Self {
        Self {
            mass,
            damping,
            stiffness,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel2D {
    /// Jacobian of the planar right-hand side at the nominal state.
    pub gradient: Matrix4<f64>,
    pub transform: Matrix4<f64>,
    pub transform_inv: Matrix4<f64>,
    /// Dynamics in transformed coordinates.
    pub transformed: Matrix4<f64>,
    pub reduced_mass: f64,
    pub nominal: ChaserState2D,
    /// `a cos(alpha)`
    pub lever: f64,
    pub mass: f64,
    pub inertia_x: f64,
    pub stiffness: f64,
    pub damping: f64,
}

fn gradient(mass: f64, inertia_x: f64, arm: f64, c: f64, k: f64, b: f64) -> Matrix4<f64> {
    let l = arm * c;
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -k / mass, -b / mass, k * l / mass, b * l / mass,
        0.0, 0.0, 0.0, 1.0,
        k * l / inertia_x, b * l / inertia_x, -k * l * l / inertia_x, -b * l * l / inertia_x,
    )
}

fn transform(lever: f64) -> (Matrix4<f64>, Matrix4<f64>) {
    let t = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        1.0, 0.0, -lever, 0.0,
        0.0, 1.0, 0.0, -lever,
    );
    let r = 1.0 / lever;
    let t_inv = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        r, 0.0, -r, 0.0,
        0.0, r, 0.0, -r,
    );
    (t, t_inv)
}

/// Transformed dynamics in closed form.
pub fn transformed_closed_form(mass: f64, reduced_mass: f64, k: f64, b: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, -k / mass, -b / mass,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -k / reduced_mass, -b / reduced_mass,
    )
}

/// Linearise about the nominal contact state, using the contact's
/// stiffness bound and virtual damping.
///
/// Accepts `alpha` in `[0, pi/2)`; at `pi/2` the transform is singular.
pub fn linearize_2d(body: &BodyParams, contact: &ContactParams) -> Result<LinearModel2D> {
    let alpha = contact.cone_half_angle;
    if !(alpha.is_finite() && (0.0..FRAC_PI_2).contains(&alpha)) {
        return Err(Error::ConeAngle(alpha));
    }
    let (mass, inertia_x, arm) = (body.mass, body.inertia_x(), body.arm());
    let (k, b) = (contact.stiffness_bound(), contact.virtual_damping);
    let c = alpha.cos();
    let lever = arm * c;
    if lever <= 0.0 {
        return Err(Error::Domain(format!("degenerate transform, a cos(alpha) = {lever}")));
    }

    let f_x = gradient(mass, inertia_x, arm, c, k, b);
    let (t, t_inv) = transform(lever);
    let m_a = reduced_mass(mass, inertia_x, arm, alpha);
    let similar = t * f_x * t_inv;
    let closed = transformed_closed_form(mass, m_a, k, b);
    let scale = similar.amax().max(1.0);
    assert!(
        (similar - closed).amax() <= 1e-10 * scale,
        "similarity product disagrees with the closed form"
    );

    Ok(LinearModel2D {
        gradient: f_x,
        transform: t,
        transform_inv: t_inv,
        transformed: closed,
        reduced_mass: m_a,
        nominal: ChaserState2D {
            z: -arm * alpha.sin(),
            theta: FRAC_PI_2 - alpha,
            ..Default::default()
        },
        lever,
        mass,
        inertia_x,
        stiffness: k,
        damping: b,
    })
}

impl LinearModel2D {
    pub fn dde_coefficients(&self) -> DdeCoefficients {
        DdeCoefficients::new(self.reduced_mass, self.damping, self.stiffness)
    }

    /// Penetration depth of a perturbation, `dz - a cos(alpha) dtheta`.
    pub fn depth(&self, x: &Vector4<f64>) -> f64 {
        x[0] - self.lever * x[2]
    }

    /// Integrate the delayed perturbation dynamics: kinematic rows act on the
    /// current state, force rows on the state `delay` earlier.
    pub fn simulate(&self, delay: f64, dt: f64, t_end: f64, x0: Vector4<f64>) -> Result<Vec<(f64, Vector4<f64>)>> {
        let mut current = Matrix4::zeros();
        current[(0, 1)] = 1.0;
        current[(2, 3)] = 1.0;
        let delayed = self.gradient - current;
        integrate(delay, dt, t_end, x0, |x, xd| current * x + delayed * xd)
    }
}

pub fn penetration_dde_coeffs(body: &BodyParams, contact: &ContactParams) -> DdeCoefficients {
    let m_a = reduced_mass(body.mass, body.inertia_x(), body.arm(), contact.cone_half_angle);
    DdeCoefficients::new(m_a, contact.virtual_damping, contact.stiffness_bound())
}

/// Integrate the scalar penetration delay equation for `(d, d_dot)`.
pub fn simulate_penetration(
    c: &DdeCoefficients,
    delay: f64,
    dt: f64,
    t_end: f64,
    x0: Vector2<f64>,
) -> Result<Vec<(f64, Vector2<f64>)>> {
    integrate(delay, dt, t_end, x0, |x, xd| {
        Vector2::new(x[1], -(c.damping * xd[1] + c.stiffness * xd[0]) / c.mass)
    })
}

fn integrate<const N: usize>(
    delay: f64,
    dt: f64,
    t_end: f64,
    x0: nalgebra::SVector<f64, N>,
    rhs: impl Fn(&nalgebra::SVector<f64, N>, &nalgebra::SVector<f64, N>) -> nalgebra::SVector<f64, N>,
) -> Result<Vec<(f64, nalgebra::SVector<f64, N>)>> {
    let steps = (t_end / dt).round() as usize;
    let mut history = DelayLine::new(delay, dt, 0.0, x0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, x0));
    let mut x = x0;
    for i in 0..steps {
        let t = i as f64 * dt;
        x = rk4_step(t, &x, dt, &history, &rhs)?;
        let t_next = (i + 1) as f64 * dt;
        history.push(t_next, x);
        out.push((t_next, x));
    }
    Ok(out)
}

/// Contact factor of the characteristic function,
/// `mu s^2 + e^{-s h} (beta s + kappa)`.
pub fn characteristic_value(c: &DdeCoefficients, delay: f64, s: Complex<f64>) -> Complex<f64> {
    c.mass * s * s + (-s * delay).exp() * (c.damping * s + c.stiffness)
}
