//! Shared domain types, invariant checks and the nominal contact state.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::{Error, Result, ValidationReport};

/// Unit vectors within this distance of norm one are renormalised;
/// anything further away is rejected.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Default integration step [s].
pub const DEFAULT_DT: f64 = 1e-4;

/// Default divergence guard, as a multiple of the initial state magnitude.
pub const DEFAULT_DIVERGENCE_FACTOR: f64 = 1e3;

/// Default window over which pre- and post-impact penetration rates are averaged [s].
pub const DEFAULT_EVENT_WINDOW: f64 = 0.02;

/// Chaser rigid-body properties.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyParams {
    /// Mass [kg].
    pub mass: f64,
    /// Inertia about the centre of mass, body frame [kg m^2].
    pub inertia: Matrix3<f64>,
    /// Probe vector from the centre of mass to the probe tip, body frame [m].
    pub probe: Vector3<f64>,
}

impl BodyParams {
    /// Body for planar work: isotropic inertia `inertia_x` and a probe of
    /// length `arm` along the body z-axis.
    pub fn planar(mass: f64, inertia_x: f64, arm: f64) -> Self {
        Self {
            mass,
            inertia: Matrix3::identity() * inertia_x,
            probe: Vector3::new(0.0, 0.0, arm),
        }
    }

    /// Principal inertia about the body x-axis, used by the planar model.
    pub fn inertia_x(&self) -> f64 {
        self.inertia[(0, 0)]
    }

    /// Probe length.
    pub fn arm(&self) -> f64 {
        self.probe.norm()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// Force only while penetrating, and never pulling inward.
    #[default]
    Unilateral,
    /// The linear law at all times, as assumed by the linear analysis.
    Bilateral,
}

/// One spring of the passive compliance device.
#[derive(Debug, Clone, PartialEq)]
pub struct Spring {
    /// Stiffness [N/m].
    pub stiffness: f64,
    /// Unit attach direction, body frame.
    pub direction: Vector3<f64>,
}

/// Contact law parameters: physical compliance springs plus the virtual
/// stiffness and damping added in software.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactParams {
    /// k_v [N/m]
    pub virtual_stiffness: f64,
    /// b_v [N s/m]
    pub virtual_damping: f64,
    pub springs: Vec<Spring>,
    /// Outward unit normal of the local tangent plane, nozzle frame.
    pub normal: Vector3<f64>,
    /// Nozzle cone half-angle [rad].
    pub cone_half_angle: f64,
    pub activation: Activation,
    /// Time-invariant upper bound on `k_phi + k_v` used by the linear analysis.
    /// When absent, `k_v + sum(k_i)` is used.
    pub analysis_stiffness: Option<f64>,
}

impl ContactParams {
    /// Purely virtual contact: no springs, normal along nozzle z.
    pub fn virtual_only(stiffness: f64, damping: f64, cone_half_angle: f64) -> Self {
        Self {
            virtual_stiffness: stiffness,
            virtual_damping: damping,
            springs: Vec::new(),
            normal: Vector3::z(),
            cone_half_angle,
            activation: Activation::Unilateral,
            analysis_stiffness: None,
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    /// Stiffness fed to the linear analysis.
    pub fn stiffness_bound(&self) -> f64 {
        self.analysis_stiffness.unwrap_or_else(|| {
            self.virtual_stiffness + self.springs.iter().map(|s| s.stiffness).sum::<f64>()
        })
    }
}

/// Twelve-state chaser state in the nozzle frame N and body frame B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaserState3D {
    /// Position of the centre of mass in N [m].
    pub r: Vector3<f64>,
    /// Velocity of the centre of mass in N [m/s].
    pub v: Vector3<f64>,
    /// Third column of the rotation matrix N -> B.
    pub d_c3: Vector3<f64>,
    /// Angular velocity of B w.r.t. N, body frame [rad/s].
    pub omega: Vector3<f64>,
}

impl ChaserState3D {
    /// True when the state lies in the (y, z) plane rotating about x only.
    pub fn is_planar(&self, tol: f64) -> bool {
        self.r.x.abs() <= tol
            && self.v.x.abs() <= tol
            && self.d_c3.x.abs() <= tol
            && self.omega.y.abs() <= tol
            && self.omega.z.abs() <= tol
    }

    /// Planar coordinates of a planar state; out-of-plane parts are dropped.
    pub fn planar_projection(&self) -> ChaserState2D {
        ChaserState2D {
            y: self.r.y,
            z: self.r.z,
            v_y: self.v.y,
            v_z: self.v.z,
            theta: self.d_c3.y.atan2(self.d_c3.z),
            omega: self.omega.x,
        }
    }
}

/// Planar chaser state; `(z, v_z, theta, omega)` is the analysed quadruple,
/// `(y, v_y)` the decoupled drift parallel to the wall.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ChaserState2D {
    pub y: f64,
    pub z: f64,
    pub v_y: f64,
    pub v_z: f64,
    /// Rotation about x bringing N onto B [rad].
    pub theta: f64,
    pub omega: f64,
}

impl ChaserState2D {
    pub fn embed(&self) -> ChaserState3D {
        let (s, c) = self.theta.sin_cos();
        ChaserState3D {
            r: Vector3::new(0.0, self.y, self.z),
            v: Vector3::new(0.0, self.v_y, self.v_z),
            d_c3: Vector3::new(0.0, s, c),
            omega: Vector3::new(self.omega, 0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Planar(ChaserState2D),
    Spatial(ChaserState3D),
}

/// Run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Tracking delay h [s].
    pub delay: f64,
    /// Integration step [s].
    pub dt: f64,
    /// Duration [s].
    pub t_end: f64,
    pub initial: InitialState,
    /// Keep one integration step in this many in the trajectory.
    pub record_every: usize,
    /// Divergence guard as a multiple of the initial state magnitude.
    pub divergence_factor: f64,
    /// Averaging window for pre/post impact penetration rates [s].
    pub event_window: f64,
}

impl SimConfig {
    pub fn new(delay: f64, t_end: f64, initial: InitialState) -> Self {
        Self {
            delay,
            dt: DEFAULT_DT,
            t_end,
            initial,
            record_every: 1,
            divergence_factor: DEFAULT_DIVERGENCE_FACTOR,
            event_window: DEFAULT_EVENT_WINDOW,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::ConeAngle(alpha))
    }
}

/// Nominal contact state: probe tip resting on the wall with zero
/// penetration and rate, probe parallel to the nozzle axis.
pub fn nominal_state_2d(body: &BodyParams, contact: &ContactParams) -> Result<ChaserState2D> {
    let alpha = contact.cone_half_angle;
    check_alpha(alpha)?;
    let a = body.arm();
    Ok(ChaserState2D {
        y: 0.0,
        z: -a * alpha.sin(),
        v_y: 0.0,
        v_z: 0.0,
        theta: FRAC_PI_2 - alpha,
        omega: 0.0,
    })
}

/// Nominal attitude backed off along nozzle z by `gap`, closing at `speed`.
/// The probe tip starts `gap` outside the wall with depth rate `-speed`.
pub fn approach_state_2d(body: &BodyParams, contact: &ContactParams, gap: f64, speed: f64) -> Result<ChaserState2D> {
    let mut s = nominal_state_2d(body, contact)?;
    s.z += gap;
    s.v_z = -speed;
    Ok(s)
}

/// Parameters that passed [`validate`]; unit vectors are exactly normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub body: BodyParams,
    pub contact: ContactParams,
    pub sim: SimConfig,
}

fn finite_positive(report: &mut ValidationReport, field: &str, name: &str, x: f64) {
    if !(x.is_finite() && x > 0.0) {
        report.push(field, format!("{name} must be positive"));
    }
}

fn finite_non_negative(report: &mut ValidationReport, field: &str, name: &str, x: f64) {
    if !(x.is_finite() && x >= 0.0) {
        report.push(field, format!("{name} must be non-negative"));
    }
}

fn unit(report: &mut ValidationReport, field: &str, name: &str, v: &Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        *v
    } else if n.is_finite() && (n - 1.0).abs() <= UNIT_TOLERANCE {
        v / n
    } else {
        report.push(field, format!("{name} not unit (norm {n})"));
        *v
    }
}

/// Check every invariant of the three parameter groups at once, returning
/// normalised copies or one diagnostic per violation.
pub fn validate(
    body: &BodyParams,
    contact: &ContactParams,
    sim: &SimConfig,
) -> std::result::Result<Validated, ValidationReport> {
    let mut r = ValidationReport::default();

    finite_positive(&mut r, "body.m", "m", body.mass);
    let j = &body.inertia;
    if j.iter().any(|x| !x.is_finite()) {
        r.push("body.J", "J must be finite");
    } else {
        let scale = j.abs().max().max(f64::MIN_POSITIVE);
        if (j - j.transpose()).abs().max() > 1e-9 * scale {
            r.push("body.J", "J must be symmetric");
        } else if j.cholesky().is_none() {
            r.push("body.J", "J must be positive definite");
        }
    }
    let probe_len = body.probe.norm();
    if !(probe_len.is_finite() && probe_len > 0.0) {
        r.push("body.a_B", "|a_B| must be positive");
    }

    finite_non_negative(&mut r, "contact.k_v", "k_v", contact.virtual_stiffness);
    finite_non_negative(&mut r, "contact.b_v", "b_v", contact.virtual_damping);
    let mut springs = Vec::with_capacity(contact.springs.len());
    for (i, s) in contact.springs.iter().enumerate() {
        finite_non_negative(&mut r, &format!("contact.springs[{i}].k"), "k_i", s.stiffness);
        let direction = unit(&mut r, &format!("contact.springs[{i}].l_hat"), "l_hat", &s.direction);
        springs.push(Spring {
            stiffness: s.stiffness,
            direction,
        });
    }
    let normal = unit(&mut r, "contact.n_hat", "n̂", &contact.normal);
    if check_alpha(contact.cone_half_angle).is_err() {
        r.push("contact.alpha", "alpha must lie in (0, pi/2)");
    }
    if let Some(k) = contact.analysis_stiffness {
        finite_positive(&mut r, "contact.analysis_stiffness", "analysis stiffness", k);
    }

    finite_non_negative(&mut r, "sim.h", "h", sim.delay);
    finite_positive(&mut r, "sim.dt", "dt", sim.dt);
    if !(sim.t_end.is_finite() && sim.t_end > sim.dt) {
        r.push("sim.t_end", "t_end must exceed dt");
    }
    if sim.record_every == 0 {
        r.push("sim.record_every", "record_every must be at least 1");
    }
    finite_positive(&mut r, "sim.divergence_factor", "divergence factor", sim.divergence_factor);
    finite_non_negative(&mut r, "analysis.averaging_window", "averaging window", sim.event_window);
    let initial = match sim.initial {
        InitialState::Planar(s) => {
            let vals = [s.y, s.z, s.v_y, s.v_z, s.theta, s.omega];
            if vals.iter().any(|x| !x.is_finite()) {
                r.push("sim.initial", "initial state must be finite");
            }
            InitialState::Planar(s)
        }
        InitialState::Spatial(s) => {
            if [s.r, s.v, s.d_c3, s.omega].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
                r.push("sim.initial", "initial state must be finite");
            }
            let d_c3 = unit(&mut r, "sim.initial.d_c3", "d_c3", &s.d_c3);
            InitialState::Spatial(ChaserState3D { d_c3, ..s })
        }
    };

    if !r.is_empty() {
        return Err(r);
    }
    Ok(Validated {
        body: body.clone(),
        contact: ContactParams {
            springs,
            normal,
            ..contact.clone()
        },
        sim: SimConfig {
            initial,
            ..sim.clone()
        },
    })
}
