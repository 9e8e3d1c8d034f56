//! Scenario files: JSON with `body`, `contact`, `sim` and `analysis`
//! sections. Unknown keys are rejected. Angles may be given in radians or,
//! with a `_deg` suffix, in degrees.
//!
//! ```json
//! {
//!   "body":    { "m": 60, "m_a": 15.6, "a": 0.3 },
//!   "contact": { "k_v": 3000, "b_v": 0, "alpha_deg": 30 },
//!   "sim":     { "h": 0.016, "t_end": 0.6, "initial": { "approach": { "gap": 0.002, "speed": 0.02 } } }
//! }
//! ```

use std::path::Path;

use docksim::linear::inertia_for_reduced_mass;
use docksim::params::{approach_state_2d, validate, Validated, DEFAULT_DIVERGENCE_FACTOR, DEFAULT_DT, DEFAULT_EVENT_WINDOW};
use docksim::{
    Activation, BodyParams, ChaserState2D, ChaserState3D, ContactParams, InitialState, SimConfig, Spring,
    ValidationReport,
};
use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub body: BodySection,
    pub contact: ContactSection,
    pub sim: SimSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

/// Exactly one of `J`, `J_x`, `m_a` and one of `a`, `a_B`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    /// Mass [kg].
    pub m: f64,
    /// Full inertia tensor, body frame [kg m^2].
    #[serde(rename = "J")]
    pub inertia: Option<[[f64; 3]; 3]>,
    /// Principal inertia about x; the tensor is taken isotropic [kg m^2].
    #[serde(rename = "J_x")]
    pub inertia_x: Option<f64>,
    /// Target reduced mass; `J_x` is recovered from it [kg].
    pub m_a: Option<f64>,
    /// Probe length along body z [m].
    pub a: Option<f64>,
    /// Probe vector, body frame [m].
    #[serde(rename = "a_B")]
    pub probe: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringEntry {
    /// [N/m]
    pub k: f64,
    pub l_hat: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSection {
    /// Virtual stiffness [N/m].
    pub k_v: f64,
    /// Virtual damping [N s/m].
    pub b_v: f64,
    #[serde(default)]
    pub springs: Vec<SpringEntry>,
    /// Cone half-angle [rad].
    pub alpha: Option<f64>,
    pub alpha_deg: Option<f64>,
    /// Outward wall normal, nozzle frame. Defaults to +z.
    pub n_hat: Option<[f64; 3]>,
    #[serde(default)]
    pub activation: ActivationName,
    /// Time-invariant stiffness bound for the linear analysis [N/m].
    pub analysis_stiffness: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationName {
    #[default]
    Unilateral,
    Bilateral,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarInitial {
    #[serde(default)]
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub v_y: f64,
    #[serde(default)]
    pub v_z: f64,
    pub theta: Option<f64>,
    pub theta_deg: Option<f64>,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialInitial {
    pub r: [f64; 3],
    pub v: [f64; 3],
    pub d_c3: [f64; 3],
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Approach {
    /// Initial clearance between probe tip and wall [m].
    pub gap: f64,
    /// Closing speed along nozzle z [m/s].
    pub speed: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSection {
    Planar(PlanarInitial),
    Spatial(SpatialInitial),
    /// Nominal contact attitude backed off by `gap`.
    Approach(Approach),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Delay [s].
    pub h: f64,
    /// Step [s].
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Duration [s].
    pub t_end: f64,
    pub initial: InitialSection,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_divergence")]
    pub divergence_factor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Relative half-width of the neutral band, for both the delay verdict
    /// and the restitution class.
    #[serde(default = "default_band")]
    pub neutrality_band: f64,
    /// Lossless tolerance of the energy monitor [J].
    #[serde(default = "default_energy_tolerance")]
    pub energy_tolerance: f64,
    /// Window for pre/post impact penetration rates [s].
    #[serde(default = "default_window")]
    pub averaging_window: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            neutrality_band: default_band(),
            energy_tolerance: default_energy_tolerance(),
            averaging_window: default_window(),
        }
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_record_every() -> usize {
    1
}
fn default_divergence() -> f64 {
    DEFAULT_DIVERGENCE_FACTOR
}
fn default_band() -> f64 {
    docksim::stability::DEFAULT_NEUTRAL_BAND
}
fn default_energy_tolerance() -> f64 {
    docksim::analysis::DEFAULT_ENERGY_TOLERANCE
}
fn default_window() -> f64 {
    DEFAULT_EVENT_WINDOW
}

fn angle(report: &mut ValidationReport, field: &str, rad: Option<f64>, deg: Option<f64>) -> f64 {
    match (rad, deg) {
        (Some(r), None) => r,
        (None, Some(d)) => d.to_radians(),
        (Some(_), Some(_)) => {
            report.push(field, format!("give either {field} or {field}_deg, not both"));
            f64::NAN
        }
        (None, None) => {
            report.push(field, format!("{field} (or {field}_deg) is required"));
            f64::NAN
        }
    }
}

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::from(v)
}

/// A scenario resolved into validated core parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: Validated,
    pub analysis: AnalysisSection,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Convert units, fill derived values and validate every invariant.
    pub fn resolve(&self) -> Result<Scenario, CliError> {
        let mut report = ValidationReport::default();
        let c = &self.contact;
        let alpha = angle(&mut report, "alpha", c.alpha, c.alpha_deg);

        let b = &self.body;
        let probe = match (b.a, b.probe) {
            (Some(a), None) => Vector3::new(0.0, 0.0, a),
            (None, Some(v)) => vec3(v),
            _ => {
                report.push("body.a", "give exactly one of a, a_B");
                Vector3::new(0.0, 0.0, f64::NAN)
            }
        };
        let inertia = match (b.inertia, b.inertia_x, b.m_a) {
            (Some(j), None, None) => Matrix3::from_row_slice(&j.concat()),
            (None, Some(jx), None) => Matrix3::identity() * jx,
            (None, None, Some(m_a)) => match inertia_for_reduced_mass(b.m, m_a, probe.norm(), alpha) {
                Ok(jx) => Matrix3::identity() * jx,
                Err(e) => {
                    report.push("body.m_a", e.to_string());
                    Matrix3::identity()
                }
            },
            _ => {
                report.push("body.J", "give exactly one of J, J_x, m_a");
                Matrix3::identity()
            }
        };
        let body = BodyParams {
            mass: b.m,
            inertia,
            probe,
        };

        let contact = ContactParams {
            virtual_stiffness: c.k_v,
            virtual_damping: c.b_v,
            springs: c
                .springs
                .iter()
                .map(|s| Spring {
                    stiffness: s.k,
                    direction: vec3(s.l_hat),
                })
                .collect(),
            normal: c.n_hat.map_or_else(Vector3::z, vec3),
            cone_half_angle: alpha,
            activation: match c.activation {
                ActivationName::Unilateral => Activation::Unilateral,
                ActivationName::Bilateral => Activation::Bilateral,
            },
            analysis_stiffness: c.analysis_stiffness,
        };

        let s = &self.sim;
        let initial = match &s.initial {
            InitialSection::Planar(p) => InitialState::Planar(ChaserState2D {
                y: p.y,
                z: p.z,
                v_y: p.v_y,
                v_z: p.v_z,
                theta: angle(&mut report, "sim.initial.planar.theta", p.theta, p.theta_deg),
                omega: p.omega,
            }),
            InitialSection::Spatial(p) => InitialState::Spatial(ChaserState3D {
                r: vec3(p.r),
                v: vec3(p.v),
                d_c3: vec3(p.d_c3),
                omega: vec3(p.omega),
            }),
            InitialSection::Approach(a) => match approach_state_2d(&body, &contact, a.gap, a.speed) {
                Ok(st) => InitialState::Planar(st),
                Err(e) => {
                    report.push("sim.initial.approach", e.to_string());
                    InitialState::Planar(ChaserState2D::default())
                }
            },
        };
        let sim = SimConfig {
            delay: s.h,
            dt: s.dt,
            t_end: s.t_end,
            initial,
            record_every: s.record_every,
            divergence_factor: s.divergence_factor,
            event_window: self.analysis.averaging_window,
        };

        let an = &self.analysis;
        if !(an.neutrality_band.is_finite() && an.neutrality_band >= 0.0) {
            report.push("analysis.neutrality_band", "neutrality band must be non-negative");
        }
        if !(an.energy_tolerance.is_finite() && an.energy_tolerance >= 0.0) {
            report.push("analysis.energy_tolerance", "energy tolerance must be non-negative");
        }

        let validated = validate(&body, &contact, &sim);
        match validated {
            Ok(params) if report.is_empty() => Ok(Scenario {
                params,
                analysis: self.analysis.clone(),
            }),
            Ok(_) => Err(CliError::Invalid(report)),
            Err(more) => {
                report.diagnostics.extend(more.diagnostics);
                Err(CliError::Invalid(report))
            }
        }
    }
}
