use std::fmt::Write as _;
use std::io;

use nalgebra::Vector3;

use crate::contact::{Penetration, Wrench};
use crate::params::{ChaserState2D, ChaserState3D};

/// One recorded instant. `penetration` is geometric (undelayed); `wrench`
/// is the force acting at `t`, produced by the delayed sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    pub state: S,
    pub penetration: Penetration,
    pub wrench: Wrench,
}

impl<S> Sample<S> {
    pub fn in_contact(&self) -> bool {
        self.penetration.depth < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    /// Outward contact normal, nozzle frame.
    pub normal: Vector3<f64>,
    pub samples: Vec<Sample<S>>,
}

/// Nine significant digits, no locale, no padding.
pub(crate) fn push_num(out: &mut String, x: f64) {
    let x = x + 0.0;
    let _ = write!(out, "{x:.8e}");
}

pub trait CsvRecord: Sized {
    fn header() -> &'static str;

    fn push_row(sample: &Sample<Self>, normal: &Vector3<f64>, out: &mut String);
}

fn push_all(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_num(out, *v);
    }
}

impl CsvRecord for ChaserState2D {
    fn header() -> &'static str {
        "t,z,v_z,theta,omega,d,d_dot,f,tau"
    }

    fn push_row(s: &Sample<Self>, _normal: &Vector3<f64>, out: &mut String) {
        let x = &s.state;
        push_all(
            out,
            &[
                s.t,
                x.z,
                x.v_z,
                x.theta,
                x.omega,
                s.penetration.depth,
                s.penetration.rate,
                s.wrench.force,
                s.wrench.torque.x,
            ],
        );
    }
}

impl CsvRecord for ChaserState3D {
    fn header() -> &'static str {
        "t,x,y,z,v_x,v_y,v_z,d_c3_x,d_c3_y,d_c3_z,omega_x,omega_y,omega_z,d,d_dot,f,f_x,f_y,f_z,tau_x,tau_y,tau_z"
    }

    fn push_row(s: &Sample<Self>, normal: &Vector3<f64>, out: &mut String) {
        let x = &s.state;
        let f = s.wrench.force_vector(normal);
        let tau = s.wrench.torque;
        push_all(
            out,
            &[
                s.t,
                x.r.x,
                x.r.y,
                x.r.z,
                x.v.x,
                x.v.y,
                x.v.z,
                x.d_c3.x,
                x.d_c3.y,
                x.d_c3.z,
                x.omega.x,
                x.omega.y,
                x.omega.z,
                s.penetration.depth,
                s.penetration.rate,
                s.wrench.force,
                f.x,
                f.y,
                f.z,
                tau.x,
                tau.y,
                tau.z,
            ],
        );
    }
}

impl<S: CsvRecord> Trajectory<S> {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 + self.samples.len() * 160);
        out.push_str(S::header());
        out.push('\n');
        for s in &self.samples {
            S::push_row(s, &self.normal, &mut out);
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, mut w: impl io::Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}
