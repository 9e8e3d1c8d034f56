//! Fixed-step integration of the delayed contact equations of motion.
//!
//! The contact force at time `t` is a function of the chaser state at
//! `t - h`, so the right-hand side takes both the current and the delayed
//! state. A [`DelayLine`] holds the history; [`rk4_step`] advances one step
//! and [`simulate`] drives a full run with contact-event bookkeeping.

mod delay;
mod model;
mod simulate;
mod state;
mod trajectory;

pub use delay::DelayLine;
pub use model::{ContactModel, PlanarModel, SpatialModel};
pub use simulate::{run, simulate, simulate_planar, simulate_spatial, ContactEvent, Mode, Run, SimOutput};
pub use state::State;
pub use trajectory::{CsvRecord, Sample, Trajectory};

use crate::{Error, Result};

/// One classical RK4 step from `(t, x)`.
///
/// `history` must end with `x` at time `t`. Delayed arguments at the stage
/// times are read from the history by linear interpolation; stages newer than
/// the history (delays under one step) interpolate towards the stage state.
pub fn rk4_step<S: State>(
    t: f64,
    x: &S,
    dt: f64,
    history: &DelayLine<S>,
    rhs: impl Fn(&S, &S) -> S,
) -> Result<S> {
    let h = history.delay();
    let half = 0.5 * dt;

    let k1 = rhs(x, &history.at_with(t - h, None));
    let x2 = x.add_scaled(half, &k1);
    let k2 = rhs(&x2, &history.at_with(t + half - h, Some((t + half, &x2))));
    let x3 = x.add_scaled(half, &k2);
    let k3 = rhs(&x3, &history.at_with(t + half - h, Some((t + half, &x3))));
    let x4 = x.add_scaled(dt, &k3);
    let k4 = rhs(&x4, &history.at_with(t + dt - h, Some((t + dt, &x4))));

    let mut next = x
        .add_scaled(dt / 6.0, &k1)
        .add_scaled(dt / 3.0, &k2)
        .add_scaled(dt / 3.0, &k3)
        .add_scaled(dt / 6.0, &k4);
    next.renormalize();
    if !next.is_finite() {
        return Err(Error::NonFinite { t: t + dt });
    }
    Ok(next)
}
