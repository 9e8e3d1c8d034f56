use std::collections::VecDeque;

use serde::Serialize;

use super::{rk4_step, ContactModel, DelayLine, PlanarModel, Sample, SpatialModel, State, Trajectory};
use crate::contact::Penetration;
use crate::params::{BodyParams, ChaserState2D, ChaserState3D, ContactParams, InitialState, SimConfig};
use crate::{Error, Result};

/// One contact, from the first to the last instant of geometric penetration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactEvent {
    /// Entry time, interpolated on the sign change of `d` [s].
    pub t_in: f64,
    /// Exit time [s].
    pub t_out: f64,
    /// Mean penetration rate over the window ending at the last pre-contact instant [m/s].
    pub v_minus: f64,
    /// Mean penetration rate over the window starting at the first post-contact instant [m/s].
    pub v_plus: f64,
    /// Largest penetration magnitude reached [m].
    pub max_depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Planar,
    Spatial,
}

#[derive(Debug, Clone)]
pub struct SimOutput<S> {
    pub trajectory: Trajectory<S>,
    pub events: Vec<ContactEvent>,
    /// Integration steps taken.
    pub steps: usize,
}

/// Output of [`simulate`], tagged by model dimension.
#[derive(Debug, Clone)]
pub enum Run {
    Planar(SimOutput<ChaserState2D>),
    Spatial(SimOutput<ChaserState3D>),
}

impl Run {
    pub fn events(&self) -> &[ContactEvent] {
        match self {
            Run::Planar(o) => &o.events,
            Run::Spatial(o) => &o.events,
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Run::Planar(o) => o.trajectory.to_csv(),
            Run::Spatial(o) => o.trajectory.to_csv(),
        }
    }
}

fn interpolate_crossing(t0: f64, d0: f64, t1: f64, d1: f64) -> f64 {
    if d1 == d0 {
        t1
    } else {
        t0 + (t1 - t0) * d0 / (d0 - d1)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Segments contacts on the sign of the undelayed depth and averages the
/// penetration rate in windows bracketing each contact.
#[derive(Debug)]
struct EventTracker {
    window: f64,
    /// recent out-of-contact (t, rate) samples
    before: VecDeque<(f64, f64)>,
    open: Option<OpenEvent>,
    closing: Option<ClosingEvent>,
    done: Vec<ContactEvent>,
    last: (f64, f64),
}

#[derive(Debug)]
struct OpenEvent {
    t_in: f64,
    v_minus: f64,
    max_depth: f64,
}

#[derive(Debug)]
struct ClosingEvent {
    open: OpenEvent,
    t_out: f64,
    first_t: f64,
    rates: Vec<f64>,
}

impl EventTracker {
    fn new(window: f64, t0: f64, p0: Penetration) -> Self {
        let mut before = VecDeque::new();
        if p0.depth >= 0.0 {
            before.push_back((t0, p0.rate));
        }
        Self {
            window,
            before,
            open: None,
            closing: None,
            done: Vec::new(),
            last: (t0, p0.depth),
        }
    }

    fn finish_closing(&mut self) {
        if let Some(c) = self.closing.take() {
            self.done.push(ContactEvent {
                t_in: c.open.t_in,
                t_out: c.t_out,
                v_minus: c.open.v_minus,
                v_plus: mean(c.rates.into_iter()),
                max_depth: c.open.max_depth,
            });
        }
    }

    fn observe(&mut self, t: f64, p: Penetration) {
        let (t_prev, d_prev) = self.last;
        self.last = (t, p.depth);
        let inside = p.depth < 0.0;
        let was_inside = d_prev < 0.0;

        if inside && !was_inside {
            self.finish_closing();
            if !self.before.is_empty() {
                self.open = Some(OpenEvent {
                    t_in: interpolate_crossing(t_prev, d_prev, t, p.depth),
                    v_minus: mean(self.before.iter().map(|(_, r)| *r)),
                    max_depth: -p.depth,
                });
            }
            self.before.clear();
        } else if inside {
            if let Some(o) = self.open.as_mut() {
                o.max_depth = o.max_depth.max(-p.depth);
            }
        } else {
            if was_inside {
                if let Some(open) = self.open.take() {
                    self.closing = Some(ClosingEvent {
                        open,
                        t_out: interpolate_crossing(t_prev, d_prev, t, p.depth),
                        first_t: t,
                        rates: Vec::new(),
                    });
                }
            }
            if let Some(c) = self.closing.as_mut() {
                c.rates.push(p.rate);
                if t - c.first_t >= self.window - 1e-12 {
                    self.finish_closing();
                }
            }
            self.before.push_back((t, p.rate));
            while let Some(&(t0, _)) = self.before.front() {
                if t - t0 > self.window + 1e-12 {
                    self.before.pop_front();
                } else {
                    break;
                }
            }
        }
    }

    /// Events whose post-contact window was cut short by the end of the run
    /// are kept with the samples available.
    fn finish(mut self) -> Vec<ContactEvent> {
        self.finish_closing();
        self.done
    }
}

/// Integrate `model` from `initial` over `cfg.t_end`.
pub fn run<M: ContactModel>(model: &M, initial: M::State, cfg: &SimConfig) -> Result<SimOutput<M::State>> {
    let dt = cfg.dt;
    let steps = (cfg.t_end / dt).round() as usize;
    let record_every = cfg.record_every.max(1);
    let x0_norm = initial.magnitude();
    let bound = cfg.divergence_factor * if x0_norm > 0.0 { x0_norm } else { 1.0 };

    let mut history = DelayLine::new(cfg.delay, dt, 0.0, initial.clone());
    let sample = |t: f64, x: &M::State, history: &DelayLine<M::State>| {
        let (_, wrench) = model.contact(&history.delayed(t));
        Sample {
            t,
            state: x.clone(),
            penetration: model.penetration(x),
            wrench,
        }
    };

    let mut samples = Vec::with_capacity(steps / record_every + 2);
    samples.push(sample(0.0, &initial, &history));
    let mut events = EventTracker::new(cfg.event_window, 0.0, model.penetration(&initial));

    let mut x = initial;
    for i in 0..steps {
        let t = i as f64 * dt;
        x = rk4_step(t, &x, dt, &history, |s, d| model.rhs(s, d))?;
        let t_next = (i + 1) as f64 * dt;
        let norm = x.magnitude();
        if norm > bound {
            return Err(Error::Diverged { t: t_next, norm, bound });
        }
        history.push(t_next, x.clone());
        events.observe(t_next, model.penetration(&x));
        if (i + 1) % record_every == 0 {
            samples.push(sample(t_next, &x, &history));
        }
    }

    Ok(SimOutput {
        trajectory: Trajectory {
            normal: model.normal(),
            samples,
        },
        events: events.finish(),
        steps,
    })
}

pub fn simulate_planar(cfg: &SimConfig, body: &BodyParams, contact: &ContactParams) -> Result<SimOutput<ChaserState2D>> {
    let initial = match cfg.initial {
        InitialState::Planar(s) => s,
        InitialState::Spatial(s) if s.is_planar(1e-12) => s.planar_projection(),
        InitialState::Spatial(_) => return Err(Error::NotPlanar),
    };
    run(&PlanarModel::new(body, contact), initial, cfg)
}

pub fn simulate_spatial(cfg: &SimConfig, body: &BodyParams, contact: &ContactParams) -> Result<SimOutput<ChaserState3D>> {
    let initial = match cfg.initial {
        InitialState::Planar(s) => s.embed(),
        InitialState::Spatial(s) => s,
    };
    run(&SpatialModel::new(body, contact), initial, cfg)
}

/// Full run in the requested dimension. Inputs are expected to have passed
/// [`validate`](crate::params::validate).
pub fn simulate(cfg: &SimConfig, body: &BodyParams, contact: &ContactParams, mode: Mode) -> Result<Run> {
    Ok(match mode {
        Mode::Planar => Run::Planar(simulate_planar(cfg, body, contact)?),
        Mode::Spatial => Run::Spatial(simulate_spatial(cfg, body, contact)?),
    })
}
