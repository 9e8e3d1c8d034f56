//! Pole-location analysis of the contact-mode delay equation
//! `mu d'' + beta d'(t-h) + kappa d(t-h) = 0`.
//!
//! Characteristic roots cross the imaginary axis at a single frequency
//! `omega_c`, independent of the delay, and always from left to right. The
//! system is therefore stable exactly for delays below the first crossing
//! delay `h_c`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::linear::{penetration_dde_coeffs, DdeCoefficients};
use crate::params::{BodyParams, ContactParams};
use crate::{Error, Result};

/// Default relative half-width of the neutral verdict band.
pub const DEFAULT_NEUTRAL_BAND: f64 = 0.01;

/// Upper bound on the damping searched by [`critical_damping`] [N s/m].
pub const MAX_DAMPING: f64 = 1e6;

fn check(c: &DdeCoefficients) -> Result<()> {
    let ok = c.mass.is_finite()
        && c.mass > 0.0
        && c.stiffness.is_finite()
        && c.stiffness > 0.0
        && c.damping.is_finite()
        && c.damping >= 0.0;
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "need mu > 0, kappa > 0, beta >= 0 (got mu = {}, beta = {}, kappa = {})",
            c.mass, c.damping, c.stiffness
        )))
    }
}

fn root_term(c: &DdeCoefficients) -> f64 {
    let (mu, beta, kappa) = (c.mass, c.damping, c.stiffness);
    let r = beta * beta / (mu * mu);
    (0.25 * r * r + kappa * kappa / (mu * mu)).sqrt()
}

/// Frequency at which characteristic roots meet the imaginary axis [rad/s].
pub fn crossing_frequency(c: &DdeCoefficients) -> f64 {
    let beta_mu = c.damping / c.mass;
    (0.5 * beta_mu * beta_mu + root_term(c)).sqrt()
}

/// Crossing-direction value at `omega_c`; positive means a switch towards
/// instability.
pub fn crossing_direction(c: &DdeCoefficients) -> f64 {
    root_term(c)
}

fn first_delay(c: &DdeCoefficients, omega: f64) -> f64 {
    (omega * c.damping / c.stiffness).atan() / omega
}

/// First `n` crossing delays, `h_k = (atan(omega beta / kappa) + 2 pi k) / omega`.
/// The first entry is the critical delay.
pub fn critical_delays(c: &DdeCoefficients, n: usize) -> Result<Vec<f64>> {
    check(c)?;
    let omega = crossing_frequency(c);
    let h0 = first_delay(c, omega);
    Ok((0..n).map(|k| h0 + TAU * k as f64 / omega).collect())
}

/// Critical delay alone.
pub fn critical_delay(c: &DdeCoefficients) -> Result<f64> {
    check(c)?;
    Ok(first_delay(c, crossing_frequency(c)))
}

/// `beta / kappa`, accurate while `omega_c beta << kappa`.
pub fn approx_critical_delay(beta: f64, kappa: f64) -> f64 {
    beta / kappa
}

/// Critical delay in units of `sqrt(mu / kappa)` as a function of
/// `beta / sqrt(mu kappa)`.
fn scaled_delay(beta: f64) -> f64 {
    let omega = (0.5 * beta * beta + (0.25 * beta.powi(4) + 1.0).sqrt()).sqrt();
    (omega * beta).atan() / omega
}

/// Damping that maximises the critical delay, and that delay.
///
/// `h_c(beta)` rises from zero, peaks once and decays, so delays above the
/// peak cannot be stabilised by damping alone.
pub fn max_stabilizable_delay(mass: f64, stiffness: f64) -> Result<(f64, f64)> {
    check(&DdeCoefficients::new(mass, 0.0, stiffness))?;
    let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if scaled_delay(a) < scaled_delay(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let peak = 0.5 * (lo + hi);
    let scale = (mass * stiffness).sqrt();
    Ok((peak * scale, scaled_delay(peak) * (mass / stiffness).sqrt()))
}

/// Smallest damping whose critical delay equals `delay`.
pub fn critical_damping(mass: f64, stiffness: f64, delay: f64) -> Result<f64> {
    if !(delay.is_finite() && delay > 0.0) {
        return Err(Error::Domain(format!("delay must be positive, got {delay}")));
    }
    let (peak, max_delay) = max_stabilizable_delay(mass, stiffness)?;
    if delay > max_delay || peak > MAX_DAMPING {
        return Err(Error::NoCriticalDamping { delay, max_delay });
    }
    let h_c = |beta: f64| first_delay_of(mass, beta, stiffness);
    let (mut lo, mut hi) = (0.0, peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_c(mid) < delay {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn first_delay_of(mass: f64, damping: f64, stiffness: f64) -> f64 {
    let c = DdeCoefficients::new(mass, damping, stiffness);
    first_delay(&c, crossing_frequency(&c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Neutral,
    Unstable,
}

impl Verdict {
    /// Compare `delay` against `h_c` with a relative neutral band.
    pub fn classify(delay: f64, h_c: f64, band: f64) -> Self {
        if (delay - h_c).abs() <= band * h_c {
            Verdict::Neutral
        } else if delay < h_c {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityResult {
    pub omega_c: f64,
    pub h_c: f64,
    /// First crossing delays, starting with `h_c`.
    pub h_n: Vec<f64>,
    pub sigma: f64,
    /// Present when a delay was queried.
    pub verdict: Option<Verdict>,
}

/// Full single-point analysis, optionally classifying `delay`.
pub fn analyze(c: &DdeCoefficients, n: usize, delay: Option<f64>, band: f64) -> Result<StabilityResult> {
    let h_n = critical_delays(c, n.max(1))?;
    let h_c = h_n[0];
    Ok(StabilityResult {
        omega_c: crossing_frequency(c),
        h_c,
        h_n,
        sigma: crossing_direction(c),
        verdict: delay.map(|h| Verdict::classify(h, h_c, band)),
    })
}

/// Verdict on the linearised four-state planar system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourthOrderVerdict {
    /// `(m_a, b, k)` subsystem.
    pub contact_mode: DdeCoefficients,
    pub contact_h_c: f64,
    /// `(m, 2b, 2k)` subsystem.
    pub translation_mode: DdeCoefficients,
    pub translation_h_c: f64,
    /// The smaller of the two.
    pub h_c: f64,
    pub delay: f64,
    pub verdict: Verdict,
}

pub fn verdict_4th_order(
    body: &BodyParams,
    contact: &ContactParams,
    delay: f64,
    band: f64,
) -> Result<FourthOrderVerdict> {
    let contact_mode = penetration_dde_coeffs(body, contact);
    let translation_mode = DdeCoefficients::new(body.mass, 2.0 * contact_mode.damping, 2.0 * contact_mode.stiffness);
    let contact_h_c = critical_delay(&contact_mode)?;
    let translation_h_c = critical_delay(&translation_mode)?;
    let h_c = contact_h_c.min(translation_h_c);
    Ok(FourthOrderVerdict {
        contact_mode,
        contact_h_c,
        translation_mode,
        translation_h_c,
        h_c,
        delay,
        verdict: Verdict::classify(delay, h_c, band),
    })
}

/// Parameter swept by [`stability_boundary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryAxis {
    Damping,
    Stiffness,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub h_critical: f64,
    pub omega_c: f64,
    pub sigma: f64,
}

/// Neutral-stability locus along one parameter. `fixed` supplies the two
/// parameters not being swept; its value for the swept one is ignored.
/// Points are evaluated in parallel and returned in grid order.
pub fn stability_boundary(axis: BoundaryAxis, fixed: DdeCoefficients, grid: &[f64]) -> Vec<Result<BoundaryPoint>> {
    grid.par_iter()
        .map(|&x| {
            let mut c = fixed;
            match axis {
                BoundaryAxis::Damping => c.damping = x,
                BoundaryAxis::Stiffness => c.stiffness = x,
                BoundaryAxis::Mass => c.mass = x,
            }
            let h_critical = critical_delay(&c)?;
            Ok(BoundaryPoint {
                x,
                h_critical,
                omega_c: crossing_frequency(&c),
                sigma: crossing_direction(&c),
            })
        })
        .collect()
}
