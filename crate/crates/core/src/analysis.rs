//! Post-run stability cues: coefficient of restitution and the passivity
//! observer.

use nalgebra::Vector3;
use serde::Serialize;

use crate::dynamics::ContactEvent;
use crate::stability::Verdict;
use crate::{Error, Result};

/// Default observer sample time [s].
pub const DEFAULT_SAMPLE_TIME: f64 = 0.004;

/// Default lossless tolerance [J].
pub const DEFAULT_ENERGY_TOLERANCE: f64 = 1e-6;

/// `|v+| / |v-|`.
pub fn restitution_from(v_minus: f64, v_plus: f64) -> Result<f64> {
    if v_minus == 0.0 || !v_minus.is_finite() {
        return Err(Error::NoImpactVelocity);
    }
    Ok(v_plus.abs() / v_minus.abs())
}

pub fn restitution(event: &ContactEvent) -> Result<f64> {
    restitution_from(event.v_minus, event.v_plus)
}

/// Below one the contact loses energy; above one it gains.
pub fn classify_restitution(epsilon: f64, band: f64) -> Verdict {
    if (epsilon - 1.0).abs() <= band {
        Verdict::Neutral
    } else if epsilon < 1.0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    }
}

/// Wrench and twist at the interaction port, one sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PortSample {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl PortSample {
    fn powers(&self) -> [f64; 6] {
        [
            self.force.x * self.velocity.x,
            self.force.y * self.velocity.y,
            self.force.z * self.velocity.z,
            self.torque.x * self.angular_velocity.x,
            self.torque.y * self.angular_velocity.y,
            self.torque.z * self.angular_velocity.z,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyClass {
    Passive,
    Lossless,
    Active,
}

impl EnergyClass {
    pub fn of(energy: f64, tolerance: f64) -> Self {
        if energy.abs() <= tolerance {
            EnergyClass::Lossless
        } else if energy < 0.0 {
            EnergyClass::Passive
        } else {
            EnergyClass::Active
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyClass::Passive => "passive",
            EnergyClass::Lossless => "lossless",
            EnergyClass::Active => "active",
        }
    }
}

/// Cumulative observed energy after one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// x, y, z translation then x, y, z rotation [J].
    pub channels: [f64; 6],
    pub total: f64,
    pub class: EnergyClass,
}

/// Streaming accumulator of measured minus commanded port power.
#[derive(Debug, Clone)]
pub struct PassivityObserver {
    dt: f64,
    tolerance: f64,
    sums: [f64; 6],
    count: usize,
}

impl PassivityObserver {
    pub fn new(dt: f64, tolerance: f64) -> Self {
        Self {
            dt,
            tolerance,
            sums: [0.0; 6],
            count: 0,
        }
    }

    pub fn push(&mut self, measured: &PortSample, commanded: &PortSample) -> EnergyRecord {
        let (pm, pc) = (measured.powers(), commanded.powers());
        for i in 0..6 {
            self.sums[i] += pm[i] - pc[i];
        }
        self.count += 1;
        self.snapshot()
    }

    pub fn snapshot(&self) -> EnergyRecord {
        let channels = self.sums.map(|s| s * self.dt);
        let total = channels.iter().sum();
        EnergyRecord {
            t: self.count as f64 * self.dt,
            channels,
            total,
            class: EnergyClass::of(total, self.tolerance),
        }
    }
}

/// Observed-energy series over two equally long streams sampled every `dt`.
pub fn observed_energy(
    measured: &[PortSample],
    commanded: &[PortSample],
    dt: f64,
    tolerance: f64,
) -> Result<Vec<EnergyRecord>> {
    if measured.len() != commanded.len() {
        return Err(Error::ChannelMismatch {
            measured: measured.len(),
            commanded: commanded.len(),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("sample time must be positive, got {dt}")));
    }
    let mut obs = PassivityObserver::new(dt, tolerance);
    Ok(measured.iter().zip(commanded).map(|(m, c)| obs.push(m, c)).collect())
}

/// Linear interpolation of `(times, values)` onto a uniform grid starting at
/// `times[0]` with spacing `dt`. `times` must be increasing.
pub fn resample(times: &[f64], values: &[f64], dt: f64) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let Some((&t0, &t_last)) = times.first().zip(times.last()) else {
        return Vec::new();
    };
    let n = ((t_last - t0) / dt + 1e-9).floor() as usize + 1;
    let mut j = 0;
    (0..n)
        .map(|i| {
            let t = t0 + i as f64 * dt;
            while j + 2 < times.len() && times[j + 1] <= t {
                j += 1;
            }
            if times.len() == 1 {
                return values[0];
            }
            let (ta, tb) = (times[j], times[j + 1]);
            let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
            values[j] + w * (values[j + 1] - values[j])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn restitution_examples() {
        assert!((restitution_from(-0.021, 0.0234).unwrap() - 1.1143).abs() < 1e-4);
        assert_eq!(restitution_from(-0.018, 0.018).unwrap(), 1.0);
        assert!(matches!(restitution_from(0.0, 0.01), Err(Error::NoImpactVelocity)));
        assert_eq!(classify_restitution(1.6, 0.02), Verdict::Unstable);
        assert_eq!(classify_restitution(0.82, 0.02), Verdict::Stable);
        assert_eq!(classify_restitution(1.01, 0.02), Verdict::Neutral);
    }

    fn random_port(seed: u64) -> Vec<PortSample> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut v = || Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        (0..100)
            .map(|_| PortSample {
                force: v(),
                torque: v(),
                velocity: v(),
                angular_velocity: v(),
            })
            .collect()
    }

    #[test]
    fn identical_streams_are_lossless() {
        let s = random_port(7);
        let rec = observed_energy(&s, &s, 0.004, DEFAULT_ENERGY_TOLERANCE).unwrap();
        assert!(rec.iter().all(|r| r.total == 0.0 && r.class == EnergyClass::Lossless));
    }

    #[test]
    fn constant_power_rectangle_sum() {
        let m = PortSample {
            force: Vector3::new(2.0, 0.0, 0.0),
            velocity: Vector3::new(0.5, 0.0, 0.0),
            ..Default::default()
        };
        let rec = observed_energy(&vec![m; 250], &vec![PortSample::default(); 250], 0.004, 1e-6).unwrap();
        let last = rec.last().unwrap();
        assert!((last.total - 1.0).abs() < 1e-12);
        assert!((last.t - 1.0).abs() < 1e-12);
        assert_eq!(last.class, EnergyClass::Active);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let s = random_port(1);
        let err = observed_energy(&s, &s[..10], 0.004, 1e-6).unwrap_err();
        assert!(matches!(err, Error::ChannelMismatch { measured: 100, commanded: 10 }));
    }

    #[test]
    fn resample_linear() {
        let t = [0.0, 0.01, 0.02];
        let x = [0.0, 1.0, 4.0];
        let r = resample(&t, &x, 0.004);
        let expected = [0.0, 0.4, 0.8, 1.6, 2.8, 4.0];
        assert_eq!(r.len(), expected.len());
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn windows_add_up(seed in any::<u64>(), split in 1usize..99) {
            let (m, c) = (random_port(seed), random_port(seed ^ 0xdead));
            let whole = observed_energy(&m, &c, 0.004, 1e-6).unwrap();
            let head = observed_energy(&m[..split], &c[..split], 0.004, 1e-6).unwrap();
            let tail = observed_energy(&m[split..], &c[split..], 0.004, 1e-6).unwrap();
            let sum = head.last().unwrap().total + tail.last().unwrap().total;
            prop_assert!((whole.last().unwrap().total - sum).abs() < 1e-12);
        }

        #[test]
        fn total_is_channel_sum(seed in any::<u64>()) {
            let (m, c) = (random_port(seed), random_port(seed.wrapping_add(1)));
            for r in observed_energy(&m, &c, 0.004, 1e-6).unwrap() {
                prop_assert_eq!(r.total, r.channels.iter().sum::<f64>());
            }
        }

        #[test]
        fn restitution_scale_invariant(vm in 0.001..0.1f64, vp in 0.0..0.1f64, s in 0.01..100.0f64) {
            let a = restitution_from(-vm, vp).unwrap();
            let b = restitution_from(-vm * s, vp * s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
