use std::collections::VecDeque;

use super::State;

/// Time-indexed state history answering "what was the state at `t - h`".
///
/// Lookups between samples interpolate linearly. Times before the first
/// sample return the first sample (constant pre-history). Only as many
/// samples as the delay needs are retained.
#[derive(Debug, Clone)]
pub struct DelayLine<S> {
    delay: f64,
    capacity: usize,
    entries: VecDeque<(f64, S)>,
}

impl<S: State> DelayLine<S> {
    pub fn new(delay: f64, dt: f64, t0: f64, initial: S) -> Self {
        let capacity = ((delay / dt) - 1e-9).ceil().max(0.0) as usize + 2;
        let mut entries = VecDeque::with_capacity(capacity + 1);
        entries.push_back((t0, initial));
        Self {
            delay,
            capacity,
            entries,
        }
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Most recent sample.
    pub fn latest(&self) -> &(f64, S) {
        self.entries.back().expect("delay line always holds a sample")
    }

    /// Append a sample; times must increase.
    pub fn push(&mut self, t: f64, state: S) {
        debug_assert!(t > self.latest().0);
        self.entries.push_back((t, state));
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    /// State at absolute time `t` (already shifted by the caller).
    pub fn at(&self, t: f64) -> S {
        self.at_with(t, None)
    }

    /// State `h` before time `t`.
    pub fn delayed(&self, t: f64) -> S {
        self.at(t - self.delay)
    }

    /// Like [`at`](Self::at), but a provisional sample newer than the
    /// history (an integrator stage) extends the interpolation range. This
    /// resolves delays shorter than one step; with zero delay the stage
    /// state itself is returned.
    pub fn at_with(&self, t: f64, provisional: Option<(f64, &S)>) -> S {
        let (t_last, s_last) = self.latest();
        if t >= *t_last {
            return match provisional {
                Some((tp, sp)) if tp > *t_last => {
                    if t >= tp {
                        sp.clone()
                    } else {
                        s_last.lerp(sp, (t - t_last) / (tp - t_last))
                    }
                }
                _ => s_last.clone(),
            };
        }
        let (t_first, s_first) = &self.entries[0];
        if t <= *t_first {
            return s_first.clone();
        }
        // first index with time > t; 1 <= idx < len
        let idx = self.entries.partition_point(|(ti, _)| *ti <= t);
        let (t0, s0) = &self.entries[idx - 1];
        let (t1, s1) = &self.entries[idx];
        if t == *t0 {
            return s0.clone();
        }
        s0.lerp(s1, (t - t0) / (t1 - t0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    fn ramp(delay: f64, dt: f64, n: usize) -> DelayLine<Vector2<f64>> {
        let mut line = DelayLine::new(delay, dt, 0.0, Vector2::new(0.0, 1.0));
        for i in 1..=n {
            let t = i as f64 * dt;
            line.push(t, Vector2::new(t, 1.0));
        }
        line
    }

    #[test]
    fn interpolates_linearly() {
        let line = ramp(0.05, 0.01, 93);
        let s = line.delayed(0.9234);
        assert!((s.x - 0.8734).abs() < 1e-12, "{}", s.x);
    }

    #[test]
    fn constant_pre_history() {
        let line = DelayLine::new(0.016, 1e-4, 0.0, Vector2::new(3.0, 4.0));
        assert_eq!(line.delayed(0.001), Vector2::new(3.0, 4.0));
        assert_eq!(line.at(-5.0), Vector2::new(3.0, 4.0));
    }

    #[test]
    fn bounded_capacity() {
        let line = ramp(0.016, 1e-3, 1000);
        assert_eq!(line.capacity(), 18);
        assert_eq!(line.len(), 18);
        // oldest sample still covers the delay
        assert!(line.latest().0 - line.entries[0].0 >= 0.016 + 1e-3 - 1e-12);
    }

    #[test]
    fn provisional_sample_extends_range() {
        let line = ramp(0.0, 0.01, 3);
        let stage = Vector2::new(1.0, 1.0);
        let s = line.at_with(0.035, Some((0.04, &stage)));
        // halfway between (0.03, 0.03) and (0.04, 1.0)
        assert!((s.x - 0.515).abs() < 1e-12);
        assert_eq!(line.at_with(0.04, Some((0.04, &stage))), stage);
        assert_eq!(line.at(0.035).x, 0.03);
    }
}
