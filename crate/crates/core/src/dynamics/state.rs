use nalgebra::SVector;

use crate::params::{ChaserState2D, ChaserState3D};

/// Vector-space operations the integrator and delay line need. The same
/// type doubles as its own time derivative.
pub trait State: Clone {
    /// `self + k * rate`
    fn add_scaled(&self, k: f64, rate: &Self) -> Self;

    /// Value at fraction `w` of the way from `self` to `other`.
    fn lerp(&self, other: &Self, w: f64) -> Self;

    /// Euclidean norm over all components.
    fn magnitude(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Re-impose constraints after a step.
    fn renormalize(&mut self) {}
}

impl State for ChaserState2D {
    fn add_scaled(&self, k: f64, r: &Self) -> Self {
        Self {
            y: self.y + k * r.y,
            z: self.z + k * r.z,
            v_y: self.v_y + k * r.v_y,
            v_z: self.v_z + k * r.v_z,
            theta: self.theta + k * r.theta,
            omega: self.omega + k * r.omega,
        }
    }

    fn lerp(&self, other: &Self, w: f64) -> Self {
        let diff = other.add_scaled(-1.0, self);
        self.add_scaled(w, &diff)
    }

    fn magnitude(&self) -> f64 {
        [self.y, self.z, self.v_y, self.v_z, self.theta, self.omega]
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    fn is_finite(&self) -> bool {
        [self.y, self.z, self.v_y, self.v_z, self.theta, self.omega]
            .iter()
            .all(|x| x.is_finite())
    }
}

impl State for ChaserState3D {
    fn add_scaled(&self, k: f64, r: &Self) -> Self {
        Self {
            r: self.r + k * r.r,
            v: self.v + k * r.v,
            d_c3: self.d_c3 + k * r.d_c3,
            omega: self.omega + k * r.omega,
        }
    }

    /// Interpolated attitude columns are pushed back onto the unit sphere.
    fn lerp(&self, other: &Self, w: f64) -> Self {
        let mut s = Self {
            r: self.r.lerp(&other.r, w),
            v: self.v.lerp(&other.v, w),
            d_c3: self.d_c3.lerp(&other.d_c3, w),
            omega: self.omega.lerp(&other.omega, w),
        };
        if w != 0.0 && w != 1.0 {
            s.renormalize();
        }
        s
    }

    fn magnitude(&self) -> f64 {
        (self.r.norm_squared() + self.v.norm_squared() + self.d_c3.norm_squared() + self.omega.norm_squared()).sqrt()
    }

    fn is_finite(&self) -> bool {
        [self.r, self.v, self.d_c3, self.omega]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn renormalize(&mut self) {
        let n = self.d_c3.norm();
        if n > 0.0 {
            self.d_c3 /= n;
        }
    }
}

impl<const N: usize> State for SVector<f64, N> {
    fn add_scaled(&self, k: f64, r: &Self) -> Self {
        self + r * k
    }

    fn lerp(&self, other: &Self, w: f64) -> Self {
        self + (other - self) * w
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}
