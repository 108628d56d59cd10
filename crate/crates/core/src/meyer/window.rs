//! One-dimensional Meyer profiles `Psi0`, `Omega` and `Psi1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

const RAMP_TOL: f64 = 1e-12;
const RAMP_SAMPLES: usize = 4097;

/// A transition ramp `nu: [0,1] -> [0,1]` with `nu(x) + nu(1-x) = 1`.
pub trait Ramp: Debug + Send + Sync {
    fn eval(&self, x: f64) -> f64;
}

/// `nu(x) = x^4 (35 - 84x + 70x^2 - 20x^3)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolynomialRamp;

impl Ramp for PolynomialRamp {
    fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let x2 = x * x;
        x2 * x2 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x2 * x)
    }
}

/// `nu(x) = 3x^2 - 2x^3`, a C1 alternative.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothstepRamp;

impl Ramp for SmoothstepRamp {
    fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        x * x * (3.0 - 2.0 * x)
    }
}

/// `nu(x) = x^2`. Not symmetric, so [`MeyerWindow::new`] rejects it.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticRamp;

impl Ramp for QuadraticRamp {
    fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        x * x
    }
}

pub fn ramp_by_name(name: &str) -> Option<Arc<dyn Ramp>> {
    match name {
        "polynomial" => Some(Arc::new(PolynomialRamp)),
        "smoothstep" => Some(Arc::new(SmoothstepRamp)),
        "quadratic" => Some(Arc::new(QuadraticRamp)),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct MeyerWindow {
    ramp: Arc<dyn Ramp>,
}

impl Default for MeyerWindow {
    fn default() -> Self {
        Self { ramp: Arc::new(PolynomialRamp) }
    }
}

impl MeyerWindow {
    /// Validates the ramp on a dense sample and builds the window.
    pub fn new(ramp: Arc<dyn Ramp>) -> Result<Self> {
        let r0 = ramp.eval(0.0);
        let r1 = ramp.eval(1.0);
        if r0.abs() > RAMP_TOL || (r1 - 1.0).abs() > RAMP_TOL {
            return Err(Error::InvalidRamp(format!("endpoint values nu(0) = {r0}, nu(1) = {r1}")));
        }
        for i in 0..RAMP_SAMPLES {
            let x = i as f64 / (RAMP_SAMPLES - 1) as f64;
            let v = ramp.eval(x);
            if !(-RAMP_TOL..=1.0 + RAMP_TOL).contains(&v) {
                return Err(Error::InvalidRamp(format!("nu({x}) = {v} leaves [0, 1]")));
            }
            let sym = v + ramp.eval(1.0 - x) - 1.0;
            if sym.abs() > RAMP_TOL {
                return Err(Error::InvalidRamp(format!(
                    "nu(x) + nu(1 - x) - 1 = {sym:.3e} at x = {x}"
                )));
            }
        }
        Ok(Self { ramp })
    }

    pub fn ramp(&self) -> &Arc<dyn Ramp> {
        &self.ramp
    }

    /// `Psi0(xi)`: 1 on `|xi| <= 2pi/3`, 0 on `|xi| >= 4pi/3`.
    pub fn scaling(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 2.0 * PI / 3.0 {
            1.0
        } else if a >= 4.0 * PI / 3.0 {
            0.0
        } else {
            (FRAC_PI_2 * self.ramp.eval(3.0 * a / (2.0 * PI) - 1.0)).cos()
        }
    }

    /// `Omega(xi) = sqrt(Psi0(xi/2)^2 - Psi0(xi)^2)`, evaluated in closed form.
    pub fn omega(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 2.0 * PI / 3.0 || a >= 8.0 * PI / 3.0 {
            0.0
        } else if a <= 4.0 * PI / 3.0 {
            (FRAC_PI_2 * self.ramp.eval(3.0 * a / (2.0 * PI) - 1.0)).sin()
        } else {
            (FRAC_PI_2 * self.ramp.eval(3.0 * a / (4.0 * PI) - 1.0)).cos()
        }
    }

    /// `Psi1(xi) = Omega(xi) exp(-i xi / 2)`.
    pub fn detail(&self, xi: f64) -> Complex64 {
        Complex64::from_polar(self.omega(xi), -0.5 * xi)
    }

    /// `Psi^eps` for `eps` in {0, 1}.
    pub fn profile(&self, eps: u8, xi: f64) -> Complex64 {
        if eps == 0 {
            Complex64::new(self.scaling(xi), 0.0)
        } else {
            self.detail(xi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn point_values() {
        let w = MeyerWindow::default();
        assert_eq!(w.scaling(0.0), 1.0);
        assert_eq!(w.omega(PI / 2.0), 0.0);
        assert_abs_diff_eq!(w.omega(PI), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(w.scaling(4.0 * PI / 3.0), 0.0);
        assert_eq!(w.omega(8.0 * PI / 3.0), 0.0);
    }

    #[test]
    fn window_identities_on_dense_sample() {
        for w in [MeyerWindow::default(), MeyerWindow::new(Arc::new(SmoothstepRamp)).unwrap()] {
            let n = 10_001;
            for i in 0..n {
                let xi = 2.0 * PI / 3.0 + (2.0 * PI / 3.0) * i as f64 / (n - 1) as f64;
                let o = w.omega(xi);
                assert!((o * o + w.omega(2.0 * xi).powi(2) - 1.0).abs() <= 1e-12);
                assert!((o * o + w.omega(2.0 * PI - xi).powi(2) - 1.0).abs() <= 1e-12);
                let s = w.scaling(xi / 2.0).powi(2) - w.scaling(xi).powi(2);
                assert!((o * o - s).abs() <= 1e-12);
                assert_eq!(w.scaling(xi), w.scaling(-xi));
                let d = w.detail(xi);
                assert!((d - Complex64::from_polar(o, -xi / 2.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_ramp() {
        assert!(matches!(MeyerWindow::new(Arc::new(QuadraticRamp)), Err(Error::InvalidRamp(_))));
        assert!(ramp_by_name("nope").is_none());
    }
}
