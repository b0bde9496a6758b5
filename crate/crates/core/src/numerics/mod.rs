//! Numerical kernels shared by the solvers: graded radial grids, adaptive
//! scalar ODE integration, tail-corrected quadrature and log-log fitting.

mod fit;
mod grid;
mod ode;
mod quadrature;

pub use fit::{fit_loglog, LogLogFit};
pub use grid::{RadialGrid, DEFAULT_POINTS_PER_DECADE, LAYER_STEPS_PER_MU, LAYER_WIDTH_IN_MU};
pub use ode::{integrate_scalar_ode, integrate_stiff_scalar_ode};
pub use quadrature::{tail_integral, tail_integral_at, tail_integral_corrected};

use crate::error::{Error, Result};

/// Tolerances for the adaptive integrators, the fixed-point sweeps and the
/// grid quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSet {
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    pub quad_tol: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        ToleranceSet {
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-14,
            picard_tol: 1e-10,
            max_picard_iters: 200,
            quad_tol: 1e-6,
        }
    }
}

impl ToleranceSet {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive("ode_rel_tol", self.ode_rel_tol)?;
        positive("ode_abs_tol", self.ode_abs_tol)?;
        positive("picard_tol", self.picard_tol)?;
        positive("quad_tol", self.quad_tol)?;
        if self.max_picard_iters < 1 {
            return Err(Error::invalid("max_picard_iters must be at least 1"));
        }
        Ok(())
    }

    /// Same set with both ODE tolerances scaled by `factor`.
    pub fn scale_ode(&self, factor: f64) -> Self {
        ToleranceSet {
            ode_rel_tol: self.ode_rel_tol * factor,
            ode_abs_tol: self.ode_abs_tol * factor,
            ..*self
        }
    }
}
