//! Barotropic gamma-law gas and the flow configuration shared by the solvers.
//!
//! Densities are carried as specific volume `v = 1/rho`; every solver works
//! with the deviation `eta = v - v_plus` from the far-field state.

use crate::error::{Error, Result};

/// Pressure law `p(rho) = A rho^gamma` with `A > 0`, `gamma >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasLaw {
    a: f64,
    gamma: f64,
}

impl GasLaw {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("pressure coefficient A must be positive, got {a}")));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::invalid(format!("gamma must be at least 1, got {gamma}")));
        }
        Ok(GasLaw { a, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn positive(name: &str, x: f64) -> Result<()> {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} must be positive, got {x}")))
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        Self::positive("density", rho)?;
        Ok(self.a * rho.powf(self.gamma))
    }

    /// `p'(rho)`, the squared sound speed.
    pub fn pressure_prime(&self, rho: f64) -> Result<f64> {
        Self::positive("density", rho)?;
        Ok(self.a * self.gamma * rho.powf(self.gamma - 1.0))
    }

    /// `p~(v) = p(1/v) = A v^(-gamma)`.
    pub fn p_tilde(&self, v: f64) -> Result<f64> {
        Self::positive("specific volume", v)?;
        Ok(self.a * v.powf(-self.gamma))
    }

    /// `p~'(v) = -A gamma v^(-gamma-1)`, negative for every `v > 0`.
    pub fn p_tilde_prime(&self, v: f64) -> Result<f64> {
        Self::positive("specific volume", v)?;
        Ok(-self.a * self.gamma * v.powf(-self.gamma - 1.0))
    }

    /// `p~''(v) = A gamma (gamma+1) v^(-gamma-2)`.
    pub fn p_tilde_second(&self, v: f64) -> Result<f64> {
        Self::positive("specific volume", v)?;
        Ok(self.a * self.gamma * (self.gamma + 1.0) * v.powf(-self.gamma - 2.0))
    }

    /// `p~(v + dv) - p~(v)` without cancellation for small `dv`.
    pub fn p_tilde_increment(&self, v: f64, dv: f64) -> Result<f64> {
        Self::positive("specific volume", v)?;
        Self::positive("specific volume", v + dv)?;
        let t = dv / v;
        Ok(self.a * v.powf(-self.gamma) * (-self.gamma * t.ln_1p()).exp_m1())
    }

    /// Second-order remainder `p~(v + dv) - p~(v) - p~'(v) dv`.
    pub fn p_tilde_remainder(&self, v: f64, dv: f64) -> Result<f64> {
        Self::positive("specific volume", v)?;
        Self::positive("specific volume", v + dv)?;
        let t = dv / v;
        let scale = self.a * v.powf(-self.gamma);
        if t.abs() < 1e-3 {
            // (1+t)^(-g) - 1 + g t  =  sum_k binom(-g, k) t^k, k >= 2
            let g = self.gamma;
            let mut term = g * (g + 1.0) / 2.0 * t * t;
            let mut sum = term;
            for k in 2..12 {
                term *= -(g + k as f64) / (k as f64 + 1.0) * t;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            Ok(scale * sum)
        } else {
            Ok(scale * ((-self.gamma * t.ln_1p()).exp_m1() + self.gamma * t))
        }
    }

    /// Enthalpy `h` with `h'(rho) = p'(rho)/rho`:
    /// `A gamma/(gamma-1) rho^(gamma-1)` for `gamma > 1`, `A ln rho` for `gamma = 1`.
    pub fn enthalpy(&self, rho: f64) -> Result<f64> {
        Self::positive("density", rho)?;
        if self.gamma == 1.0 {
            Ok(self.a * rho.ln())
        } else {
            Ok(self.a * self.gamma / (self.gamma - 1.0) * rho.powf(self.gamma - 1.0))
        }
    }
}

/// Sign of the boundary velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `u_- > 0`: density and velocity prescribed at `r = 1`.
    Inflow,
    /// `u_- < 0`: only the velocity is prescribed.
    Outflow,
    /// `u_- = 0`: the constant far-field state.
    Trivial,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Inflow => "inflow",
            Regime::Outflow => "outflow",
            Regime::Trivial => "trivial",
        })
    }
}

/// Stationary exterior problem data on `r >= 1`. The far-field velocity is
/// always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub n: u32,
    pub v_plus: f64,
    pub u_minus: f64,
    /// Boundary specific volume; only read for inflow.
    pub v_minus: f64,
    pub mu: f64,
    pub gas: GasLaw,
}

impl FlowConfig {
    pub fn new(n: u32, v_plus: f64, u_minus: f64, v_minus: f64, mu: f64, gas: GasLaw) -> Result<Self> {
        let c = FlowConfig {
            n,
            v_plus,
            u_minus,
            v_minus,
            mu,
            gas,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("dimension n must be at least 2, got {}", self.n)));
        }
        if !(self.v_plus.is_finite() && self.v_plus > 0.0) {
            return Err(Error::invalid(format!("v_plus must be positive, got {}", self.v_plus)));
        }
        if !self.u_minus.is_finite() {
            return Err(Error::invalid("u_minus must be finite"));
        }
        if !(self.mu.is_finite() && self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::invalid(format!("mu must lie in (0, 1], got {}", self.mu)));
        }
        if self.u_minus > 0.0 && !(self.v_minus.is_finite() && self.v_minus > 0.0) {
            return Err(Error::invalid(format!(
                "inflow requires a positive v_minus, got {}",
                self.v_minus
            )));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        if self.u_minus > 0.0 {
            Regime::Inflow
        } else if self.u_minus < 0.0 {
            Regime::Outflow
        } else {
            Regime::Trivial
        }
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        let c = FlowConfig { mu, ..*self };
        c.validate()?;
        Ok(c)
    }

    /// `n - 1` as a real.
    pub(crate) fn nm1(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// Boundary deviation `eta_- = v_- - v_+` (inflow).
    pub fn eta_minus(&self) -> f64 {
        self.v_minus - self.v_plus
    }
}

/// Mass flux `eps = r^(n-1) rho u`: `u_-/v_-` for inflow,
/// `u_-/(v_+ + eta(1))` for outflow, zero for the trivial state.
pub fn mass_flux(config: &FlowConfig, eta_at_1: f64) -> Result<f64> {
    match config.regime() {
        Regime::Trivial => Ok(0.0),
        Regime::Inflow => {
            if config.v_minus > 0.0 {
                Ok(config.u_minus / config.v_minus)
            } else {
                Err(Error::InvalidState(format!("v_minus = {} is not positive", config.v_minus)))
            }
        }
        Regime::Outflow => {
            let v1 = config.v_plus + eta_at_1;
            if v1 > 0.0 && v1.is_finite() {
                Ok(config.u_minus / v1)
            } else {
                Err(Error::InvalidState(format!("boundary specific volume {v1} is not positive")))
            }
        }
    }
}
