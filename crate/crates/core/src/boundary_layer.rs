//! Inflow boundary layer on the stretched coordinate `y = (r - 1)/mu`.
//!
//! The deviation `eta_hat = eta_B - eta_E(1)` solves the autonomous scalar
//! problem
//!
//! ```text
//! eta_hat' + a_eps eta_hat = N[eta_hat] / eps,      eta_hat(0) = eta_- - eta_E(1),
//! a_eps = -p~'(v*)/eps - eps,   N[x] = p~(v* + x) - p~(v*) - p~'(v*) x,
//! ```
//!
//! with `v* = v+ + eta_E(1)` and `eps = u_-/v_-`.

use crate::error::{Error, Result};
use crate::gas::{FlowConfig, GasLaw, Regime};
use crate::numerics::{integrate_scalar_ode, ToleranceSet};

/// Uniform cells on `[0, Y_max]`.
pub const BL_CELLS: usize = 4096;
/// The linear envelope `e^{-a_eps y}` reaches `10^-DECADES` at `Y_max`.
const DECADES: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlProfile {
    pub y_nodes: Vec<f64>,
    pub eta_hat: Vec<f64>,
    pub a_eps: f64,
    pub v_star: f64,
    pub epsilon: f64,
    /// Euler trace `eta_E(1)`, the far-field value of `eta_B`.
    pub eta_e_at_1: f64,
    /// Boundary datum `eta_B(0)`.
    pub eta_minus: f64,
    pub gas: GasLaw,
}

pub fn a_epsilon(gas: &GasLaw, v_star: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidRegime(format!(
            "boundary layers exist only for inflow (eps > 0), got eps = {epsilon}"
        )));
    }
    Ok(-gas.p_tilde_prime(v_star)? / epsilon - epsilon)
}

impl BlProfile {
    pub fn y_max(&self) -> f64 {
        *self.y_nodes.last().unwrap()
    }

    pub fn eta_hat_0(&self) -> f64 {
        self.eta_hat[0]
    }

    /// `eta_hat'` as a function of `eta_hat`.
    pub fn slope(&self, eta_hat: f64) -> f64 {
        layer_rhs(&self.gas, self.v_star, self.a_eps, self.epsilon, eta_hat)
    }

    /// `eta_hat(y)` for any `y >= 0`: cubic Hermite between samples, the linear
    /// envelope beyond `Y_max`.
    pub fn eta_hat_at(&self, y: f64) -> f64 {
        let n = self.y_nodes.len();
        let y_max = self.y_max();
        if y >= y_max {
            return self.eta_hat[n - 1] * (-self.a_eps * (y - y_max)).exp();
        }
        let y = y.max(0.0);
        let i = self.y_nodes.partition_point(|&x| x <= y).clamp(1, n - 1) - 1;
        let (a, b) = (self.y_nodes[i], self.y_nodes[i + 1]);
        let h = b - a;
        let s = (y - a) / h;
        let (ya, yb) = (self.eta_hat[i], self.eta_hat[i + 1]);
        let (da, db) = (self.slope(ya), self.slope(yb));
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * ya
            + (s3 - 2.0 * s2 + s) * h * da
            + (-2.0 * s3 + 3.0 * s2) * yb
            + (s3 - s2) * h * db
    }

    /// `eta_B(y) = eta_hat(y) + eta_E(1)`.
    pub fn eta_b_at(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return self.eta_minus;
        }
        self.eta_hat_at(y) + self.eta_e_at_1
    }
}

fn layer_rhs(gas: &GasLaw, v_star: f64, a_eps: f64, epsilon: f64, x: f64) -> f64 {
    match gas.p_tilde_remainder(v_star, x) {
        Ok(n) => -a_eps * x + n / epsilon,
        Err(_) => f64::NAN,
    }
}

fn layer_setup(config: &FlowConfig, eta_e_at_1: f64) -> Result<(f64, f64, f64, f64)> {
    if config.regime() != Regime::Inflow {
        return Err(Error::InvalidRegime(format!(
            "boundary layer requires inflow data, got {}",
            config.regime()
        )));
    }
    let epsilon = config.u_minus / config.v_minus;
    let v_star = config.v_plus + eta_e_at_1;
    if !(v_star > 0.0) {
        return Err(Error::Vacuum { r: 1.0, v: v_star });
    }
    let a = a_epsilon(&config.gas, v_star, epsilon)?;
    if !(a > 0.0) {
        return Err(Error::InvalidRegime(format!("nonpositive layer rate a_eps = {a}")));
    }
    Ok((epsilon, v_star, a, config.eta_minus() - eta_e_at_1))
}

pub fn solve_bl(config: &FlowConfig, eta_e_at_1: f64, tol: &ToleranceSet) -> Result<BlProfile> {
    config.validate()?;
    tol.validate()?;
    let (epsilon, v_star, a_eps, eta0) = layer_setup(config, eta_e_at_1)?;
    let y_max = DECADES * std::f64::consts::LN_10 / a_eps;
    let y_nodes: Vec<f64> = (0..=BL_CELLS).map(|i| y_max * i as f64 / BL_CELLS as f64).collect();
    let gas = config.gas;
    let eta_hat = integrate_scalar_ode(
        |_, x| layer_rhs(&gas, v_star, a_eps, epsilon, x),
        eta0,
        &y_nodes,
        tol,
    )?;
    if let Some(worst) = eta_hat.iter().map(|x| x.abs()).find(|&x| x > 2.0 * eta0.abs()) {
        return Err(Error::SmallnessViolation {
            sweeps: 0,
            last: worst,
        });
    }
    Ok(BlProfile {
        y_nodes,
        eta_hat,
        a_eps,
        v_star,
        epsilon,
        eta_e_at_1,
        eta_minus: config.eta_minus(),
        gas,
    })
}

/// Exponential decay rate `-d ln|f| / dy` fitted by least squares over the
/// samples with `|f| in [1e-10, 1e-3] * |f(0)|`.
pub fn exponential_rate(y: &[f64], values: &[f64]) -> Result<f64> {
    let f0 = values.first().copied().unwrap_or(0.0).abs();
    let (lo, hi) = (1e-10 * f0, 1e-3 * f0);
    let pts: Vec<(f64, f64)> = y
        .iter()
        .zip(values)
        .filter(|(_, v)| v.abs() >= lo && v.abs() <= hi && v.abs() > 0.0)
        .map(|(&y, v)| (y, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSignal(format!(
            "only {} samples in the decay window",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSignal("decay window has a single abscissa".into()));
    }
    Ok(-sxy / sxx)
}

pub fn bl_decay_rate(profile: &BlProfile) -> Result<f64> {
    exponential_rate(&profile.y_nodes, &profile.eta_hat)
}

/// Independent route to the layer: fixed-point iteration of the
/// variation-of-constants form
///
/// ```text
/// eta_hat(y) = e^{-a y} eta_hat(0) + 1/eps int_0^y e^{-a (y-s)} N[eta_hat](s) ds
/// ```
///
/// on `refine` sub-cells per profile cell, with `N` linear on each sub-cell
/// and the exponential integrated exactly. Returns values at the profile's
/// `y_nodes`.
pub fn duhamel_profile(config: &FlowConfig, eta_e_at_1: f64, y_nodes: &[f64], refine: usize, tol: &ToleranceSet) -> Result<Vec<f64>> {
    let (epsilon, v_star, a, eta0) = layer_setup(config, eta_e_at_1)?;
    if refine == 0 || y_nodes.len() < 2 {
        return Err(Error::invalid("need at least two nodes and refine >= 1"));
    }
    let mut ys = Vec::with_capacity((y_nodes.len() - 1) * refine + 1);
    ys.push(y_nodes[0]);
    for w in y_nodes.windows(2) {
        for k in 1..=refine {
            ys.push(w[0] + (w[1] - w[0]) * k as f64 / refine as f64);
        }
    }
    let m = ys.len();
    // per-cell decay factor and weights of N at the left/right sub-cell ends
    let mut decay = Vec::with_capacity(m - 1);
    let mut w_left = Vec::with_capacity(m - 1);
    let mut w_right = Vec::with_capacity(m - 1);
    for w in ys.windows(2) {
        let h = w[1] - w[0];
        let z = a * h;
        let (wl, wr) = if z < 1e-3 {
            (
                h * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0),
                h * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0),
            )
        } else {
            let e = (-z).exp();
            let total = -(-z).exp_m1() / a;
            let wr = total - (-(-z).exp_m1() - z * e) / (a * z);
            (total - wr, wr)
        };
        decay.push((-z).exp());
        w_left.push(wl / epsilon);
        w_right.push(wr / epsilon);
    }
    let linear: Vec<f64> = ys.iter().map(|y| eta0 * (-a * y).exp()).collect();
    let mut cur = linear.clone();
    let target = tol.picard_tol * 1e-4;
    for _ in 0..tol.max_picard_iters {
        let nl: Vec<f64> = cur
            .iter()
            .map(|&x| config.gas.p_tilde_remainder(v_star, x))
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(m);
        let mut integral = 0.0;
        next.push(linear[0]);
        for i in 0..m - 1 {
            integral = decay[i] * integral + w_left[i] * nl[i] + w_right[i] * nl[i + 1];
            next.push(linear[i + 1] + integral);
        }
        let change = crate::profile::sup_abs_diff(&next, &cur);
        cur = next;
        if change <= target {
            return Ok(cur.into_iter().step_by(refine).collect());
        }
    }
    Err(Error::NoConvergence {
        iterations: tol.max_picard_iters,
        last: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inflow(v_minus: f64) -> FlowConfig {
        FlowConfig::new(2, 1.0, 0.05, v_minus, 0.05, GasLaw::new(1.0, 1.4).unwrap()).unwrap()
    }

    #[test]
    fn rate_formula() {
        let g1 = GasLaw::new(1.0, 1.0).unwrap();
        assert!((a_epsilon(&g1, 1.0, 0.05).unwrap() - 19.95).abs() < 1e-12);
        let g2 = GasLaw::new(1.0, 2.0).unwrap();
        assert!((a_epsilon(&g2, 1.0, 0.1).unwrap() - 19.9).abs() < 1e-12);
        for eps in [0.1, 0.01] {
            let prod = a_epsilon(&g1, 1.0, eps).unwrap() * eps;
            assert!((prod - 1.0).abs() <= eps * eps + 1e-15);
        }
        assert!(matches!(a_epsilon(&g1, 1.0, -0.05), Err(Error::InvalidRegime(_))));
        assert!(matches!(a_epsilon(&g1, 1.0, 0.0), Err(Error::InvalidRegime(_))));
    }

    #[test]
    fn halving_flux_doubles_rate() {
        let g = GasLaw::new(1.0, 1.4).unwrap();
        for eps in [0.05, 0.02, 0.01] {
            let ratio = a_epsilon(&g, 1.0, eps / 2.0).unwrap() / a_epsilon(&g, 1.0, eps).unwrap();
            assert!((1.9..=2.1).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn zero_deviation_gives_zero_layer() {
        let c = inflow(1.02);
        let p = solve_bl(&c, c.eta_minus(), &ToleranceSet::default()).unwrap();
        assert!(p.eta_hat.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn outflow_is_rejected() {
        let c = FlowConfig::new(2, 1.0, -0.05, 1.0, 0.05, GasLaw::new(1.0, 1.4).unwrap()).unwrap();
        assert!(matches!(solve_bl(&c, 0.0, &ToleranceSet::default()), Err(Error::InvalidRegime(_))));
    }

    #[test]
    fn synthetic_exponential_rate() {
        let y: Vec<f64> = (0..2000).map(|i| i as f64 * 0.005).collect();
        let v: Vec<f64> = y.iter().map(|y| 0.3 * (-3.0 * y).exp()).collect();
        assert!((exponential_rate(&y, &v).unwrap() - 3.0).abs() < 1e-6);
        // deterministic +-1% multiplicative noise
        let noisy: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(i, x)| x * (1.0 + 0.01 * ((i as f64 * 2.39).sin())))
            .collect();
        let r = exponential_rate(&y, &noisy).unwrap();
        assert!((2.9..=3.1).contains(&r), "{r}");
        assert!(matches!(exponential_rate(&y[..3], &v[..3]), Err(Error::InsufficientSignal(_))));
    }

    #[test]
    fn hermite_evaluation_hits_samples_and_continues_envelope() {
        let c = inflow(1.02);
        let p = solve_bl(&c, 9e-4, &ToleranceSet::default()).unwrap();
        for i in [0, 1, 100, 4095] {
            assert_eq!(p.eta_hat_at(p.y_nodes[i]), p.eta_hat[i]);
        }
        let beyond = p.eta_hat_at(2.0 * p.y_max());
        assert!(beyond.abs() < 1e-12 * p.eta_hat_0().abs());
        assert_eq!(p.eta_b_at(0.0), c.eta_minus());
    }
}
