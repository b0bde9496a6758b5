//! Stationary Euler flow in the volume deviation `eta_E`, computed as the
//! fixed point of
//!
//! ```text
//! eta_E(r) = int_r^inf  eps^2 (n-1) (v+ + eta_E) / ((|p~'(v+ + eta_E)| - eps^2 s^{-2(n-1)}) s^{2n-1}) ds
//! ```
//!
//! For outflow the flux is part of the unknown, `eps = u_-/(v+ + eta_E(1))`;
//! for inflow `eps = u_-/v_-` is fixed.

use crate::error::{Error, Result};
use crate::gas::{mass_flux, FlowConfig, Regime};
use crate::numerics::{tail_integral, RadialGrid, ToleranceSet};
use crate::profile::{sup_abs_diff, weighted_norm, FlowState, RadialProfile};

/// Consecutive growing sweeps tolerated before the data is declared too large.
const GROWTH_LIMIT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct EulerSolution {
    pub grid: RadialGrid,
    pub eta: Vec<f64>,
    pub eta_slope: Vec<f64>,
    pub epsilon: f64,
    pub regime: Regime,
    pub iterations: usize,
    /// Sup-norm of the last Picard update.
    pub final_update_norm: f64,
    /// Weighted norm `sup r^{2(n-1)} |eta^(m+1) - eta^(m)|` of every update.
    pub update_history: Vec<f64>,
}

impl RadialProfile for EulerSolution {
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn eta(&self) -> &[f64] {
        &self.eta
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl EulerSolution {
    /// `v* = v+ + eta_E(1)`, the state the boundary layer connects to.
    pub fn v_star(&self, config: &FlowConfig) -> f64 {
        config.v_plus + self.eta[0]
    }

    /// Ratios of successive weighted update norms.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.update_history.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// One application of the integral map: `r -> int_r^inf G[eta_in](s) ds`.
pub fn picard_map(nodes: &[f64], eta_in: &[f64], config: &FlowConfig, epsilon: f64) -> Result<Vec<f64>> {
    if nodes.len() != eta_in.len() {
        return Err(Error::invalid("profile and grid lengths differ"));
    }
    let bound = 0.5 * config.v_plus;
    let sup = eta_in.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if !(sup < bound) {
        return Err(Error::Divergence { sup, bound });
    }
    if epsilon == 0.0 {
        return Ok(vec![0.0; nodes.len()]);
    }
    let eps2 = epsilon * epsilon;
    let nm1 = config.nm1();
    let k = 2 * (config.n as i32 - 1);
    let mut kernel = Vec::with_capacity(nodes.len());
    for (&s, &e) in nodes.iter().zip(eta_in) {
        let v = config.v_plus + e;
        let denom = -config.gas.p_tilde_prime(v)? - eps2 * s.powi(-k);
        if !(denom > 0.0) {
            return Err(Error::Supersonic { r: s, denominator: denom });
        }
        kernel.push(eps2 * nm1 * v / (denom * s.powi(k + 1)));
    }
    tail_integral(nodes, &kernel, (2 * config.n - 1) as f64)
}

/// Pointwise slope `eta_E'(r)` from the differential form of the Euler equation.
pub fn euler_slope(r: f64, eta: f64, config: &FlowConfig, epsilon: f64) -> Result<f64> {
    let k = 2 * (config.n as i32 - 1);
    let eps2 = epsilon * epsilon;
    let v = config.v_plus + eta;
    let denom = (eps2 * r.powi(-k) + config.gas.p_tilde_prime(v)?) * r.powi(k + 1);
    Ok(eps2 * config.nm1() * v / denom)
}

pub fn solve_euler(config: &FlowConfig, grid: &RadialGrid, tol: &ToleranceSet) -> Result<EulerSolution> {
    config.validate()?;
    tol.validate()?;
    let nodes = grid.nodes();
    let regime = config.regime();
    if regime == Regime::Trivial {
        return Ok(EulerSolution {
            grid: grid.clone(),
            eta: vec![0.0; nodes.len()],
            eta_slope: vec![0.0; nodes.len()],
            epsilon: 0.0,
            regime,
            iterations: 1,
            final_update_norm: 0.0,
            update_history: Vec::new(),
        });
    }

    // eta^(0) is the map applied to zero
    let mut epsilon = mass_flux(config, 0.0)?;
    let mut eta = picard_map(nodes, &vec![0.0; nodes.len()], config, epsilon)?;
    let mut iterations = 1;
    let mut history = Vec::new();
    let mut last_sup;
    let mut growing = 0;
    loop {
        epsilon = mass_flux(config, eta[0])?;
        let next = picard_map(nodes, &eta, config, epsilon)?;
        iterations += 1;
        let diff: Vec<f64> = next.iter().zip(&eta).map(|(a, b)| a - b).collect();
        let x_norm = weighted_norm(nodes, &diff, config.n);
        last_sup = sup_abs_diff(&next, &eta);
        if let Some(&prev) = history.last() {
            growing = if x_norm > prev { growing + 1 } else { 0 };
        }
        history.push(x_norm);
        eta = next;
        if growing >= GROWTH_LIMIT {
            return Err(Error::SmallnessViolation {
                sweeps: growing,
                last: x_norm,
            });
        }
        if last_sup < tol.picard_tol {
            break;
        }
        if iterations >= tol.max_picard_iters {
            return Err(Error::NoConvergence {
                iterations,
                last: last_sup,
            });
        }
    }
    epsilon = mass_flux(config, eta[0])?;
    let eta_slope = nodes
        .iter()
        .zip(&eta)
        .map(|(&r, &e)| euler_slope(r, e, config, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(EulerSolution {
        grid: grid.clone(),
        eta,
        eta_slope,
        epsilon,
        regime,
        iterations,
        final_update_norm: last_sup,
        update_history: history,
    })
}

/// Largest deviation of the Bernoulli first integral
/// `u^2/2 + h(rho) - h(1/v+)` over the grid, with `u = eps (v+ + eta)/r^{n-1}`.
pub fn bernoulli_defect(sol: &EulerSolution, config: &FlowConfig) -> Result<f64> {
    let h_far = config.gas.enthalpy(1.0 / config.v_plus)?;
    let nm1 = (config.n - 1) as i32;
    let mut worst = 0.0f64;
    for (&r, &e) in sol.grid.nodes().iter().zip(&sol.eta) {
        let v = config.v_plus + e;
        if !(v > 0.0) {
            return Err(Error::Vacuum { r, v });
        }
        let u = sol.epsilon * v / r.powi(nm1);
        let d = 0.5 * u * u + config.gas.enthalpy(1.0 / v)? - h_far;
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

/// Density and velocity of an Euler solution.
pub fn euler_state(sol: &EulerSolution, config: &FlowConfig) -> Result<FlowState> {
    crate::ns::reconstruct_state(sol, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasLaw;

    fn cfg(n: u32, gamma: f64, u_minus: f64) -> FlowConfig {
        FlowConfig::new(n, 1.0, u_minus, 1.02, 0.05, GasLaw::new(1.0, gamma).unwrap()).unwrap()
    }

    #[test]
    fn map_vanishes_without_flux() {
        let g = RadialGrid::build(100.0, None, 32).unwrap();
        let eta: Vec<f64> = g.nodes().iter().map(|r| 0.01 / r).collect();
        let out = picard_map(g.nodes(), &eta, &cfg(2, 1.4, -0.05), 0.0).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn map_of_zero_matches_closed_form() {
        // n=2, gamma=1, A=1, v+=1: int_r^inf eps^2/(s^3 - eps^2 s) ds = -ln(1 - eps^2/r^2)/2
        let c = cfg(2, 1.0, -0.05);
        let eps: f64 = 0.05;
        let g = RadialGrid::build(1000.0, None, 2048).unwrap();
        let out = picard_map(g.nodes(), &vec![0.0; g.len()], &c, eps).unwrap();
        let exact = |r: f64| -0.5 * (1.0 - eps * eps / (r * r)).ln();
        assert!((out[0] - 1.25e-3).abs() < 2e-6);
        for (r, v) in g.nodes().iter().zip(&out) {
            assert!((v - exact(*r)).abs() <= 1e-5 * exact(*r), "r={r}");
        }
        let tail: Vec<f64> = g.nodes().iter().zip(&out).filter(|(r, _)| **r >= 10.0).map(|(r, v)| v * r * r).collect();
        let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi / lo < 1.01);
    }

    #[test]
    fn map_rejects_large_and_supersonic_states() {
        let g = RadialGrid::build(100.0, None, 32).unwrap();
        let c = cfg(2, 1.4, -0.05);
        let big = vec![0.6; g.len()];
        assert!(matches!(picard_map(g.nodes(), &big, &c, 0.05), Err(Error::Divergence { .. })));
        // |p~'(1)| = 1.4 < eps^2 for eps = 1.5
        assert!(matches!(
            picard_map(g.nodes(), &vec![0.0; g.len()], &c, 1.5),
            Err(Error::Supersonic { .. })
        ));
    }

    #[test]
    fn trivial_state() {
        let g = RadialGrid::build(100.0, None, 32).unwrap();
        let sol = solve_euler(&cfg(2, 1.4, 0.0), &g, &ToleranceSet::default()).unwrap();
        assert!(sol.eta.iter().all(|&x| x == 0.0));
        assert_eq!(sol.epsilon, 0.0);
        assert_eq!(sol.iterations, 1);
        assert_eq!(bernoulli_defect(&sol, &cfg(2, 1.4, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn outflow_solution_is_positive_and_self_consistent() {
        let c = cfg(2, 1.4, -0.05);
        let g = RadialGrid::build(1000.0, None, 256).unwrap();
        let sol = solve_euler(&c, &g, &ToleranceSet::default()).unwrap();
        assert!(sol.eta.iter().all(|&x| x > 0.0));
        assert!((sol.epsilon - c.u_minus / (c.v_plus + sol.eta[0])).abs() < 1e-15);
        assert!(sol.final_update_norm < 1e-10);
    }

    #[test]
    fn slope_matches_centered_differences() {
        let c = cfg(2, 1.4, -0.05);
        let g = RadialGrid::build(1000.0, None, 1024).unwrap();
        let sol = solve_euler(&c, &g, &ToleranceSet::default()).unwrap();
        let r = g.nodes();
        for i in (1..g.len() - 1).step_by(97) {
            let fd = (sol.eta[i + 1] - sol.eta[i - 1]) / (r[i + 1] - r[i - 1]);
            let h = r[i + 1] - r[i - 1];
            let scale = sol.eta_slope[i].abs();
            assert!((fd - sol.eta_slope[i]).abs() < 10.0 * scale * (h / r[i]).powi(2) + 1e-12 * scale, "r={}", r[i]);
        }
    }

    #[test]
    fn bernoulli_detects_perturbation() {
        let c = cfg(2, 1.4, -0.05);
        let g = RadialGrid::build(1000.0, None, 2048).unwrap();
        let mut sol = solve_euler(&c, &g, &ToleranceSet::default()).unwrap();
        assert!(bernoulli_defect(&sol, &c).unwrap() < 1e-8);
        sol.eta[17] += 1e-4;
        assert!(bernoulli_defect(&sol, &c).unwrap() >= 1e-5);
    }

    #[test]
    fn large_flux_is_rejected() {
        let c = cfg(2, 1.0, -0.9);
        let g = RadialGrid::build(100.0, None, 32).unwrap();
        let err = solve_euler(&c, &g, &ToleranceSet::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Supersonic { .. } | Error::SmallnessViolation { .. } | Error::Divergence { .. } | Error::NoConvergence { .. }
        ), "{err:?}");
    }
}
