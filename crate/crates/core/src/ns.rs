//! Stationary viscous flow in the volume deviation `eta = v - v+`:
//!
//! ```text
//! eta' = r^{n-1}/(eps mu) (p~(v+ + eta) - p~(v+)) + eps v+/(2 mu r^{n-1})
//!        + eps eta/(mu r^{n-1}) - eps (n-1) r^{n-1}/mu * T(r),
//! T(r) = int_r^inf eta(s)/s^{2n-1} ds.
//! ```
//!
//! The nonlocal term is frozen for a sweep, which leaves a local stiff ODE.
//! Inflow integrates forward from `eta(1) = v_- - v+`; outflow integrates
//! backward from the far-field balance at `R_max`. Both directions are the
//! contracting ones for their sign of `eps`.

use crate::error::{Error, Result};
use crate::gas::{mass_flux, FlowConfig, Regime};
use crate::numerics::{
    integrate_stiff_scalar_ode, tail_integral, tail_integral_corrected, RadialGrid, ToleranceSet,
};
use crate::profile::{sup_abs_diff, FlowState, RadialProfile};

const GROWTH_LIMIT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct NsSolution {
    pub grid: RadialGrid,
    pub eta: Vec<f64>,
    /// `eta'` from the right-hand side evaluated on the converged profile.
    pub eta_slope: Vec<f64>,
    /// Trapezoid nonlocal term `T(r)` of the converged profile.
    pub nonlocal: Vec<f64>,
    pub epsilon: f64,
    pub mu: f64,
    pub regime: Regime,
    pub outer_iterations: usize,
    pub conserved_defect_max: f64,
    /// Sup-norm of every outer update.
    pub update_history: Vec<f64>,
}

impl RadialProfile for NsSolution {
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

/// Right-hand side of the first-order viscous equation at one point, given
/// the nonlocal term `nonlocal = T(r)`.
pub fn ns_rhs(r: f64, eta: f64, nonlocal: f64, config: &FlowConfig, epsilon: f64) -> Result<f64> {
    if epsilon == 0.0 {
        return Err(Error::invalid("the viscous right-hand side needs a nonzero mass flux"));
    }
    let v = config.v_plus + eta;
    if !(v > 0.0) {
        return Err(Error::Vacuum { r, v });
    }
    let mu = config.mu;
    let rn = r.powi(config.n as i32 - 1);
    let dp = config.gas.p_tilde_increment(config.v_plus, eta)?;
    Ok(rn / (epsilon * mu) * dp + epsilon * config.v_plus / (2.0 * mu * rn) + epsilon * eta / (mu * rn)
        - epsilon * config.nm1() * rn / mu * nonlocal)
}

fn ns_jacobian(r: f64, eta: f64, config: &FlowConfig, epsilon: f64) -> f64 {
    let rn = r.powi(config.n as i32 - 1);
    let v = config.v_plus + eta;
    match config.gas.p_tilde_prime(v) {
        Ok(dp) => rn * dp / (epsilon * config.mu) + epsilon / (config.mu * rn),
        Err(_) => f64::NAN,
    }
}

/// Far-field value from the leading balance
/// `eta ~ -eps^2 v+ / (2 p~'(v+)) r^{-2(n-1)}`.
pub fn far_field_closure(config: &FlowConfig, epsilon: f64, r: f64) -> Result<f64> {
    let dp = config.gas.p_tilde_prime(config.v_plus)?;
    Ok(-epsilon * epsilon * config.v_plus / (2.0 * dp) * r.powi(-2 * (config.n as i32 - 1)))
}

/// Exponent of the nonlocal integrand `eta/s^{2n-1}` beyond `R_max`.
fn nonlocal_tail_exponent(n: u32) -> f64 {
    (4 * n - 3) as f64
}

/// Trapezoid `T(r_i) = int_{r_i}^inf eta/s^{2n-1}` on the grid.
pub fn nonlocal_term(nodes: &[f64], eta: &[f64], n: u32) -> Result<Vec<f64>> {
    let p = (2 * n - 1) as i32;
    let f: Vec<f64> = nodes.iter().zip(eta).map(|(s, e)| e / s.powi(p)).collect();
    tail_integral(nodes, &f, nonlocal_tail_exponent(n))
}

/// Cubic Hermite interpolant of `T` using `T' = -eta/r^{2n-1}` at the nodes.
struct NonlocalInterp<'a> {
    nodes: &'a [f64],
    t: Vec<f64>,
    dt: Vec<f64>,
}

impl<'a> NonlocalInterp<'a> {
    fn new(nodes: &'a [f64], eta: &[f64], n: u32) -> Result<Self> {
        let t = nonlocal_term(nodes, eta, n)?;
        let p = (2 * n - 1) as i32;
        let dt = nodes.iter().zip(eta).map(|(s, e)| -e / s.powi(p)).collect();
        Ok(NonlocalInterp { nodes, t, dt })
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let h = b - a;
        let s = ((r - a) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.t[i] + h10 * h * self.dt[i] + h01 * self.t[i + 1] + h11 * h * self.dt[i + 1]
    }
}

/// Solve the local ODE for one frozen nonlocal term.
fn sweep(config: &FlowConfig, nodes: &[f64], eta_prev: &[f64], epsilon: f64, tol: &ToleranceSet) -> Result<Vec<f64>> {
    let interp = NonlocalInterp::new(nodes, eta_prev, config.n)?;
    let rhs = |r: f64, eta: f64| ns_rhs(r, eta, interp.eval(r), config, epsilon).unwrap_or(f64::NAN);
    let jac = |r: f64, eta: f64| ns_jacobian(r, eta, config, epsilon);
    let eta = match config.regime() {
        Regime::Inflow => integrate_stiff_scalar_ode(rhs, jac, config.eta_minus(), nodes, tol)?,
        Regime::Outflow => {
            let rev: Vec<f64> = nodes.iter().rev().copied().collect();
            let start = far_field_closure(config, epsilon, *rev.first().unwrap())?;
            let mut out = integrate_stiff_scalar_ode(rhs, jac, start, &rev, tol)?;
            out.reverse();
            out
        }
        Regime::Trivial => vec![0.0; nodes.len()],
    };
    if let Some((r, e)) = nodes.iter().zip(&eta).find(|(_, e)| !(config.v_plus + **e > 0.0)) {
        return Err(Error::Vacuum {
            r: *r,
            v: config.v_plus + e,
        });
    }
    Ok(eta)
}

pub fn solve_ns(config: &FlowConfig, grid: &RadialGrid, tol: &ToleranceSet) -> Result<NsSolution> {
    config.validate()?;
    tol.validate()?;
    let nodes = grid.nodes();
    let regime = config.regime();
    if regime == Regime::Trivial {
        let zeros = vec![0.0; nodes.len()];
        return Ok(NsSolution {
            grid: grid.clone(),
            eta: zeros.clone(),
            eta_slope: zeros.clone(),
            nonlocal: zeros,
            epsilon: 0.0,
            mu: config.mu,
            regime,
            outer_iterations: 1,
            conserved_defect_max: 0.0,
            update_history: Vec::new(),
        });
    }

    let mut eta = vec![0.0; nodes.len()];
    let mut epsilon = mass_flux(config, 0.0)?;
    let mut history: Vec<f64> = Vec::new();
    let mut growing = 0;
    let mut iterations = 0;
    loop {
        let next = sweep(config, nodes, &eta, epsilon, tol)?;
        iterations += 1;
        let update = sup_abs_diff(&next, &eta);
        if let Some(&prev) = history.last() {
            growing = if update > prev { growing + 1 } else { 0 };
        }
        history.push(update);
        eta = next;
        epsilon = mass_flux(config, eta[0])?;
        if growing >= GROWTH_LIMIT {
            return Err(Error::SmallnessViolation {
                sweeps: growing,
                last: update,
            });
        }
        if update < tol.picard_tol {
            break;
        }
        if iterations >= tol.max_picard_iters {
            return Err(Error::NoConvergence {
                iterations,
                last: update,
            });
        }
    }

    let nonlocal = nonlocal_term(nodes, &eta, config.n)?;
    let eta_slope = nodes
        .iter()
        .zip(&eta)
        .zip(&nonlocal)
        .map(|((&r, &e), &t)| ns_rhs(r, e, t, config, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let mut sol = NsSolution {
        grid: grid.clone(),
        eta,
        eta_slope,
        nonlocal,
        epsilon,
        mu: config.mu,
        regime,
        outer_iterations: iterations,
        conserved_defect_max: 0.0,
        update_history: history,
    };
    sol.conserved_defect_max = conserved_defect(&sol, config)?;
    Ok(sol)
}

/// Pointwise residual of the conserved form
///
/// ```text
/// eps mu eta'/r^{n-1} - p~(v+ + eta) - eps^2 v+/(2 r^{2(n-1)}) - eps^2 eta/r^{2(n-1)}
///     + eps^2 (n-1) T(r) + p~(v+) = 0
/// ```
///
/// with `eta'` the stored slope and `T` recomputed from the stored profile by
/// the endpoint-corrected (fourth-order) rule.
pub fn conserved_defect_profile(sol: &NsSolution, config: &FlowConfig) -> Result<Vec<f64>> {
    let nodes = sol.grid.nodes();
    if sol.epsilon == 0.0 {
        return Ok(vec![0.0; nodes.len()]);
    }
    let n = config.n;
    let p = (2 * n - 1) as i32;
    let f: Vec<f64> = nodes.iter().zip(&sol.eta).map(|(s, e)| e / s.powi(p)).collect();
    let df: Vec<f64> = nodes
        .iter()
        .zip(&sol.eta)
        .zip(&sol.eta_slope)
        .map(|((s, e), de)| de / s.powi(p) - p as f64 * e / s.powi(p + 1))
        .collect();
    let t = tail_integral_corrected(nodes, &f, &df, nonlocal_tail_exponent(n))?;
    let eps = sol.epsilon;
    let eps2 = eps * eps;
    let nm1 = config.nm1();
    nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let rn = r.powi(n as i32 - 1);
            let r2n = rn * rn;
            let eta = sol.eta[i];
            let dp = config.gas.p_tilde_increment(config.v_plus, eta)?;
            let q = eps * sol.mu * sol.eta_slope[i] / rn - dp - eps2 * config.v_plus / (2.0 * r2n)
                - eps2 * eta / r2n
                + eps2 * nm1 * t[i];
            Ok(q.abs())
        })
        .collect()
}

pub fn conserved_defect(sol: &NsSolution, config: &FlowConfig) -> Result<f64> {
    Ok(conserved_defect_profile(sol, config)?.into_iter().fold(0.0, f64::max))
}

/// Density `1/(v+ + eta)` and velocity from the regime's flux relation:
/// `u = u_- (v+ + eta)/(v_- r^{n-1})` for inflow,
/// `u = u_- (v+ + eta)/((v+ + eta(1)) r^{n-1})` for outflow.
pub fn reconstruct_state<P: RadialProfile + ?Sized>(profile: &P, config: &FlowConfig) -> Result<FlowState> {
    let nodes = profile.nodes();
    let eta = profile.eta();
    let denom = match config.regime() {
        Regime::Inflow => config.v_minus,
        Regime::Outflow => config.v_plus + eta[0],
        Regime::Trivial => 1.0,
    };
    let mut rho = Vec::with_capacity(nodes.len());
    let mut u = Vec::with_capacity(nodes.len());
    for (&r, &e) in nodes.iter().zip(eta) {
        let v = config.v_plus + e;
        if !(v > 0.0) {
            return Err(Error::Vacuum { r, v });
        }
        rho.push(1.0 / v);
        u.push(config.u_minus * v / (denom * r.powi(config.n as i32 - 1)));
    }
    Ok(FlowState { rho, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasLaw;

    fn cfg(gamma: f64, u_minus: f64, v_minus: f64, mu: f64) -> FlowConfig {
        FlowConfig::new(2, 1.0, u_minus, v_minus, mu, GasLaw::new(1.0, gamma).unwrap()).unwrap()
    }

    #[test]
    fn rhs_at_rest_state() {
        let c = cfg(1.4, 0.05, 1.0, 0.1);
        let v = ns_rhs(1.0, 0.0, 0.0, &c, 0.05).unwrap();
        assert!((v - 0.05 * 1.0 / (2.0 * 0.1)).abs() < 1e-15);
    }

    #[test]
    fn rhs_matches_term_by_term_evaluation() {
        // n=2, A=1, gamma=1, v+=1, eps=0.05, mu=0.1, r=2, eta=0.01, T=0.001
        let c = cfg(1.0, 0.05, 1.0, 0.1);
        let (r, eta, t, eps, mu) = (2.0f64, 0.01f64, 0.001f64, 0.05f64, 0.1f64);
        let pressure = r / (eps * mu) * (1.0 / (1.0 + eta) - 1.0);
        let geometric = eps * 1.0 / (2.0 * mu) / r;
        let linear = eps * eta / (mu * r);
        let nonlocal = -eps * 1.0 * r / mu * t;
        let expect = pressure + geometric + linear + nonlocal;
        let got = ns_rhs(r, eta, t, &c, eps).unwrap();
        assert!((got - expect).abs() < 1e-13 * expect.abs().max(1.0), "{got} vs {expect}");
    }

    #[test]
    fn rhs_rejects_vacuum_and_zero_flux() {
        let c = cfg(1.4, 0.05, 1.0, 0.1);
        assert!(matches!(ns_rhs(1.0, -1.0, 0.0, &c, 0.05), Err(Error::Vacuum { .. })));
        assert!(ns_rhs(1.0, 0.0, 0.0, &c, 0.0).is_err());
    }

    #[test]
    fn trivial_state_is_exact() {
        let c = cfg(1.4, 0.0, 1.0, 0.1);
        let g = RadialGrid::build(100.0, Some(0.1), 32).unwrap();
        let sol = solve_ns(&c, &g, &ToleranceSet::default()).unwrap();
        assert!(sol.eta.iter().all(|&x| x == 0.0));
        let st = reconstruct_state(&sol, &c).unwrap();
        assert!(st.rho.iter().all(|&x| x == 1.0));
        assert!(st.u.iter().all(|&x| x == 0.0));
        assert_eq!(conserved_defect(&sol, &c).unwrap(), 0.0);
    }

    #[test]
    fn hermite_nonlocal_interpolant_hits_nodes() {
        let g = RadialGrid::build(100.0, None, 32).unwrap();
        let eta: Vec<f64> = g.nodes().iter().map(|r| 1e-3 / (r * r)).collect();
        let it = NonlocalInterp::new(g.nodes(), &eta, 2).unwrap();
        for (i, &r) in g.nodes().iter().enumerate() {
            assert_eq!(it.eval(r), it.t[i]);
        }
    }
}
