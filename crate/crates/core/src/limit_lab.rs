//! Inviscid-limit and decay-rate studies built on the three solvers.
//!
//! Each study solves the problem for a list of viscosities, measures
//! node-wise sup-norm errors against the inviscid reference and fits a
//! power law. The inviscid profile is solved once on the union of all the
//! viscous grids so every comparison is an exact node lookup.

use rayon::prelude::*;

use crate::boundary_layer::{solve_bl, BlProfile};
use crate::error::{Error, Result};
use crate::euler::{solve_euler, EulerSolution};
use crate::gas::{FlowConfig, Regime};
use crate::ns::{reconstruct_state, solve_ns, NsSolution};
use crate::numerics::{fit_loglog, LogLogFit, RadialGrid, ToleranceSet, DEFAULT_POINTS_PER_DECADE};
use crate::profile::{RadialProfile, SampledProfile};

pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_R_MAX: f64 = 1000.0;
/// Minimum number of viscosities in an outflow sweep.
const MIN_OUTFLOW_SWEEP: usize = 4;
/// Relative tolerance of a decay exponent.
const DECAY_WINDOW: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct StudySettings {
    pub r_max: f64,
    pub points_per_decade: usize,
    pub tol: ToleranceSet,
    /// Worker threads for independent solves; `None` uses every core.
    pub workers: Option<usize>,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            r_max: DEFAULT_R_MAX,
            points_per_decade: DEFAULT_POINTS_PER_DECADE,
            tol: ToleranceSet::default(),
            workers: None,
        }
    }
}

/// A fitted power law `error ~ C * param^slope` and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub parameter_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub fit: LogLogFit,
    pub claim: String,
    /// Accepted slopes, inclusive. Use an infinite end for one-sided claims.
    pub window: (f64, f64),
    pub pass: bool,
}

impl RateReport {
    pub fn new(parameter_values: Vec<f64>, errors: Vec<f64>, claim: impl Into<String>, window: (f64, f64)) -> Result<Self> {
        let claim = claim.into();
        if parameter_values.len() != errors.len() {
            return Err(Error::invalid("parameter and error lists differ in length"));
        }
        if let Some(bad) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InsufficientSignal(format!(
                "{claim}: nonpositive or non-finite error {bad:e}, nothing to fit"
            )));
        }
        let points: Vec<(f64, f64)> = parameter_values.iter().copied().zip(errors.iter().copied()).collect();
        let fit = fit_loglog(&points)?;
        let pass = fit.slope >= window.0 && fit.slope <= window.1;
        Ok(Self {
            parameter_values,
            errors,
            fit,
            claim,
            window,
            pass,
        })
    }
}

/// Largest `|a - b|` over the nodes inside `window` (inclusive).
pub fn sup_diff(nodes: &[f64], a: &[f64], b: &[f64], window: (f64, f64)) -> Result<f64> {
    if a.len() != nodes.len() || b.len() != nodes.len() {
        return Err(Error::invalid("profiles do not match the node list"));
    }
    let mut found = false;
    let mut worst = 0.0f64;
    for ((&r, x), y) in nodes.iter().zip(a).zip(b) {
        if r >= window.0 && r <= window.1 {
            found = true;
            worst = worst.max((x - y).abs());
        }
    }
    if !found {
        return Err(Error::invalid(format!(
            "window [{}, {}] contains no nodes",
            window.0, window.1
        )));
    }
    Ok(worst)
}

/// Samples of `profile` at the nodes of `grid`, which must be a subset of
/// the profile's own nodes.
pub fn restrict<P: RadialProfile + ?Sized>(profile: &P, grid: &RadialGrid) -> Result<SampledProfile> {
    let eta = grid
        .nodes()
        .iter()
        .map(|&r| {
            profile
                .grid()
                .index_of(r)
                .map(|i| profile.eta()[i])
                .ok_or_else(|| Error::invalid(format!("node r = {r} missing from the source grid")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledProfile {
        grid: grid.clone(),
        eta,
        epsilon: profile.epsilon(),
    })
}

/// `eta_E(r) + eta_B((r - 1)/mu) - eta_E(1)` on a viscous grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeProfile {
    pub grid: RadialGrid,
    pub eta_comp: Vec<f64>,
    pub mu: f64,
    pub epsilon: f64,
}

impl RadialProfile for CompositeProfile {
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn eta(&self) -> &[f64] {
        &self.eta_comp
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

pub fn composite_profile(euler: &EulerSolution, layer: &BlProfile, grid: &RadialGrid, mu: f64) -> Result<CompositeProfile> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    let outer = restrict(euler, grid)?;
    let eta_comp = grid
        .nodes()
        .iter()
        .zip(&outer.eta)
        .map(|(&r, &e)| (e - layer.eta_e_at_1) + layer.eta_b_at((r - 1.0) / mu))
        .collect();
    Ok(CompositeProfile {
        grid: grid.clone(),
        eta_comp,
        mu,
        epsilon: layer.epsilon,
    })
}

fn check_mu_list(mu_list: &[f64], min_len: usize) -> Result<()> {
    if mu_list.len() < min_len {
        return Err(Error::invalid(format!(
            "need at least {min_len} viscosities, got {}",
            mu_list.len()
        )));
    }
    if let Some(bad) = mu_list.iter().find(|m| !(**m > 0.0 && **m <= 1.0)) {
        return Err(Error::invalid(format!("viscosity {bad} outside (0, 1]")));
    }
    if mu_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("viscosities must be strictly decreasing"));
    }
    Ok(())
}

/// Runs `job` for every viscosity on a bounded pool and returns the results
/// in input order. The first failure in that order is reported.
fn sweep<T, F>(mu_list: &[f64], workers: Option<usize>, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidState(format!("worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| mu_list.par_iter().map(|&mu| job(mu).map_err(|e| e.at_mu(mu))).collect());
    results.into_iter().collect()
}

fn grids_for(mu_list: &[f64], settings: &StudySettings) -> Result<(Vec<RadialGrid>, RadialGrid)> {
    let grids = mu_list
        .iter()
        .map(|&mu| RadialGrid::build(settings.r_max, Some(mu), settings.points_per_decade))
        .collect::<Result<Vec<_>>>()?;
    let union = RadialGrid::union(grids.iter())?;
    Ok((grids, union))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutflowStudy {
    /// `sup |eta - eta_E|` against viscosity.
    pub eta: RateReport,
    /// `sup |u - u_E|` against viscosity.
    pub velocity: RateReport,
}

impl OutflowStudy {
    pub fn pass(&self) -> bool {
        self.eta.pass && self.velocity.pass
    }
}

pub fn outflow_limit_study(base: &FlowConfig, mu_list: &[f64], settings: &StudySettings) -> Result<OutflowStudy> {
    base.validate()?;
    if base.regime() == Regime::Inflow {
        return Err(Error::InvalidRegime("outflow study needs u_- <= 0".into()));
    }
    check_mu_list(mu_list, MIN_OUTFLOW_SWEEP)?;
    let (grids, union) = grids_for(mu_list, settings)?;
    let euler = solve_euler(base, &union, &settings.tol)?;
    let errors = sweep(mu_list, settings.workers, |mu| {
        let config = base.with_mu(mu)?;
        let grid = &grids[mu_list.iter().position(|&m| m == mu).unwrap()];
        let ns = solve_ns(&config, grid, &settings.tol)?;
        let outer = restrict(&euler, grid)?;
        let full = (1.0, settings.r_max);
        let d_eta = sup_diff(grid.nodes(), &ns.eta, &outer.eta, full)?;
        let u_ns = reconstruct_state(&ns, &config)?.u;
        let u_e = reconstruct_state(&outer, &config)?.u;
        let d_u = sup_diff(grid.nodes(), &u_ns, &u_e, full)?;
        Ok((d_eta, d_u))
    })?;
    let (e_eta, e_u): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
    Ok(OutflowStudy {
        eta: RateReport::new(mu_list.to_vec(), e_eta, "outflow: sup|eta - eta_E| = O(mu)", (0.9, 1.1))?,
        velocity: RateReport::new(mu_list.to_vec(), e_u, "outflow: sup|u - u_E| = O(mu)", (0.9, 1.1))?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflowStudy {
    pub alpha: f64,
    /// `sup |eta - eta_E|` on `[1 + mu^alpha, R_max]`.
    pub far_field: RateReport,
    /// `sup |eta - eta_comp|` on `[1, 1 + mu^alpha]`.
    pub layer: RateReport,
    /// `sup |eta - eta_comp|` on `[1, R_max]`.
    pub global: RateReport,
    pub boundary_layer: BlProfile,
}

impl InflowStudy {
    pub fn pass(&self) -> bool {
        self.global.pass
    }
}

/// Errors of one viscous inflow solve against the inviscid references.
#[derive(Debug, Clone, PartialEq)]
pub struct InflowErrors {
    pub far_field: f64,
    pub layer: f64,
    pub global: f64,
}

pub fn inflow_errors(ns: &NsSolution, euler: &EulerSolution, layer: &BlProfile, alpha: f64) -> Result<InflowErrors> {
    let grid = &ns.grid;
    let nodes = grid.nodes();
    let outer = restrict(euler, grid)?;
    let comp = composite_profile(euler, layer, grid, ns.mu)?;
    let split = 1.0 + ns.mu.powf(alpha);
    let r_max = grid.r_max();
    Ok(InflowErrors {
        far_field: sup_diff(nodes, &ns.eta, &outer.eta, (split, r_max))?,
        layer: sup_diff(nodes, &ns.eta, &comp.eta_comp, (1.0, split))?,
        global: sup_diff(nodes, &ns.eta, &comp.eta_comp, (1.0, r_max))?,
    })
}

pub fn inflow_limit_study(base: &FlowConfig, mu_list: &[f64], alpha: f64, settings: &StudySettings) -> Result<InflowStudy> {
    base.validate()?;
    if base.regime() != Regime::Inflow {
        return Err(Error::InvalidRegime(format!(
            "inflow study needs u_- > 0, got {}",
            base.regime()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    check_mu_list(mu_list, 2)?;
    let (grids, union) = grids_for(mu_list, settings)?;
    let euler = solve_euler(base, &union, &settings.tol)?;
    let layer = solve_bl(base, euler.eta[0], &settings.tol)?;
    let errors = sweep(mu_list, settings.workers, |mu| {
        let config = base.with_mu(mu)?;
        let grid = &grids[mu_list.iter().position(|&m| m == mu).unwrap()];
        let ns = solve_ns(&config, grid, &settings.tol)?;
        inflow_errors(&ns, &euler, &layer, alpha)
    })?;
    let mus = mu_list.to_vec();
    let pick = |f: fn(&InflowErrors) -> f64| errors.iter().map(f).collect::<Vec<_>>();
    Ok(InflowStudy {
        alpha,
        far_field: RateReport::new(mus.clone(), pick(|e| e.far_field), "inflow far field: sup|eta - eta_E| = O(mu)", (0.9, 1.1))?,
        layer: RateReport::new(mus.clone(), pick(|e| e.layer), "inflow layer: sup|eta - eta_comp| = O(mu^alpha)", (alpha, f64::INFINITY))?,
        global: RateReport::new(mus, pick(|e| e.global), "inflow global: sup|eta - eta_comp| = O(mu^alpha)", (0.8, f64::INFINITY))?,
        boundary_layer: layer,
    })
}

/// Power-law decay of `|values|` on `window`; passes when the fitted
/// exponent is within 5% of `expected_exponent`.
pub fn decay_study(nodes: &[f64], values: &[f64], expected_exponent: f64, window: (f64, f64)) -> Result<RateReport> {
    if nodes.len() != values.len() {
        return Err(Error::invalid("values do not match the node list"));
    }
    let (r, v): (Vec<f64>, Vec<f64>) = nodes
        .iter()
        .zip(values)
        .filter(|(r, _)| **r >= window.0 && **r <= window.1)
        .map(|(&r, &v)| (r, v.abs()))
        .unzip();
    if r.len() < 2 {
        return Err(Error::InsufficientSignal(format!(
            "window [{}, {}] holds {} nodes",
            window.0,
            window.1,
            r.len()
        )));
    }
    let slack = DECAY_WINDOW * expected_exponent.abs();
    RateReport::new(
        r,
        v,
        format!("decay exponent {expected_exponent}"),
        (expected_exponent - slack, expected_exponent + slack),
    )
}
