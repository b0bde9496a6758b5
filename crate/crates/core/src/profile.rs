use crate::numerics::RadialGrid;

/// A sampled volume deviation `eta(r)` together with its mass flux.
pub trait RadialProfile {
    fn grid(&self) -> &RadialGrid;
    fn eta(&self) -> &[f64];
    fn epsilon(&self) -> f64;

    fn nodes(&self) -> &[f64] {
        self.grid().nodes()
    }
}

/// A profile held by value, e.g. a solution restricted to a coarser grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub grid: RadialGrid,
    pub eta: Vec<f64>,
    pub epsilon: f64,
}

impl RadialProfile for SampledProfile {
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

/// Density and velocity sampled on a profile's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

/// `sup_r r^{2(n-1)} |eta(r)|`, the weighted norm of the Euler iteration.
pub fn weighted_norm(nodes: &[f64], eta: &[f64], n: u32) -> f64 {
    let k = 2 * (n as i32 - 1);
    nodes
        .iter()
        .zip(eta)
        .map(|(r, e)| r.powi(k) * e.abs())
        .fold(0.0, f64::max)
}

pub(crate) fn sup_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
