use crate::error::{Error, Result};

/// Uniform layer spacing is `mu / LAYER_STEPS_PER_MU`.
pub const LAYER_STEPS_PER_MU: usize = 20;
/// The uniform layer sub-grid covers `[1, 1 + LAYER_WIDTH_IN_MU * mu]`.
pub const LAYER_WIDTH_IN_MU: usize = 10;

/// Far-field density used when a caller does not choose one.
pub const DEFAULT_POINTS_PER_DECADE: usize = 2048;

const MIN_R_MAX: f64 = 100.0;
const MIN_POINTS_PER_DECADE: usize = 16;

/// Strictly increasing radial nodes on `[1, R_max]`.
///
/// The far field is a geometric lattice `10^(k/ppd)` anchored at `r = 1`, so
/// grids built with the same `ppd` share every far-field node regardless of
/// the viscosity used for the boundary sub-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    boundary_refinement: f64,
}

impl RadialGrid {
    pub fn build(r_max: f64, mu: Option<f64>, points_per_decade: usize) -> Result<Self> {
        Self::build_refined(r_max, mu, points_per_decade, LAYER_STEPS_PER_MU)
    }

    /// Like [`RadialGrid::build`] with `layer_steps_per_mu` uniform cells per
    /// unit of `mu` on the boundary sub-grid (at least the default 20).
    pub fn build_refined(
        r_max: f64,
        mu: Option<f64>,
        points_per_decade: usize,
        layer_steps_per_mu: usize,
    ) -> Result<Self> {
        if !r_max.is_finite() || r_max < MIN_R_MAX {
            return Err(Error::invalid(format!(
                "R_max must be finite and at least {MIN_R_MAX}, got {r_max}"
            )));
        }
        if points_per_decade < MIN_POINTS_PER_DECADE {
            return Err(Error::invalid(format!(
                "points_per_decade must be at least {MIN_POINTS_PER_DECADE}, got {points_per_decade}"
            )));
        }
        if layer_steps_per_mu < LAYER_STEPS_PER_MU {
            return Err(Error::invalid(format!(
                "layer_steps_per_mu must be at least {LAYER_STEPS_PER_MU}, got {layer_steps_per_mu}"
            )));
        }
        let mut nodes = vec![1.0];
        let mut layer_end = 1.0;
        if let Some(mu) = mu {
            if !(mu.is_finite() && mu > 0.0 && mu <= 1.0) {
                return Err(Error::invalid(format!("mu must lie in (0, 1], got {mu}")));
            }
            let cells = LAYER_WIDTH_IN_MU * layer_steps_per_mu;
            for j in 1..=cells {
                nodes.push(1.0 + j as f64 * mu / layer_steps_per_mu as f64);
            }
            layer_end = *nodes.last().unwrap();
        }
        let ppd = points_per_decade as f64;
        let mut k = 1usize;
        loop {
            let r = 10f64.powf(k as f64 / ppd);
            if r >= r_max * (1.0 - 1e-12) {
                break;
            }
            if r > layer_end {
                nodes.push(r);
            }
            k += 1;
        }
        nodes.push(r_max);
        Self::from_nodes(nodes)
    }

    /// Validates an explicit node sequence.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("a grid needs at least two nodes"));
        }
        if nodes[0] != 1.0 {
            return Err(Error::invalid(format!("first node must be 1, got {}", nodes[0])));
        }
        if nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("grid nodes must be finite"));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "grid nodes must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let r_max = *nodes.last().unwrap();
        if r_max < MIN_R_MAX {
            return Err(Error::invalid(format!(
                "R_max must be at least {MIN_R_MAX}, got {r_max}"
            )));
        }
        let boundary_refinement = nodes[1] - nodes[0];
        Ok(RadialGrid {
            nodes,
            boundary_refinement,
        })
    }

    /// Sorted union of several grids; all must end at the same `R_max`.
    pub fn union<'a>(grids: impl IntoIterator<Item = &'a RadialGrid>) -> Result<Self> {
        let mut all: Vec<f64> = Vec::new();
        let mut r_max = None;
        for g in grids {
            match r_max {
                None => r_max = Some(g.r_max()),
                Some(r) if r != g.r_max() => {
                    return Err(Error::invalid("cannot merge grids with different R_max"))
                }
                _ => {}
            }
            all.extend_from_slice(&g.nodes);
        }
        all.sort_by(|a, b| a.total_cmp(b));
        all.dedup();
        Self::from_nodes(all)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Spacing of the first cell at `r = 1`.
    pub fn boundary_refinement(&self) -> f64 {
        self.boundary_refinement
    }

    /// Index of a node that equals `r` bit for bit.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        self.nodes.binary_search_by(|x| x.total_cmp(&r)).ok()
    }

    /// Largest spacing among cells lying inside `[lo, hi]`.
    pub fn max_spacing_in(&self, lo: f64, hi: f64) -> f64 {
        self.nodes
            .windows(2)
            .filter(|w| w[0] >= lo && w[1] <= hi)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}
