//! Adaptive scalar ODE integration through a prescribed sequence of output
//! nodes. Steps never cross a node, so right-hand sides that are only
//! piecewise smooth between nodes are handled without loss of order.

use super::ToleranceSet;
use crate::error::{Error, Result};

const MAX_STEPS: usize = 50_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

// Dormand-Prince 5(4)
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

// L-stable, stiffly accurate SDIRK of order 4 with an embedded order-3 solution.
const SD_GAMMA: f64 = 0.25;
const SD_C: [f64; 5] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];
const SD_A: [[f64; 5]; 5] = [
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.25, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.25, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25],
];
const SD_B_LOW: [f64; 5] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

fn check_nodes(nodes: &[f64]) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::invalid("need at least two output nodes"));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("output nodes must be finite"));
    }
    let dir = (nodes[1] - nodes[0]).signum();
    if dir == 0.0 || nodes.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(Error::invalid(
            "output nodes must be strictly monotone (x0 != x1)",
        ));
    }
    Ok(dir)
}

fn error_scale(tol: &ToleranceSet, y: f64, y_new: f64) -> f64 {
    tol.ode_abs_tol + tol.ode_rel_tol * y.abs().max(y_new.abs())
}

fn initial_step(f0: f64, y0: f64, span: f64, tol: &ToleranceSet, order: i32) -> f64 {
    let sc = error_scale(tol, y0, y0);
    let d0 = y0.abs() / sc;
    let d1 = f0.abs() / sc;
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    let h = h.min(span);
    // ensure a cautious first attempt when the derivative is large
    let h_tol = (tol.ode_rel_tol.max(1e-16)).powf(1.0 / (order as f64 + 1.0)) * span;
    h.min(h_tol.max(1e-6 * span))
}

/// A step clipped to reach a node must not shrink the controller's estimate.
fn next_step(h_taken: f64, h_planned: f64, factor: f64) -> f64 {
    if h_taken < h_planned {
        h_planned.max(h_taken * factor)
    } else {
        h_taken * factor
    }
}

fn step_underflow(x: f64, h: f64) -> bool {
    h.abs() <= 1e-14 * x.abs().max(1.0)
}

/// Explicit Dormand-Prince 5(4) integration of `y' = rhs(x, y)` from
/// `nodes[0]` with value `y0`, returning the solution at every node.
///
/// Local error per step is held below `ode_rel_tol * |y| + ode_abs_tol`.
/// The nodes may run in either direction.
pub fn integrate_scalar_ode<F>(rhs: F, y0: f64, nodes: &[f64], tol: &ToleranceSet) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
{
    let dir = check_nodes(nodes)?;
    if !y0.is_finite() {
        return Err(Error::invalid("initial value must be finite"));
    }
    let span = (nodes[nodes.len() - 1] - nodes[0]).abs();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(y0);

    let mut x = nodes[0];
    let mut y = y0;
    let mut f_cur = rhs(x, y);
    if !f_cur.is_finite() {
        return Err(Error::IntegrationFailure {
            at: x,
            reason: "right-hand side is not finite at the initial point".into(),
        });
    }
    let mut h_next = initial_step(f_cur, y, span, tol, 5);
    let mut steps = 0usize;

    for &target in &nodes[1..] {
        while (target - x) * dir > 0.0 {
            let remaining = (target - x).abs();
            let mut h = h_next.min(remaining);
            if remaining - h < 1e-12 * remaining.max(1.0) {
                h = remaining;
            }
            let hs = h * dir;

            let mut k = [0.0f64; 7];
            k[0] = f_cur;
            for i in 1..7 {
                let mut acc = y;
                for j in 0..i {
                    acc += hs * DP_A[i][j] * k[j];
                }
                k[i] = rhs(x + DP_C[i] * hs, acc);
            }
            let mut y_new = y;
            let mut err = 0.0;
            for i in 0..7 {
                y_new += hs * DP_B[i] * k[i];
                err += hs * (DP_B[i] - DP_B_LOW[i]) * k[i];
            }
            let ratio = err.abs() / error_scale(tol, y, y_new);

            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::IntegrationFailure {
                    at: x,
                    reason: "step budget exhausted".into(),
                });
            }
            if ratio.is_finite() && y_new.is_finite() && ratio <= 1.0 {
                x = if h == remaining { target } else { x + hs };
                y = y_new;
                f_cur = k[6];
                let factor = if ratio == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                h_next = next_step(h, h_next, factor);
            } else {
                let factor = if ratio.is_finite() {
                    (SAFETY * ratio.powf(-0.25)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h_next = h * factor;
                if step_underflow(x, h_next) {
                    return Err(Error::IntegrationFailure {
                        at: x,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Adaptive L-stable SDIRK4(3) integration of `y' = rhs(x, y)` for stiff
/// scalar problems. `jac` is `d rhs / d y`. Stage equations are solved by
/// scalar Newton iteration.
pub fn integrate_stiff_scalar_ode<F, J>(
    rhs: F,
    jac: J,
    y0: f64,
    nodes: &[f64],
    tol: &ToleranceSet,
) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
    J: Fn(f64, f64) -> f64,
{
    let dir = check_nodes(nodes)?;
    if !y0.is_finite() {
        return Err(Error::invalid("initial value must be finite"));
    }
    let span = (nodes[nodes.len() - 1] - nodes[0]).abs();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(y0);

    let mut x = nodes[0];
    let mut y = y0;
    let f0 = rhs(x, y);
    if !f0.is_finite() {
        return Err(Error::IntegrationFailure {
            at: x,
            reason: "right-hand side is not finite at the initial point".into(),
        });
    }
    let mut h_next = initial_step(f0, y, span, tol, 4);
    let mut steps = 0usize;

    for &target in &nodes[1..] {
        while (target - x) * dir > 0.0 {
            let remaining = (target - x).abs();
            let mut h = h_next.min(remaining);
            if remaining - h < 1e-12 * remaining.max(1.0) {
                h = remaining;
            }
            let hs = h * dir;

            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::IntegrationFailure {
                    at: x,
                    reason: "step budget exhausted".into(),
                });
            }

            match sdirk_step(&rhs, &jac, x, y, hs, tol) {
                Some((y_new, err)) => {
                    let ratio = err / error_scale(tol, y, y_new);
                    if ratio <= 1.0 {
                        x = if h == remaining { target } else { x + hs };
                        y = y_new;
                        let factor = if ratio == 0.0 {
                            MAX_FACTOR
                        } else {
                            (SAFETY * ratio.powf(-0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
                        };
                        h_next = next_step(h, h_next, factor);
                        continue;
                    }
                    let factor = (SAFETY * ratio.powf(-0.25)).clamp(MIN_FACTOR, 1.0);
                    h_next = h * factor;
                }
                None => h_next = h * 0.25,
            }
            if step_underflow(x, h_next) {
                return Err(Error::IntegrationFailure {
                    at: x,
                    reason: "step size underflow".into(),
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// One SDIRK step; `None` when a stage equation fails to converge.
/// Returns the new value and the filtered local error estimate.
fn sdirk_step<F, J>(rhs: &F, jac: &J, x: f64, y: f64, h: f64, tol: &ToleranceSet) -> Option<(f64, f64)>
where
    F: Fn(f64, f64) -> f64,
    J: Fn(f64, f64) -> f64,
{
    let hg = h * SD_GAMMA;
    let mut k = [0.0f64; 5];
    let mut stage = y;
    for i in 0..5 {
        let xi = x + SD_C[i] * h;
        let mut base = y;
        for j in 0..i {
            base += h * SD_A[i][j] * k[j];
        }
        // Newton on  Y - base - h*gamma*f(xi, Y) = 0
        let mut converged = false;
        for _ in 0..30 {
            let g = stage - base - hg * rhs(xi, stage);
            let dg = 1.0 - hg * jac(xi, stage);
            if !(g.is_finite() && dg.is_finite()) || dg == 0.0 {
                return None;
            }
            let delta = g / dg;
            stage -= delta;
            if delta.abs() <= 1e-3 * error_scale(tol, stage, stage) {
                converged = true;
                break;
            }
        }
        if !converged || !stage.is_finite() {
            return None;
        }
        k[i] = (stage - base) / hg;
    }
    let y_new = stage;
    let mut err = 0.0;
    for i in 0..5 {
        err += h * (SD_A[4][i] - SD_B_LOW[i]) * k[i];
    }
    // damp the estimate along stiff directions
    let filter = 1.0 - hg * jac(x + h, y_new);
    let err = if filter.is_finite() && filter.abs() > 1.0 {
        (err / filter).abs()
    } else {
        err.abs()
    };
    Some((y_new, err))
}
