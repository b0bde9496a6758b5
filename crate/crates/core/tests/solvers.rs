use radialflow::boundary_layer::{a_epsilon, solve_bl};
use radialflow::euler::{bernoulli_defect, picard_map, solve_euler};
use radialflow::gas::mass_flux;
use radialflow::ns::{conserved_defect, reconstruct_state, solve_ns};
use radialflow::numerics::{integrate_scalar_ode, tail_integral, DEFAULT_POINTS_PER_DECADE};
use radialflow::{Error, FlowConfig, GasLaw, RadialGrid, RadialProfile, ToleranceSet};

fn gas() -> GasLaw {
    GasLaw::new(1.0, 1.4).unwrap()
}

fn inflow() -> FlowConfig {
    FlowConfig::new(2, 1.0, 0.05, 1.02, 0.05, gas()).unwrap()
}

fn outflow() -> FlowConfig {
    FlowConfig::new(2, 1.0, -0.05, 1.0, 0.05, gas()).unwrap()
}

fn ns_grid() -> RadialGrid {
    RadialGrid::build(1000.0, Some(0.05), DEFAULT_POINTS_PER_DECADE).unwrap()
}

#[test]
fn euler_map_of_zero_matches_closed_form_isothermal() {
    // n = 2, gamma = 1, A = 1, v+ = 1: G = eps^2 / ((1 - eps^2/s^2) s^3),
    // so the map applied to zero is -ln(1 - eps^2/r^2)/2.
    let c = FlowConfig::new(2, 1.0, -0.05, 1.0, 0.05, GasLaw::new(1.0, 1.0).unwrap()).unwrap();
    let grid = RadialGrid::build(1000.0, None, 4096).unwrap();
    let eta = picard_map(grid.nodes(), &vec![0.0; grid.len()], &c, 0.05).unwrap();
    for (r, e) in grid.nodes().iter().zip(&eta).step_by(997) {
        let exact = -0.5 * (-(0.05f64 * 0.05) / (r * r)).ln_1p();
        assert!((e - exact).abs() < 1e-6 * exact, "r = {r}: {e} vs {exact}");
    }
}

#[test]
fn inflow_ns_hits_boundary_value_and_decays() {
    let c = inflow();
    let sol = solve_ns(&c, &ns_grid(), &ToleranceSet::default()).unwrap();
    assert_eq!(sol.eta[0], c.eta_minus());
    assert!((sol.eta[0] - 0.02).abs() < 1e-15);
    let tail: Vec<(f64, f64)> = sol
        .nodes()
        .iter()
        .zip(&sol.eta)
        .filter(|(r, _)| **r >= 10.0)
        .map(|(r, e)| (*r, e.abs()))
        .collect();
    let fit = radialflow::numerics::fit_loglog(&tail).unwrap();
    assert!(fit.slope <= -(2.0 - 1.0) + 0.1, "{}", fit.slope);
}

#[test]
fn mass_flux_identity_holds_for_every_solution() {
    let tol = ToleranceSet::default();
    for c in [inflow(), outflow()] {
        let sol = solve_ns(&c, &ns_grid(), &tol).unwrap();
        let state = reconstruct_state(&sol, &c).unwrap();
        let eps = mass_flux(&c, sol.eta[0]).unwrap();
        for ((r, rho), u) in sol.nodes().iter().zip(&state.rho).zip(&state.u) {
            assert!((r.powi(1) * rho * u - eps).abs() < 1e-12);
        }
        assert!(conserved_defect(&sol, &c).unwrap() < 1e-7);
    }
}

#[test]
fn euler_and_ns_agree_to_first_order() {
    let tol = ToleranceSet::default();
    let c = outflow();
    let grid = ns_grid();
    let e = solve_euler(&c, &grid, &tol).unwrap();
    let n = solve_ns(&c, &grid, &tol).unwrap();
    let gap = e.eta.iter().zip(&n.eta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 0.01 * e.eta[0].abs() && gap > 0.0, "{gap}");
    assert!(bernoulli_defect(&e, &c).unwrap() < 1e-7);
}

#[test]
fn boundary_layer_for_the_inflow_config() {
    let tol = ToleranceSet::default();
    let c = inflow();
    let grid = RadialGrid::build(1000.0, None, DEFAULT_POINTS_PER_DECADE).unwrap();
    let e = solve_euler(&c, &grid, &tol).unwrap();
    let layer = solve_bl(&c, e.eta[0], &tol).unwrap();
    let eps = 0.05 / 1.02;
    assert_eq!(layer.epsilon, eps);
    let expect = a_epsilon(&gas(), 1.0 + e.eta[0], eps).unwrap();
    assert_eq!(layer.a_eps, expect);
    assert!((layer.eta_hat_0() - (0.02 - e.eta[0])).abs() < 1e-16);
    // positive initial deviation stays positive and decreases in magnitude
    assert!(layer.eta_hat.iter().all(|&x| x > 0.0));
    assert!(layer.eta_hat.windows(2).all(|w| w[1].abs() <= w[0].abs()));
    // the nonlinear remainder is quadratically small
    for &x in layer.eta_hat.iter().step_by(64) {
        let n = gas().p_tilde_remainder(layer.v_star, x).unwrap();
        assert!(n.abs() <= 2.0 * x * x, "{n} vs {x}");
    }
}

#[test]
fn layer_with_negative_deviation_keeps_its_sign() {
    let tol = ToleranceSet::default();
    let c = FlowConfig::new(2, 1.0, 0.05, 0.99, 0.05, gas()).unwrap();
    let grid = RadialGrid::build(1000.0, None, 256).unwrap();
    let e = solve_euler(&c, &grid, &tol).unwrap();
    let layer = solve_bl(&c, e.eta[0], &tol).unwrap();
    assert!(layer.eta_hat_0() < 0.0);
    assert!(layer.eta_hat.iter().all(|&x| x < 0.0));
}

#[test]
fn solver_errors_are_typed() {
    let tol = ToleranceSet::default();
    let grid = RadialGrid::build(100.0, None, 64).unwrap();
    // eps^2 > |p~'(v+)| = 1.4 is supersonic at the wall
    let c = FlowConfig::new(2, 1.0, -1.5, 1.0, 0.05, gas()).unwrap();
    let err = solve_euler(&c, &grid, &tol).unwrap_err();
    assert!(
        matches!(err, Error::Supersonic { .. } | Error::Divergence { .. } | Error::SmallnessViolation { .. }),
        "{err}"
    );
    assert!(matches!(solve_bl(&outflow(), 0.0, &tol), Err(Error::InvalidRegime(_))));
    assert!(RadialGrid::build(50.0, None, 32).is_err());
}

#[test]
fn generic_ode_and_quadrature_entry_points() {
    let tol = ToleranceSet::default();
    let nodes: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
    let y = integrate_scalar_ode(|_, y| -y, 1.0, &nodes, &tol).unwrap();
    assert!((y[10] - (-1f64).exp()).abs() < 10.0 * tol.ode_rel_tol);
    let tail = tail_integral(&[1.0, 2.0], &[1.0, 0.125], 3.0).unwrap();
    assert!((tail[1] - 0.125).abs() < 1e-15);
}
