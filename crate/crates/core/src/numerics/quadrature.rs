//! Quadrature of `int_r^inf f(s) ds` for sampled integrands with algebraic
//! tails. The finite part is composite trapezoid on the sampling nodes; the
//! part beyond the last node uses the model `f(s) = f(R) (s/R)^(-p)`, whose
//! integral is `f(R) R / (p - 1)`.

use crate::error::{Error, Result};

fn check(nodes: &[f64], f: &[f64], tail_exponent: f64) -> Result<()> {
    if !(tail_exponent.is_finite() && tail_exponent > 1.0) {
        return Err(Error::invalid(format!(
            "tail exponent must exceed 1, got {tail_exponent}"
        )));
    }
    if nodes.len() != f.len() {
        return Err(Error::invalid(format!(
            "{} nodes but {} samples",
            nodes.len(),
            f.len()
        )));
    }
    if nodes.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("nodes must be strictly increasing"));
    }
    Ok(())
}

fn tail(r_last: f64, f_last: f64, p: f64) -> f64 {
    f_last * r_last / (p - 1.0)
}

/// `int_{r_i}^inf f` for every node `r_i`, in one backward cumulative pass.
pub fn tail_integral(nodes: &[f64], f: &[f64], tail_exponent: f64) -> Result<Vec<f64>> {
    check(nodes, f, tail_exponent)?;
    let n = nodes.len();
    let mut out = vec![0.0; n];
    out[n - 1] = tail(nodes[n - 1], f[n - 1], tail_exponent);
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + 0.5 * (nodes[i + 1] - nodes[i]) * (f[i] + f[i + 1]);
    }
    Ok(out)
}

/// `int_r^inf f` at an arbitrary `r >= nodes[0]`, with linear interpolation
/// inside the cell containing `r`.
pub fn tail_integral_at(nodes: &[f64], f: &[f64], r: f64, tail_exponent: f64) -> Result<f64> {
    check(nodes, f, tail_exponent)?;
    if !(r.is_finite() && r >= nodes[0]) {
        return Err(Error::invalid(format!(
            "r = {r} lies below the first node {}",
            nodes[0]
        )));
    }
    let n = nodes.len();
    let r_last = nodes[n - 1];
    if r >= r_last {
        let p = tail_exponent;
        return Ok(f[n - 1] * r_last.powf(p) * r.powf(1.0 - p) / (p - 1.0));
    }
    let cumulative = tail_integral(nodes, f, tail_exponent)?;
    let i = nodes.partition_point(|&x| x <= r) - 1;
    let h = nodes[i + 1] - nodes[i];
    let t = (r - nodes[i]) / h;
    let f_r = f[i] + t * (f[i + 1] - f[i]);
    Ok(cumulative[i + 1] + 0.5 * (nodes[i + 1] - r) * (f_r + f[i + 1]))
}

/// Endpoint-corrected trapezoid using the sampled derivative `df`:
/// each cell contributes `h/2 (f_a + f_b) + h^2/12 (f'_a - f'_b)`, which is
/// fourth order. Used as an accuracy reference for [`tail_integral`].
pub fn tail_integral_corrected(
    nodes: &[f64],
    f: &[f64],
    df: &[f64],
    tail_exponent: f64,
) -> Result<Vec<f64>> {
    check(nodes, f, tail_exponent)?;
    if df.len() != f.len() {
        return Err(Error::invalid("derivative sample length mismatch"));
    }
    let n = nodes.len();
    let mut out = vec![0.0; n];
    out[n - 1] = tail(nodes[n - 1], f[n - 1], tail_exponent);
    for i in (0..n - 1).rev() {
        let h = nodes[i + 1] - nodes[i];
        out[i] = out[i + 1] + 0.5 * h * (f[i] + f[i + 1]) + h * h / 12.0 * (df[i] - df[i + 1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RadialGrid;
    use proptest::prelude::*;

    #[test]
    fn pure_tail_is_exact_for_power_law() {
        let nodes = [1.0, 2.0];
        let f = [1.0, 0.125];
        let t = tail_integral(&nodes, &f, 3.0).unwrap();
        assert!((t[1] - 0.125).abs() < 1e-15);
        assert!((tail_integral_at(&nodes, &f, 2.0, 3.0).unwrap() - 0.125).abs() < 1e-15);
        // beyond the last node the model is continued analytically
        let at4 = tail_integral_at(&nodes, &f, 4.0, 3.0).unwrap();
        assert!((at4 - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let nodes: Vec<f64> = (0..50).map(|i| 1.0 + i as f64).collect();
        let t = tail_integral(&nodes, &vec![0.0; 50], 2.5).unwrap();
        assert!(t.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn inverse_cube_on_fine_grid() {
        let quad_tol = 1e-6;
        let g = RadialGrid::build(100.0, None, 4096).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|s| s.powi(-3)).collect();
        let t = tail_integral(g.nodes(), &f, 3.0).unwrap();
        for (r, v) in g.nodes().iter().zip(&t) {
            assert!((v - 0.5 / (r * r)).abs() < quad_tol, "r={r}");
        }
    }

    #[test]
    fn trapezoid_error_is_second_order_and_correction_fourth() {
        let err = |ppd: usize| {
            let g = RadialGrid::build(100.0, None, ppd).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|s| s.powi(-3)).collect();
            let df: Vec<f64> = g.nodes().iter().map(|s| -3.0 * s.powi(-4)).collect();
            let t = tail_integral(g.nodes(), &f, 3.0).unwrap();
            let c = tail_integral_corrected(g.nodes(), &f, &df, 3.0).unwrap();
            ((t[0] - 0.5).abs(), (c[0] - 0.5).abs())
        };
        let (t1, c1) = err(64);
        let (t2, c2) = err(128);
        assert!((t1 / t2 - 4.0).abs() < 0.1, "{}", t1 / t2);
        assert!((c1 / c2 - 16.0).abs() < 1.0, "{}", c1 / c2);
    }

    #[test]
    fn rejects_non_integrable_tail() {
        assert!(tail_integral(&[1.0, 2.0], &[1.0, 1.0], 1.0).is_err());
        assert!(tail_integral(&[1.0, 2.0], &[1.0, 1.0], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn linear_and_monotone(
            a in proptest::collection::vec(0.0f64..10.0, 12),
            b in proptest::collection::vec(0.0f64..10.0, 12),
            alpha in -3.0f64..3.0,
        ) {
            let nodes: Vec<f64> = (0..12).map(|i| 1.0 + 0.7 * i as f64 + 0.01 * (i * i) as f64).collect();
            let ta = tail_integral(&nodes, &a, 2.0).unwrap();
            let tb = tail_integral(&nodes, &b, 2.0).unwrap();
            prop_assert!(ta.iter().all(|&x| x >= 0.0));
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + alpha * y).collect();
            let tm = tail_integral(&nodes, &mix, 2.0).unwrap();
            for i in 0..12 {
                let expect = ta[i] + alpha * tb[i];
                prop_assert!((tm[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }
}
