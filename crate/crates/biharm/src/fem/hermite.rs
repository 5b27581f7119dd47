//! Cubic Hermite shape functions on the reference interval [0, 1].
//!
//! Four functions per axis, indexed `2 * corner + kind` with kind 0 = value
//! dof and kind 1 = slope dof:
//!   0: 1 - 3 xi^2 + 2 xi^3   (value at 0)
//!   1: xi - 2 xi^2 + xi^3    (slope at 0)
//!   2: 3 xi^2 - 2 xi^3       (value at 1)
//!   3: -xi^2 + xi^3          (slope at 1)
//! Tensor products of these are C1 across shared faces because value and
//! slope data at the endpoints determine the trace and normal slope.

/// Reference-interval value or derivative (order `k` <= 3, with respect to xi).
pub fn hermite1d(idx: usize, k: usize, xi: f64) -> f64 {
    match (idx, k) {
        (0, 0) => 1.0 + xi * xi * (-3.0 + 2.0 * xi),
        (0, 1) => xi * (-6.0 + 6.0 * xi),
        (0, 2) => -6.0 + 12.0 * xi,
        (0, 3) => 12.0,
        (1, 0) => xi * (1.0 + xi * (-2.0 + xi)),
        (1, 1) => 1.0 + xi * (-4.0 + 3.0 * xi),
        (1, 2) => -4.0 + 6.0 * xi,
        (1, 3) => 6.0,
        (2, 0) => xi * xi * (3.0 - 2.0 * xi),
        (2, 1) => xi * (6.0 - 6.0 * xi),
        (2, 2) => 6.0 - 12.0 * xi,
        (2, 3) => -12.0,
        (3, 0) => xi * xi * (-1.0 + xi),
        (3, 1) => xi * (-2.0 + 3.0 * xi),
        (3, 2) => -2.0 + 6.0 * xi,
        (3, 3) => 6.0,
        _ => panic!("hermite1d: idx {idx} or derivative order {k} out of range"),
    }
}

/// Physical-cell factor for a cell of width `h`: slope dofs are scaled by `h`
/// so the dof value equals the physical derivative, and each derivative order
/// divides by `h`. `k` is the derivative order with respect to x.
pub fn hermite1d_scaled(idx: usize, k: usize, xi: f64, h: f64) -> f64 {
    let dof_scale = if idx % 2 == 1 { h } else { 1.0 };
    dof_scale * hermite1d(idx, k, xi) * h.powi(-(k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Value dofs are cardinal at the endpoints, slope dofs cardinal in slope.
    #[test]
    fn cardinal_at_endpoints() {
        for idx in 0..4 {
            let corner = idx / 2;
            let kind = idx % 2;
            for at in 0..2 {
                let xi = at as f64;
                let v = hermite1d(idx, 0, xi);
                let s = hermite1d(idx, 1, xi);
                let want_v = if kind == 0 && corner == at { 1.0 } else { 0.0 };
                let want_s = if kind == 1 && corner == at { 1.0 } else { 0.0 };
                assert!((v - want_v).abs() < 1e-15, "idx {idx} value at {at}");
                assert!((s - want_s).abs() < 1e-15, "idx {idx} slope at {at}");
            }
        }
    }

    #[test]
    fn scaled_slope_dof_has_unit_physical_derivative() {
        let h = 0.125;
        // d/dx of the slope-dof function at its own node is 1.
        let d = hermite1d_scaled(1, 1, 0.0, h);
        assert!((d - 1.0).abs() < 1e-15);
        let d = hermite1d_scaled(3, 1, 1.0, h);
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 1e-6;
        for idx in 0..4 {
            for k in 0..3 {
                for &xi in &[0.2, 0.55, 0.9] {
                    let fd = (hermite1d(idx, k, xi + eps) - hermite1d(idx, k, xi - eps))
                        / (2.0 * eps);
                    let an = hermite1d(idx, k + 1, xi);
                    assert!(
                        (fd - an).abs() < 1e-5 * an.abs().max(1.0),
                        "idx {idx} order {k} at {xi}: {fd} vs {an}"
                    );
                }
            }
        }
    }
}
