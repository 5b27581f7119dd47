//! Zero finding for continuous odd maps on the unit sphere.
//!
//! An odd map from S^(d-1) to R^m with m <= d-1 always has a zero. The
//! search here is constructive and deterministic: a one-component map
//! changes sign over any half turn of a circle, so a fixed angle grid plus
//! bisection pins a zero down; a two-component map on the 2-sphere is
//! attacked by damped Gauss-Newton from a fixed fan of lattice directions.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ODDNESS_SAMPLES: usize = 100;
const ODDNESS_SEED: u64 = 0x0dd5;
const CIRCLE_GRID: usize = 720;
const GN_MAX_ITERS: usize = 200;
const SNAP: f64 = 1e-14;

/// Zero of an odd map on S^(d-1), to |g| <= tol componentwise.
///
/// The map receives a unit vector (third component zero when d = 2) and
/// must return the same number of components every call: 1 on the circle,
/// 1 or 2 on the 2-sphere. Ties resolve deterministically: the circle scan
/// returns the zero with the smallest positive angle from (1, 0), and the
/// sphere multistart walks a fixed direction fan, positive axes first.
pub fn find_odd_zero<G>(g: &G, dim: usize, tol: f64) -> Result<[f64; 3]>
where
    G: Fn(&[f64; 3]) -> Vec<f64>,
{
    if dim != 2 && dim != 3 {
        return Err(Error::BadDimension(dim));
    }
    let m = g(&unit_at(dim, 0)).len();
    assert!(
        m >= 1 && m <= dim - 1,
        "odd map must have 1..=d-1 components, got {m} in dimension {dim}"
    );
    oddness_spot_check(g, dim)?;
    match (dim, m) {
        (2, 1) | (3, 1) => circle_zero(g, tol),
        (3, 2) => sphere_zero(g, tol),
        _ => unreachable!(),
    }
}

fn unit_at(dim: usize, axis: usize) -> [f64; 3] {
    debug_assert!(axis < dim);
    let mut v = [0.0; 3];
    v[axis] = 1.0;
    v
}

fn normalize(mut v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    for c in &mut v {
        *c /= n;
    }
    Some(v)
}

/// Clean up an essentially-axis-aligned result: components below the snap
/// threshold become exact zeros, then the vector is renormalized. Keeps the
/// promise that symmetric constructions return literal coordinate axes.
fn snap(mut v: [f64; 3]) -> [f64; 3] {
    for c in &mut v {
        if c.abs() < SNAP {
            *c = 0.0;
        }
    }
    normalize(v).unwrap_or(v)
}

fn norm_inf(vals: &[f64]) -> f64 {
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn oddness_spot_check<G>(g: &G, dim: usize) -> Result<()>
where
    G: Fn(&[f64; 3]) -> Vec<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(ODDNESS_SEED);
    let mut worst = 0.0f64;
    let mut drawn = 0;
    while drawn < ODDNESS_SAMPLES {
        let mut v = [0.0; 3];
        for c in v.iter_mut().take(dim) {
            *c = rng.gen::<f64>() * 2.0 - 1.0;
        }
        let Some(theta) = normalize(v) else { continue };
        drawn += 1;
        let plus = g(&theta);
        let minus = g(&[-theta[0], -theta[1], -theta[2]]);
        let scale = norm_inf(&plus).max(1.0);
        let mut res = 0.0f64;
        for (p, q) in plus.iter().zip(&minus) {
            res = res.max((p + q).abs());
        }
        worst = worst.max(res / scale);
    }
    if worst > 1e-12 {
        return Err(Error::NotOdd { residual: worst });
    }
    Ok(())
}

/// One-component zero on the circle t -> (cos t, sin t, 0). Oddness forces
/// g(t + pi) = -g(t), so a sign change always exists among the grid cells
/// of [0, pi); the first one (smallest angle) is bisected.
fn circle_zero<G>(g: &G, tol: f64) -> Result<[f64; 3]>
where
    G: Fn(&[f64; 3]) -> Vec<f64>,
{
    let at = |t: f64| -> [f64; 3] { [t.cos(), t.sin(), 0.0] };
    let eval = |t: f64| -> Result<f64> {
        let v = g(&at(t))[0];
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                at: format!("odd map at angle {t}"),
            });
        }
        Ok(v)
    };

    let angle = |i: usize| std::f64::consts::PI * i as f64 / CIRCLE_GRID as f64;
    let mut samples = Vec::with_capacity(CIRCLE_GRID);
    for i in 0..CIRCLE_GRID {
        let t = angle(i);
        let v = eval(t)?;
        if v.abs() <= tol {
            return Ok(snap(at(t)));
        }
        samples.push(v);
    }

    let mut best = (f64::INFINITY, 0.0f64);
    for i in 0..CIRCLE_GRID {
        let (va, vb) = (
            samples[i],
            if i + 1 < CIRCLE_GRID {
                samples[i + 1]
            } else {
                -samples[0]
            },
        );
        if va * vb >= 0.0 {
            continue;
        }
        let (mut a, mut b) = (angle(i), angle(i + 1));
        let mut fa = va;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let fm = eval(mid)?;
            if fm.abs() <= tol {
                return Ok(snap(at(mid)));
            }
            if fa * fm < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        let mid = 0.5 * (a + b);
        let fm = eval(mid)?.abs();
        if fm <= tol {
            return Ok(snap(at(mid)));
        }
        if fm < best.0 {
            best = (fm, mid);
        }
    }
    if best.0 <= tol {
        return Ok(snap(at(best.1)));
    }
    let grid_best = samples.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    Err(Error::NoZeroFound {
        best: best.0.min(grid_best),
        tol,
    })
}

/// Fixed multistart fan: the 26 nonzero lattice directions in {-1,0,1}^3,
/// normalized, ordered axes-first with positive signs ahead of negative.
fn lattice_starts() -> Vec<[f64; 3]> {
    let mut raw: Vec<[i32; 3]> = Vec::new();
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if (x, y, z) != (0, 0, 0) {
                    raw.push([x, y, z]);
                }
            }
        }
    }
    raw.sort_by_key(|v| {
        let nz = v.iter().filter(|c| **c != 0).count();
        (nz, [-v[0], -v[1], -v[2]])
    });
    raw.iter()
        .map(|v| normalize([v[0] as f64, v[1] as f64, v[2] as f64]).unwrap())
        .collect()
}

fn tangent_basis(theta: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut axis = 0;
    for i in 1..3 {
        if theta[i].abs() < theta[axis].abs() {
            axis = i;
        }
    }
    let e = unit_at(3, axis);
    let t1 = normalize(cross(&e, theta)).expect("helper axis not parallel");
    let t2 = cross(theta, &t1);
    (t1, t2)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn add_scaled(a: &[f64; 3], s: f64, b: &[f64; 3]) -> [f64; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

/// Two-component zero on the 2-sphere by damped Gauss-Newton in the tangent
/// plane; a singular local Jacobian or a failed line search abandons the
/// start rather than wandering.
fn sphere_zero<G>(g: &G, tol: f64) -> Result<[f64; 3]>
where
    G: Fn(&[f64; 3]) -> Vec<f64>,
{
    let mut best = (f64::INFINITY, [1.0, 0.0, 0.0]);
    for start in lattice_starts() {
        let (theta, res, converged) = gauss_newton(g, start, tol);
        if converged {
            return Ok(snap(theta));
        }
        if res < best.0 {
            best = (res, theta);
        }
    }
    if best.0 <= tol {
        return Ok(snap(best.1));
    }
    Err(Error::NoZeroFound { best: best.0, tol })
}

fn gauss_newton<G>(g: &G, start: [f64; 3], tol: f64) -> ([f64; 3], f64, bool)
where
    G: Fn(&[f64; 3]) -> Vec<f64>,
{
    let mut theta = start;
    let mut gv = g(&theta);
    let mut res = norm_inf(&gv);
    for _ in 0..GN_MAX_ITERS {
        if res <= tol {
            return (theta, res, true);
        }
        let (t1, t2) = tangent_basis(&theta);
        let fd = 1e-6;
        let mut jac = [[0.0f64; 2]; 2];
        for (col, tdir) in [t1, t2].iter().enumerate() {
            let plus = g(&normalize(add_scaled(&theta, fd, tdir)).unwrap());
            let minus = g(&normalize(add_scaled(&theta, -fd, tdir)).unwrap());
            for row in 0..2 {
                jac[row][col] = (plus[row] - minus[row]) / (2.0 * fd);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale: f64 = jac.iter().flatten().map(|v| v * v).sum();
        if det.abs() <= 1e-13 * scale.max(1e-300) {
            return (theta, res, false);
        }
        let s1 = (-gv[0] * jac[1][1] + gv[1] * jac[0][1]) / det;
        let s2 = (-jac[0][0] * gv[1] + jac[1][0] * gv[0]) / det;
        let step_len = (s1 * s1 + s2 * s2).sqrt();
        let cap = if step_len > 0.5 { 0.5 / step_len } else { 1.0 };
        let mut improved = false;
        let mut alpha = cap;
        for _ in 0..20 {
            let cand = normalize(add_scaled(
                &add_scaled(&theta, alpha * s1, &t1),
                alpha * s2,
                &t2,
            ))
            .unwrap();
            let gc = g(&cand);
            let rc = norm_inf(&gc);
            if rc < res {
                theta = cand;
                gv = gc;
                res = rc;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            return (theta, res, false);
        }
    }
    (theta, res, res <= tol)
}
