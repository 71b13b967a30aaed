//! Metrics on points, loops and loop ensembles.
//!
//! The ground metric Δ is the geodesic distance of the conformal density
//! |dx| / (1 + |x|²), which makes the plane precompact; it equals half the
//! great-circle distance between the inverse stereographic images on the
//! unit sphere. Loop distance is a discrete Fréchet distance under Δ over
//! orientation-preserving cyclic alignments (an upper bound on the
//! continuum infimum over parametrizations); ensemble distance is the
//! two-sided Hausdorff construction over loop distances.

use crate::geom::Vec2;
use crate::loops::{LoopEnsemble, LoopPath};
use crate::scalar::Real;
use crate::{Point, Scalar};

/// Inverse stereographic image of a plane point on the unit sphere.
fn sphere_point<F: Real>(u: Vec2<F>) -> [F; 3] {
    let two = F::from_f64_lossy(2.0);
    let s = u.dot(u);
    let denom = F::one() + s;
    [two * u.x / denom, two * u.y / denom, (s - F::one()) / denom]
}

/// Geodesic distance for the density |dx| / (1 + |x|²): half the
/// great-circle distance between the spherical images.
pub fn sphere_distance<F: Real>(u: Vec2<F>, v: Vec2<F>) -> F {
    let a = sphere_point(u);
    let b = sphere_point(v);
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    let half = F::from_f64_lossy(0.5);
    cross.atan2(dot) * half
}

/// Reference value for [`sphere_distance`]: Simpson quadrature of the
/// length functional along the great-circle path mapped back to the plane.
/// Used to validate the closed form.
pub fn sphere_distance_quadrature(u: Point, v: Point, intervals: usize) -> Scalar {
    let a = sphere_point::<f64>(u);
    let b = sphere_point::<f64>(v);
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let omega = dot.clamp(-1.0, 1.0).acos();
    if omega < 1e-14 {
        return 0.0;
    }
    let n = intervals.max(2) & !1; // even
    let sin_omega = omega.sin();
    // c(t) = (sin((1-t)w) a + sin(tw) b) / sin w, mapped to the plane by
    // p = (x, y) / (1 - z); integrand = |p'(t)| / (1 + |p|^2)
    let integrand = |t: f64| -> f64 {
        let (sa, sb) = (((1.0 - t) * omega).sin(), (t * omega).sin());
        let (ca, cb) = (((1.0 - t) * omega).cos(), (t * omega).cos());
        let c: Vec<f64> = (0..3).map(|i| (sa * a[i] + sb * b[i]) / sin_omega).collect();
        let d: Vec<f64> =
            (0..3).map(|i| omega * (-ca * a[i] + cb * b[i]) / sin_omega).collect();
        let w = 1.0 - c[2];
        let px = c[0] / w;
        let py = c[1] / w;
        let dpx = d[0] / w + c[0] * d[2] / (w * w);
        let dpy = d[1] / w + c[1] * d[2] / (w * w);
        let speed = (dpx * dpx + dpy * dpy).sqrt();
        speed / (1.0 + px * px + py * py)
    };
    let h = 1.0 / n as f64;
    let mut acc = integrand(0.0) + integrand(1.0);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(k as f64 * h);
    }
    acc * h / 3.0
}

/// Resample a closed polygon to `m` points equally spaced in arc length,
/// preserving orientation and the starting vertex.
pub fn resample_closed<F: Real>(vertices: &[Vec2<F>], m: usize) -> Vec<Vec2<F>> {
    assert!(!vertices.is_empty() && m >= 3);
    let n = vertices.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(F::zero());
    let mut total = F::zero();
    for i in 0..n {
        total += vertices[i].dist(vertices[(i + 1) % n]);
        cum.push(total);
    }
    if total == F::zero() {
        return vec![vertices[0]; m];
    }
    let mut out = Vec::with_capacity(m);
    let mut seg = 0usize;
    for k in 0..m {
        let target = total * F::from_f64_lossy(k as f64 / m as f64);
        while seg + 1 < n && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len == F::zero() { F::zero() } else { (target - cum[seg]) / len };
        let a = vertices[seg];
        let b = vertices[(seg + 1) % n];
        out.push(a + (b - a) * t);
    }
    out
}

/// Discrete Fréchet distance between two fixed (already aligned) closed
/// sequences, under Δ.
fn frechet_linear<F: Real>(cost: &[F], m: usize, shift: usize) -> F {
    // cost is the m x m matrix of Δ(a_i, b_j); sequences are closed by
    // repeating index 0 at position m
    let idx = |i: usize, j: usize| -> F { cost[(i % m) * m + ((j + shift) % m)] };
    let mut dp = vec![F::infinity(); (m + 1) * (m + 1)];
    let at = |dp: &Vec<F>, i: usize, j: usize| dp[i * (m + 1) + j];
    dp[0] = idx(0, 0);
    for i in 0..=m {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = F::infinity();
            if i > 0 {
                best = best.min(at(&dp, i - 1, j));
            }
            if j > 0 {
                best = best.min(at(&dp, i, j - 1));
            }
            if i > 0 && j > 0 {
                best = best.min(at(&dp, i - 1, j - 1));
            }
            dp[i * (m + 1) + j] = best.max(idx(i, j));
        }
    }
    at(&dp, m, m)
}

/// Discrete Fréchet distance under Δ over orientation-preserving cyclic
/// alignments of the two loops, after resampling both to `resolution`
/// equally spaced vertices.
pub fn loop_distance_with_resolution<F: Real>(
    a: &[Vec2<F>],
    b: &[Vec2<F>],
    resolution: usize,
) -> F {
    assert!(!a.is_empty() && !b.is_empty(), "loops must be nonempty");
    let ra = resample_closed(a, resolution);
    let rb = resample_closed(b, resolution);
    let m = resolution;
    let mut cost = vec![F::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            cost[i * m + j] = sphere_distance(ra[i], rb[j]);
        }
    }
    let mut best = F::infinity();
    for shift in 0..m {
        best = best.min(frechet_linear(&cost, m, shift));
    }
    best
}

pub const DEFAULT_LOOP_RESOLUTION: usize = 256;

/// Loop distance at the default resolution.
pub fn loop_distance(a: &LoopPath, b: &LoopPath) -> Scalar {
    loop_distance_with_resolution(&a.vertices, &b.vertices, DEFAULT_LOOP_RESOLUTION)
}

/// Hausdorff-style distance between two sets of loops: the max over both
/// directions of each loop's min distance to the other ensemble. Two empty
/// ensembles are at distance 0; empty against nonempty is infinite.
pub fn ensemble_distance(a: &LoopEnsemble, b: &LoopEnsemble) -> Scalar {
    ensemble_distance_with_resolution(a, b, DEFAULT_LOOP_RESOLUTION)
}

pub fn ensemble_distance_with_resolution(
    a: &LoopEnsemble,
    b: &LoopEnsemble,
    resolution: usize,
) -> Scalar {
    match (a.loops.is_empty(), b.loops.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let one_sided = |from: &LoopEnsemble, to: &LoopEnsemble| -> Scalar {
        from.loops
            .iter()
            .map(|la| {
                to.loops
                    .iter()
                    .map(|lb| loop_distance_with_resolution(&la.vertices, &lb.vertices, resolution))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}
