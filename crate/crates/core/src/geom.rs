//! Planar geometry kernels: vectors, hexagonal cells, winding numbers,
//! convex hulls. Generic over the scalar type.

use crate::scalar::Real;

/// 2D vector / point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Vec2<F> {
    pub fn new(x: F, y: F) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 { x: F::zero(), y: F::zero() }
    }

    pub fn dot(self, o: Self) -> F {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Self) -> F {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> F {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Self) -> F {
        (self - o).norm()
    }
}

impl<F: Real> std::ops::Add for Vec2<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl<F: Real> std::ops::Sub for Vec2<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl<F: Real> std::ops::Mul<F> for Vec2<F> {
    type Output = Self;
    fn mul(self, s: F) -> Self {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Circumradius of the hexagonal cell of a site at lattice spacing `a`.
pub fn hex_circumradius<F: Real>(a: F) -> F {
    a / F::from_f64_lossy(3.0).sqrt()
}

/// Inradius of the hexagonal cell (half the lattice spacing).
pub fn hex_inradius<F: Real>(a: F) -> F {
    a * F::from_f64_lossy(0.5)
}

/// Area of the hexagonal cell: (√3 / 2) a².
pub fn hex_area<F: Real>(a: F) -> F {
    F::from_f64_lossy(3.0).sqrt() * F::from_f64_lossy(0.5) * a * a
}

/// Vertices of the hexagonal cell centered at `c`. With the lattice basis
/// e1 = (1,0), e2 = (1/2, √3/2) the cells are pointy-top: vertices sit at
/// angles 30° + k·60° at distance a/√3.
pub fn hex_vertices<F: Real>(c: Vec2<F>, a: F) -> [Vec2<F>; 6] {
    let rc = hex_circumradius(a);
    let mut out = [Vec2::zero(); 6];
    for (k, v) in out.iter_mut().enumerate() {
        let ang = F::from_f64_lossy(std::f64::consts::PI * (30.0 + 60.0 * k as f64) / 180.0);
        *v = c + Vec2::new(ang.cos(), ang.sin()) * rc;
    }
    out
}

/// Distance from point `p` to the closed segment [a, b].
pub fn segment_distance<F: Real>(p: Vec2<F>, a: Vec2<F>, b: Vec2<F>) -> F {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == F::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).max(F::zero()).min(F::one());
    p.dist(a + ab * t)
}

/// True iff `p` lies in the closed hexagonal cell centered at `c`.
pub fn point_in_hexagon<F: Real>(p: Vec2<F>, c: Vec2<F>, a: F) -> bool {
    let vs = hex_vertices(c, a);
    for k in 0..6 {
        let v0 = vs[k];
        let v1 = vs[(k + 1) % 6];
        if (v1 - v0).cross(p - v0) < F::zero() {
            return false;
        }
    }
    true
}

/// Minimum distance from `p` to the closed hexagonal cell (0 if inside).
pub fn hex_min_dist<F: Real>(p: Vec2<F>, c: Vec2<F>, a: F) -> F {
    if point_in_hexagon(p, c, a) {
        return F::zero();
    }
    let vs = hex_vertices(c, a);
    let mut d = F::infinity();
    for k in 0..6 {
        d = d.min(segment_distance(p, vs[k], vs[(k + 1) % 6]));
    }
    d
}

/// Maximum distance from `p` to the hexagonal cell (attained at a vertex).
pub fn hex_max_dist<F: Real>(p: Vec2<F>, c: Vec2<F>, a: F) -> F {
    let vs = hex_vertices(c, a);
    let mut d = F::zero();
    for v in vs {
        d = d.max(p.dist(v));
    }
    d
}

/// Position of a hexagonal cell relative to the circle of radius `r`
/// around `center`. Tangency counts as intersecting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HexCircleClass {
    /// Cell lies strictly inside the open disk.
    Inside,
    /// Cell meets the circle itself.
    Intersects,
    /// Cell lies strictly outside the closed disk.
    Outside,
}

pub fn classify_hex_circle<F: Real>(cell: Vec2<F>, a: F, center: Vec2<F>, r: F) -> HexCircleClass {
    let dmax = hex_max_dist(center, cell, a);
    if dmax < r {
        return HexCircleClass::Inside;
    }
    let dmin = hex_min_dist(center, cell, a);
    if dmin > r {
        HexCircleClass::Outside
    } else {
        HexCircleClass::Intersects
    }
}

/// Signed area of a closed polygon (positive for counterclockwise).
pub fn polygon_signed_area<F: Real>(pts: &[Vec2<F>]) -> F {
    let n = pts.len();
    let mut acc = F::zero();
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        acc += p.cross(q);
    }
    acc * F::from_f64_lossy(0.5)
}

/// Winding number of a closed polygon around `p` by signed crossings of the
/// upward ray. Returns None when `p` is (numerically) on the polygon.
pub fn winding_number<F: Real>(pts: &[Vec2<F>], p: Vec2<F>) -> Option<i32> {
    let n = pts.len();
    let eps = F::from_f64_lossy(1e-12);
    let mut w = 0i32;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if segment_distance(p, a, b) < eps {
            return None;
        }
        if a.y <= p.y {
            if b.y > p.y && (b - a).cross(p - a) > F::zero() {
                w += 1;
            }
        } else if b.y <= p.y && (b - a).cross(p - a) < F::zero() {
            w -= 1;
        }
    }
    Some(w)
}

/// Convex hull of a point set (Andrew monotone chain), counterclockwise,
/// without collinear interior points.
pub fn convex_hull<F: Real>(pts: &[Vec2<F>]) -> Vec<Vec2<F>> {
    let mut p: Vec<Vec2<F>> = pts.to_vec();
    p.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    p.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = p.len();
    if n <= 2 {
        return p;
    }
    let mut hull: Vec<Vec2<F>> = Vec::with_capacity(2 * n);
    for &pt in p.iter().chain(p.iter().rev().skip(1)) {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b - a).cross(pt - a) <= F::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.pop();
    hull
}

/// Diameter of a point set. Rotating calipers over the convex hull for
/// large sets, brute force for small ones.
pub fn point_set_diameter<F: Real>(pts: &[Vec2<F>], brute_force_limit: usize) -> F {
    if pts.len() <= 1 {
        return F::zero();
    }
    if pts.len() <= brute_force_limit {
        let mut best = F::zero();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                best = best.max(pts[i].dist(pts[j]));
            }
        }
        return best;
    }
    let hull = convex_hull(pts);
    let m = hull.len();
    if m <= 1 {
        return F::zero();
    }
    if m == 2 {
        return hull[0].dist(hull[1]);
    }
    let mut best = F::zero();
    let mut j = 1usize;
    for i in 0..m {
        let edge = hull[(i + 1) % m] - hull[i];
        // advance the antipodal point while the triangle area keeps growing
        while {
            let cur = edge.cross(hull[j] - hull[i]);
            let nxt = edge.cross(hull[(j + 1) % m] - hull[i]);
            nxt > cur
        } {
            j = (j + 1) % m;
        }
        best = best.max(hull[i].dist(hull[j]));
        best = best.max(hull[(i + 1) % m].dist(hull[j]));
    }
    best
}
