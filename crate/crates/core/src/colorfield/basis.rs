//! Dirichlet eigenbasis of the negative Laplacian on a centered square box.
//!
//! On [-n, n]² the eigenfunctions are products of sines,
//! u_{i,j}(ξ, ζ) = (1/n) sin(iπ(ξ+n)/2n) sin(jπ(ζ+n)/2n), with eigenvalues
//! λ_{i,j} = π²(i² + j²)/4n², L²-normalized.

use crate::geom::Vec2;
use crate::scalar::Real;

/// Truncated eigenbasis: modes 1 ≤ i, j ≤ k_max on the box
/// [center - n, center + n]².
#[derive(Clone, Debug)]
pub struct Eigenbasis<F = crate::Scalar> {
    pub half_width: F,
    pub center: Vec2<F>,
    pub k_max: usize,
}

impl<F: Real> Eigenbasis<F> {
    pub fn new(half_width: F, center: Vec2<F>, k_max: usize) -> Self {
        assert!(half_width > F::zero() && k_max >= 1);
        Eigenbasis { half_width, center, k_max }
    }

    /// Eigenvalue of mode (i, j), 1-based.
    pub fn lambda(&self, i: usize, j: usize) -> F {
        let pi = F::from_f64_lossy(std::f64::consts::PI);
        let n = self.half_width;
        let four = F::from_f64_lossy(4.0);
        pi * pi * F::from_f64_lossy((i * i + j * j) as f64) / (four * n * n)
    }

    /// Eigenfunction of mode (i, j) at a point; zero outside the box.
    pub fn eval(&self, i: usize, j: usize, p: Vec2<F>) -> F {
        let n = self.half_width;
        let xi = p.x - self.center.x;
        let zeta = p.y - self.center.y;
        if xi.abs() > n || zeta.abs() > n {
            return F::zero();
        }
        self.axis_factor(i, xi) * self.axis_factor(j, zeta)
    }

    /// One-dimensional factor sin(iπ(ξ+n)/2n)/√n of the product form.
    pub fn axis_factor(&self, i: usize, xi: F) -> F {
        let pi = F::from_f64_lossy(std::f64::consts::PI);
        let n = self.half_width;
        let two = F::from_f64_lossy(2.0);
        let arg = pi * F::from_f64_lossy(i as f64) * (xi + n) / (two * n);
        arg.sin() / n.sqrt()
    }

    pub fn contains(&self, p: Vec2<F>) -> bool {
        (p.x - self.center.x).abs() <= self.half_width
            && (p.y - self.center.y).abs() <= self.half_width
    }

    pub fn mode_count(&self) -> usize {
        self.k_max * self.k_max
    }
}
