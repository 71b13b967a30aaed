//! Möbius transformations of the plane and the covariance factor they
//! induce on normalized connection probabilities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::Point;

/// Scaling exponent per marked point.
pub const POINT_EXPONENT: f64 = 5.0 / 48.0;

/// M(x) = (A x + B) / (C x + D) with AD - BC != 0.
#[derive(Clone, Copy, Debug)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if (a * d - b * c).norm() == 0.0 {
            return Err(Error::SingularMap);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn scaling(s: f64) -> Result<Self> {
        Self::new(
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn inversion() -> Self {
        MobiusMap {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(1.0, 0.0),
            c: Complex64::new(1.0, 0.0),
            d: Complex64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, x: Complex64) -> Result<Complex64> {
        let denom = self.c * x + self.d;
        if denom.norm() < 1e-300 {
            return Err(Error::PoleHit);
        }
        Ok((self.a * x + self.b) / denom)
    }

    /// M'(x) = (AD - BC) / (Cx + D)².
    pub fn derivative(&self, x: Complex64) -> Result<Complex64> {
        let denom = self.c * x + self.d;
        if denom.norm() < 1e-300 {
            return Err(Error::PoleHit);
        }
        Ok((self.a * self.d - self.b * self.c) / (denom * denom))
    }
}

/// Covariance factor ∏ |M'(x_i)|^(-exponent) predicted for the normalized
/// n-point connection function under the map.
pub fn mobius_factor(map: &MobiusMap, points: &[Point], exponent: f64) -> Result<f64> {
    let mut factor = 1.0;
    for p in points {
        let z = Complex64::new(p.x, p.y);
        let d = map.derivative(z)?.norm();
        if d == 0.0 {
            return Err(Error::SingularMap);
        }
        factor *= d.powf(-exponent);
    }
    Ok(factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    #[test]
    fn identity_gives_unit_factor() {
        let pts = vec![Vec2::new(1.0, 2.0), Vec2::new(-3.0, 0.5)];
        let f = mobius_factor(&MobiusMap::identity(), &pts, POINT_EXPONENT).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_scaling_factor() {
        // |M'| = s everywhere: factor = s^(-n * 5/48)
        let s = 3.0;
        let map = MobiusMap::scaling(s).unwrap();
        let pts = vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0), Vec2::new(-1.0, -1.0)];
        let f = mobius_factor(&map, &pts, POINT_EXPONENT).unwrap();
        let expected = s.powf(-(pts.len() as f64) * POINT_EXPONENT);
        assert!((f - expected).abs() < 1e-12);
    }

    #[test]
    fn inversion_factor_per_point() {
        // M(x) = 1/x: |M'(x)| = 1/rho^2 at |x| = rho, so each point
        // contributes rho^(-2 * 5/48) to the inverse factor
        let map = MobiusMap::inversion();
        let rho = 2.5;
        let pts = vec![Vec2::new(rho, 0.0)];
        let f = mobius_factor(&map, &pts, POINT_EXPONENT).unwrap();
        let expected = (rho * rho).powf(POINT_EXPONENT);
        assert!((f - expected).abs() < 1e-12);
    }

    #[test]
    fn singular_and_pole_cases() {
        assert!(MobiusMap::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(4.0, 0.0),
        )
        .is_err());
        let map = MobiusMap::inversion();
        let at_pole = vec![Vec2::new(0.0, 0.0)];
        assert!(mobius_factor(&map, &at_pole, POINT_EXPONENT).is_err());
    }
}
