//! Exact probabilities on enumerable regions, the oracle side of the
//! estimator calibration suite.

use std::sync::Arc;

use crate::error::Result;
use crate::lattice::LatticeRegion;
use crate::sampling::{enumerate_all, Configuration};
use crate::Exact;

/// Exact probability of an event as favorable count / 2^N over all
/// configurations of a region with at most 25 unmasked sites.
pub fn brute_force_probability(
    region: &Arc<LatticeRegion>,
    event: impl FnMut(&Configuration) -> bool,
) -> Result<Exact> {
    let mut event = event;
    let mut favorable: i128 = 0;
    let iter = enumerate_all(region)?;
    let total = iter.total() as i128;
    for cfg in iter {
        favorable += event(&cfg) as i128;
    }
    Ok(Exact::new(favorable, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clusters::label;
    use crate::events::connection_event;
    use crate::geom::Vec2;
    use crate::lattice::{DomainMask, RegionShape, SiteCoord};

    #[test]
    fn adjacent_pair_connection_is_one_quarter() {
        // isolated pair: a 1x2 strip via a rhombus(2) with two sites masked
        let plain =
            LatticeRegion::new(RegionShape::Rhombus { side: 2 }, 1.0, Vec2::new(0.0, 0.0)).unwrap();
        let hole = |q: i32, r: i32| {
            let p = plain.embed(SiteCoord::new(q, r));
            crate::lattice::MaskDisk { center: [p.x, p.y], radius: 0.1 }
        };
        let reg = LatticeRegion::with_mask(
            RegionShape::Rhombus { side: 2 },
            1.0,
            Vec2::new(0.0, 0.0),
            Some(DomainMask::Holes { disks: vec![hole(-1, -1), hole(0, -1)] }),
        )
        .unwrap();
        assert_eq!(reg.unmasked_count(), 2);
        let a = reg.index_of(SiteCoord::new(-1, 0)).unwrap();
        let b = reg.index_of(SiteCoord::new(0, 0)).unwrap();
        let p = brute_force_probability(&reg, |cfg| {
            let labels = label(cfg);
            connection_event(&labels, &[a, b])
        })
        .unwrap();
        assert_eq!(p, Exact::new(1, 4));
    }

    #[test]
    fn triangle_connection_is_one_eighth() {
        let reg =
            LatticeRegion::new(RegionShape::Rhombus { side: 2 }, 1.0, Vec2::new(0.0, 0.0)).unwrap();
        let tri = [
            reg.index_of(SiteCoord::new(-1, -1)).unwrap(),
            reg.index_of(SiteCoord::new(0, -1)).unwrap(),
            reg.index_of(SiteCoord::new(-1, 0)).unwrap(),
        ];
        let p = brute_force_probability(&reg, |cfg| {
            let labels = label(cfg);
            connection_event(&labels, &tri)
        })
        .unwrap();
        assert_eq!(p, Exact::new(1, 8));
    }

    #[test]
    fn hex_flower_one_arm_count() {
        // 7-site flower: the one-arm event to the first ring holds iff the
        // center is open and at least one neighbor is open: 63/128
        let reg =
            LatticeRegion::new(RegionShape::Disk { radius: 1 }, 1.0, Vec2::new(0.0, 0.0)).unwrap();
        assert_eq!(reg.site_count(), 7);
        let center = reg.index_of(SiteCoord::new(0, 0)).unwrap();
        let p = brute_force_probability(&reg, |cfg| {
            if !cfg.is_open(center) {
                return false;
            }
            crate::lattice::neighbors(SiteCoord::new(0, 0))
                .iter()
                .any(|&t| reg.index_of(t).map(|i| cfg.is_open(i)).unwrap_or(false))
        })
        .unwrap();
        assert_eq!(p, Exact::new(63, 128));
    }

    #[test]
    fn guard_refuses_large_regions() {
        let reg =
            LatticeRegion::new(RegionShape::Rhombus { side: 6 }, 1.0, Vec2::new(0.0, 0.0)).unwrap();
        assert!(brute_force_probability(&reg, |_| true).is_err());
    }
}
