//! Left-right open crossings of a rhombus; at p = 1/2 the crossing
//! probability is exactly one half by self-duality.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::inference::driver::run_chunked;
use crate::inference::estimate::{BinomialAcc, Estimate};
use crate::lattice::{LatticeRegion, RegionShape, SiteCoord, NEIGHBOR_OFFSETS};
use crate::sampling::{sample_into, WordStream};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingParams {
    pub sides: Vec<u32>,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingReport {
    pub estimates: Vec<(u32, Estimate)>,
}

/// Open path from the leftmost to the rightmost column of the rhombus.
pub fn has_left_right_crossing(
    region: &LatticeRegion,
    words: &[u64],
    visited: &mut Vec<u32>,
    epoch: &mut u32,
    stack: &mut Vec<u32>,
) -> bool {
    let RegionShape::Rhombus { side } = region.shape() else {
        panic!("crossing experiment needs a rhombus region");
    };
    let q0 = -((side / 2) as i32);
    let q1 = q0 + side as i32 - 1;
    let open = |i: u32| words[i as usize / 64] & (1u64 << (i % 64)) != 0;
    *epoch += 1;
    visited.resize(region.site_count() as usize, 0);
    stack.clear();
    for r in 0..side as i32 {
        let rr = q0 + r;
        if let Some(i) = region.index_of(SiteCoord::new(q0, rr)) {
            if open(i) {
                visited[i as usize] = *epoch;
                stack.push(i);
            }
        }
    }
    while let Some(i) = stack.pop() {
        let s = region.coord(i);
        if s.q == q1 {
            return true;
        }
        for (dq, dr) in NEIGHBOR_OFFSETS {
            let t = SiteCoord::new(s.q + dq, s.r + dr);
            if let Some(j) = region.index_of(t) {
                if open(j) && visited[j as usize] != *epoch {
                    visited[j as usize] = *epoch;
                    stack.push(j);
                }
            }
        }
    }
    false
}

pub fn run(params: &CrossingParams) -> Result<CrossingReport> {
    let mut estimates = Vec::new();
    for &side in &params.sides {
        if side < 2 {
            return Err(Error::InvalidRegion("rhombus side must be >= 2".into()));
        }
        let region: Arc<LatticeRegion> = LatticeRegion::new(
            RegionShape::Rhombus { side },
            1.0,
            crate::geom::Vec2::new(0.0, 0.0),
        )?;
        let chunks = run_chunked(params.n_samples, |range| {
            let mut ws = WordStream::new(params.seed);
            let mut words = Vec::new();
            let mut visited = Vec::new();
            let mut stack = Vec::new();
            let mut epoch = 0u32;
            let mut acc = BinomialAcc::default();
            for rep in range {
                sample_into(&mut ws, &region, rep, &mut words);
                acc.push(has_left_right_crossing(
                    &region,
                    &words,
                    &mut visited,
                    &mut epoch,
                    &mut stack,
                ));
            }
            acc
        });
        let mut total = BinomialAcc::default();
        for c in &chunks {
            total.merge(c);
        }
        estimates.push((side, total.estimate()));
    }
    Ok(CrossingReport { estimates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_probability_is_one_half() {
        let report =
            run(&CrossingParams { sides: vec![8, 16], n_samples: 20_000, seed: 42 }).unwrap();
        for (side, est) in &report.estimates {
            assert!(
                (est.mean - 0.5).abs() < 3.5 * est.std_error,
                "side {side}: {} +- {}",
                est.mean,
                est.std_error
            );
        }
    }

    #[test]
    fn degenerate_cases() {
        // a fully open rhombus always crosses; a fully closed one never does
        let region: Arc<LatticeRegion> = LatticeRegion::new(
            RegionShape::Rhombus { side: 5 },
            1.0,
            crate::geom::Vec2::new(0.0, 0.0),
        )
        .unwrap();
        let all_open = crate::sampling::Configuration::from_open_fn(&region, |_| true);
        let mut visited = Vec::new();
        let mut stack = Vec::new();
        let mut epoch = 0;
        assert!(has_left_right_crossing(
            &region,
            all_open.words(),
            &mut visited,
            &mut epoch,
            &mut stack
        ));
        let all_closed = crate::sampling::Configuration::from_open_fn(&region, |_| false);
        assert!(!has_left_right_crossing(
            &region,
            all_closed.words(),
            &mut visited,
            &mut epoch,
            &mut stack
        ));
    }
}
