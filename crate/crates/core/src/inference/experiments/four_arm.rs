//! Four-arm probability over a grid of annulus aspect ratios.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::Result;
use crate::events::{four_arm, AnnulusGeometry, AnnulusScratch, AnnulusSpec};
use crate::geom::Vec2;
use crate::inference::driver::run_chunked;
use crate::inference::estimate::{BinomialAcc, Estimate};
use crate::inference::fit::{fit_power_law_stabilized, StabilizedFit};
use crate::lattice::{LatticeRegion, RegionShape};
use crate::sampling::{sample_with, WordStream};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourArmParams {
    /// Inner radius in lattice units.
    pub inner: f64,
    /// Aspect ratios R / r.
    pub aspects: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourArmReport {
    pub estimates: Vec<(f64, Estimate)>,
    pub fit: Option<StabilizedFit>,
}

pub fn run(params: &FourArmParams) -> Result<FourArmReport> {
    let mut estimates = Vec::new();
    for &aspect in &params.aspects {
        let outer = params.inner * aspect;
        // a snug region per aspect keeps the sample cost proportional to
        // the annulus, not to the largest scale
        let half_width = outer.ceil() as u32 + 3;
        let region: Arc<LatticeRegion> =
            LatticeRegion::new(RegionShape::Box { half_width }, 1.0, Vec2::new(0.0, 0.0))?;
        let geom = AnnulusGeometry::new(
            &region,
            AnnulusSpec { center: [0.0, 0.0], inner: params.inner, outer },
        )?;
        let chunks = run_chunked(params.n_samples, |range| {
            let mut ws = WordStream::new(params.seed);
            let mut scratch = AnnulusScratch::new();
            let mut acc = BinomialAcc::default();
            for rep in range {
                let cfg = sample_with(&mut ws, &region, params.seed, rep);
                acc.push(four_arm(&cfg, &geom, &mut scratch));
            }
            acc
        });
        let mut total = BinomialAcc::default();
        for c in &chunks {
            total.merge(c);
        }
        estimates.push((aspect, total.estimate()));
    }
    let fit =
        if estimates.len() >= 3 { Some(fit_power_law_stabilized(&estimates)?) } else { None };
    Ok(FourArmReport { estimates, fit })
}
