//! One-arm probability over a grid of radii.
//!
//! The estimator explores only the cluster of the origin, lazily
//! materializing the configuration word by word, and records the largest
//! reach of the cluster; every radius of the grid is then answered by one
//! comparison. Exploration is pruned at the largest radius, which leaves
//! all events at smaller radii unchanged.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::events::check_disk_margin;
use crate::inference::driver::run_chunked;
use crate::inference::estimate::{BinomialAcc, Estimate, VectorAcc};
use crate::inference::fit::{fit_power_law_stabilized, StabilizedFit};
use crate::lattice::{BoundaryConvention, LatticeRegion, SiteCoord, NEIGHBOR_OFFSETS};
use crate::sampling::WordStream;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiScalingParams {
    pub radii: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub convention: BoundaryConvention,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiScalingReport {
    pub estimates: Vec<(f64, Estimate)>,
    pub fit: Option<StabilizedFit>,
    /// Joint accumulator for ratio tests across radii.
    pub joint: VectorAcc,
}

impl PiScalingReport {
    /// Delta-method estimate of π(r_i) / π(r_j).
    pub fn ratio(&self, i: usize, j: usize) -> Estimate {
        let (pi, pj) = (self.joint.mean(i), self.joint.mean(j));
        let ratio = pi / pj;
        let dim = self.joint.dim;
        let mut grad = vec![0.0; dim];
        grad[i] = 1.0 / pj;
        grad[j] = -pi / (pj * pj);
        self.joint.delta_method(ratio, &grad)
    }
}

/// Per-worker exploration state with epoch-stamped lazy words.
struct Explorer {
    stream: WordStream,
    words: Vec<u64>,
    word_epoch: Vec<u32>,
    visited: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl Explorer {
    fn new(seed: u64, region: &LatticeRegion) -> Self {
        Explorer {
            stream: WordStream::new(seed),
            words: vec![0; region.word_count()],
            word_epoch: vec![0; region.word_count()],
            visited: vec![0; region.site_count() as usize],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    #[inline]
    fn is_open(&mut self, region: &LatticeRegion, replica: u64, site: u32) -> bool {
        let w = site as usize / 64;
        if self.word_epoch[w] != self.epoch {
            self.word_epoch[w] = self.epoch;
            self.words[w] = self.stream.word(replica, w as u64) & region.mask_words()[w];
        }
        self.words[w] & (1u64 << (site % 64)) != 0
    }
}

/// Largest reach of the origin cluster, pruned at `r_max`. Negative
/// infinity when the origin is closed.
fn max_reach(
    ex: &mut Explorer,
    region: &LatticeRegion,
    replica: u64,
    origin: u32,
    reach: &[f32],
    in_band: &[bool],
    r_max: f64,
) -> f64 {
    ex.epoch += 1;
    if !ex.is_open(region, replica, origin) {
        return f64::NEG_INFINITY;
    }
    let mut best = reach[origin as usize] as f64;
    ex.visited[origin as usize] = ex.epoch;
    ex.stack.clear();
    ex.stack.push(origin);
    while let Some(i) = ex.stack.pop() {
        if best >= r_max {
            break;
        }
        let s = region.coord(i);
        for (dq, dr) in NEIGHBOR_OFFSETS {
            let t = SiteCoord::new(s.q + dq, s.r + dr);
            let Some(j) = region.index_of(t) else { continue };
            if !in_band[j as usize] || ex.visited[j as usize] == ex.epoch {
                continue;
            }
            ex.visited[j as usize] = ex.epoch;
            if ex.is_open(region, replica, j) {
                best = best.max(reach[j as usize] as f64);
                ex.stack.push(j);
            }
        }
    }
    best
}

pub fn run(region: &Arc<LatticeRegion>, params: &PiScalingParams) -> Result<PiScalingReport> {
    if params.radii.is_empty() {
        return Err(Error::InvalidEvent("pi scaling needs at least one radius".into()));
    }
    let mut radii = params.radii.clone();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r_max = *radii.last().unwrap();
    let center = region.center();
    check_disk_margin(region, center, r_max)?;
    let origin = region
        .index_of(SiteCoord::new(0, 0))
        .ok_or_else(|| Error::Geometry("region has no origin site".into()))?;

    // per-site reach metric and exploration band, shared read-only
    let a = region.spacing();
    let n = region.site_count() as usize;
    let mut reach = vec![0f32; n];
    let mut in_band = vec![false; n];
    for i in 0..n as u32 {
        let m = region.reach_metric(i, center, params.convention);
        reach[i as usize] = m as f32;
        let d = region.embed_index(i).dist(center);
        in_band[i as usize] = match params.convention {
            BoundaryConvention::HexIntersect => {
                d - crate::geom::hex_circumradius(a) <= r_max
            }
            BoundaryConvention::CenterDistance => d <= r_max + a,
        };
    }

    let dim = radii.len();
    let chunks = run_chunked(params.n_samples, |range| {
        let mut ex = Explorer::new(params.seed, region);
        let mut accs = vec![BinomialAcc::default(); dim];
        let mut joint = VectorAcc::new(dim);
        let mut indicator = vec![0.0; dim];
        for rep in range {
            let m = max_reach(&mut ex, region, rep, origin, &reach, &in_band, r_max);
            for (k, &r) in radii.iter().enumerate() {
                let hit = m >= r;
                accs[k].push(hit);
                indicator[k] = hit as u8 as f64;
            }
            joint.push(&indicator);
        }
        (accs, joint)
    });

    let mut accs = vec![BinomialAcc::default(); dim];
    let mut joint = VectorAcc::new(dim);
    for (chunk_accs, chunk_joint) in &chunks {
        for (a, c) in accs.iter_mut().zip(chunk_accs) {
            a.merge(c);
        }
        joint.merge(chunk_joint);
    }
    let estimates: Vec<(f64, Estimate)> =
        radii.iter().zip(&accs).map(|(&r, acc)| (r, acc.estimate())).collect();
    let fit = if estimates.len() >= 3 { Some(fit_power_law_stabilized(&estimates)?) } else { None };
    Ok(PiScalingReport { estimates, fit, joint })
}

/// One-arm frequency at a single radius from the origin site.
pub fn estimate_pi(
    region: &Arc<LatticeRegion>,
    radius: f64,
    n_samples: u64,
    seed: u64,
    convention: BoundaryConvention,
) -> Result<Estimate> {
    let report = run(
        region,
        &PiScalingParams { radii: vec![radius], n_samples, seed, convention },
    )?;
    Ok(report.estimates[0].1)
}
