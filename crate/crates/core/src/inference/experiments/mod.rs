//! Experiment engines: each takes a parameter struct, runs deterministic
//! replica-indexed sampling, and returns a serializable report.

pub mod connections;
pub mod coupling;
pub mod crossing;
pub mod field;
pub mod four_arm;
pub mod four_point;
pub mod oracles;
pub mod pi;

use std::sync::Arc;

use crate::error::Result;
use crate::events::{CompiledEvent, EventSpec, EventWorkspace};
use crate::inference::driver::run_chunked;
use crate::inference::estimate::{BinomialAcc, Estimate};
use crate::lattice::LatticeRegion;
use crate::sampling::{sample_with, WordStream};

/// Monte Carlo frequency of an arbitrary event with binomial error bars.
/// Deterministic in (spec, region, seed) and mergeable across workers.
pub fn estimate_event(
    region: &Arc<LatticeRegion>,
    spec: &EventSpec,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let compiled = CompiledEvent::compile(region, spec)?;
    let chunks = run_chunked(n_samples, |range| {
        let mut ws = WordStream::new(seed);
        let mut work = EventWorkspace::default();
        let mut acc = BinomialAcc::default();
        for rep in range {
            let cfg = sample_with(&mut ws, region, seed, rep);
            acc.push(compiled.eval(&cfg, &mut work));
        }
        acc
    });
    let mut total = BinomialAcc::default();
    for c in &chunks {
        total.merge(c);
    }
    Ok(total.estimate())
}
