//! Stopping-set validation for the annulus exploration.
//!
//! An open circuit found by exploring from the inside reveals nothing
//! outside itself, so conditioning on the circuit, its interior and a
//! radial connection through it factorizes from the configuration outside.
//! The validation has two parts: an exact identity on enumerable micro
//! instances (conditional probabilities as integer-counted rationals), and
//! a stratified two-proportion comparison of the two conditioned ensembles
//! at moderate scale, matched on the discovered circuit class.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

use crate::clusters::Labeler;
use crate::error::{Error, Result};
use crate::events::{
    annulus_crossing, crossing_cluster_count, AnnulusGeometry, AnnulusScratch, AnnulusSpec,
};
use crate::geom::Vec2;
use crate::inference::driver::{chunk_ranges, run_chunked};
use crate::lattice::{DomainMask, LatticeRegion, RegionShape, SiteCoord, NEIGHBOR_OFFSETS};
use crate::loops::innermost_open_circuit;
use crate::sampling::{sample_with, Configuration, WordStream};

// ---------------------------------------------------------------------------
// exact part

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactInstanceReport {
    pub name: String,
    pub interior_configs_checked: u64,
    pub outside_events_checked: usize,
    pub all_identities_hold: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoppingSetExactReport {
    pub instances: Vec<ExactInstanceReport>,
}

impl StoppingSetExactReport {
    pub fn pass(&self) -> bool {
        self.instances.iter().all(|i| i.all_identities_hold)
    }
}

/// BFS test: does the cluster of the origin reach a cell touching or
/// beyond radius `eps`?
fn origin_reaches(region: &LatticeRegion, words: &[u64], origin: u32, eps: f64) -> bool {
    let open = |i: u32| words[i as usize / 64] & (1u64 << (i % 64)) != 0;
    if !open(origin) {
        return false;
    }
    let center = region.embed_index(origin);
    let mut seen = vec![false; region.site_count() as usize];
    let mut stack = vec![origin];
    seen[origin as usize] = true;
    while let Some(i) = stack.pop() {
        let (_, dmax) = region.hex_distance_bounds(i, center);
        if dmax >= eps {
            return true;
        }
        let s = region.coord(i);
        for (dq, dr) in NEIGHBOR_OFFSETS {
            if let Some(j) = region.index_of(SiteCoord::new(s.q + dq, s.r + dr)) {
                if open(j) && !seen[j as usize] {
                    seen[j as usize] = true;
                    stack.push(j);
                }
            }
        }
    }
    false
}

/// One exact instance: a fixed circuit around the origin, every interior
/// configuration paired against exhaustive enumeration of the outside.
///
/// For each admissible interior state the identity
/// P(A | interior, circuit open, 0 ↔ ∂B_ε) = P(A | circuit ↔ ∂B_ε)
/// is checked as an equality of integer-counted rationals.
fn exact_instance(
    name: &str,
    region: &Arc<LatticeRegion>,
    circuit: &[u32],
    interior: &[u32],
    outside: &[u32],
    eps: f64,
    events: &[(&str, &dyn Fn(&[bool]) -> bool)],
) -> Result<ExactInstanceReport> {
    let origin = region
        .index_of(SiteCoord::new(0, 0))
        .ok_or_else(|| Error::Geometry("instance needs the origin site".into()))?;
    let n_out = outside.len();
    assert!(n_out <= 20, "outside enumeration too large");
    let mut words = vec![0u64; region.word_count()];
    let set = |words: &mut [u64], i: u32, v: bool| {
        if v {
            words[i as usize / 64] |= 1 << (i % 64);
        } else {
            words[i as usize / 64] &= !(1 << (i % 64));
        }
    };

    // rhs: conditioning only on "circuit ↔ ∂B_ε" (outside-measurable):
    // an open path outside the circuit, starting adjacent to it, reaching
    // radius eps. Interior and circuit bits are free.
    let interior_and_circuit: Vec<u32> =
        interior.iter().chain(circuit.iter()).copied().collect();
    let mut rhs_cond: u64 = 0;
    let mut rhs_hit = vec![0u64; events.len()];
    let mut outside_states = vec![false; n_out];
    for mask in 0u64..(1 << n_out) {
        for (b, &site) in outside.iter().enumerate() {
            outside_states[b] = mask >> b & 1 == 1;
        }
        // circuit ↔ ∂B_ε in the outside-measurable sense: flood from open
        // sites adjacent to the circuit through open outside sites
        let reached = {
            let mut seen = vec![false; n_out];
            let mut stack: Vec<usize> = Vec::new();
            for (b, &site) in outside.iter().enumerate() {
                if !outside_states[b] {
                    continue;
                }
                let s = region.coord(site);
                let adj_to_circuit = NEIGHBOR_OFFSETS.iter().any(|(dq, dr)| {
                    region
                        .index_of(SiteCoord::new(s.q + dq, s.r + dr))
                        .map(|j| circuit.contains(&j))
                        .unwrap_or(false)
                });
                if adj_to_circuit {
                    seen[b] = true;
                    stack.push(b);
                }
            }
            let mut hit = false;
            while let Some(b) = stack.pop() {
                let site = outside[b];
                let center = region.embed_index(origin);
                let (_, dmax) = region.hex_distance_bounds(site, center);
                if dmax >= eps {
                    hit = true;
                    break;
                }
                let s = region.coord(site);
                for (dq, dr) in NEIGHBOR_OFFSETS {
                    if let Some(j) = region.index_of(SiteCoord::new(s.q + dq, s.r + dr)) {
                        if let Some(bj) = outside.iter().position(|&o| o == j) {
                            if outside_states[bj] && !seen[bj] {
                                seen[bj] = true;
                                stack.push(bj);
                            }
                        }
                    }
                }
            }
            hit
        };
        if reached {
            rhs_cond += 1;
            for (k, (_, ev)) in events.iter().enumerate() {
                rhs_hit[k] += ev(&outside_states) as u64;
            }
        }
    }

    // lhs: enumerate interior states; for admissible ones enumerate the
    // outside, conditioning the production reach detector on the full
    // configuration
    let mut interiors_checked = 0u64;
    let mut all_hold = true;
    for imask in 0u64..(1 << interior.len()) {
        let mut lhs_cond: u64 = 0;
        let mut lhs_hit = vec![0u64; events.len()];
        for mask in 0u64..(1 << n_out) {
            words.iter_mut().for_each(|w| *w = 0);
            for &c in circuit {
                set(&mut words, c, true);
            }
            for (b, &site) in interior.iter().enumerate() {
                set(&mut words, site, imask >> b & 1 == 1);
            }
            for (b, &site) in outside.iter().enumerate() {
                outside_states[b] = mask >> b & 1 == 1;
                set(&mut words, site, outside_states[b]);
            }
            if origin_reaches(region, &words, origin, eps) {
                lhs_cond += 1;
                for (k, (_, ev)) in events.iter().enumerate() {
                    lhs_hit[k] += ev(&outside_states) as u64;
                }
            }
        }
        if lhs_cond == 0 {
            continue; // interior state makes the conditioning impossible
        }
        interiors_checked += 1;
        for k in 0..events.len() {
            // lhs_hit / lhs_cond == rhs_hit / rhs_cond, cross-multiplied
            let lhs = lhs_hit[k] as u128 * rhs_cond as u128;
            let rhs = rhs_hit[k] as u128 * lhs_cond as u128;
            if lhs != rhs {
                all_hold = false;
            }
        }
        let _ = &interior_and_circuit;
    }
    Ok(ExactInstanceReport {
        name: name.to_string(),
        interior_configs_checked: interiors_checked,
        outside_events_checked: events.len(),
        all_identities_hold: all_hold,
    })
}

/// Exact stopping-set identities on two micro instances.
pub fn stopping_set_exact() -> Result<StoppingSetExactReport> {
    let mut instances = Vec::new();

    // instance 1: disk(3) masked to 19 sites; circuit = first ring,
    // interior = origin, outside = second ring, eps beyond the first ring
    {
        let region = LatticeRegion::with_mask(
            RegionShape::Disk { radius: 3 },
            1.0,
            Vec2::new(0.0, 0.0),
            Some(DomainMask::Disk { center: [0.0, 0.0], radius: 2.3 }),
        )?;
        let by_dist = |lo: f64, hi: f64| -> Vec<u32> {
            (0..region.site_count())
                .filter(|&i| {
                    let d = region.embed_index(i).norm();
                    d > lo && d < hi && !region.is_masked(i)
                })
                .collect()
        };
        let circuit = by_dist(0.5, 1.5);
        let interior = vec![region.index_of(SiteCoord::new(0, 0)).unwrap()];
        let outside = by_dist(1.5, 2.3);
        assert_eq!((circuit.len(), outside.len()), (6, 12));
        let ev_count =
            |states: &[bool]| states.iter().filter(|&&s| s).count() >= 4;
        let ev_pair = |states: &[bool]| states[0] && states[5];
        let ev_parity = |states: &[bool]| states.iter().filter(|&&s| s).count() % 2 == 0;
        instances.push(exact_instance(
            "ring1-circuit",
            &region,
            &circuit,
            &interior,
            &outside,
            2.0,
            &[
                ("at-least-4-open", &ev_count),
                ("two-sites-open", &ev_pair),
                ("even-count", &ev_parity),
            ],
        )?);
    }

    // instance 2: full disk(3); circuit = second ring, interior = origin
    // plus first ring (128 interior states), outside = third ring
    {
        let region =
            LatticeRegion::new(RegionShape::Disk { radius: 3 }, 1.0, Vec2::new(0.0, 0.0))?;
        let by_dist = |lo: f64, hi: f64| -> Vec<u32> {
            (0..region.site_count())
                .filter(|&i| {
                    let d = region.embed_index(i).norm();
                    d > lo && d < hi
                })
                .collect()
        };
        let circuit = by_dist(1.5, 2.1);
        let mut interior = by_dist(-1.0, 1.5);
        interior.sort_unstable();
        let outside = by_dist(2.1, 3.1);
        assert_eq!((circuit.len(), interior.len(), outside.len()), (12, 7, 18));
        let ev_count = |states: &[bool]| states.iter().filter(|&&s| s).count() >= 9;
        let ev_pair = |states: &[bool]| states[0] && states[9];
        instances.push(exact_instance(
            "ring2-circuit",
            &region,
            &circuit,
            &interior,
            &outside,
            3.1,
            &[("at-least-9-open", &ev_count), ("two-sites-open", &ev_pair)],
        )?);
    }

    Ok(StoppingSetExactReport { instances })
}

/// Per-sample factorization property: whenever the exploration finds an
/// innermost circuit, the radial event factorizes through it.
pub fn factorization_holds_on_samples(
    region: &Arc<LatticeRegion>,
    eta: f64,
    delta: f64,
    eps: f64,
    n_samples: u64,
    seed: u64,
) -> Result<u64> {
    let geom = AnnulusGeometry::new(
        region,
        AnnulusSpec { center: [0.0, 0.0], inner: eta, outer: delta },
    )?;
    let origin = region
        .index_of(SiteCoord::new(0, 0))
        .ok_or_else(|| Error::Geometry("region needs the origin".into()))?;
    let mut ws = WordStream::new(seed);
    let mut scratch = AnnulusScratch::new();
    let mut violations = 0u64;
    for rep in 0..n_samples {
        let cfg = sample_with(&mut ws, region, seed, rep);
        let Some(circuit) = innermost_open_circuit(&cfg, &geom, &mut scratch)? else {
            continue;
        };
        // 0 ↔ ∂B_eps  ⟺  (0 ↔ circuit) ∧ (circuit ↔ ∂B_eps)
        let full = origin_reaches(region, cfg.words(), origin, eps);
        let to_circuit = {
            // reuse the reach detector on a configuration whose sites
            // beyond the circuit are forced closed would be wrong; instead
            // BFS from the origin and stop at circuit membership
            let open = |i: u32| cfg.is_open(i);
            let mut seen = vec![false; region.site_count() as usize];
            let mut stack = vec![origin];
            let mut hit = false;
            if open(origin) {
                seen[origin as usize] = true;
                while let Some(i) = stack.pop() {
                    if circuit.sites.contains(&i) {
                        hit = true;
                        break;
                    }
                    let s = region.coord(i);
                    for (dq, dr) in NEIGHBOR_OFFSETS {
                        if let Some(j) = region.index_of(SiteCoord::new(s.q + dq, s.r + dr)) {
                            if open(j) && !seen[j as usize] {
                                seen[j as usize] = true;
                                stack.push(j);
                            }
                        }
                    }
                }
            }
            hit
        };
        let from_circuit = {
            let center = region.embed_index(origin);
            let open = |i: u32| cfg.is_open(i);
            let mut seen = vec![false; region.site_count() as usize];
            let mut stack: Vec<u32> = circuit.sites.clone();
            for &c in &circuit.sites {
                seen[c as usize] = true;
            }
            let mut hit = false;
            while let Some(i) = stack.pop() {
                let (_, dmax) = region.hex_distance_bounds(i, center);
                if dmax >= eps {
                    hit = true;
                    break;
                }
                let s = region.coord(i);
                for (dq, dr) in NEIGHBOR_OFFSETS {
                    if let Some(j) = region.index_of(SiteCoord::new(s.q + dq, s.r + dr)) {
                        if open(j) && !seen[j as usize] {
                            seen[j as usize] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            hit
        };
        if full != (to_circuit && from_circuit) {
            violations += 1;
        }
    }
    Ok(violations)
}

// ---------------------------------------------------------------------------
// statistical part

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingTestParams {
    pub eta: f64,
    pub delta: f64,
    pub eps: f64,
    /// The outside event: an annulus-restricted open crossing of
    /// (inner, outer); both radii must exceed `delta` by a cell margin.
    pub outside_annulus: (f64, f64),
    pub target_accepted: u64,
    pub max_raw: u64,
    pub seed: u64,
    pub region_half_width: u32,
    /// Minimum acceptance rate before the geometry is declared too extreme.
    #[serde(default = "default_min_rate")]
    pub min_acceptance_rate: f64,
}

fn default_min_rate() -> f64 {
    1e-4
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingTestReport {
    pub accepted: [u64; 2],
    pub raw_used: [u64; 2],
    pub acceptance_rates: [f64; 2],
    pub matched_strata: usize,
    pub event_frequency: [f64; 2],
    pub z: f64,
    pub p_value: f64,
    pub pass: bool,
}

fn erfc(x: f64) -> f64 {
    // Abramowitz-Stegun 7.1.26, |error| < 1.5e-7
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let val = poly * (-x * x).exp();
    if sign >= 0.0 {
        val
    } else {
        2.0 - val
    }
}

fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

type Accepted = (u64, (u32, i64), bool);

fn scan_ensemble(
    region: &Arc<LatticeRegion>,
    params: &CouplingTestParams,
    seed: u64,
    condition_on_origin: bool,
) -> Result<(Vec<Accepted>, u64)> {
    let circuit_geom = AnnulusGeometry::new(
        region,
        AnnulusSpec { center: [0.0, 0.0], inner: params.eta, outer: params.delta },
    )?;
    let cond_geom = AnnulusGeometry::new(
        region,
        AnnulusSpec { center: [0.0, 0.0], inner: params.eta, outer: params.eps },
    )?;
    let (a1, a2) = params.outside_annulus;
    if a1 <= params.delta + 2.0 * region.spacing() {
        return Err(Error::ScaleHierarchy(format!(
            "outside event at {a1} is not clearly outside the stopping radius {}",
            params.delta
        )));
    }
    let outside_geom =
        AnnulusGeometry::new(region, AnnulusSpec { center: [0.0, 0.0], inner: a1, outer: a2 })?;
    let origin = region
        .index_of(SiteCoord::new(0, 0))
        .ok_or_else(|| Error::Geometry("region needs the origin".into()))?;

    let ranges = chunk_ranges(params.max_raw);
    let chunk_results: Vec<Result<Vec<Accepted>>> = run_chunked(params.max_raw, |range| {
        let _ = &ranges;
        let mut ws = WordStream::new(seed);
        let mut labeler = Labeler::new();
        let mut scratch = AnnulusScratch::new();
        let mut out: Vec<Accepted> = Vec::new();
        for rep in range {
            let cfg = sample_with(&mut ws, region, seed, rep);
            let accepted = if condition_on_origin {
                origin_reaches(region, cfg.words(), origin, params.eps)
            } else {
                let labels = labeler.label(&cfg);
                annulus_crossing(&labels, &cond_geom, &mut scratch)
            };
            if !accepted {
                continue;
            }
            let Some(circuit) = innermost_open_circuit(&cfg, &circuit_geom, &mut scratch)? else {
                continue;
            };
            let max_r = circuit
                .sites
                .iter()
                .map(|&s| region.embed_index(s).norm())
                .fold(0.0f64, f64::max);
            let class = (circuit.sites.len() as u32, (max_r * 8.0).round() as i64);
            let a = crossing_cluster_count(&cfg, &outside_geom, &mut scratch, true) >= 1;
            out.push((rep, class, a));
        }
        Ok(out)
    });

    let mut accepted = Vec::new();
    let mut raw_used = params.max_raw;
    'outer: for (chunk, range) in chunk_results.into_iter().zip(chunk_ranges(params.max_raw)) {
        for item in chunk? {
            accepted.push(item);
            if accepted.len() as u64 >= params.target_accepted {
                raw_used = item.0 + 1;
                break 'outer;
            }
        }
        let _ = range;
    }
    Ok((accepted, raw_used))
}

pub fn coupling_test(params: &CouplingTestParams) -> Result<CouplingTestReport> {
    let region: Arc<LatticeRegion> = LatticeRegion::new(
        RegionShape::Box { half_width: params.region_half_width },
        1.0,
        Vec2::new(0.0, 0.0),
    )?;
    let (acc1, raw1) = scan_ensemble(&region, params, crate::sampling::domain_seed(params.seed, 0xc1), true)?;
    let (acc2, raw2) = scan_ensemble(&region, params, crate::sampling::domain_seed(params.seed, 0xc2), false)?;
    let rates = [acc1.len() as f64 / raw1 as f64, acc2.len() as f64 / raw2 as f64];
    for rate in rates {
        if rate < params.min_acceptance_rate {
            return Err(Error::RejectionRateTooLow { rate, min: params.min_acceptance_rate });
        }
    }

    // stratified two-proportion comparison over matched circuit classes
    #[derive(Default)]
    struct Stratum {
        n1: f64,
        x1: f64,
        n2: f64,
        x2: f64,
    }
    let mut strata: HashMap<(u32, i64), Stratum> = HashMap::new();
    for (_, class, a) in &acc1 {
        let s = strata.entry(*class).or_default();
        s.n1 += 1.0;
        s.x1 += *a as u8 as f64;
    }
    for (_, class, a) in &acc2 {
        let s = strata.entry(*class).or_default();
        s.n2 += 1.0;
        s.x2 += *a as u8 as f64;
    }
    let mut num = 0.0;
    let mut var = 0.0;
    let mut matched = 0usize;
    for s in strata.values() {
        if s.n1 == 0.0 || s.n2 == 0.0 {
            continue;
        }
        matched += 1;
        let n = s.n1 + s.n2;
        let x = s.x1 + s.x2;
        num += s.x1 - s.n1 * x / n;
        if n > 1.0 {
            var += s.n1 * s.n2 * x * (n - x) / (n * n * (n - 1.0));
        }
    }
    let z = if var > 0.0 { num / var.sqrt() } else { 0.0 };
    let p_value = normal_two_sided_p(z);
    let freq = |acc: &[Accepted]| {
        if acc.is_empty() {
            0.0
        } else {
            acc.iter().filter(|(_, _, a)| *a).count() as f64 / acc.len() as f64
        }
    };
    Ok(CouplingTestReport {
        accepted: [acc1.len() as u64, acc2.len() as u64],
        raw_used: [raw1, raw2],
        acceptance_rates: rates,
        matched_strata: matched,
        event_frequency: [freq(&acc1), freq(&acc2)],
        z,
        p_value,
        pass: p_value > 0.01,
    })
}
