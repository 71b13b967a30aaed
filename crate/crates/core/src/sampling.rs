//! Critical configurations with counter-based, replica-indexed randomness.
//!
//! Every site bit is a pure function of `(seed, replica, site index)`: the
//! keystream of a ChaCha8 generator keyed by the seed, with the replica as
//! the stream id and the site word as the position in the stream. Bits can
//! be produced sequentially or by random access with identical results, so
//! sampling is reproducible regardless of thread scheduling, and lazy
//! exploration reads the same configuration as a bulk fill.

use std::io::{Read, Write};
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticeRegion;

/// Hard limit for exhaustive enumeration.
pub const ENUMERATION_LIMIT: u32 = 25;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn expand_seed(seed: u64) -> [u8; 32] {
    let mut s = seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    out
}

/// Derive an independent seed for a separate randomness domain (e.g. the
/// cluster signs) from an experiment seed.
pub fn domain_seed(seed: u64, domain: u64) -> u64 {
    let mut s = seed ^ domain.wrapping_mul(0xd1342543de82ef95);
    splitmix64(&mut s)
}

/// Counter-addressable stream of 64-bit words keyed by a seed.
pub struct WordStream {
    rng: ChaCha8Rng,
}

impl WordStream {
    pub fn new(seed: u64) -> Self {
        WordStream { rng: ChaCha8Rng::from_seed(expand_seed(seed)) }
    }

    /// Word `word_index` of stream `replica`.
    pub fn word(&mut self, replica: u64, word_index: u64) -> u64 {
        self.rng.set_stream(replica);
        self.rng.set_word_pos(word_index as u128 * 2);
        self.rng.next_u64()
    }

    /// Fill `out` with words 0..out.len() of stream `replica`.
    pub fn fill(&mut self, replica: u64, out: &mut [u64]) {
        self.rng.set_stream(replica);
        self.rng.set_word_pos(0);
        for w in out.iter_mut() {
            *w = self.rng.next_u64();
        }
    }
}

/// One percolation configuration: a bit per site, open = 1, in canonical
/// site order. Masked sites are always closed.
#[derive(Clone, Debug)]
pub struct Configuration {
    region: Arc<LatticeRegion>,
    words: Vec<u64>,
    pub seed: u64,
    pub replica: u64,
}

impl Configuration {
    pub fn region(&self) -> &Arc<LatticeRegion> {
        &self.region
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_open(&self, index: u32) -> bool {
        self.words[index as usize / 64] & (1u64 << (index % 64)) != 0
    }

    pub fn open_count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Configuration with every unmasked bit flipped.
    pub fn complement(&self) -> Configuration {
        let mask = self.region.mask_words();
        let words = self
            .words
            .iter()
            .zip(mask)
            .map(|(w, m)| !w & m)
            .collect();
        Configuration {
            region: self.region.clone(),
            words,
            seed: self.seed,
            replica: self.replica,
        }
    }

    /// Build a configuration from an explicit predicate (testing and
    /// constructed witnesses). Masked sites stay closed.
    pub fn from_open_fn(region: &Arc<LatticeRegion>, open: impl Fn(u32) -> bool) -> Configuration {
        let mut words = vec![0u64; region.word_count()];
        for i in 0..region.site_count() {
            if open(i) {
                words[i as usize / 64] |= 1u64 << (i % 64);
            }
        }
        for (w, m) in words.iter_mut().zip(region.mask_words()) {
            *w &= m;
        }
        Configuration { region: region.clone(), words, seed: 0, replica: 0 }
    }

    /// Serialize: magic "PERC1", u32 LE descriptor length, descriptor JSON,
    /// then the packed words as little-endian u64.
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"PERC1")?;
        let json = serde_json::to_vec(&self.region.descriptor())?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a configuration written by [`Configuration::write_dump`]. The
    /// seed/replica provenance is not part of the format.
    pub fn read_dump(r: &mut impl Read) -> Result<Configuration> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != b"PERC1" {
            return Err(Error::BadDump("missing PERC1 magic".into()));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut json)?;
        let descriptor = serde_json::from_slice(&json)?;
        let region = LatticeRegion::from_descriptor(&descriptor)?;
        let mut words = vec![0u64; region.word_count()];
        for word in words.iter_mut() {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)?;
            *word = u64::from_le_bytes(buf);
        }
        for (w, m) in words.iter_mut().zip(region.mask_words()) {
            if *w & !m != 0 {
                return Err(Error::BadDump("masked site marked open".into()));
            }
        }
        Ok(Configuration { region, words, seed: 0, replica: 0 })
    }
}

/// Sample a critical configuration: each unmasked site is an independent
/// fair coin determined by `(seed, replica, site index)`.
pub fn sample(region: &Arc<LatticeRegion>, seed: u64, replica: u64) -> Configuration {
    let mut stream = WordStream::new(seed);
    sample_with(&mut stream, region, seed, replica)
}

/// Sampling path that reuses a keyed stream across replicas.
pub fn sample_with(
    stream: &mut WordStream,
    region: &Arc<LatticeRegion>,
    seed: u64,
    replica: u64,
) -> Configuration {
    let mut words = vec![0u64; region.word_count()];
    stream.fill(replica, &mut words);
    for (w, m) in words.iter_mut().zip(region.mask_words()) {
        *w &= m;
    }
    Configuration { region: region.clone(), words, seed, replica }
}

/// Fill an existing buffer in place (hot loops).
pub fn sample_into(
    stream: &mut WordStream,
    region: &LatticeRegion,
    replica: u64,
    words: &mut Vec<u64>,
) {
    words.resize(region.word_count(), 0);
    stream.fill(replica, words);
    for (w, m) in words.iter_mut().zip(region.mask_words()) {
        *w &= m;
    }
}

/// Exhaustive enumeration of all `2^N` configurations of a region with `N`
/// unmasked sites, in lexicographic bit order (unmasked site 0 toggles
/// fastest). Refuses regions with more than [`ENUMERATION_LIMIT`] sites.
pub fn enumerate_all(region: &Arc<LatticeRegion>) -> Result<EnumerateAll> {
    let n = region.unmasked_count();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard { sites: n, limit: ENUMERATION_LIMIT });
    }
    let unmasked = (0..region.site_count()).filter(|&i| !region.is_masked(i)).collect();
    Ok(EnumerateAll { region: region.clone(), unmasked, next: 0 })
}

#[derive(Debug)]
pub struct EnumerateAll {
    region: Arc<LatticeRegion>,
    unmasked: Vec<u32>,
    next: u64,
}

impl EnumerateAll {
    pub fn total(&self) -> u64 {
        1u64 << self.unmasked.len()
    }
}

impl Iterator for EnumerateAll {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.next >= self.total() {
            return None;
        }
        let k = self.next;
        self.next += 1;
        let mut words = vec![0u64; self.region.word_count()];
        for (bit, &site) in self.unmasked.iter().enumerate() {
            if k >> bit & 1 == 1 {
                words[site as usize / 64] |= 1u64 << (site % 64);
            }
        }
        Some(Configuration { region: self.region.clone(), words, seed: 0, replica: k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::lattice::{DomainMask, RegionShape};

    fn tiny(half_width: u32) -> Arc<LatticeRegion> {
        LatticeRegion::new(RegionShape::Box { half_width }, 1.0, Vec2::new(0.0, 0.0)).unwrap()
    }

    fn rhombus(side: u32) -> Arc<LatticeRegion> {
        LatticeRegion::new(RegionShape::Rhombus { side }, 1.0, Vec2::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn identical_keys_give_identical_bits() {
        let reg = tiny(6);
        let a = sample(&reg, 42, 9);
        let b = sample(&reg, 42, 9);
        assert_eq!(a.words(), b.words());
        let c = sample(&reg, 42, 10);
        assert_ne!(a.words(), c.words());
    }

    #[test]
    fn random_access_matches_sequential_fill() {
        let reg = tiny(8);
        let cfg = sample(&reg, 7, 3);
        let mut ws = WordStream::new(7);
        for w in 0..reg.word_count() {
            let word = ws.word(3, w as u64) & reg.mask_words()[w];
            assert_eq!(word, cfg.words()[w], "word {w}");
        }
    }

    #[test]
    fn single_site_fair_coin() {
        let reg = rhombus(1);
        assert_eq!(reg.site_count(), 1);
        let n = 10_000u64;
        let mut open = 0u64;
        let mut ws = WordStream::new(123);
        for rep in 0..n {
            open += (ws.word(rep, 0) & 1) as u64;
        }
        let p = open as f64 / n as f64;
        let sigma = 0.5 / (n as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "p = {p}");
    }

    #[test]
    fn mean_density_is_half() {
        // 32x32 rhombus = 1024 sites, 10^4 replicas
        let reg = rhombus(32);
        let n = 10_000u64;
        let mut ws = WordStream::new(5);
        let mut open: u64 = 0;
        for rep in 0..n {
            let cfg = sample_with(&mut ws, &reg, 5, rep);
            open += cfg.open_count() as u64;
        }
        let total = (reg.site_count() as u64 * n) as f64;
        let p = open as f64 / total;
        let sigma = 0.5 / total.sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "density {p}, sigma {sigma}");
    }

    #[test]
    fn replica_streams_uncorrelated() {
        let reg = rhombus(16);
        let n_pairs = (reg.site_count() * 64) as usize;
        let mut ws = WordStream::new(99);
        let mut agree = 0usize;
        let mut total = 0usize;
        for rep in 0..64u64 {
            let a = sample_with(&mut ws, &reg, 99, 2 * rep);
            let b = sample_with(&mut ws, &reg, 99, 2 * rep + 1);
            for i in 0..reg.site_count() {
                agree += (a.is_open(i) == b.is_open(i)) as usize;
                total += 1;
            }
        }
        let corr = 2.0 * agree as f64 / total as f64 - 1.0;
        assert!(corr.abs() < 4.0 / (n_pairs as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn masked_sites_stay_closed() {
        let mask = DomainMask::Disk { center: [0.0, 0.0], radius: 2.5 };
        let reg = LatticeRegion::with_mask(
            RegionShape::Box { half_width: 5 },
            1.0,
            Vec2::new(0.0, 0.0),
            Some(mask),
        )
        .unwrap();
        let mut ws = WordStream::new(11);
        for rep in 0..200 {
            let cfg = sample_with(&mut ws, &reg, 11, rep);
            for i in 0..reg.site_count() {
                if reg.is_masked(i) {
                    assert!(!cfg.is_open(i));
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let reg = rhombus(1);
        let cfgs: Vec<_> = enumerate_all(&reg).unwrap().collect();
        assert_eq!(cfgs.len(), 2);
        assert!(!cfgs[0].is_open(0));
        assert!(cfgs[1].is_open(0));

        let reg2 = rhombus(2); // 4 sites
        assert_eq!(enumerate_all(&reg2).unwrap().count(), 16);
    }

    #[test]
    fn enumeration_guard() {
        let reg = rhombus(6); // 36 sites
        match enumerate_all(&reg) {
            Err(Error::EnumerationGuard { sites: 36, limit: 25 }) => {}
            other => panic!("expected guard, got {other:?}"),
        }
    }

    #[test]
    fn complement_flips_unmasked_bits() {
        let reg = tiny(4);
        let cfg = sample(&reg, 1, 2);
        let comp = cfg.complement();
        for i in 0..reg.site_count() {
            assert_eq!(cfg.is_open(i), !comp.is_open(i));
        }
    }

    #[test]
    fn dump_roundtrip() {
        let reg = tiny(4);
        let cfg = sample(&reg, 77, 8);
        let mut buf = Vec::new();
        cfg.write_dump(&mut buf).unwrap();
        assert_eq!(&buf[0..5], b"PERC1");
        let back = Configuration::read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(back.words(), cfg.words());
        assert_eq!(back.region().descriptor(), reg.descriptor());
    }
}
