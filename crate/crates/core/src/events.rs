//! Boolean detectors for the percolation events the estimators quantify:
//! connections, partition events, one-arm events, annulus crossings, open
//! circuits (via duality), four-arm events and disjoint pair connections.
//!
//! Annulus-restricted connectivity uses only sites whose hexagonal cells
//! meet the closed annulus; boundary touch means the cell intersects the
//! bounding circle, and tangent cells count as intersecting.

use serde::{Deserialize, Serialize};

use crate::clusters::{ClusterLabels, Labeler};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::lattice::{
    BoundaryConvention, LatticeRegion, MaskDisk, SiteCoord, NEIGHBOR_OFFSETS,
};
use crate::sampling::Configuration;
use crate::Point;

/// Marked sites with a partition of their indices into blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub points: Vec<SiteCoord>,
    pub blocks: Vec<Vec<usize>>,
}

impl PartitionSpec {
    /// Blocks must be disjoint and cover all marked indices.
    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        let mut seen = vec![false; n];
        for b in &self.blocks {
            for &i in b {
                if i >= n {
                    return Err(Error::InvalidEvent(format!("block index {i} out of range")));
                }
                if seen[i] {
                    return Err(Error::InvalidEvent(format!("index {i} in two blocks")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidEvent("blocks do not cover all points".into()));
        }
        Ok(())
    }

    /// Every block has even size, as correlation estimation requires.
    pub fn all_blocks_even(&self) -> bool {
        self.blocks.iter().all(|b| b.len() % 2 == 0)
    }
}

/// Annulus in continuum units.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub center: [f64; 2],
    pub inner: f64,
    pub outer: f64,
}

impl AnnulusSpec {
    pub fn new(center: Point, inner: f64, outer: f64) -> Self {
        AnnulusSpec { center: [center.x, center.y], inner, outer }
    }

    pub fn center_point(&self) -> Point {
        Vec2::new(self.center[0], self.center[1])
    }
}

/// True iff all marked sites are open and share one cluster.
pub fn connection_event(labels: &ClusterLabels, points: &[u32]) -> bool {
    assert!(points.len() >= 2, "connection event needs at least two points");
    let Some(first) = labels.cluster_of(points[0]) else { return false };
    points[1..].iter().all(|&p| labels.cluster_of(p) == Some(first))
}

/// True iff each block lies in one open cluster and distinct blocks lie in
/// distinct clusters.
pub fn partition_event(labels: &ClusterLabels, points: &[u32], blocks: &[Vec<usize>]) -> bool {
    let mut block_clusters = Vec::with_capacity(blocks.len());
    for b in blocks {
        let Some(&first) = b.first() else { return false };
        let Some(c) = labels.cluster_of(points[first]) else { return false };
        for &i in &b[1..] {
            if labels.cluster_of(points[i]) != Some(c) {
                return false;
            }
        }
        if block_clusters.contains(&c) {
            return false;
        }
        block_clusters.push(c);
    }
    true
}

/// One-arm event: `x` is open and its cluster reaches the circle of radius
/// `r` around `x` (cell intersects the circle or lies beyond it).
pub fn one_arm(
    labels: &ClusterLabels,
    region: &LatticeRegion,
    x: SiteCoord,
    r: f64,
    convention: BoundaryConvention,
) -> Result<bool> {
    let Some(xi) = region.index_of(x) else {
        return Err(Error::Geometry(format!("site {x:?} outside region")));
    };
    let center = region.embed(x);
    check_disk_margin(region, center, r)?;
    let Some(cluster) = labels.cluster_of(xi) else { return Ok(false) };
    let ring = reach_ring(region, center, r, convention);
    Ok(ring.iter().any(|&s| labels.cluster_of(s) == Some(cluster)))
}

/// Sites through which any cluster path must pass when first reaching
/// distance `r` from `center`.
pub fn reach_ring(
    region: &LatticeRegion,
    center: Point,
    r: f64,
    convention: BoundaryConvention,
) -> Vec<u32> {
    match convention {
        BoundaryConvention::HexIntersect => region.sites_intersecting_circle(center, r),
        BoundaryConvention::CenterDistance => {
            let a = region.spacing();
            let mut out = Vec::new();
            for i in 0..region.site_count() {
                let d = region.embed_index(i).dist(center);
                if d >= r && d < r + a {
                    out.push(i);
                }
            }
            out
        }
    }
}

/// Margin diagnostic: the disk (plus one hexagon) must sit inside the
/// region.
pub fn check_disk_margin(region: &LatticeRegion, center: Point, r: f64) -> Result<()> {
    let a = region.spacing();
    let probe = r + 1.5 * a;
    for k in 0..48 {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / 48.0;
        let p = center + Vec2::new(ang.cos(), ang.sin()) * probe;
        let site = nearest_site(region, p);
        if region.index_of(site).is_none() {
            return Err(Error::Geometry(format!(
                "disk of radius {r} around ({}, {}) exceeds the region",
                center.x, center.y
            )));
        }
    }
    Ok(())
}

/// Nearest lattice site to a point (cube-coordinate rounding).
pub fn nearest_site(region: &LatticeRegion, p: Point) -> SiteCoord {
    let a = region.spacing();
    let c = region.center();
    let rf = (p.y - c.y) / (a * 0.866_025_403_784_438_6);
    let qf = (p.x - c.x) / a - 0.5 * rf;
    let sf = -qf - rf;
    let mut q = qf.round();
    let mut r = rf.round();
    let s = sf.round();
    let dq = (q - qf).abs();
    let dr = (r - rf).abs();
    let ds = (s - sf).abs();
    if dq > dr && dq > ds {
        q = -r - s;
    } else if dr > ds {
        r = -q - s;
    }
    SiteCoord::new(q as i32, r as i32)
}

const FLAG_INNER_TOUCH: u8 = 1;
const FLAG_OUTER_TOUCH: u8 = 2;
const FLAG_OUTER_FRONTIER: u8 = 4;

/// Precomputed site sets of one annulus in one region; reused across
/// samples. Local indices address the annulus sites densely.
#[derive(Debug)]
pub struct AnnulusGeometry {
    pub spec: AnnulusSpec,
    /// Global indices of annulus sites (cells meeting the closed annulus),
    /// ascending.
    s_global: Vec<u32>,
    /// Local adjacency (u32::MAX where the neighbor is not an annulus site).
    adj: Vec<[u32; 6]>,
    flags: Vec<u8>,
    /// Sites strictly inside the inner disk; the exploration never checks
    /// their state.
    hole_global: Vec<u32>,
    /// Local annulus sites adjacent to each hole site.
    hole_adj: Vec<Vec<u32>>,
    /// Global indices of sites whose cell meets the closed inner disk.
    inner_candidates: Vec<u32>,
    outer_touch_global: Vec<u32>,
}

impl AnnulusGeometry {
    pub fn new(region: &LatticeRegion, spec: AnnulusSpec) -> Result<Self> {
        let (r, big_r) = (spec.inner, spec.outer);
        if !(r > 0.0 && big_r > r) {
            return Err(Error::Geometry(format!("annulus radii 0 < {r} < {big_r} violated")));
        }
        let center = spec.center_point();

        let a = region.spacing();
        let rc = crate::geom::hex_circumradius(a);
        let mut s_global = Vec::new();
        let mut hole_global = Vec::new();
        let mut inner_candidates = Vec::new();
        let band = big_r + 2.0 * a + rc;
        for i in 0..region.site_count() {
            let p = region.embed_index(i);
            let d = p.dist(center);
            if d > band {
                continue;
            }
            let (dmin, dmax) = region.hex_distance_bounds(i, center);
            if dmin <= r {
                inner_candidates.push(i);
            }
            if dmax < r {
                hole_global.push(i);
            } else if dmin <= big_r {
                s_global.push(i);
            }
        }
        if hole_global.is_empty() {
            return Err(Error::Geometry(format!(
                "inner radius {r} leaves no site strictly inside the inner disk"
            )));
        }
        if s_global.is_empty() {
            return Err(Error::Geometry("annulus contains no sites".into()));
        }

        let local_of = |g: u32, list: &[u32]| -> Option<u32> {
            list.binary_search(&g).ok().map(|k| k as u32)
        };

        let n = s_global.len();
        let mut adj = vec![[u32::MAX; 6]; n];
        let mut flags = vec![0u8; n];
        let mut outer_touch_global = Vec::new();
        for (li, &gi) in s_global.iter().enumerate() {
            let (dmin, dmax) = region.hex_distance_bounds(gi, center);
            if dmin <= r && r <= dmax {
                flags[li] |= FLAG_INNER_TOUCH;
            }
            if dmin <= big_r && big_r <= dmax {
                flags[li] |= FLAG_OUTER_TOUCH;
                outer_touch_global.push(gi);
            }
            let s = region.coord(gi);
            for (k, (dq, dr)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                let t = SiteCoord::new(s.q + dq, s.r + dr);
                let Some(gj) = region.index_of(t) else {
                    return Err(Error::Geometry(
                        "annulus must sit inside the region with a one-hexagon margin".into(),
                    ));
                };
                if let Some(lj) = local_of(gj, &s_global) {
                    adj[li][k] = lj;
                } else if local_of(gj, &hole_global).is_none() {
                    // neighbor beyond the outer edge
                    flags[li] |= FLAG_OUTER_FRONTIER;
                }
            }
        }

        let mut hole_adj = Vec::with_capacity(hole_global.len());
        for &gi in &hole_global {
            let s = region.coord(gi);
            let mut out = Vec::new();
            for (dq, dr) in NEIGHBOR_OFFSETS {
                let t = SiteCoord::new(s.q + dq, s.r + dr);
                if let Some(gj) = region.index_of(t) {
                    if let Some(lj) = local_of(gj, &s_global) {
                        out.push(lj);
                    }
                }
            }
            hole_adj.push(out);
        }

        Ok(AnnulusGeometry {
            spec,
            s_global,
            adj,
            flags,
            hole_global,
            hole_adj,
            inner_candidates,
            outer_touch_global,
        })
    }

    pub fn annulus_site_count(&self) -> usize {
        self.s_global.len()
    }

    pub fn annulus_sites(&self) -> &[u32] {
        &self.s_global
    }

    pub fn hole_sites(&self) -> &[u32] {
        &self.hole_global
    }

    pub fn global_of(&self, local: u32) -> u32 {
        self.s_global[local as usize]
    }

    pub fn local_adjacency(&self, local: u32) -> &[u32; 6] {
        &self.adj[local as usize]
    }

    pub fn is_inner_touch(&self, local: u32) -> bool {
        self.flags[local as usize] & FLAG_INNER_TOUCH != 0
    }

    pub fn is_outer_touch(&self, local: u32) -> bool {
        self.flags[local as usize] & FLAG_OUTER_TOUCH != 0
    }

    pub fn is_outer_frontier(&self, local: u32) -> bool {
        self.flags[local as usize] & FLAG_OUTER_FRONTIER != 0
    }

    pub(crate) fn hole_adjacency(&self) -> &[Vec<u32>] {
        &self.hole_adj
    }
}

/// Reusable per-worker scratch for the annulus detectors.
#[derive(Default)]
pub struct AnnulusScratch {
    parent: Vec<u32>,
    stamp_a: Vec<u32>,
    stamp_b: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
    visited: Vec<u32>,
}

impl AnnulusScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, n: usize) -> u32 {
        if self.stamp_a.len() < n {
            self.stamp_a.resize(n, 0);
            self.stamp_b.resize(n, 0);
            self.parent.resize(n, 0);
            self.visited.resize(n, 0);
        }
        self.epoch += 1;
        self.epoch
    }

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let p = parent[x as usize];
            parent[x as usize] = parent[p as usize];
            x = parent[p as usize];
        }
        x
    }
}

/// Annulus crossing: some open cluster contains a site whose cell meets
/// the closed inner disk and a site whose cell reaches the outer circle.
pub fn annulus_crossing(
    labels: &ClusterLabels,
    geom: &AnnulusGeometry,
    scratch: &mut AnnulusScratch,
) -> bool {
    let k = labels.cluster_count() as usize;
    let epoch = scratch.begin(k.max(1));
    for &g in &geom.inner_candidates {
        if let Some(c) = labels.cluster_of(g) {
            scratch.stamp_a[c as usize] = epoch;
        }
    }
    geom.outer_touch_global
        .iter()
        .any(|&g| matches!(labels.cluster_of(g), Some(c) if scratch.stamp_a[c as usize] == epoch))
}

/// Open circuit surrounding the annulus center, by duality: the event
/// fails iff closed sites connect the inner boundary to the outer boundary
/// within the annulus.
pub fn open_circuit_in_annulus(
    config: &Configuration,
    geom: &AnnulusGeometry,
    scratch: &mut AnnulusScratch,
) -> bool {
    !closed_flood_reaches_outer(config, geom, scratch, None)
}

/// Flood from the hole through closed annulus sites. Returns whether the
/// flood reaches the outer frontier; optionally records the visited closed
/// locals and the open shell.
pub(crate) fn closed_flood_reaches_outer(
    config: &Configuration,
    geom: &AnnulusGeometry,
    scratch: &mut AnnulusScratch,
    mut collect: Option<(&mut Vec<u32>, &mut Vec<u32>)>,
) -> bool {
    let n = geom.annulus_site_count();
    let epoch = scratch.begin(n);
    scratch.queue.clear();
    let mut reached = false;
    macro_rules! push {
        ($li:expr) => {{
            let li: u32 = $li;
            if scratch.visited[li as usize] != epoch {
                scratch.visited[li as usize] = epoch;
                if config.is_open(geom.global_of(li)) {
                    if let Some((_, shell)) = collect.as_mut() {
                        shell.push(li);
                    }
                } else {
                    if let Some((closed, _)) = collect.as_mut() {
                        closed.push(li);
                    }
                    if geom.is_outer_frontier(li) {
                        reached = true;
                    }
                    scratch.queue.push(li);
                }
            }
        }};
    }
    for hole in geom.hole_adjacency() {
        for &li in hole {
            push!(li);
        }
    }
    while let Some(li) = scratch.queue.pop() {
        let adjs = *geom.local_adjacency(li);
        for lj in adjs {
            if lj != u32::MAX {
                push!(lj);
            }
        }
    }
    reached
}

/// Number of distinct clusters of the given color, in the
/// annulus-restricted configuration, touching both boundary circles.
pub fn crossing_cluster_count(
    config: &Configuration,
    geom: &AnnulusGeometry,
    scratch: &mut AnnulusScratch,
    open_color: bool,
) -> usize {
    let n = geom.annulus_site_count();
    let epoch = scratch.begin(n);
    let occupied = |li: u32| -> bool { config.is_open(geom.global_of(li)) == open_color };
    for li in 0..n as u32 {
        scratch.parent[li as usize] = li;
    }
    for li in 0..n as u32 {
        if !occupied(li) {
            continue;
        }
        let adjs = *geom.local_adjacency(li);
        for k in [0usize, 2, 4] {
            let lj = adjs[k];
            if lj == u32::MAX || !occupied(lj) {
                continue;
            }
            let a = AnnulusScratch::find(&mut scratch.parent, li);
            let b = AnnulusScratch::find(&mut scratch.parent, lj);
            if a != b {
                scratch.parent[a as usize] = b;
            }
        }
    }
    for li in 0..n as u32 {
        if occupied(li) && geom.is_inner_touch(li) {
            let root = AnnulusScratch::find(&mut scratch.parent, li);
            scratch.stamp_a[root as usize] = epoch;
        }
    }
    let mut crossing = 0usize;
    for li in 0..n as u32 {
        if occupied(li) && geom.is_outer_touch(li) {
            let root = AnnulusScratch::find(&mut scratch.parent, li);
            if scratch.stamp_a[root as usize] == epoch && scratch.stamp_b[root as usize] != epoch {
                scratch.stamp_b[root as usize] = epoch;
                crossing += 1;
            }
        }
    }
    crossing
}

/// Four-arm event: at least two distinct open clusters of the
/// annulus-restricted configuration cross the annulus. On this
/// self-matching lattice two disjoint open crossings force alternating
/// closed crossings in both gaps, i.e. the alternating four-arm event.
pub fn four_arm(
    config: &Configuration,
    geom: &AnnulusGeometry,
    scratch: &mut AnnulusScratch,
) -> bool {
    crossing_cluster_count(config, geom, scratch, true) >= 2
}

/// Two site pairs, each connected through its own open cluster, the two
/// clusters distinct, with all sites inside the holes forced closed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DisjointConnectionsSpec {
    /// Indices into `holes`: ((h1, h2), (h3, h4)).
    pub pairs: [[usize; 2]; 2],
    pub holes: Vec<MaskDisk>,
}

#[derive(Debug)]
pub struct DisjointGeometry {
    pub spec: DisjointConnectionsSpec,
    /// Sites masked closed (embedded center inside a closed hole disk).
    masked: Vec<u32>,
    /// Per hole: unmasked sites whose cell meets the closed hole disk.
    touch: Vec<Vec<u32>>,
}

impl DisjointGeometry {
    pub fn new(region: &LatticeRegion, spec: DisjointConnectionsSpec) -> Result<Self> {
        for idx in spec.pairs.iter().flatten() {
            if *idx >= spec.holes.len() {
                return Err(Error::InvalidEvent(format!("hole index {idx} out of range")));
            }
        }
        for (i, a) in spec.holes.iter().enumerate() {
            for b in spec.holes.iter().skip(i + 1) {
                let d = Vec2::new(a.center[0], a.center[1])
                    .dist(Vec2::new(b.center[0], b.center[1]));
                if d <= a.radius + b.radius {
                    return Err(Error::InvalidEvent("holes overlap".into()));
                }
            }
        }
        let mut masked = Vec::new();
        let mut touch = vec![Vec::new(); spec.holes.len()];
        for i in 0..region.site_count() {
            let p = region.embed_index(i);
            let mut is_masked = false;
            for h in &spec.holes {
                if p.dist(Vec2::new(h.center[0], h.center[1])) <= h.radius {
                    is_masked = true;
                }
            }
            if is_masked {
                masked.push(i);
                continue;
            }
            for (k, h) in spec.holes.iter().enumerate() {
                let c = Vec2::new(h.center[0], h.center[1]);
                let (dmin, _) = region.hex_distance_bounds(i, c);
                if dmin <= h.radius {
                    touch[k].push(i);
                }
            }
        }
        Ok(DisjointGeometry { spec, masked, touch })
    }

    /// Words of `config` with the hole sites cleared.
    pub fn masked_words(&self, config: &Configuration) -> Vec<u64> {
        let mut words = config.words().to_vec();
        for &i in &self.masked {
            words[i as usize / 64] &= !(1u64 << (i % 64));
        }
        words
    }

    pub fn touching_sites(&self, hole: usize) -> &[u32] {
        &self.touch[hole]
    }
}

pub fn disjoint_connections(
    config: &Configuration,
    geom: &DisjointGeometry,
    labeler: &mut Labeler,
) -> bool {
    let words = geom.masked_words(config);
    let labels = labeler.label_words(config.region(), &words);
    disjoint_connections_with_labels(&labels, geom)
}

/// Same event given the labels of the hole-masked configuration.
pub fn disjoint_connections_with_labels(labels: &ClusterLabels, geom: &DisjointGeometry) -> bool {
    let clusters_touching = |hole: usize| -> Vec<u32> {
        let mut out = Vec::new();
        for &s in &geom.touch[hole] {
            if let Some(c) = labels.cluster_of(s) {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    };
    let pair_set = |pair: [usize; 2]| -> Vec<u32> {
        let a = clusters_touching(pair[0]);
        let b = clusters_touching(pair[1]);
        a.into_iter().filter(|c| b.contains(c)).collect()
    };
    let set1 = pair_set(geom.spec.pairs[0]);
    let set2 = pair_set(geom.spec.pairs[1]);
    if set1.is_empty() || set2.is_empty() {
        return false;
    }
    !(set1.len() == 1 && set2.len() == 1 && set1[0] == set2[0])
}

/// Serializable event specification, the experiment-file encoding of the
/// detectors above.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventSpec {
    Connection {
        points: Vec<[i32; 2]>,
    },
    Partition {
        points: Vec<[i32; 2]>,
        blocks: Vec<Vec<usize>>,
    },
    OneArm {
        x: [i32; 2],
        r: f64,
    },
    AnnulusCrossing {
        center: [f64; 2],
        r: f64,
        #[serde(rename = "R")]
        outer: f64,
    },
    OpenCircuit {
        center: [f64; 2],
        r: f64,
        #[serde(rename = "R")]
        outer: f64,
    },
    FourArm {
        center: [f64; 2],
        r: f64,
        #[serde(rename = "R")]
        outer: f64,
    },
    DisjointConnections {
        pairs: [[usize; 2]; 2],
        holes: Vec<MaskDisk>,
    },
}

/// An event bound to a region, with all geometry precomputed.
pub enum CompiledEvent {
    Connection { sites: Vec<u32> },
    Partition { sites: Vec<u32>, blocks: Vec<Vec<usize>> },
    OneArm { x: u32, ring: Vec<u32> },
    AnnulusCrossing(Box<AnnulusGeometry>),
    OpenCircuit(Box<AnnulusGeometry>),
    FourArm(Box<AnnulusGeometry>),
    DisjointConnections(Box<DisjointGeometry>),
}

/// Per-worker buffers for compiled-event evaluation.
#[derive(Default)]
pub struct EventWorkspace {
    pub labeler: Labeler,
    pub annulus: AnnulusScratch,
}

impl CompiledEvent {
    pub fn compile(region: &LatticeRegion, spec: &EventSpec) -> Result<CompiledEvent> {
        let site_index = |p: &[i32; 2]| -> Result<u32> {
            region.index_of(SiteCoord::new(p[0], p[1])).ok_or_else(|| {
                Error::InvalidEvent(format!("site ({}, {}) outside region", p[0], p[1]))
            })
        };
        Ok(match spec {
            EventSpec::Connection { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidEvent("connection needs >= 2 points".into()));
                }
                CompiledEvent::Connection {
                    sites: points.iter().map(site_index).collect::<Result<_>>()?,
                }
            }
            EventSpec::Partition { points, blocks } => {
                let ps = PartitionSpec {
                    points: points.iter().map(|p| SiteCoord::new(p[0], p[1])).collect(),
                    blocks: blocks.clone(),
                };
                ps.validate()?;
                CompiledEvent::Partition {
                    sites: points.iter().map(site_index).collect::<Result<_>>()?,
                    blocks: blocks.clone(),
                }
            }
            EventSpec::OneArm { x, r } => {
                let xi = site_index(x)?;
                let center = region.embed_index(xi);
                check_disk_margin(region, center, *r)?;
                CompiledEvent::OneArm {
                    x: xi,
                    ring: reach_ring(region, center, *r, BoundaryConvention::HexIntersect),
                }
            }
            EventSpec::AnnulusCrossing { center, r, outer } => {
                CompiledEvent::AnnulusCrossing(Box::new(AnnulusGeometry::new(
                    region,
                    AnnulusSpec { center: *center, inner: *r, outer: *outer },
                )?))
            }
            EventSpec::OpenCircuit { center, r, outer } => {
                CompiledEvent::OpenCircuit(Box::new(AnnulusGeometry::new(
                    region,
                    AnnulusSpec { center: *center, inner: *r, outer: *outer },
                )?))
            }
            EventSpec::FourArm { center, r, outer } => {
                CompiledEvent::FourArm(Box::new(AnnulusGeometry::new(
                    region,
                    AnnulusSpec { center: *center, inner: *r, outer: *outer },
                )?))
            }
            EventSpec::DisjointConnections { pairs, holes } => {
                CompiledEvent::DisjointConnections(Box::new(DisjointGeometry::new(
                    region,
                    DisjointConnectionsSpec { pairs: *pairs, holes: holes.clone() },
                )?))
            }
        })
    }

    /// Evaluate on one configuration.
    pub fn eval(&self, config: &Configuration, ws: &mut EventWorkspace) -> bool {
        match self {
            CompiledEvent::Connection { sites } => {
                let labels = ws.labeler.label(config);
                connection_event(&labels, sites)
            }
            CompiledEvent::Partition { sites, blocks } => {
                let labels = ws.labeler.label(config);
                partition_event(&labels, sites, blocks)
            }
            CompiledEvent::OneArm { x, ring } => {
                let labels = ws.labeler.label(config);
                match labels.cluster_of(*x) {
                    None => false,
                    Some(c) => ring.iter().any(|&s| labels.cluster_of(s) == Some(c)),
                }
            }
            CompiledEvent::AnnulusCrossing(geom) => {
                let labels = ws.labeler.label(config);
                annulus_crossing(&labels, geom, &mut ws.annulus)
            }
            CompiledEvent::OpenCircuit(geom) => {
                open_circuit_in_annulus(config, geom, &mut ws.annulus)
            }
            CompiledEvent::FourArm(geom) => four_arm(config, geom, &mut ws.annulus),
            CompiledEvent::DisjointConnections(geom) => {
                disjoint_connections(config, geom, &mut ws.labeler)
            }
        }
    }
}
