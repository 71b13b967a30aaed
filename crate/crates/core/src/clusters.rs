//! Connected-component labeling of open sites and the normalized cluster
//! counting measures.
//!
//! Labeling is union-find with union by size and path halving over the
//! 6-neighbor open subgraph; it dominates the runtime of most experiments,
//! so the labeler keeps its buffers and can be reused across samples.

use crate::error::{Error, Result};
use crate::geom;
use crate::lattice::{LatticeRegion, FORWARD_OFFSETS, NEIGHBOR_OFFSETS};
use crate::sampling::Configuration;
use crate::{Point, Scalar};

pub const CLOSED: u32 = u32::MAX;

/// Per-cluster summary.
#[derive(Clone, Debug)]
pub struct ClusterInfo {
    /// Canonical label: the minimal site index of the cluster.
    pub canonical: u32,
    /// Number of sites.
    pub size: u32,
    /// Bounding box of the embedded support: (min, max).
    pub bbox: (Point, Point),
}

/// Cluster labels of one configuration. `labels[site]` is a dense cluster
/// id in increasing order of the canonical (minimal) site index, or
/// [`CLOSED`] for closed sites.
#[derive(Clone, Debug)]
pub struct ClusterLabels {
    labels: Vec<u32>,
    clusters: Vec<ClusterInfo>,
}

impl ClusterLabels {
    #[inline]
    pub fn cluster_of(&self, site: u32) -> Option<u32> {
        let l = self.labels[site as usize];
        (l != CLOSED).then_some(l)
    }

    #[inline]
    pub fn is_open(&self, site: u32) -> bool {
        self.labels[site as usize] != CLOSED
    }

    /// Canonical label (minimal site index) of the cluster of an open site.
    pub fn canonical_label(&self, site: u32) -> Option<u32> {
        self.cluster_of(site).map(|c| self.clusters[c as usize].canonical)
    }

    pub fn cluster_count(&self) -> u32 {
        self.clusters.len() as u32
    }

    pub fn clusters(&self) -> &[ClusterInfo] {
        &self.clusters
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn open_site_count(&self) -> u32 {
        self.clusters.iter().map(|c| c.size).sum()
    }

    /// Site indices grouped by cluster id (counting sort).
    pub fn grouped_sites(&self) -> GroupedSites {
        let k = self.clusters.len();
        let mut starts = vec![0u32; k + 1];
        for (c, info) in self.clusters.iter().enumerate() {
            starts[c + 1] = starts[c] + info.size;
        }
        let mut cursor = starts.clone();
        let mut sites = vec![0u32; starts[k] as usize];
        for (i, &l) in self.labels.iter().enumerate() {
            if l != CLOSED {
                sites[cursor[l as usize] as usize] = i as u32;
                cursor[l as usize] += 1;
            }
        }
        GroupedSites { starts, sites }
    }
}

/// Sites of each cluster, contiguously.
pub struct GroupedSites {
    starts: Vec<u32>,
    sites: Vec<u32>,
}

impl GroupedSites {
    pub fn sites_of(&self, cluster: u32) -> &[u32] {
        &self.sites[self.starts[cluster as usize] as usize..self.starts[cluster as usize + 1] as usize]
    }
}

/// Reusable union-find labeler.
pub struct Labeler {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Labeler {
    pub fn new() -> Self {
        Labeler { parent: Vec::new(), size: Vec::new() }
    }

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let p = parent[x as usize];
            parent[x as usize] = parent[p as usize];
            x = parent[p as usize];
        }
        x
    }

    /// Label the open clusters of a configuration.
    pub fn label(&mut self, config: &Configuration) -> ClusterLabels {
        self.label_words(config.region(), config.words())
    }

    /// Label the closed clusters (the complement configuration).
    pub fn label_closed(&mut self, config: &Configuration) -> ClusterLabels {
        let region = config.region();
        let words: Vec<u64> = config
            .words()
            .iter()
            .zip(region.mask_words())
            .map(|(w, m)| !w & m)
            .collect();
        self.label_words(region, &words)
    }

    pub fn label_words(&mut self, region: &LatticeRegion, words: &[u64]) -> ClusterLabels {
        let n = region.site_count() as usize;
        self.parent.clear();
        self.parent.extend(0..n as u32);
        self.size.clear();
        self.size.resize(n, 1);

        let open = |i: u32| words[i as usize / 64] & (1u64 << (i % 64)) != 0;

        for i in 0..n as u32 {
            if !open(i) {
                continue;
            }
            let s = region.coord(i);
            for (dq, dr) in FORWARD_OFFSETS {
                let t = crate::lattice::SiteCoord::new(s.q + dq, s.r + dr);
                let Some(j) = region.index_of(t) else { continue };
                if !open(j) {
                    continue;
                }
                let a = Self::find(&mut self.parent, i);
                let b = Self::find(&mut self.parent, j);
                if a == b {
                    continue;
                }
                if self.size[a as usize] < self.size[b as usize] {
                    self.parent[a as usize] = b;
                    self.size[b as usize] += self.size[a as usize];
                } else {
                    self.parent[b as usize] = a;
                    self.size[a as usize] += self.size[b as usize];
                }
            }
        }

        // canonicalize: dense ids in order of minimal site index
        let mut labels = vec![CLOSED; n];
        let mut clusters: Vec<ClusterInfo> = Vec::new();
        // root -> dense id, reuse size buffer as scratch marker
        let mut dense: Vec<u32> = vec![CLOSED; n];
        for i in 0..n as u32 {
            if !open(i) {
                continue;
            }
            let root = Self::find(&mut self.parent, i);
            let id = if dense[root as usize] == CLOSED {
                let id = clusters.len() as u32;
                dense[root as usize] = id;
                let p = region.embed_index(i);
                clusters.push(ClusterInfo { canonical: i, size: 0, bbox: (p, p) });
                id
            } else {
                dense[root as usize]
            };
            labels[i as usize] = id;
            let info = &mut clusters[id as usize];
            info.size += 1;
            let p = region.embed_index(i);
            info.bbox.0.x = info.bbox.0.x.min(p.x);
            info.bbox.0.y = info.bbox.0.y.min(p.y);
            info.bbox.1.x = info.bbox.1.x.max(p.x);
            info.bbox.1.y = info.bbox.1.y.max(p.y);
        }
        ClusterLabels { labels, clusters }
    }
}

impl Default for Labeler {
    fn default() -> Self {
        Self::new()
    }
}

/// One-shot labeling.
pub fn label(config: &Configuration) -> ClusterLabels {
    Labeler::new().label(config)
}

/// True iff both sites are open and share a cluster.
pub fn same_cluster(labels: &ClusterLabels, x: u32, y: u32) -> bool {
    match (labels.cluster_of(x), labels.cluster_of(y)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Exact Euclidean diameter of the embedded support of a cluster.
/// Brute force for small clusters, convex hull + rotating calipers above
/// 64 sites.
pub fn cluster_diameter(labels: &ClusterLabels, region: &LatticeRegion, cluster: u32) -> Result<f64> {
    if cluster >= labels.cluster_count() {
        return Err(Error::UnknownCluster(cluster));
    }
    let pts: Vec<Point> = labels
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == cluster)
        .map(|(i, _)| region.embed_index(i as u32))
        .collect();
    Ok(geom::point_set_diameter(&pts, 64))
}

/// The normalized counting measure of one cluster: weight a²/π_norm at
/// every embedded cluster site.
#[derive(Clone, Debug)]
pub struct ClusterMeasure {
    pub cluster: u32,
    pub weight: f64,
    pub points: Vec<Point>,
}

impl ClusterMeasure {
    pub fn total_mass(&self) -> f64 {
        self.weight * self.points.len() as f64
    }

    /// Integrate a test function against the measure.
    pub fn integrate(&self, f: impl Fn(Point) -> Scalar) -> Scalar {
        self.points.iter().map(|&p| f(p)).sum::<Scalar>() * self.weight
    }
}

pub fn cluster_measure(
    labels: &ClusterLabels,
    region: &LatticeRegion,
    cluster: u32,
    pi_norm: f64,
) -> Result<ClusterMeasure> {
    if cluster >= labels.cluster_count() {
        return Err(Error::UnknownCluster(cluster));
    }
    assert!(pi_norm > 0.0, "pi_norm must be positive");
    let a = region.spacing();
    let points = labels
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == cluster)
        .map(|(i, _)| region.embed_index(i as u32))
        .collect();
    Ok(ClusterMeasure { cluster, weight: a * a / pi_norm, points })
}

/// Reference labeler by breadth-first search; the test oracle for the
/// union-find path.
pub fn bfs_reference_labels(config: &Configuration) -> Vec<u32> {
    let region = config.region();
    let n = region.site_count();
    let mut labels = vec![CLOSED; n as usize];
    let mut next = 0u32;
    let mut queue = Vec::new();
    for start in 0..n {
        if !config.is_open(start) || labels[start as usize] != CLOSED {
            continue;
        }
        let id = next;
        next += 1;
        labels[start as usize] = id;
        queue.clear();
        queue.push(start);
        while let Some(i) = queue.pop() {
            let s = region.coord(i);
            for (dq, dr) in NEIGHBOR_OFFSETS {
                let t = crate::lattice::SiteCoord::new(s.q + dq, s.r + dr);
                if let Some(j) = region.index_of(t) {
                    if config.is_open(j) && labels[j as usize] == CLOSED {
                        labels[j as usize] = id;
                        queue.push(j);
                    }
                }
            }
        }
    }
    labels
}
