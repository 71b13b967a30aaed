//! Interface loops on the dual hexagonal lattice.
//!
//! Every open/closed adjacent site pair contributes one dual edge; the
//! edges chain into oriented loops with open hexagons on the left, so loops
//! wind counterclockwise around open clusters and clockwise around closed
//! ones. Interfaces are traced only between in-region cells: chains that
//! would close through the region boundary are discarded.

pub mod metrics;

use crate::clusters::Labeler;
use crate::error::{Error, Result};
use crate::events::{closed_flood_reaches_outer, AnnulusGeometry, AnnulusScratch};
use crate::geom::{self, Vec2};
use crate::lattice::{LatticeRegion, SiteCoord, FORWARD_OFFSETS};
use crate::sampling::Configuration;
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

/// One closed interface loop: a cyclic chain of dual-lattice vertices
/// (hexagon corners), each step a dual edge of length a/√3.
#[derive(Clone, Debug)]
pub struct LoopPath {
    pub vertices: Vec<Point>,
    pub orientation: Orientation,
    pub encloses_open: bool,
}

impl LoopPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// All loops of one configuration plus the nesting forest
/// (parent = innermost enclosing loop).
#[derive(Debug)]
pub struct LoopEnsemble {
    pub loops: Vec<LoopPath>,
    pub parent: Vec<Option<u32>>,
    /// Representative enclosed-side site per loop.
    pub inner_site: Vec<u32>,
    /// Representative outside site adjacent to the loop.
    pub outer_site: Vec<u32>,
    /// Dual edges on chains broken by the region boundary.
    pub discarded_edges: usize,
}

impl LoopEnsemble {
    pub fn total_edges(&self) -> usize {
        self.loops.iter().map(|l| l.len()).sum()
    }
}

/// A triangle of the lattice = a vertex of the dual hexagonal lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Tri {
    anchor: SiteCoord,
    up: bool,
}

impl Tri {
    fn sites(self) -> [SiteCoord; 3] {
        let SiteCoord { q, r } = self.anchor;
        if self.up {
            [self.anchor, SiteCoord::new(q + 1, r), SiteCoord::new(q, r + 1)]
        } else {
            [self.anchor, SiteCoord::new(q + 1, r), SiteCoord::new(q + 1, r - 1)]
        }
    }

    fn center(self, region: &LatticeRegion) -> Point {
        let [a, b, c] = self.sites();
        let (pa, pb, pc) = (region.embed(a), region.embed(b), region.embed(c));
        Vec2::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0)
    }

    fn third_site(self, u: SiteCoord, v: SiteCoord) -> SiteCoord {
        *self
            .sites()
            .iter()
            .find(|&&s| s != u && s != v)
            .expect("edge sites must belong to the triangle")
    }
}

/// The two triangles flanking the edge between adjacent sites `u`, `v`.
fn flanking_triangles(u: SiteCoord, v: SiteCoord) -> [Tri; 2] {
    let (x, d) = if FORWARD_OFFSETS.contains(&(v.q - u.q, v.r - u.r)) {
        (u, (v.q - u.q, v.r - u.r))
    } else {
        (v, (u.q - v.q, u.r - v.r))
    };
    match d {
        (1, 0) => [Tri { anchor: x, up: true }, Tri { anchor: x, up: false }],
        (0, 1) => [
            Tri { anchor: x, up: true },
            Tri { anchor: SiteCoord::new(x.q - 1, x.r + 1), up: false },
        ],
        (1, -1) => [
            Tri { anchor: x, up: false },
            Tri { anchor: SiteCoord::new(x.q, x.r - 1), up: true },
        ],
        _ => unreachable!("sites are not adjacent"),
    }
}

/// Directed dual edge with the in-set site on its left.
#[derive(Clone, Copy, Debug, PartialEq)]
struct DirectedEdge {
    from: Tri,
    to: Tri,
    left: SiteCoord,
    right: SiteCoord,
}

fn orient(region: &LatticeRegion, left: SiteCoord, right: SiteCoord) -> DirectedEdge {
    let [t0, t1] = flanking_triangles(left, right);
    let (p0, p1) = (t0.center(region), t1.center(region));
    let lp = region.embed(left);
    if (p1 - p0).cross(lp - p0) > 0.0 {
        DirectedEdge { from: t0, to: t1, left, right }
    } else {
        DirectedEdge { from: t1, to: t0, left, right }
    }
}

/// Successor along the boundary of the in-set. None when the deciding site
/// leaves the region.
fn successor(
    region: &LatticeRegion,
    in_set: &impl Fn(u32) -> bool,
    e: &DirectedEdge,
) -> Option<DirectedEdge> {
    let w = e.to.third_site(e.left, e.right);
    let wi = region.index_of(w)?;
    let (left, right) = if in_set(wi) { (w, e.right) } else { (e.left, w) };
    let [t0, t1] = flanking_triangles(left, right);
    let to = if t0 == e.to { t1 } else { t0 };
    Some(DirectedEdge { from: e.to, to, left, right })
}

fn forward_dir_index(d: (i32, i32)) -> Option<usize> {
    FORWARD_OFFSETS.iter().position(|&f| f == d)
}

/// Canonical undirected edge id: anchor site index * 3 + forward direction.
fn edge_id(region: &LatticeRegion, a: SiteCoord, b: SiteCoord) -> usize {
    let (x, d) = if forward_dir_index((b.q - a.q, b.r - a.r)).is_some() {
        (a, (b.q - a.q, b.r - a.r))
    } else {
        (b, (a.q - b.q, a.r - b.r))
    };
    let k = forward_dir_index(d).expect("adjacent sites");
    region.index_of(x).expect("edge anchor in region") as usize * 3 + k
}

/// Trace every interface loop of a configuration.
pub fn trace_interfaces(config: &Configuration) -> LoopEnsemble {
    let region = config.region();
    let n = region.site_count();
    let mut visited = vec![false; n as usize * 3];
    let mut loops = Vec::new();
    let mut inner_site = Vec::new();
    let mut outer_site = Vec::new();
    let mut discarded = 0usize;
    let open = |i: u32| config.is_open(i);

    for i in 0..n {
        let s = region.coord(i);
        for (k, (dq, dr)) in FORWARD_OFFSETS.iter().enumerate() {
            let t = SiteCoord::new(s.q + dq, s.r + dr);
            let Some(j) = region.index_of(t) else { continue };
            if open(i) == open(j) || visited[i as usize * 3 + k] {
                continue;
            }
            let (l, r) = if open(i) { (s, t) } else { (t, s) };
            let start = orient(region, l, r);
            // walk the functional graph until closing or dying
            let mut vertices = vec![start.from.center(region)];
            let mut walked = vec![edge_id(region, l, r)];
            visited[walked[0]] = true;
            let mut cur = start;
            let closed_loop = loop {
                match successor(region, &open, &cur) {
                    None => break false,
                    Some(next) => {
                        if next == start {
                            break true;
                        }
                        let id = edge_id(region, next.left, next.right);
                        if visited[id] {
                            // feeds a previously discarded chain
                            break false;
                        }
                        visited[id] = true;
                        walked.push(id);
                        vertices.push(next.from.center(region));
                        cur = next;
                    }
                }
            };
            if !closed_loop {
                discarded += walked.len();
                continue;
            }
            let area = geom::polygon_signed_area(&vertices);
            let orientation = if area > 0.0 { Orientation::Ccw } else { Orientation::Cw };
            let (inner, outer) = if orientation == Orientation::Ccw {
                (start.left, start.right)
            } else {
                (start.right, start.left)
            };
            loops.push(LoopPath {
                vertices,
                orientation,
                encloses_open: orientation == Orientation::Ccw,
            });
            inner_site.push(region.index_of(inner).unwrap());
            outer_site.push(region.index_of(outer).unwrap());
        }
    }

    // nesting: parent(l) = outer boundary loop of l's outside cluster
    let mut labeler = Labeler::new();
    let open_labels = labeler.label(config);
    let closed_labels = labeler.label_closed(config);
    let mut open_cluster_loop = vec![u32::MAX; open_labels.cluster_count() as usize];
    let mut closed_cluster_loop = vec![u32::MAX; closed_labels.cluster_count() as usize];
    for (li, l) in loops.iter().enumerate() {
        if l.encloses_open {
            let c = open_labels.cluster_of(inner_site[li]).unwrap();
            open_cluster_loop[c as usize] = li as u32;
        } else {
            let c = closed_labels.cluster_of(inner_site[li]).unwrap();
            closed_cluster_loop[c as usize] = li as u32;
        }
    }
    let parent = loops
        .iter()
        .enumerate()
        .map(|(li, l)| {
            let out = outer_site[li];
            let target = if l.encloses_open {
                closed_labels.cluster_of(out).map(|c| closed_cluster_loop[c as usize])
            } else {
                open_labels.cluster_of(out).map(|c| open_cluster_loop[c as usize])
            };
            match target {
                Some(p) if p != u32::MAX => Some(p),
                _ => None,
            }
        })
        .collect();

    LoopEnsemble { loops, parent, inner_site, outer_site, discarded_edges: discarded }
}

/// Winding number of a loop around a point.
pub fn winding_number(l: &LoopPath, p: Point) -> Result<i32> {
    geom::winding_number(&l.vertices, p).ok_or(Error::PointOnLoop)
}

/// True iff the loop separates the two points: exactly one of them is
/// inside (outside = winding number zero).
pub fn separates(l: &LoopPath, p1: Point, p2: Point) -> Result<bool> {
    let w1 = winding_number(l, p1)?;
    let w2 = winding_number(l, p2)?;
    Ok((w1 != 0) != (w2 != 0))
}

/// The innermost open circuit of an annulus: a cyclic sequence of open
/// sites surrounding the center, together with the set of sites whose
/// state the exploration revealed.
#[derive(Clone, Debug)]
pub struct SiteCircuit {
    /// Global site indices along the circuit, counterclockwise.
    pub sites: Vec<u32>,
    /// Global indices of sites whose state was examined. None of them lies
    /// strictly outside the circuit.
    pub explored: Vec<u32>,
}

impl SiteCircuit {
    pub fn polygon(&self, region: &LatticeRegion) -> Vec<Point> {
        self.sites.iter().map(|&i| region.embed_index(i)).collect()
    }
}

/// Outcome of the annulus exploration: either the innermost open circuit,
/// or the explored set certifying that no circuit exists (a closed path
/// from the inner to the outer boundary). The hole sites are enclosed
/// unconditionally; their states are never examined.
pub fn innermost_open_circuit(
    config: &Configuration,
    geom: &AnnulusGeometry,
    scratch: &mut AnnulusScratch,
) -> Result<Option<SiteCircuit>> {
    let region = config.region();
    let mut closed_locals = Vec::new();
    let mut shell_locals = Vec::new();
    let reached = closed_flood_reaches_outer(
        config,
        geom,
        scratch,
        Some((&mut closed_locals, &mut shell_locals)),
    );
    let mut explored: Vec<u32> = closed_locals
        .iter()
        .chain(shell_locals.iter())
        .map(|&l| geom.global_of(l))
        .collect();
    explored.sort_unstable();
    if reached {
        return Ok(None);
    }

    // W = hole sites plus the flooded closed sites; the circuit is the
    // chain of open sites along the outer boundary walk of W
    let w_set: std::collections::HashSet<u32> = geom
        .hole_sites()
        .iter()
        .copied()
        .chain(closed_locals.iter().map(|&l| geom.global_of(l)))
        .collect();
    let rightmost = *w_set
        .iter()
        .max_by(|&&a, &&b| {
            let (pa, pb) = (region.embed_index(a), region.embed_index(b));
            pa.x.partial_cmp(&pb.x).unwrap().then(pa.y.partial_cmp(&pb.y).unwrap())
        })
        .unwrap();
    let w_coord = region.coord(rightmost);
    let out_coord = SiteCoord::new(w_coord.q + 1, w_coord.r);
    let in_w = |i: u32| w_set.contains(&i);
    let start = orient(region, w_coord, out_coord);
    let mut seq: Vec<u32> = vec![region.index_of(out_coord).unwrap()];
    let mut cur = start;
    let budget = 12 * (w_set.len() + geom.annulus_site_count()) + 64;
    for step in 0.. {
        if step > budget {
            return Err(Error::Geometry("boundary walk failed to close".into()));
        }
        let next = successor(region, &in_w, &cur)
            .ok_or_else(|| Error::Geometry("boundary walk left the region".into()))?;
        if next == start {
            break;
        }
        let ri = region.index_of(next.right).unwrap();
        if *seq.last().unwrap() != ri {
            seq.push(ri);
        }
        cur = next;
    }
    while seq.len() > 1 && seq.first() == seq.last() {
        seq.pop();
    }

    let center = geom.spec.center_point();
    let circuit = simplify_winding_cycle(region, seq, center)?;
    Ok(Some(SiteCircuit { sites: circuit, explored }))
}

/// Cut zero-winding excursions out of a cyclic site walk until it is a
/// simple cycle, preserving unit winding around the center.
fn simplify_winding_cycle(
    region: &LatticeRegion,
    mut seq: Vec<u32>,
    center: Point,
) -> Result<Vec<u32>> {
    let winding_of = |seq: &[u32]| -> i32 {
        let pts: Vec<Point> = seq.iter().map(|&i| region.embed_index(i)).collect();
        geom::winding_number(&pts, center).unwrap_or(0)
    };
    loop {
        let mut first_pos = std::collections::HashMap::new();
        let mut repeat: Option<(usize, usize)> = None;
        for (pos, &site) in seq.iter().enumerate() {
            if let Some(&prev) = first_pos.get(&site) {
                repeat = Some((prev, pos));
                break;
            }
            first_pos.insert(site, pos);
        }
        let Some((i, j)) = repeat else { break };
        let inner: Vec<u32> = seq[i..j].to_vec();
        let outer: Vec<u32> = seq[j..].iter().chain(seq[..i].iter()).copied().collect();
        let wi = winding_of(&inner);
        if wi.abs() == 1 {
            seq = inner;
        } else {
            let wo = winding_of(&outer);
            if wo.abs() != 1 {
                return Err(Error::Geometry("walk splice lost the winding cycle".into()));
            }
            seq = outer;
        }
    }
    // normalize counterclockwise
    if winding_of(&seq) < 0 {
        seq.reverse();
    }
    if winding_of(&seq) != 1 {
        return Err(Error::Geometry("circuit does not wind once around the center".into()));
    }
    Ok(seq)
}

/// Export loops as JSON lines: one loop per line,
/// `{"orientation":"ccw","vertices":[[x,y],...]}`.
pub fn write_loops_jsonl(ensemble: &LoopEnsemble, w: &mut impl std::io::Write) -> Result<()> {
    for l in &ensemble.loops {
        let orientation = match l.orientation {
            Orientation::Ccw => "ccw",
            Orientation::Cw => "cw",
        };
        let vertices: Vec<[f64; 2]> = l.vertices.iter().map(|p| [p.x, p.y]).collect();
        let line = serde_json::json!({ "orientation": orientation, "vertices": vertices });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::AnnulusSpec;
    use crate::lattice::{DomainMask, RegionShape};
    use crate::sampling::{enumerate_all, sample_with, Configuration, WordStream};
    use std::sync::Arc;

    fn disk(radius: u32) -> Arc<LatticeRegion> {
        LatticeRegion::new(RegionShape::Disk { radius }, 1.0, Vec2::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn single_open_site_gives_one_hexagon_loop() {
        let reg = disk(3);
        let origin = reg.index_of(SiteCoord::new(0, 0)).unwrap();
        let cfg = Configuration::from_open_fn(&reg, |i| i == origin);
        let ens = trace_interfaces(&cfg);
        assert_eq!(ens.loops.len(), 1);
        let l = &ens.loops[0];
        assert_eq!(l.len(), 6);
        assert_eq!(l.orientation, Orientation::Ccw);
        assert!(l.encloses_open);
        // vertices at the hexagon corners: distance 1/sqrt(3) from center
        for v in &l.vertices {
            assert!((v.norm() - 1.0 / 3.0f64.sqrt()).abs() < 1e-9);
        }
        assert_eq!(winding_number(l, Vec2::new(0.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn all_closed_traces_nothing() {
        let reg = disk(3);
        let cfg = Configuration::from_open_fn(&reg, |_| false);
        let ens = trace_interfaces(&cfg);
        assert!(ens.loops.is_empty());
        assert_eq!(ens.discarded_edges, 0);
    }

    fn count_diff_pairs(cfg: &Configuration) -> usize {
        let reg = cfg.region();
        let mut count = 0;
        for i in 0..reg.site_count() {
            let s = reg.coord(i);
            for (dq, dr) in FORWARD_OFFSETS {
                if let Some(j) = reg.index_of(SiteCoord::new(s.q + dq, s.r + dr)) {
                    count += (cfg.is_open(i) != cfg.is_open(j)) as usize;
                }
            }
        }
        count
    }

    #[test]
    fn dual_edge_conservation() {
        let reg = disk(9);
        let mut ws = WordStream::new(4);
        for rep in 0..50 {
            let cfg = sample_with(&mut ws, &reg, 4, rep);
            let ens = trace_interfaces(&cfg);
            assert_eq!(ens.total_edges() + ens.discarded_edges, count_diff_pairs(&cfg));
        }
    }

    #[test]
    fn orientation_color_law_and_alternation() {
        let reg = disk(8);
        let mut ws = WordStream::new(21);
        for rep in 0..40 {
            let cfg = sample_with(&mut ws, &reg, 21, rep);
            let ens = trace_interfaces(&cfg);
            for (li, l) in ens.loops.iter().enumerate() {
                // color law: ccw iff the loop encloses an open cluster,
                // checked against the actual state of the representative
                let rep_site = ens.inner_site[li];
                assert_eq!(l.encloses_open, cfg.is_open(rep_site));
                assert_eq!(l.encloses_open, l.orientation == Orientation::Ccw);
                let p = reg.embed_index(rep_site);
                assert_eq!(winding_number(l, p).unwrap().abs(), 1);
                let po = reg.embed_index(ens.outer_site[li]);
                assert_eq!(winding_number(l, po).unwrap(), 0);
                if let Some(par) = ens.parent[li] {
                    let pl = &ens.loops[par as usize];
                    assert_ne!(pl.orientation, l.orientation);
                    assert_ne!(pl.encloses_open, l.encloses_open);
                    assert_eq!(winding_number(pl, p).unwrap().abs(), 1);
                }
            }
        }
    }

    #[test]
    fn winding_trivials() {
        let reg = disk(3);
        let origin = reg.index_of(SiteCoord::new(0, 0)).unwrap();
        let cfg = Configuration::from_open_fn(&reg, |i| i == origin);
        let ens = trace_interfaces(&cfg);
        let l = &ens.loops[0];
        assert_eq!(winding_number(l, Vec2::new(10.0, 10.0)).unwrap(), 0);
        let mut rev = l.clone();
        rev.vertices.reverse();
        assert_eq!(
            winding_number(&rev, Vec2::new(0.0, 0.0)).unwrap(),
            -winding_number(l, Vec2::new(0.0, 0.0)).unwrap()
        );
        assert!(winding_number(l, l.vertices[0]).is_err());
    }

    #[test]
    fn separates_trivials() {
        let reg = disk(3);
        let origin = reg.index_of(SiteCoord::new(0, 0)).unwrap();
        let cfg = Configuration::from_open_fn(&reg, |i| i == origin);
        let binding = trace_interfaces(&cfg);
        let l = &binding.loops[0];
        let inside = Vec2::new(0.0, 0.0);
        let far = Vec2::new(50.0, 50.0);
        let far2 = Vec2::new(-40.0, 10.0);
        assert!(separates(l, inside, far).unwrap());
        assert!(!separates(l, far, far2).unwrap());
        assert!(!separates(l, inside, Vec2::new(0.1, 0.1)).unwrap());
    }

    /// Masked micro region: disk(3) with rings 0..2 unmasked (19 sites).
    fn micro_region() -> Arc<LatticeRegion> {
        LatticeRegion::with_mask(
            RegionShape::Disk { radius: 3 },
            1.0,
            Vec2::new(0.0, 0.0),
            Some(DomainMask::Disk { center: [0.0, 0.0], radius: 2.3 }),
        )
        .unwrap()
    }

    /// Oracle: does the open subgraph of annulus sites contain a cycle of
    /// nonzero winding around the center? Homology detection via angular
    /// potentials, independent of the duality path.
    fn has_winding_cycle_oracle(cfg: &Configuration, geom: &AnnulusGeometry) -> bool {
        let region = cfg.region();
        let center = geom.spec.center_point();
        let n = geom.annulus_site_count();
        let theta = |li: u32| {
            let p = region.embed_index(geom.global_of(li)) - center;
            p.y.atan2(p.x)
        };
        let wrap = |mut d: f64| {
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            d
        };
        let mut pot = vec![f64::NAN; n];
        let mut stack = Vec::new();
        for start in 0..n as u32 {
            if !cfg.is_open(geom.global_of(start)) || !pot[start as usize].is_nan() {
                continue;
            }
            pot[start as usize] = 0.0;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in geom.local_adjacency(u) {
                    if v == u32::MAX || !cfg.is_open(geom.global_of(v)) {
                        continue;
                    }
                    let expected = pot[u as usize] + wrap(theta(v) - theta(u));
                    if pot[v as usize].is_nan() {
                        pot[v as usize] = expected;
                        stack.push(v);
                    } else if (pot[v as usize] - expected).abs() > std::f64::consts::PI {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn duality_exhaustive_on_micro_annulus() {
        let reg = micro_region();
        let geom =
            AnnulusGeometry::new(&reg, AnnulusSpec { center: [0.0, 0.0], inner: 0.7, outer: 1.3 })
                .unwrap();
        // S = first ring plus the six diagonal second-ring sites
        assert_eq!(geom.annulus_site_count(), 12);
        let mut scratch = AnnulusScratch::new();
        for cfg in enumerate_all(&reg).unwrap() {
            let by_duality = crate::events::open_circuit_in_annulus(&cfg, &geom, &mut scratch);
            let direct = has_winding_cycle_oracle(&cfg, &geom);
            assert_eq!(by_duality, direct);
        }
    }

    #[test]
    fn duality_exhaustive_wider_annulus() {
        let reg = micro_region();
        let geom =
            AnnulusGeometry::new(&reg, AnnulusSpec { center: [0.0, 0.0], inner: 0.7, outer: 1.9 })
                .unwrap();
        assert_eq!(geom.annulus_site_count(), 18);
        let mut scratch = AnnulusScratch::new();
        for cfg in enumerate_all(&reg).unwrap() {
            let by_duality = crate::events::open_circuit_in_annulus(&cfg, &geom, &mut scratch);
            let direct = has_winding_cycle_oracle(&cfg, &geom);
            assert_eq!(by_duality, direct);
        }
    }

    /// Exhaustive oracle: enumerate all simple cycles of the open annulus
    /// subgraph with |winding| = 1 and return the one with minimal interior
    /// (smallest enclosed area; interiors are nested, so the minimum is
    /// unique).
    fn innermost_by_cycle_search(cfg: &Configuration, geom: &AnnulusGeometry) -> Option<Vec<u32>> {
        let region = cfg.region();
        let center = geom.spec.center_point();
        let n = geom.annulus_site_count();
        let open: Vec<bool> = (0..n as u32).map(|l| cfg.is_open(geom.global_of(l))).collect();
        let mut best: Option<(f64, Vec<u32>)> = None;
        let mut path: Vec<u32> = Vec::new();
        let mut on_path = vec![false; n];

        #[allow(clippy::too_many_arguments)]
        fn dfs(
            geom: &AnnulusGeometry,
            region: &LatticeRegion,
            open: &[bool],
            center: Point,
            start: u32,
            u: u32,
            path: &mut Vec<u32>,
            on_path: &mut Vec<bool>,
            best: &mut Option<(f64, Vec<u32>)>,
        ) {
            for &v in geom.local_adjacency(u) {
                if v == u32::MAX || !open[v as usize] {
                    continue;
                }
                if v == start && path.len() >= 3 {
                    let pts: Vec<Point> =
                        path.iter().map(|&l| region.embed_index(geom.global_of(l))).collect();
                    if let Some(w) = geom::winding_number(&pts, center) {
                        if w.abs() == 1 {
                            let area = geom::polygon_signed_area(&pts).abs();
                            let mut cyc: Vec<u32> =
                                path.iter().map(|&l| geom.global_of(l)).collect();
                            if w < 0 {
                                cyc.reverse();
                            }
                            let better = match best {
                                None => true,
                                Some((b, _)) => area < *b,
                            };
                            if better {
                                *best = Some((area, cyc));
                            }
                        }
                    }
                    continue;
                }
                if v <= start || on_path[v as usize] {
                    continue;
                }
                on_path[v as usize] = true;
                path.push(v);
                dfs(geom, region, open, center, start, v, path, on_path, best);
                path.pop();
                on_path[v as usize] = false;
            }
        }
        for start in 0..n as u32 {
            if !open[start as usize] {
                continue;
            }
            path.clear();
            path.push(start);
            on_path.fill(false);
            on_path[start as usize] = true;
            dfs(geom, region, &open, center, start, start, &mut path, &mut on_path, &mut best);
        }
        best.map(|(_, cyc)| cyc)
    }

    fn canonical_cycle(mut c: Vec<u32>) -> Vec<u32> {
        let min_pos = c.iter().enumerate().min_by_key(|(_, &s)| s).map(|(i, _)| i).unwrap();
        c.rotate_left(min_pos);
        c
    }

    #[test]
    fn innermost_circuit_exhaustive_micro() {
        let reg = micro_region();
        let geom =
            AnnulusGeometry::new(&reg, AnnulusSpec { center: [0.0, 0.0], inner: 0.7, outer: 1.3 })
                .unwrap();
        let mut scratch = AnnulusScratch::new();
        for cfg in enumerate_all(&reg).unwrap() {
            let got = innermost_open_circuit(&cfg, &geom, &mut scratch).unwrap();
            let oracle = innermost_by_cycle_search(&cfg, &geom);
            match (got, oracle) {
                (None, None) => {}
                (Some(c), Some(o)) => {
                    assert_eq!(canonical_cycle(c.sites.clone()), canonical_cycle(o));
                    // stopping-set: nothing explored strictly outside
                    let poly = c.polygon(&reg);
                    for &e in &c.explored {
                        if c.sites.contains(&e) {
                            continue;
                        }
                        let w = geom::winding_number(&poly, reg.embed_index(e)).unwrap();
                        assert_ne!(w, 0, "explored site outside the circuit");
                    }
                }
                (a, b) => panic!("mismatch: got {:?} oracle {:?}", a.map(|c| c.sites), b),
            }
        }
    }

    #[test]
    fn innermost_circuit_random_wider_annulus() {
        let reg = micro_region();
        let geom =
            AnnulusGeometry::new(&reg, AnnulusSpec { center: [0.0, 0.0], inner: 0.7, outer: 1.9 })
                .unwrap();
        let mut scratch = AnnulusScratch::new();
        let mut ws = WordStream::new(123);
        let mut found = 0;
        for rep in 0..4000 {
            let cfg = sample_with(&mut ws, &reg, 123, rep);
            let got = innermost_open_circuit(&cfg, &geom, &mut scratch).unwrap();
            let oracle = innermost_by_cycle_search(&cfg, &geom);
            match (got, oracle) {
                (None, None) => {}
                (Some(c), Some(o)) => {
                    found += 1;
                    assert_eq!(canonical_cycle(c.sites.clone()), canonical_cycle(o));
                }
                (a, b) => panic!("rep {rep}: got {:?} oracle {:?}", a.map(|c| c.sites), b),
            }
        }
        assert!(found > 100, "too few circuits found: {found}");
    }

    #[test]
    fn innermost_all_open_is_tightest_ring() {
        let reg = micro_region();
        let geom =
            AnnulusGeometry::new(&reg, AnnulusSpec { center: [0.0, 0.0], inner: 0.7, outer: 1.9 })
                .unwrap();
        let mut scratch = AnnulusScratch::new();
        let all_open = Configuration::from_open_fn(&reg, |_| true);
        let c = innermost_open_circuit(&all_open, &geom, &mut scratch).unwrap().unwrap();
        // the innermost ring of six sites around the hole
        assert_eq!(c.sites.len(), 6);
        for &s in &c.sites {
            assert!((reg.embed_index(s).norm() - 1.0).abs() < 1e-9);
        }
        let all_closed = Configuration::from_open_fn(&reg, |_| false);
        assert!(innermost_open_circuit(&all_closed, &geom, &mut scratch).unwrap().is_none());
    }

    #[test]
    fn loops_jsonl_export() {
        let reg = disk(3);
        let origin = reg.index_of(SiteCoord::new(0, 0)).unwrap();
        let cfg = Configuration::from_open_fn(&reg, |i| i == origin);
        let ens = trace_interfaces(&cfg);
        let mut buf = Vec::new();
        write_loops_jsonl(&ens, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains(r#""orientation":"ccw""#));
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(v["vertices"].as_array().unwrap().len(), 6);
    }
}
