//! Proximity between buildings of one level of detail.
//!
//! Building outlines and road polylines are densified and inserted into a
//! constrained Delaunay triangulation. Triangles inside a building are
//! dropped; every remaining triangle that touches two buildings and no road
//! links those buildings. This is the adjacency induced by the triangulation
//! skeleton without materializing the skeleton itself.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use spade::handles::FixedVertexHandle;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::geometry::{overlap_area, Point, EPS_GEOM};

/// Road centerlines acting as barriers between buildings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoadSet {
    polylines: Vec<Vec<Point>>,
}

impl RoadSet {
    pub fn new(polylines: Vec<Vec<Point>>) -> Result<Self> {
        for (k, line) in polylines.iter().enumerate() {
            if line.len() < 2 {
                return Err(Error::Validation(format!("road polyline {k} has {} points, need at least 2", line.len())));
            }
        }
        Ok(Self { polylines })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn polylines(&self) -> &[Vec<Point>] {
        &self.polylines
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityOptions {
    /// Maximum spacing of boundary samples (m).
    pub densify_step: f64,
    /// Optional cap on the gap bridged by a triangle (m). Off by default.
    pub max_gap: Option<f64>,
}

impl Default for ProximityOptions {
    fn default() -> Self {
        Self { densify_step: 5.0, max_gap: None }
    }
}

/// Undirected adjacency between building ids of one level of detail.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProximityGraph {
    nodes: Vec<String>,
    /// Unordered pairs stored as `(smaller id, larger id)`.
    edges: BTreeSet<(String, String)>,
}

impl ProximityGraph {
    pub fn new(nodes: impl IntoIterator<Item = String>) -> Self {
        let mut nodes: Vec<String> = nodes.into_iter().collect();
        nodes.sort();
        nodes.dedup();
        Self { nodes, edges: BTreeSet::new() }
    }

    /// Adds the unordered pair; self-pairs are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str) {
        if a == b {
            return;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.insert((a.to_owned(), b.to_owned()));
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.contains(&(a.to_owned(), b.to_owned()))
    }

    /// Sorted neighbour lists keyed by node id.
    pub fn adjacency(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = self.nodes.iter().map(|n| (n.as_str(), Vec::new())).collect();
        for (a, b) in self.edges() {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        for v in adj.values_mut() {
            v.sort_unstable();
        }
        adj
    }
}

#[derive(Debug, Clone, Default)]
struct Owners {
    buildings: Vec<usize>,
    road: bool,
}

fn densify(a: Point, b: Point, step: f64) -> impl Iterator<Item = Point> {
    let k = ((a.dist(b) / step).ceil() as usize).max(1);
    (0..k).map(move |t| a + (b - a) * (t as f64 / k as f64))
}

fn densify_ring(ring: &[Point], step: f64) -> Vec<Point> {
    let n = ring.len();
    (0..n).flat_map(|i| densify(ring[i], ring[(i + 1) % n], step)).collect()
}

fn densify_line(line: &[Point], step: f64) -> Vec<Point> {
    let mut out: Vec<Point> = line.windows(2).flat_map(|w| densify(w[0], w[1], step)).collect();
    out.push(*line.last().expect("polyline has points"));
    out
}

/// Rejects pairs of footprints whose interiors overlap.
pub fn check_no_overlaps(buildings: &[BuildingFootprint]) -> Result<()> {
    let mut order: Vec<usize> = (0..buildings.len()).collect();
    let boxes: Vec<_> = buildings.iter().map(|b| b.polygon.bbox()).collect();
    order.sort_by(|&a, &b| boxes[a].min.x.total_cmp(&boxes[b].min.x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].min.x > boxes[i].max.x {
                break;
            }
            if !boxes[i].intersects(&boxes[j]) {
                continue;
            }
            let ov = overlap_area(&buildings[i].polygon, &buildings[j].polygon);
            if ov > EPS_GEOM {
                let (a, b) = if buildings[i].id < buildings[j].id { (i, j) } else { (j, i) };
                return Err(Error::Validation(format!(
                    "buildings {} and {} overlap ({ov:.3} m²) at lod {}",
                    buildings[a].id, buildings[b].id, buildings[a].lod
                )));
            }
        }
    }
    Ok(())
}

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

fn insert_vertex(cdt: &mut Cdt, p: Point) -> Result<FixedVertexHandle> {
    cdt.insert(Point2::new(p.x, p.y))
        .map_err(|e| Error::Validation(format!("cannot triangulate point ({}, {}): {e:?}", p.x, p.y)))
}

fn grow_owners(owners: &mut Vec<Owners>, cdt: &Cdt) {
    if owners.len() < cdt.num_vertices() {
        owners.resize(cdt.num_vertices(), Owners::default());
    }
}

/// Builds the proximity graph of one level of detail.
pub fn build_proximity_graph(
    buildings: &[BuildingFootprint],
    roads: &RoadSet,
    options: &ProximityOptions,
) -> Result<ProximityGraph> {
    if !(options.densify_step > 0.0 && options.densify_step.is_finite()) {
        return Err(Error::InvalidArgument(format!("densify step must be positive, got {}", options.densify_step)));
    }
    if let Some(first) = buildings.first() {
        if let Some(other) = buildings.iter().find(|b| b.lod != first.lod) {
            return Err(Error::Validation(format!(
                "proximity graph mixes lod {} ({}) and lod {} ({})",
                first.lod, first.id, other.lod, other.id
            )));
        }
    }
    let mut ids = HashSet::new();
    for b in buildings {
        if !ids.insert(b.id.as_str()) {
            return Err(Error::Validation(format!("duplicate building id {}", b.id)));
        }
    }
    check_no_overlaps(buildings)?;

    // Canonical order so the triangulation does not depend on input order.
    let mut sorted: Vec<&BuildingFootprint> = buildings.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut graph = ProximityGraph::new(sorted.iter().map(|b| b.id.clone()));
    if sorted.len() < 2 {
        return Ok(graph);
    }

    let step = options.densify_step;
    let mut cdt = Cdt::new();
    let mut owners: Vec<Owners> = Vec::new();

    for (bi, b) in sorted.iter().enumerate() {
        for ring in b.polygon.rings() {
            let pts = densify_ring(ring, step);
            let handles: Vec<FixedVertexHandle> =
                pts.iter().map(|&p| insert_vertex(&mut cdt, p)).collect::<Result<_>>()?;
            grow_owners(&mut owners, &cdt);
            for h in &handles {
                owners[h.index()].buildings.push(bi);
            }
            for k in 0..handles.len() {
                let (from, to) = (handles[k], handles[(k + 1) % handles.len()]);
                if from != to {
                    cdt.add_constraint_and_split(from, to, |p| p);
                }
            }
            // Split points created while constraining belong to this ring.
            let before = owners.len();
            grow_owners(&mut owners, &cdt);
            for o in &mut owners[before..] {
                o.buildings.push(bi);
            }
        }
    }

    let mut road_edges = HashSet::new();
    for line in roads.polylines() {
        let pts = densify_line(line, step);
        let handles: Vec<FixedVertexHandle> = pts.iter().map(|&p| insert_vertex(&mut cdt, p)).collect::<Result<_>>()?;
        grow_owners(&mut owners, &cdt);
        for h in &handles {
            owners[h.index()].road = true;
        }
        for w in handles.windows(2) {
            if w[0] != w[1] {
                for e in cdt.add_constraint_and_split(w[0], w[1], |p| p) {
                    road_edges.insert(e.as_undirected());
                }
            }
        }
        let before = owners.len();
        grow_owners(&mut owners, &cdt);
        for o in &mut owners[before..] {
            o.road = true;
        }
    }

    for face in cdt.inner_faces() {
        let verts = face.vertices();
        let vo: Vec<&Owners> = verts.iter().map(|v| &owners[v.fix().index()]).collect();
        if vo.iter().any(|o| o.road) {
            continue;
        }
        if face.adjacent_edges().iter().any(|e| road_edges.contains(&e.fix().as_undirected())) {
            continue;
        }
        let pos: Vec<Point> = verts.iter().map(|v| Point::new(v.position().x, v.position().y)).collect();
        let centroid = (pos[0] + pos[1] + pos[2]) * (1.0 / 3.0);
        let interior = vo[0]
            .buildings
            .iter()
            .filter(|b| vo[1].buildings.contains(b) && vo[2].buildings.contains(b))
            .any(|&b| sorted[b].polygon.contains(centroid));
        if interior {
            continue;
        }
        for x in 0..3 {
            for y in (x + 1)..3 {
                for &bi in &vo[x].buildings {
                    for &bj in &vo[y].buildings {
                        if bi == bj {
                            continue;
                        }
                        if let Some(cap) = options.max_gap {
                            if pos[x].dist(pos[y]) > cap {
                                continue;
                            }
                        }
                        graph.add_edge(&sorted[bi].id, &sorted[bj].id);
                    }
                }
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    fn rect(id: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> BuildingFootprint {
        BuildingFootprint::new(id, 1, Polygon::rect(x0, y0, x1, y1).unwrap()).unwrap()
    }

    #[test]
    fn two_facing_rectangles_are_proximate() {
        let b = vec![rect("a", 0.0, 0.0, 20.0, 4.0), rect("b", 0.0, 14.0, 20.0, 18.0)];
        let g = build_proximity_graph(&b, &RoadSet::empty(), &ProximityOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.contains("a", "b"));
    }

    #[test]
    fn road_between_rectangles_blocks_proximity() {
        let b = vec![rect("a", 0.0, 0.0, 20.0, 4.0), rect("b", 0.0, 14.0, 20.0, 18.0)];
        let roads = RoadSet::new(vec![vec![Point::new(-30.0, 9.0), Point::new(50.0, 9.0)]]).unwrap();
        let g = build_proximity_graph(&b, &roads, &ProximityOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn single_building_has_no_edges() {
        let g =
            build_proximity_graph(&[rect("a", 0.0, 0.0, 5.0, 5.0)], &RoadSet::empty(), &ProximityOptions::default())
                .unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.nodes(), ["a".to_string()]);
    }

    #[test]
    fn overlapping_buildings_are_rejected() {
        let b = vec![rect("a", 0.0, 0.0, 10.0, 10.0), rect("b", 5.0, 5.0, 15.0, 15.0)];
        let err = build_proximity_graph(&b, &RoadSet::empty(), &ProximityOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn middle_building_shields_outer_ones() {
        // three parallel bars in a row: only consecutive bars are proximate
        let b =
            vec![rect("a", 0.0, 0.0, 40.0, 4.0), rect("b", 0.0, 10.0, 40.0, 14.0), rect("c", 0.0, 20.0, 40.0, 24.0)];
        let g = build_proximity_graph(&b, &RoadSet::empty(), &ProximityOptions { densify_step: 2.0, max_gap: None })
            .unwrap();
        assert!(g.contains("a", "b"));
        assert!(g.contains("b", "c"));
        assert!(!g.contains("a", "c"));
    }

    #[test]
    fn max_gap_caps_bridges() {
        let b = vec![rect("a", 0.0, 0.0, 20.0, 4.0), rect("b", 0.0, 54.0, 20.0, 58.0)];
        let opts = ProximityOptions { densify_step: 5.0, max_gap: Some(20.0) };
        assert_eq!(build_proximity_graph(&b, &RoadSet::empty(), &opts).unwrap().edge_count(), 0);
    }

    #[test]
    fn holes_do_not_bridge() {
        let courtyard = Polygon::new(
            vec![Point::new(0.0, 0.0), Point::new(30.0, 0.0), Point::new(30.0, 30.0), Point::new(0.0, 30.0)],
            vec![vec![Point::new(5.0, 5.0), Point::new(25.0, 5.0), Point::new(25.0, 25.0), Point::new(5.0, 25.0)]],
        )
        .unwrap();
        let b = vec![BuildingFootprint::new("ring", 1, courtyard).unwrap(), rect("x", 40.0, 0.0, 50.0, 30.0)];
        let g = build_proximity_graph(&b, &RoadSet::empty(), &ProximityOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn mixed_lods_are_rejected() {
        let mut b = vec![rect("a", 0.0, 0.0, 5.0, 5.0), rect("b", 10.0, 0.0, 15.0, 5.0)];
        b[1].lod = 2;
        assert!(build_proximity_graph(&b, &RoadSet::empty(), &ProximityOptions::default()).is_err());
    }
}
