//! Synthetic scenes for tests, benchmarks and demos.
//!
//! [`generate_scene`] lays out blocks on a grid. Each block holds a small
//! arrangement (a C-shaped triple, parallel bars, a perpendicular pair, an
//! irregular or C-shaped single building, a cluster of small houses) that is
//! rotated, jittered and then generalized level by level: copied one to one,
//! merged into hulls, or thinned.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::geometry::{convex_hull, overlap_area, Point, Polygon};
use crate::proximity::RoadSet;
use crate::reasoner::Provenance;
use crate::scene::Scene;

/// Rectangle of the given length (along `angle_deg`) and width around `center`.
pub fn oriented_rect(center: Point, length: f64, width: f64, angle_deg: f64) -> Polygon {
    let (hl, hw) = (length / 2.0, width / 2.0);
    let pts = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
        .map(|(x, y)| Point::new(x, y).rotated_deg(angle_deg) + center)
        .to_vec();
    Polygon::new(pts, vec![]).expect("positive sizes give a valid rectangle")
}

fn fp(id: &str, lod: u32, poly: Polygon) -> BuildingFootprint {
    BuildingFootprint::new(id, lod, poly).expect("fixture geometry is valid")
}

fn translated(p: &Polygon, d: Point) -> Polygon {
    p.map_points(|q| q + d).expect("translation keeps validity")
}

/// Canonical C arrangement: a 20×4 middle bar with two 4×12 wings at its
/// ends, 6 m away, shifted by `origin`. Ids are `{prefix}m`, `{prefix}w1`,
/// `{prefix}w2`.
pub fn c_fixture(lod: u32, prefix: &str, origin: Point) -> Vec<BuildingFootprint> {
    let r = |x0, y0, x1, y1| translated(&Polygon::rect(x0, y0, x1, y1).unwrap(), origin);
    vec![
        fp(&format!("{prefix}m"), lod, r(-10.0, -2.0, 10.0, 2.0)),
        fp(&format!("{prefix}w1"), lod, r(8.0, 8.0, 12.0, 20.0)),
        fp(&format!("{prefix}w2"), lod, r(-12.0, 8.0, -8.0, 20.0)),
    ]
}

/// One C-shaped outline covering the canonical arrangement.
pub fn c_building(origin: Point) -> Polygon {
    let pts =
        [(-12.0, -2.0), (12.0, -2.0), (12.0, 20.0), (8.0, 20.0), (8.0, 2.0), (-8.0, 2.0), (-8.0, 20.0), (-12.0, 20.0)]
            .map(|(x, y)| Point::new(x, y) + origin)
            .to_vec();
    Polygon::new(pts, vec![]).unwrap()
}

fn hull_of(polys: &[&Polygon]) -> Option<Polygon> {
    let pts: Vec<Point> = polys.iter().flat_map(|p| p.exterior().iter().copied()).collect();
    Polygon::new(convex_hull(&pts), vec![]).ok()
}

/// Three levels built so that most patterns are only reachable by
/// propagation between levels. See [`demo_expected`].
pub fn demo_scene() -> Scene {
    let mut b = Vec::new();
    // block A: direct at lod 1, merged upwards
    let a = c_fixture(1, "a", Point::new(0.0, 0.0));
    let a12 = hull_of(&[&a[0].polygon, &a[1].polygon]).unwrap();
    b.push(fp("A12", 2, a12));
    b.push(fp("A3", 2, a[2].polygon.clone()));
    b.push(fp("AA", 3, c_building(Point::new(0.0, 0.0))));
    for (x, id) in a.into_iter().zip(["a1", "a2", "a3"]) {
        b.push(fp(id, 1, x.polygon));
    }
    // block B: a labeled C-shaped building at lod 2, split in two at lod 1
    let ob = Point::new(200.0, 0.0);
    b.push(fp("B", 2, c_building(ob)).with_shape_c(true));
    let left = [(-12.0, -2.0), (0.0, -2.0), (0.0, 2.0), (-8.0, 2.0), (-8.0, 20.0), (-12.0, 20.0)];
    let right = [(0.0, -2.0), (12.0, -2.0), (12.0, 20.0), (8.0, 20.0), (8.0, 2.0), (0.0, 2.0)];
    for (id, ring) in [("b1", &left), ("b2", &right)] {
        let pts = ring.iter().map(|&(x, y)| Point::new(x, y) + ob).collect();
        b.push(fp(id, 1, Polygon::new(pts, vec![]).unwrap()));
    }
    // block C: direct at lod 3, middle bar split below
    let oc = Point::new(400.0, 0.0);
    let c = c_fixture(3, "c", oc);
    let halves = [
        translated(&Polygon::rect(-10.0, -2.0, 0.0, 2.0).unwrap(), oc),
        translated(&Polygon::rect(0.0, -2.0, 10.0, 2.0).unwrap(), oc),
    ];
    let lower = [halves[0].clone(), halves[1].clone(), c[1].polygon.clone(), c[2].polygon.clone()];
    for (k, p) in lower.iter().enumerate() {
        b.push(fp(&format!("d{}", k + 1), 2, p.clone()));
        b.push(fp(&format!("e{}", k + 1), 1, p.clone()));
    }
    for (x, id) in c.into_iter().zip(["c1", "c2", "c3"]) {
        b.push(fp(id, 3, x.polygon));
    }
    Scene::new(b, RoadSet::empty(), vec![]).expect("fixture ids are unique")
}

/// Patterns expected in [`demo_scene`] after enrichment.
pub fn demo_expected() -> Vec<(u32, Vec<String>, Provenance)> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        (1, s(&["a1", "a2", "a3"]), Provenance::Direct),
        (1, s(&["b1", "b2"]), Provenance::UpBottom),
        (1, s(&["e1", "e2", "e3", "e4"]), Provenance::UpBottom),
        (2, s(&["A12", "A3"]), Provenance::BottomUp),
        (2, s(&["B"]), Provenance::Labeled),
        (2, s(&["d1", "d2", "d3", "d4"]), Provenance::UpBottom),
        (3, s(&["AA"]), Provenance::BottomUp),
        (3, s(&["c1", "c2", "c3"]), Provenance::Direct),
    ]
}

/// Parameters of [`generate_scene`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureParams {
    /// Buildings at the most detailed level.
    pub buildings: usize,
    /// Number of levels, 1 to 3.
    pub levels: u32,
    /// Grid cell size (m).
    pub spacing: f64,
    /// Jitter strength in [0, 1].
    pub noise: f64,
    /// Share of blocks holding a C-shaped triple.
    pub c_share: f64,
    /// Probability of a road along each grid line between blocks.
    pub road_share: f64,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self { buildings: 100, levels: 3, spacing: 90.0, noise: 0.3, c_share: 0.4, road_share: 0.5, seed: 7 }
    }
}

impl FixtureParams {
    pub fn validate(&self) -> Result<()> {
        if self.buildings == 0 {
            return Err(Error::InvalidArgument("buildings must be at least 1".into()));
        }
        if !(1..=3).contains(&self.levels) {
            return Err(Error::InvalidArgument(format!("levels must be 1..=3, got {}", self.levels)));
        }
        if !(self.spacing >= 80.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be at least 80 m, got {}", self.spacing)));
        }
        if [self.noise, self.c_share, self.road_share].iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("noise, c_share and road_share must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Local block layout: polygons plus optional C-shape labels.
type Block = Vec<(Polygon, bool)>;

fn jitter(rng: &mut ChaCha8Rng, noise: f64, poly: &Polygon) -> Polygon {
    if noise == 0.0 {
        return poly.clone();
    }
    let c = poly.bbox();
    let centre = (c.min + c.max) * 0.5;
    let rot = noise * rng.gen_range(-20.0..20.0);
    let shift = Point::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)) * noise;
    poly.map_points(|p| (p - centre).rotated_deg(rot) + centre + shift).unwrap_or_else(|_| poly.clone())
}

fn c_block(rng: &mut ChaCha8Rng) -> Block {
    let lm = rng.gen_range(16.0..30.0);
    let wm = rng.gen_range(3.5..6.0);
    let lw = rng.gen_range(10.0..20.0);
    let ww = rng.gen_range(3.5..6.0);
    let gap = rng.gen_range(3.0..8.0);
    let middle = oriented_rect(Point::new(0.0, 0.0), lm, wm, 0.0);
    // the wing straddles the end of the middle bar most of the time
    let wing_x = |rng: &mut ChaCha8Rng| lm / 2.0 + rng.gen_range(-0.9 * ww..0.7 * ww);
    let y = wm / 2.0 + gap + lw / 2.0;
    let flip = rng.gen_bool(0.15);
    let (x1, x2) = (wing_x(rng), wing_x(rng));
    let w1 = oriented_rect(Point::new(x1, y), lw, ww, 90.0);
    let w2 = oriented_rect(Point::new(-x2, if flip { -y } else { y }), lw, ww, 90.0);
    vec![(middle, false), (w1, false), (w2, false)]
}

fn bars_block(rng: &mut ChaCha8Rng) -> Block {
    let k = rng.gen_range(2..=3);
    let len = rng.gen_range(12.0..30.0);
    let wid = rng.gen_range(4.0..8.0);
    let step = wid + rng.gen_range(4.0..10.0);
    (0..k)
        .map(|i| {
            let y = (i as f64 - (k - 1) as f64 / 2.0) * step;
            (oriented_rect(Point::new(rng.gen_range(-3.0..3.0), y), len, wid, 0.0), false)
        })
        .collect()
}

fn pair_block(rng: &mut ChaCha8Rng) -> Block {
    let mut b = c_block(rng);
    b.truncate(2);
    b
}

fn single_block(rng: &mut ChaCha8Rng) -> Block {
    let len: f64 = rng.gen_range(8.0..30.0);
    let wid = rng.gen_range(6.0..len.min(16.0_f64));
    vec![(oriented_rect(Point::new(0.0, 0.0), len, wid, 0.0), false)]
}

fn irregular_block(rng: &mut ChaCha8Rng) -> Block {
    if rng.gen_bool(0.5) {
        let label = rng.gen_bool(0.6);
        vec![(c_building(Point::new(0.0, -9.0)), label)]
    } else {
        let a = rng.gen_range(14.0..26.0);
        let t = rng.gen_range(3.0..6.0);
        let pts = [(0.0, 0.0), (a, 0.0), (a, t), (t, t), (t, a), (0.0, a)]
            .map(|(x, y)| Point::new(x - a / 2.0, y - a / 2.0))
            .to_vec();
        vec![(Polygon::new(pts, vec![]).unwrap(), false)]
    }
}

fn houses_block(rng: &mut ChaCha8Rng) -> Block {
    let s = rng.gen_range(5.0..9.0);
    let g = rng.gen_range(2.0..6.0);
    let d = (s + g) / 2.0;
    [(-d, -d), (d, -d), (d, d), (-d, d)]
        .into_iter()
        .map(|(x, y)| (oriented_rect(Point::new(x, y), s, s * rng.gen_range(0.7..1.0), 0.0), false))
        .collect()
}

fn any_overlap(polys: &[&Polygon]) -> bool {
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if polys[i].bbox().intersects(&polys[j].bbox()) && overlap_area(polys[i], polys[j]) > 1e-6 {
                return true;
            }
        }
    }
    false
}

fn place_block(rng: &mut ChaCha8Rng, p: &FixtureParams, centre: Point) -> Block {
    for _ in 0..10 {
        let roll: f64 = rng.gen();
        let rest = (1.0 - p.c_share) / 5.0;
        let block = if roll < p.c_share {
            c_block(rng)
        } else if roll < p.c_share + rest {
            bars_block(rng)
        } else if roll < p.c_share + 2.0 * rest {
            pair_block(rng)
        } else if roll < p.c_share + 3.0 * rest {
            single_block(rng)
        } else if roll < p.c_share + 4.0 * rest {
            irregular_block(rng)
        } else {
            houses_block(rng)
        };
        let angle = rng.gen_range(0.0..180.0);
        let placed: Block = block
            .into_iter()
            .map(|(poly, label)| {
                let q = jitter(rng, p.noise, &poly);
                let q = q.map_points(|v| v.rotated_deg(angle) + centre).unwrap_or(q);
                (q, label)
            })
            .collect();
        let refs: Vec<&Polygon> = placed.iter().map(|x| &x.0).collect();
        let fits = placed.iter().all(|(q, _)| {
            let bb = q.bbox();
            let r = 0.42 * p.spacing;
            bb.min.x > centre.x - r && bb.max.x < centre.x + r && bb.min.y > centre.y - r && bb.max.y < centre.y + r
        });
        if fits && !any_overlap(&refs) {
            return placed;
        }
    }
    vec![(oriented_rect(centre, 10.0, 8.0, 0.0), false)]
}

/// Next coarser representation of one block.
fn generalize(rng: &mut ChaCha8Rng, block: &Block) -> Block {
    let copy = || block.clone();
    if block.len() < 2 {
        return copy();
    }
    let roll: f64 = rng.gen();
    let candidate: Block = if roll < 0.4 {
        return copy();
    } else if roll < 0.7 {
        let all: Vec<&Polygon> = block.iter().map(|x| &x.0).collect();
        match hull_of(&all) {
            Some(h) => vec![(h, false)],
            None => return copy(),
        }
    } else if roll < 0.9 {
        let mut idx: Vec<usize> = (0..block.len()).collect();
        idx.shuffle(rng);
        let (a, b) = (idx[0], idx[1]);
        let Some(h) = hull_of(&[&block[a].0, &block[b].0]) else { return copy() };
        let mut out = vec![(h, false)];
        out.extend(block.iter().enumerate().filter(|(k, _)| *k != a && *k != b).map(|(_, x)| x.clone()));
        out
    } else {
        let smallest = (0..block.len())
            .min_by(|&i, &j| {
                crate::geometry::polygon_area(&block[i].0).total_cmp(&crate::geometry::polygon_area(&block[j].0))
            })
            .unwrap();
        block.iter().enumerate().filter(|(k, _)| *k != smallest).map(|(_, x)| x.clone()).collect()
    };
    let refs: Vec<&Polygon> = candidate.iter().map(|x| &x.0).collect();
    if any_overlap(&refs) {
        copy()
    } else {
        candidate
    }
}

/// Deterministic multi-level scene for the given parameters.
pub fn generate_scene(p: &FixtureParams) -> Result<Scene> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let cols = ((p.buildings as f64 / 2.5).sqrt().ceil() as usize).max(1);
    let mut blocks: Vec<Block> = Vec::new();
    let mut total = 0;
    while total < p.buildings {
        let k = blocks.len();
        let centre = Point::new((k % cols) as f64 * p.spacing, (k / cols) as f64 * p.spacing);
        let mut b = place_block(&mut rng, p, centre);
        b.truncate(p.buildings - total);
        total += b.len();
        blocks.push(b);
    }
    let mut levels = vec![blocks];
    for _ in 1..p.levels {
        let prev = levels.last().unwrap();
        let next = prev.iter().map(|b| generalize(&mut rng, b)).collect();
        levels.push(next);
    }
    let mut out = Vec::new();
    for (l, blocks) in levels.iter().enumerate() {
        let lod = l as u32 + 1;
        for (k, block) in blocks.iter().enumerate() {
            for (j, (poly, label)) in block.iter().enumerate() {
                let b = BuildingFootprint::new(format!("L{lod}-{k:04}-{j}"), lod, poly.clone())?;
                out.push(b.with_shape_c(*label));
            }
        }
    }
    let roads = if p.road_share > 0.0 {
        let rows = levels[0].len().div_ceil(cols);
        let (w, h) = (cols as f64 * p.spacing, rows as f64 * p.spacing);
        let half = p.spacing / 2.0;
        let mut lines = Vec::new();
        for r in 1..rows {
            if rng.gen_bool(p.road_share) {
                let y = r as f64 * p.spacing - half;
                lines.push(vec![Point::new(-half, y), Point::new(w - half, y)]);
            }
        }
        for c in 1..cols {
            if rng.gen_bool(p.road_share) {
                let x = c as f64 * p.spacing - half;
                lines.push(vec![Point::new(x, -half), Point::new(x, h - half)]);
            }
        }
        RoadSet::new(lines)?
    } else {
        RoadSet::empty()
    };
    Scene::new(out, roads, vec![])
}
