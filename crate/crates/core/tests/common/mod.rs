//! Reference implementations used as test oracles. Everything here is
//! written from the definitions, without calling the code under test
//! beyond reading inputs (footprints, proximity graphs).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cpattern::footprint::BuildingFootprint;
use cpattern::geometry::{Interval, Point, Polygon};
use cpattern::proximity::ProximityGraph;
use cpattern::relations::{AllenRelation, Thresholds};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Allen relations by decision table

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C {
    Lt,
    Eq,
    Gt,
}

pub fn tcmp(x: f64, y: f64, eps: f64) -> C {
    if (x - y).abs() <= eps {
        C::Eq
    } else if x < y {
        C::Lt
    } else {
        C::Gt
    }
}

/// Signatures `(a.lo?b.lo, a.lo?b.hi, a.hi?b.lo, a.hi?b.hi)` of the 13
/// relations between proper intervals.
pub const ALLEN_TABLE: [((C, C, C, C), u8); 13] = {
    use C::*;
    [
        ((Lt, Lt, Lt, Lt), 1),
        ((Lt, Lt, Eq, Lt), 2),
        ((Lt, Lt, Gt, Lt), 3),
        ((Eq, Lt, Gt, Lt), 4),
        ((Gt, Lt, Gt, Lt), 5),
        ((Gt, Lt, Gt, Eq), 6),
        ((Eq, Lt, Gt, Eq), 7),
        ((Lt, Lt, Gt, Eq), 8),
        ((Lt, Lt, Gt, Gt), 9),
        ((Eq, Lt, Gt, Gt), 10),
        ((Gt, Lt, Gt, Gt), 11),
        ((Gt, Eq, Gt, Gt), 12),
        ((Gt, Gt, Gt, Gt), 13),
    ]
};

/// Allen code of `a` against `b`. Signatures outside the table only arise
/// for intervals shorter than the tolerance; those follow the documented
/// precedence: equal ends, strict separation, touching, start/end order.
pub fn allen_oracle(a: Interval, b: Interval, eps: f64) -> u8 {
    use C::*;
    let sig = (tcmp(a.lo, b.lo, eps), tcmp(a.lo, b.hi, eps), tcmp(a.hi, b.lo, eps), tcmp(a.hi, b.hi, eps));
    if let Some((_, code)) = ALLEN_TABLE.iter().find(|(s, _)| *s == sig) {
        return *code;
    }
    let (ll, lh, hl, hh) = sig;
    if ll == Eq && hh == Eq {
        return 7;
    }
    if hl == Lt {
        return 1;
    }
    if lh == Gt {
        return 13;
    }
    let touches_start = hl == Eq;
    let touches_end = lh == Eq;
    let earlier = ll == Lt || hh == Lt;
    let later = ll == Gt || hh == Gt;
    if touches_start && touches_end {
        if earlier && !later {
            return 2;
        }
        if later && !earlier {
            return 12;
        }
    } else if touches_start {
        return 2;
    } else if touches_end {
        return 12;
    }
    match (ll, hh) {
        (Lt, Lt) => 3,
        (Eq, Lt) => 4,
        (Gt, Lt) => 5,
        (Gt, Eq) => 6,
        (Lt, Eq) => 8,
        (Lt, Gt) => 9,
        (Eq, Gt) => 10,
        (Gt, Gt) => 11,
        (Eq, Eq) => 7,
    }
}

pub fn allen_code(r: AllenRelation) -> u8 {
    r.code()
}

// ---------------------------------------------------------------------------
// geometry

/// Minimum bounding-box area over rotations in `step_deg` increments.
pub fn sweep_min_rect_area(points: &[Point], step_deg: f64) -> f64 {
    let steps = (180.0 / step_deg).round() as usize;
    let mut best = f64::INFINITY;
    for k in 0..steps {
        let t = (k as f64 * step_deg).to_radians();
        let (s, c) = t.sin_cos();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            let x = p.x * c + p.y * s;
            let y = -p.x * s + p.y * c;
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        best = best.min((x1 - x0) * (y1 - y0));
    }
    best
}

/// Even-odd point-in-polygon over all rings.
pub fn inside(poly: &Polygon, p: Point) -> bool {
    let mut inside = false;
    for ring in poly.rings() {
        let n = ring.len();
        for i in 0..n {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn bounds(polys: &[&Polygon]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in polys {
        for q in p.exterior() {
            lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
        }
    }
    (lo, hi)
}

/// Monte Carlo estimate of the area inside every polygon of `polys`.
pub fn mc_common_area(polys: &[&Polygon], samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = bounds(polys);
    let box_area = (hi.x - lo.x) * (hi.y - lo.y);
    let hits = (0..samples)
        .filter(|_| {
            let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            polys.iter().all(|poly| inside(poly, p))
        })
        .count();
    box_area * hits as f64 / samples as f64
}

/// Simple polygon, star-shaped around `center` (angular gaps stay below pi).
pub fn random_star(rng: &mut ChaCha8Rng, center: Point, radius: f64) -> Polygon {
    let k = rng.gen_range(4..=12);
    let step = std::f64::consts::TAU / k as f64;
    let pts = (0..k)
        .map(|i| {
            let a = (i as f64 + rng.gen_range(0.0..0.5)) * step;
            let r = radius * rng.gen_range(0.3..1.0);
            Point::new(center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect();
    Polygon::new(pts, vec![]).expect("star polygons are simple")
}

// ---------------------------------------------------------------------------
// C-pattern predicates, coded from their definitions

struct Frame {
    center: Point,
    long: Point,
    short: Point,
    long_half: f64,
    short_half: f64,
}

fn frame(b: &BuildingFootprint) -> Frame {
    let t = b.sbr.orientation_deg.to_radians();
    Frame {
        center: b.sbr.center,
        long: Point::new(t.cos(), t.sin()),
        short: Point::new(-t.sin(), t.cos()),
        long_half: b.sbr.long_half,
        short_half: b.sbr.short_half,
    }
}

fn corners(f: &Frame) -> Vec<Point> {
    let mut out = Vec::new();
    for sl in [-1.0, 1.0] {
        for ss in [-1.0, 1.0] {
            out.push(Point::new(
                f.center.x + sl * f.long_half * f.long.x + ss * f.short_half * f.short.x,
                f.center.y + sl * f.long_half * f.long.y + ss * f.short_half * f.short.y,
            ));
        }
    }
    out
}

fn project(points: &[Point], origin: Point, dir: Point) -> Interval {
    let ts: Vec<f64> = points.iter().map(|p| (p.x - origin.x) * dir.x + (p.y - origin.y) * dir.y).collect();
    Interval {
        lo: ts.iter().copied().fold(f64::INFINITY, f64::min),
        hi: ts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Allen codes (short axis, long axis) and facing ratio of `t` seen from `r`.
pub fn oracle_relation(r: &BuildingFootprint, t: &BuildingFootprint) -> (u8, u8, f64) {
    let (fr, ft) = (frame(r), frame(t));
    let eps = 0.02 * fr.long_half;
    let tc = corners(&ft);
    let s = project(&tc, fr.center, fr.short);
    let l = project(&tc, fr.center, fr.long);
    let own_s = Interval { lo: -fr.short_half, hi: fr.short_half };
    let own_l = Interval { lo: -fr.long_half, hi: fr.long_half };
    let overlap = (own_l.hi.min(l.hi) - own_l.lo.max(l.lo)).max(0.0);
    let shorter = (own_l.hi - own_l.lo).min(l.hi - l.lo);
    let face = if shorter > 0.0 { (overlap / shorter).min(1.0) } else { 0.0 };
    (allen_oracle(own_s, s, eps), allen_oracle(own_l, l, eps), face)
}

fn axis_gap(a: &BuildingFootprint, b: &BuildingFootprint) -> f64 {
    let d = (a.sbr.orientation_deg - b.sbr.orientation_deg).rem_euclid(180.0);
    d.min(180.0 - d)
}

pub fn similar(a: &BuildingFootprint, b: &BuildingFootprint, th: &Thresholds) -> bool {
    let (big, small) = if a.area >= b.area { (a.area, b.area) } else { (b.area, a.area) };
    big - small <= th.delta2 * small
}

pub fn parallel(a: &BuildingFootprint, b: &BuildingFootprint, th: &Thresholds) -> bool {
    axis_gap(a, b) <= th.delta3
}

pub fn perpendicular(a: &BuildingFootprint, b: &BuildingFootprint, th: &Thresholds) -> bool {
    axis_gap(a, b) >= 90.0 - th.delta3
}

fn regular(a: &BuildingFootprint, th: &Thresholds) -> bool {
    a.rectangularity >= th.srec_min
}

const SIDE: [u8; 4] = [1, 2, 12, 13];

/// `b` beside `a`, parallel, similar in size and facing it.
pub fn oracle_full_para(a: &BuildingFootprint, b: &BuildingFootprint, th: &Thresholds) -> bool {
    if !(regular(a, th) && regular(b, th)) {
        return false;
    }
    let (i, j, face) = oracle_relation(a, b);
    similar(a, b, th) && parallel(a, b, th) && SIDE.contains(&i) && !SIDE.contains(&j) && face >= th.delta1
}

/// `b` perpendicular to `a`, beside it and straddling one end of it.
pub fn oracle_part_per(a: &BuildingFootprint, b: &BuildingFootprint, th: &Thresholds) -> bool {
    if !(regular(a, th) && regular(b, th)) {
        return false;
    }
    let (i, j, _) = oracle_relation(a, b);
    perpendicular(a, b, th) && SIDE.contains(&i) && (j == 3 || j == 11)
}

/// Every C-shaped triple of one level by exhaustive enumeration.
pub fn oracle_triples(
    buildings: &[BuildingFootprint],
    prox: &ProximityGraph,
    th: &Thresholds,
) -> BTreeSet<Vec<String>> {
    let n = buildings.len();
    let idx: BTreeMap<&str, usize> = buildings.iter().enumerate().map(|(k, b)| (b.id.as_str(), k)).collect();
    let mut near = vec![vec![false; n]; n];
    for (a, b) in prox.edges() {
        let (x, y) = (idx[a], idx[b]);
        near[x][y] = true;
        near[y][x] = true;
    }
    let mut pp = vec![vec![false; n]; n];
    let mut fp = vec![vec![false; n]; n];
    for x in 0..n {
        for y in 0..n {
            if x != y && near[x][y] {
                pp[x][y] = oracle_part_per(&buildings[x], &buildings[y], th);
                fp[x][y] = oracle_full_para(&buildings[x], &buildings[y], th);
            }
        }
    }
    let mut out = BTreeSet::new();
    for m in 0..n {
        for w1 in 0..n {
            for w2 in 0..n {
                if m == w1 || m == w2 || w1 == w2 {
                    continue;
                }
                let ok =
                    near[m][w1] && near[m][w2] && near[w1][w2] && pp[m][w1] && pp[m][w2] && (fp[w1][w2] || fp[w2][w1]);
                if ok {
                    let mut s = vec![buildings[m].id.clone(), buildings[w1].id.clone(), buildings[w2].id.clone()];
                    s.sort();
                    out.insert(s);
                }
            }
        }
    }
    out
}
