//! Planar polygon primitives used by every later stage.
//!
//! Coordinates are meters in a projected CRS. Polygons are normalized on
//! construction: exterior rings run counter-clockwise, holes clockwise, and
//! the closing repeat vertex is dropped.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for point containment and length/area comparisons (meters).
pub const EPS_GEOM: f64 = 1e-6;
/// Internal angular tolerance (degrees). Not a cartographic threshold.
pub const EPS_ANG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid geometry: ring has {0} distinct vertices, at least 3 required")]
    TooFewVertices(usize),
    #[error("invalid geometry: non-finite coordinate")]
    NonFinite,
    #[error("invalid geometry: ring encloses zero area")]
    ZeroArea,
    #[error("invalid geometry: ring self-intersects (edges {0} and {1})")]
    SelfIntersection(usize, usize),
    #[error("invalid geometry: hole {0} is not inside the exterior ring")]
    HoleOutside(usize),
    #[error("invalid geometry: vertex set is collinear, no bounding rectangle")]
    Collinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Left-hand perpendicular.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Unit vector at `deg` degrees from the +x axis.
    pub fn from_angle_deg(deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(c, s)
    }

    /// Rotates about the origin by `deg` degrees counter-clockwise.
    pub fn rotated_deg(self, deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Signed shoelace area of an open ring.
pub fn signed_ring_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        sum += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * sum
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: &[Point]) -> BBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn intersects(&self, o: &BBox) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }
}

/// A simple polygon with optional holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

impl Polygon {
    /// Validates and normalizes the rings. A trailing vertex equal to the
    /// first one is treated as the closing repeat and dropped.
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self, GeometryError> {
        let exterior = normalize_ring(exterior, true)?;
        let mut normalized = Vec::with_capacity(holes.len());
        for (k, hole) in holes.into_iter().enumerate() {
            let hole = normalize_ring(hole, false)?;
            if !hole.iter().all(|&p| point_in_ring(p, &exterior)) {
                return Err(GeometryError::HoleOutside(k));
            }
            normalized.push(hole);
        }
        Ok(Self { exterior, holes: normalized })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)], vec![])
    }

    pub fn exterior(&self) -> &[Point] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.exterior)
    }

    /// Applies `f` to every vertex and re-validates.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Polygon, GeometryError> {
        Polygon::new(
            self.exterior.iter().map(|&p| f(p)).collect(),
            self.holes.iter().map(|h| h.iter().map(|&p| f(p)).collect()).collect(),
        )
    }

    /// Even-odd containment over all rings (points in holes are outside).
    pub fn contains(&self, p: Point) -> bool {
        self.rings().filter(|r| point_in_ring(p, r)).count() % 2 == 1
    }
}

fn normalize_ring(mut ring: Vec<Point>, ccw: bool) -> Result<Vec<Point>, GeometryError> {
    if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err(GeometryError::TooFewVertices(ring.len()));
    }
    let area = signed_ring_area(&ring);
    if area.abs() <= EPS_GEOM * EPS_GEOM {
        return Err(GeometryError::ZeroArea);
    }
    if (area > 0.0) != ccw {
        ring.reverse();
    }
    check_simple(&ring)?;
    Ok(ring)
}

fn check_simple(ring: &[Point]) -> Result<(), GeometryError> {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if adjacent {
                // Adjacent edges may only share their common vertex; a fold-back
                // along the same line is an overlap.
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let (e1, e2) = (p - shared, q - shared);
                if e1.cross(e2).abs() <= 1e-12 * e1.norm() * e2.norm() && e1.dot(e2) > 0.0 {
                    return Err(GeometryError::SelfIntersection(i, j));
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Err(GeometryError::SelfIntersection(i, j));
            }
        }
    }
    Ok(())
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Crossing-number test against one ring.
pub fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Area of the exterior minus the holes (m²).
pub fn polygon_area(p: &Polygon) -> f64 {
    let outer = signed_ring_area(&p.exterior);
    let holes: f64 = p.holes.iter().map(|h| signed_ring_area(h).abs()).sum();
    outer - holes
}

/// Andrew's monotone chain; counter-clockwise, collinear points removed.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// A closed scalar interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Orders the endpoints so that `lo <= hi`.
    pub fn new(a: f64, b: f64) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// Length of the common part, 0 when disjoint.
    pub fn overlap(&self, o: &Interval) -> f64 {
        (self.hi.min(o.hi) - self.lo.max(o.lo)).max(0.0)
    }
}

/// Smallest (minimum-area) bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sbr {
    pub center: Point,
    pub long_half: f64,
    pub short_half: f64,
    /// Direction of the long axis in `[0, 180)` degrees.
    pub orientation_deg: f64,
}

impl Sbr {
    pub fn long_dir(&self) -> Point {
        Point::from_angle_deg(self.orientation_deg)
    }

    pub fn short_dir(&self) -> Point {
        self.long_dir().perp()
    }

    pub fn area(&self) -> f64 {
        4.0 * self.long_half * self.short_half
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        let l = self.long_dir() * self.long_half;
        let s = self.short_dir() * self.short_half;
        let c = self.center;
        [c - l - s, c + l - s, c + l + s, c - l + s]
    }

    /// The referent's own extent along its long axis, centered at 0.
    pub fn long_interval(&self) -> Interval {
        Interval::new(-self.long_half, self.long_half)
    }

    pub fn short_interval(&self) -> Interval {
        Interval::new(-self.short_half, self.short_half)
    }
}

/// Folds an axis angle into `[0, 180)`.
pub fn fold_axis_deg(deg: f64) -> f64 {
    let d = deg.rem_euclid(180.0);
    if d >= 180.0 - 1e-9 {
        0.0
    } else {
        d
    }
}

/// Minimum-area rectangle over the convex hull via rotating calipers.
pub fn compute_sbr(p: &Polygon) -> Result<Sbr, GeometryError> {
    sbr_of_points(p.exterior())
}

/// As [`compute_sbr`] for a bare point set.
pub fn sbr_of_points(points: &[Point]) -> Result<Sbr, GeometryError> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(GeometryError::Collinear);
    }
    let n = hull.len();
    let next = |k: usize| (k + 1) % n;

    let edge_dir = |i: usize| {
        let e = hull[next(i)] - hull[i];
        e * (1.0 / e.norm())
    };

    // Caliper positions for edge 0, found by a full scan; afterwards every
    // caliper only ever advances counter-clockwise.
    let u0 = edge_dir(0);
    let n0 = u0.perp();
    let argbest =
        |f: &dyn Fn(Point) -> f64| (0..n).fold(0, |best, k| if f(hull[k]) > f(hull[best]) { k } else { best });
    let mut right = argbest(&|p| p.dot(u0));
    let mut top = argbest(&|p| p.dot(n0));
    let mut left = argbest(&|p| -p.dot(u0));

    let mut best: Option<(f64, Sbr)> = None;
    for i in 0..n {
        let u = edge_dir(i);
        let nrm = u.perp();
        let base = hull[i];
        for _ in 0..n {
            if (hull[next(right)] - base).dot(u) > (hull[right] - base).dot(u) {
                right = next(right);
            } else {
                break;
            }
        }
        for _ in 0..n {
            if (hull[next(top)] - base).dot(nrm) > (hull[top] - base).dot(nrm) {
                top = next(top);
            } else {
                break;
            }
        }
        for _ in 0..n {
            if (hull[next(left)] - base).dot(u) < (hull[left] - base).dot(u) {
                left = next(left);
            } else {
                break;
            }
        }
        let umax = (hull[right] - base).dot(u);
        let umin = (hull[left] - base).dot(u);
        let height = (hull[top] - base).dot(nrm);
        let width = umax - umin;
        let area = width * height;
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            let center = base + u * (0.5 * (umin + umax)) + nrm * (0.5 * height);
            best = Some((area, rect_from_axes(center, u, 0.5 * width, 0.5 * height)));
        }
    }
    let (area, sbr) = best.expect("hull has at least three edges");
    if area <= EPS_GEOM * EPS_GEOM || sbr.short_half <= 0.0 {
        return Err(GeometryError::Collinear);
    }
    Ok(sbr)
}

/// Builds an [`Sbr`] from one axis direction and the half-extents along it
/// and its perpendicular.
fn rect_from_axes(center: Point, u: Point, half_u: f64, half_v: f64) -> Sbr {
    let angle_u = u.y.atan2(u.x).to_degrees();
    let (long_half, short_half, long_angle) = if (half_u - half_v).abs() <= EPS_GEOM {
        // Square: both axes qualify, keep the smaller folded angle.
        let a = fold_axis_deg(angle_u);
        let b = fold_axis_deg(angle_u + 90.0);
        (half_u.max(half_v), half_u.min(half_v), a.min(b))
    } else if half_u > half_v {
        (half_u, half_v, fold_axis_deg(angle_u))
    } else {
        (half_v, half_u, fold_axis_deg(angle_u + 90.0))
    };
    Sbr { center, long_half, short_half, orientation_deg: long_angle }
}

/// Polygon area over SBR area, in `(0, 1]`.
pub fn rectangularity(p: &Polygon) -> Result<f64, GeometryError> {
    let sbr = compute_sbr(p)?;
    Ok((polygon_area(p) / sbr.area()).min(1.0))
}

/// Scalar projections of the SBR corners onto the line through `origin`
/// along the unit vector `direction`.
pub fn project_onto_axis(s: &Sbr, origin: Point, direction: Point) -> Interval {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in s.corners() {
        let t = (c - origin).dot(direction);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    Interval { lo, hi }
}

/// Ear-clipping triangulation of one simple ring (any orientation).
/// Triangles are returned counter-clockwise.
pub fn triangulate_ring(ring: &[Point]) -> Vec<[Point; 3]> {
    let mut pts: Vec<Point> = ring.to_vec();
    if signed_ring_area(&pts) < 0.0 {
        pts.reverse();
    }
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::with_capacity(pts.len().saturating_sub(2));
    let mut start = 0;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for step in 0..m {
            let k = (start + step) % m;
            let (ip, ic, inx) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (pts[ip], pts[ic], pts[inx]);
            let turn = orient(a, b, c);
            let scale = (b - a).norm() * (c - b).norm();
            if turn.abs() <= 1e-12 * scale {
                // Collinear vertex, drop it without emitting a triangle.
                idx.remove(k);
                start = k % idx.len();
                clipped = true;
                break;
            }
            if turn < 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&o| {
                if o == ip || o == ic || o == inx {
                    return false;
                }
                let p = pts[o];
                if p == a || p == b || p == c {
                    return false;
                }
                orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
            });
            if blocked {
                continue;
            }
            tris.push([a, b, c]);
            idx.remove(k);
            start = k % idx.len();
            clipped = true;
            break;
        }
        if !clipped {
            // Numerically stuck: fan the remainder so the area stays close.
            let a = pts[idx[0]];
            for w in idx[1..].windows(2) {
                let (b, c) = (pts[w[0]], pts[w[1]]);
                if orient(a, b, c) > 0.0 {
                    tris.push([a, b, c]);
                }
            }
            return tris;
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (pts[idx[0]], pts[idx[1]], pts[idx[2]]);
        if orient(a, b, c) > 0.0 {
            tris.push([a, b, c]);
        }
    }
    tris
}

/// Sutherland–Hodgman clip of a convex CCW subject by a convex CCW clip
/// polygon; returns the intersection ring.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output: Vec<Point> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let input = std::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let cur_in = orient(a, b, cur) >= 0.0;
            let prev_in = orient(a, b, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, a, b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, a, b));
            }
        }
    }
    output
}

fn line_intersection(p: Point, q: Point, a: Point, b: Point) -> Point {
    let r = q - p;
    let s = b - a;
    let denom = r.cross(s);
    if denom == 0.0 {
        return q;
    }
    let t = (a - p).cross(s) / denom;
    p + r * t
}

fn triangle_overlap(t1: &[Point; 3], t2: &[Point; 3]) -> f64 {
    if !BBox::of(t1).intersects(&BBox::of(t2)) {
        return 0.0;
    }
    signed_ring_area(&clip_convex(t1, t2)).max(0.0)
}

/// Triangulated rings of a polygon with their inclusion sign
/// (+1 exterior, −1 hole).
pub fn signed_triangulation(p: &Polygon) -> Vec<(f64, Vec<[Point; 3]>)> {
    let mut out = vec![(1.0, triangulate_ring(p.exterior()))];
    for h in p.holes() {
        out.push((-1.0, triangulate_ring(h)));
    }
    out
}

/// Area of the intersection of two polygons.
///
/// Each ring is ear-clipped and the convex triangle pairs are clipped
/// against each other. Holes enter by inclusion-exclusion, which is exact
/// because holes are disjoint and nested in their exterior.
pub fn overlap_area(a: &Polygon, b: &Polygon) -> f64 {
    if !a.bbox().intersects(&b.bbox()) {
        return 0.0;
    }
    let ta = signed_triangulation(a);
    let tb = signed_triangulation(b);
    let mut total = 0.0;
    for (sa, ra) in &ta {
        for (sb, rb) in &tb {
            let mut s = 0.0;
            for x in ra {
                for y in rb {
                    s += triangle_overlap(x, y);
                }
            }
            total += sa * sb * s;
        }
    }
    total.clamp(0.0, polygon_area(a).min(polygon_area(b)))
}
