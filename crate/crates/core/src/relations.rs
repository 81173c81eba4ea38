//! Pairwise relations between buildings at one level of detail.
//!
//! The target's SBR is projected onto the referent's short and long axes and
//! each projection is classified against the referent's own extent with
//! Allen's interval algebra. The pair of codes `(i, j)` (short axis, long
//! axis) is packed into a single relation code `(i − 1)·13 + j`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::geometry::{project_onto_axis, Interval, Sbr};

/// The 13 Allen relations, numbered so that `{1, 2, 12, 13}` are the
/// disjoint/touching family and `{3, 11}` the partial overlaps. `a R b`
/// reads "interval `a` is R interval `b`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum AllenRelation {
    Before = 1,
    Meets = 2,
    Overlaps = 3,
    Starts = 4,
    During = 5,
    Finishes = 6,
    Equals = 7,
    FinishedBy = 8,
    Contains = 9,
    StartedBy = 10,
    OverlappedBy = 11,
    MetBy = 12,
    After = 13,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        Self::Before,
        Self::Meets,
        Self::Overlaps,
        Self::Starts,
        Self::During,
        Self::Finishes,
        Self::Equals,
        Self::FinishedBy,
        Self::Contains,
        Self::StartedBy,
        Self::OverlappedBy,
        Self::MetBy,
        Self::After,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1..=13 => Ok(Self::ALL[usize::from(code) - 1]),
            _ => Err(Error::InvalidArgument(format!("Allen code {code} outside 1..=13"))),
        }
    }

    /// `b R' a` for `a R b`. The numbering is palindromic: code ↦ 14 − code.
    pub fn converse(self) -> Self {
        Self::ALL[usize::from(13 - self.code())]
    }

    /// Before, meets, met-by, after.
    pub fn is_disjoint(self) -> bool {
        matches!(self, Self::Before | Self::Meets | Self::MetBy | Self::After)
    }

    pub fn is_partial_overlap(self) -> bool {
        matches!(self, Self::Overlaps | Self::OverlappedBy)
    }
}

fn tolerant_cmp(x: f64, y: f64, eps: f64) -> Ordering {
    if (x - y).abs() <= eps {
        Ordering::Equal
    } else if x < y {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Classifies `a` against `b`; endpoints closer than `eps` count as equal.
///
/// Degenerate inputs (intervals no longer than `2·eps`) can satisfy several
/// signatures at once. They resolve in this order: equal ends, strict
/// disjointness, touching, then the interior cases by start/end order. When
/// an interval touches the other on both sides the start/end order decides
/// between meets and met-by, so the converse law holds everywhere.
pub fn allen_classify(a: Interval, b: Interval, eps: f64) -> AllenRelation {
    use AllenRelation::*;
    use Ordering::{Equal as Eq, Greater as Gt, Less as Lt};

    let ll = tolerant_cmp(a.lo, b.lo, eps);
    let lh = tolerant_cmp(a.lo, b.hi, eps);
    let hl = tolerant_cmp(a.hi, b.lo, eps);
    let hh = tolerant_cmp(a.hi, b.hi, eps);

    if ll == Eq && hh == Eq {
        return Equals;
    }
    if hl == Lt {
        return Before;
    }
    if lh == Gt {
        return After;
    }
    if hl == Eq && lh == Eq {
        match (ll, hh) {
            (Lt, Lt) | (Lt, Eq) | (Eq, Lt) => return Meets,
            (Gt, Gt) | (Gt, Eq) | (Eq, Gt) => return MetBy,
            _ => {}
        }
    } else if hl == Eq {
        return Meets;
    } else if lh == Eq {
        return MetBy;
    }
    match (ll, hh) {
        (Lt, Lt) => Overlaps,
        (Eq, Lt) => Starts,
        (Gt, Lt) => During,
        (Gt, Eq) => Finishes,
        (Eq, Eq) => Equals,
        (Lt, Eq) => FinishedBy,
        (Lt, Gt) => Contains,
        (Eq, Gt) => StartedBy,
        (Gt, Gt) => OverlappedBy,
    }
}

/// Packs the short-axis code `i` and long-axis code `j` into `1..=169`.
pub fn encode_inter_t(i: u8, j: u8) -> Result<u8> {
    if !(1..=13).contains(&i) || !(1..=13).contains(&j) {
        return Err(Error::InvalidArgument(format!("interval codes ({i}, {j}) outside 1..=13")));
    }
    Ok((i - 1) * 13 + j)
}

pub fn decode_inter_t(t: u8) -> Result<(u8, u8)> {
    if !(1..=169).contains(&t) {
        return Err(Error::InvalidArgument(format!("relation code {t} outside 1..=169")));
    }
    Ok(((t - 1) / 13 + 1, (t - 1) % 13 + 1))
}

/// Codes admitted by the partly-perpendicular test: short axis disjoint or
/// touching, long axis partially overlapping.
pub const PART_PER_CODES: [u8; 8] = [3, 16, 11, 24, 146, 159, 154, 167];

/// Pair-level thresholds. Defaults follow the published experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Minimum facing ratio for the fully-parallel test.
    pub delta1: f64,
    /// Maximum `max/min − 1` area ratio for similar size.
    pub delta2: f64,
    /// Angular tolerance (degrees) for parallel and perpendicular tests.
    pub delta3: f64,
    /// Buildings below this rectangularity get no interval relations.
    pub srec_min: f64,
    /// Minimum min-normalized overlap for a cross-scale correspondence.
    pub overlap_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { delta1: 0.4, delta2: 2.0, delta3: 15.0, srec_min: 0.6, overlap_min: 0.3 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64, range: &str| {
            Err(Error::InvalidArgument(format!("threshold {name} = {v} outside {range}")))
        };
        if !(self.delta1 > 0.0 && self.delta1 <= 1.0) {
            return bad("delta1", self.delta1, "(0, 1]");
        }
        if !(self.delta2 > 0.0 && self.delta2.is_finite()) {
            return bad("delta2", self.delta2, "(0, inf)");
        }
        if !(self.delta3 > 0.0 && self.delta3 < 45.0) {
            return bad("delta3", self.delta3, "(0, 45)");
        }
        if !(self.srec_min > 0.0 && self.srec_min <= 1.0) {
            return bad("srec_min", self.srec_min, "(0, 1]");
        }
        if !(self.overlap_min > 0.0 && self.overlap_min <= 1.0) {
            return bad("overlap_min", self.overlap_min, "(0, 1]");
        }
        Ok(())
    }
}

/// Directed interval relation from a referent to a target building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRelation {
    pub referent: String,
    pub target: String,
    /// Relation on the referent's short axis.
    pub i: AllenRelation,
    /// Relation on the referent's long axis.
    pub j: AllenRelation,
    pub inter_t: u8,
    pub face_r: f64,
}

/// Facing ratio: overlap of both SBRs' projections on the referent's long
/// axis, over the shorter projection.
pub fn face_r(reference: &Sbr, target: &Sbr) -> f64 {
    let dir = reference.long_dir();
    let a = project_onto_axis(reference, reference.center, dir);
    let b = project_onto_axis(target, reference.center, dir);
    let shorter = a.len().min(b.len());
    if shorter <= 0.0 {
        return 0.0;
    }
    (a.overlap(&b) / shorter).clamp(0.0, 1.0)
}

/// Interval relation of `tar` seen from `reference`, or `None` when either
/// building is too irregular to be represented by its SBR.
pub fn interval_relation(
    reference: &BuildingFootprint,
    tar: &BuildingFootprint,
    thresholds: &Thresholds,
) -> Option<IntervalRelation> {
    if reference.rectangularity < thresholds.srec_min || tar.rectangularity < thresholds.srec_min {
        return None;
    }
    let (i, j) = axis_relations(&reference.sbr, &tar.sbr);
    Some(IntervalRelation {
        referent: reference.id.clone(),
        target: tar.id.clone(),
        i,
        j,
        inter_t: (i.code() - 1) * 13 + j.code(),
        face_r: face_r(&reference.sbr, &tar.sbr),
    })
}

/// Allen relations of the target's projections against the referent's short
/// and long axes. Endpoint tolerance is 1% of the referent's long side.
pub fn axis_relations(reference: &Sbr, target: &Sbr) -> (AllenRelation, AllenRelation) {
    let eps = 0.01 * 2.0 * reference.long_half;
    let o = reference.center;
    let short = project_onto_axis(target, o, reference.short_dir());
    let long = project_onto_axis(target, o, reference.long_dir());
    (allen_classify(reference.short_interval(), short, eps), allen_classify(reference.long_interval(), long, eps))
}

/// Similar size, symmetric in its arguments.
pub fn sim_a(area_a: f64, area_b: f64, delta2: f64) -> bool {
    area_a.max(area_b) / area_a.min(area_b) - 1.0 <= delta2
}

fn orientation_gap(o_a: f64, o_b: f64) -> f64 {
    (o_a - o_b).abs()
}

pub fn para_o(o_a: f64, o_b: f64, delta3: f64) -> bool {
    let d = orientation_gap(o_a, o_b);
    d <= delta3 || 180.0 - d <= delta3
}

pub fn per_o(o_a: f64, o_b: f64, delta3: f64) -> bool {
    (90.0 - orientation_gap(o_a, o_b)).abs() <= delta3
}

/// Interval part of the fully-parallel test: the target lies beside the
/// referent (short axis disjoint or touching) and overlaps its long axis
/// (codes 3..=11), facing at least `delta1`.
pub fn full_para_interval(inter_t: u8, face_r: f64, delta1: f64) -> bool {
    let Ok((i, j)) = decode_inter_t(inter_t) else { return false };
    matches!(i, 1 | 2 | 12 | 13) && (3..=11).contains(&j) && face_r >= delta1
}

pub fn part_per_interval(inter_t: u8) -> bool {
    PART_PER_CODES.contains(&inter_t)
}

pub fn full_para(
    reference: &BuildingFootprint,
    tar: &BuildingFootprint,
    rel: &IntervalRelation,
    thresholds: &Thresholds,
) -> bool {
    sim_a(reference.area, tar.area, thresholds.delta2)
        && para_o(reference.sbr.orientation_deg, tar.sbr.orientation_deg, thresholds.delta3)
        && full_para_interval(rel.inter_t, rel.face_r, thresholds.delta1)
}

/// Direction-sensitive: `reference` plays the middle building.
pub fn part_per(
    reference: &BuildingFootprint,
    tar: &BuildingFootprint,
    rel: &IntervalRelation,
    thresholds: &Thresholds,
) -> bool {
    per_o(reference.sbr.orientation_deg, tar.sbr.orientation_deg, thresholds.delta3) && part_per_interval(rel.inter_t)
}
