//! Correspondence between buildings at two adjacent levels of detail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::geometry::{overlap_area, polygon_area, Polygon};

/// Cardinality class of a correspondence component, read coarse side first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatchType {
    #[serde(rename = "one-to-one")]
    OneToOne,
    #[serde(rename = "one-to-many")]
    OneToMany,
    #[serde(rename = "many-to-one")]
    ManyToOne,
    #[serde(rename = "many-to-many")]
    ManyToMany,
    #[serde(rename = "one-to-none")]
    OneToNone,
    #[serde(rename = "none-to-one")]
    NoneToOne,
}

impl MatchType {
    pub const ALL: [MatchType; 6] = [
        MatchType::OneToOne,
        MatchType::OneToMany,
        MatchType::ManyToOne,
        MatchType::ManyToMany,
        MatchType::OneToNone,
        MatchType::NoneToOne,
    ];

    /// Classifies a component by its coarse and detailed member counts.
    pub fn from_counts(coarse: usize, detailed: usize) -> Option<Self> {
        match (coarse, detailed) {
            (0, 0) => None,
            (1, 1) => Some(MatchType::OneToOne),
            (1, 0) => Some(MatchType::OneToNone),
            (0, 1) => Some(MatchType::NoneToOne),
            (1, _) => Some(MatchType::OneToMany),
            (_, 1) => Some(MatchType::ManyToOne),
            (_, 0) | (0, _) => None,
            _ => Some(MatchType::ManyToMany),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MatchType::OneToOne => "one-to-one",
            MatchType::OneToMany => "one-to-many",
            MatchType::ManyToOne => "many-to-one",
            MatchType::ManyToMany => "many-to-many",
            MatchType::OneToNone => "one-to-none",
            MatchType::NoneToOne => "none-to-one",
        }
    }

    /// The coarse side is a single building.
    pub fn coarse_is_one(self) -> bool {
        matches!(self, MatchType::OneToOne | MatchType::OneToMany)
    }
}

impl fmt::Display for MatchType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatchType::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown match type {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchComponent {
    pub coarse_ids: BTreeSet<String>,
    pub detailed_ids: BTreeSet<String>,
    pub match_t: MatchType,
    /// Qualifying (coarse, detailed) pairs inside the component.
    pub pairs: BTreeSet<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverrideAction {
    Add,
    Remove,
}

/// Manual correction of one automatic correspondence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchOverride {
    pub coarse_id: String,
    pub detailed_id: String,
    pub action: OverrideAction,
}

/// Overlap area over the smaller of the two areas.
pub fn overlap_ratio(a: &Polygon, b: &Polygon) -> f64 {
    let denom = polygon_area(a).min(polygon_area(b));
    if denom <= 0.0 {
        return 0.0;
    }
    (overlap_area(a, b) / denom).clamp(0.0, 1.0)
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Pairs (coarse index, detailed index) whose overlap ratio reaches `overlap_min`.
fn qualifying_pairs(
    coarse: &[BuildingFootprint],
    detailed: &[BuildingFootprint],
    overlap_min: f64,
) -> Vec<(usize, usize)> {
    let cb: Vec<_> = coarse.iter().map(|b| b.polygon.bbox()).collect();
    let db: Vec<_> = detailed.iter().map(|b| b.polygon.bbox()).collect();
    let mut dorder: Vec<usize> = (0..detailed.len()).collect();
    dorder.sort_by(|&a, &b| db[a].min.x.total_cmp(&db[b].min.x));
    let mut out = Vec::new();
    for (ci, c) in coarse.iter().enumerate() {
        let bb = cb[ci];
        // detailed boxes starting right of this coarse box cannot intersect it
        let end = dorder.partition_point(|&d| db[d].min.x <= bb.max.x);
        for &di in &dorder[..end] {
            if !bb.intersects(&db[di]) {
                continue;
            }
            let d = &detailed[di];
            let denom = c.area.min(d.area);
            if denom > 0.0 && overlap_area(&c.polygon, &d.polygon) / denom >= overlap_min {
                out.push((ci, di));
            }
        }
    }
    out
}

/// Matches two adjacent levels of detail and groups the correspondences.
pub fn match_buildings(
    coarse: &[BuildingFootprint],
    detailed: &[BuildingFootprint],
    overlap_min: f64,
) -> Result<Vec<MatchComponent>> {
    match_buildings_with_overrides(coarse, detailed, overlap_min, &[])
}

/// As [`match_buildings`], applying manual overrides to the pair set before
/// components are formed.
pub fn match_buildings_with_overrides(
    coarse: &[BuildingFootprint],
    detailed: &[BuildingFootprint],
    overlap_min: f64,
    overrides: &[MatchOverride],
) -> Result<Vec<MatchComponent>> {
    if !(overlap_min > 0.0 && overlap_min <= 1.0) {
        return Err(Error::InvalidArgument(format!("overlap_min must lie in (0, 1], got {overlap_min}")));
    }
    let cidx: BTreeMap<&str, usize> = coarse.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let didx: BTreeMap<&str, usize> = detailed.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    if cidx.len() != coarse.len() || didx.len() != detailed.len() {
        return Err(Error::Validation("duplicate building id in match input".into()));
    }

    let mut pairs: BTreeSet<(usize, usize)> = qualifying_pairs(coarse, detailed, overlap_min).into_iter().collect();
    for o in overrides {
        let c = *cidx
            .get(o.coarse_id.as_str())
            .ok_or_else(|| Error::NotFound(format!("override names unknown coarse building {}", o.coarse_id)))?;
        let d = *didx
            .get(o.detailed_id.as_str())
            .ok_or_else(|| Error::NotFound(format!("override names unknown detailed building {}", o.detailed_id)))?;
        match o.action {
            OverrideAction::Add => pairs.insert((c, d)),
            OverrideAction::Remove => pairs.remove(&(c, d)),
        };
    }

    let nc = coarse.len();
    let mut uf = UnionFind::new(nc + detailed.len());
    for &(c, d) in &pairs {
        uf.union(c, nc + d);
    }
    let mut comps: BTreeMap<usize, MatchComponent> = BTreeMap::new();
    let mut entry = |uf: &mut UnionFind, node: usize| -> usize {
        let root = uf.find(node);
        comps.entry(root).or_insert_with(|| MatchComponent {
            coarse_ids: BTreeSet::new(),
            detailed_ids: BTreeSet::new(),
            match_t: MatchType::OneToOne,
            pairs: BTreeSet::new(),
        });
        root
    };
    let mut roots_c = Vec::with_capacity(nc);
    for i in 0..nc {
        roots_c.push(entry(&mut uf, i));
    }
    let mut roots_d = Vec::with_capacity(detailed.len());
    for i in 0..detailed.len() {
        roots_d.push(entry(&mut uf, nc + i));
    }
    for (i, b) in coarse.iter().enumerate() {
        comps.get_mut(&roots_c[i]).unwrap().coarse_ids.insert(b.id.clone());
    }
    for (i, b) in detailed.iter().enumerate() {
        comps.get_mut(&roots_d[i]).unwrap().detailed_ids.insert(b.id.clone());
    }
    for &(c, d) in &pairs {
        comps.get_mut(&roots_c[c]).unwrap().pairs.insert((coarse[c].id.clone(), detailed[d].id.clone()));
    }
    let mut out: Vec<MatchComponent> = comps
        .into_values()
        .map(|mut m| {
            m.match_t = MatchType::from_counts(m.coarse_ids.len(), m.detailed_ids.len())
                .expect("component has at least one member");
            m
        })
        .collect();
    out.sort_by(|a, b| (&a.coarse_ids, &a.detailed_ids).cmp(&(&b.coarse_ids, &b.detailed_ids)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn rect(id: &str, lod: u32, x0: f64, y0: f64, x1: f64, y1: f64) -> BuildingFootprint {
        BuildingFootprint::new(id, lod, Polygon::rect(x0, y0, x1, y1).unwrap()).unwrap()
    }

    #[test]
    fn ratio_cases() {
        let a = Polygon::rect(0.0, 0.0, 2.0, 2.0).unwrap();
        let inner = Polygon::rect(0.5, 0.5, 1.5, 1.5).unwrap();
        let far = Polygon::rect(5.0, 5.0, 6.0, 6.0).unwrap();
        assert!((overlap_ratio(&a, &a) - 1.0).abs() < 1e-9);
        assert!((overlap_ratio(&a, &inner) - 1.0).abs() < 1e-9);
        assert_eq!(overlap_ratio(&a, &far), 0.0);
    }

    #[test]
    fn l_block_over_two_rectangles_is_one_to_many() {
        let l = Polygon::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(20.0, 0.0),
                Point::new(20.0, 4.0),
                Point::new(4.0, 4.0),
                Point::new(4.0, 16.0),
                Point::new(0.0, 16.0),
            ],
            vec![],
        )
        .unwrap();
        let coarse = vec![BuildingFootprint::new("L", 2, l).unwrap()];
        let detailed = vec![rect("a", 1, 0.0, 0.0, 20.0, 4.0), rect("b", 1, 0.0, 4.0, 4.0, 16.0)];
        let comps = match_buildings(&coarse, &detailed, 0.3).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].match_t, MatchType::OneToMany);
        assert_eq!(comps[0].pairs.len(), 2);
    }

    #[test]
    fn unmatched_become_singletons() {
        let coarse = vec![rect("C", 2, 100.0, 100.0, 110.0, 110.0)];
        let detailed = vec![rect("d", 1, 0.0, 0.0, 10.0, 10.0)];
        let comps = match_buildings(&coarse, &detailed, 0.3).unwrap();
        let types: Vec<_> = comps.iter().map(|c| c.match_t).collect();
        assert_eq!(types.len(), 2);
        assert!(types.contains(&MatchType::OneToNone));
        assert!(types.contains(&MatchType::NoneToOne));
    }

    #[test]
    fn two_by_two_grid_is_many_to_many() {
        // coarse stripes run north-south, detailed stripes east-west
        let coarse = vec![rect("C1", 2, 0.0, 0.0, 10.0, 20.0), rect("C2", 2, 10.0, 0.0, 20.0, 20.0)];
        let detailed = vec![rect("d1", 1, 0.0, 0.0, 20.0, 10.0), rect("d2", 1, 0.0, 10.0, 20.0, 20.0)];
        let comps = match_buildings(&coarse, &detailed, 0.3).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].match_t, MatchType::ManyToMany);
        assert_eq!(comps[0].pairs.len(), 4);
    }

    #[test]
    fn aggregation_is_many_to_one_from_coarse_side() {
        let coarse = vec![rect("C1", 2, 0.0, 0.0, 10.0, 10.0), rect("C2", 2, 10.0, 0.0, 20.0, 10.0)];
        let detailed = vec![rect("d", 1, 0.0, 0.0, 20.0, 10.0)];
        let comps = match_buildings(&coarse, &detailed, 0.3).unwrap();
        assert_eq!(comps[0].match_t, MatchType::ManyToOne);
    }

    #[test]
    fn overrides_apply_before_components() {
        let coarse = vec![rect("C", 2, 0.0, 0.0, 10.0, 10.0)];
        let detailed = vec![rect("a", 1, 0.0, 0.0, 10.0, 10.0), rect("b", 1, 30.0, 0.0, 40.0, 10.0)];
        let add = MatchOverride { coarse_id: "C".into(), detailed_id: "b".into(), action: OverrideAction::Add };
        let comps = match_buildings_with_overrides(&coarse, &detailed, 0.3, &[add]).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].match_t, MatchType::OneToMany);
        let rm = MatchOverride { coarse_id: "C".into(), detailed_id: "a".into(), action: OverrideAction::Remove };
        let comps = match_buildings_with_overrides(&coarse, &detailed, 0.3, &[rm]).unwrap();
        assert_eq!(comps.len(), 3);
        let bad = MatchOverride { coarse_id: "X".into(), detailed_id: "a".into(), action: OverrideAction::Add };
        assert!(matches!(match_buildings_with_overrides(&coarse, &detailed, 0.3, &[bad]), Err(Error::NotFound(_))));
    }

    #[test]
    fn match_type_names_round_trip() {
        for m in MatchType::ALL {
            assert_eq!(m.as_str().parse::<MatchType>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
    }
}
