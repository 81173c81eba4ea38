//! Validated multi-LOD input: buildings per level, roads, match overrides.

use std::collections::{BTreeMap, HashMap};

use crate::crossscale::MatchOverride;
use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::proximity::RoadSet;

/// Buildings grouped by level of detail. A smaller LOD number is more
/// detailed; the chain runs from the most detailed level to the coarsest.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    levels: BTreeMap<u32, Vec<BuildingFootprint>>,
    roads: RoadSet,
    overrides: Vec<MatchOverride>,
    index: HashMap<String, (u32, usize)>,
}

impl Scene {
    pub fn new(buildings: Vec<BuildingFootprint>, roads: RoadSet, overrides: Vec<MatchOverride>) -> Result<Self> {
        let mut levels: BTreeMap<u32, Vec<BuildingFootprint>> = BTreeMap::new();
        for b in buildings {
            levels.entry(b.lod).or_default().push(b);
        }
        let mut index = HashMap::new();
        for (lod, list) in &mut levels {
            list.sort_by(|a, b| a.id.cmp(&b.id));
            for (k, b) in list.iter().enumerate() {
                if index.insert(b.id.clone(), (*lod, k)).is_some() {
                    return Err(Error::Validation(format!("duplicate building id {}", b.id)));
                }
            }
        }
        let scene = Self { levels, roads, overrides, index };
        scene.check_overrides()?;
        Ok(scene)
    }

    fn check_overrides(&self) -> Result<()> {
        for o in &self.overrides {
            let lod_of = |id: &str| {
                self.index
                    .get(id)
                    .map(|x| x.0)
                    .ok_or_else(|| Error::Validation(format!("match override names unknown building {id}")))
            };
            let (c, d) = (lod_of(&o.coarse_id)?, lod_of(&o.detailed_id)?);
            if self.coarser_than(d) != Some(c) {
                return Err(Error::Validation(format!(
                    "match override {} -> {} does not link adjacent levels (lod {c} -> lod {d})",
                    o.coarse_id, o.detailed_id
                )));
            }
        }
        Ok(())
    }

    /// Level numbers from most detailed to coarsest.
    pub fn lods(&self) -> Vec<u32> {
        self.levels.keys().copied().collect()
    }

    /// Adjacent `(detailed, coarse)` level pairs.
    pub fn lod_pairs(&self) -> Vec<(u32, u32)> {
        let l = self.lods();
        l.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn coarser_than(&self, lod: u32) -> Option<u32> {
        self.levels.range(lod + 1..).next().map(|(k, _)| *k)
    }

    /// Buildings of one level, sorted by id. Empty for unknown levels.
    pub fn level(&self, lod: u32) -> &[BuildingFootprint] {
        self.levels.get(&lod).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn buildings(&self) -> impl Iterator<Item = &BuildingFootprint> {
        self.levels.values().flatten()
    }

    pub fn building_count(&self) -> usize {
        self.index.len()
    }

    pub fn building(&self, id: &str) -> Option<&BuildingFootprint> {
        self.index.get(id).map(|&(lod, k)| &self.levels[&lod][k])
    }

    pub fn roads(&self) -> &RoadSet {
        &self.roads
    }

    /// Overrides whose coarse building sits at `coarse` and detailed at `detailed`.
    pub fn overrides_for(&self, detailed: u32, coarse: u32) -> Vec<MatchOverride> {
        self.overrides
            .iter()
            .filter(|o| {
                self.index.get(&o.coarse_id).map(|x| x.0) == Some(coarse)
                    && self.index.get(&o.detailed_id).map(|x| x.0) == Some(detailed)
            })
            .cloned()
            .collect()
    }

    pub fn overrides(&self) -> &[MatchOverride] {
        &self.overrides
    }
}
