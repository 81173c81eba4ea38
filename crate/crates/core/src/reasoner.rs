//! Rule pipeline over the property graph.
//!
//! Graph construction materializes proximity, interval and matching
//! relations. Reasoning then derives pairwise predicates (step 1),
//! structural relations (step 2), recognizes C-shaped arrangements (step 3)
//! and propagates patterns across levels of detail until nothing changes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crossscale::{match_buildings_with_overrides, MatchComponent, MatchType};
use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::kgraph::{
    props, Cmp, Direction, EntityId, Label, Pattern, PropPredicate, PropValue, PropertyGraph, Props, RelType, AREA,
    BID, FACE_R, GID, INTER_T, MATCH_T, ORI, SCALE, SHAPE_T,
};
use crate::proximity::{build_proximity_graph, ProximityGraph, ProximityOptions};
use crate::relations::{
    full_para, full_para_interval, interval_relation, para_o, part_per, part_per_interval, per_o, sim_a, Thresholds,
};
use crate::scene::Scene;

pub const PROVENANCE: &str = "Provenance";
pub const SOURCE: &str = "Source";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// C-shaped building supplied as an input label.
    Labeled,
    Direct,
    BottomUp,
    UpBottom,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Labeled => "labeled",
            Provenance::Direct => "direct",
            Provenance::BottomUp => "bottom_up",
            Provenance::UpBottom => "up_bottom",
        }
    }

    pub fn is_enriched(self) -> bool {
        matches!(self, Provenance::BottomUp | Provenance::UpBottom)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Provenance::Labeled, Provenance::Direct, Provenance::BottomUp, Provenance::UpBottom]
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown provenance {s:?}")))
    }
}

/// A recognized pattern: a group of buildings, or a single C-shaped building.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternGroup {
    pub group_vid: EntityId,
    pub lod: u32,
    /// Building ids, sorted.
    pub members: Vec<String>,
    pub provenance: Provenance,
    /// `lod:key` of the entity this group was propagated from.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<String>,
}

impl PatternGroup {
    pub fn member_set(&self) -> (u32, Vec<String>) {
        (self.lod, self.members.clone())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaMode {
    /// Store proximity and interval relations, derive the rest by rules.
    #[default]
    ThreeStep,
    /// Store fully-parallel and partly-perpendicular relations directly.
    Precomputed,
}

impl FromStr for SchemaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three-step" => Ok(SchemaMode::ThreeStep),
            "precomputed" => Ok(SchemaMode::Precomputed),
            _ => Err(Error::InvalidArgument(format!("unknown schema {s:?}, expected three-step or precomputed"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasonerConfig {
    pub thresholds: Thresholds,
    pub proximity: ProximityOptions,
    pub schema: SchemaMode,
    pub enrich: bool,
    /// Enrichment passes; `None` runs to the fixpoint.
    pub passes: Option<usize>,
    /// Re-check enriched three-member groups against the geometry.
    pub verify: bool,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            proximity: ProximityOptions::default(),
            schema: SchemaMode::ThreeStep,
            enrich: true,
            passes: None,
            verify: false,
        }
    }
}

/// Graph plus the intermediate structures it was built from.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub graph: PropertyGraph,
    pub lods: Vec<u32>,
    pub schema: SchemaMode,
    pub proximity: BTreeMap<u32, ProximityGraph>,
    /// Components per `(detailed, coarse)` level pair.
    pub matches: BTreeMap<(u32, u32), Vec<MatchComponent>>,
}

impl KnowledgeBase {
    /// Wraps a graph read back from a snapshot. Proximity graphs and match
    /// components are not part of snapshots, so geometric verification is
    /// unavailable on such a base.
    pub fn from_graph(graph: PropertyGraph, schema: SchemaMode) -> Self {
        let lods: BTreeSet<u32> =
            graph.entities().iter().filter(|e| e.label == Label::SingleB).map(|e| e.scale() as u32).collect();
        Self { graph, lods: lods.into_iter().collect(), schema, proximity: BTreeMap::new(), matches: BTreeMap::new() }
    }
}

fn building_entity(g: &PropertyGraph, lod: u32, id: &str) -> EntityId {
    g.find_entity(Label::SingleB, lod.into(), id).expect("building entity inserted before its relations")
}

/// Builds the knowledge graph of a scene. Not part of timed reasoning.
pub fn build_graph(scene: &Scene, config: &ReasonerConfig) -> Result<KnowledgeBase> {
    config.thresholds.validate()?;
    let th = &config.thresholds;
    let mut g = PropertyGraph::new();
    let lods = scene.lods();
    for &lod in &lods {
        for b in scene.level(lod) {
            let mut p = props([
                (SCALE, lod.into()),
                (BID, b.id.as_str().into()),
                (AREA, b.area.into()),
                (ORI, b.sbr.orientation_deg.into()),
                (SHAPE_T, b.shape_c.into()),
            ]);
            if b.shape_c {
                p.insert(PROVENANCE.into(), Provenance::Labeled.as_str().into());
            }
            g.upsert_entity(Label::SingleB, p)?;
        }
    }

    let mut proximity = BTreeMap::new();
    for &lod in &lods {
        let level = scene.level(lod);
        let pg = build_proximity_graph(level, scene.roads(), &config.proximity)?;
        for (a, b) in pg.edges() {
            let (va, vb) = (building_entity(&g, lod, a), building_entity(&g, lod, b));
            g.upsert_relation(RelType::HasProxi, va, vb, Props::new())?;
            let (fa, fb) = (scene.building(a).unwrap(), scene.building(b).unwrap());
            for (r, t, vr, vt) in [(fa, fb, va, vb), (fb, fa, vb, va)] {
                match config.schema {
                    SchemaMode::ThreeStep => {
                        if let Some(rel) = interval_relation(r, t, th) {
                            let p = props([(INTER_T, rel.inter_t.into()), (FACE_R, rel.face_r.into())]);
                            g.upsert_relation(RelType::HasInter, vr, vt, p)?;
                        }
                    }
                    SchemaMode::Precomputed => {
                        if let Some(rel) = interval_relation(r, t, th) {
                            if full_para(r, t, &rel, th) {
                                g.upsert_relation(RelType::FullPara, vr, vt, Props::new())?;
                            }
                            if part_per(r, t, &rel, th) {
                                g.upsert_relation(RelType::PartPer, vr, vt, Props::new())?;
                            }
                        }
                    }
                }
            }
        }
        proximity.insert(lod, pg);
    }

    let mut matches = BTreeMap::new();
    for (d, c) in scene.lod_pairs() {
        let comps =
            match_buildings_with_overrides(scene.level(c), scene.level(d), th.overlap_min, &scene.overrides_for(d, c))?;
        for comp in &comps {
            for (cid, did) in &comp.pairs {
                let (vc, vd) = (building_entity(&g, c, cid), building_entity(&g, d, did));
                g.upsert_relation(RelType::HasMatch, vc, vd, props([(MATCH_T, comp.match_t.as_str().into())]))?;
            }
        }
        matches.insert((d, c), comps);
    }
    Ok(KnowledgeBase { graph: g, lods, schema: config.schema, proximity, matches })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairwiseCounts {
    pub sim_a: usize,
    pub para_o: usize,
    pub per_o: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StructuralCounts {
    pub full_para: usize,
    pub part_per: usize,
}

fn area_ori(g: &PropertyGraph, v: EntityId) -> (f64, f64) {
    let e = &g.entities()[v.0 as usize];
    (e.f64_prop(AREA).expect("building entity has Area"), e.f64_prop(ORI).expect("building entity has Ori"))
}

/// Step 1: size and orientation predicates on every proximate pair.
pub fn derive_pairwise(g: &mut PropertyGraph, th: &Thresholds) -> Result<PairwiseCounts> {
    let pairs: Vec<(EntityId, EntityId)> =
        g.relations().iter().filter(|r| r.rtype == RelType::HasProxi).map(|r| (r.from, r.to)).collect();
    let mut counts = PairwiseCounts::default();
    g.reserve_relations(2 * pairs.len());
    for (a, b) in pairs {
        let ((area_a, ori_a), (area_b, ori_b)) = (area_ori(g, a), area_ori(g, b));
        if sim_a(area_a, area_b, th.delta2) && g.upsert_relation(RelType::SimA, a, b, Props::new())?.1 {
            counts.sim_a += 1;
        }
        if para_o(ori_a, ori_b, th.delta3) && g.upsert_relation(RelType::ParaO, a, b, Props::new())?.1 {
            counts.para_o += 1;
        }
        if per_o(ori_a, ori_b, th.delta3) && g.upsert_relation(RelType::PerO, a, b, Props::new())?.1 {
            counts.per_o += 1;
        }
    }
    Ok(counts)
}

/// Step 2: fully-parallel and partly-perpendicular relations, directed as
/// the interval relation they come from.
pub fn derive_structural(g: &mut PropertyGraph, th: &Thresholds) -> Result<StructuralCounts> {
    let mut full = Vec::new();
    let mut per = Vec::new();
    for r in g.relations().iter().filter(|r| r.rtype == RelType::HasInter) {
        let code = r.props[INTER_T].as_i64().expect("Inter_T validated") as u8;
        let face = r.props[FACE_R].as_f64().expect("Face_R validated");
        if full_para_interval(code, face, th.delta1)
            && g.has_relation(RelType::SimA, r.from, r.to)
            && g.has_relation(RelType::ParaO, r.from, r.to)
        {
            full.push((r.from, r.to));
        }
        if part_per_interval(code) && g.has_relation(RelType::PerO, r.from, r.to) {
            per.push((r.from, r.to));
        }
    }
    let mut counts = StructuralCounts::default();
    g.reserve_relations(full.len() + per.len());
    for (a, b) in full {
        counts.full_para += usize::from(g.upsert_relation(RelType::FullPara, a, b, Props::new())?.1);
    }
    for (a, b) in per {
        counts.part_per += usize::from(g.upsert_relation(RelType::PartPer, a, b, Props::new())?.1);
    }
    Ok(counts)
}

/// Template of a C-shaped arrangement at one level: middle (node 0) and
/// two wings (nodes 1, 2).
pub fn c_pattern_template(lod: u32) -> Pattern {
    let at = |lod: u32| vec![PropPredicate::new(SCALE, Cmp::Eq(lod.into()))];
    Pattern::default()
        .node(Some(Label::SingleB), at(lod))
        .node(Some(Label::SingleB), vec![])
        .node(Some(Label::SingleB), vec![])
        .edge(0, RelType::PartPer, 1)
        .edge(0, RelType::PartPer, 2)
        .edge(1, RelType::FullPara, 2)
        .edge(0, RelType::HasProxi, 1)
        .edge(0, RelType::HasProxi, 2)
        .edge(1, RelType::HasProxi, 2)
}

fn group_key(members: &[String]) -> String {
    serde_json::to_string(members).expect("string list serializes")
}

fn source_ref(g: &PropertyGraph, v: EntityId) -> String {
    let e = &g.entities()[v.0 as usize];
    format!("{}:{}", e.scale(), e.key())
}

/// Creates a ShapeT group unless one with the same members exists.
fn create_group(
    g: &mut PropertyGraph,
    lod: u32,
    members: &[EntityId],
    provenance: Provenance,
    source: Option<String>,
) -> Result<Option<PatternGroup>> {
    let mut ids: Vec<String> = members.iter().map(|&m| g.entities()[m.0 as usize].key().to_owned()).collect();
    ids.sort();
    ids.dedup();
    let key = group_key(&ids);
    if g.find_entity(Label::GroupB, lod.into(), &key).is_some() {
        return Ok(None);
    }
    let mut p = props([
        (SCALE, lod.into()),
        (GID, key.into()),
        (SHAPE_T, true.into()),
        (PROVENANCE, provenance.as_str().into()),
    ]);
    if let Some(s) = &source {
        p.insert(SOURCE.into(), s.as_str().into());
    }
    let (gv, _) = g.upsert_entity(Label::GroupB, p)?;
    for &m in members {
        g.upsert_relation(RelType::BelongTo, m, gv, Props::new())?;
    }
    Ok(Some(PatternGroup { group_vid: gv, lod, members: ids, provenance, source }))
}

/// Marks a single building as C-shaped; returns the singleton pattern when
/// the flag was newly set.
fn mark_single(
    g: &mut PropertyGraph,
    v: EntityId,
    provenance: Provenance,
    source: String,
) -> Result<Option<PatternGroup>> {
    if g.entities()[v.0 as usize].shape_t() {
        return Ok(None);
    }
    g.set_entity_prop(v, SHAPE_T, true.into())?;
    g.set_entity_prop(v, PROVENANCE, provenance.as_str().into())?;
    g.set_entity_prop(v, SOURCE, source.as_str().into())?;
    let e = &g.entities()[v.0 as usize];
    Ok(Some(PatternGroup {
        group_vid: v,
        lod: e.scale() as u32,
        members: vec![e.key().to_owned()],
        provenance,
        source: Some(source),
    }))
}

/// Step 3: C-shaped arrangements at one level, as new direct groups.
pub fn recognize_c_patterns(g: &mut PropertyGraph, lod: u32) -> Result<Vec<PatternGroup>> {
    let bindings = g.match_pattern(&c_pattern_template(lod))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for b in bindings {
        let mut set = b.clone();
        set.sort_unstable();
        if !seen.insert(set) {
            continue;
        }
        if let Some(grp) = create_group(g, lod, &b, Provenance::Direct, None)? {
            out.push(grp);
        }
    }
    out.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(out)
}

/// Geometric re-check of a candidate three-building arrangement.
#[derive(Debug, Clone, Copy)]
pub struct Verifier<'a> {
    pub scene: &'a Scene,
    pub proximity: &'a BTreeMap<u32, ProximityGraph>,
    pub thresholds: &'a Thresholds,
}

impl Verifier<'_> {
    fn accepts(&self, lod: u32, members: &[String]) -> bool {
        if members.len() != 3 {
            return true;
        }
        let Some(pg) = self.proximity.get(&lod) else { return false };
        let fps: Option<Vec<&BuildingFootprint>> = members.iter().map(|m| self.scene.building(m)).collect();
        let Some(fps) = fps else { return false };
        (0..3).any(|m| {
            let (w1, w2) = ((m + 1) % 3, (m + 2) % 3);
            c_pattern_holds(fps[m], fps[w1], fps[w2], &|a, b| pg.contains(a, b), self.thresholds)
        })
    }
}

fn qualifying_match(g: &PropertyGraph, r: crate::kgraph::RelationId) -> bool {
    let rel = g.relation(r);
    rel.props
        .get(MATCH_T)
        .and_then(PropValue::as_str)
        .and_then(|s| s.parse::<MatchType>().ok())
        .is_some_and(MatchType::coarse_is_one)
}

fn group_members(g: &PropertyGraph, v: EntityId) -> Vec<EntityId> {
    let e = &g.entities()[v.0 as usize];
    match e.label {
        Label::GroupB => g.in_ids(v, RelType::BelongTo).iter().map(|r| g.relation(*r).from).collect(),
        Label::SingleB => vec![v],
    }
}

fn shape_entities(g: &PropertyGraph, lod: u32, labels: &[Label]) -> Vec<EntityId> {
    g.entities()
        .iter()
        .filter(|e| labels.contains(&e.label) && e.scale() == i64::from(lod) && e.shape_t())
        .map(|e| e.id)
        .collect()
}

/// Propagates groups at detailed level `s_b` to coarse level `s_u`.
pub fn enrich_bottom_up(
    g: &mut PropertyGraph,
    s_b: u32,
    s_u: u32,
    verifier: Option<&Verifier<'_>>,
) -> Result<Vec<PatternGroup>> {
    let mut out = Vec::new();
    for grp in shape_entities(g, s_b, &[Label::GroupB]) {
        let members = group_members(g, grp);
        let mut bs = BTreeSet::new();
        let mut covered = true;
        for m in &members {
            let coarse: Vec<EntityId> = g
                .in_ids(*m, RelType::HasMatch)
                .iter()
                .filter(|r| qualifying_match(g, **r))
                .map(|r| g.relation(*r).from)
                .filter(|c| g.entities()[c.0 as usize].scale() == i64::from(s_u))
                .collect();
            if coarse.is_empty() {
                covered = false;
                break;
            }
            bs.extend(coarse);
        }
        if !covered || bs.is_empty() {
            continue;
        }
        let bs: Vec<EntityId> = bs.into_iter().collect();
        let source = source_ref(g, grp);
        let created = if bs.len() == 1 {
            mark_single(g, bs[0], Provenance::BottomUp, source)?
        } else {
            let ids = sorted_keys(g, &bs);
            if verifier.is_some_and(|v| !v.accepts(s_u, &ids)) {
                continue;
            }
            create_group(g, s_u, &bs, Provenance::BottomUp, Some(source))?
        };
        out.extend(created);
    }
    Ok(out)
}

fn sorted_keys(g: &PropertyGraph, vs: &[EntityId]) -> Vec<String> {
    let mut ids: Vec<String> = vs.iter().map(|v| g.entities()[v.0 as usize].key().to_owned()).collect();
    ids.sort();
    ids
}

/// Propagates C-shaped entities at coarse level `s_u` to detailed level `s_b`.
pub fn enrich_up_bottom(
    g: &mut PropertyGraph,
    s_u: u32,
    s_b: u32,
    verifier: Option<&Verifier<'_>>,
) -> Result<Vec<PatternGroup>> {
    let mut out = Vec::new();
    for ent in shape_entities(g, s_u, &[Label::GroupB, Label::SingleB]) {
        let mut bs = BTreeSet::new();
        for m in group_members(g, ent) {
            bs.extend(
                g.out_ids(m, RelType::HasMatch)
                    .iter()
                    .filter(|r| qualifying_match(g, **r))
                    .map(|r| g.relation(*r).to)
                    .filter(|d| g.entities()[d.0 as usize].scale() == i64::from(s_b)),
            );
        }
        let bs: Vec<EntityId> = bs.into_iter().collect();
        let source = source_ref(g, ent);
        let created = match bs.len() {
            0 => None,
            1 => mark_single(g, bs[0], Provenance::UpBottom, source)?,
            _ => {
                let ids = sorted_keys(g, &bs);
                if verifier.is_some_and(|v| !v.accepts(s_b, &ids)) {
                    continue;
                }
                create_group(g, s_b, &bs, Provenance::UpBottom, Some(source))?
            }
        };
        out.extend(created);
    }
    Ok(out)
}

/// Alternates bottom-up and up-bottom enrichment over adjacent levels until
/// no new pattern appears, or for at most `passes` rounds.
pub fn enrich_fixpoint(
    g: &mut PropertyGraph,
    lods: &[u32],
    passes: Option<usize>,
    verifier: Option<&Verifier<'_>>,
) -> Result<Vec<PatternGroup>> {
    let mut all = Vec::new();
    let mut round = 0;
    loop {
        if passes.is_some_and(|p| round >= p) {
            break;
        }
        round += 1;
        let before = all.len();
        for w in lods.windows(2) {
            all.extend(enrich_bottom_up(g, w[0], w[1], verifier)?);
        }
        for w in lods.windows(2).rev() {
            all.extend(enrich_up_bottom(g, w[1], w[0], verifier)?);
        }
        if all.len() == before {
            break;
        }
    }
    Ok(all)
}

/// Steps 1 to 3 at every level. Returns the direct groups.
pub fn run_rules(kb: &mut KnowledgeBase, th: &Thresholds) -> Result<Vec<PatternGroup>> {
    if kb.schema == SchemaMode::ThreeStep {
        derive_pairwise(&mut kb.graph, th)?;
        derive_structural(&mut kb.graph, th)?;
    }
    let mut direct = Vec::new();
    for &lod in &kb.lods {
        direct.extend(recognize_c_patterns(&mut kb.graph, lod)?);
    }
    Ok(direct)
}

/// Full reasoning: rules, then enrichment when enabled. Returns every
/// pattern held by the graph afterwards.
pub fn reason(kb: &mut KnowledgeBase, scene: &Scene, config: &ReasonerConfig) -> Result<Vec<PatternGroup>> {
    run_rules(kb, &config.thresholds)?;
    if config.enrich {
        let proximity = kb.proximity.clone();
        let verifier = Verifier { scene, proximity: &proximity, thresholds: &config.thresholds };
        let lods = kb.lods.clone();
        enrich_fixpoint(&mut kb.graph, &lods, config.passes, config.verify.then_some(&verifier))?;
    }
    Ok(collect_groups(&kb.graph))
}

/// Builds the graph and reasons over it in one call.
pub fn recognize_scene(scene: &Scene, config: &ReasonerConfig) -> Result<(KnowledgeBase, Vec<PatternGroup>)> {
    let mut kb = build_graph(scene, config)?;
    let groups = reason(&mut kb, scene, config)?;
    Ok((kb, groups))
}

/// Every C-shaped group and single building in the graph, sorted by level
/// and members.
pub fn collect_groups(g: &PropertyGraph) -> Vec<PatternGroup> {
    let mut out = Vec::new();
    for e in g.entities() {
        if !e.shape_t() {
            continue;
        }
        let provenance =
            e.get(PROVENANCE).and_then(PropValue::as_str).and_then(|s| s.parse().ok()).unwrap_or(Provenance::Labeled);
        let source = e.get(SOURCE).and_then(PropValue::as_str).map(str::to_owned);
        let members = match e.label {
            Label::SingleB => vec![e.key().to_owned()],
            Label::GroupB => sorted_keys(g, &group_members(g, e.id)),
        };
        out.push(PatternGroup { group_vid: e.id, lod: e.scale() as u32, members, provenance, source });
    }
    out.sort_by(|a, b| (a.lod, &a.members).cmp(&(b.lod, &b.members)));
    out
}

/// The C-pattern condition on three footprints with roles fixed: `m` is
/// the middle building. `proximate` answers the proximity test by id.
pub fn c_pattern_holds(
    m: &BuildingFootprint,
    w1: &BuildingFootprint,
    w2: &BuildingFootprint,
    proximate: &dyn Fn(&str, &str) -> bool,
    th: &Thresholds,
) -> bool {
    if !(proximate(&m.id, &w1.id) && proximate(&m.id, &w2.id) && proximate(&w1.id, &w2.id)) {
        return false;
    }
    let pp = |a: &BuildingFootprint, b: &BuildingFootprint| {
        interval_relation(a, b, th).is_some_and(|r| part_per(a, b, &r, th))
    };
    let fp = |a: &BuildingFootprint, b: &BuildingFootprint| {
        interval_relation(a, b, th).is_some_and(|r| full_para(a, b, &r, th))
    };
    pp(m, w1) && pp(m, w2) && (fp(w1, w2) || fp(w2, w1))
}

/// Recognition straight from footprints and the proximity graph, with
/// every predicate recomputed per candidate triple.
pub fn baseline_recognize(
    buildings: &[BuildingFootprint],
    proximity: &ProximityGraph,
    th: &Thresholds,
) -> Vec<PatternGroup> {
    let by_id: BTreeMap<&str, &BuildingFootprint> = buildings.iter().map(|b| (b.id.as_str(), b)).collect();
    let adj = proximity.adjacency();
    let proximate = |a: &str, b: &str| proximity.contains(a, b);
    let mut found: BTreeSet<Vec<String>> = BTreeSet::new();
    // connected triples: two neighbours of a centre building
    for (&centre, nbrs) in &adj {
        for (k, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[k + 1..] {
                let mut trio = [centre, x, y];
                trio.sort_unstable();
                let fps = trio.map(|id| by_id[id]);
                let hit = (0..3).any(|m| c_pattern_holds(fps[m], fps[(m + 1) % 3], fps[(m + 2) % 3], &proximate, th));
                if hit {
                    found.insert(trio.iter().map(|s| s.to_string()).collect());
                }
            }
        }
    }
    let lod = buildings.first().map_or(0, |b| b.lod);
    found
        .into_iter()
        .map(|members| PatternGroup {
            group_vid: EntityId(u32::MAX),
            lod,
            members,
            provenance: Provenance::Direct,
            source: None,
        })
        .collect()
}

/// Neighbour ids of a building entity through one relation type.
pub fn neighbours_by_key(g: &PropertyGraph, v: EntityId, t: RelType) -> Vec<String> {
    let mut ids: Vec<String> =
        g.neighbor_ids(v, t, Direction::Both).map(|n| g.entities()[n.0 as usize].key().to_owned()).collect();
    ids.sort();
    ids
}
