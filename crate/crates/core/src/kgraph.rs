//! Embedded property graph holding buildings, groups and their relations.
//!
//! Entities carry exactly one label and a property map; relations are typed
//! and indexed per entity, per type and per direction. Symmetric relation
//! types are stored once with ordered endpoints and traversed both ways.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crossscale::MatchType;
use crate::error::{Error, Result};

pub const SCALE: &str = "Scale";
pub const AREA: &str = "Area";
pub const ORI: &str = "Ori";
pub const SHAPE_T: &str = "ShapeT";
/// Building id of a single building.
pub const BID: &str = "bID";
/// Canonical member list of a group.
pub const GID: &str = "gID";
pub const INTER_T: &str = "Inter_T";
pub const FACE_R: &str = "Face_R";
pub const MATCH_T: &str = "Match_T";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    SingleB,
    GroupB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelType {
    #[serde(rename = "Has_Proxi")]
    HasProxi,
    #[serde(rename = "Has_Inter")]
    HasInter,
    #[serde(rename = "Has_Match")]
    HasMatch,
    #[serde(rename = "Belong_To")]
    BelongTo,
    SimA,
    ParaO,
    PerO,
    #[serde(rename = "Full_Para")]
    FullPara,
    #[serde(rename = "Part_Per")]
    PartPer,
}

const N_TYPES: usize = 9;

impl RelType {
    pub const ALL: [RelType; N_TYPES] = [
        RelType::HasProxi,
        RelType::HasInter,
        RelType::HasMatch,
        RelType::BelongTo,
        RelType::SimA,
        RelType::ParaO,
        RelType::PerO,
        RelType::FullPara,
        RelType::PartPer,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, RelType::HasProxi | RelType::SimA | RelType::ParaO | RelType::PerO)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelType::HasProxi => "Has_Proxi",
            RelType::HasInter => "Has_Inter",
            RelType::HasMatch => "Has_Match",
            RelType::BelongTo => "Belong_To",
            RelType::SimA => "SimA",
            RelType::ParaO => "ParaO",
            RelType::PerO => "PerO",
            RelType::FullPara => "Full_Para",
            RelType::PartPer => "Part_Per",
        }
    }
}

impl fmt::Display for RelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Schema(format!("unknown relation type {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl PropValue {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            PropValue::Int(i) => Some(i as f64),
            PropValue::Float(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            PropValue::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            PropValue::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropValue::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Equality with integers and floats compared numerically.
    pub fn loosely_eq(&self, other: &PropValue) -> bool {
        match (self.as_f64(), other.as_f64()) {
            (Some(a), Some(b)) => a == b,
            _ => self == other,
        }
    }
}

impl From<bool> for PropValue {
    fn from(v: bool) -> Self {
        PropValue::Bool(v)
    }
}
impl From<i64> for PropValue {
    fn from(v: i64) -> Self {
        PropValue::Int(v)
    }
}
impl From<u32> for PropValue {
    fn from(v: u32) -> Self {
        PropValue::Int(v.into())
    }
}
impl From<u8> for PropValue {
    fn from(v: u8) -> Self {
        PropValue::Int(v.into())
    }
}
impl From<f64> for PropValue {
    fn from(v: f64) -> Self {
        PropValue::Float(v)
    }
}
impl From<&str> for PropValue {
    fn from(v: &str) -> Self {
        PropValue::Str(v.to_owned())
    }
}
impl From<String> for PropValue {
    fn from(v: String) -> Self {
        PropValue::Str(v)
    }
}

pub type Props = BTreeMap<String, PropValue>;

/// Builds a property map from `(key, value)` pairs.
pub fn props<const N: usize>(items: [(&str, PropValue); N]) -> Props {
    items.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: EntityId,
    pub label: Label,
    pub props: Props,
}

impl Entity {
    pub fn get(&self, key: &str) -> Option<&PropValue> {
        self.props.get(key)
    }

    pub fn scale(&self) -> i64 {
        self.props[SCALE].as_i64().expect("Scale is validated on insert")
    }

    /// Natural key (`bID` or `gID`).
    pub fn key(&self) -> &str {
        let k = if self.label == Label::SingleB { BID } else { GID };
        self.props[k].as_str().expect("natural key is validated on insert")
    }

    pub fn shape_t(&self) -> bool {
        self.get(SHAPE_T).and_then(PropValue::as_bool).unwrap_or(false)
    }

    pub fn f64_prop(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(PropValue::as_f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub id: RelationId,
    pub rtype: RelType,
    pub from: EntityId,
    pub to: EntityId,
    pub props: Props,
}

impl Relation {
    pub fn other(&self, v: EntityId) -> EntityId {
        if self.from == v {
            self.to
        } else {
            self.from
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Adjacency {
    out: [Vec<RelationId>; N_TYPES],
    inc: [Vec<RelationId>; N_TYPES],
}

#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    entities: Vec<Entity>,
    relations: Vec<Relation>,
    adj: Vec<Adjacency>,
    entity_keys: HashMap<(Label, i64, String), EntityId>,
    relation_keys: HashMap<(RelType, EntityId, EntityId), RelationId>,
    type_counts: [usize; N_TYPES],
}

fn check_finite(props: &Props) -> Result<()> {
    for (k, v) in props {
        if let PropValue::Float(f) = v {
            if !f.is_finite() {
                return Err(Error::Schema(format!("property {k} is not finite")));
            }
        }
    }
    Ok(())
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn count_of(&self, t: RelType) -> usize {
        self.type_counts[t.index()]
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.entities.iter().filter(|e| e.label == label).count()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn entity(&self, v: EntityId) -> Result<&Entity> {
        self.entities.get(v.0 as usize).ok_or_else(|| Error::NotFound(format!("entity {v}")))
    }

    pub fn relation(&self, e: RelationId) -> &Relation {
        &self.relations[e.0 as usize]
    }

    pub fn find_entity(&self, label: Label, scale: i64, key: &str) -> Option<EntityId> {
        self.entity_keys.get(&(label, scale, key.to_owned())).copied()
    }

    fn validate_entity_props(label: Label, props: &Props) -> Result<()> {
        check_finite(props)?;
        let allowed_single_only = [AREA, ORI, BID];
        if label == Label::GroupB {
            if let Some(k) = allowed_single_only.iter().find(|k| props.contains_key(**k)) {
                return Err(Error::Schema(format!("property {k} is only valid on SingleB")));
            }
        } else if props.contains_key(GID) {
            return Err(Error::Schema(format!("property {GID} is only valid on GroupB")));
        }
        if let Some(v) = props.get(SHAPE_T) {
            if v.as_bool().is_none() {
                return Err(Error::Schema(format!("{SHAPE_T} must be boolean")));
            }
        }
        for k in [AREA, ORI] {
            if let Some(v) = props.get(k) {
                if v.as_f64().is_none() {
                    return Err(Error::Schema(format!("{k} must be numeric")));
                }
            }
        }
        Ok(())
    }

    /// Inserts or merges an entity identified by label, `Scale` and natural
    /// key. Returns the id and whether the entity is new.
    pub fn upsert_entity(&mut self, label: Label, props: Props) -> Result<(EntityId, bool)> {
        Self::validate_entity_props(label, &props)?;
        let scale = props
            .get(SCALE)
            .and_then(PropValue::as_i64)
            .ok_or_else(|| Error::Schema(format!("entity requires integer {SCALE}")))?;
        let key_name = if label == Label::SingleB { BID } else { GID };
        let key = props
            .get(key_name)
            .and_then(PropValue::as_str)
            .ok_or_else(|| Error::Schema(format!("{label:?} requires string {key_name}")))?
            .to_owned();
        if let Some(&id) = self.entity_keys.get(&(label, scale, key.clone())) {
            self.entities[id.0 as usize].props.extend(props);
            return Ok((id, false));
        }
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(Entity { id, label, props });
        self.adj.push(Adjacency::default());
        self.entity_keys.insert((label, scale, key), id);
        Ok((id, true))
    }

    /// Sets one property; returns true when the stored value changed.
    pub fn set_entity_prop(&mut self, v: EntityId, key: &str, value: PropValue) -> Result<bool> {
        if key == SCALE || key == BID || key == GID {
            return Err(Error::Schema(format!("{key} is part of the entity key")));
        }
        let label = self.entity(v)?.label;
        let one: Props = [(key.to_owned(), value)].into_iter().collect();
        Self::validate_entity_props(label, &one)?;
        let (k, value) = one.into_iter().next().unwrap();
        let e = &mut self.entities[v.0 as usize];
        if e.props.get(&k) == Some(&value) {
            return Ok(false);
        }
        e.props.insert(k, value);
        Ok(true)
    }

    fn validate_relation(&self, t: RelType, from: EntityId, to: EntityId, props: &Props) -> Result<()> {
        let a = self.entity(from)?;
        let b = self.entity(to)?;
        if from == to {
            return Err(Error::Schema(format!("{t} self-relation on {from}")));
        }
        check_finite(props)?;
        match t {
            RelType::BelongTo => {
                if a.label != Label::SingleB || b.label != Label::GroupB {
                    return Err(Error::Schema(format!("{t} must point SingleB -> GroupB, got {from} -> {to}")));
                }
            }
            _ => {
                if a.label != Label::SingleB || b.label != Label::SingleB {
                    return Err(Error::Schema(format!("{t} links SingleB entities only")));
                }
            }
        }
        for k in [INTER_T, FACE_R] {
            if props.contains_key(k) && t != RelType::HasInter {
                return Err(Error::Schema(format!("{k} is only valid on Has_Inter, not {t}")));
            }
        }
        if props.contains_key(MATCH_T) && t != RelType::HasMatch {
            return Err(Error::Schema(format!("{MATCH_T} is only valid on Has_Match, not {t}")));
        }
        if let Some(v) = props.get(INTER_T) {
            if !matches!(v.as_i64(), Some(1..=169)) {
                return Err(Error::Schema(format!("{INTER_T} must be an integer in 1..=169")));
            }
        }
        if let Some(v) = props.get(FACE_R) {
            if !matches!(v.as_f64(), Some(f) if (0.0..=1.0).contains(&f)) {
                return Err(Error::Schema(format!("{FACE_R} must lie in [0, 1]")));
            }
        }
        if let Some(v) = props.get(MATCH_T) {
            let s = v.as_str().ok_or_else(|| Error::Schema(format!("{MATCH_T} must be a string")))?;
            s.parse::<MatchType>().map_err(|_| Error::Schema(format!("unknown {MATCH_T} {s:?}")))?;
        }
        Ok(())
    }

    fn canonical(t: RelType, from: EntityId, to: EntityId) -> (EntityId, EntityId) {
        if t.is_symmetric() && to < from {
            (to, from)
        } else {
            (from, to)
        }
    }

    /// Inserts or merges a relation identified by `(type, from, to)`.
    /// Returns the id and whether the relation is new.
    pub fn upsert_relation(
        &mut self,
        t: RelType,
        from: EntityId,
        to: EntityId,
        props: Props,
    ) -> Result<(RelationId, bool)> {
        self.validate_relation(t, from, to, &props)?;
        let (from, to) = Self::canonical(t, from, to);
        if let Some(&id) = self.relation_keys.get(&(t, from, to)) {
            self.relations[id.0 as usize].props.extend(props);
            return Ok((id, false));
        }
        let id = RelationId(self.relations.len() as u32);
        self.relations.push(Relation { id, rtype: t, from, to, props });
        self.adj[from.0 as usize].out[t.index()].push(id);
        self.adj[to.0 as usize].inc[t.index()].push(id);
        self.relation_keys.insert((t, from, to), id);
        self.type_counts[t.index()] += 1;
        Ok((id, true))
    }

    /// Room for `additional` relations without rehashing.
    pub fn reserve_relations(&mut self, additional: usize) {
        self.relations.reserve(additional);
        self.relation_keys.reserve(additional);
    }

    /// Relation of type `t` from `from` to `to` (either way for symmetric types).
    pub fn find_relation(&self, t: RelType, from: EntityId, to: EntityId) -> Option<RelationId> {
        let (from, to) = Self::canonical(t, from, to);
        self.relation_keys.get(&(t, from, to)).copied()
    }

    pub fn has_relation(&self, t: RelType, from: EntityId, to: EntityId) -> bool {
        self.find_relation(t, from, to).is_some()
    }

    /// Raw index slices: outgoing and incoming relation ids of one type.
    pub fn out_ids(&self, v: EntityId, t: RelType) -> &[RelationId] {
        &self.adj[v.0 as usize].out[t.index()]
    }

    pub fn in_ids(&self, v: EntityId, t: RelType) -> &[RelationId] {
        &self.adj[v.0 as usize].inc[t.index()]
    }

    /// Ids of entities adjacent to `v` through `t`; symmetric types ignore `dir`.
    pub fn neighbor_ids(&self, v: EntityId, t: RelType, dir: Direction) -> impl Iterator<Item = EntityId> + '_ {
        let a = &self.adj[v.0 as usize];
        let dir = if t.is_symmetric() { Direction::Both } else { dir };
        let out: &[RelationId] = if dir == Direction::In { &[] } else { &a.out[t.index()] };
        let inc: &[RelationId] = if dir == Direction::Out { &[] } else { &a.inc[t.index()] };
        out.iter().map(|r| self.relations[r.0 as usize].to).chain(inc.iter().map(|r| self.relations[r.0 as usize].from))
    }

    pub fn neighbors(&self, v: EntityId, t: RelType, dir: Direction) -> Result<Vec<(&Relation, &Entity)>> {
        self.entity(v)?;
        let a = &self.adj[v.0 as usize];
        let dir = if t.is_symmetric() { Direction::Both } else { dir };
        let mut out = Vec::new();
        if dir != Direction::In {
            for r in &a.out[t.index()] {
                let rel = self.relation(*r);
                out.push((rel, &self.entities[rel.to.0 as usize]));
            }
        }
        if dir != Direction::Out {
            for r in &a.inc[t.index()] {
                let rel = self.relation(*r);
                out.push((rel, &self.entities[rel.from.0 as usize]));
            }
        }
        Ok(out)
    }

    /// Full scan checking that indexes and key maps agree with the stores.
    pub fn audit(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Consistency(m));
        if self.adj.len() != self.entities.len() {
            return fail("adjacency table size differs from entity count".into());
        }
        let mut counts = [0usize; N_TYPES];
        let mut seen = vec![0u8; self.relations.len()];
        for (vi, a) in self.adj.iter().enumerate() {
            for t in RelType::ALL {
                for r in &a.out[t.index()] {
                    let rel = self.relations.get(r.0 as usize);
                    if !matches!(rel, Some(rel) if rel.from.0 as usize == vi && rel.rtype == t) {
                        return fail(format!("out index of v{vi} lists foreign relation {}", r.0));
                    }
                    seen[r.0 as usize] |= 1;
                }
                for r in &a.inc[t.index()] {
                    let rel = self.relations.get(r.0 as usize);
                    if !matches!(rel, Some(rel) if rel.to.0 as usize == vi && rel.rtype == t) {
                        return fail(format!("in index of v{vi} lists foreign relation {}", r.0));
                    }
                    seen[r.0 as usize] |= 2;
                }
            }
        }
        for (k, rel) in self.relations.iter().enumerate() {
            if rel.id.0 as usize != k {
                return fail(format!("relation slot {k} holds id {}", rel.id.0));
            }
            if seen[k] != 3 {
                return fail(format!("relation {k} missing from an endpoint index"));
            }
            let n_out =
                self.adj[rel.from.0 as usize].out[rel.rtype.index()].iter().filter(|r| r.0 as usize == k).count();
            let n_in = self.adj[rel.to.0 as usize].inc[rel.rtype.index()].iter().filter(|r| r.0 as usize == k).count();
            if n_out != 1 || n_in != 1 {
                return fail(format!("relation {k} indexed {n_out}/{n_in} times"));
            }
            if self.relation_keys.get(&(rel.rtype, rel.from, rel.to)) != Some(&rel.id) {
                return fail(format!("relation {k} missing from key map"));
            }
            counts[rel.rtype.index()] += 1;
        }
        if counts != self.type_counts || self.relation_keys.len() != self.relations.len() {
            return fail("relation type counts disagree".into());
        }
        for (k, e) in self.entities.iter().enumerate() {
            if e.id.0 as usize != k || self.find_entity(e.label, e.scale(), e.key()) != Some(e.id) {
                return fail(format!("entity {k} missing from key map"));
            }
        }
        if self.entity_keys.len() != self.entities.len() {
            return fail("entity key map size differs".into());
        }
        Ok(())
    }

    /// Writes the graph as JSON lines: entities, then relations, in id order.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Io { path: "<snapshot>".into(), source: e };
        for e in &self.entities {
            let rec = EntityRecord { v: e.id, labels: vec![e.label], props: e.props.clone() };
            serde_json::to_writer(&mut w, &rec).map_err(|e| Error::Schema(e.to_string()))?;
            w.write_all(b"\n").map_err(io)?;
        }
        for r in &self.relations {
            let rec = RelationRecord { e: r.id, t: r.rtype, from: r.from, to: r.to, props: r.props.clone() };
            serde_json::to_writer(&mut w, &rec).map_err(|e| Error::Schema(e.to_string()))?;
            w.write_all(b"\n").map_err(io)?;
        }
        Ok(())
    }

    pub fn to_snapshot_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("serde_json emits utf-8")
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Self> {
        let parse = |line: usize, msg: String| Error::Parse { path: format!("<snapshot line {line}>").into(), msg };
        let mut g = PropertyGraph::new();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Io { path: "<snapshot>".into(), source: e })?;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| parse(n + 1, e.to_string()))?;
            if value.get("v").is_some() {
                let rec: EntityRecord = serde_json::from_value(value).map_err(|e| parse(n + 1, e.to_string()))?;
                let [label] = rec.labels[..] else {
                    return Err(parse(n + 1, "entity needs exactly one label".into()));
                };
                let (id, fresh) = g.upsert_entity(label, rec.props)?;
                if !fresh || id != rec.v {
                    return Err(parse(n + 1, format!("entity id {} out of sequence", rec.v.0)));
                }
            } else {
                let rec: RelationRecord = serde_json::from_value(value).map_err(|e| parse(n + 1, e.to_string()))?;
                let (id, fresh) = g.upsert_relation(rec.t, rec.from, rec.to, rec.props)?;
                if !fresh || id != rec.e {
                    return Err(parse(n + 1, format!("relation id {} out of sequence", rec.e.0)));
                }
            }
        }
        Ok(g)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityRecord {
    v: EntityId,
    labels: Vec<Label>,
    props: Props,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationRecord {
    e: RelationId,
    t: RelType,
    from: EntityId,
    to: EntityId,
    props: Props,
}

// ---------------------------------------------------------------------------
// pattern queries

#[derive(Debug, Clone, PartialEq)]
pub enum Cmp {
    Exists,
    Eq(PropValue),
    Ne(PropValue),
    In(Vec<PropValue>),
    Ge(f64),
    Le(f64),
    Gt(f64),
    Lt(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropPredicate {
    pub key: String,
    pub cmp: Cmp,
}

impl PropPredicate {
    pub fn new(key: &str, cmp: Cmp) -> Self {
        Self { key: key.to_owned(), cmp }
    }

    pub fn test(&self, props: &Props) -> bool {
        let v = props.get(&self.key);
        match (&self.cmp, v) {
            (Cmp::Exists, v) => v.is_some(),
            (_, None) => false,
            (Cmp::Eq(x), Some(v)) => v.loosely_eq(x),
            (Cmp::Ne(x), Some(v)) => !v.loosely_eq(x),
            (Cmp::In(xs), Some(v)) => xs.iter().any(|x| v.loosely_eq(x)),
            (Cmp::Ge(x), Some(v)) => v.as_f64().is_some_and(|f| f >= *x),
            (Cmp::Le(x), Some(v)) => v.as_f64().is_some_and(|f| f <= *x),
            (Cmp::Gt(x), Some(v)) => v.as_f64().is_some_and(|f| f > *x),
            (Cmp::Lt(x), Some(v)) => v.as_f64().is_some_and(|f| f < *x),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodePattern {
    pub label: Option<Label>,
    pub preds: Vec<PropPredicate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePattern {
    pub from: usize,
    pub to: usize,
    pub rtype: RelType,
    pub preds: Vec<PropPredicate>,
}

/// A connected template of at most six nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pattern {
    pub nodes: Vec<NodePattern>,
    pub edges: Vec<EdgePattern>,
}

pub const MAX_PATTERN_NODES: usize = 6;

impl Pattern {
    pub fn node(mut self, label: Option<Label>, preds: Vec<PropPredicate>) -> Self {
        self.nodes.push(NodePattern { label, preds });
        self
    }

    pub fn edge(mut self, from: usize, rtype: RelType, to: usize) -> Self {
        self.edges.push(EdgePattern { from, to, rtype, preds: Vec::new() });
        self
    }

    pub fn edge_where(mut self, from: usize, rtype: RelType, to: usize, preds: Vec<PropPredicate>) -> Self {
        self.edges.push(EdgePattern { from, to, rtype, preds });
        self
    }

    fn validate(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        if n == 0 || n > MAX_PATTERN_NODES {
            return Err(Error::InvalidPattern(format!("template has {n} nodes, allowed 1..={MAX_PATTERN_NODES}")));
        }
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidPattern(format!("edge {} -> {} references a missing node", e.from, e.to)));
            }
            if e.from == e.to {
                return Err(Error::InvalidPattern(format!("edge on node {} is a loop", e.from)));
            }
        }
        // expansion order: each node after the first touches an earlier one
        let mut order = vec![0];
        let mut placed = vec![false; n];
        placed[0] = true;
        while order.len() < n {
            let next = (0..n).find(|&k| {
                !placed[k] && self.edges.iter().any(|e| (e.from == k && placed[e.to]) || (e.to == k && placed[e.from]))
            });
            match next {
                Some(k) => {
                    placed[k] = true;
                    order.push(k);
                }
                None => return Err(Error::InvalidPattern("template is disconnected".into())),
            }
        }
        Ok(order)
    }
}

impl PropertyGraph {
    fn node_ok(&self, p: &NodePattern, v: EntityId) -> bool {
        let e = &self.entities[v.0 as usize];
        p.label.is_none_or(|l| l == e.label) && p.preds.iter().all(|q| q.test(&e.props))
    }

    fn edge_ok(&self, e: &EdgePattern, from: EntityId, to: EntityId) -> bool {
        match self.find_relation(e.rtype, from, to) {
            Some(r) => e.preds.iter().all(|q| q.test(&self.relations[r.0 as usize].props)),
            None => false,
        }
    }

    /// All bindings of the template's nodes to distinct entities, sorted.
    pub fn match_pattern(&self, pattern: &Pattern) -> Result<Vec<Vec<EntityId>>> {
        let order = pattern.validate()?;
        let n = pattern.nodes.len();
        let mut out = Vec::new();
        let mut binding: Vec<Option<EntityId>> = vec![None; n];
        for v in 0..self.entities.len() {
            let v = EntityId(v as u32);
            if self.node_ok(&pattern.nodes[order[0]], v) {
                binding[order[0]] = Some(v);
                self.expand(pattern, &order, 1, &mut binding, &mut out);
                binding[order[0]] = None;
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn expand(
        &self,
        pattern: &Pattern,
        order: &[usize],
        depth: usize,
        binding: &mut Vec<Option<EntityId>>,
        out: &mut Vec<Vec<EntityId>>,
    ) {
        if depth == order.len() {
            out.push(binding.iter().map(|b| b.expect("all nodes bound")).collect());
            return;
        }
        let k = order[depth];
        // anchor on the first edge reaching an already bound node
        let anchor = pattern
            .edges
            .iter()
            .find(|e| (e.from == k && binding[e.to].is_some()) || (e.to == k && binding[e.from].is_some()))
            .expect("expansion order guarantees an anchor");
        let (bound, dir) = if anchor.to == k {
            (binding[anchor.from].unwrap(), Direction::Out)
        } else {
            (binding[anchor.to].unwrap(), Direction::In)
        };
        let candidates: Vec<EntityId> = self.neighbor_ids(bound, anchor.rtype, dir).collect();
        for c in candidates {
            if binding.contains(&Some(c)) || !self.node_ok(&pattern.nodes[k], c) {
                continue;
            }
            binding[k] = Some(c);
            let consistent = pattern.edges.iter().all(|e| match (binding[e.from], binding[e.to]) {
                (Some(f), Some(t)) if e.from == k || e.to == k => self.edge_ok(e, f, t),
                _ => true,
            });
            if consistent {
                self.expand(pattern, order, depth + 1, binding, out);
            }
            binding[k] = None;
        }
    }
}
