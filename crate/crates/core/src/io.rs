//! Scene loading, configuration and result export.
//!
//! A scene is described by a small JSON manifest listing building
//! FeatureCollections (one or more, any mix of levels), an optional road
//! FeatureCollection, an optional `{id: bool}` shape-label map and an
//! optional match-override list. Paths are relative to the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::crossscale::MatchOverride;
use crate::error::{Error, Result};
use crate::evaluation::TruthEntry;
use crate::footprint::BuildingFootprint;
use crate::geometry::{Point, Polygon};
use crate::kgraph::PropertyGraph;
use crate::proximity::{ProximityOptions, RoadSet};
use crate::reasoner::{PatternGroup, Provenance, ReasonerConfig};
use crate::relations::Thresholds;
use crate::scene::Scene;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_owned(), msg: msg.into() }
}

fn from_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_err(path, e.to_string()))
}

// ---------------------------------------------------------------------------
// configuration

/// Tunable parameters, read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub thresholds: Thresholds,
    pub densify_step: f64,
    pub max_gap: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        let p = ProximityOptions::default();
        Self { thresholds: Thresholds::default(), densify_step: p.densify_step, max_gap: p.max_gap }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let cfg: Config = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?
        } else {
            from_json(path, &text)?
        };
        cfg.thresholds.validate()?;
        Ok(cfg)
    }

    pub fn reasoner_config(&self) -> ReasonerConfig {
        ReasonerConfig {
            thresholds: self.thresholds,
            proximity: ProximityOptions { densify_step: self.densify_step, max_gap: self.max_gap },
            ..ReasonerConfig::default()
        }
    }
}

// ---------------------------------------------------------------------------
// GeoJSON

#[derive(Debug, Deserialize)]
struct RawCollection {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    features: Vec<RawFeature>,
    #[serde(default)]
    crs: Option<Value>,
}

#[derive(Debug, Deserialize)]
struct RawFeature {
    #[serde(default)]
    id: Option<Value>,
    geometry: Option<RawGeometry>,
    #[serde(default)]
    properties: Option<Map<String, Value>>,
}

#[derive(Debug, Deserialize)]
struct RawGeometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: Value,
}

fn declared_crs(c: &RawCollection) -> Option<String> {
    c.crs.as_ref()?.pointer("/properties/name")?.as_str().map(str::to_owned)
}

fn is_geographic_crs(name: &str) -> bool {
    let n = name.to_ascii_uppercase();
    n.contains("4326") || n.contains("CRS84")
}

fn to_point(v: &[f64]) -> Option<Point> {
    match v {
        [x, y, ..] if x.is_finite() && y.is_finite() => Some(Point::new(*x, *y)),
        _ => None,
    }
}

fn to_ring(v: Vec<Vec<f64>>) -> Option<Vec<Point>> {
    v.iter().map(|p| to_point(p)).collect()
}

fn feature_id(f: &RawFeature) -> Option<String> {
    let from_props = f.properties.as_ref().and_then(|p| p.get("id"));
    match from_props.or(f.id.as_ref())? {
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn read_collection(path: &Path) -> Result<RawCollection> {
    let c: RawCollection = from_json(path, &read_text(path)?)?;
    if c.kind != "FeatureCollection" {
        return Err(parse_err(path, format!("expected a FeatureCollection, found {}", c.kind)));
    }
    Ok(c)
}

/// Building features of one file plus its declared CRS name.
pub fn read_buildings(path: &Path) -> Result<(Vec<BuildingFootprint>, Option<String>)> {
    let coll = read_collection(path)?;
    let crs = declared_crs(&coll);
    if let Some(name) = &crs {
        if is_geographic_crs(name) {
            return Err(parse_err(path, format!("geographic CRS {name} is not supported; reproject to meters")));
        }
    }
    let mut out = Vec::with_capacity(coll.features.len());
    for (k, f) in coll.features.into_iter().enumerate() {
        let id = feature_id(&f).ok_or_else(|| parse_err(path, format!("feature #{k} has no string id")))?;
        let fail = |msg: String| parse_err(path, format!("feature {id}: {msg}"));
        let props = f.properties.unwrap_or_default();
        let lod = props
            .get("lod")
            .and_then(Value::as_u64)
            .and_then(|l| u32::try_from(l).ok())
            .ok_or_else(|| fail("missing or non-integer lod".into()))?;
        let shape_c = match props.get("shape_c") {
            None | Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(other) => return Err(fail(format!("shape_c must be boolean, got {other}"))),
        };
        let geom = f.geometry.ok_or_else(|| fail("missing geometry".into()))?;
        if geom.kind != "Polygon" {
            return Err(fail(format!("expected Polygon geometry, found {}", geom.kind)));
        }
        let rings: Vec<Vec<Vec<f64>>> =
            serde_json::from_value(geom.coordinates).map_err(|e| fail(format!("bad coordinates: {e}")))?;
        let mut rings = rings.into_iter();
        let exterior =
            rings.next().and_then(to_ring).ok_or_else(|| fail("polygon needs a finite exterior ring".into()))?;
        let holes: Vec<Vec<Point>> =
            rings.map(to_ring).collect::<Option<_>>().ok_or_else(|| fail("non-finite hole coordinate".into()))?;
        let poly = Polygon::new(exterior, holes).map_err(|e| fail(format!("invalid ring: {e}")))?;
        let b = BuildingFootprint::new(id.clone(), lod, poly).map_err(|e| fail(format!("invalid geometry: {e}")))?;
        out.push(b.with_shape_c(shape_c));
    }
    Ok((out, crs))
}

/// Road LineStrings (MultiLineStrings are split into parts).
pub fn read_roads(path: &Path) -> Result<(RoadSet, Option<String>)> {
    let coll = read_collection(path)?;
    let crs = declared_crs(&coll);
    if let Some(name) = &crs {
        if is_geographic_crs(name) {
            return Err(parse_err(path, format!("geographic CRS {name} is not supported; reproject to meters")));
        }
    }
    let mut lines = Vec::new();
    for (k, f) in coll.features.into_iter().enumerate() {
        let name = feature_id(&f).unwrap_or_else(|| format!("#{k}"));
        let fail = |msg: String| parse_err(path, format!("road {name}: {msg}"));
        let geom = f.geometry.ok_or_else(|| fail("missing geometry".into()))?;
        let parts: Vec<Vec<Vec<f64>>> = match geom.kind.as_str() {
            "LineString" => vec![serde_json::from_value(geom.coordinates).map_err(|e| fail(e.to_string()))?],
            "MultiLineString" => serde_json::from_value(geom.coordinates).map_err(|e| fail(e.to_string()))?,
            other => return Err(fail(format!("expected LineString geometry, found {other}"))),
        };
        for p in parts {
            lines.push(to_ring(p).ok_or_else(|| fail("non-finite coordinate".into()))?);
        }
    }
    Ok((RoadSet::new(lines)?, crs))
}

/// Scene file list, usually read from a manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub buildings: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roads: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<PathBuf>,
}

impl SceneManifest {
    /// Reads a manifest and resolves its paths against the manifest folder.
    pub fn load(path: &Path) -> Result<Self> {
        let mut m: SceneManifest = from_json(path, &read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        m.buildings.iter_mut().for_each(fix);
        m.roads.iter_mut().for_each(fix);
        m.labels.iter_mut().for_each(fix);
        m.overrides.iter_mut().for_each(fix);
        Ok(m)
    }
}

/// Longest SBR side below which a scene whose coordinates all fit in
/// degree ranges is taken to be in degrees.
const DEGREE_EXTENT: f64 = 0.01;

fn looks_geographic(buildings: &[BuildingFootprint]) -> bool {
    if buildings.is_empty() {
        return false;
    }
    let in_range = buildings.iter().flat_map(|b| b.polygon.exterior()).all(|p| p.x.abs() <= 180.0 && p.y.abs() <= 90.0);
    let longest = buildings.iter().map(|b| 2.0 * b.sbr.long_half).fold(0.0, f64::max);
    in_range && longest < DEGREE_EXTENT
}

/// Loads and validates every file of a scene.
pub fn load_scene(manifest: &SceneManifest) -> Result<Scene> {
    if manifest.buildings.is_empty() {
        return Err(Error::Validation("scene lists no building files".into()));
    }
    let mut all = Vec::new();
    let mut crs_seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in &manifest.buildings {
        let (b, crs) = read_buildings(path)?;
        if let Some(c) = crs {
            crs_seen.entry(c).or_insert_with(|| path.clone());
        }
        all.extend(b);
    }
    let roads = match &manifest.roads {
        Some(p) => {
            let (r, crs) = read_roads(p)?;
            if let Some(c) = crs {
                crs_seen.entry(c).or_insert_with(|| p.clone());
            }
            r
        }
        None => RoadSet::empty(),
    };
    if crs_seen.len() > 1 {
        let names: Vec<String> = crs_seen.iter().map(|(c, p)| format!("{c} ({})", p.display())).collect();
        return Err(Error::Validation(format!("mixed CRS across scene files: {}", names.join(", "))));
    }
    if looks_geographic(&all) {
        return Err(Error::Validation(
            "coordinates look like degrees (every building spans under 0.01 units); reproject to meters".into(),
        ));
    }
    if let Some(p) = &manifest.labels {
        let labels: BTreeMap<String, bool> = from_json(p, &read_text(p)?)?;
        let known: BTreeSet<&str> = all.iter().map(|b| b.id.as_str()).collect();
        if let Some(bad) = labels.keys().find(|k| !known.contains(k.as_str())) {
            return Err(parse_err(p, format!("label for unknown building {bad}")));
        }
        for b in &mut all {
            if let Some(&v) = labels.get(&b.id) {
                b.shape_c = v;
            }
        }
    }
    let overrides: Vec<MatchOverride> = match &manifest.overrides {
        Some(p) => from_json(p, &read_text(p)?)?,
        None => Vec::new(),
    };
    Scene::new(all, roads, overrides)
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthEntry>> {
    from_json(path, &read_text(path)?)
}

pub fn load_snapshot(path: &Path) -> Result<PropertyGraph> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    PropertyGraph::read_snapshot(std::io::BufReader::new(f))
}

pub fn save_snapshot(path: &Path, g: &PropertyGraph) -> Result<()> {
    write_text(path, &g.to_snapshot_string())
}

// ---------------------------------------------------------------------------
// export

/// Recognized patterns as pretty JSON with a trailing newline.
pub fn groups_to_json(groups: &[PatternGroup]) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "groups": groups })).expect("groups serialize");
    s.push('\n');
    s
}

pub fn groups_from_json(text: &str) -> Result<Vec<PatternGroup>> {
    #[derive(Deserialize)]
    struct Doc {
        groups: Vec<PatternGroup>,
    }
    let d: Doc = from_json(Path::new("<results>"), text)?;
    Ok(d.groups)
}

fn ring_coords(ring: &[Point]) -> Vec<[f64; 2]> {
    let mut v: Vec<[f64; 2]> = ring.iter().map(|p| [p.x, p.y]).collect();
    if let Some(&first) = v.first() {
        v.push(first);
    }
    v
}

/// Building features tagged with the patterns they belong to.
pub fn groups_to_geojson(scene: &Scene, groups: &[PatternGroup]) -> String {
    let mut member_of: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, g) in groups.iter().enumerate() {
        for m in &g.members {
            member_of.entry(m.as_str()).or_default().push(k);
        }
    }
    let features: Vec<Value> = scene
        .buildings()
        .map(|b| {
            let idx = member_of.get(b.id.as_str()).cloned().unwrap_or_default();
            let coords: Vec<Vec<[f64; 2]>> = b.polygon.rings().map(ring_coords).collect();
            json!({
                "type": "Feature",
                "properties": {
                    "id": b.id,
                    "lod": b.lod,
                    "shape_c": b.shape_c,
                    "patterns": idx.iter().map(|k| format!("p{k}")).collect::<Vec<_>>(),
                    "provenance": idx.iter().map(|&k| groups[k].provenance.as_str()).collect::<Vec<_>>(),
                },
                "geometry": { "type": "Polygon", "coordinates": coords },
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({ "type": "FeatureCollection", "features": features }))
        .expect("features serialize");
    s.push('\n');
    s
}

/// Reads back the member sets written by [`groups_to_geojson`].
pub fn member_sets_from_geojson(text: &str) -> Result<BTreeSet<(u32, Vec<String>)>> {
    let path = Path::new("<geojson>");
    let coll: RawCollection = from_json(path, text)?;
    let mut by_pattern: BTreeMap<String, (u32, Vec<String>)> = BTreeMap::new();
    for f in coll.features {
        let id = feature_id(&f).ok_or_else(|| parse_err(path, "feature without id"))?;
        let props = f.properties.unwrap_or_default();
        let lod = props.get("lod").and_then(Value::as_u64).ok_or_else(|| parse_err(path, "feature without lod"))?;
        for p in props.get("patterns").and_then(Value::as_array).into_iter().flatten() {
            let key = p.as_str().ok_or_else(|| parse_err(path, "pattern tag must be a string"))?;
            by_pattern.entry(key.to_owned()).or_insert_with(|| (lod as u32, Vec::new())).1.push(id.clone());
        }
    }
    Ok(by_pattern
        .into_values()
        .map(|(lod, mut m)| {
            m.sort();
            (lod, m)
        })
        .collect())
}

fn provenance_color(p: Option<Provenance>) -> &'static str {
    match p {
        Some(Provenance::Direct) => "#d62728",
        Some(Provenance::Labeled) => "#9467bd",
        Some(Provenance::BottomUp) => "#1f77b4",
        Some(Provenance::UpBottom) => "#2ca02c",
        None => "#d9d9d9",
    }
}

const PANEL: f64 = 400.0;
const MARGIN: f64 = 20.0;

/// SVG with one panel per level; one `<polygon>` per building, coloured by
/// the provenance of the pattern it belongs to.
pub fn render_svg(scene: &Scene, groups: &[PatternGroup]) -> String {
    let rank = |p: Provenance| match p {
        Provenance::Direct => 0,
        Provenance::Labeled => 1,
        Provenance::BottomUp => 2,
        Provenance::UpBottom => 3,
    };
    let mut colour_of: BTreeMap<&str, Provenance> = BTreeMap::new();
    for g in groups {
        for m in &g.members {
            let e = colour_of.entry(m.as_str()).or_insert(g.provenance);
            if rank(g.provenance) < rank(*e) {
                *e = g.provenance;
            }
        }
    }
    let lods = scene.lods();
    let bbox = scene.buildings().map(|b| b.polygon.bbox()).reduce(|a, b| a.union(&b));
    let (min, span) = match bbox {
        Some(bb) => (bb.min, (bb.max.x - bb.min.x).max(bb.max.y - bb.min.y).max(1e-9)),
        None => (Point::new(0.0, 0.0), 1.0),
    };
    let scale = (PANEL - 2.0 * MARGIN) / span;
    let width = PANEL * lods.len().max(1) as f64;
    let height = PANEL + 40.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    for (k, &lod) in lods.iter().enumerate() {
        let ox = k as f64 * PANEL;
        let _ = writeln!(s, r#"<g id="lod{lod}">"#);
        let _ =
            writeln!(s, r#"<text x="{}" y="16" font-family="sans-serif" font-size="14">LOD {lod}</text>"#, ox + MARGIN);
        for b in scene.level(lod) {
            let pts: Vec<String> = b
                .polygon
                .exterior()
                .iter()
                .map(|p| {
                    let x = ox + MARGIN + (p.x - min.x) * scale;
                    let y = 20.0 + PANEL - MARGIN - (p.y - min.y) * scale;
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let fill = provenance_color(colour_of.get(b.id.as_str()).copied());
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="{fill}" stroke="#333333" stroke-width="0.5"><title>{}</title></polygon>"##,
                pts.join(" "),
                xml_escape(&b.id)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let legend = [
        (Provenance::Direct, "direct"),
        (Provenance::Labeled, "labeled"),
        (Provenance::BottomUp, "bottom-up"),
        (Provenance::UpBottom, "up-bottom"),
    ];
    for (k, (p, name)) in legend.iter().enumerate() {
        let x = MARGIN + k as f64 * 110.0;
        let y = height - 16.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/>"#,
            y - 9.0,
            provenance_color(Some(*p))
        );
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11">{name}</text>"#, x + 14.0);
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Writes a scene as one building FeatureCollection per level plus roads,
/// labels and a manifest into `dir`. Returns the manifest path.
pub fn write_scene(dir: &Path, scene: &Scene) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = SceneManifest::default();
    for lod in scene.lods() {
        let features: Vec<Value> = scene
            .level(lod)
            .iter()
            .map(|b| {
                let coords: Vec<Vec<[f64; 2]>> = b.polygon.rings().map(ring_coords).collect();
                let mut props = json!({ "id": b.id, "lod": b.lod });
                if b.shape_c {
                    props["shape_c"] = json!(true);
                }
                json!({ "type": "Feature", "properties": props, "geometry": { "type": "Polygon", "coordinates": coords } })
            })
            .collect();
        let name = format!("lod{lod}.geojson");
        let text = serde_json::to_string(&json!({ "type": "FeatureCollection", "features": features }))
            .expect("features serialize");
        write_text(&dir.join(&name), &text)?;
        manifest.buildings.push(name.into());
    }
    if !scene.roads().is_empty() {
        let features: Vec<Value> = scene
            .roads()
            .polylines()
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let coords: Vec<[f64; 2]> = l.iter().map(|p| [p.x, p.y]).collect();
                json!({ "type": "Feature", "properties": { "id": format!("road{k}") },
                        "geometry": { "type": "LineString", "coordinates": coords } })
            })
            .collect();
        let text = serde_json::to_string(&json!({ "type": "FeatureCollection", "features": features }))
            .expect("roads serialize");
        write_text(&dir.join("roads.geojson"), &text)?;
        manifest.roads = Some("roads.geojson".into());
    }
    if !scene.overrides().is_empty() {
        let text = serde_json::to_string_pretty(scene.overrides()).expect("overrides serialize");
        write_text(&dir.join("overrides.json"), &text)?;
        manifest.overrides = Some("overrides.json".into());
    }
    let path = dir.join("scene.json");
    write_text(&path, &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("cpattern-io-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        fs::create_dir_all(&d).unwrap();
        d
    }

    fn feature(id: Value, lod: Value, ring: &[[f64; 2]]) -> Value {
        let mut props = json!({ "lod": lod });
        if !id.is_null() {
            props["id"] = id;
        }
        json!({ "type": "Feature", "properties": props, "geometry": { "type": "Polygon", "coordinates": [ring] } })
    }

    fn write_fc(dir: &Path, name: &str, features: Vec<Value>, crs: Option<&str>) -> PathBuf {
        let mut fc = json!({ "type": "FeatureCollection", "features": features });
        if let Some(c) = crs {
            fc["crs"] = json!({ "type": "name", "properties": { "name": c } });
        }
        let p = dir.join(name);
        fs::write(&p, fc.to_string()).unwrap();
        p
    }

    const SQ: [[f64; 2]; 5] = [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0], [0.0, 0.0]];

    #[test]
    fn missing_lod_names_feature() {
        let d = tmpdir("nolod");
        let p = write_fc(&d, "b.geojson", vec![feature(json!("house7"), Value::Null, &SQ)], None);
        let err = load_scene(&SceneManifest { buildings: vec![p], ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("house7"), "{err}");
    }

    #[test]
    fn degree_coordinates_are_rejected() {
        let d = tmpdir("deg");
        let ring = [[118.78, 32.04], [118.7801, 32.04], [118.7801, 32.0401], [118.78, 32.0401], [118.78, 32.04]];
        let p = write_fc(&d, "b.geojson", vec![feature(json!("a"), json!(1), &ring)], None);
        assert!(load_scene(&SceneManifest { buildings: vec![p], ..Default::default() }).is_err());
        let p =
            write_fc(&d, "c.geojson", vec![feature(json!("a"), json!(1), &SQ)], Some("urn:ogc:def:crs:OGC:1.3:CRS84"));
        assert!(load_scene(&SceneManifest { buildings: vec![p], ..Default::default() }).is_err());
    }

    #[test]
    fn mixed_crs_and_duplicate_ids_are_rejected() {
        let d = tmpdir("mixed");
        let a = write_fc(&d, "a.geojson", vec![feature(json!("a"), json!(1), &SQ)], Some("EPSG:32650"));
        let sq2: Vec<[f64; 2]> = SQ.iter().map(|p| [p[0] + 50.0, p[1]]).collect();
        let b = write_fc(&d, "b.geojson", vec![feature(json!("b"), json!(2), &sq2)], Some("EPSG:3857"));
        let err = load_scene(&SceneManifest { buildings: vec![a.clone(), b], ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("mixed CRS"), "{err}");
        let dup = write_fc(&d, "dup.geojson", vec![feature(json!("a"), json!(2), &sq2)], Some("EPSG:32650"));
        let err = load_scene(&SceneManifest { buildings: vec![a, dup], ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn invalid_ring_names_feature() {
        let d = tmpdir("bowtie");
        let bow = [[0.0, 0.0], [3.0, 2.0], [3.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        let p = write_fc(&d, "b.geojson", vec![feature(json!("tie"), json!(1), &bow)], None);
        let err = load_scene(&SceneManifest { buildings: vec![p], ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("tie"), "{err}");
        assert!(err.is_validation());
    }

    #[test]
    fn config_reads_toml_and_json() {
        let d = tmpdir("cfg");
        let t = d.join("c.toml");
        fs::write(&t, "densify_step = 2.5\n[thresholds]\ndelta3 = 10.0\n").unwrap();
        let c = Config::load(&t).unwrap();
        assert_eq!(c.densify_step, 2.5);
        assert_eq!(c.thresholds.delta3, 10.0);
        assert_eq!(c.thresholds.delta1, 0.4);
        let j = d.join("c.json");
        fs::write(&j, r#"{"thresholds": {"delta3": 50.0}}"#).unwrap();
        assert!(Config::load(&j).is_err());
        fs::write(&j, r#"{"bogus": 1}"#).unwrap();
        assert!(Config::load(&j).is_err());
    }
}
