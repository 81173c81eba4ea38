//! Scoring against annotations, dataset statistics and timing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::BuildingFootprint;
use crate::reasoner::{
    baseline_recognize, enrich_fixpoint, run_rules, KnowledgeBase, PatternGroup, Provenance, ReasonerConfig,
};
use crate::scene::Scene;

/// One annotated pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthEntry {
    pub lod: u32,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `None` when nothing was recognized.
    pub precision: Option<f64>,
    /// `None` when there is nothing to find.
    pub recall: Option<f64>,
}

impl Counts {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |n: usize, d: usize| (d > 0).then(|| n as f64 / d as f64);
        Self { tp, fp, fn_, precision: ratio(tp, tp + fp), recall: ratio(tp, tp + fn_) }
    }
}

fn canonical(members: &[String]) -> Result<Vec<String>> {
    let mut m = members.to_vec();
    m.sort();
    let n = m.len();
    m.dedup();
    if m.len() != n {
        return Err(Error::Validation(format!("pattern lists a building twice: {members:?}")));
    }
    if m.is_empty() {
        return Err(Error::Validation("pattern without members".into()));
    }
    Ok(m)
}

/// Exact member-set matching of recognized patterns against truth.
pub fn score_sets(recognized: &[Vec<String>], truth: &[Vec<String>]) -> Result<Counts> {
    let mut t = BTreeSet::new();
    for s in truth {
        if !t.insert(canonical(s)?) {
            return Err(Error::Validation(format!("duplicate truth pattern {s:?}")));
        }
    }
    let r: BTreeSet<Vec<String>> = recognized.iter().map(|s| canonical(s)).collect::<Result<_>>()?;
    let tp = r.intersection(&t).count();
    Ok(Counts::from_counts(tp, r.len() - tp, t.len() - tp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LodReport {
    pub lod: u32,
    /// Labeled buildings and directly recognized arrangements.
    pub sp_pp: Counts,
    /// Everything, enrichment included.
    pub sp_pp_ep: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub levels: Vec<LodReport>,
}

/// Scores one level for both recognition variants.
pub fn score(recognized: &[PatternGroup], truth: &[TruthEntry], lod: u32) -> Result<LodReport> {
    let t: Vec<Vec<String>> = truth.iter().filter(|e| e.lod == lod).map(|e| e.members.clone()).collect();
    let at_lod = || recognized.iter().filter(|g| g.lod == lod);
    let base: Vec<Vec<String>> = at_lod().filter(|g| !g.provenance.is_enriched()).map(|g| g.members.clone()).collect();
    let all: Vec<Vec<String>> = at_lod().map(|g| g.members.clone()).collect();
    Ok(LodReport { lod, sp_pp: score_sets(&base, &t)?, sp_pp_ep: score_sets(&all, &t)? })
}

/// Scores every level present in the recognition or the truth.
pub fn evaluate(recognized: &[PatternGroup], truth: &[TruthEntry]) -> Result<EvalReport> {
    let lods: BTreeSet<u32> = recognized.iter().map(|g| g.lod).chain(truth.iter().map(|t| t.lod)).collect();
    Ok(EvalReport { levels: lods.into_iter().map(|l| score(recognized, truth, l)).collect::<Result<_>>()? })
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |x| format!("{:.1}%", 100.0 * x))
}

pub fn render_eval_table(report: &EvalReport) -> String {
    let mut s = String::from("Level  Result     tp   fp   fn  Precision  Recall\n");
    for l in &report.levels {
        for (name, c) in [("SP+PP", &l.sp_pp), ("SP+PP+EP", &l.sp_pp_ep)] {
            let _ = writeln!(
                s,
                "Lod{:<3} {:<9} {:>4} {:>4} {:>4} {:>10} {:>7}",
                l.lod,
                name,
                c.tp,
                c.fp,
                c.fn_,
                pct(c.precision),
                pct(c.recall)
            );
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetStats {
    pub b_c: usize,
    pub ave_area: f64,
    pub ave_ed: f64,
    /// Share of buildings with at most eight exterior vertices.
    pub r_ed_le8: f64,
    pub ave_srec: f64,
    pub r_srec_ge06: f64,
}

/// Shape statistics of one level. All averages are 0 for an empty level.
pub fn dataset_stats(buildings: &[BuildingFootprint]) -> DatasetStats {
    let n = buildings.len();
    if n == 0 {
        return DatasetStats { b_c: 0, ave_area: 0.0, ave_ed: 0.0, r_ed_le8: 0.0, ave_srec: 0.0, r_srec_ge06: 0.0 };
    }
    let nf = n as f64;
    let mean = |f: &dyn Fn(&BuildingFootprint) -> f64| buildings.iter().map(f).sum::<f64>() / nf;
    DatasetStats {
        b_c: n,
        ave_area: mean(&|b| b.area),
        ave_ed: mean(&|b| b.edge_count() as f64),
        r_ed_le8: mean(&|b| f64::from(u8::from(b.edge_count() <= 8))),
        ave_srec: mean(&|b| b.rectangularity),
        r_srec_ge06: mean(&|b| f64::from(u8::from(b.rectangularity >= 0.6))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Kgraph,
    Baseline,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kgraph" => Ok(Engine::Kgraph),
            "baseline" => Ok(Engine::Baseline),
            _ => Err(Error::InvalidArgument(format!("unknown engine {s:?}, expected kgraph or baseline"))),
        }
    }
}

pub const DEFAULT_RUNS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub engine: Engine,
    /// Building entities in the graph.
    pub v_c: usize,
    pub runs: usize,
    pub samples: Vec<f64>,
    pub min_t: f64,
    pub max_t: f64,
    pub ave_t: f64,
    /// Directly recognized groups (identical for both engines).
    pub groups: usize,
}

type GroupSets = BTreeSet<(u32, Vec<String>)>;

fn direct_sets(groups: &[PatternGroup]) -> GroupSets {
    groups.iter().filter(|g| g.provenance == Provenance::Direct).map(PatternGroup::member_set).collect()
}

fn kgraph_once(kb: &KnowledgeBase, config: &ReasonerConfig, enrich: bool) -> Result<(f64, Vec<PatternGroup>)> {
    let mut work = kb.clone();
    let start = Instant::now();
    let mut groups = run_rules(&mut work, &config.thresholds)?;
    if enrich {
        let lods = work.lods.clone();
        groups.extend(enrich_fixpoint(&mut work.graph, &lods, config.passes, None)?);
    }
    Ok((start.elapsed().as_secs_f64(), groups))
}

fn baseline_once(scene: &Scene, kb: &KnowledgeBase, config: &ReasonerConfig) -> (f64, Vec<PatternGroup>) {
    let start = Instant::now();
    let mut groups = Vec::new();
    for &lod in &kb.lods {
        groups.extend(baseline_recognize(scene.level(lod), &kb.proximity[&lod], &config.thresholds));
    }
    (start.elapsed().as_secs_f64(), groups)
}

/// Both engines' direct groups; a mismatch is a consistency error.
pub fn consistency_gate(scene: &Scene, kb: &KnowledgeBase, config: &ReasonerConfig) -> Result<usize> {
    let (_, kg) = kgraph_once(kb, config, false)?;
    let (_, bl) = baseline_once(scene, kb, config);
    let (a, b) = (direct_sets(&kg), direct_sets(&bl));
    if a != b {
        let only_k: Vec<_> = a.difference(&b).take(3).collect();
        let only_b: Vec<_> = b.difference(&a).take(3).collect();
        return Err(Error::Consistency(format!(
            "engines disagree: {} vs {} groups; kgraph only {only_k:?}; baseline only {only_b:?}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.len())
}

fn time_once(engine: Engine, scene: &Scene, kb: &KnowledgeBase, config: &ReasonerConfig, enrich: bool) -> Result<f64> {
    Ok(match engine {
        Engine::Kgraph => kgraph_once(kb, config, enrich)?.0,
        Engine::Baseline => baseline_once(scene, kb, config).0,
    })
}

fn bench_report(engine: Engine, kb: &KnowledgeBase, samples: Vec<f64>, groups: usize) -> BenchReport {
    let runs = samples.len();
    let min_t = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max_t = samples.iter().copied().fold(0.0, f64::max);
    let ave_t = (samples.iter().sum::<f64>() / runs as f64).clamp(min_t, max_t);
    BenchReport {
        engine,
        v_c: kb.graph.count_label(crate::kgraph::Label::SingleB),
        runs,
        samples,
        min_t,
        max_t,
        ave_t,
        groups,
    }
}

/// Times the recognition phase `runs` times on a freshly cloned,
/// not yet reasoned graph. Graph construction is excluded.
pub fn benchmark(
    scene: &Scene,
    kb: &KnowledgeBase,
    config: &ReasonerConfig,
    engine: Engine,
    runs: usize,
    include_enrichment: bool,
) -> Result<BenchReport> {
    let mut r = benchmark_many(&[(scene, kb)], config, engine, runs, include_enrichment)?;
    Ok(r.remove(0))
}

/// Like [`benchmark`] for several scenes, sampled round-robin so that
/// background load spreads evenly over all of them.
pub fn benchmark_many(
    cases: &[(&Scene, &KnowledgeBase)],
    config: &ReasonerConfig,
    engine: Engine,
    runs: usize,
    include_enrichment: bool,
) -> Result<Vec<BenchReport>> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let groups: Vec<usize> =
        cases.iter().map(|(scene, kb)| consistency_gate(scene, kb, config)).collect::<Result<_>>()?;
    let mut samples = vec![Vec::with_capacity(runs); cases.len()];
    for _ in 0..runs {
        for (k, (scene, kb)) in cases.iter().enumerate() {
            samples[k].push(time_once(engine, scene, kb, config, include_enrichment)?);
        }
    }
    Ok(samples.into_iter().zip(cases).zip(groups).map(|((s, (_, kb)), g)| bench_report(engine, kb, s, g)).collect())
}

pub fn render_bench_table(reports: &[BenchReport]) -> String {
    let mut s = String::from("Engine     v_c    Min_t/s   Max_t/s   Ave_t/s\n");
    for r in reports {
        let name = match r.engine {
            Engine::Kgraph => "kgraph",
            Engine::Baseline => "baseline",
        };
        let _ = writeln!(s, "{name:<9} {:>5} {:>9.4} {:>9.4} {:>9.4}", r.v_c, r.min_t, r.max_t, r.ave_t);
    }
    s
}

/// Recognized groups keyed by level, as canonical member sets.
pub fn group_sets_by_lod(groups: &[PatternGroup]) -> BTreeMap<u32, BTreeSet<Vec<String>>> {
    let mut out: BTreeMap<u32, BTreeSet<Vec<String>>> = BTreeMap::new();
    for g in groups {
        out.entry(g.lod).or_default().insert(g.members.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Polygon};

    fn sets(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
    }

    #[test]
    fn perfect_and_spurious() {
        let truth = sets(&[&["a", "b", "c"], &["d"], &["e", "f"]]);
        let c = score_sets(&truth, &truth).unwrap();
        assert_eq!((c.precision, c.recall), (Some(1.0), Some(1.0)));
        let mut rec = truth.clone();
        rec.push(vec!["x".into()]);
        let c = score_sets(&rec, &truth).unwrap();
        assert_eq!(c.tp, 3);
        assert_eq!(c.precision, Some(0.75));
    }

    #[test]
    fn member_order_is_irrelevant_and_duplicates_rejected() {
        let c = score_sets(&sets(&[&["c", "a", "b"]]), &sets(&[&["a", "b", "c"]])).unwrap();
        assert_eq!(c.tp, 1);
        assert!(score_sets(&[], &sets(&[&["a"], &["a"]])).is_err());
    }

    #[test]
    fn undefined_ratios_are_none() {
        let c = score_sets(&[], &[]).unwrap();
        assert_eq!((c.precision, c.recall), (None, None));
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"precision\":null"));
    }

    #[test]
    fn stats_of_squares_and_triangle() {
        let sq = |k: usize| {
            let x = 3.0 * k as f64;
            BuildingFootprint::new(format!("s{k}"), 1, Polygon::rect(x, 0.0, x + 1.0, 1.0).unwrap()).unwrap()
        };
        let ten: Vec<_> = (0..10).map(sq).collect();
        let s = dataset_stats(&ten);
        assert_eq!(s.b_c, 10);
        assert!((s.ave_area - 1.0).abs() < 1e-12 && (s.ave_ed - 4.0).abs() < 1e-12);
        assert_eq!((s.r_ed_le8, s.ave_srec, s.r_srec_ge06), (1.0, 1.0, 1.0));
        let tri =
            Polygon::new(vec![Point::new(10.0, 0.0), Point::new(12.0, 0.0), Point::new(10.0, 2.0)], vec![]).unwrap();
        let mixed = vec![sq(0), BuildingFootprint::new("t", 1, tri).unwrap()];
        let s = dataset_stats(&mixed);
        assert!((s.ave_srec - 0.75).abs() < 1e-9);
        assert_eq!(s.r_srec_ge06, 0.5);
    }
}
