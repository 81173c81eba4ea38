use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use cpattern::evaluation::{self, Engine, DEFAULT_RUNS};
use cpattern::fixture::{self, FixtureParams};
use cpattern::io::{self, Config, SceneManifest};
use cpattern::kgraph::{Label, RelType};
use cpattern::reasoner::{self, KnowledgeBase, PatternGroup, ReasonerConfig, SchemaMode};
use cpattern::scene::Scene;

#[derive(Parser)]
#[command(name = "cpattern", version, about = "Recognize C-shaped building patterns across levels of detail")]
struct Cli {
    /// Thresholds and proximity options (TOML or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ThresholdArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Minimum facing ratio for fully-parallel pairs
    #[arg(long, global = true)]
    delta1: Option<f64>,
    /// Size tolerance: largest allowed area ratio minus one
    #[arg(long, global = true)]
    delta2: Option<f64>,
    /// Angular tolerance in degrees.
    #[arg(long, global = true)]
    delta3: Option<f64>,
    /// Rectangularity below which a building gets no interval relations
    #[arg(long, global = true)]
    srec_min: Option<f64>,
    /// Minimum overlap ratio for cross-scale matches
    #[arg(long, global = true)]
    overlap_min: Option<f64>,
    /// Boundary densification step for the triangulation (m).
    #[arg(long, global = true)]
    densify_step: Option<f64>,
    /// Drop proximity links whose triangles span more than this (m).
    #[arg(long, global = true)]
    max_gap: Option<f64>,
}

#[derive(Args)]
struct ReasonArgs {
    /// three-step or precomputed
    #[arg(long, default_value = "three-step")]
    schema: SchemaMode,
    /// Enrichment passes: a number or `fixpoint`.
    #[arg(long, default_value = "fixpoint", value_parser = parse_passes)]
    passes: Passes,
    /// Re-check enriched three-building groups against the geometry.
    #[arg(long)]
    verify: bool,
    /// Direct recognition only.
    #[arg(long)]
    no_enrich: bool,
}

#[derive(Clone, Copy)]
struct Passes(Option<usize>);

fn parse_passes(s: &str) -> Result<Passes, String> {
    if s == "fixpoint" {
        return Ok(Passes(None));
    }
    s.parse::<usize>().map(|n| Passes(Some(n))).map_err(|_| format!("expected a number or `fixpoint`, got {s:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic multi-level scene.
    GenFixture {
        #[arg(long)]
        out: PathBuf,
        /// The hand-built three-level enrichment scene, with its truth file.
        #[arg(long)]
        demo: bool,
        #[arg(long, default_value_t = 100)]
        buildings: usize,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, default_value_t = 90.0)]
        spacing: f64,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, default_value_t = 0.4)]
        c_share: f64,
        #[arg(long, default_value_t = 0.5)]
        road_share: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Build the knowledge graph and write a snapshot.
    BuildGraph {
        #[arg(long)]
        scene: PathBuf,
        /// three-step or precomputed
        #[arg(long, default_value = "three-step")]
        schema: SchemaMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recognize patterns and export them.
    Recognize {
        /// Scene manifest or a folder holding scene.json.
        #[arg(long, required_unless_present = "graph")]
        scene: Option<PathBuf>,
        /// Start from a graph snapshot instead of a scene.
        #[arg(long, conflicts_with = "scene")]
        graph: Option<PathBuf>,
        #[command(flatten)]
        reason: ReasonArgs,
        /// Only report this level.
        #[arg(long)]
        lod: Option<u32>,
        /// Result JSON; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Groups as GeoJSON features
        #[arg(long)]
        geojson: Option<PathBuf>,
        /// SVG map of the reported groups
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the reasoned graph snapshot.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Score recognition against annotated patterns.
    Evaluate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        reason: ReasonArgs,
        #[arg(long)]
        json: bool,
    },
    /// Time the recognition phase.
    Bench {
        /// Scene manifests; generated scenes are used when none is given.
        #[arg(long)]
        scene: Vec<PathBuf>,
        /// Building counts of generated scenes.
        #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// kgraph, baseline or both.
        #[arg(long, default_value = "both")]
        engine: String,
        /// Timed runs per scene and engine
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        /// Time enrichment too (kgraph only).
        #[arg(long)]
        with_enrichment: bool,
        #[arg(long)]
        json: bool,
    },
    /// Draw buildings with recognized patterns as SVG.
    Render {
        #[arg(long)]
        scene: PathBuf,
        /// Result JSON from `recognize`; recognition runs when omitted.
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dataset statistics per level.
    Stats {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn config(cli: &Cli) -> anyhow::Result<ReasonerConfig> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let o = &cli.overrides;
    let th = &mut cfg.thresholds;
    for (slot, v) in [
        (&mut th.delta1, o.delta1),
        (&mut th.delta2, o.delta2),
        (&mut th.delta3, o.delta3),
        (&mut th.srec_min, o.srec_min),
        (&mut th.overlap_min, o.overlap_min),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    th.validate()?;
    if let Some(d) = o.densify_step {
        cfg.densify_step = d;
    }
    if o.max_gap.is_some() {
        cfg.max_gap = o.max_gap;
    }
    Ok(cfg.reasoner_config())
}

fn apply(mut cfg: ReasonerConfig, r: &ReasonArgs) -> ReasonerConfig {
    cfg.schema = r.schema;
    cfg.passes = r.passes.0;
    cfg.verify = r.verify;
    cfg.enrich = !r.no_enrich;
    cfg
}

fn load_scene(path: &Path) -> anyhow::Result<Scene> {
    let manifest = if path.is_dir() { path.join("scene.json") } else { path.to_path_buf() };
    let m = SceneManifest::load(&manifest)?;
    Ok(io::load_scene(&m)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => io::write_text(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn graph_summary(kb: &KnowledgeBase) -> String {
    let g = &kb.graph;
    let mut s = format!(
        "entities: SingleB {} GroupB {}\nrelations:",
        g.count_label(Label::SingleB),
        g.count_label(Label::GroupB)
    );
    for t in RelType::ALL {
        s.push_str(&format!(" {} {}", t.as_str(), g.count_of(t)));
    }
    s.push('\n');
    s
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let base = config(&cli)?;
    match &cli.command {
        Command::GenFixture { out, demo, buildings, levels, spacing, noise, c_share, road_share, seed } => {
            let scene = if *demo {
                fixture::demo_scene()
            } else {
                let p = FixtureParams {
                    buildings: *buildings,
                    levels: *levels,
                    spacing: *spacing,
                    noise: *noise,
                    c_share: *c_share,
                    road_share: *road_share,
                    seed: *seed,
                };
                fixture::generate_scene(&p)?
            };
            let manifest = io::write_scene(out, &scene)?;
            if *demo {
                let truth: Vec<_> = fixture::demo_expected()
                    .into_iter()
                    .map(|(lod, members, _)| serde_json::json!({ "lod": lod, "members": members }))
                    .collect();
                let text = serde_json::to_string_pretty(&truth)? + "\n";
                io::write_text(&out.join("truth.json"), &text)?;
            }
            println!("{} buildings written, manifest {}", scene.building_count(), manifest.display());
        }
        Command::BuildGraph { scene, schema, out } => {
            let scene = load_scene(scene)?;
            let cfg = ReasonerConfig { schema: *schema, ..base };
            let kb = reasoner::build_graph(&scene, &cfg)?;
            io::save_snapshot(out, &kb.graph)?;
            print!("{}", graph_summary(&kb));
        }
        Command::Recognize { scene, graph, reason, lod, out, geojson, svg, snapshot } => {
            let cfg = apply(base, reason);
            let (kb, scene, mut groups) = match (scene, graph) {
                (Some(path), _) => {
                    let scene = load_scene(path)?;
                    let (kb, groups) = reasoner::recognize_scene(&scene, &cfg)?;
                    (kb, Some(scene), groups)
                }
                (None, Some(path)) => {
                    if cfg.verify {
                        bail!("--verify needs --scene");
                    }
                    let mut kb = KnowledgeBase::from_graph(io::load_snapshot(path)?, cfg.schema);
                    let groups = reasoner::reason(&mut kb, &Scene::default(), &cfg)?;
                    (kb, None, groups)
                }
                (None, None) => unreachable!("clap requires one input"),
            };
            if let Some(l) = lod {
                if !kb.lods.contains(l) {
                    return Err(cpattern::Error::NotFound(format!("level {l}")).into());
                }
                groups.retain(|g| g.lod == *l);
            }
            emit(out.as_deref(), &io::groups_to_json(&groups))?;
            if let Some(p) = snapshot {
                io::save_snapshot(p, &kb.graph)?;
            }
            if geojson.is_some() || svg.is_some() {
                let Some(scene) = &scene else { bail!("--geojson and --svg need --scene") };
                if let Some(p) = geojson {
                    io::write_text(p, &io::groups_to_geojson(scene, &groups))?;
                }
                if let Some(p) = svg {
                    io::write_text(p, &io::render_svg(scene, &groups))?;
                }
            }
        }
        Command::Evaluate { scene, truth, reason, json } => {
            let scene = load_scene(scene)?;
            let truth = io::load_truth(truth)?;
            let (_, groups) = reasoner::recognize_scene(&scene, &apply(base, reason))?;
            let report = evaluation::evaluate(&groups, &truth)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", evaluation::render_eval_table(&report));
            }
        }
        Command::Bench { scene, sizes, seed, engine, runs, with_enrichment, json } => {
            let engines = match engine.as_str() {
                "both" => vec![Engine::Kgraph, Engine::Baseline],
                e => vec![e.parse::<Engine>()?],
            };
            let scenes: Vec<Scene> = if scene.is_empty() {
                sizes
                    .iter()
                    .map(|&n| {
                        let p = FixtureParams {
                            buildings: n,
                            levels: 1,
                            road_share: 1.0,
                            seed: *seed,
                            ..Default::default()
                        };
                        fixture::generate_scene(&p)
                    })
                    .collect::<Result<_, _>>()?
            } else {
                scene.iter().map(|p| load_scene(p)).collect::<anyhow::Result<_>>()?
            };
            let kbs: Vec<KnowledgeBase> =
                scenes.iter().map(|s| reasoner::build_graph(s, &base)).collect::<Result<_, _>>()?;
            let cases: Vec<(&Scene, &KnowledgeBase)> = scenes.iter().zip(&kbs).collect();
            let mut reports = Vec::new();
            for e in engines {
                reports.extend(evaluation::benchmark_many(&cases, &base, e, *runs, *with_enrichment)?);
            }
            if *json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                print!("{}", evaluation::render_bench_table(&reports));
            }
        }
        Command::Render { scene, groups, out } => {
            let scene = load_scene(scene)?;
            let groups: Vec<PatternGroup> = match groups {
                Some(p) => io::groups_from_json(&io::read_text(p)?)?,
                None => reasoner::recognize_scene(&scene, &base)?.1,
            };
            io::write_text(out, &io::render_svg(&scene, &groups))?;
        }
        Command::Stats { scene, json } => {
            let scene = load_scene(scene)?;
            let stats: Vec<_> =
                scene.lods().into_iter().map(|l| (l, evaluation::dataset_stats(scene.level(l)))).collect();
            if *json {
                let v: Vec<_> = stats.iter().map(|(l, s)| serde_json::json!({ "lod": l, "stats": s })).collect();
                println!("{}", serde_json::to_string_pretty(&v)?);
            } else {
                println!("Level    B_c   Ave_Area  Ave_Ed  R_Ed<=8  Ave_Srec  R_Srec>=0.6");
                for (l, s) in &stats {
                    println!(
                        "Lod{l:<3} {:>6} {:>10.1} {:>7.2} {:>7.1}% {:>9.3} {:>11.1}%",
                        s.b_c,
                        s.ave_area,
                        s.ave_ed,
                        100.0 * s.r_ed_le8,
                        s.ave_srec,
                        100.0 * s.r_srec_ge06
                    );
                }
            }
        }
    }
    Ok(())
}

/// 1 for bad input, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain().find_map(|c| c.downcast_ref::<cpattern::Error>()).map_or(2, |e| if e.is_validation() { 1 } else { 2 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli).context("cpattern failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
