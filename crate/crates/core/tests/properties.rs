mod common;

use std::collections::BTreeSet;

use cpattern::crossscale::match_buildings;
use cpattern::evaluation::score_sets;
use cpattern::fixture::{generate_scene, FixtureParams};
use cpattern::footprint::BuildingFootprint;
use cpattern::geometry::{compute_sbr, overlap_area, polygon_area, Interval, Point};
use cpattern::io::groups_to_json;
use cpattern::kgraph::PropertyGraph;
use cpattern::proximity::{build_proximity_graph, ProximityOptions};
use cpattern::reasoner::{reason, recognize_scene, KnowledgeBase, Provenance, ReasonerConfig, SchemaMode};
use cpattern::relations::{allen_classify, interval_relation, Thresholds};
use cpattern::scene::Scene;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_star;

fn star(seed: u64) -> cpattern::geometry::Polygon {
    random_star(&mut ChaCha8Rng::seed_from_u64(seed), Point::new(0.0, 0.0), 30.0)
}

fn small_scene(seed: u64, buildings: usize) -> Scene {
    let p = FixtureParams { buildings, seed, noise: 0.8, ..FixtureParams::default() };
    generate_scene(&p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sbr_rotates_with_the_polygon(seed in any::<u64>(), deg in 0.0..360.0f64) {
        let p = star(seed);
        let q = p.map_points(|v| v.rotated_deg(deg)).unwrap();
        let (a, b) = (compute_sbr(&p).unwrap(), compute_sbr(&q).unwrap());
        prop_assert!((a.area() - b.area()).abs() <= 1e-6 * a.area());
        // orientation is only defined when the optimum is unique and not square
        let unique = (a.long_half - a.short_half) > 0.01 * a.long_half;
        if unique && (a.area() - b.area()).abs() <= 1e-12 * a.area() {
            let d = (b.orientation_deg - a.orientation_deg - deg).rem_euclid(180.0);
            prop_assert!(d.min(180.0 - d) < 1e-4 || d.min(180.0 - d) > 1.0, "shift {}", d);
        }
    }

    #[test]
    fn overlap_is_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>(), dx in -40.0..40.0f64, dy in -40.0..40.0f64) {
        let a = star(s1);
        let b = star(s2).map_points(|v| v + Point::new(dx, dy)).unwrap();
        let (ab, ba) = (overlap_area(&a, &b), overlap_area(&b, &a));
        let bound = polygon_area(&a).min(polygon_area(&b));
        prop_assert!((ab - ba).abs() <= 1e-7 * bound.max(1.0));
        prop_assert!(ab >= -1e-9 && ab <= bound * (1.0 + 1e-9));
        prop_assert!((overlap_area(&a, &a) - polygon_area(&a)).abs() <= 1e-7 * polygon_area(&a));
    }

    #[test]
    fn allen_converse_holds(a0 in -50.0..50.0f64, a1 in -50.0..50.0f64, b0 in -50.0..50.0f64, b1 in -50.0..50.0f64, eps in 0.0..3.0f64) {
        let (a, b) = (Interval::new(a0, a1), Interval::new(b0, b1));
        prop_assert_eq!(allen_classify(b, a, eps), allen_classify(a, b, eps).converse());
        prop_assert_eq!(allen_classify(a, b, eps).code(), common::allen_oracle(a, b, eps));
    }

    #[test]
    fn a_building_equals_itself(seed in any::<u64>()) {
        let b = BuildingFootprint::new("x", 1, star(seed)).unwrap();
        let th = Thresholds { srec_min: 0.01, ..Thresholds::default() };
        let r = interval_relation(&b, &b, &th).unwrap();
        prop_assert_eq!(r.inter_t, 85);
        prop_assert!((r.face_r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn score_ignores_order(seed in any::<u64>(), n in 0usize..12, m in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let name = |k: usize| vec![format!("b{k}"), format!("c{k}")];
        let truth: Vec<Vec<String>> = (0..n).map(name).collect();
        let mut found: Vec<Vec<String>> = (n / 2..n / 2 + m).map(name).collect();
        let c1 = score_sets(&found, &truth).unwrap();
        found.shuffle(&mut rng);
        let mut t2 = truth.clone();
        t2.shuffle(&mut rng);
        let c2 = score_sets(&found, &t2).unwrap();
        prop_assert_eq!(c1, c2);
        prop_assert_eq!(c1.tp + c1.fn_, n);
        prop_assert_eq!(c1.tp + c1.fp, m);
        for v in [c1.precision, c1.recall].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn proximity_ignores_input_order(seed in any::<u64>(), n in 3usize..40) {
        let scene = small_scene(seed, n);
        let level = scene.level(1);
        let opts = ProximityOptions::default();
        let a = build_proximity_graph(level, scene.roads(), &opts).unwrap();
        let mut shuffled = level.to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a));
        let b = build_proximity_graph(&shuffled, scene.roads(), &opts).unwrap();
        let ea: Vec<_> = a.edges().collect();
        let eb: Vec<_> = b.edges().collect();
        prop_assert_eq!(&ea, &eb);
        // planar graph bound
        prop_assert!(ea.len() <= 3 * level.len().max(3) - 6);
    }

    #[test]
    fn stricter_overlap_refines_components(seed in any::<u64>(), t1 in 0.05..0.6f64, dt in 0.0..0.4f64) {
        let scene = small_scene(seed, 30);
        let (detailed, coarse) = (scene.level(1), scene.level(2));
        let loose = match_buildings(coarse, detailed, t1).unwrap();
        let strict = match_buildings(coarse, detailed, t1 + dt).unwrap();
        for s in &strict {
            let host = loose.iter().find(|l| s.coarse_ids.is_subset(&l.coarse_ids) && s.detailed_ids.is_subset(&l.detailed_ids));
            prop_assert!(host.is_some(), "{:?} not inside a looser component", s);
        }
        // each building appears in at most one component
        let mut seen = BTreeSet::new();
        for c in &loose {
            for id in c.coarse_ids.iter().chain(&c.detailed_ids) {
                prop_assert!(seen.insert(id.clone()));
            }
        }
    }

    #[test]
    fn groups_are_canonical_and_unique(seed in any::<u64>(), n in 5usize..60) {
        let scene = small_scene(seed, n);
        let (kb, groups) = recognize_scene(&scene, &ReasonerConfig::default()).unwrap();
        kb.graph.audit().unwrap();
        let mut seen = BTreeSet::new();
        for g in &groups {
            prop_assert!(g.members.windows(2).all(|w| w[0] < w[1]), "{:?}", g.members);
            prop_assert!(seen.insert(g.member_set()));
            if g.provenance == Provenance::Direct {
                prop_assert_eq!(g.members.len(), 3);
            }
            for m in &g.members {
                prop_assert_eq!(scene.building(m).map(|b| b.lod), Some(g.lod));
            }
        }
    }

    #[test]
    fn snapshot_reload_reproduces_results(seed in any::<u64>(), n in 5usize..40) {
        let scene = small_scene(seed, n);
        let config = ReasonerConfig::default();
        let kb = cpattern::reasoner::build_graph(&scene, &config).unwrap();
        let text = kb.graph.to_snapshot_string();
        let reloaded = PropertyGraph::read_snapshot(text.as_bytes()).unwrap();
        prop_assert_eq!(reloaded.to_snapshot_string(), text);
        let mut a = kb.clone();
        let mut b = KnowledgeBase::from_graph(reloaded, SchemaMode::ThreeStep);
        let ga = reason(&mut a, &scene, &config).unwrap();
        let gb = reason(&mut b, &scene, &config).unwrap();
        prop_assert_eq!(groups_to_json(&ga), groups_to_json(&gb));
        prop_assert_eq!(a.graph.to_snapshot_string(), b.graph.to_snapshot_string());
    }
}
