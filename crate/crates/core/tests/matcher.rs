//! Template matching against exhaustive enumeration of injective bindings.

use std::collections::BTreeSet;

use cpattern::kgraph::{
    props, Cmp, EntityId, Label, Pattern, PropPredicate, PropertyGraph, Props, RelType, BID, SCALE,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TYPES: [RelType; 3] = [RelType::HasProxi, RelType::PartPer, RelType::FullPara];

fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> PropertyGraph {
    let mut g = PropertyGraph::new();
    for k in 0..n {
        let scale = i64::from(rng.gen_range(1..=2u8));
        g.upsert_entity(Label::SingleB, props([(SCALE, scale.into()), (BID, format!("b{k}").into())])).unwrap();
    }
    for a in 0..n {
        for b in 0..n {
            for t in TYPES {
                if a != b && rng.gen_bool(density) {
                    g.upsert_relation(t, EntityId(a as u32), EntityId(b as u32), Props::new()).unwrap();
                }
            }
        }
    }
    g
}

/// Random connected template: a spanning path plus extra edges.
fn random_pattern(rng: &mut ChaCha8Rng, nodes: usize) -> Pattern {
    let mut p = Pattern::default();
    for k in 0..nodes {
        let preds =
            if k == 0 && rng.gen_bool(0.5) { vec![PropPredicate::new(SCALE, Cmp::Eq(1i64.into()))] } else { vec![] };
        p = p.node(Some(Label::SingleB), preds);
    }
    for k in 1..nodes {
        let t = TYPES[rng.gen_range(0..3)];
        let back = rng.gen_range(0..k);
        p = if rng.gen_bool(0.5) { p.edge(back, t, k) } else { p.edge(k, t, back) };
    }
    for _ in 0..rng.gen_range(0..=2) {
        let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        if a != b {
            p = p.edge(a, TYPES[rng.gen_range(0..3)], b);
        }
    }
    p
}

fn holds(g: &PropertyGraph, p: &Pattern, bind: &[EntityId]) -> bool {
    let nodes_ok = p.nodes.iter().zip(bind).all(|(np, &v)| {
        let e = g.entity(v).unwrap();
        np.label.is_none_or(|l| l == e.label) && np.preds.iter().all(|q| q.test(&e.props))
    });
    let symmetric = |t: RelType| t == RelType::HasProxi;
    let edges_ok = p.edges.iter().all(|e| {
        let (a, b) = (bind[e.from], bind[e.to]);
        g.relations().iter().any(|r| {
            r.rtype == e.rtype && ((r.from == a && r.to == b) || (symmetric(r.rtype) && r.from == b && r.to == a))
        })
    });
    nodes_ok && edges_ok
}

fn brute_force(g: &PropertyGraph, p: &Pattern) -> BTreeSet<Vec<EntityId>> {
    let n = g.entity_count();
    let k = p.nodes.len();
    let mut out = BTreeSet::new();
    let mut bind = vec![EntityId(0); k];
    fn rec(
        g: &PropertyGraph,
        p: &Pattern,
        n: usize,
        depth: usize,
        bind: &mut Vec<EntityId>,
        out: &mut BTreeSet<Vec<EntityId>>,
    ) {
        if depth == bind.len() {
            if holds(g, p, bind) {
                out.insert(bind.clone());
            }
            return;
        }
        for v in 0..n {
            let v = EntityId(v as u32);
            if bind[..depth].contains(&v) {
                continue;
            }
            bind[depth] = v;
            rec(g, p, n, depth + 1, bind, out);
        }
    }
    rec(g, p, n, 0, &mut bind, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matcher_equals_enumeration(seed in any::<u64>(), n in 2usize..=14, nodes in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let density = rng.gen_range(0.05..0.35);
        let g = random_graph(&mut rng, n, density);
        let p = random_pattern(&mut rng, nodes);
        let got: BTreeSet<Vec<EntityId>> = g.match_pattern(&p).unwrap().into_iter().collect();
        prop_assert_eq!(got, brute_force(&g, &p));
    }
}

#[test]
fn triangle_template_on_fifty_entities() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let g = random_graph(&mut rng, 50, 0.04);
    let p = Pattern::default()
        .node(Some(Label::SingleB), vec![])
        .node(Some(Label::SingleB), vec![])
        .node(Some(Label::SingleB), vec![])
        .edge(0, RelType::PartPer, 1)
        .edge(0, RelType::PartPer, 2)
        .edge(1, RelType::HasProxi, 2);
    let got: BTreeSet<Vec<EntityId>> = g.match_pattern(&p).unwrap().into_iter().collect();
    let want = brute_force(&g, &p);
    assert!(!want.is_empty());
    assert_eq!(got, want);
}
