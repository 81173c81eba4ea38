mod common;

use cpattern::crossscale::overlap_ratio;
use cpattern::geometry::{compute_sbr, overlap_area, polygon_area, rectangularity, Point, Polygon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{mc_common_area, random_star, sweep_min_rect_area};

const MC_SAMPLES: usize = 40_000;

/// Four standard errors of a hit-or-miss estimate over `box_area`.
fn mc_tolerance(box_area: f64, p: f64) -> f64 {
    4.0 * box_area * (p * (1.0 - p) / MC_SAMPLES as f64).sqrt() + 1e-9
}

fn bbox_area(polys: &[&Polygon]) -> f64 {
    let pts: Vec<Point> = polys.iter().flat_map(|p| p.exterior().iter().copied()).collect();
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    (x1 - x0) * (y1 - y0)
}

#[test]
fn area_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let p = random_star(&mut rng, Point::new(10.0, -4.0), 25.0);
        let est = mc_common_area(&[&p], MC_SAMPLES, &mut rng);
        let exact = polygon_area(&p);
        let b = bbox_area(&[&p]);
        assert!((est - exact).abs() <= mc_tolerance(b, exact / b), "{exact} vs {est}");
    }
}

#[test]
fn overlap_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut nonzero = 0;
    for _ in 0..60 {
        let a = random_star(&mut rng, Point::new(0.0, 0.0), 20.0);
        let c = Point::new(rng.gen_range(-25.0..25.0), rng.gen_range(-25.0..25.0));
        let b = random_star(&mut rng, c, 20.0);
        let exact = overlap_area(&a, &b);
        let est = mc_common_area(&[&a, &b], MC_SAMPLES, &mut rng);
        let box_area = bbox_area(&[&a, &b]);
        assert!((est - exact).abs() <= mc_tolerance(box_area, exact / box_area), "{exact} vs {est}");
        nonzero += usize::from(exact > 1.0);
    }
    assert!(nonzero > 20);
}

#[test]
fn overlap_with_holes_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ring = |x0: f64, y0: f64, x1: f64, y1: f64| {
        vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
    };
    let court = Polygon::new(ring(0.0, 0.0, 30.0, 30.0), vec![ring(8.0, 8.0, 22.0, 22.0)]).unwrap();
    assert!((polygon_area(&court) - (900.0 - 196.0)).abs() < 1e-9);
    for _ in 0..20 {
        let c = Point::new(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0));
        let b = random_star(&mut rng, c, 15.0);
        let exact = overlap_area(&court, &b);
        let est = mc_common_area(&[&court, &b], MC_SAMPLES, &mut rng);
        let box_area = bbox_area(&[&court, &b]);
        assert!((est - exact).abs() <= mc_tolerance(box_area, exact / box_area), "{exact} vs {est}");
    }
}

#[test]
fn sbr_matches_rotation_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let p = random_star(&mut rng, Point::new(300.0, 200.0), 40.0);
        let sweep = sweep_min_rect_area(p.exterior(), 0.05);
        let sbr = compute_sbr(&p).unwrap();
        // the sweep can only overestimate the true minimum
        assert!(sbr.area() <= sweep * (1.0 + 1e-9));
        assert!(sbr.area() >= sweep * (1.0 - 0.002));
        let r = rectangularity(&p).unwrap();
        assert!(r > 0.0 && r <= 1.0);
    }
}

#[test]
fn rotated_rectangle_sbr_is_exact() {
    for deg in [0.0, 12.5, 45.0, 89.0, 133.0] {
        let pts: Vec<Point> = [(-10.0, -3.0), (10.0, -3.0), (10.0, 3.0), (-10.0, 3.0)]
            .iter()
            .map(|&(x, y)| Point::new(x, y).rotated_deg(deg) + Point::new(5.0, 7.0))
            .collect();
        let s = compute_sbr(&Polygon::new(pts, vec![]).unwrap()).unwrap();
        assert!((s.area() - 120.0).abs() < 1e-9);
        assert!((s.long_half - 10.0).abs() < 1e-9 && (s.short_half - 3.0).abs() < 1e-9);
        let d = (s.orientation_deg - deg).rem_euclid(180.0);
        assert!(d.min(180.0 - d) < 1e-7, "{deg}: {}", s.orientation_deg);
    }
}

#[test]
fn overlap_ratio_uses_smaller_area() {
    let big = Polygon::rect(0.0, 0.0, 10.0, 10.0).unwrap();
    let small = Polygon::rect(2.0, 2.0, 4.0, 4.0).unwrap();
    let half = Polygon::rect(8.0, 0.0, 12.0, 10.0).unwrap();
    assert!((overlap_ratio(&big, &small) - 1.0).abs() < 1e-12);
    assert!((overlap_ratio(&half, &big) - 0.5).abs() < 1e-12);
}
