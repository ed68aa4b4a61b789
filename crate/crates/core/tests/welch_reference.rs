//! Welch test against values precomputed with SciPy (see fixtures/generate_welch_reference.py).

use serde::Deserialize;
use uctg::stats::{p_two_tailed, summarize, welch_t};

#[derive(Deserialize)]
struct Case {
    a: Vec<f64>,
    b: Vec<f64>,
    t: f64,
    df: f64,
    p: f64,
}

#[derive(Deserialize)]
struct Point {
    t: f64,
    df: f64,
    p: f64,
}

#[derive(Deserialize)]
struct Reference {
    cases: Vec<Case>,
    points: Vec<Point>,
}

fn reference() -> Reference {
    serde_json::from_str(include_str!("fixtures/welch_reference.json")).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn fifty_random_pairs() {
    let r = reference();
    assert_eq!(r.cases.len(), 50);
    for (i, c) in r.cases.iter().enumerate() {
        assert!((5..=200).contains(&c.a.len()) && (5..=200).contains(&c.b.len()));
        let w = welch_t(&summarize(&c.a).unwrap(), &summarize(&c.b).unwrap()).unwrap();
        let p = p_two_tailed(w.t, w.df).unwrap();
        assert!(rel(w.t, c.t) < 1e-9, "case {i}: t {} vs {}", w.t, c.t);
        assert!(rel(w.df, c.df) < 1e-9, "case {i}: df {} vs {}", w.df, c.df);
        assert!((p - c.p).abs() < 1e-9, "case {i}: p {p} vs {}", c.p);
    }
}

#[test]
fn fixed_points() {
    for pt in reference().points {
        let p = p_two_tailed(pt.t, pt.df).unwrap();
        assert!((p - pt.p).abs() < 1e-9, "t={} df={}: {p} vs {}", pt.t, pt.df, pt.p);
    }
}
