//! Random finite graphs and intrinsic metrics shared by the integration tests.
#![allow(dead_code)]

use heatlab::metric::EdgeLengthMetric;
use heatlab::{FiniteGraph, Graph, Vertex};
use rand::Rng;

/// Connected graph on `n` vertices: a random spanning tree plus roughly
/// `extra` further edges, log-uniform weights in `[e^-2, e^2]` and measures
/// in `[e^-1, e]`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> FiniteGraph {
    let mut g = FiniteGraph::new();
    for i in 0..n {
        g.add_vertex(Vertex(i as i64), rng.gen_range(-1.0f64..1.0).exp());
    }
    let mut present = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        present.insert((j, i));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            present.insert((a.min(b), a.max(b)));
        }
    }
    for (a, b) in present {
        g.add_edge(Vertex(a as i64), Vertex(b as i64), rng.gen_range(-2.0f64..2.0).exp()).unwrap();
    }
    g
}

/// Lengths `u_e min(sqrt(m(x)/Deg(x)), sqrt(m(y)/Deg(y)))` with
/// `u_e` uniform in `[lo, 1]`; intrinsic by construction.
pub fn random_intrinsic_metric<R: Rng>(rng: &mut R, g: &FiniteGraph, lo: f64) -> EdgeLengthMetric {
    let mut lengths = Vec::new();
    for (x, y, _) in g.edges() {
        let lx = (g.measure(x) / g.degree(x).unwrap()).sqrt();
        let ly = (g.measure(y) / g.degree(y).unwrap()).sqrt();
        lengths.push(((x, y), rng.gen_range(lo..=1.0) * lx.min(ly)));
    }
    EdgeLengthMetric::from_table(Vertex(0), lengths)
}
