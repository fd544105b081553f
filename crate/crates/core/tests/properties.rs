mod common;

use std::collections::BTreeSet;

use heatlab::graph::{dirichlet_form, laplacian_apply};
use heatlab::heat::{check_caccioppoli, semigroup_apply, DirichletSystem};
use heatlab::io;
use heatlab::metric::{ball, check_intrinsic};
use heatlab::refinement::{lift_witness, refine, verify_refinement, Origin, SubdivisionPlan};
use heatlab::{Field, FiniteGraph, Graph, Vertex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_graph, random_intrinsic_metric};

fn graph_from(seed: u64, max_n: usize) -> (FiniteGraph, ChaCha8Rng) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = r.gen_range(2..=max_n);
    let extra = r.gen_range(0..=n);
    (random_graph(&mut r, n, extra), r)
}

fn values(r: &mut ChaCha8Rng, vs: &[Vertex]) -> Field {
    Field::on_region(vs.iter().map(|&x| (x, r.gen_range(-1.0..1.0))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_symmetric_in_l2m(seed in any::<u64>()) {
        let (g, mut r) = graph_from(seed, 20);
        let vs = g.vertices().unwrap();
        let f = values(&mut r, &vs);
        let h = values(&mut r, &vs);
        let mut a = 0.0;
        let mut b = 0.0;
        for &x in &vs {
            a += g.measure(x) * f.get(x).unwrap() * laplacian_apply(&g, &h, x).unwrap();
            b += g.measure(x) * h.get(x).unwrap() * laplacian_apply(&g, &f, x).unwrap();
        }
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn green_formula(seed in any::<u64>()) {
        let (g, mut r) = graph_from(seed, 20);
        let vs = g.vertices().unwrap();
        let f = Field::finite(vs.iter().map(|&x| (x, r.gen_range(-1.0..1.0))));
        let pairing: f64 = vs.iter().map(|&x| g.measure(x) * f.get(x).unwrap() * laplacian_apply(&g, &f, x).unwrap()).sum();
        let q = dirichlet_form(&g, &f).unwrap();
        prop_assert!((pairing - q).abs() <= 1e-10 * (1.0 + q));
    }

    #[test]
    fn semigroup_is_positive_and_sub_markov(seed in any::<u64>(), t in 0.05f64..4.0) {
        let (g, mut r) = graph_from(seed, 20);
        let vs = g.vertices().unwrap();
        // drop a vertex so that the Dirichlet set has a boundary
        let inner: Vec<Vertex> = vs[..vs.len().max(2) - 1].to_vec();
        let sys = DirichletSystem::from_vertices(&g, &inner).unwrap();
        let f: Vec<f64> = inner.iter().map(|_| r.gen_range(0.0..1.0)).collect();
        let out = semigroup_apply(&sys, &f, t, 1e-10).unwrap();
        prop_assert!(out.iter().all(|&v| v >= -1e-10));
        let ones = semigroup_apply(&sys, &vec![1.0; inner.len()], t, 1e-10).unwrap();
        prop_assert!(ones.iter().all(|&v| v <= 1.0 + 1e-10));
    }

    #[test]
    fn semigroup_composes(seed in any::<u64>(), s in 0.05f64..2.0, t in 0.05f64..2.0) {
        let (g, mut r) = graph_from(seed, 15);
        let vs = g.vertices().unwrap();
        let sys = DirichletSystem::from_vertices(&g, &vs).unwrap();
        let f: Vec<f64> = vs.iter().map(|_| r.gen_range(-1.0..1.0)).collect();
        let two = semigroup_apply(&sys, &semigroup_apply(&sys, &f, s, 1e-11).unwrap(), t, 1e-11).unwrap();
        let one = semigroup_apply(&sys, &f, s + t, 1e-11).unwrap();
        for (a, b) in one.iter().zip(&two) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn random_lengths_are_intrinsic(seed in any::<u64>()) {
        let (g, mut r) = graph_from(seed, 25);
        let d = random_intrinsic_metric(&mut r, &g, 0.2);
        let rep = check_intrinsic(&g, &d, &g.vertices().unwrap()).unwrap();
        prop_assert!(rep.intrinsic);
        prop_assert!(io::default_metric(&g, Vertex(0)).is_ok());
    }

    #[test]
    fn refinement_invariants(seed in any::<u64>()) {
        let (g, mut r) = graph_from(seed, 15);
        let d = random_intrinsic_metric(&mut r, &g, 0.2);
        let mut plan = SubdivisionPlan::new();
        for (x, y, _) in g.edges() {
            plan.set(x, y, r.gen_range(1..=4));
        }
        let res = refine(&g, &d, &plan).unwrap();
        let rep = verify_refinement(&res, &g, &d, &[]).unwrap();
        prop_assert!(rep.inserted_slack < 1e-12);
        prop_assert!(rep.original_slack_loss < 1e-12);
        prop_assert!(rep.distance_discrepancy < 1e-12);
        let refined = check_intrinsic(&res.graph, &res.metric, &res.graph.vertices().unwrap()).unwrap();
        prop_assert!(refined.intrinsic);
        let inserted = res.origin.values().filter(|o| matches!(o, Origin::Inserted { .. })).count();
        let planned: usize = plan.iter().map(|(_, n)| n).sum();
        prop_assert_eq!(inserted, planned);
    }

    #[test]
    fn lifted_chains_have_laplacian_minus_one(seed in any::<u64>()) {
        let (g, mut r) = graph_from(seed, 10);
        let d = random_intrinsic_metric(&mut r, &g, 0.5);
        let res = refine(&g, &d, &SubdivisionPlan::uniform(&g, 2)).unwrap();
        let u = values(&mut r, &g.vertices().unwrap());
        let lifted = lift_witness(&res, &u);
        for (&z, o) in &res.origin {
            if matches!(o, Origin::Inserted { .. }) {
                let l = laplacian_apply(&res.graph, &lifted, z).unwrap();
                prop_assert!((l + 0.5).abs() < 1e-9, "L'u' = {} at {}", l, z);
            }
        }
    }

    #[test]
    fn caccioppoli_holds(seed in any::<u64>()) {
        let (g, mut r) = graph_from(seed, 15);
        let vs = g.vertices().unwrap();
        let u = values(&mut r, &vs);
        let keep: BTreeSet<Vertex> = vs.iter().copied().filter(|_| r.gen_bool(0.5)).collect();
        let phi = Field::finite(keep.iter().map(|&x| (x, r.gen_range(-1.0..1.0))));
        let rep = check_caccioppoli(&g, &u, &phi).unwrap();
        prop_assert!(rep.slack >= -1e-10);
    }

    #[test]
    fn balls_grow_with_radius(seed in any::<u64>(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (g, mut r) = graph_from(seed, 25);
        let d = random_intrinsic_metric(&mut r, &g, 0.2);
        let (lo, hi) = (a.min(b), a.max(b));
        let small = ball(&g, &d, lo, 1000).unwrap();
        let large = ball(&g, &d, hi, 1000).unwrap();
        prop_assert!(small.volume <= large.volume);
        let set: BTreeSet<Vertex> = large.vertices.iter().copied().collect();
        prop_assert!(small.vertices.iter().all(|x| set.contains(x)));
    }

    #[test]
    fn edge_files_round_trip(seed in any::<u64>()) {
        let (g, _) = graph_from(seed, 20);
        let again = io::read_graph(&io::write_edges(&g), Some(&io::write_measure(&g)), 64).unwrap();
        prop_assert_eq!(again.edges(), g.edges());
        prop_assert_eq!(io::write_measure(&again), io::write_measure(&g));
    }
}
