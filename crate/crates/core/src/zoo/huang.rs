//! The graph on the integers with `b(n-1, n) = b(-n, -n-1) = n`,
//! `b(-1, 0) = 1`, `m = 1`, and its intrinsic metric with `s_r ~ 1/r`.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::graph::{FiniteGraph, LazyGraph, Vertex};
use crate::metric::{EdgeLengthMetric, MetricClosedForm};

const PREFIX_LEN: usize = 4096;

/// Weight of the edge `(a, a+1)`.
pub fn huang_weight(a: i64) -> f64 {
    match a {
        a if a >= 0 => (a + 1) as f64,
        -1 => 1.0,
        a => (-a - 1) as f64,
    }
}

/// Length of the edge `(a, a+1)`.
pub fn huang_length(a: i64) -> f64 {
    match a {
        a if a >= 0 => (2.0 * a as f64 + 3.0).powf(-0.5),
        -1 => std::f64::consts::FRAC_1_SQRT_2,
        a => (2.0 * (-a - 1) as f64 + 1.0).powf(-0.5),
    }
}

fn term(j: f64) -> f64 {
    (2.0 * j + 1.0).powf(-0.5)
}

fn prefix() -> &'static [f64] {
    static P: OnceLock<Vec<f64>> = OnceLock::new();
    P.get_or_init(|| {
        let mut p = vec![0.0; PREFIX_LEN + 1];
        for j in 1..=PREFIX_LEN {
            p[j] = p[j - 1] + term(j as f64);
        }
        p
    })
}

/// `S(n) = sum_{j=1}^{n} (2j+1)^{-1/2}`, the distance from `0` to `n >= 0`.
pub fn partial_sum(n: u64) -> f64 {
    let p = prefix();
    if (n as usize) <= PREFIX_LEN {
        return p[n as usize];
    }
    // Euler-Maclaurin for sum_{j=a}^{b} h(j), h(x) = (2x+1)^{-1/2}
    let (a, b) = ((PREFIX_LEN + 1) as f64, n as f64);
    let integral = (2.0 * b + 1.0).sqrt() - (2.0 * a + 1.0).sqrt();
    let d1 = |x: f64| -(2.0 * x + 1.0).powf(-1.5);
    let d3 = |x: f64| -15.0 * (2.0 * x + 1.0).powf(-3.5);
    p[PREFIX_LEN] + integral + 0.5 * (term(a) + term(b)) + (d1(b) - d1(a)) / 12.0 - (d3(b) - d3(a)) / 720.0
}

/// `d(0, n)` for any integer `n`.
pub fn huang_distance(n: i64) -> f64 {
    if n >= 0 {
        partial_sum(n as u64)
    } else {
        std::f64::consts::FRAC_1_SQRT_2 + partial_sum((-n - 1) as u64)
    }
}

/// Smallest `k >= 0` with `offset + S(k) >= r`.
fn first_at_least(r: f64, offset: f64) -> u64 {
    if offset >= r {
        return 0;
    }
    let mut hi: u64 = 1;
    while offset + partial_sum(hi) < r {
        hi *= 2;
    }
    let mut lo = 0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if offset + partial_sum(mid) >= r {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Registered closed forms for the huang metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct HuangClosedForm;

impl MetricClosedForm for HuangClosedForm {
    fn jump_size_outside(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return std::f64::consts::FRAC_1_SQRT_2;
        }
        // the positive edge (a, a+1) has inner endpoint a, distance S(a)
        let a = first_at_least(r, 0.0);
        // the negative edge (-k-1, -k), k >= 1, has inner endpoint -k at
        // distance 1/sqrt 2 + S(k-1)
        let k = first_at_least(r, std::f64::consts::FRAC_1_SQRT_2) + 1;
        huang_length(a as i64).max(huang_length(-(k as i64) - 1))
    }

    fn volume(&self, r: f64) -> Option<f64> {
        if r < 0.0 {
            return Some(0.0);
        }
        // vertices 0..=a with S(a) <= r, and -1..=-k with 1/sqrt 2 + S(k-1) <= r
        let pos = first_at_least(r.next_up(), 0.0);
        let neg = if std::f64::consts::FRAC_1_SQRT_2 <= r {
            first_at_least(r.next_up(), std::f64::consts::FRAC_1_SQRT_2)
        } else {
            0
        };
        Some((pos + neg) as f64)
    }
}

pub fn huang_lazy_graph() -> LazyGraph {
    LazyGraph::new(
        |x| vec![(Vertex(x.0 - 1), huang_weight(x.0 - 1)), (Vertex(x.0 + 1), huang_weight(x.0))],
        |_| 1.0,
        |_| true,
        2,
    )
}

fn length_between(x: Vertex, y: Vertex) -> Option<f64> {
    let (a, b) = if x.0 < y.0 { (x.0, y.0) } else { (y.0, x.0) };
    (b == a + 1).then(|| huang_length(a))
}

pub fn huang_metric() -> EdgeLengthMetric {
    EdgeLengthMetric::from_fn(Vertex(0), length_between)
        .assume_geodesic()
        .with_closed_form(std::sync::Arc::new(HuangClosedForm))
}

/// Induced subgraph on `-n-1..=n`.
pub fn huang_truncated(n: i64) -> FiniteGraph {
    let keep: BTreeSet<Vertex> = (-n - 1..=n).map(Vertex).collect();
    huang_lazy_graph().restrict(&keep).expect("huang graph is locally finite")
}

/// Table metric on the truncated graph, without closed forms.
pub fn huang_truncated_metric(n: i64) -> EdgeLengthMetric {
    EdgeLengthMetric::from_table(Vertex(0), (-n - 1..n).map(|a| ((Vertex(a), Vertex(a + 1)), huang_length(a))))
        .assume_geodesic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::metric::{ball, check_intrinsic, JumpProfile};

    #[test]
    fn euler_maclaurin_matches_direct_sum() {
        let mut direct = 0.0;
        for j in 1..=100_000u64 {
            direct += term(j as f64);
            if j > PREFIX_LEN as u64 && j % 9973 == 0 {
                assert!((partial_sum(j) - direct).abs() < 1e-11, "{j}");
            }
        }
    }

    #[test]
    fn intrinsic_everywhere_on_a_window() {
        let g = huang_lazy_graph();
        let d = huang_metric();
        let probe: Vec<Vertex> = (-200..200).map(Vertex).collect();
        let rep = check_intrinsic(&g, &d, &probe).unwrap();
        assert!(rep.intrinsic);
        for n in 1..200i64 {
            let nf = n as f64;
            let expect = 1.0 - nf / (2.0 * nf + 1.0) - (nf + 1.0) / (2.0 * nf + 3.0);
            let slack = rep.slacks.iter().find(|(x, _)| x.0 == n).unwrap().1;
            assert!((slack - expect).abs() < 1e-14);
            let mirror = rep.slacks.iter().find(|(x, _)| x.0 == -n - 1).unwrap().1;
            assert!((mirror - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn distance_squared_comparable_to_index() {
        for n in 1..5000i64 {
            let d = huang_distance(n);
            let ratio = n as f64 / (d * d);
            assert!(ratio > 0.25 && ratio < 4.0, "{n}: {ratio}");
        }
    }

    #[test]
    fn closed_forms_agree_with_enumeration() {
        let g = huang_lazy_graph();
        let d = huang_metric();
        let n = 400;
        let fg = huang_truncated(n);
        let fd = huang_truncated_metric(n);
        let profile = JumpProfile::new(&fg, &fd, 10_000).unwrap();
        let cf = HuangClosedForm;
        for r in [0.0, 0.3, 0.71, 1.0, 2.5, 5.0, 9.7, 14.0] {
            assert_eq!(cf.jump_size_outside(r), profile.outside(r), "s_r at {r}");
            let b = ball(&g, &d, r, 100_000).unwrap();
            assert_eq!(cf.volume(r).unwrap(), b.volume, "volume at {r}");
            assert!(
                (b.volume - fg.vertices().unwrap().iter().filter(|x| huang_distance(x.0) <= r).count() as f64).abs()
                    < 0.5
            );
        }
    }

    #[test]
    fn jump_size_decays_like_inverse_radius() {
        let cf = HuangClosedForm;
        for r in [1.0, 10.0, 100.0, 1000.0, 1e4] {
            let p = cf.jump_size_outside(r) * r;
            assert!(p > 0.3 && p < 1.5, "{r}: {p}");
        }
        assert_eq!(cf.jump_size_outside(0.0), std::f64::consts::FRAC_1_SQRT_2);
    }
}
