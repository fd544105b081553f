//! Birth-death chains on `{0, 1, 2, ...}` with `b(n, n+1) = (n+1)^beta`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Field, LazyGraph, Vertex};
use crate::heat::{Completeness, TailBound, WitnessCertificate};
use crate::metric::{classify_increments, Divergence, EdgeLengthMetric};

/// Weight of the edge `(n, n+1)`.
pub fn bd_weight(beta: f64, n: i64) -> f64 {
    ((n + 1) as f64).powf(beta)
}

fn degree(beta: f64, n: i64) -> f64 {
    bd_weight(beta, n) + if n > 0 { bd_weight(beta, n - 1) } else { 0.0 }
}

/// Length of the edge `(n, n+1)`: `min(1, deg(n)^{-1/2}, deg(n+1)^{-1/2})`.
pub fn bd_length(beta: f64, n: i64) -> f64 {
    degree(beta, n).max(degree(beta, n + 1)).max(1.0).powf(-0.5)
}

pub fn bd_lazy_graph(beta: f64) -> LazyGraph {
    LazyGraph::new(
        move |x| {
            let mut out = vec![(Vertex(x.0 + 1), bd_weight(beta, x.0))];
            if x.0 > 0 {
                out.push((Vertex(x.0 - 1), bd_weight(beta, x.0 - 1)));
            }
            out
        },
        |_| 1.0,
        |x| x.0 >= 0,
        2,
    )
}

fn adjacent(x: Vertex, y: Vertex) -> Option<i64> {
    let (a, b) = if x.0 < y.0 { (x.0, y.0) } else { (y.0, x.0) };
    (b == a + 1 && a >= 0).then_some(a)
}

/// Intrinsic edge-length metric rooted at `0`.
pub fn bd_metric(beta: f64) -> EdgeLengthMetric {
    EdgeLengthMetric::from_fn(Vertex(0), move |x, y| adjacent(x, y).map(|a| bd_length(beta, a))).assume_geodesic()
}

/// Unit lengths; its balls `{0..n}` give the exhaustion used by the probe.
pub fn bd_combinatorial_metric() -> EdgeLengthMetric {
    EdgeLengthMetric::from_fn(Vertex(0), |x, y| adjacent(x, y).map(|_| 1.0)).assume_geodesic()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeriesOracle {
    /// `(N, sum_{n<N} m({0..n}) / b(n, n+1))`.
    pub partial_sums: Vec<(f64, f64)>,
    pub diagnostic: Divergence,
}

impl SeriesOracle {
    pub fn completeness(&self) -> Completeness {
        match self.diagnostic {
            Divergence::ConvergentTrend => Completeness::Incomplete,
            Divergence::DivergentTrend => Completeness::Complete,
        }
    }
}

/// Partial sums of `sum_n (n+1)^{1-beta}` at `N = 10, 100, ..., 10^6`.
pub fn explosion_series(beta: f64) -> SeriesOracle {
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    let mut next = 10u64;
    for n in 0..1_000_000u64 {
        acc += ((n + 1) as f64).powf(1.0 - beta);
        if n + 1 == next {
            partial_sums.push((next as f64, acc));
            next *= 10;
        }
    }
    let diagnostic = classify_increments(&partial_sums);
    SeriesOracle { partial_sums, diagnostic }
}

/// `sum_{j >= a} j^{-q}` for `q > 1` by Euler-Maclaurin at `a`.
fn zeta_tail(q: f64, a: f64) -> f64 {
    a.powf(1.0 - q) / (q - 1.0) + 0.5 * a.powf(-q) + q * a.powf(-q - 1.0) / 12.0
        - q * (q + 1.0) * (q + 2.0) * a.powf(-q - 3.0) / 720.0
}

/// `u(n) = -2 sum_{k >= n} (k+1)^{1-beta}` on `{0..=n_max}`, which has
/// `L u = -2` everywhere, certified with `c = 1` and a tail bound.
pub fn incompleteness_witness(beta: f64, n_max: i64) -> Result<WitnessCertificate> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("witness region needs at least two vertices".into()));
    }
    if explosion_series(beta).completeness() != Completeness::Incomplete || !(beta > 2.0) {
        return Err(Error::WitnessConstructionFailed(format!("explosion series diverges for beta = {beta}")));
    }
    let mut w = vec![0.0; n_max as usize + 1];
    w[n_max as usize] = zeta_tail(beta - 1.0, (n_max + 1) as f64);
    for n in (0..n_max as usize).rev() {
        w[n] = w[n + 1] + ((n + 1) as f64).powf(1.0 - beta);
    }
    if !w.iter().all(|v| v.is_finite()) {
        return Err(Error::WitnessConstructionFailed("tail sums are not finite".into()));
    }
    let u = Field::on_region(w.iter().enumerate().map(|(n, v)| (Vertex(n as i64), -2.0 * v)));
    Ok(WitnessCertificate {
        u,
        alpha: 2.0 * w[0] + 1.0,
        c: 1.0,
        frontier: BTreeSet::from([Vertex(n_max)]),
        tail: Some(TailBound { sup_bound: 0.0, laplacian_bound: -2.0 }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::laplacian_apply;
    use crate::heat::check_omori_yau_witness;
    use crate::metric::check_intrinsic;

    #[test]
    fn oracle_examples() {
        assert_eq!(explosion_series(3.0).completeness(), Completeness::Incomplete);
        assert_eq!(explosion_series(1.0).completeness(), Completeness::Complete);
        assert_eq!(explosion_series(2.0).completeness(), Completeness::Complete);
        let last = explosion_series(3.0).partial_sums.last().unwrap().1;
        assert!((last - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-5);
    }

    #[test]
    fn metric_is_intrinsic() {
        for beta in [0.0, 1.0, 3.0, 4.5] {
            let g = bd_lazy_graph(beta);
            let probe: Vec<Vertex> = (0..300).map(Vertex).collect();
            assert!(check_intrinsic(&g, &bd_metric(beta), &probe).unwrap().intrinsic, "beta = {beta}");
        }
    }

    #[test]
    fn cubic_weights_have_finite_diameter() {
        let total: f64 = (0..1_000_000).map(|n| bd_length(3.0, n)).sum();
        let head: f64 = (0..1000).map(|n| bd_length(3.0, n)).sum();
        assert!(total - head < 0.05);
        let ball = crate::metric::ball(&bd_lazy_graph(3.0), &bd_metric(3.0), total + 1.0, 10_000).unwrap();
        assert!(ball.truncated);
    }

    #[test]
    fn zeta_tail_accuracy() {
        let direct: f64 = (50..2_000_000).map(|j| (j as f64).powi(-2)).sum::<f64>() + 1.0 / 2_000_000.0;
        assert!((zeta_tail(2.0, 50.0) - direct).abs() < 1e-12);
    }

    #[test]
    fn witness_laplacian_is_minus_two() {
        let g = bd_lazy_graph(3.0);
        let w = incompleteness_witness(3.0, 40).unwrap();
        for n in 0..40 {
            let l = laplacian_apply(&g, &w.u, Vertex(n)).unwrap();
            assert!((l + 2.0).abs() < 1e-9, "{n}: {l}");
        }
        let v = check_omori_yau_witness(&g, &w, 1000).unwrap();
        assert!(v.accepted);
        assert_eq!(v.sup, 0.0);
    }

    #[test]
    fn complete_chain_has_no_witness() {
        assert!(matches!(incompleteness_witness(1.0, 40), Err(Error::WitnessConstructionFailed(_))));
    }
}
