//! The integer line with unit weights and edge lengths `1/sqrt 2`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::Arc;

use crate::graph::{LazyGraph, Vertex};
use crate::metric::{EdgeLengthMetric, MetricClosedForm};

#[derive(Debug, Clone, Copy, Default)]
pub struct LineClosedForm;

impl MetricClosedForm for LineClosedForm {
    fn jump_size_outside(&self, _r: f64) -> f64 {
        FRAC_1_SQRT_2
    }

    fn volume(&self, r: f64) -> Option<f64> {
        if r < 0.0 {
            return Some(0.0);
        }
        Some(2.0 * (r * SQRT_2).floor() + 1.0)
    }
}

pub fn line_lazy_graph() -> LazyGraph {
    LazyGraph::new(|x| vec![(Vertex(x.0 - 1), 1.0), (Vertex(x.0 + 1), 1.0)], |_| 1.0, |_| true, 2)
}

pub fn line_metric() -> EdgeLengthMetric {
    EdgeLengthMetric::from_fn(Vertex(0), |x, y| ((x.0 - y.0).abs() == 1).then_some(FRAC_1_SQRT_2))
        .assume_geodesic()
        .with_closed_form(Arc::new(LineClosedForm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ball, check_intrinsic};

    #[test]
    fn zero_slack() {
        let rep = check_intrinsic(&line_lazy_graph(), &line_metric(), &[Vertex(0), Vertex(-7)]).unwrap();
        assert!(rep.slacks.iter().all(|(_, s)| s.abs() < 1e-15));
    }

    #[test]
    fn volume_formula_matches_enumeration() {
        let (g, d) = (line_lazy_graph(), line_metric());
        for r in [0.0, 0.5, 0.8, 3.3, 10.1, 57.9] {
            assert_eq!(ball(&g, &d, r, 10_000).unwrap().volume, LineClosedForm.volume(r).unwrap(), "{r}");
        }
    }
}
