//! Certificates of stochastic incompleteness: a function bounded above
//! whose Laplacian is uniformly negative near its supremum.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{laplacian_apply, Field, Graph, Vertex};
use crate::refinement::{lift_witness, RefinementResult};

/// Claims about the witness off the enumerated region.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailBound {
    /// Upper bound for `u` off the region.
    pub sup_bound: f64,
    /// Upper bound for `L u` off the region.
    pub laplacian_bound: f64,
}

#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    /// Values on the enumerated region.
    pub u: Field,
    pub alpha: f64,
    pub c: f64,
    /// Region vertices whose neighborhoods are not fully enumerated; they
    /// are covered by the tail bound.
    pub frontier: BTreeSet<Vertex>,
    pub tail: Option<TailBound>,
}

impl WitnessCertificate {
    /// Supremum over the region and the declared tail.
    pub fn sup(&self) -> f64 {
        let region = self.u.entries().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        let region = match self.u.rest() {
            Some(r) => region.max(r),
            None => region,
        };
        self.tail.map_or(region, |t| region.max(t.sup_bound))
    }

    /// `{ x in region : u(x) > sup u - alpha }`.
    pub fn omega(&self) -> Vec<Vertex> {
        let level = self.sup() - self.alpha;
        self.u.entries().filter(|&(_, v)| v > level).map(|(x, _)| x).collect()
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct WitnessVerdict {
    pub accepted: bool,
    pub sup: f64,
    pub omega_size: usize,
    /// Largest `L u` over the checked part of the level set.
    pub max_laplacian: f64,
    /// Level-set vertices where `L u < -c` fails.
    pub failures: Vec<Vertex>,
    pub tail_used: bool,
}

fn tolerance(c: f64) -> f64 {
    1e-10 * c.max(1.0)
}

/// Accepts iff `sup u < inf` and `L u < -c` on the level set
/// `{u > sup u - alpha}`; the tolerance `1e-10 max(1, c)` admits the
/// exact equality on refined chains.
pub fn check_omori_yau_witness(g: &dyn Graph, w: &WitnessCertificate, budget: usize) -> Result<WitnessVerdict> {
    if !(w.alpha > 0.0 && w.c > 0.0) {
        return Err(Error::InvalidArgument(format!("need alpha > 0 and c > 0 (alpha = {}, c = {})", w.alpha, w.c)));
    }
    let region = w.u.region();
    if region.len() > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    let mut frontier = w.frontier.clone();
    for &x in &region {
        if frontier.contains(&x) {
            continue;
        }
        let covered = g.neighbors(x)?.iter().all(|(y, _)| w.u.get(*y).is_some());
        if !covered {
            frontier.insert(x);
        }
    }
    let graph_covered = match g.vertices() {
        Some(all) => all.iter().all(|x| w.u.get(*x).is_some()),
        None => false,
    };
    let needs_tail = !frontier.is_empty() || !graph_covered;
    if needs_tail && w.tail.is_none() {
        return Err(Error::MissingTailBound);
    }
    let sup = w.sup();
    if !sup.is_finite() {
        return Ok(WitnessVerdict {
            accepted: false,
            sup,
            omega_size: 0,
            max_laplacian: f64::NAN,
            failures: vec![],
            tail_used: needs_tail,
        });
    }
    let threshold = -w.c + tolerance(w.c);
    let omega = w.omega();
    let mut failures = Vec::new();
    let mut max_laplacian = f64::NEG_INFINITY;
    let mut checked = 0;
    for &x in &omega {
        if frontier.contains(&x) {
            continue;
        }
        checked += 1;
        let l = laplacian_apply(g, &w.u, x)?;
        max_laplacian = max_laplacian.max(l);
        if !(l < threshold) {
            failures.push(x);
        }
    }
    let mut accepted = failures.is_empty();
    if needs_tail {
        let tail = w.tail.unwrap();
        let tail_reaches_level = tail.sup_bound > sup - w.alpha;
        if tail_reaches_level && !(tail.laplacian_bound < threshold) {
            accepted = false;
        }
        if checked == 0 && !tail_reaches_level {
            accepted = false;
        }
    } else if checked == 0 {
        accepted = false;
    }
    Ok(WitnessVerdict { accepted, sup, omega_size: omega.len(), max_laplacian, failures, tail_used: needs_tail })
}

/// Transports a certificate for `g` to a refinement: `u / c` is lifted
/// along the chains, giving constant `1/2` and level `alpha / c`.
pub fn lift_certificate(res: &RefinementResult, w: &WitnessCertificate) -> WitnessCertificate {
    let scaled = w.u.map(|v| v / w.c);
    WitnessCertificate {
        u: lift_witness(res, &scaled),
        alpha: w.alpha / w.c,
        c: 0.5,
        frontier: w.frontier.clone(),
        tail: w.tail.map(|t| TailBound { sup_bound: t.sup_bound / w.c, laplacian_bound: -0.5 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiniteGraph;

    #[test]
    fn finite_graph_witness_is_rejected() {
        let g = FiniteGraph::path(4, 1.0);
        let u = Field::on_region([(Vertex(0), -3.0), (Vertex(1), -1.0), (Vertex(2), 0.0), (Vertex(3), -2.0)]);
        let w = WitnessCertificate { u, alpha: 0.5, c: 0.1, frontier: BTreeSet::new(), tail: None };
        let v = check_omori_yau_witness(&g, &w, 100).unwrap();
        assert!(!v.accepted);
        assert!(v.max_laplacian >= 0.0);
    }

    #[test]
    fn open_region_needs_tail() {
        let g = FiniteGraph::path(4, 1.0);
        let u = Field::on_region([(Vertex(0), 0.0), (Vertex(1), 0.0)]);
        let w = WitnessCertificate { u, alpha: 0.5, c: 1.0, frontier: BTreeSet::new(), tail: None };
        assert_eq!(check_omori_yau_witness(&g, &w, 100).unwrap_err(), Error::MissingTailBound);
    }

    #[test]
    fn budget_is_enforced() {
        let g = FiniteGraph::path(4, 1.0);
        let u = Field::on_region((0..4).map(|i| (Vertex(i), 0.0)));
        let w = WitnessCertificate { u, alpha: 0.5, c: 1.0, frontier: BTreeSet::new(), tail: None };
        assert_eq!(check_omori_yau_witness(&g, &w, 2).unwrap_err(), Error::BudgetExceeded(2));
    }
}
