//! Mass deficits of Dirichlet exhaustions.

use rayon::prelude::*;

use super::dirichlet::{dirichlet_restriction, DirichletSystem};
use super::expm::Semigroup;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metric::{ball, EdgeLengthMetric, DEFAULT_BUDGET};

pub const DEFAULT_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_RTOL: f64 = 1e-8;
const COMPLETE_THRESHOLD: f64 = 1e-3;
const STABLE_SPREAD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Completeness {
    Complete,
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ProbeVerdict {
    CompleteTrend,
    IncompleteTrend,
    Inconclusive,
}

impl std::fmt::Display for ProbeVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProbeVerdict::CompleteTrend => "complete-trend",
            ProbeVerdict::IncompleteTrend => "incomplete-trend",
            ProbeVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeRow {
    pub radius: f64,
    pub time: f64,
    pub ball_size: usize,
    pub deficit: f64,
    pub monotone_ok: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CompletenessReport {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub rtol: f64,
    /// Ordered by radius, then time.
    pub rows: Vec<ProbeRow>,
    pub verdict: ProbeVerdict,
    pub diagnostics: Vec<String>,
}

impl CompletenessReport {
    pub fn deficit(&self, radius_index: usize, time_index: usize) -> f64 {
        self.rows[radius_index * self.times.len() + time_index].deficit
    }
}

#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub rtol: f64,
    pub budget: usize,
    pub oracle: Option<Completeness>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, budget: DEFAULT_BUDGET, oracle: None }
    }
}

/// `1 - (e^{-t L_R} 1_{B_R})(o)` on every ball and time, with a trend verdict.
///
/// Complete-trend: every deficit at the largest radius is below `1e-3`.
/// Incomplete-trend: at some time the deficits on the last three radii,
/// each at least double the previous, exceed `10 rtol` and agree to 10%.
/// An oracle that disagrees with the trend downgrades it to inconclusive.
pub fn completeness_probe(
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    radii: &[f64],
    times: &[f64],
    opts: &ProbeOptions,
) -> Result<CompletenessReport> {
    if radii.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("probe needs at least one radius and one time".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be increasing".into()));
    }
    let o = d.root();
    let systems: Vec<DirichletSystem> = radii
        .iter()
        .map(|&r| {
            let b = ball(g, d, r, opts.budget)?;
            if b.truncated {
                return Err(Error::TruncatedBall { radius: r, budget: opts.budget });
            }
            dirichlet_restriction(g, &b)
        })
        .collect::<Result<_>>()?;
    let deficits: Vec<Vec<f64>> = systems
        .par_iter()
        .map(|sys| {
            let sg = Semigroup::new(sys)?;
            let ones = vec![1.0; sys.len()];
            let io = sys.index_of(o).ok_or(Error::UnknownVertex(o))?;
            times.iter().map(|&t| Ok(1.0 - sg.apply(&ones, t, opts.rtol)?[io])).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(radii.len() * times.len());
    let mut diagnostics = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        for (j, &t) in times.iter().enumerate() {
            let monotone_ok = i == 0 || deficits[i][j] <= deficits[i - 1][j] + 2.0 * opts.rtol;
            if !monotone_ok {
                diagnostics.push(format!("deficit increased from R = {} to R = {r} at t = {t}", radii[i - 1]));
            }
            rows.push(ProbeRow {
                radius: r,
                time: t,
                ball_size: systems[i].len(),
                deficit: deficits[i][j],
                monotone_ok,
            });
        }
    }

    let last = deficits.last().unwrap();
    let mut verdict = if last.iter().all(|&v| v < COMPLETE_THRESHOLD) {
        ProbeVerdict::CompleteTrend
    } else if stabilized(radii, &deficits, opts.rtol) {
        ProbeVerdict::IncompleteTrend
    } else {
        ProbeVerdict::Inconclusive
    };
    match (verdict, opts.oracle) {
        (ProbeVerdict::IncompleteTrend, Some(Completeness::Complete))
        | (ProbeVerdict::CompleteTrend, Some(Completeness::Incomplete)) => {
            diagnostics.push(format!("{verdict} contradicts the registered oracle"));
            verdict = ProbeVerdict::Inconclusive;
        }
        (ProbeVerdict::IncompleteTrend, None) => {
            diagnostics.push("incomplete-trend without oracle corroboration".into());
        }
        (ProbeVerdict::IncompleteTrend, Some(Completeness::Incomplete)) => {
            diagnostics.push("incomplete-trend corroborated by oracle".into());
        }
        _ => {}
    }
    Ok(CompletenessReport { radii: radii.to_vec(), times: times.to_vec(), rtol: opts.rtol, rows, verdict, diagnostics })
}

fn stabilized(radii: &[f64], deficits: &[Vec<f64>], rtol: f64) -> bool {
    let n = radii.len();
    if n < 3 {
        return false;
    }
    let doubling = radii[n - 3..].windows(2).all(|w| w[1] >= 2.0 * w[0]);
    if !doubling {
        return false;
    }
    (0..deficits[0].len()).any(|j| {
        let tail: Vec<f64> = deficits[n - 3..].iter().map(|row| row[j]).collect();
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lo > 10.0 * rtol && (hi - lo) <= STABLE_SPREAD * hi
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraph, Vertex};

    #[test]
    fn finite_graph_has_no_deficit() {
        let mut g = FiniteGraph::path(6, 1.0);
        g.add_edge(Vertex(1), Vertex(5), 2.0).unwrap();
        let d = EdgeLengthMetric::uniform(Vertex(0), 0.5);
        let rep = completeness_probe(&g, &d, &[1.0, 10.0], &DEFAULT_TIMES, &ProbeOptions::default()).unwrap();
        for j in 0..3 {
            assert!(rep.deficit(1, j).abs() < 1e-8);
        }
        assert!(rep.rows.iter().all(|r| r.monotone_ok));
        assert_eq!(rep.verdict, ProbeVerdict::CompleteTrend);
    }

    #[test]
    fn oracle_disagreement_downgrades() {
        let g = FiniteGraph::path(3, 1.0);
        let d = EdgeLengthMetric::uniform(Vertex(0), 1.0);
        let opts = ProbeOptions { oracle: Some(Completeness::Incomplete), ..Default::default() };
        let rep = completeness_probe(&g, &d, &[5.0], &[1.0], &opts).unwrap();
        assert_eq!(rep.verdict, ProbeVerdict::Inconclusive);
    }
}
