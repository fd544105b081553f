//! Built-in example graphs with registered closed forms and oracles.

mod birth_death;
mod huang;
mod laurent;
mod line;

use std::sync::Arc;

pub use birth_death::{
    bd_combinatorial_metric, bd_lazy_graph, bd_length, bd_metric, bd_weight, explosion_series, incompleteness_witness,
    SeriesOracle,
};
pub use huang::{
    huang_distance, huang_lazy_graph, huang_length, huang_metric, huang_truncated, huang_truncated_metric,
    huang_weight, partial_sum, HuangClosedForm,
};
pub use laurent::{
    calibrate_derivative_constant, calibrate_growth_constant, g_derivative, huang_residual, huang_solution,
    huang_solution_dt, laurent_table, HighPrecision, HuangSolution, LaurentRep, ResidualRow, DEFAULT_PRECISION,
};
pub use line::{line_lazy_graph, line_metric, LineClosedForm};

use crate::error::{Error, Result};
use crate::graph::LazyGraph;
use crate::heat::{Completeness, WitnessCertificate};
use crate::metric::EdgeLengthMetric;

/// Serializable description of a registered closed form.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClosedFormRecord {
    pub quantity: String,
    pub kind: String,
    pub coefficients: Vec<f64>,
}

impl ClosedFormRecord {
    fn new(quantity: &str, kind: &str, coefficients: &[f64]) -> Self {
        Self { quantity: quantity.into(), kind: kind.into(), coefficients: coefficients.to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Line,
    Huang,
    BirthDeath(f64),
}

#[derive(Debug, Clone)]
pub struct ZooGraph {
    pub name: String,
    pub family: Family,
    pub graph: Arc<LazyGraph>,
    /// Intrinsic metric, with closed forms where registered.
    pub metric: EdgeLengthMetric,
    /// Metric whose balls form the exhaustion for completeness probes.
    pub probe_metric: EdgeLengthMetric,
    pub probe_radii: Vec<f64>,
    pub oracle: Option<Completeness>,
    pub closed_forms: Vec<ClosedFormRecord>,
    /// Vertex window `lo..=hi` written by exports.
    pub export_window: (i64, i64),
}

impl ZooGraph {
    /// Certificate of incompleteness when the family supplies one.
    pub fn witness(&self, n_max: i64) -> Option<Result<WitnessCertificate>> {
        match self.family {
            Family::BirthDeath(beta) if self.oracle == Some(Completeness::Incomplete) => {
                Some(incompleteness_witness(beta, n_max))
            }
            _ => None,
        }
    }
}

pub fn line_graph() -> ZooGraph {
    let metric = line_metric();
    ZooGraph {
        name: "line".into(),
        family: Family::Line,
        graph: Arc::new(line_lazy_graph()),
        probe_metric: metric.clone(),
        metric,
        probe_radii: vec![10.0, 20.0, 40.0, 80.0],
        oracle: Some(Completeness::Complete),
        closed_forms: vec![
            ClosedFormRecord::new("s_r", "constant", &[std::f64::consts::FRAC_1_SQRT_2]),
            ClosedFormRecord::new("volume", "2*floor(a*r)+1", &[std::f64::consts::SQRT_2]),
        ],
        export_window: (-50, 50),
    }
}

pub fn huang_graph() -> ZooGraph {
    let metric = huang_metric();
    ZooGraph {
        name: "huang".into(),
        family: Family::Huang,
        graph: Arc::new(huang_lazy_graph()),
        probe_metric: metric.clone(),
        metric,
        probe_radii: vec![25.0, 50.0, 100.0, 200.0],
        oracle: Some(Completeness::Complete),
        closed_forms: vec![
            ClosedFormRecord::new("edge_length", "(2n+1)^p for edge (n-1,n) and (-n,-n-1)", &[-0.5]),
            ClosedFormRecord::new("edge_length", "constant on (-1,0)", &[std::f64::consts::FRAC_1_SQRT_2]),
            ClosedFormRecord::new("s_r", "max edge length with inner endpoint at distance >= r", &[]),
            ClosedFormRecord::new("volume", "count of n with d(0,n) <= r", &[]),
            ClosedFormRecord::new("solution", "sum_k binom(n,k)/k! g^(k)(t), g = exp(-t^-2)", &[]),
        ],
        export_window: (-50, 50),
    }
}

pub fn birth_death(beta: f64) -> Result<ZooGraph> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be nonnegative")));
    }
    let oracle = explosion_series(beta);
    Ok(ZooGraph {
        name: format!("birth_death:{beta}"),
        family: Family::BirthDeath(beta),
        graph: Arc::new(bd_lazy_graph(beta)),
        metric: bd_metric(beta),
        probe_metric: bd_combinatorial_metric(),
        probe_radii: vec![250.0, 500.0, 1000.0, 2000.0, 4000.0],
        oracle: Some(oracle.completeness()),
        closed_forms: vec![
            ClosedFormRecord::new("weight", "(n+1)^beta on edge (n,n+1)", &[beta]),
            ClosedFormRecord::new(
                "explosion_series",
                "partial sums of (n+1)^(1-beta)",
                &[oracle.partial_sums.last().map_or(f64::NAN, |p| p.1)],
            ),
        ],
        export_window: (0, 100),
    })
}

pub fn zoo_names() -> Vec<&'static str> {
    vec!["line", "huang", "birth_death:<beta>"]
}

/// `line`, `huang`, `birth_death` (beta = 3) or `birth_death:<beta>`.
pub fn by_name(name: &str) -> Result<ZooGraph> {
    match name {
        "line" => Ok(line_graph()),
        "huang" => Ok(huang_graph()),
        "birth_death" => birth_death(3.0),
        other => match other.strip_prefix("birth_death:") {
            Some(b) => {
                let beta: f64 = b.parse().map_err(|_| Error::InvalidArgument(format!("bad beta `{b}`")))?;
                birth_death(beta)
            }
            None => Err(Error::InvalidArgument(format!("unknown zoo graph `{other}`"))),
        },
    }
}
