//! Resolving a graph from files or a zoo name.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use heatlab::heat::Completeness;
use heatlab::metric::{ball, EdgeLengthMetric};
use heatlab::zoo::{by_name, ZooGraph};
use heatlab::{io, FiniteGraph, Graph, Vertex};

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Built-in graph: line, huang or birth_death:<beta>.
    #[arg(long, conflicts_with = "edges")]
    pub zoo: Option<String>,
    /// Edge list with lines `x y weight`.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Measure file with lines `x m`; missing vertices get measure 1.
    #[arg(long, requires = "edges")]
    pub measure: Option<PathBuf>,
    /// Metric file with lines `x y length`; defaults to the intrinsic
    /// lengths `min sqrt(m/Deg)` over the endpoints.
    #[arg(long, requires = "edges")]
    pub metric: Option<PathBuf>,
    /// Reference vertex.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub root: i64,
    /// Largest admissible vertex degree.
    #[arg(long, default_value_t = 65_536)]
    pub degree_bound: usize,
}

pub struct Source {
    pub graph: Arc<dyn Graph>,
    pub metric: EdgeLengthMetric,
    pub probe_metric: EdgeLengthMetric,
    pub probe_radii: Vec<f64>,
    pub oracle: Option<Completeness>,
    pub finite: Option<FiniteGraph>,
    pub zoo: Option<ZooGraph>,
}

pub fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(heatlab::Error::from).with_context(|| format!("reading {}", path.display()))
}

impl GraphArgs {
    pub fn load(&self) -> Result<Source> {
        match (&self.zoo, &self.edges) {
            (Some(name), _) => {
                let z = by_name(name)?;
                let metric = z.metric.clone().with_root(Vertex(self.root));
                Ok(Source {
                    graph: z.graph.clone(),
                    probe_metric: z.probe_metric.clone().with_root(Vertex(self.root)),
                    metric,
                    probe_radii: z.probe_radii.clone(),
                    oracle: z.oracle,
                    finite: None,
                    zoo: Some(z),
                })
            }
            (None, Some(edges)) => {
                let measure = self.measure.as_ref().map(read).transpose()?;
                let g = io::read_graph(&read(edges)?, measure.as_deref(), self.degree_bound)?;
                let root = Vertex(self.root);
                if !g.contains(root) {
                    return Err(heatlab::Error::UnknownVertex(root).into());
                }
                let metric = match &self.metric {
                    Some(p) => io::parse_metric(&read(p)?, &g, root)?,
                    None => io::default_metric(&g, root)?,
                };
                let far = metric.distances(&g, f64::INFINITY, usize::MAX)?;
                let diameter = far.order.last().map_or(0.0, |p| p.1);
                Ok(Source {
                    graph: Arc::new(g.clone()),
                    probe_metric: metric.clone(),
                    metric,
                    probe_radii: vec![diameter.max(1.0)],
                    oracle: Some(Completeness::Complete),
                    finite: Some(g),
                    zoo: None,
                })
            }
            (None, None) => bail!(heatlab::Error::InvalidArgument("give either --zoo or --edges".into())),
        }
    }
}

impl Source {
    /// A finite graph on which semigroup solutions are genuine solutions:
    /// the file graph itself, or the zoo graph induced on a ball.
    pub fn finite_domain(&self, radius: f64, budget: usize) -> Result<(FiniteGraph, EdgeLengthMetric)> {
        if let Some(g) = &self.finite {
            return Ok((g.clone(), self.metric.clone()));
        }
        let z = self.zoo.as_ref().expect("zoo source");
        let b = ball(self.graph.as_ref(), &self.metric, radius, budget)?;
        if b.truncated {
            return Err(heatlab::Error::TruncatedBall { radius, budget }.into());
        }
        let keep: BTreeSet<Vertex> = b.vertices.into_iter().collect();
        let g = z.graph.restrict(&keep)?;
        Ok((g, self.metric.clone().without_closed_form()))
    }
}
