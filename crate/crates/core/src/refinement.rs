//! Edge subdivision: choosing the number of inserted vertices per edge,
//! building the refined graph and metric, and transporting functions to it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Field, FiniteGraph, Graph, Vertex};
use crate::metric::{ball, EdgeLengthMetric, GrowthFunction, DEFAULT_BUDGET};

/// Number of vertices to insert on every edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubdivisionPlan {
    n: BTreeMap<(Vertex, Vertex), usize>,
}

fn ordered(x: Vertex, y: Vertex) -> (Vertex, Vertex) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

impl SubdivisionPlan {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same `n` on every edge of a finite graph.
    pub fn uniform(g: &FiniteGraph, n: usize) -> Self {
        let mut plan = Self::new();
        for (x, y, _) in g.edges() {
            plan.set(x, y, n);
        }
        plan
    }

    pub fn set(&mut self, x: Vertex, y: Vertex, n: usize) {
        self.n.insert(ordered(x, y), n);
    }

    /// `n(x, y)`; zero for pairs not in the plan.
    pub fn get(&self, x: Vertex, y: Vertex) -> usize {
        self.n.get(&ordered(x, y)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Vertex, Vertex), usize)> + '_ {
        self.n.iter().map(|(&k, &v)| (k, v))
    }
}

fn explicit_vertices(g: &dyn Graph) -> Result<Vec<Vertex>> {
    g.vertices().ok_or_else(|| Error::InvalidArgument("refinement needs an explicit vertex set".into()))
}

fn explicit_edges(g: &dyn Graph, vertices: &[Vertex]) -> Result<Vec<(Vertex, Vertex, f64)>> {
    let mut edges = Vec::new();
    for &x in vertices {
        for (y, w) in g.neighbors(x)? {
            if x < y && w > 0.0 {
                edges.push((x, y, w));
            }
        }
    }
    Ok(edges)
}

/// Smallest admissible `n` per edge so that chain steps stay below `gfun`:
/// `n + 1 >= d(x,y) / inf_{[1, r_xy]} gfun` with
/// `r_xy = max(d(x,o), d(y,o)) + d(x,y)`, and `n >= 1`.
pub fn choose_n(g: &dyn Graph, d: &EdgeLengthMetric, gfun: &GrowthFunction) -> Result<SubdivisionPlan> {
    let vertices = explicit_vertices(g)?;
    let dist = d.distances(g, f64::INFINITY, DEFAULT_BUDGET)?;
    let mut plan = SubdivisionPlan::new();
    for (x, y, _) in explicit_edges(g, &vertices)? {
        let dxy = d.edge_distance(g, x, y)?;
        let far = dist.distance(x).unwrap_or(0.0).max(dist.distance(y).unwrap_or(0.0));
        let r_xy = (far + dxy).max(1.0);
        let lower = gfun.inf_on(1.0, r_xy);
        if !(lower > 0.0) {
            return Err(Error::NonPositiveBound(r_xy));
        }
        let steps = (dxy / lower).ceil();
        plan.set(x, y, (steps as usize).saturating_sub(1).max(1));
    }
    Ok(plan)
}

/// Inserted path `x = x_0, x_1, ..., x_n, x_{n+1} = y` for one original edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub edge_id: usize,
    pub x: Vertex,
    pub y: Vertex,
    /// Induced distance `d(x, y)` of the original edge.
    pub length: f64,
    pub weight: f64,
    pub inserted: Vec<Vertex>,
}

impl Chain {
    pub fn n(&self) -> usize {
        self.inserted.len()
    }

    /// All chain vertices from `x` to `y`.
    pub fn path(&self) -> Vec<Vertex> {
        let mut p = Vec::with_capacity(self.inserted.len() + 2);
        p.push(self.x);
        p.extend_from_slice(&self.inserted);
        p.push(self.y);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Original,
    Inserted { edge_id: usize, index: usize },
}

#[derive(Debug, Clone)]
pub struct RefinementResult {
    pub graph: FiniteGraph,
    pub metric: EdgeLengthMetric,
    pub chains: Vec<Chain>,
    pub origin: BTreeMap<Vertex, Origin>,
}

impl RefinementResult {
    /// Chain lengths `d(x,y) / (n+1)` as `(x, y, len)` triples.
    pub fn lengths(&self) -> Vec<(Vertex, Vertex, f64)> {
        let mut out = Vec::new();
        for c in &self.chains {
            let h = c.length / (c.n() + 1) as f64;
            for w in c.path().windows(2) {
                out.push((w[0], w[1], h));
            }
        }
        out
    }
}

/// Builds the refinement of `g` along `plan`.
///
/// Inserted vertices get fresh ids above the largest original id, assigned
/// chain by chain in edge order and along each chain from the smaller
/// endpoint. The refined metric has chain lengths `d(x,y)/(n+1)` and is
/// geodesic on chain edges.
pub fn refine(g: &dyn Graph, d: &EdgeLengthMetric, plan: &SubdivisionPlan) -> Result<RefinementResult> {
    let vertices = explicit_vertices(g)?;
    let edges = explicit_edges(g, &vertices)?;
    let mut out = FiniteGraph::new();
    let mut origin = BTreeMap::new();
    for &x in &vertices {
        out.add_vertex(x, g.measure(x));
        origin.insert(x, Origin::Original);
    }
    let mut next = vertices.iter().map(|v| v.0).max().map_or(0, |m| m + 1);
    let mut chains = Vec::with_capacity(edges.len());
    let mut lengths = Vec::new();
    for (edge_id, &(x, y, w)) in edges.iter().enumerate() {
        let n = plan.get(x, y);
        if n == 0 {
            return Err(Error::InvalidArgument(format!("plan has n = 0 on edge ({x}, {y})")));
        }
        let dxy = d.edge_distance(g, x, y)?;
        let steps = (n + 1) as f64;
        let inner_measure = 2.0 * w * dxy * dxy / steps;
        let inserted: Vec<Vertex> = (0..n as i64).map(|i| Vertex(next + i)).collect();
        next += n as i64;
        for (index, &z) in inserted.iter().enumerate() {
            out.add_vertex(z, inner_measure);
            origin.insert(z, Origin::Inserted { edge_id, index: index + 1 });
        }
        let chain = Chain { edge_id, x, y, length: dxy, weight: w, inserted };
        for pair in chain.path().windows(2) {
            out.add_edge(pair[0], pair[1], w * steps)?;
            lengths.push(((pair[0], pair[1]), dxy / steps));
        }
        chains.push(chain);
    }
    for x in plan.n.keys().flat_map(|&(a, b)| [a, b]) {
        if !g.contains(x) {
            return Err(Error::UnknownVertex(x));
        }
    }
    let metric = EdgeLengthMetric::from_table(d.root(), lengths).assume_geodesic();
    Ok(RefinementResult { graph: out, metric, chains, origin })
}

#[derive(Debug, Clone)]
pub struct SandwichRow {
    pub r: f64,
    pub volume: f64,
    pub refined_volume: f64,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct RefinementReport {
    /// Largest `|m'(z) - sum b' d'^2|` over inserted vertices.
    pub inserted_slack: f64,
    /// Largest decrease of the intrinsic slack at original vertices; the
    /// slack can only grow since `b' d'^2 = b d^2 / (n+1)` there.
    pub original_slack_loss: f64,
    pub sandwich: Vec<SandwichRow>,
    /// Largest `|d'(o,x) - d(o,x)|` over original vertices.
    pub distance_discrepancy: f64,
    /// `B'_r` finite exactly when `B_r` is, at every grid radius.
    pub finiteness_agrees: bool,
}

impl RefinementReport {
    pub fn passed(&self) -> bool {
        self.inserted_slack < 1e-12
            && self.original_slack_loss < 1e-12
            && self.distance_discrepancy < 1e-12
            && self.finiteness_agrees
            && self.sandwich.iter().all(|r| r.ok)
    }
}

const SANDWICH_TOL: f64 = 1e-12;

fn slack_at(g: &dyn Graph, d: &EdgeLengthMetric, x: Vertex) -> Result<f64> {
    let mut acc = 0.0;
    for (y, w) in g.neighbors(x)? {
        acc += w * d.edge_distance(g, x, y)?.powi(2);
    }
    Ok(g.measure(x) - acc)
}

/// Checks the intrinsic equality at inserted vertices, the volume sandwich
/// `m(B_r) <= m'(B'_r) <= 2 m(B_r)` on `r_grid`, and agreement of distances.
pub fn verify_refinement(
    res: &RefinementResult,
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    r_grid: &[f64],
) -> Result<RefinementReport> {
    let refined = &res.graph;
    let mut inserted_slack: f64 = 0.0;
    let mut original_slack_loss: f64 = 0.0;
    for (&z, o) in &res.origin {
        let s = slack_at(refined, &res.metric, z)?;
        match o {
            Origin::Inserted { .. } => inserted_slack = inserted_slack.max(s.abs()),
            Origin::Original => {
                let before = slack_at(g, d, z)?;
                let scale = g.measure(z).max(1.0);
                original_slack_loss = original_slack_loss.max((before - s) / scale);
            }
        }
    }
    let mut sandwich = Vec::with_capacity(r_grid.len());
    let mut finiteness_agrees = true;
    for &r in r_grid {
        let b = ball(g, d, r, DEFAULT_BUDGET)?;
        let b2 = ball(refined, &res.metric, r, DEFAULT_BUDGET)?;
        finiteness_agrees &= b.truncated == b2.truncated;
        let tol = SANDWICH_TOL * b.volume.max(1.0);
        let ok = b.volume <= b2.volume + tol && b2.volume <= 2.0 * b.volume + tol;
        sandwich.push(SandwichRow { r, volume: b.volume, refined_volume: b2.volume, ok });
    }
    let before = d.distances(g, f64::INFINITY, DEFAULT_BUDGET)?;
    let after = res.metric.distances(refined, f64::INFINITY, DEFAULT_BUDGET)?;
    let mut distance_discrepancy: f64 = 0.0;
    for &(x, dx) in &before.order {
        let dx2 = after.distance(x).unwrap_or(f64::INFINITY);
        distance_discrepancy = distance_discrepancy.max((dx2 - dx).abs());
    }
    Ok(RefinementReport { inserted_slack, original_slack_loss, sandwich, distance_discrepancy, finiteness_agrees })
}

/// The quadratic interpolant along an edge of length `len` between the
/// values `ux` at `t = 0` and `uy` at `t = len`, with second derivative 1.
pub fn chain_profile(ux: f64, uy: f64, len: f64, t: f64) -> f64 {
    0.5 * t * t + ((uy - ux) / len - len / 2.0) * t + ux
}

/// Transports `u` to the refined graph: original vertices keep their
/// values, chain vertices follow the quadratic interpolant. Chains with an
/// endpoint where `u` is undefined stay undefined.
pub fn lift_witness(res: &RefinementResult, u: &Field) -> Field {
    let mut values: BTreeMap<Vertex, f64> = BTreeMap::new();
    let originals: BTreeSet<Vertex> =
        res.origin.iter().filter(|(_, o)| **o == Origin::Original).map(|(&v, _)| v).collect();
    for &x in &originals {
        if let Some(v) = u.get(x) {
            values.insert(x, v);
        }
    }
    for c in &res.chains {
        let (Some(ux), Some(uy)) = (u.get(c.x), u.get(c.y)) else { continue };
        let h = c.length / (c.n() + 1) as f64;
        for (i, &z) in c.inserted.iter().enumerate() {
            values.insert(z, chain_profile(ux, uy, c.length, (i + 1) as f64 * h));
        }
    }
    Field::on_region(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::laplacian_apply;

    fn v(i: i64) -> Vertex {
        Vertex(i)
    }

    fn single_edge() -> (FiniteGraph, EdgeLengthMetric) {
        (FiniteGraph::path(2, 1.0), EdgeLengthMetric::uniform(v(0), 1.0))
    }

    #[test]
    fn choose_n_examples() {
        let (g, d) = single_edge();
        let plan = choose_n(&g, &d, &GrowthFunction::Constant(0.3)).unwrap();
        assert_eq!(plan.get(v(0), v(1)), 3);
        let plan = choose_n(&g, &d, &GrowthFunction::Constant(2.0)).unwrap();
        assert_eq!(plan.get(v(0), v(1)), 1);
        assert_eq!(plan.get(v(0), v(5)), 0);
        assert_eq!(choose_n(&g, &d, &GrowthFunction::Constant(0.0)), Err(Error::NonPositiveBound(2.0)));
    }

    #[test]
    fn single_edge_refinement() {
        let (g, d) = single_edge();
        let res = refine(&g, &d, &SubdivisionPlan::uniform(&g, 1)).unwrap();
        let z = res.chains[0].inserted[0];
        assert_eq!(res.graph.weight(v(0), z).unwrap(), 2.0);
        assert_eq!(res.graph.weight(z, v(1)).unwrap(), 2.0);
        assert_eq!(res.graph.measure(z), 1.0);
        assert_eq!(res.metric.length(v(0), z).unwrap(), 0.5);
        assert_eq!(res.origin[&z], Origin::Inserted { edge_id: 0, index: 1 });
    }

    #[test]
    fn triangle_refinement() {
        let mut g = FiniteGraph::path(3, 1.0);
        g.add_edge(v(0), v(2), 1.0).unwrap();
        let d = EdgeLengthMetric::uniform(v(0), 1.0);
        let res = refine(&g, &d, &SubdivisionPlan::uniform(&g, 1)).unwrap();
        let inserted: Vec<_> = res.chains.iter().flat_map(|c| c.inserted.clone()).collect();
        assert_eq!(inserted.len(), 3);
        for z in inserted {
            assert_eq!(res.graph.measure(z), 1.0);
        }
        let rep = verify_refinement(&res, &g, &d, &[0.5, 1.0, 1.5]).unwrap();
        assert!(rep.distance_discrepancy < 1e-12);
    }

    #[test]
    fn lift_examples() {
        let (g, d) = single_edge();
        let res = refine(&g, &d, &SubdivisionPlan::uniform(&g, 1)).unwrap();
        let u = Field::finite([(v(0), 0.0), (v(1), 0.0)]);
        let lifted = lift_witness(&res, &u);
        let z = res.chains[0].inserted[0];
        assert_eq!(lifted.get(z), Some(-0.125));
        assert_eq!(lifted.get(v(0)), Some(0.0));
    }

    #[test]
    fn interior_chain_laplacian_is_minus_half() {
        let mut g = FiniteGraph::path(3, 2.0);
        g.add_vertex(v(3), 0.7);
        g.add_edge(v(2), v(3), 0.3).unwrap();
        let d = EdgeLengthMetric::uniform(v(0), 0.4);
        let mut plan = SubdivisionPlan::uniform(&g, 4);
        plan.set(v(1), v(2), 2);
        let res = refine(&g, &d, &plan).unwrap();
        let u = Field::on_region([(v(0), 1.0), (v(1), -3.0), (v(2), 0.25), (v(3), 5.0)]);
        let lifted = lift_witness(&res, &u);
        for c in &res.chains {
            for &z in &c.inserted {
                let l = laplacian_apply(&res.graph, &lifted, z).unwrap();
                assert!((l + 0.5).abs() < 1e-12, "{l}");
            }
        }
    }

    #[test]
    fn orientation_independence_of_profile() {
        let (ux, uy, len) = (0.3, -1.2, 0.8);
        for k in 0..=10 {
            let t = len * k as f64 / 10.0;
            let a = chain_profile(ux, uy, len, t);
            let b = chain_profile(uy, ux, len, len - t);
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn non_explicit_graph_is_rejected() {
        let g = crate::graph::LazyGraph::new(|x| vec![(Vertex(x.0 + 1), 1.0)], |_| 1.0, |_| true, 4);
        let d = EdgeLengthMetric::uniform(v(0), 1.0);
        assert!(refine(&g, &d, &SubdivisionPlan::new()).is_err());
    }
}
