//! Weighted graphs over a measure space, the formal Laplacian and the
//! energy form.
//!
//! A graph is a symmetric edge weight `b` with zero diagonal and finite
//! row sums together with a strictly positive vertex measure `m`. Graphs
//! are either stored explicitly ([`FiniteGraph`]) or generated on demand
//! from a neighbor oracle ([`LazyGraph`]) for infinite vertex sets such as
//! the integers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Vertex(pub i64);

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for Vertex {
    fn from(v: i64) -> Self {
        Vertex(v)
    }
}

/// Read access to a weighted graph.
///
/// `neighbors` returns the complete list of `(y, b(x, y))` with `b(x, y) > 0`.
/// Implementations enforce a per-vertex degree budget and report
/// [`Error::LocallyInfinite`] when it is exceeded.
pub trait Graph: Send + Sync {
    fn neighbors(&self, x: Vertex) -> Result<Vec<(Vertex, f64)>>;

    fn measure(&self, x: Vertex) -> f64;

    fn contains(&self, x: Vertex) -> bool;

    /// All vertices in increasing order, or `None` for infinite graphs.
    fn vertices(&self) -> Option<Vec<Vertex>>;

    fn weight(&self, x: Vertex, y: Vertex) -> Result<f64> {
        Ok(self.neighbors(x)?.into_iter().find(|(z, _)| *z == y).map_or(0.0, |(_, w)| w))
    }

    fn is_finite(&self) -> bool {
        self.vertices().is_some()
    }

    /// Weighted degree `sum_y b(x, y)`.
    fn degree(&self, x: Vertex) -> Result<f64> {
        Ok(self.neighbors(x)?.iter().map(|(_, w)| w).sum())
    }
}

pub const DEFAULT_DEGREE_BOUND: usize = 1 << 20;

/// Explicitly stored graph.
///
/// Weights are kept as directed entries so that asymmetric input can be
/// represented and reported by [`validate_graph`]; the regular
/// constructors always insert both directions.
#[derive(Debug, Clone, Default)]
pub struct FiniteGraph {
    adjacency: BTreeMap<Vertex, BTreeMap<Vertex, f64>>,
    measure: BTreeMap<Vertex, f64>,
    degree_bound: Option<usize>,
}

impl FiniteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_degree_bound(mut self, bound: usize) -> Self {
        self.degree_bound = Some(bound);
        self
    }

    pub fn add_vertex(&mut self, x: Vertex, m: f64) {
        self.measure.insert(x, m);
        self.adjacency.entry(x).or_default();
    }

    /// Sets `b(x, y) = b(y, x) = w`. Both endpoints must already exist.
    pub fn add_edge(&mut self, x: Vertex, y: Vertex, w: f64) -> Result<()> {
        for v in [x, y] {
            if !self.measure.contains_key(&v) {
                return Err(Error::UnknownVertex(v));
            }
        }
        self.adjacency.entry(x).or_default().insert(y, w);
        self.adjacency.entry(y).or_default().insert(x, w);
        Ok(())
    }

    /// Sets the single directed entry `b(x, y) = w`, leaving `b(y, x)` alone.
    pub fn set_directed_weight(&mut self, x: Vertex, y: Vertex, w: f64) {
        self.adjacency.entry(x).or_default().insert(y, w);
        self.adjacency.entry(y).or_default();
        for v in [x, y] {
            self.measure.entry(v).or_insert(1.0);
        }
    }

    /// Path `0 - 1 - ... - (n-1)` with unit measure and the given weight.
    pub fn path(n: usize, w: f64) -> Self {
        let mut g = Self::new();
        for i in 0..n as i64 {
            g.add_vertex(Vertex(i), 1.0);
        }
        for i in 1..n as i64 {
            g.add_edge(Vertex(i - 1), Vertex(i), w).expect("vertices exist");
        }
        g
    }

    pub fn set_measure(&mut self, x: Vertex, m: f64) -> Result<()> {
        match self.measure.get_mut(&x) {
            Some(v) => {
                *v = m;
                Ok(())
            }
            None => Err(Error::UnknownVertex(x)),
        }
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    /// Unordered edges `(x, y, b)` with `x < y` and `b > 0`, read from the
    /// entry stored at the smaller endpoint.
    pub fn edges(&self) -> Vec<(Vertex, Vertex, f64)> {
        let mut out = Vec::new();
        for (&x, row) in &self.adjacency {
            for (&y, &w) in row {
                if x < y && w > 0.0 {
                    out.push((x, y, w));
                }
            }
        }
        out
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.measure.keys().next_back().copied()
    }

    /// Subgraph induced on `keep`.
    pub fn induced(&self, keep: &BTreeSet<Vertex>) -> FiniteGraph {
        let mut g = FiniteGraph::new();
        g.degree_bound = self.degree_bound;
        for (&x, &m) in &self.measure {
            if keep.contains(&x) {
                g.add_vertex(x, m);
            }
        }
        for (&x, row) in &self.adjacency {
            if !keep.contains(&x) {
                continue;
            }
            for (&y, &w) in row {
                if keep.contains(&y) {
                    g.adjacency.entry(x).or_default().insert(y, w);
                }
            }
        }
        g
    }

    fn raw_entries(&self, x: Vertex) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.adjacency.get(&x).into_iter().flat_map(|row| row.iter().map(|(&y, &w)| (y, w)))
    }
}

impl Graph for FiniteGraph {
    fn neighbors(&self, x: Vertex) -> Result<Vec<(Vertex, f64)>> {
        let row = self.adjacency.get(&x).ok_or(Error::UnknownVertex(x))?;
        let out: Vec<_> = row.iter().filter(|(_, &w)| w > 0.0).map(|(&y, &w)| (y, w)).collect();
        if let Some(bound) = self.degree_bound {
            if out.len() > bound {
                return Err(Error::LocallyInfinite { vertex: x, bound });
            }
        }
        Ok(out)
    }

    fn measure(&self, x: Vertex) -> f64 {
        self.measure.get(&x).copied().unwrap_or(f64::NAN)
    }

    fn contains(&self, x: Vertex) -> bool {
        self.measure.contains_key(&x)
    }

    fn vertices(&self) -> Option<Vec<Vertex>> {
        Some(self.measure.keys().copied().collect())
    }

    fn weight(&self, x: Vertex, y: Vertex) -> Result<f64> {
        let row = self.adjacency.get(&x).ok_or(Error::UnknownVertex(x))?;
        Ok(row.get(&y).copied().unwrap_or(0.0))
    }
}

type NeighborFn = dyn Fn(Vertex) -> Vec<(Vertex, f64)> + Send + Sync;
type MeasureFn = dyn Fn(Vertex) -> f64 + Send + Sync;
type DomainFn = dyn Fn(Vertex) -> bool + Send + Sync;

/// Infinite, locally finite graph given by a neighbor oracle.
#[derive(Clone)]
pub struct LazyGraph {
    neighbors: Arc<NeighborFn>,
    measure: Arc<MeasureFn>,
    domain: Arc<DomainFn>,
    degree_bound: usize,
}

impl fmt::Debug for LazyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyGraph").field("degree_bound", &self.degree_bound).finish_non_exhaustive()
    }
}

impl LazyGraph {
    pub fn new(
        neighbors: impl Fn(Vertex) -> Vec<(Vertex, f64)> + Send + Sync + 'static,
        measure: impl Fn(Vertex) -> f64 + Send + Sync + 'static,
        domain: impl Fn(Vertex) -> bool + Send + Sync + 'static,
        degree_bound: usize,
    ) -> Self {
        Self { neighbors: Arc::new(neighbors), measure: Arc::new(measure), domain: Arc::new(domain), degree_bound }
    }

    /// Copies the subgraph induced on `keep` into explicit storage.
    pub fn restrict(&self, keep: &BTreeSet<Vertex>) -> Result<FiniteGraph> {
        let mut g = FiniteGraph::new();
        for &x in keep {
            g.add_vertex(x, self.measure(x));
        }
        for &x in keep {
            for (y, w) in self.neighbors(x)? {
                if keep.contains(&y) {
                    g.add_edge(x, y, w)?;
                }
            }
        }
        Ok(g)
    }
}

impl Graph for LazyGraph {
    fn neighbors(&self, x: Vertex) -> Result<Vec<(Vertex, f64)>> {
        if !(self.domain)(x) {
            return Err(Error::UnknownVertex(x));
        }
        let out: Vec<_> = (self.neighbors)(x).into_iter().filter(|(_, w)| *w > 0.0).collect();
        if out.len() > self.degree_bound {
            return Err(Error::LocallyInfinite { vertex: x, bound: self.degree_bound });
        }
        Ok(out)
    }

    fn measure(&self, x: Vertex) -> f64 {
        (self.measure)(x)
    }

    fn contains(&self, x: Vertex) -> bool {
        (self.domain)(x)
    }

    fn vertices(&self) -> Option<Vec<Vertex>> {
        None
    }
}

/// Real-valued function on vertices.
///
/// Values are stored explicitly on a region; off the region the field is
/// either a constant (`rest = Some(c)`) or undefined (`rest = None`). A
/// field is finitely supported exactly when `rest == Some(0.0)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field {
    values: BTreeMap<Vertex, f64>,
    rest: Option<f64>,
}

impl Field {
    /// Finitely supported field; vertices not listed carry `0`.
    pub fn finite(values: impl IntoIterator<Item = (Vertex, f64)>) -> Self {
        Self { values: values.into_iter().collect(), rest: Some(0.0) }
    }

    /// Field known only on the listed region.
    pub fn on_region(values: impl IntoIterator<Item = (Vertex, f64)>) -> Self {
        Self { values: values.into_iter().collect(), rest: None }
    }

    pub fn constant(c: f64) -> Self {
        Self { values: BTreeMap::new(), rest: Some(c) }
    }

    /// Convenience for fields on `0, 1, ..., k-1`.
    pub fn from_slice(values: &[f64]) -> Self {
        Self::finite(values.iter().enumerate().map(|(i, &v)| (Vertex(i as i64), v)))
    }

    pub fn get(&self, x: Vertex) -> Option<f64> {
        self.values.get(&x).copied().or(self.rest)
    }

    pub fn set(&mut self, x: Vertex, v: f64) {
        self.values.insert(x, v);
    }

    pub fn is_finitely_supported(&self) -> bool {
        self.rest == Some(0.0)
    }

    pub fn rest(&self) -> Option<f64> {
        self.rest
    }

    /// Explicitly stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.values.iter().map(|(&x, &v)| (x, v))
    }

    /// Vertices with a nonzero stored value.
    pub fn support(&self) -> Vec<Vertex> {
        self.entries().filter(|(_, v)| *v != 0.0).map(|(x, _)| x).collect()
    }

    pub fn region(&self) -> BTreeSet<Vertex> {
        self.values.keys().copied().collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { values: self.values.iter().map(|(&x, &v)| (x, f(v))).collect(), rest: self.rest.map(&f) }
    }

    /// Pointwise `a * self + b * other` on the union of both regions.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Field {
        let mut keys = self.region();
        keys.extend(other.region());
        let values = keys.into_iter().filter_map(|x| Some((x, a * self.get(x)? + b * other.get(x)?))).collect();
        let rest = match (self.rest, other.rest) {
            (Some(p), Some(q)) => Some(a * p + b * q),
            _ => None,
        };
        Field { values, rest }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Asymmetric { x: Vertex, y: Vertex, forward: f64, backward: f64 },
    NonzeroDiagonal { x: Vertex, weight: f64 },
    NegativeWeight { x: Vertex, y: Vertex, weight: f64 },
    NonPositiveMeasure { x: Vertex, measure: f64 },
    NotSummable { x: Vertex },
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the graph axioms on every vertex of `probe_set`.
pub fn validate_graph(g: &dyn Graph, probe_set: &[Vertex]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen_pairs = BTreeSet::new();
    for &x in probe_set {
        report.checked += 1;
        let m = g.measure(x);
        if !(m > 0.0 && m.is_finite()) {
            report.violations.push(Violation::NonPositiveMeasure { x, measure: m });
        }
        let row = match g.neighbors(x) {
            Ok(row) => row,
            Err(_) => {
                report.violations.push(Violation::NotSummable { x });
                continue;
            }
        };
        if !row.iter().map(|(_, w)| w).sum::<f64>().is_finite() {
            report.violations.push(Violation::NotSummable { x });
        }
        for (y, w) in row {
            if y == x {
                report.violations.push(Violation::NonzeroDiagonal { x, weight: w });
                continue;
            }
            let back = g.weight(y, x).unwrap_or(f64::NAN);
            if back != w && seen_pairs.insert((x.min(y), x.max(y))) {
                let (a, b, fwd, bwd) = if x < y { (x, y, w, back) } else { (y, x, back, w) };
                report.violations.push(Violation::Asymmetric { x: a, y: b, forward: fwd, backward: bwd });
            }
        }
    }
    report
}

/// Validation for explicit graphs, which can also carry negative entries.
pub fn validate_finite(g: &FiniteGraph) -> ValidationReport {
    let probe: Vec<Vertex> = g.measure.keys().copied().collect();
    let mut report = validate_graph(g, &probe);
    for &x in &probe {
        for (y, w) in g.raw_entries(x) {
            if w < 0.0 {
                report.violations.push(Violation::NegativeWeight { x, y, weight: w });
            }
        }
    }
    report
}

/// Formal Laplacian `(1/m(x)) sum_y b(x,y) (f(x) - f(y))`.
pub fn laplacian_apply(g: &dyn Graph, f: &Field, x: Vertex) -> Result<f64> {
    let fx = f.get(x).ok_or(Error::NotInDomain(x))?;
    let mut acc = 0.0;
    let mut abs = 0.0;
    for (y, w) in g.neighbors(x).map_err(|_| Error::NotInDomain(x))? {
        let fy = f.get(y).ok_or(Error::NotInDomain(x))?;
        acc += w * (fx - fy);
        abs += w * fy.abs();
    }
    if !abs.is_finite() {
        return Err(Error::NotInDomain(x));
    }
    Ok(acc / g.measure(x))
}

/// `sum_y b(x,y) (f(x) - f(y))^2`; `+inf` when the neighborhood cannot be
/// enumerated or `f` is undefined on part of it.
pub fn gradient_sq(g: &dyn Graph, f: &Field, x: Vertex) -> f64 {
    let Some(fx) = f.get(x) else { return f64::INFINITY };
    let Ok(row) = g.neighbors(x) else { return f64::INFINITY };
    let mut acc = 0.0;
    for (y, w) in row {
        match f.get(y) {
            Some(fy) => acc += w * (fx - fy).powi(2),
            None => return f64::INFINITY,
        }
    }
    acc
}

/// Energy `Q(f) = 1/2 sum_x |grad f|^2(x)` of a finitely supported field.
pub fn dirichlet_form(g: &dyn Graph, f: &Field) -> Result<f64> {
    if !f.is_finitely_supported() {
        return Err(Error::InfiniteSupport);
    }
    let support: BTreeSet<Vertex> = f.support().into_iter().collect();
    let mut q = 0.0;
    for &x in &support {
        let fx = f.get(x).unwrap_or(0.0);
        for (y, w) in g.neighbors(x)? {
            if support.contains(&y) {
                q += 0.5 * w * (fx - f.get(y).unwrap_or(0.0)).powi(2);
            } else {
                q += w * fx * fx;
            }
        }
    }
    Ok(q)
}
