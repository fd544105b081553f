//! Path pseudo metrics built from edge lengths: distance balls, the
//! intrinsic condition, jump sizes, the globally-local diagnostic, edge
//! truncation and the integral test for growth functions.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, Graph, Vertex};

pub const DEFAULT_BUDGET: usize = 2_000_000;
const INTRINSIC_TOL: f64 = 1e-12;

/// Closed-form data registered for infinite example graphs, where suprema
/// over infinitely many edges cannot be enumerated.
pub trait MetricClosedForm: Send + Sync {
    /// `s_r`: supremum of edge distances over edges outside `B_r`.
    fn jump_size_outside(&self, r: f64) -> f64;

    /// `m(B_r)` when known in closed form.
    fn volume(&self, _r: f64) -> Option<f64> {
        None
    }
}

type LengthFn = dyn Fn(Vertex, Vertex) -> Option<f64> + Send + Sync;

#[derive(Clone)]
enum LengthSource {
    Table(HashMap<(Vertex, Vertex), f64>),
    Function(Arc<LengthFn>),
}

/// Path pseudo metric induced by positive lengths on the edges of a graph,
/// together with the fixed reference vertex `o`.
#[derive(Clone)]
pub struct EdgeLengthMetric {
    root: Vertex,
    lengths: LengthSource,
    geodesic: bool,
    closed_form: Option<Arc<dyn MetricClosedForm>>,
}

impl fmt::Debug for EdgeLengthMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EdgeLengthMetric")
            .field("root", &self.root)
            .field("geodesic", &self.geodesic)
            .field("closed_form", &self.closed_form.is_some())
            .finish_non_exhaustive()
    }
}

fn key(x: Vertex, y: Vertex) -> (Vertex, Vertex) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

impl EdgeLengthMetric {
    pub fn from_table(root: Vertex, lengths: impl IntoIterator<Item = ((Vertex, Vertex), f64)>) -> Self {
        let table = lengths.into_iter().map(|((x, y), l)| (key(x, y), l)).collect();
        Self { root, lengths: LengthSource::Table(table), geodesic: false, closed_form: None }
    }

    pub fn from_fn(root: Vertex, f: impl Fn(Vertex, Vertex) -> Option<f64> + Send + Sync + 'static) -> Self {
        Self { root, lengths: LengthSource::Function(Arc::new(f)), geodesic: false, closed_form: None }
    }

    /// Every edge of `g` gets length `l`.
    pub fn uniform(root: Vertex, l: f64) -> Self {
        Self::from_fn(root, move |_, _| Some(l))
    }

    /// Declares that each edge length already equals the induced distance
    /// between its endpoints (true on trees), which skips local searches.
    pub fn assume_geodesic(mut self) -> Self {
        self.geodesic = true;
        self
    }

    pub fn with_closed_form(mut self, cf: Arc<dyn MetricClosedForm>) -> Self {
        self.closed_form = Some(cf);
        self
    }

    /// Drops registered closed forms, e.g. after restricting to a subgraph.
    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = None;
        self
    }

    pub fn with_root(mut self, root: Vertex) -> Self {
        self.root = root;
        self
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn closed_form(&self) -> Option<&Arc<dyn MetricClosedForm>> {
        self.closed_form.as_ref()
    }

    pub fn is_geodesic(&self) -> bool {
        self.geodesic
    }

    pub fn length(&self, x: Vertex, y: Vertex) -> Result<f64> {
        let l = match &self.lengths {
            LengthSource::Table(t) => t.get(&key(x, y)).copied(),
            LengthSource::Function(f) => f(x, y),
        };
        match l {
            Some(l) if l > 0.0 && l.is_finite() => Ok(l),
            _ => Err(Error::MissingLength(x, y)),
        }
    }

    /// Induced distance between the endpoints of the edge `(x, y)`; never
    /// larger than the edge length.
    pub fn edge_distance(&self, g: &dyn Graph, x: Vertex, y: Vertex) -> Result<f64> {
        let l = self.length(x, y)?;
        if self.geodesic {
            return Ok(l);
        }
        let local = dijkstra(g, self, x, l, 100_000)?;
        Ok(local.distance(y).unwrap_or(l).min(l))
    }

    /// Induced distance `d(x, y)` by a search from `x` bounded by `cutoff`;
    /// `None` if `y` is farther than `cutoff`.
    pub fn distance(&self, g: &dyn Graph, x: Vertex, y: Vertex, cutoff: f64, budget: usize) -> Result<Option<f64>> {
        let map = dijkstra(g, self, x, cutoff, budget)?;
        if map.truncated {
            return Err(Error::BudgetExceeded(budget));
        }
        Ok(map.distance(y))
    }

    /// Distances from the root up to radius `r_max`.
    pub fn distances(&self, g: &dyn Graph, r_max: f64, budget: usize) -> Result<DistanceMap> {
        dijkstra(g, self, self.root, r_max, budget)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, Vertex);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Settled distances from a source, in increasing order.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    pub source: Vertex,
    pub radius: f64,
    /// Settled vertices sorted by distance.
    pub order: Vec<(Vertex, f64)>,
    index: HashMap<Vertex, f64>,
    /// The enumeration stopped on the budget before reaching `radius`.
    pub truncated: bool,
}

impl DistanceMap {
    pub fn distance(&self, x: Vertex) -> Option<f64> {
        self.index.get(&x).copied()
    }

    /// Vertices with distance `<= r`; `r` must not exceed the enumeration radius.
    pub fn ball(&self, r: f64) -> &[(Vertex, f64)] {
        let end = self.order.partition_point(|(_, d)| *d <= r);
        &self.order[..end]
    }
}

fn dijkstra(g: &dyn Graph, d: &EdgeLengthMetric, source: Vertex, r_max: f64, budget: usize) -> Result<DistanceMap> {
    let mut best: HashMap<Vertex, f64> = HashMap::new();
    let mut settled: HashMap<Vertex, f64> = HashMap::new();
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    best.insert(source, 0.0);
    heap.push(HeapItem(0.0, source));
    let mut truncated = false;
    while let Some(HeapItem(dist, x)) = heap.pop() {
        if dist > r_max {
            break;
        }
        if settled.contains_key(&x) {
            continue;
        }
        if order.len() >= budget {
            truncated = true;
            break;
        }
        settled.insert(x, dist);
        order.push((x, dist));
        for (y, _) in g.neighbors(x)? {
            if settled.contains_key(&y) {
                continue;
            }
            let nd = dist + d.length(x, y)?;
            if nd <= r_max && best.get(&y).is_none_or(|&b| nd < b) {
                best.insert(y, nd);
                heap.push(HeapItem(nd, y));
            }
        }
    }
    Ok(DistanceMap { source, radius: r_max, order, index: settled, truncated })
}

#[derive(Debug, Clone)]
pub struct BallReport {
    pub radius: f64,
    pub vertices: Vec<Vertex>,
    pub volume: f64,
    pub truncated: bool,
}

/// Distance ball `B_r` about the metric's root.
pub fn ball(g: &dyn Graph, d: &EdgeLengthMetric, r: f64, budget: usize) -> Result<BallReport> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative radius {r}")));
    }
    let map = d.distances(g, r, budget)?;
    let vertices: Vec<Vertex> = map.order.iter().map(|(x, _)| *x).collect();
    let volume = vertices.iter().map(|&x| g.measure(x)).sum();
    Ok(BallReport { radius: r, vertices, volume, truncated: map.truncated })
}

/// Cumulative volume `r -> m(B_r)` as a right-continuous step function.
#[derive(Debug, Clone)]
pub struct VolumeProfile {
    radii: Vec<f64>,
    volumes: Vec<f64>,
    /// Largest radius for which the profile is exact.
    pub valid_up_to: f64,
}

impl VolumeProfile {
    pub fn from_distances(g: &dyn Graph, map: &DistanceMap) -> Self {
        let mut radii = Vec::with_capacity(map.order.len());
        let mut volumes = Vec::with_capacity(map.order.len());
        let mut acc = 0.0;
        for &(x, dist) in &map.order {
            acc += g.measure(x);
            if radii.last() == Some(&dist) {
                *volumes.last_mut().unwrap() = acc;
            } else {
                radii.push(dist);
                volumes.push(acc);
            }
        }
        let valid_up_to = if map.truncated { radii.last().copied().unwrap_or(0.0) } else { map.radius };
        Self { radii, volumes, valid_up_to }
    }

    pub fn volume(&self, r: f64) -> f64 {
        let k = self.radii.partition_point(|&x| x <= r);
        if k == 0 {
            0.0
        } else {
            self.volumes[k - 1]
        }
    }

    /// Breakpoints `(radius, volume)` in increasing order.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.volumes.iter().copied())
    }
}

/// `max(log x, 1)`.
pub fn ls(x: f64) -> f64 {
    x.ln().max(1.0)
}

#[derive(Debug, Clone)]
pub struct IntrinsicReport {
    pub slacks: Vec<(Vertex, f64)>,
    pub intrinsic: bool,
}

impl IntrinsicReport {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }
}

/// Per-vertex slack `m(x) - sum_y b(x,y) d(x,y)^2`.
pub fn check_intrinsic(g: &dyn Graph, d: &EdgeLengthMetric, probe_set: &[Vertex]) -> Result<IntrinsicReport> {
    let mut slacks = Vec::with_capacity(probe_set.len());
    for &x in probe_set {
        let mut energy = 0.0;
        for (y, w) in g.neighbors(x)? {
            energy += w * d.edge_distance(g, x, y)?.powi(2);
        }
        slacks.push((x, g.measure(x) - energy));
    }
    let intrinsic = slacks.iter().all(|&(_, s)| s >= -INTRINSIC_TOL);
    Ok(IntrinsicReport { slacks, intrinsic })
}

/// Edges of a finite graph keyed by the smaller root distance of their
/// endpoints, for fast `s_r` queries.
#[derive(Debug, Clone)]
pub struct JumpProfile {
    /// `(min(d(x,o), d(y,o)), d(x,y))` sorted by the first entry.
    edges: Vec<(f64, f64)>,
    /// `suffix_max[i] = max of edges[i..].1`.
    suffix_max: Vec<f64>,
}

impl JumpProfile {
    pub fn new(g: &dyn Graph, d: &EdgeLengthMetric, budget: usize) -> Result<Self> {
        let vertices = g.vertices().ok_or(Error::Unbounded)?;
        let map = d.distances(g, f64::INFINITY, budget)?;
        if map.truncated {
            return Err(Error::Unbounded);
        }
        let mut edges = Vec::new();
        for &x in &vertices {
            for (y, _) in g.neighbors(x)? {
                if x < y {
                    let dx = map.distance(x).unwrap_or(f64::INFINITY);
                    let dy = map.distance(y).unwrap_or(f64::INFINITY);
                    edges.push((dx.min(dy), d.edge_distance(g, x, y)?));
                }
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut suffix_max = vec![0.0f64; edges.len() + 1];
        for i in (0..edges.len()).rev() {
            suffix_max[i] = suffix_max[i + 1].max(edges[i].1);
        }
        Ok(Self { edges, suffix_max })
    }

    pub fn outside(&self, r: f64) -> f64 {
        let i = self.edges.partition_point(|e| e.0 < r);
        self.suffix_max[i]
    }
}

/// Jump size `s = sup { d(x,y) : x ~ y }`.
pub fn jump_size(g: &dyn Graph, d: &EdgeLengthMetric) -> Result<f64> {
    jump_size_outside(g, d, 0.0, DEFAULT_BUDGET)
}

/// Jump size outside `B_r`: edges with both endpoints at distance `>= r`.
pub fn jump_size_outside(g: &dyn Graph, d: &EdgeLengthMetric, r: f64, budget: usize) -> Result<f64> {
    if let Some(cf) = d.closed_form() {
        return Ok(cf.jump_size_outside(r));
    }
    Ok(JumpProfile::new(g, d, budget)?.outside(r))
}

fn jump_oracle<'a>(g: &'a dyn Graph, d: &'a EdgeLengthMetric, budget: usize) -> Result<Box<dyn Fn(f64) -> f64 + 'a>> {
    if let Some(cf) = d.closed_form() {
        let cf = cf.clone();
        return Ok(Box::new(move |r| cf.jump_size_outside(r)));
    }
    let profile = JumpProfile::new(g, d, budget)?;
    Ok(Box::new(move |r| profile.outside(r)))
}

/// Monotone increasing positive functions `f : (0, inf) -> (0, inf)`.
#[derive(Debug, Clone)]
pub enum GrowthFunction {
    /// `scale * r^p + offset`
    Power {
        p: f64,
        scale: f64,
        offset: f64,
    },
    /// `scale * r^p * ls(r) + offset`
    PowerLog {
        p: f64,
        scale: f64,
        offset: f64,
    },
    Constant(f64),
    /// `ls(m(B_r)) + offset`
    LogVolume {
        profile: Arc<VolumeProfile>,
        offset: f64,
    },
    /// Upper step function through `(r_i, v_i)`: `f(r) = v_j` for the first
    /// knot with `r_j >= r`, and the last value beyond the last knot.
    Table(Vec<(f64, f64)>),
}

impl GrowthFunction {
    pub fn power(p: f64) -> Self {
        GrowthFunction::Power { p, scale: 1.0, offset: 0.0 }
    }

    pub fn power_log(p: f64) -> Self {
        GrowthFunction::PowerLog { p, scale: 1.0, offset: 0.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            GrowthFunction::Power { p, scale, offset } => scale * r.powf(*p) + offset,
            GrowthFunction::PowerLog { p, scale, offset } => scale * r.powf(*p) * ls(r) + offset,
            GrowthFunction::Constant(c) => *c,
            GrowthFunction::LogVolume { profile, offset } => ls(profile.volume(r)) + offset,
            GrowthFunction::Table(knots) => {
                let i = knots.partition_point(|k| k.0 < r);
                knots.get(i).or(knots.last()).map_or(f64::NAN, |k| k.1)
            }
        }
    }

    /// Infimum over `[a, b]`: analytic for the symbolic kinds, a dense
    /// 1024-point grid for tables.
    pub fn inf_on(&self, a: f64, b: f64) -> f64 {
        let b = b.max(a);
        match self {
            GrowthFunction::Power { p, scale, .. } | GrowthFunction::PowerLog { p, scale, .. }
                if *p >= 0.0 && *scale >= 0.0 =>
            {
                self.eval(a)
            }
            GrowthFunction::Power { .. } => self.eval(a).min(self.eval(b)),
            GrowthFunction::Constant(c) => *c,
            GrowthFunction::LogVolume { .. } => self.eval(a),
            _ => (0..1024).map(|i| self.eval(a + (b - a) * i as f64 / 1023.0)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Parses the `kind:coefficients` syntax: `power:p[,scale[,offset]]`,
    /// `power_log:p[,scale[,offset]]`, `const:c`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("growth function `{spec}`: {msg}"));
        let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected kind:coefficients"))?;
        let coeffs: Vec<f64> = rest
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad("coefficient is not a number")))
            .collect::<Result<_>>()?;
        let get = |i: usize, default: f64| coeffs.get(i).copied().unwrap_or(default);
        let f = match kind {
            "power" => GrowthFunction::Power { p: get(0, 1.0), scale: get(1, 1.0), offset: get(2, 0.0) },
            "power_log" => GrowthFunction::PowerLog { p: get(0, 1.0), scale: get(1, 1.0), offset: get(2, 0.0) },
            "const" => GrowthFunction::Constant(get(0, 1.0)),
            _ => return Err(bad("unknown kind")),
        };
        if coeffs.len() > 3 || (kind == "const" && coeffs.len() > 1) {
            return Err(bad("too many coefficients"));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GlVerdict {
    Bounded,
    UnboundedTrend,
    InfiniteJumpSize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GlRow {
    pub r: f64,
    pub volume: Option<f64>,
    pub s_r: f64,
    pub ratio: f64,
    pub running_max: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GlReport {
    pub a: f64,
    pub jump_size: f64,
    pub rows: Vec<GlRow>,
    pub verdict: GlVerdict,
}

impl GlReport {
    pub fn sup_ratio(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.running_max)
    }
}

const GL_TREND_WINDOW: usize = 10;
const GL_TREND_GROWTH: f64 = 1.05;

/// Tabulates `s_r f(A r) / r` on `r_grid` (increasing) and classifies the trend.
///
/// The trend is unbounded when the running maximum increases strictly over
/// the last ten grid points and grows by at least 5% across the top decade.
pub fn check_gl(g: &dyn Graph, d: &EdgeLengthMetric, f: &GrowthFunction, a: f64, r_grid: &[f64]) -> Result<GlReport> {
    if !(a > 1.0) {
        return Err(Error::InvalidArgument(format!("GL constant A = {a} must exceed 1")));
    }
    let s_of = jump_oracle(g, d, DEFAULT_BUDGET)?;
    let s = s_of(0.0);
    if !s.is_finite() {
        return Ok(GlReport { a, jump_size: s, rows: vec![], verdict: GlVerdict::InfiniteJumpSize });
    }
    let volume_of = |r: f64| d.closed_form().and_then(|cf| cf.volume(r));
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut running_max = f64::NEG_INFINITY;
    for &r in r_grid {
        let s_r = s_of(r);
        let ratio = s_r * f.eval(a * r) / r;
        running_max = running_max.max(ratio);
        rows.push(GlRow { r, volume: volume_of(r), s_r, ratio, running_max });
    }
    let verdict = if unbounded_trend(&rows) { GlVerdict::UnboundedTrend } else { GlVerdict::Bounded };
    Ok(GlReport { a, jump_size: s, rows, verdict })
}

fn unbounded_trend(rows: &[GlRow]) -> bool {
    if rows.len() < GL_TREND_WINDOW + 1 {
        return false;
    }
    let tail = &rows[rows.len() - GL_TREND_WINDOW - 1..];
    let strictly_increasing = tail.windows(2).all(|w| w[1].running_max > w[0].running_max);
    let r_top = rows.last().unwrap().r;
    let decade_start = rows.iter().find(|row| row.r >= r_top / 10.0).unwrap();
    let grew = rows.last().unwrap().running_max >= GL_TREND_GROWTH * decade_start.running_max;
    strictly_increasing && grew
}

/// Graph with every edge longer than `s` removed.
#[derive(Clone)]
pub struct TruncatedGraph {
    inner: Arc<dyn Graph>,
    metric: EdgeLengthMetric,
    s: f64,
}

impl TruncatedGraph {
    pub fn threshold(&self) -> f64 {
        self.s
    }

    /// Explicit copy; the inner graph must be finite.
    pub fn to_finite(&self) -> Result<FiniteGraph> {
        let vertices = self.inner.vertices().ok_or(Error::Unbounded)?;
        let mut g = FiniteGraph::new();
        for &x in &vertices {
            g.add_vertex(x, self.inner.measure(x));
        }
        for &x in &vertices {
            for (y, w) in self.neighbors(x)? {
                g.add_edge(x, y, w)?;
            }
        }
        Ok(g)
    }
}

impl Graph for TruncatedGraph {
    fn neighbors(&self, x: Vertex) -> Result<Vec<(Vertex, f64)>> {
        let mut out = Vec::new();
        for (y, w) in self.inner.neighbors(x)? {
            if self.metric.edge_distance(self.inner.as_ref(), x, y)? <= self.s {
                out.push((y, w));
            }
        }
        Ok(out)
    }

    fn measure(&self, x: Vertex) -> f64 {
        self.inner.measure(x)
    }

    fn contains(&self, x: Vertex) -> bool {
        self.inner.contains(x)
    }

    fn vertices(&self) -> Option<Vec<Vertex>> {
        self.inner.vertices()
    }
}

/// Truncated edge weight `b_s = b * 1{d <= s}`.
pub fn truncate(g: Arc<dyn Graph>, d: &EdgeLengthMetric, s: f64) -> Result<TruncatedGraph> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation threshold {s} must be positive")));
    }
    Ok(TruncatedGraph { inner: g, metric: d.clone(), s })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Divergence {
    DivergentTrend,
    ConvergentTrend,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Divergence::DivergentTrend => "divergent-trend",
            Divergence::ConvergentTrend => "convergent-trend",
        })
    }
}

#[derive(Debug, Clone)]
pub struct IntegralReport {
    /// `(R, integral from 1 to R)` at doubling checkpoints.
    pub checkpoints: Vec<(f64, f64)>,
    pub diagnostic: Divergence,
}

const PLATEAU_RATIO: f64 = 0.9;

/// Ratio test on the increments over the last three doublings: a geometric
/// decay of the increments (ratio below 0.9) reads as a plateau.
pub(crate) fn classify_increments(checkpoints: &[(f64, f64)]) -> Divergence {
    let n = checkpoints.len();
    if n < 4 {
        return Divergence::DivergentTrend;
    }
    let inc: Vec<f64> = checkpoints[n - 4..].windows(2).map(|w| w[1].1 - w[0].1).collect();
    let ratios = [inc[1] / inc[0], inc[2] / inc[1]];
    if ratios.iter().all(|&q| q < PLATEAU_RATIO) {
        Divergence::ConvergentTrend
    } else {
        Divergence::DivergentTrend
    }
}

/// Composite Simpson rule for `int_a^b r / f(r) dr` in the variable `log r`.
fn simpson_log(f: &GrowthFunction, a: f64, b: f64, panels: usize) -> f64 {
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / panels as f64;
    let integrand = |s: f64| {
        let r = s.exp();
        r * r / f.eval(r)
    };
    let mut acc = integrand(la) + integrand(lb);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(la + h * i as f64);
    }
    acc * h / 3.0
}

/// Partial integrals of `int_1^R r / f(r) dr` at `R = 2, 4, 8, ... <= r_max`.
pub fn f_integral_test(f: &GrowthFunction, r_max: f64) -> Result<IntegralReport> {
    if !(r_max >= 2.0) {
        return Err(Error::InvalidArgument(format!("r_max = {r_max} must be at least 2")));
    }
    let mut checkpoints = Vec::new();
    let mut lo = 1.0;
    let mut acc = 0.0;
    while 2.0 * lo <= r_max * (1.0 + 1e-12) {
        if !(f.inf_on(lo, 2.0 * lo) > 0.0) {
            return Err(Error::NonPositiveBound(2.0 * lo));
        }
        acc += simpson_log(f, lo, 2.0 * lo, 64);
        lo *= 2.0;
        checkpoints.push((lo, acc));
    }
    let diagnostic = classify_increments(&checkpoints);
    Ok(IntegralReport { checkpoints, diagnostic })
}
