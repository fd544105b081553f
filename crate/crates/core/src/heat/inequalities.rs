//! Numerical checks of the energy inequalities for solutions of the heat
//! equation: Caccioppoli, the basic estimate, the main technical estimate
//! and Grigor'yan's inequality.

use std::collections::BTreeSet;

use super::field::HeatSource;
use crate::error::{Error, Result};
use crate::graph::{gradient_sq, laplacian_apply, Field, Graph, Vertex};
use crate::metric::{ball, jump_size_outside, EdgeLengthMetric, GrowthFunction, DEFAULT_BUDGET};

#[derive(Debug, Clone, serde::Serialize)]
pub struct InequalityReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub preconditions_ok: bool,
}

impl InequalityReport {
    pub fn new(check: &str, lhs: f64, rhs: f64) -> Self {
        Self { check: check.into(), lhs, rhs, slack: rhs - lhs, preconditions_ok: true }
    }
}

fn neighborhood(g: &dyn Graph, set: &BTreeSet<Vertex>) -> Result<BTreeSet<Vertex>> {
    let mut out = set.clone();
    for &x in set {
        out.extend(g.neighbors(x)?.into_iter().map(|(y, _)| y));
    }
    Ok(out)
}

fn value(u: &Field, x: Vertex) -> Result<f64> {
    u.get(x).ok_or(Error::IncompleteNeighborData(x))
}

fn incomplete(e: Error) -> Error {
    match e {
        Error::NotInDomain(v) => Error::IncompleteNeighborData(v),
        other => other,
    }
}

/// `-sum L u * u * phi^2 * m <= 1/2 sum u^2 |grad phi|^2`.
pub fn check_caccioppoli(g: &dyn Graph, u: &Field, phi: &Field) -> Result<InequalityReport> {
    if !phi.is_finitely_supported() {
        return Err(Error::InfiniteSupport);
    }
    let support: BTreeSet<Vertex> = phi.support().into_iter().collect();
    let mut lhs = 0.0;
    for &x in &support {
        let p = phi.get(x).unwrap_or(0.0);
        lhs -= laplacian_apply(g, u, x).map_err(incomplete)? * value(u, x)? * p * p * g.measure(x);
    }
    let mut rhs = 0.0;
    for x in neighborhood(g, &support)? {
        let ux = value(u, x)?;
        rhs += 0.5 * ux * ux * gradient_sq(g, phi, x);
    }
    Ok(InequalityReport::new("caccioppoli", lhs, rhs))
}

/// Time-dependent cut-off `tau -> phi_tau`, finitely supported.
pub trait Cutoff: Send + Sync {
    fn value(&self, tau: f64) -> Field;

    /// `d_tau phi_tau^2` when known analytically.
    fn square_derivative(&self, _tau: f64) -> Option<Field> {
        None
    }
}

/// A cut-off that does not move in time.
#[derive(Debug, Clone)]
pub struct StaticCutoff(pub Field);

impl Cutoff for StaticCutoff {
    fn value(&self, _tau: f64) -> Field {
        self.0.clone()
    }

    fn square_derivative(&self, _tau: f64) -> Option<Field> {
        Some(Field::constant(0.0))
    }
}

fn square_derivative(phi: &dyn Cutoff, tau: f64) -> Field {
    if let Some(d) = phi.square_derivative(tau) {
        return d;
    }
    let h = 1e-6 * tau.max(1.0);
    let (lo, hi) = if tau > h { (tau - h, tau + h) } else { (tau, tau + h) };
    let sq = |s: f64| phi.value(s).map(|v| v * v);
    sq(hi).combine(1.0 / (hi - lo), &sq(lo), -1.0 / (hi - lo))
}

/// Simpson weights on `panels` (rounded up to even) subintervals of `[a, b]`.
pub(crate) fn simpson_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = (panels.max(2) + 1) & !1;
    let h = (b - a) / panels as f64;
    (0..=panels)
        .map(|i| {
            let w = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + h * i as f64, w * h / 3.0)
        })
        .collect()
}

fn weighted_mass(g: &dyn Graph, u: &Field, phi: &Field, support: &BTreeSet<Vertex>) -> Result<f64> {
    let mut acc = 0.0;
    for &x in support {
        let p = phi.get(x).unwrap_or(0.0);
        if p != 0.0 {
            let ux = value(u, x)?;
            acc += ux * ux * p * p * g.measure(x);
        }
    }
    Ok(acc)
}

/// `sum u_t^2 phi_t^2 m <= sum u_{t-d}^2 phi_{t-d}^2 m
///   + int_{t-d}^t sum u^2 (d_tau phi^2 m + |grad phi|^2) dtau`,
/// with the time integral by composite Simpson on `quadrature_n` panels.
pub fn check_basic_estimate(
    g: &dyn Graph,
    u: &dyn HeatSource,
    phi: &dyn Cutoff,
    support: &BTreeSet<Vertex>,
    t: f64,
    delta: f64,
    quadrature_n: usize,
) -> Result<InequalityReport> {
    if !(delta > 0.0 && delta <= t) {
        return Err(Error::PreconditionViolated(vec![format!("need 0 < delta = {delta} <= t = {t}")]));
    }
    let near = neighborhood(g, support)?;
    let nodes = simpson_nodes(t - delta, t, quadrature_n);
    let mut integral = 0.0;
    for &(tau, w) in &nodes {
        let p = phi.value(tau);
        if let Some(x) = p.support().into_iter().find(|x| !support.contains(x)) {
            return Err(Error::SupportNotFixed(x));
        }
        let dp = square_derivative(phi, tau);
        let ut = u.at(tau)?;
        let mut acc = 0.0;
        for &x in &near {
            let ux = value(&ut, x)?;
            if ux == 0.0 {
                continue;
            }
            let time_part = if support.contains(&x) { dp.get(x).unwrap_or(0.0) * g.measure(x) } else { 0.0 };
            acc += ux * ux * (time_part + gradient_sq(g, &p, x));
        }
        integral += w * acc;
    }
    let lhs = weighted_mass(g, &u.at(t)?, &phi.value(t), support)?;
    let start = weighted_mass(g, &u.at(t - delta)?, &phi.value(t - delta), support)?;
    Ok(InequalityReport::new("basic-estimate", lhs, start + integral))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MainEstimateParams {
    pub r: f64,
    pub big_r: f64,
    pub lambda: f64,
    pub delta: f64,
    pub t: f64,
    pub c: f64,
    pub eps: f64,
    /// Bound on the jump size `s`.
    pub s: f64,
    /// Bound on `s_{r - 2s}`.
    pub s_inner: f64,
}

impl MainEstimateParams {
    /// `s_{r-2s} (4(R-r) + 2s)`.
    fn exponent_numerator(&self) -> f64 {
        self.s_inner * (4.0 * (self.big_r - self.r) + 2.0 * self.s)
    }

    /// Smallest `C` with `C >= 8 exp(s_{r-2s}(4(R-r)+2s) / (C delta))`.
    pub fn minimal_c(&self) -> f64 {
        let k = self.exponent_numerator() / self.delta;
        let h = |c: f64| c - 8.0 * (k / c).exp();
        // h(8) <= 0 since k >= 0, so the root lies above 8
        let (mut lo, mut hi) = (8.0f64, 16.0f64);
        while h(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Every violated constraint, in words.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(2.0 * self.s < self.r && self.r < self.big_r) {
            out.push(format!("need 2s < r < R (s = {}, r = {}, R = {})", self.s, self.r, self.big_r));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            out.push(format!("need 0 < lambda < 1 (lambda = {})", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta <= self.t) {
            out.push(format!("need 0 < delta <= t (delta = {}, t = {})", self.delta, self.t));
        }
        if !(self.c > 0.0) {
            out.push(format!("need C > 0 (C = {})", self.c));
        } else {
            let bound = 8.0 * (self.exponent_numerator() / (self.c * self.delta)).exp();
            if !(self.c >= bound) {
                out.push(format!("need C >= {bound:e} (C = {})", self.c));
            }
        }
        let eps_bound = 2.0 * self.s_inner * self.s_inner / self.c;
        if !(self.eps > 0.0 && self.eps >= eps_bound) {
            out.push(format!("need eps >= {eps_bound:e} (eps = {})", self.eps));
        }
        out
    }
}

fn ball_mass(g: &dyn Graph, d: &EdgeLengthMetric, u: &Field, r: f64) -> Result<f64> {
    let b = ball(g, d, r, DEFAULT_BUDGET)?;
    if b.truncated {
        return Err(Error::TruncatedBall { radius: r, budget: DEFAULT_BUDGET });
    }
    let mut acc = 0.0;
    for x in b.vertices {
        let ux = value(u, x)?;
        acc += ux * ux * g.measure(x);
    }
    Ok(acc)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

/// Checks
/// `sum_{B_r} u_t^2 m <= e^{eps/(C delta)} sum_{B_R} u_{t-delta}^2 m
///   + e^{2 eps/(C delta)} 2/((1-lambda)^2 (R-r)^2) e^{-(lambda(R-r)-s)_+^2/(C delta) + f(R+s)}`.
///
/// The declared `s` and `s_{r-2s}` must bound the actual jump sizes.
pub fn check_main_estimate(
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    u: &dyn HeatSource,
    p: &MainEstimateParams,
    f: &GrowthFunction,
) -> Result<InequalityReport> {
    let mut violations = p.violations();
    match jump_size_outside(g, d, 0.0, DEFAULT_BUDGET) {
        Ok(s) if s <= p.s => {}
        Ok(s) => violations.push(format!("declared s = {} below the jump size {s}", p.s)),
        Err(_) => violations.push("jump size could not be certified".into()),
    }
    match jump_size_outside(g, d, p.r - 2.0 * p.s, DEFAULT_BUDGET) {
        Ok(s) if s <= p.s_inner => {}
        Ok(s) => violations.push(format!("declared s_(r-2s) = {} below the actual {s}", p.s_inner)),
        Err(_) => violations.push("s_(r-2s) could not be certified".into()),
    }
    if !violations.is_empty() {
        return Err(Error::PreconditionViolated(violations));
    }
    let lhs = ball_mass(g, d, &u.at(p.t)?, p.r)?;
    let earlier = ball_mass(g, d, &u.at(p.t - p.delta)?, p.big_r)?;
    let cd = p.c * p.delta;
    let gap = p.big_r - p.r;
    let log_first = p.eps / cd + earlier.ln();
    let reach = (p.lambda * gap - p.s).max(0.0);
    let log_second =
        2.0 * p.eps / cd + 2f64.ln() - 2.0 * ((1.0 - p.lambda) * gap).ln() - reach * reach / cd + f.eval(p.big_r + p.s);
    let rhs = log_sum_exp(log_first, log_second).exp();
    Ok(InequalityReport::new("main-estimate", lhs, rhs))
}

/// Constants for Grigor'yan's inequality.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GrigoryanConstants {
    pub r0: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

/// Constants of the recipe together with its intermediate choices.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GrigoryanRecipe {
    pub constants: GrigoryanConstants,
    pub e_prime: f64,
    pub alpha: f64,
    /// Lower bound for the main-estimate constant `C`.
    pub c: f64,
}

/// Follows the choice of parameters that derives Grigor'yan's inequality
/// from the main estimate, for a graph with `s_r <= B r / f(A r)` whenever
/// `r >= r_gl`, and `1 < E' < E < A`.
///
/// `alpha = 32/(E'-1)^2` makes `alpha ((E'-1) r/2 - s)_+^2 / r^2 >= 2`
/// for `r >= 4s/(E'-1)`.
pub fn grigoryan_constants(
    s: f64,
    a: f64,
    b: f64,
    r_gl: f64,
    e: f64,
    e_prime: f64,
    f: &GrowthFunction,
) -> Result<GrigoryanRecipe> {
    if !(1.0 < e_prime && e_prime < e && e < a) {
        return Err(Error::InvalidArgument(format!("need 1 < E' < E < A (E' = {e_prime}, E = {e}, A = {a})")));
    }
    if !(b > 0.0 && s >= 0.0) {
        return Err(Error::InvalidArgument(format!("need B > 0 and s >= 0 (B = {b}, s = {s})")));
    }
    let gap = e_prime - 1.0;
    let alpha = 32.0 / (gap * gap);
    let growth = 4.0 * alpha * a * b;
    let c = 8.0 * growth.exp();
    let d = 8.0 * alpha * growth.exp();
    let r0 =
        [4.0 * s / gap, s / (e - e_prime), r_gl + 2.0 * s, 2.0 * s * a / (a - e), 1.0].into_iter().fold(1.0, f64::max);
    let f_at = f.eval(a * (r0 - 2.0 * s));
    if !(f_at > 0.0) {
        return Err(Error::NonPositiveBound(a * (r0 - 2.0 * s)));
    }
    let big_f = (alpha * b * b * (-growth).exp() / (4.0 * f_at)).exp().max(1.0 + f64::EPSILON);
    let g = 8.0 * big_f * big_f / (gap * gap);
    Ok(GrigoryanRecipe { constants: GrigoryanConstants { r0, d, e, f: big_f, g }, e_prime, alpha, c })
}

/// Checks `sum_{B_r} u_t^2 m <= F sum_{B_{Er}} u_{t-delta}^2 m + G e^{-f(Er)} / r^2`.
#[allow(clippy::too_many_arguments)]
pub fn check_grigoryan(
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    u: &dyn HeatSource,
    k: &GrigoryanConstants,
    r: f64,
    delta: f64,
    t: f64,
    f: &GrowthFunction,
) -> Result<InequalityReport> {
    let mut violations = Vec::new();
    if !(r >= k.r0) {
        violations.push(format!("need r >= r0 (r = {r}, r0 = {})", k.r0));
    }
    let delta_max = r * r / (k.d * f.eval(k.e * r));
    if !(delta > 0.0 && delta <= delta_max) {
        violations.push(format!("need 0 < delta <= r^2/(D f(Er)) = {delta_max:e} (delta = {delta})"));
    }
    if !(delta <= t) {
        violations.push(format!("need delta <= t (delta = {delta}, t = {t})"));
    }
    if !violations.is_empty() {
        return Err(Error::PreconditionViolated(violations));
    }
    let lhs = ball_mass(g, d, &u.at(t)?, r)?;
    let earlier = ball_mass(g, d, &u.at(t - delta)?, k.e * r)?;
    let rhs = k.f * earlier + k.g * (-f.eval(k.e * r)).exp() / (r * r);
    Ok(InequalityReport::new("grigoryan", lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiniteGraph;
    use crate::heat::dirichlet::DirichletSystem;
    use crate::heat::field::{SemigroupSource, ZeroSolution};

    fn v(i: i64) -> Vertex {
        Vertex(i)
    }

    #[test]
    fn caccioppoli_constant_u() {
        let g = FiniteGraph::path(4, 1.0);
        let u = Field::constant(2.0);
        let phi = Field::finite([(v(1), 1.0), (v(2), 0.5)]);
        let rep = check_caccioppoli(&g, &u, &phi).unwrap();
        assert_eq!(rep.lhs, 0.0);
        // |grad phi|^2 at 0,1,2,3: 1, 1.25, 0.5, 0.25; halved and times 4
        assert!((rep.slack - 0.5 * 4.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn caccioppoli_single_edge_indicator() {
        let g = FiniteGraph::path(2, 1.0);
        let u = Field::finite([(v(0), 1.0)]);
        let phi = Field::finite([(v(0), 1.0)]);
        let rep = check_caccioppoli(&g, &u, &phi).unwrap();
        // L u(0) = 1, lhs = -1; rhs = 1/2 * 1 * 1 = 1/2
        assert_eq!(rep.lhs, -1.0);
        assert_eq!(rep.rhs, 0.5);
        assert_eq!(rep.slack, 1.5);
    }

    #[test]
    fn caccioppoli_needs_neighbor_values() {
        let g = FiniteGraph::path(3, 1.0);
        let u = Field::on_region([(v(1), 1.0)]);
        let phi = Field::finite([(v(1), 1.0)]);
        assert!(matches!(check_caccioppoli(&g, &u, &phi), Err(Error::IncompleteNeighborData(_))));
    }

    #[test]
    fn basic_estimate_with_static_cutoff() {
        let g = FiniteGraph::path(6, 1.0);
        let verts = g.vertices().unwrap();
        let sys = DirichletSystem::from_vertices(&g, &verts).unwrap();
        let src = SemigroupSource::new(&sys, &Field::finite([(v(2), 1.0), (v(3), -0.5)]), 1e-8).unwrap();
        let phi = StaticCutoff(Field::finite([(v(1), 0.5), (v(2), 1.0), (v(3), 1.0)]));
        let k: BTreeSet<Vertex> = [v(1), v(2), v(3)].into();
        let rep = check_basic_estimate(&g, &src, &phi, &k, 1.0, 0.5, 64).unwrap();
        assert!(rep.slack >= -1e-8, "{rep:?}");
        let rep = check_basic_estimate(&g, &src, &phi, &k, 1.0, 1e-9, 2).unwrap();
        assert!(rep.slack.abs() < 1e-7);
    }

    #[test]
    fn basic_estimate_zero_cutoff() {
        let g = FiniteGraph::path(3, 1.0);
        let phi = StaticCutoff(Field::finite([]));
        let rep = check_basic_estimate(&g, &ZeroSolution, &phi, &BTreeSet::new(), 1.0, 0.5, 8).unwrap();
        assert_eq!(rep.slack, 0.0);
    }

    struct Moving;

    impl Cutoff for Moving {
        fn value(&self, tau: f64) -> Field {
            if tau < 0.5 {
                Field::finite([(Vertex(0), 1.0)])
            } else {
                Field::finite([(Vertex(2), 1.0)])
            }
        }
    }

    #[test]
    fn moving_support_is_rejected() {
        let g = FiniteGraph::path(3, 1.0);
        let k: BTreeSet<Vertex> = [v(0)].into();
        let err = check_basic_estimate(&g, &ZeroSolution, &Moving, &k, 1.0, 1.0, 4).unwrap_err();
        assert_eq!(err, Error::SupportNotFixed(v(2)));
    }

    fn params() -> MainEstimateParams {
        let mut p = MainEstimateParams {
            r: 3.0,
            big_r: 6.0,
            lambda: 0.5,
            delta: 0.5,
            t: 1.0,
            c: 0.0,
            eps: 0.0,
            s: 1.0,
            s_inner: 1.0,
        };
        p.c = p.minimal_c();
        p.eps = 2.0 * p.s_inner * p.s_inner / p.c;
        p
    }

    #[test]
    fn minimal_c_is_a_fixed_point() {
        let p = params();
        let k = p.s_inner * (4.0 * (p.big_r - p.r) + 2.0 * p.s) / p.delta;
        assert!((p.c - 8.0 * (k / p.c).exp()).abs() < 1e-9 * p.c);
        assert!(p.violations().is_empty(), "{:?}", p.violations());
    }

    #[test]
    fn main_estimate_zero_solution() {
        let g = FiniteGraph::path(10, 1.0);
        let d = EdgeLengthMetric::uniform(v(0), 1.0);
        let rep = check_main_estimate(&g, &d, &ZeroSolution, &params(), &GrowthFunction::power(2.0)).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.slack > 0.0);
    }

    #[test]
    fn main_estimate_rejects_small_c() {
        let g = FiniteGraph::path(10, 1.0);
        let d = EdgeLengthMetric::uniform(v(0), 1.0);
        let mut p = params();
        p.c *= 0.5;
        let err = check_main_estimate(&g, &d, &ZeroSolution, &p, &GrowthFunction::power(2.0)).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    #[test]
    fn grigoryan_zero_solution_and_delta_bound() {
        let g = FiniteGraph::path(40, 1.0);
        let d = EdgeLengthMetric::uniform(v(0), 1.0);
        let f = GrowthFunction::Power { p: 2.0, scale: 1e-3, offset: 0.0 };
        let recipe = grigoryan_constants(1.0, 2.0, 4e-3, 1.0, 1.5, 1.25, &f).unwrap();
        let k = recipe.constants;
        let r = k.r0.max(4.0);
        let dmax = r * r / (k.d * f.eval(k.e * r));
        let rep = check_grigoryan(&g, &d, &ZeroSolution, &k, r, dmax, 1.0, &f).unwrap();
        assert!(rep.slack >= 0.0);
        let err = check_grigoryan(&g, &d, &ZeroSolution, &k, r, 2.0 * dmax, 1.0, &f).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }
}
