//! Uniqueness-class diagnostics: the volume growth integral, the growth
//! condition for solutions, and the hypotheses behind it.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::heat::HeatField;
use crate::metric::{
    ball, check_intrinsic, classify_increments, ls, Divergence, EdgeLengthMetric, GlReport, GlVerdict, GrowthFunction,
    IntegralReport, VolumeProfile,
};

/// `int_1^R r / ls(V(r)) dr` at each radius of the increasing list `radii`,
/// integrating exactly between the jumps of the step function `V`.
pub fn volume_integral_at(profile: &VolumeProfile, radii: &[f64]) -> Vec<f64> {
    let steps: Vec<(f64, f64)> = profile.steps().collect();
    let mut out = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut pos = 1.0f64;
    // index of the last step at or before `pos`
    let mut k = steps.partition_point(|s| s.0 <= pos);
    for &target in radii {
        while pos < target {
            let vol = if k == 0 { 0.0 } else { steps[k - 1].1 };
            let next = steps.get(k).map_or(f64::INFINITY, |s| s.0).min(target);
            acc += (next * next - pos * pos) / (2.0 * ls(vol));
            pos = next;
            if k < steps.len() && steps[k].0 <= pos {
                k += 1;
            }
        }
        out.push(acc);
    }
    out
}

/// Partial integrals of `int_1^R r / ls(m(B_r)) dr` at `R = 2, 4, ... <= r_max`.
pub fn volume_growth_integral(
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    r_max: f64,
    budget: usize,
) -> Result<IntegralReport> {
    if !(r_max >= 2.0) {
        return Err(Error::InvalidArgument(format!("r_max = {r_max} must be at least 2")));
    }
    let map = d.distances(g, r_max, budget)?;
    if map.truncated {
        return Err(Error::TruncatedBall { radius: r_max, budget });
    }
    let profile = VolumeProfile::from_distances(g, &map);
    let mut radii = Vec::new();
    let mut r = 2.0;
    while r <= r_max * (1.0 + 1e-12) {
        radii.push(r);
        r *= 2.0;
    }
    let values = volume_integral_at(&profile, &radii);
    let checkpoints: Vec<(f64, f64)> = radii.into_iter().zip(values).collect();
    let diagnostic = classify_increments(&checkpoints);
    Ok(IntegralReport { checkpoints, diagnostic })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GcRow {
    pub r: f64,
    pub lhs_integral: f64,
    pub e_f_r: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GcReport {
    pub rows: Vec<GcRow>,
    pub pass: bool,
}

/// Compares `int_0^T sum_{B_r} u_t^2 m dt` with `e^{f(r)}`, integrating by
/// the trapezoid rule over the stored times in `(0, T]`.
pub fn uniqueness_growth_check(
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    u: &HeatField,
    f: &GrowthFunction,
    t_max: f64,
    radii: &[f64],
    budget: usize,
) -> Result<GcReport> {
    let k = u.times.partition_point(|&t| t <= t_max);
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let b = ball(g, d, r, budget)?;
        if b.truncated {
            return Err(Error::TruncatedBall { radius: r, budget });
        }
        let mass: Vec<f64> = u.frames[..k]
            .iter()
            .map(|frame| {
                b.vertices
                    .iter()
                    .map(|&x| frame.get(x).map(|v| v * v * g.measure(x)).ok_or(Error::IncompleteNeighborData(x)))
                    .sum::<Result<f64>>()
            })
            .collect::<Result<_>>()?;
        let lhs_integral: f64 = (1..k).map(|i| 0.5 * (mass[i] + mass[i - 1]) * (u.times[i] - u.times[i - 1])).sum();
        let fr = f.eval(r);
        let pass = lhs_integral.ln() <= fr || lhs_integral == 0.0;
        rows.push(GcRow { r, lhs_integral, e_f_r: fr.exp(), pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(GcReport { rows, pass })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct UniquenessVerdict {
    pub corroborated: bool,
    pub gl_bounded: bool,
    pub integral_divergent: bool,
    pub finite_balls: bool,
    pub intrinsic: bool,
    pub notes: Vec<String>,
}

const PROBE_RADIUS: f64 = 64.0;
const PROBE_BUDGET: usize = 100_000;

/// Whether the hypotheses of the uniqueness class are numerically
/// corroborated: bounded GL trend, divergent integral, finite balls and an
/// intrinsic metric on a probe ball. This does not assert anything about
/// solutions.
pub fn uniqueness_verdict(
    g: &dyn Graph,
    d: &EdgeLengthMetric,
    gl: &GlReport,
    integral: &IntegralReport,
) -> Result<UniquenessVerdict> {
    let mut notes = Vec::new();
    let gl_bounded = gl.verdict == GlVerdict::Bounded;
    if !gl_bounded {
        notes.push(format!("GL diagnostic: {:?}", gl.verdict));
    }
    let integral_divergent = integral.diagnostic == Divergence::DivergentTrend;
    if !integral_divergent {
        notes.push("integral of r/f(r) shows a plateau".into());
    }
    let radius = gl.rows.last().map_or(PROBE_RADIUS, |r| r.r).min(PROBE_RADIUS);
    let probe = ball(g, d, radius, PROBE_BUDGET)?;
    let finite_balls = !probe.truncated;
    if !finite_balls {
        notes.push(format!("ball of radius {radius} exceeds {PROBE_BUDGET} vertices"));
    }
    let intrinsic = check_intrinsic(g, d, &probe.vertices)?.intrinsic;
    if !intrinsic {
        notes.push("metric is not intrinsic on the probe ball".into());
    }
    let corroborated = gl_bounded && integral_divergent && finite_balls && intrinsic;
    Ok(UniquenessVerdict { corroborated, gl_bounded, integral_divergent, finite_balls, intrinsic, notes })
}
