//! Solutions of the heat equation: evaluation interface, tabulated fields
//! and the residual `|d_t u + L u|`.

use std::collections::BTreeSet;

use super::dirichlet::DirichletSystem;
use super::expm::Semigroup;
use crate::error::{Error, Result};
use crate::graph::{Field, Graph, Vertex};

/// Anything that can produce `u_t` as a field, for `t > 0`.
pub trait HeatSource: Send + Sync {
    fn at(&self, t: f64) -> Result<Field>;

    /// `d_t u_t` when known analytically.
    fn derivative_at(&self, _t: f64) -> Result<Option<Field>> {
        Ok(None)
    }
}

/// Identically zero solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSolution;

impl HeatSource for ZeroSolution {
    fn at(&self, _t: f64) -> Result<Field> {
        Ok(Field::constant(0.0))
    }

    fn derivative_at(&self, _t: f64) -> Result<Option<Field>> {
        Ok(Some(Field::constant(0.0)))
    }
}

/// `u_t = e^{-t L_R} u_0` on a Dirichlet set, extended by zero outside.
///
/// The extension solves the heat equation at every vertex of the set.
#[derive(Debug, Clone)]
pub struct SemigroupSource<'a> {
    semigroup: Semigroup<'a>,
    initial: Vec<f64>,
    rtol: f64,
}

impl<'a> SemigroupSource<'a> {
    pub fn new(sys: &'a DirichletSystem, initial: &Field, rtol: f64) -> Result<Self> {
        let initial = sys.vertices.iter().map(|&x| initial.get(x).unwrap_or(0.0)).collect();
        Ok(Self { semigroup: Semigroup::new(sys)?, initial, rtol })
    }

    fn to_field(&self, values: Vec<f64>) -> Field {
        Field::finite(self.semigroup.system().vertices.iter().copied().zip(values))
    }
}

impl HeatSource for SemigroupSource<'_> {
    fn at(&self, t: f64) -> Result<Field> {
        Ok(self.to_field(self.semigroup.apply(&self.initial, t, self.rtol)?))
    }

    fn derivative_at(&self, t: f64) -> Result<Option<Field>> {
        let u = self.semigroup.apply(&self.initial, t, self.rtol)?;
        let lu = self.semigroup.system().apply(&u);
        Ok(Some(self.to_field(lu.into_iter().map(|v| -v).collect())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    Semigroup,
    ClosedForm,
    User,
}

/// `u` tabulated on an increasing grid of positive times.
#[derive(Debug, Clone)]
pub struct HeatField {
    pub times: Vec<f64>,
    pub frames: Vec<Field>,
    pub derivatives: Option<Vec<Field>>,
    pub initial: Field,
    pub provenance: Provenance,
}

impl HeatField {
    pub fn tabulate(source: &dyn HeatSource, times: &[f64], initial: Field, provenance: Provenance) -> Result<Self> {
        if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("time grid must be positive and increasing".into()));
        }
        let frames = times.iter().map(|&t| source.at(t)).collect::<Result<Vec<_>>>()?;
        let derivatives = times.iter().map(|&t| source.derivative_at(t)).collect::<Result<Option<Vec<_>>>>()?;
        Ok(Self { times: times.to_vec(), frames, derivatives, initial, provenance })
    }

    fn frame_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| s == t)
            .ok_or_else(|| Error::InvalidArgument(format!("time {t} is not on the stored grid")))
    }

    /// Largest `|u_t(x)|` over the stored frames.
    pub fn sup_abs(&self) -> f64 {
        self.frames.iter().flat_map(|f| f.entries().map(|(_, v)| v.abs())).fold(0.0, f64::max)
    }
}

impl HeatSource for HeatField {
    fn at(&self, t: f64) -> Result<Field> {
        Ok(self.frames[self.frame_index(t)?].clone())
    }

    fn derivative_at(&self, t: f64) -> Result<Option<Field>> {
        let i = self.frame_index(t)?;
        Ok(self.derivatives.as_ref().map(|d| d[i].clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtMode {
    Analytic,
    /// Five-point central difference with step `h`.
    CentralDifference {
        h: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// `(t, x, |d_t u + L u|, |u|)` for every probed pair.
    pub entries: Vec<(f64, Vertex, f64, f64)>,
    pub max_abs: f64,
    /// Largest `|d_t u + L u| / (1 + |u|)`.
    pub max_relative: f64,
}

/// `max |d_t u + L u|` over `region x times`.
pub fn heat_residual(
    g: &dyn Graph,
    u: &dyn HeatSource,
    region: &[Vertex],
    times: &[f64],
    mode: DtMode,
) -> Result<ResidualReport> {
    let mut entries = Vec::with_capacity(region.len() * times.len());
    let (mut max_abs, mut max_relative) = (0.0f64, 0.0f64);
    for &t in times {
        let ut = u.at(t)?;
        let dt = match mode {
            DtMode::Analytic => u
                .derivative_at(t)?
                .ok_or_else(|| Error::InvalidArgument("no analytic time derivative available".into()))?,
            DtMode::CentralDifference { h } => {
                if !(h > 0.0 && h < t / 2.0) {
                    return Err(Error::InvalidArgument(format!("difference step {h} must lie in (0, t/2)")));
                }
                let stencil = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
                let mut acc = Field::constant(0.0);
                for (k, w) in stencil {
                    acc = acc.combine(1.0, &u.at(t + k * h)?, w / (12.0 * h));
                }
                acc
            }
        };
        let needed: BTreeSet<Vertex> = region.iter().copied().collect();
        for &x in &needed {
            let lu = crate::graph::laplacian_apply(g, &ut, x).map_err(|e| match e {
                Error::NotInDomain(v) => Error::IncompleteNeighborData(v),
                other => other,
            })?;
            let ux = ut.get(x).ok_or(Error::IncompleteNeighborData(x))?;
            let dx = dt.get(x).ok_or(Error::IncompleteNeighborData(x))?;
            let res = (dx + lu).abs();
            max_abs = max_abs.max(res);
            max_relative = max_relative.max(res / (1.0 + ux.abs()));
            entries.push((t, x, res, ux.abs()));
        }
    }
    Ok(ResidualReport { entries, max_abs, max_relative })
}
