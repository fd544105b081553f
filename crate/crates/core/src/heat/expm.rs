//! Action of `e^{-t L_R}` by a rational approximation on a parabolic
//! contour: each node costs one banded complex solve with `z M + t K`,
//! where `L_R = M^{-1} K`.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;

use super::dirichlet::DirichletSystem;
use crate::error::{Error, Result};

const NODE_COUNTS: [usize; 3] = [32, 48, 64];
const MAX_BAND_STORAGE: usize = 1 << 27;

/// Reverse Cuthill-McKee order of the system's sparsity pattern;
/// `order[new] = old`.
pub fn rcm_order(sys: &DirichletSystem) -> Vec<usize> {
    let n = sys.len();
    let degree: Vec<usize> = sys.rows.iter().map(|r| r.len()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            let mut next: Vec<usize> = sys.rows[i].iter().map(|&(j, _)| j).filter(|&j| !seen[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            next.dedup();
            for j in next {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Reordered sparsity data shared by all shifted solves.
#[derive(Debug, Clone)]
pub struct BandStructure {
    /// `order[new] = old`.
    pub order: Vec<usize>,
    position: Vec<usize>,
    pub bandwidth: usize,
}

impl BandStructure {
    pub fn new(sys: &DirichletSystem) -> Result<Self> {
        let order = rcm_order(sys);
        let mut position = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut bandwidth = 0;
        for (i, row) in sys.rows.iter().enumerate() {
            for &(j, _) in row {
                bandwidth = bandwidth.max(position[i].abs_diff(position[j]));
            }
        }
        if order.len().saturating_mul(3 * bandwidth + 1) > MAX_BAND_STORAGE {
            return Err(Error::BudgetExceeded(MAX_BAND_STORAGE));
        }
        Ok(Self { order, position, bandwidth })
    }
}

/// Solves `(z M + t K) y = rhs` (all in permuted order) by banded Gaussian
/// elimination with partial pivoting. Row `i` keeps columns
/// `[i - bw, i + 2 bw]`, which holds the pivoting fill-in.
fn shifted_solve(
    sys: &DirichletSystem,
    band: &BandStructure,
    z: Complex64,
    t: f64,
    mut rhs: Vec<Complex64>,
) -> Vec<Complex64> {
    let n = sys.len();
    let bw = band.bandwidth;
    let width = 3 * bw + 1;
    let mut a = vec![Complex64::new(0.0, 0.0); n * width];
    let at = |i: usize, j: usize| i * width + (j + bw - i);
    for new_i in 0..n {
        let old_i = band.order[new_i];
        a[at(new_i, new_i)] = z * sys.measure[old_i] + t * sys.degree[old_i];
        for &(old_j, w) in &sys.rows[old_i] {
            let new_j = band.position[old_j];
            a[at(new_i, new_j)] -= t * w;
        }
    }
    for k in 0..n {
        let last_row = (k + bw).min(n - 1);
        let last_col = (k + 2 * bw).min(n - 1);
        let mut p = k;
        let mut best = a[at(k, k)].norm();
        for i in k + 1..=last_row {
            let v = a[at(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            for j in k..=last_col {
                let (x, y) = (at(k, j), at(p, j));
                a.swap(x, y);
            }
            rhs.swap(k, p);
        }
        let pivot = a[at(k, k)];
        for i in k + 1..=last_row {
            let factor = a[at(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            a[at(i, k)] = Complex64::new(0.0, 0.0);
            for j in k + 1..=last_col {
                let u = a[at(k, j)];
                a[at(i, j)] -= factor * u;
            }
            let r = rhs[k];
            rhs[i] -= factor * r;
        }
    }
    for k in (0..n).rev() {
        let last_col = (k + 2 * bw).min(n - 1);
        let mut acc = rhs[k];
        for j in k + 1..=last_col {
            acc -= a[at(k, j)] * rhs[j];
        }
        rhs[k] = acc / a[at(k, k)];
    }
    rhs
}

fn contour_apply(sys: &DirichletSystem, band: &BandStructure, f: &[f64], t: f64, nodes: usize) -> Vec<f64> {
    let n = sys.len();
    let scale = nodes as f64;
    let rhs: Vec<Complex64> = (0..n)
        .map(|new_i| {
            let old = band.order[new_i];
            Complex64::new(sys.measure[old] * f[old], 0.0)
        })
        .collect();
    let terms: Vec<Vec<Complex64>> = (0..nodes / 2)
        .into_par_iter()
        .map(|k| {
            let theta = -std::f64::consts::PI + (k as f64 + 0.5) * 2.0 * std::f64::consts::PI / scale;
            let z = scale * Complex64::new(0.1309 - 0.1194 * theta * theta, 0.25 * theta);
            let dz = scale * Complex64::new(-0.2388 * theta, 0.25);
            let y = shifted_solve(sys, band, z, t, rhs.clone());
            let w = z.exp() * dz;
            y.into_iter().map(|v| w * v).collect()
        })
        .collect();
    let mut out = vec![0.0; n];
    for term in &terms {
        for (new_i, v) in term.iter().enumerate() {
            out[band.order[new_i]] += v.im;
        }
    }
    out.iter_mut().for_each(|v| *v *= 2.0 / scale);
    out
}

/// Precomputed ordering for repeated applications of `e^{-t L_R}`.
#[derive(Debug, Clone)]
pub struct Semigroup<'a> {
    sys: &'a DirichletSystem,
    band: BandStructure,
}

impl<'a> Semigroup<'a> {
    pub fn new(sys: &'a DirichletSystem) -> Result<Self> {
        Ok(Self { sys, band: BandStructure::new(sys)? })
    }

    pub fn system(&self) -> &DirichletSystem {
        self.sys
    }

    /// `e^{-t L_R} f`, accepted when it agrees with two half steps to
    /// within `rtol * |f|_inf`.
    pub fn apply(&self, f: &[f64], t: f64, rtol: f64) -> Result<Vec<f64>> {
        check_args(self.sys, f, t, rtol)?;
        if t == 0.0 || f.is_empty() {
            return Ok(f.to_vec());
        }
        let norm = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            return Ok(vec![0.0; f.len()]);
        }
        let mut worst = 0.0;
        for &nodes in &NODE_COUNTS {
            let full = contour_apply(self.sys, &self.band, f, t, nodes);
            let half = contour_apply(self.sys, &self.band, f, t / 2.0, nodes);
            let twice = contour_apply(self.sys, &self.band, &half, t / 2.0, nodes);
            let err = full.iter().zip(&twice).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / norm;
            if err.is_finite() && err <= rtol {
                return Ok(full);
            }
            worst = err;
        }
        Err(Error::NoConvergence(format!("step-halving discrepancy {worst:e} exceeds rtol {rtol:e} at t = {t}")))
    }
}

fn check_args(sys: &DirichletSystem, f: &[f64], t: f64, rtol: f64) -> Result<()> {
    if f.len() != sys.len() {
        return Err(Error::InvalidArgument(format!("vector of length {} for a system of size {}", f.len(), sys.len())));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
    }
    if !(rtol > 0.0 && rtol <= 1e-3) {
        return Err(Error::InvalidArgument(format!("rtol {rtol} must lie in (0, 1e-3]")));
    }
    Ok(())
}

/// `e^{-t L_R} f` for a single application.
pub fn semigroup_apply(sys: &DirichletSystem, f: &[f64], t: f64, rtol: f64) -> Result<Vec<f64>> {
    check_args(sys, f, t, rtol)?;
    Semigroup::new(sys)?.apply(f, t, rtol)
}
