//! High-precision evaluation of `g(t) = e^{-1/t^2}`, its derivatives and the
//! explicit nonzero solution on the huang graph.
//!
//! `g^{(k)}(t) = P_k(1/t) g(t)` with integer polynomials
//! `P_0 = 1`, `P_{k+1}(s) = 2 s^3 P_k(s) - s^2 P_k'(s)`.

use std::sync::{Arc, Mutex};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;

use super::huang::huang_weight;
use crate::error::{Error, Result};
use crate::graph::{Field, Vertex};
use crate::heat::HeatSource;

pub type HighPrecision = FBig<HalfEven, 2>;

pub const DEFAULT_PRECISION: usize = 256;
/// Extra bits used by the self-check.
const GUARD_BITS: usize = 64;
/// The working result must agree with the guarded one to this many bits.
const AGREEMENT_BITS: i32 = 64;

/// Integer coefficient tables of `P_0, ..., P_{k_max}`, lowest degree first.
#[derive(Debug, Clone)]
pub struct LaurentRep {
    polys: Vec<Vec<IBig>>,
}

impl LaurentRep {
    pub fn new(k_max: usize) -> Self {
        let mut polys = vec![vec![IBig::ONE]];
        for k in 0..k_max {
            let p = &polys[k];
            let mut next = vec![IBig::ZERO; p.len() + 3];
            for (j, a) in p.iter().enumerate() {
                next[j + 3] += a * IBig::from(2);
                if j > 0 {
                    next[j + 1] -= a * IBig::from(j);
                }
            }
            while next.len() > 1 && next.last() == Some(&IBig::ZERO) {
                next.pop();
            }
            polys.push(next);
        }
        Self { polys }
    }

    pub fn k_max(&self) -> usize {
        self.polys.len() - 1
    }

    /// Coefficients of `P_k`, index = power of `s`.
    pub fn coefficients(&self, k: usize) -> &[IBig] {
        &self.polys[k]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.polys[k].len() - 1
    }
}

static TABLE: Mutex<Option<Arc<LaurentRep>>> = Mutex::new(None);

/// Shared table covering at least `P_0..P_{k_max}`.
pub fn laurent_table(k_max: usize) -> Arc<LaurentRep> {
    let mut guard = TABLE.lock().unwrap_or_else(|e| e.into_inner());
    match guard.as_ref() {
        Some(t) if t.k_max() >= k_max => t.clone(),
        _ => {
            let t = Arc::new(LaurentRep::new(k_max.max(32)));
            *guard = Some(t.clone());
            t
        }
    }
}

fn int(x: &IBig, p: usize) -> HighPrecision {
    HighPrecision::from(x.clone()).with_precision(p).value()
}

fn real(x: f64, p: usize) -> Result<HighPrecision> {
    let v = HighPrecision::try_from(x).map_err(|_| Error::InvalidArgument(format!("{x} is not finite")))?;
    Ok(v.with_precision(p).value())
}

fn horner(coeffs: &[IBig], s: &HighPrecision, p: usize) -> HighPrecision {
    let mut acc = int(&IBig::ZERO, p);
    for c in coeffs.iter().rev() {
        acc = acc * s + int(c, p);
    }
    acc
}

/// `1/t` and `g(t)` at working precision `p`.
fn base(t: f64, p: usize) -> Result<(HighPrecision, HighPrecision)> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    let s = int(&IBig::ONE, p) / real(t, p)?;
    let g = (-(&s * &s)).exp();
    Ok((s, g))
}

/// Runs `eval` at `bits` and `bits + 64` and requires 64 agreeing bits.
fn self_checked(bits: usize, eval: impl Fn(usize) -> Result<HighPrecision>) -> Result<HighPrecision> {
    if bits < 64 {
        return Err(Error::InvalidArgument(format!("precision {bits} below 64 bits")));
    }
    let lo = eval(bits)?;
    let hi = eval(bits + GUARD_BITS)?;
    if hi == HighPrecision::ZERO {
        return if lo == HighPrecision::ZERO { Ok(lo) } else { Err(Error::PrecisionInsufficient(bits)) };
    }
    let lo_wide = lo.clone().with_precision(bits + GUARD_BITS).value();
    let rel = ((lo_wide - &hi) / &hi).to_f64().value().abs();
    if rel <= 2f64.powi(-AGREEMENT_BITS) {
        Ok(lo)
    } else {
        Err(Error::PrecisionInsufficient(bits))
    }
}

fn g_derivative_at(table: &LaurentRep, k: usize, t: f64, p: usize) -> Result<HighPrecision> {
    let (s, g) = base(t, p)?;
    Ok(horner(table.coefficients(k), &s, p) * g)
}

/// `g^{(k)}(t)` with `bits` of working precision.
pub fn g_derivative(k: usize, t: f64, bits: usize) -> Result<HighPrecision> {
    let table = laurent_table(k);
    self_checked(bits, |p| g_derivative_at(&table, k, t, p))
}

/// Index on the nonnegative half: `u(n) = u(-n-1)`.
fn fold(n: i64) -> u64 {
    if n >= 0 {
        n as u64
    } else {
        (-(n + 1)) as u64
    }
}

/// `n! sum_{k<=n} binom(n,k)/k! P_{k+shift}`, an integer polynomial.
fn series_poly(table: &LaurentRep, n: u64, shift: usize) -> Vec<IBig> {
    let n = n as usize;
    let mut out: Vec<IBig> = vec![IBig::ZERO; table.degree(n + shift) + 1];
    // binom(n,k) n!/k! built incrementally from k = n downwards
    let mut binom = IBig::ONE;
    let mut falling = IBig::ONE;
    for k in (0..=n).rev() {
        let w = &binom * &falling;
        for (j, c) in table.coefficients(k + shift).iter().enumerate() {
            out[j] += &w * c;
        }
        if k > 0 {
            binom = binom * IBig::from(k) / IBig::from(n - k + 1);
            falling *= IBig::from(k);
        }
    }
    out
}

fn factorial(n: u64) -> IBig {
    (1..=n).fold(IBig::ONE, |acc, j| acc * IBig::from(j))
}

fn series_at(table: &LaurentRep, n: u64, shift: usize, t: f64, p: usize) -> Result<HighPrecision> {
    let (s, g) = base(t, p)?;
    let poly = series_poly(table, n, shift);
    Ok(horner(&poly, &s, p) * g / int(&factorial(n), p))
}

/// `u_t(n) = sum_{k=0}^{n} binom(n,k)/k! g^{(k)}(t)`, extended by
/// `u_t(n) = u_t(-n-1)` to negative `n`.
pub fn huang_solution(n: i64, t: f64, bits: usize) -> Result<HighPrecision> {
    let m = fold(n);
    let table = laurent_table(m as usize + 1);
    self_checked(bits, |p| series_at(&table, m, 0, t, p))
}

/// `d_t u_t(n) = sum_k binom(n,k)/k! g^{(k+1)}(t)`.
pub fn huang_solution_dt(n: i64, t: f64, bits: usize) -> Result<HighPrecision> {
    let m = fold(n);
    let table = laurent_table(m as usize + 1);
    self_checked(bits, |p| series_at(&table, m, 1, t, p))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ResidualRow {
    pub n: i64,
    pub t: f64,
    pub u: f64,
    /// `|d_t u + L u|`.
    pub residual: f64,
    /// `|d_t u + L u| / (1 + |u|)`.
    pub relative: f64,
}

/// Heat residual of the explicit solution at every `|n| <= n_max` and
/// time, computed entirely in high precision.
pub fn huang_residual(n_max: i64, times: &[f64], bits: usize) -> Result<Vec<ResidualRow>> {
    let mut rows = Vec::new();
    for &t in times {
        // values on [-n_max-1, n_max+1]; only the nonnegative half is evaluated
        let half: Vec<HighPrecision> = (0..=n_max + 1).map(|m| huang_solution(m, t, bits)).collect::<Result<_>>()?;
        let value = |n: i64| &half[fold(n) as usize];
        for n in -n_max..=n_max {
            let u = value(n);
            let dt = huang_solution_dt(n, t, bits)?;
            let w_right = real(huang_weight(n), bits)?;
            let w_left = real(huang_weight(n - 1), bits)?;
            let lu = w_right * (u - value(n + 1)) + w_left * (u - value(n - 1));
            let res = (dt + lu).to_f64().value().abs();
            let uf = u.to_f64().value();
            rows.push(ResidualRow { n, t, u: uf, residual: res, relative: res / (1.0 + uf.abs()) });
        }
    }
    Ok(rows)
}

/// Smallest `c` with `|g^{(k)}(t)| <= k! (2k/c)^{k/2}` over `1 <= k <= k_max`
/// and the given times.
pub fn calibrate_derivative_constant(k_max: usize, times: &[f64], bits: usize) -> Result<f64> {
    let mut c = f64::INFINITY;
    for k in 1..=k_max {
        let log_fact = (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
        for &t in times {
            let v = g_derivative(k, t, bits)?;
            let a = v.to_f64().value().abs();
            if a == 0.0 {
                continue;
            }
            // c <= 2k / (|g^{(k)}|/k!)^{2/k}
            let bound = (2.0 * k as f64).ln() - 2.0 / k as f64 * (a.ln() - log_fact);
            c = c.min(bound.exp());
        }
    }
    Ok(c)
}

/// Smallest `C` (to bisection accuracy) with `|u_t(n)| <= C e^{C n log n}`
/// for `0 <= n <= n_max` at the given times; `n log n` uses the folded index.
pub fn calibrate_growth_constant(n_max: i64, times: &[f64], bits: usize) -> Result<f64> {
    let mut samples = Vec::new();
    for &t in times {
        for n in 0..=n_max {
            let u = huang_solution(n, t, bits)?.to_f64().value().abs();
            let nl = if n > 1 { n as f64 * (n as f64).ln() } else { 0.0 };
            samples.push((u, nl));
        }
    }
    let ok = |c: f64| samples.iter().all(|&(u, nl)| u.ln() <= c.ln() + c * nl || u == 0.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Unbounded);
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The explicit solution on `|n| <= n_max + 1`, rounded to doubles.
#[derive(Debug, Clone, Copy)]
pub struct HuangSolution {
    pub n_max: i64,
    pub bits: usize,
}

impl HuangSolution {
    fn field(&self, t: f64, dt: bool) -> Result<Field> {
        let r = self.n_max + 1;
        let half: Vec<f64> = (0..=r)
            .map(|m| {
                let v = if dt { huang_solution_dt(m, t, self.bits)? } else { huang_solution(m, t, self.bits)? };
                Ok(v.to_f64().value())
            })
            .collect::<Result<_>>()?;
        Ok(Field::on_region((-r - 1..=r).map(|n| (Vertex(n), half[fold(n) as usize]))))
    }
}

impl HeatSource for HuangSolution {
    fn at(&self, t: f64) -> Result<Field> {
        self.field(t, false)
    }

    fn derivative_at(&self, t: f64) -> Result<Option<Field>> {
        self.field(t, true).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: HighPrecision) -> f64 {
        x.to_f64().value()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs().max(1e-300)
    }

    #[test]
    fn first_derivatives_at_one() {
        let e = (-1f64).exp();
        assert!(close(f(g_derivative(0, 1.0, 256).unwrap()), e));
        assert!(close(f(g_derivative(1, 1.0, 256).unwrap()), 2.0 * e));
        assert!(close(f(g_derivative(2, 1.0, 256).unwrap()), -2.0 * e));
    }

    #[test]
    fn second_polynomial() {
        let t = LaurentRep::new(2);
        let c: Vec<IBig> = [0, 0, 0, 0, -6, 0, 4].iter().map(|&v| IBig::from(v)).collect();
        assert_eq!(t.coefficients(2), &c[..]);
        assert_eq!(t.degree(2), 6);
    }

    /// Symbolic differentiation of `q(s) e^{-s^2}` with `s = 1/t`:
    /// `d/dt = -s^2 d/ds` and `d/ds e^{-s^2} = -2 s e^{-s^2}`.
    #[test]
    fn recurrence_matches_symbolic_derivative() {
        let table = LaurentRep::new(10);
        let mut q: Vec<i128> = vec![1];
        for k in 0..=10 {
            let got: Vec<i128> = table.coefficients(k).iter().map(|c| i128::try_from(c.clone()).unwrap()).collect();
            assert_eq!(got, q, "k = {k}");
            assert_eq!(table.degree(k), 3 * k);
            // d/ds (q e^{-s^2}) = (q' - 2 s q) e^{-s^2}; multiply by -s^2
            let mut dq = vec![0i128; q.len() + 3];
            for (j, &a) in q.iter().enumerate() {
                if j > 0 {
                    dq[j + 1] -= j as i128 * a;
                }
                dq[j + 3] += 2 * a;
            }
            while dq.len() > 1 && *dq.last().unwrap() == 0 {
                dq.pop();
            }
            q = dq;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        for k in 0..4 {
            let num =
                (f(g_derivative(k, 0.7 + h, 256).unwrap()) - f(g_derivative(k, 0.7 - h, 256).unwrap())) / (2.0 * h);
            let exact = f(g_derivative(k + 1, 0.7, 256).unwrap());
            assert!((num - exact).abs() < 1e-6 * exact.abs().max(1.0), "k = {k}");
        }
    }

    #[test]
    fn solution_small_cases() {
        let g = f(g_derivative(0, 0.8, 256).unwrap());
        assert_eq!(f(huang_solution(0, 0.8, 256).unwrap()), g);
        assert_eq!(f(huang_solution(-1, 0.8, 256).unwrap()), g);
        let u1 = g + f(g_derivative(1, 0.8, 256).unwrap());
        assert!(close(f(huang_solution(1, 0.8, 256).unwrap()), u1));
    }

    #[test]
    fn symmetry_is_exact() {
        for n in 0..12 {
            assert_eq!(huang_solution(n, 0.4, 256).unwrap(), huang_solution(-n - 1, 0.4, 256).unwrap());
        }
    }

    #[test]
    fn small_residual() {
        let rows = huang_residual(6, &[0.3, 1.0], 256).unwrap();
        let worst = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn low_precision_is_flagged() {
        // heavy cancellation at large n and moderate t
        let err = huang_solution(60, 0.3, 64).unwrap_err();
        assert_eq!(err, Error::PrecisionInsufficient(64));
    }

    #[test]
    fn vanishes_at_time_zero() {
        for n in 0..6 {
            let a = f(huang_solution(n, 1e-1, 256).unwrap()).abs();
            let b = f(huang_solution(n, 1e-2, 256).unwrap()).abs();
            let c = f(huang_solution(n, 1e-3, 256).unwrap()).abs();
            assert!(a > b || b == 0.0);
            assert!(b >= c);
            assert!(c < 1e-6);
        }
    }
}
