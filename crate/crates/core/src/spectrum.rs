//! Finite sections of `(Hψ)(n) = ψ(n+1) + ψ(n−1) + V(n)ψ(n)`.
//!
//! A section on `N` consecutive sites with Dirichlet boundary is a symmetric
//! tridiagonal matrix with `V` on the diagonal and ones beside it.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynsys::{DynSystem, TorusPoint};
use crate::error::{Error, Result};
use crate::potential::{csv_err, sample_potential, PotentialWindow, SampleFn};

/// Residual accepted from inverse iteration.
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    /// Site index of `diag[0]`.
    first_site: i64,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        Self::with_first_site(diag, 0)
    }

    pub fn with_first_site(diag: Vec<f64>, first_site: i64) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("operator needs N >= 1".into()));
        }
        Ok(TridiagonalOperator { diag, first_site })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    /// `[min V − 2, max V + 2]`, which contains every Gershgorin disc.
    pub fn gershgorin(&self) -> (f64, f64) {
        let lo = self.diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let r = if self.n() > 1 { 2.0 } else { 0.0 };
        (lo - r, hi + r)
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Entry `(i, j)` addressed by site index.
    pub fn entry(&self, i: i64, j: i64) -> f64 {
        let (a, b) = (i - self.first_site, j - self.first_site);
        let n = self.n() as i64;
        if a < 0 || b < 0 || a >= n || b >= n {
            0.0
        } else if a == b {
            self.diag[a as usize]
        } else if (a - b).abs() == 1 {
            1.0
        } else {
            0.0
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += x[i - 1];
                }
                if i + 1 < n {
                    y += x[i + 1];
                }
                y
            })
            .collect()
    }

    /// The `m × m` leading principal submatrix.
    pub fn leading(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n() {
            return Err(Error::InvalidArgument(format!("leading size must be in 1..={}", self.n())));
        }
        Self::with_first_site(self.diag[..m].to_vec(), self.first_site)
    }
}

/// Section on sites `center − ⌊N/2⌋ .. center − ⌊N/2⌋ + N − 1`.
pub fn build_truncation(v: &PotentialWindow, n: usize, center: i64) -> Result<TridiagonalOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let start = center - (n / 2) as i64;
    let end = start + n as i64 - 1;
    if start < v.lo() || end > v.hi() {
        return Err(Error::WindowTooSmall {
            need_lo: start,
            need_hi: end,
            have_lo: v.lo(),
            have_hi: v.hi(),
        });
    }
    let diag = (start..=end).map(|i| v.get(i).unwrap()).collect();
    TridiagonalOperator::with_first_site(diag, start)
}

/// Number of eigenvalues strictly below `lambda`, from the signs of the
/// pivots of `T − λI`.
pub fn sturm_count(t: &TridiagonalOperator, lambda: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut d = 1.0f64;
    for (i, a) in t.diag.iter().enumerate() {
        d = if i == 0 { a - lambda } else { a - lambda - 1.0 / d };
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_eigenvalue(t: &TridiagonalOperator, k: usize, tol: f64) -> f64 {
    let (mut lo, mut hi) = t.gershgorin();
    lo -= tol;
    hi += tol;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues in ascending order, each bracketed to width `tol`.
pub fn eigenvalues_sturm(t: &TridiagonalOperator, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    if t.n() == 1 {
        return Ok(t.diag.clone());
    }
    Ok((0..t.n()).into_par_iter().map(|k| kth_eigenvalue(t, k, tol)).collect())
}

/// Solves `(T − λI) y = b` by Gaussian elimination with row pivoting; tiny
/// pivots are replaced so exact eigenvalues do not break the solve.
fn shifted_solve(t: &TridiagonalOperator, lambda: f64, b: &[f64]) -> Vec<f64> {
    let n = t.n();
    let scale = t.gershgorin().1.abs().max(t.gershgorin().0.abs()).max(1.0);
    let guard = f64::EPSILON * scale;
    // rows hold up to three nonzeros after pivoting: (main, next, next2)
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let mut cur = (t.diag[0] - lambda, if n > 1 { 1.0 } else { 0.0 }, 0.0);
    for i in 0..n {
        if i + 1 < n {
            let below: (f64, f64, f64) = (1.0, t.diag[i + 1] - lambda, if i + 2 < n { 1.0 } else { 0.0 });
            if below.0.abs() > cur.0.abs() {
                rhs.swap(i, i + 1);
                let m = cur.0 / below.0;
                u0[i] = below.0;
                u1[i] = below.1;
                u2[i] = below.2;
                cur = (cur.1 - m * below.1, cur.2 - m * below.2, 0.0);
                rhs[i + 1] -= m * rhs[i];
            } else {
                let p = if cur.0.abs() < guard { guard } else { cur.0 };
                let m = below.0 / p;
                u0[i] = p;
                u1[i] = cur.1;
                u2[i] = cur.2;
                cur = (below.1 - m * cur.1, below.2 - m * cur.2, 0.0);
                rhs[i + 1] -= m * rhs[i];
            }
        } else {
            u0[i] = if cur.0.abs() < guard { guard } else { cur.0 };
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / u0[i];
    }
    x
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn residual(t: &TridiagonalOperator, lambda: f64, x: &[f64]) -> f64 {
    let hx = t.apply(x);
    norm2(&hx.iter().zip(x).map(|(h, v)| h - lambda * v).collect::<Vec<_>>())
}

/// Unit eigenvector for `lambda` by inverse iteration, orthogonal to
/// `against`. The sign is fixed so the first non-negligible entry is positive.
pub fn eigenvector_at(t: &TridiagonalOperator, lambda: f64, against: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let n = t.n();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()).collect();
    let mut best = (x.clone(), f64::INFINITY);
    for _ in 0..MAX_SWEEPS {
        let mut y = shifted_solve(t, lambda, &x);
        for q in against {
            let dot: f64 = y.iter().zip(q).map(|(a, b)| a * b).sum();
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi -= dot * qi;
            }
        }
        let nrm = norm2(&y);
        if !(nrm > 0.0) || !nrm.is_finite() {
            break;
        }
        x = y.into_iter().map(|v| v / nrm).collect();
        let r = residual(t, lambda, &x);
        if r < best.1 {
            best = (x.clone(), r);
        }
        if r <= RESIDUAL_TOL * 1e-4 {
            break;
        }
    }
    if best.1 > RESIDUAL_TOL {
        return Err(Error::NoConvergence { best_residual: best.1 });
    }
    let mut v = best.0;
    let big = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-8 * big) {
        if *first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok((v, best.1))
}

/// `Σx⁴ / (Σx²)²`.
pub fn ipr(x: &[f64]) -> f64 {
    let s2: f64 = x.iter().map(|v| v * v).sum();
    let s4: f64 = x.iter().map(|v| v.powi(4)).sum();
    s4 / (s2 * s2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ipr: Vec<f64>,
}

impl SpectrumReport {
    /// CSV with columns `index, eigenvalue, residual, ipr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "eigenvalue", "residual", "ipr"]).map_err(csv_err)?;
        for (i, ((e, r), p)) in self.eigenvalues.iter().zip(&self.residuals).zip(&self.ipr).enumerate() {
            w.write_record([
                i.to_string(),
                format!("{e:.16e}"),
                format!("{r:.16e}"),
                format!("{p:.16e}"),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Eigenvalues, eigenvector residuals and IPRs of a section.
pub fn spectrum_report(t: &TridiagonalOperator, tol: f64) -> Result<SpectrumReport> {
    let eigenvalues = eigenvalues_sturm(t, tol)?;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(t.n());
    let mut residuals = Vec::with_capacity(t.n());
    let mut iprs = Vec::with_capacity(t.n());
    let cluster = 1e-6 * t.gershgorin().1.abs().max(t.gershgorin().0.abs()).max(1.0);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let near: Vec<Vec<f64>> = (0..k)
            .rev()
            .take_while(|&j| lambda - eigenvalues[j] < cluster)
            .map(|j| vectors[j].clone())
            .collect();
        let (x, r) = eigenvector_at(t, lambda, &near)?;
        residuals.push(r);
        iprs.push(ipr(&x));
        vectors.push(x);
    }
    Ok(SpectrumReport {
        eigenvalues,
        residuals,
        ipr: iprs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecaySummary {
    pub max_ipr: f64,
    pub median_ipr: f64,
}

pub fn decay_diagnostic(report: &SpectrumReport) -> Result<DecaySummary> {
    if report.ipr.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum report".into()));
    }
    let mut v = report.ipr.clone();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median_ipr = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    Ok(DecaySummary {
        max_ipr: v[n - 1],
        median_ipr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub t: i64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Largest `|n|` compared.
    pub interior: i64,
    pub max_abs_diff: f64,
    pub pass: bool,
}

/// Compares `H_{T^tω}` with `U_t H_ω U_t^*`, `U_tψ(n) = ψ(n+t)`, entrywise on
/// interior sites: `H_{T^tω}[n][j]` against `H_ω[n+t][j+t]` for
/// `|n|, |j| ≤ N/2 − |t| − 1`.
pub fn covariance_check(f: &SampleFn, sys: &DynSystem, omega: &TorusPoint, t: i64, n: usize) -> Result<CovarianceReport> {
    covariance_diff(f, sys, omega, t, n, 1)
}

/// `sign = 1` is the conjugation above; `sign = −1` compares against
/// `U_t^* H_ω U_t` instead.
pub(crate) fn covariance_diff(
    f: &SampleFn,
    sys: &DynSystem,
    omega: &TorusPoint,
    t: i64,
    n: usize,
    sign: i64,
) -> Result<CovarianceReport> {
    let need = 2 * t.unsigned_abs() as usize + 4;
    if n < need {
        return Err(Error::InvalidArgument(format!("N must be at least 2|t| + 4 = {need}")));
    }
    let half = (n / 2) as i64;
    let shifted = sys.iterate(omega, t)?;
    let lo = -half;
    let hi = lo + n as i64 - 1;
    let a = build_truncation(&sample_potential(f, sys, &shifted, lo, hi)?, n, 0)?;
    let b = build_truncation(&sample_potential(f, sys, omega, lo, hi)?, n, 0)?;
    let interior = half - t.abs() - 1;
    let mut max_abs_diff = 0.0f64;
    for i in -interior..=interior {
        for j in (i - 1).max(-interior)..=(i + 1).min(interior) {
            let d = (a.entry(i, j) - b.entry(i + sign * t, j + sign * t)).abs();
            max_abs_diff = max_abs_diff.max(d);
        }
    }
    Ok(CovarianceReport {
        t,
        n,
        interior,
        max_abs_diff,
        pass: max_abs_diff <= 1e-12,
    })
}
