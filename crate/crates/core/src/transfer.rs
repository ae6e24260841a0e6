//! 2×2 transfer matrices for `ψ(n+1) + ψ(n−1) + V(n)ψ(n) = Eψ(n)`.
//!
//! `Ψ(n) = (ψ(n), ψ(n+1))` and `Ψ(n) = A(n)Ψ(n−1)` with
//! `A(n) = ((0, 1), (−1, E − V(n)))`. Norms are operator 2-norms.

use std::fmt::Debug;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{csv_err, periodic_approximant, PotentialWindow};

/// Real or complex entries.
pub trait Scalar:
    Copy + Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Send + Sync
{
    fn from_real(x: f64) -> Self;
    fn norm_sqr(self) -> f64;
    fn inv(self) -> Self;

    fn zero() -> Self {
        Self::from_real(0.0)
    }

    fn one() -> Self {
        Self::from_real(1.0)
    }

    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn inv(self) -> Self {
        1.0 / self
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn inv(self) -> Self {
        Complex64::inv(&self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mat2<S = f64> {
    pub a11: S,
    pub a12: S,
    pub a21: S,
    pub a22: S,
}

impl<S: Scalar> Mat2<S> {
    pub fn new(a11: S, a12: S, a21: S, a22: S) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Self::new(S::one(), S::zero(), S::zero(), S::one())
    }

    pub fn det(&self) -> S {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.abs() <= 1e-300 {
            return Err(Error::SingularMatrix(d.abs()));
        }
        let r = d.inv();
        Ok(Self::new(self.a22 * r, -self.a12 * r, -self.a21 * r, self.a11 * r))
    }

    pub fn apply(&self, v: StateVec<S>) -> StateVec<S> {
        StateVec {
            psi_n: self.a11 * v.psi_n + self.a12 * v.psi_n1,
            psi_n1: self.a21 * v.psi_n + self.a22 * v.psi_n1,
        }
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr()
    }

    /// Largest singular value: `σ² = (s + √(s² − 4|det|²))/2`, `s` the
    /// squared Frobenius norm.
    pub fn norm(&self) -> f64 {
        let s = self.frobenius_sqr();
        let d2 = self.det().norm_sqr();
        ((s + (s * s - 4.0 * d2).max(0.0).sqrt()) / 2.0).sqrt()
    }

    /// `B^a` for any integer `a` (negative powers need `B` invertible).
    pub fn pow(&self, a: i64) -> Result<Self> {
        let base = if a < 0 { self.inverse()? } else { *self };
        let mut out = Self::identity();
        for _ in 0..a.unsigned_abs() {
            out = base * out;
        }
        Ok(out)
    }
}

impl<S: Scalar> Mul for Mat2<S> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        Mat2::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl<S: Scalar> Sub for Mat2<S> {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        Mat2::new(self.a11 - b.a11, self.a12 - b.a12, self.a21 - b.a21, self.a22 - b.a22)
    }
}

/// `Ψ(n) = (ψ(n), ψ(n+1))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateVec<S = f64> {
    pub psi_n: S,
    pub psi_n1: S,
}

impl<S: Scalar> StateVec<S> {
    pub fn new(psi_n: S, psi_n1: S) -> Self {
        StateVec { psi_n, psi_n1 }
    }

    pub fn norm(&self) -> f64 {
        (self.psi_n.norm_sqr() + self.psi_n1.norm_sqr()).sqrt()
    }
}

/// `((0, 1), (−1, E − v))`.
pub fn transfer_matrix<S: Scalar>(e: S, v: f64) -> Mat2<S> {
    Mat2::new(S::zero(), S::one(), -S::one(), e - S::from_real(v))
}

/// `((E − v, −1), (1, 0))`, the exact inverse of [`transfer_matrix`].
pub fn transfer_matrix_inverse<S: Scalar>(e: S, v: f64) -> Mat2<S> {
    Mat2::new(e - S::from_real(v), -S::one(), S::one(), S::zero())
}

fn need(v: &PotentialWindow, lo: i64, hi: i64) -> Result<()> {
    if lo < v.lo() || hi > v.hi() {
        return Err(Error::WindowTooSmall {
            need_lo: lo,
            need_hi: hi,
            have_lo: v.lo(),
            have_hi: v.hi(),
        });
    }
    Ok(())
}

fn v_at(v: &PotentialWindow, j: i64) -> Result<f64> {
    v.get(j).ok_or(Error::WindowTooSmall {
        need_lo: j,
        need_hi: j,
        have_lo: v.lo(),
        have_hi: v.hi(),
    })
}

/// `Ψ(n)` from `Ψ(0)`, forward with `A(j)` or backward with `A(j)^{-1}`.
pub fn propagate<S: Scalar>(v: &PotentialWindow, e: S, psi0: StateVec<S>, n: i64) -> Result<StateVec<S>> {
    let mut psi = psi0;
    if n >= 0 {
        for j in 1..=n {
            psi = transfer_matrix(e, v_at(v, j)?).apply(psi);
        }
    } else {
        for j in (n + 1..=0).rev() {
            psi = transfer_matrix_inverse(e, v_at(v, j)?).apply(psi);
        }
    }
    Ok(psi)
}

/// `Ψ(to)` from `Ψ(from)` for any pair of indices.
pub fn propagate_between<S: Scalar>(
    v: &PotentialWindow,
    e: S,
    psi: StateVec<S>,
    from: i64,
    to: i64,
) -> Result<StateVec<S>> {
    let mut psi = psi;
    if to >= from {
        for j in from + 1..=to {
            psi = transfer_matrix(e, v_at(v, j)?).apply(psi);
        }
    } else {
        for j in (to + 1..=from).rev() {
            psi = transfer_matrix_inverse(e, v_at(v, j)?).apply(psi);
        }
    }
    Ok(psi)
}

/// `Ψ(n)` for every `n ∈ [lo, hi]`, `lo ≤ 0 ≤ hi`, in order.
pub fn propagate_range<S: Scalar>(
    v: &PotentialWindow,
    e: S,
    psi0: StateVec<S>,
    lo: i64,
    hi: i64,
) -> Result<Vec<StateVec<S>>> {
    if lo > 0 || hi < 0 {
        return Err(Error::InvalidArgument("range must contain 0".into()));
    }
    need(v, lo + 1, hi)?;
    let mut back = Vec::with_capacity((-lo) as usize);
    let mut psi = psi0;
    for j in (lo + 1..=0).rev() {
        psi = transfer_matrix_inverse(e, v_at(v, j)?).apply(psi);
        back.push(psi);
    }
    back.reverse();
    back.push(psi0);
    psi = psi0;
    for j in 1..=hi {
        psi = transfer_matrix(e, v_at(v, j)?).apply(psi);
        back.push(psi);
    }
    Ok(back)
}

/// `A(p)···A(1)`.
pub fn monodromy<S: Scalar>(v: &PotentialWindow, e: S, p: u64) -> Result<Mat2<S>> {
    let mut m = Mat2::identity();
    for j in 1..=p as i64 {
        m = transfer_matrix(e, v_at(v, j)?) * m;
    }
    Ok(m)
}

fn product<S: Scalar>(seq: &[Mat2<S>]) -> Mat2<S> {
    seq.iter().fold(Mat2::identity(), |acc, a| *a * acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TelescopingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `‖Π A_m − Π A‖ ≤ n · S^{n−1} · sup_j ‖A_m(j) − A(j)‖` with `S` the sup of
/// the norms over both families.
pub fn telescoping_bound_check<S: Scalar>(a_seq: &[Mat2<S>], am_seq: &[Mat2<S>]) -> Result<TelescopingCheck> {
    if a_seq.len() != am_seq.len() {
        return Err(Error::DimensionMismatch {
            expected: a_seq.len(),
            got: am_seq.len(),
        });
    }
    if a_seq.is_empty() {
        return Err(Error::InvalidArgument("sequences must be non-empty".into()));
    }
    let n = a_seq.len();
    let lhs = (product(am_seq) - product(a_seq)).norm();
    let sup = a_seq.iter().chain(am_seq).map(Mat2::norm).fold(0.0f64, f64::max);
    let diff = a_seq
        .iter()
        .zip(am_seq)
        .map(|(a, b)| (*b - *a).norm())
        .fold(0.0f64, f64::max);
    let rhs = n as f64 * sup.powi(n as i32 - 1) * diff;
    Ok(TelescopingCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CayleyCheck {
    pub max_norm: f64,
    pub holds: bool,
}

/// `max_{a=±1,±2} ‖B^a x‖ ≥ 1/2` for unimodular-or-not invertible `B`.
pub fn cayley_bound_check<S: Scalar>(b: &Mat2<S>, x: StateVec<S>) -> Result<CayleyCheck> {
    let d = b.det().abs();
    if d <= 1e-12 {
        return Err(Error::SingularMatrix(d));
    }
    let nx = x.norm();
    if (nx - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitVector(nx));
    }
    let inv = b.inverse()?;
    let max_norm = [*b * *b, *b, inv, inv * inv]
        .iter()
        .map(|m| m.apply(x).norm())
        .fold(0.0f64, f64::max);
    Ok(CayleyCheck {
        max_norm,
        holds: max_norm >= 0.5 - 1e-9,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub cases: u64,
    pub failures: u64,
    /// Smallest `rhs − lhs` (Aux1) or `max_norm − 1/2` (Aux2) seen.
    pub min_slack: f64,
    pub seed: u64,
}

fn random_mat(rng: &mut ChaCha8Rng, r: f64) -> Mat2 {
    Mat2::new(
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
    )
}

/// Random pairs of sequences, lengths `1..=max_len`, entries in `[−2, 2]`.
pub fn aux1_suite(cases: u64, max_len: usize, seed: u64) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..cases {
        let n = rng.gen_range(1..=max_len.max(1));
        let a: Vec<Mat2> = (0..n).map(|_| random_mat(&mut rng, 2.0)).collect();
        let b: Vec<Mat2> = (0..n).map(|_| random_mat(&mut rng, 2.0)).collect();
        let c = telescoping_bound_check(&a, &b)?;
        failures += u64::from(!c.holds);
        min_slack = min_slack.min(c.rhs - c.lhs);
    }
    Ok(SuiteSummary {
        cases,
        failures,
        min_slack,
        seed,
    })
}

/// Random `B` with entries in `[−5, 5]`, `|det B| ≥ 1e−6`, and random unit `x`.
pub fn aux2_suite(cases: u64, seed: u64) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..cases {
        let b = loop {
            let b = random_mat(&mut rng, 5.0);
            if b.det().abs() >= 1e-6 {
                break b;
            }
        };
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = cayley_bound_check(&b, StateVec::new(t.cos(), t.sin()))?;
        failures += u64::from(!c.holds);
        min_slack = min_slack.min(c.max_norm - 0.5);
    }
    Ok(SuiteSummary {
        cases,
        failures,
        min_slack,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "T_m")]
    pub t: u64,
    /// `max_{a=±1,±2} ‖Ψ(aT)‖ / ‖Ψ(0)‖`.
    pub ratio: f64,
    /// Sup of `‖Ψ(n)‖²/‖Ψ(0)‖²` over all `n` probed so far.
    pub running_sup: f64,
    /// `max(fwd, bwd)` Gordon deviation of the window at period `T`.
    pub deviation: f64,
    /// Perturbation term `2T · S^{2T−1} · δ` comparing with the `T`-periodic
    /// approximant on `[−2T, 2T]`; zero for exactly periodic windows.
    pub deviation_bound: f64,
    pub floor: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
}

impl ProbeReport {
    /// CSV with columns `E, T_m, ratio, running_sup, deviation_bound`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["E", "T_m", "ratio", "running_sup", "deviation_bound"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                format!("{:.16e}", r.e),
                r.t.to_string(),
                format!("{:.16e}", r.ratio),
                format!("{:.16e}", r.running_sup),
                format!("{:.16e}", r.deviation_bound),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Four-point growth ratios at `a·T` for each `T` in `t_list`.
pub fn gordon_lower_bound_probe(
    v: &PotentialWindow,
    e: f64,
    psi0: StateVec,
    t_list: &[u64],
) -> Result<ProbeReport> {
    let n0 = psi0.norm();
    if !(n0 > 0.0) {
        return Err(Error::InvalidArgument("initial condition must be nonzero".into()));
    }
    if t_list.is_empty() || t_list.contains(&0) {
        return Err(Error::InvalidArgument("T list must be non-empty positive integers".into()));
    }
    let t_max = *t_list.iter().max().unwrap() as i64;
    need(v, -2 * t_max, 2 * t_max + 1)?;
    let mut running_sup = 0.0f64;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let ti = t as i64;
        let states = propagate_range(v, e, psi0, -2 * ti, 2 * ti)?;
        let at = |n: i64| states[(n + 2 * ti) as usize].norm();
        let ratio = [-2, -1, 1, 2].iter().map(|&a| at(a * ti)).fold(0.0f64, f64::max) / n0;
        running_sup = states
            .iter()
            .map(|s| s.norm() * s.norm() / (n0 * n0))
            .fold(running_sup, f64::max);

        let approx = periodic_approximant(v, t, 1)?;
        let mut delta = 0.0f64;
        let mut sup = 0.0f64;
        for j in 1 - 2 * ti..=2 * ti {
            let vj = v.get(j).unwrap_or(0.0);
            let wj = approx.eval(j);
            delta = delta.max((vj - wj).abs());
            sup = sup
                .max(transfer_matrix(e, vj).norm())
                .max(transfer_matrix(e, wj).norm());
        }
        let n = 2.0 * t as f64;
        let deviation_bound = if delta == 0.0 {
            0.0
        } else {
            n * sup.powf(n - 1.0) * delta
        };
        let deviation = approx.max_residual();
        let floor = 0.5 - deviation_bound;
        rows.push(ProbeRow {
            e,
            t,
            ratio,
            running_sup,
            deviation,
            deviation_bound,
            floor,
            holds: ratio >= floor - 1e-9,
        });
    }
    Ok(ProbeReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::AlphaRep;
    use crate::dynsys::{DynSystem, TorusPoint};
    use crate::potential::{sample_potential, SampleFn};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn transfer_examples() {
        assert_eq!(transfer_matrix(0.0, 0.0), Mat2::new(0.0, 1.0, -1.0, 0.0));
        assert_eq!(transfer_matrix(2.0, 1.0), Mat2::new(0.0, 1.0, -1.0, 1.0));
        let a = transfer_matrix(1.3, -0.7);
        assert_eq!(a * transfer_matrix_inverse(1.3, -0.7), Mat2::identity());
        let c = transfer_matrix(Complex64::new(0.5, 0.25), 0.1);
        assert!((c.det() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn norm_closed_form() {
        assert_eq!(Mat2::new(3.0, 0.0, 0.0, -2.0).norm(), 3.0);
        let r = Mat2::new(0.6, -0.8, 0.8, 0.6);
        assert_relative_eq!(r.norm(), 1.0, epsilon = 1e-15);
        // ((1,1),(0,1)) has σ_max = golden ratio
        assert_relative_eq!(Mat2::new(1.0, 1.0, 0.0, 1.0).norm(), (1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn free_propagation() {
        let v = PotentialWindow::from_fn(-10, 10, |_| 0.0).unwrap();
        let psi0 = StateVec::new(0.3, -1.2);
        assert_eq!(propagate(&v, 0.0, psi0, 4).unwrap(), psi0);
        assert_eq!(propagate(&v, 0.0, StateVec::new(1.0, 0.0), 1).unwrap(), StateVec::new(0.0, -1.0));
        match propagate(&v, 0.0, psi0, 12) {
            Err(Error::WindowTooSmall { need_lo: 11, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn telescoping_examples() {
        let a = vec![Mat2::identity()];
        let b = vec![Mat2::new(1.0, 0.0, 0.0, 2.0)];
        let c = telescoping_bound_check(&a, &b).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (1.0, 1.0, true));
        let same = telescoping_bound_check(&b, &b).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert!(telescoping_bound_check(&a, &[]).is_err());
    }

    #[test]
    fn cayley_examples() {
        let x = StateVec::new(0.6, 0.8);
        assert_relative_eq!(cayley_bound_check(&Mat2::identity(), x).unwrap().max_norm, 1.0);
        let d = cayley_bound_check(&Mat2::new(2.0, 0.0, 0.0, 0.5), StateVec::new(1.0, 0.0)).unwrap();
        assert_eq!(d.max_norm, 4.0);
        let t = 0.9f64;
        let rot = Mat2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        assert_relative_eq!(cayley_bound_check(&rot, x).unwrap().max_norm, 1.0, epsilon = 1e-14);
        assert!(matches!(
            cayley_bound_check(&Mat2::new(1.0, 2.0, 2.0, 4.0), x),
            Err(Error::SingularMatrix(_))
        ));
        assert!(matches!(
            cayley_bound_check(&Mat2::identity(), StateVec::new(1.0, 1.0)),
            Err(Error::NotUnitVector(_))
        ));
    }

    #[test]
    fn suites_hold() {
        let a1 = aux1_suite(1000, 20, 7).unwrap();
        assert_eq!(a1.failures, 0);
        let a2 = aux2_suite(10_000, 7).unwrap();
        assert_eq!(a2.failures, 0);
        assert!(a2.min_slack >= -1e-9);
    }

    #[test]
    fn free_probe_preserves_norm() {
        let v = PotentialWindow::from_fn(-10, 10, |_| 0.0).unwrap();
        let r = gordon_lower_bound_probe(&v, 0.0, StateVec::new(1.0, 0.0), &[1, 2, 3]).unwrap();
        for row in &r.rows {
            assert_relative_eq!(row.ratio, 1.0);
            assert_relative_eq!(row.running_sup, 1.0);
            assert_eq!(row.deviation_bound, 0.0);
        }
    }

    #[test]
    fn period_two_probe() {
        let v = PotentialWindow::from_fn(-20, 20, |n| if n.rem_euclid(2) == 0 { 0.0 } else { 1.0 }).unwrap();
        for i in 0..16 {
            let e = -3.0 + 6.0 * i as f64 / 15.0;
            let r = gordon_lower_bound_probe(&v, e, StateVec::new(1.0, 0.0), &[2, 4, 6, 8]).unwrap();
            assert!(r.rows.iter().all(|row| row.ratio >= 0.5 - 1e-9 && row.holds));
        }
    }

    #[test]
    fn liouville_probe_reports_both_terms() {
        let sys = DynSystem::circle_rotation(AlphaRep::liouville(3).unwrap());
        let v = sample_potential(&SampleFn::cos_coord(0), &sys, &TorusPoint::origin(1), -20, 21).unwrap();
        let r = gordon_lower_bound_probe(&v, 0.5, StateVec::new(1.0, 0.0), &[10]).unwrap();
        let row = &r.rows[0];
        assert!(row.deviation > 0.0 && row.deviation_bound > 0.0);
        assert!(row.holds);
    }

    #[test]
    fn monodromy_powers_match_propagation() {
        let base = [0.4, -1.1, 0.25];
        let v = PotentialWindow::from_fn(-12, 12, |n| base[n.rem_euclid(3) as usize]).unwrap();
        let psi0 = StateVec::new(0.2, 0.9);
        let b = monodromy(&v, 0.7, 3).unwrap();
        for a in [-4i64, -2, -1, 1, 2, 4] {
            let lhs = b.pow(a).unwrap().apply(psi0);
            let rhs = propagate(&v, 0.7, psi0, 3 * a).unwrap();
            assert!((lhs.psi_n - rhs.psi_n).abs() < 1e-9 && (lhs.psi_n1 - rhs.psi_n1).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn unimodular(e in -5.0f64..5.0, v in -5.0f64..5.0) {
            prop_assert!((transfer_matrix(e, v).det() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn propagation_matches_recurrence(
            vals in proptest::collection::vec(-3.0f64..3.0, 41),
            e in -4.0f64..4.0,
            p0 in -1.0f64..1.0,
            p1 in -1.0f64..1.0,
            n in 1i64..=20,
        ) {
            prop_assume!(p0.abs() + p1.abs() > 1e-3);
            let v = PotentialWindow::new(-20, vals, 3.0).unwrap();
            // ψ(j+1) = (E − V(j))ψ(j) − ψ(j−1)
            let (mut prev, mut cur) = (p0, p1);
            for j in 1..=n {
                let next = (e - v.get(j).unwrap()) * cur - prev;
                prev = cur;
                cur = next;
            }
            let got = propagate(&v, e, StateVec::new(p0, p1), n).unwrap();
            let scale = got.norm().max(1.0);
            prop_assert!((got.psi_n - prev).abs() <= 1e-10 * scale);
            prop_assert!((got.psi_n1 - cur).abs() <= 1e-10 * scale);
        }

        #[test]
        fn forward_then_backward_returns(
            vals in proptest::collection::vec(-0.1f64..0.1, 1001),
            e in -1.5f64..1.5,
            t in 0.0f64..std::f64::consts::TAU,
            n in 1i64..=1000,
        ) {
            // weak disorder inside the band keeps the path well conditioned
            let v = PotentialWindow::new(0, vals, 0.1).unwrap();
            let psi0 = StateVec::new(t.cos(), t.sin());
            let there = propagate(&v, e, psi0, n).unwrap();
            let back = propagate_between(&v, e, there, n, 0).unwrap();
            prop_assert!((back.psi_n - psi0.psi_n).abs() <= 1e-9);
            prop_assert!((back.psi_n1 - psi0.psi_n1).abs() <= 1e-9);
        }
    }
}
