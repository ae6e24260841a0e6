//! Potentials `V_ω(n) = f(T^n ω)` and Gordon-type estimates on them.
//!
//! A bounded `V` is certified on a finite window against a list of periods
//! `q_1 < q_2 < …` by checking `max_{1≤n≤q_m} |V(n) − V(n ± q_m)| ≤ C·m^{−q_m}`
//! with `m` the position in the list. The periodic approximant `V_m` is the
//! `q_m`-periodic extension of `V` restricted to `[1, q_m]`.
//!
//! The tube construction works on the circle with the rotation by α and
//! the orbit of the point α itself: ball `i` is the closed arc of radius
//! `r_k` around `T^i α = (i + 1)α`, for `1 ≤ i ≤ 4q_k`, and balls whose
//! indices agree modulo `q_k` form one group on which `g` is constant.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::diophantine::{frac, AlphaRep};
use crate::dynsys::{circle_dist, DynSystem, TorusPoint};
use crate::error::{Error, Result};

/// Default Gordon constant.
pub const DEFAULT_C: f64 = 2.0;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A continuous sampling function `f : 𝕋^d → ℝ` with a declared sup bound.
#[derive(Clone)]
pub struct SampleFn {
    eval: Arc<EvalFn>,
    sup_bound: f64,
    lipschitz: Option<f64>,
    label: String,
}

impl fmt::Debug for SampleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampleFn")
            .field("label", &self.label)
            .field("sup_bound", &self.sup_bound)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl SampleFn {
    pub fn custom(
        label: impl Into<String>,
        sup_bound: f64,
        lipschitz: Option<f64>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SampleFn {
            eval: Arc::new(eval),
            sup_bound,
            lipschitz,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::custom(format!("const:{c}"), c.abs(), Some(0.0), move |_| c)
    }

    /// `cos(2π x_i)`.
    pub fn cos_coord(i: usize) -> Self {
        Self::custom(
            format!("cos:{i}"),
            1.0,
            Some(2.0 * std::f64::consts::PI),
            move |x| (2.0 * std::f64::consts::PI * x[i]).cos(),
        )
    }

    /// `sin(2π x_0) + sin(2π x_1)`; along a rotation by `(a, b)/2π` this is
    /// `sin(an) + sin(bn)` up to phase.
    pub fn sin_sum() -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Self::custom("sinsum", 2.0, Some(2.0 * tau), move |x| {
            (tau * x[0]).sin() + (tau * x[1]).sin()
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Values of a potential on `[lo, hi]`, `lo ≤ 0 ≤ hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialWindow {
    lo: i64,
    hi: i64,
    values: Vec<f64>,
    sup_bound: f64,
}

impl PotentialWindow {
    pub fn new(lo: i64, values: Vec<f64>, sup_bound: f64) -> Result<Self> {
        if lo > 0 || values.is_empty() || lo + (values.len() as i64) <= 0 {
            return Err(Error::InvalidArgument("window must contain n = 0".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || v.abs() > sup_bound {
                return Err(Error::UnboundedPotential {
                    n: lo + i as i64,
                    value: *v,
                });
            }
        }
        let hi = lo + values.len() as i64 - 1;
        Ok(PotentialWindow {
            lo,
            hi,
            values,
            sup_bound,
        })
    }

    /// Window with `sup_bound` taken as the max of `|V|`.
    pub fn from_fn(lo: i64, hi: i64, v: impl Fn(i64) -> f64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument("lo must not exceed hi".into()));
        }
        let values: Vec<f64> = (lo..=hi).map(v).collect();
        let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Self::new(lo, values, sup)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        if n < self.lo || n > self.hi {
            return None;
        }
        Some(self.values[(n - self.lo) as usize])
    }

    /// Unchecked access for indices already known to be inside.
    fn at(&self, n: i64) -> f64 {
        self.values[(n - self.lo) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        (self.lo..=self.hi).zip(self.values.iter().copied())
    }

    fn require(&self, need_lo: i64, need_hi: i64) -> Result<()> {
        if need_lo < self.lo || need_hi > self.hi {
            return Err(Error::WindowTooSmall {
                need_lo,
                need_hi,
                have_lo: self.lo,
                have_hi: self.hi,
            });
        }
        Ok(())
    }

    /// CSV with columns `n, V`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "V"]).map_err(csv_err)?;
        for (n, v) in self.iter() {
            w.write_record([n.to_string(), format!("{v:.16e}")]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// `V(n) = f(T^n ω)` for `n ∈ [lo, hi]`.
pub fn sample_potential(
    f: &SampleFn,
    sys: &DynSystem,
    omega: &TorusPoint,
    lo: i64,
    hi: i64,
) -> Result<PotentialWindow> {
    sys.check_point(omega)?;
    if lo > 0 || hi < 0 {
        return Err(Error::InvalidArgument("window must satisfy lo <= 0 <= hi".into()));
    }
    let values = (lo..=hi)
        .map(|n| Ok(f.eval(sys.iterate(omega, n)?.coords())))
        .collect::<Result<Vec<f64>>>()?;
    PotentialWindow::new(lo, values, f.sup_bound())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GordonRow {
    pub m: u64,
    pub q_m: u64,
    pub fwd_dev: f64,
    pub bwd_dev: f64,
    pub bound: f64,
}

impl GordonRow {
    pub fn passes(&self) -> bool {
        self.fwd_dev <= self.bound && self.bwd_dev <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub struct GordonCertificate {
    #[serde(rename = "C")]
    pub c: f64,
    pub rows: Vec<GordonRow>,
    pub pass: bool,
}

/// `C · m^{−q}`.
pub fn gordon_bound(c: f64, m: u64, q: u64) -> f64 {
    c * (m as f64).powf(-(q as f64))
}

/// `(max_{1≤n≤q}|V(n) − V(n+q)|, max_{1≤n≤q}|V(n) − V(n−q)|)`.
pub fn gordon_deviations(v: &PotentialWindow, q: u64) -> Result<(f64, f64)> {
    let qi = q as i64;
    v.require(1 - qi, 2 * qi)?;
    let mut fwd = 0.0f64;
    let mut bwd = 0.0f64;
    for n in 1..=qi {
        fwd = fwd.max((v.at(n) - v.at(n + qi)).abs());
        bwd = bwd.max((v.at(n) - v.at(n - qi)).abs());
    }
    Ok((fwd, bwd))
}

/// Certifies `V` against `q_list`, pairing the `m`-th entry with `m`.
pub fn gordon_certify(v: &PotentialWindow, q_list: &[u64], c: f64) -> Result<GordonCertificate> {
    if q_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("q_list must be strictly increasing".into()));
    }
    let pairs: Vec<(u64, u64)> = q_list.iter().enumerate().map(|(i, &q)| (i as u64 + 1, q)).collect();
    gordon_certify_pairs(v, &pairs, c)
}

/// Certifies explicit `(m, q_m)` pairs.
pub fn gordon_certify_pairs(v: &PotentialWindow, pairs: &[(u64, u64)], c: f64) -> Result<GordonCertificate> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("C must be > 0".into()));
    }
    if pairs.is_empty() || pairs.iter().any(|&(m, q)| m == 0 || q == 0) {
        return Err(Error::InvalidArgument("need at least one (m, q) with m, q >= 1".into()));
    }
    let rows = pairs
        .iter()
        .map(|&(m, q_m)| {
            let (fwd_dev, bwd_dev) = gordon_deviations(v, q_m)?;
            Ok(GordonRow {
                m,
                q_m,
                fwd_dev,
                bwd_dev,
                bound: gordon_bound(c, m, q_m),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(GordonRow::passes);
    Ok(GordonCertificate { c, rows, pass })
}

/// The `q`-periodic extension of `V` restricted to `[1, q]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicApproximant {
    pub q: u64,
    pub m: u64,
    /// `V(n + q) − V(n)` for `1 − q ≤ n ≤ 0`, at the `n` maximizing its size.
    pub r1: f64,
    /// `V(n) − V(n − q)` for `q < n ≤ 2q`, at the `n` maximizing its size.
    pub r2: f64,
    base: Vec<f64>,
}

impl PeriodicApproximant {
    pub fn eval(&self, n: i64) -> f64 {
        self.base[(n - 1).rem_euclid(self.q as i64) as usize]
    }

    pub fn max_residual(&self) -> f64 {
        self.r1.abs().max(self.r2.abs())
    }

    pub fn sup(&self) -> f64 {
        self.base.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn window(&self, lo: i64, hi: i64) -> Result<PotentialWindow> {
        let sup = self.sup();
        PotentialWindow::new(lo, (lo..=hi).map(|n| self.eval(n)).collect(), sup)
    }
}

pub fn periodic_approximant(v: &PotentialWindow, q: u64, m: u64) -> Result<PeriodicApproximant> {
    if q == 0 || m == 0 {
        return Err(Error::InvalidArgument("q and m must be >= 1".into()));
    }
    let qi = q as i64;
    v.require(1 - qi, 2 * qi)?;
    let signed_max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |a, d| if d.abs() > a.abs() { d } else { a });
    let r1 = signed_max(&mut (1 - qi..=0).map(|n| v.at(n + qi) - v.at(n)));
    let r2 = signed_max(&mut (qi + 1..=2 * qi).map(|n| v.at(n) - v.at(n - qi)));
    Ok(PeriodicApproximant {
        q,
        m,
        r1,
        r2,
        base: (1..=qi).map(|n| v.at(n)).collect(),
    })
}

/// The three defining clauses for one family of approximants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Def3Report {
    /// `V_m(n + q_m) = V_m(n)` on the checked range.
    pub periodic: bool,
    /// `sup_{n,m} |V_m(n)| ≤ sup|V| + max residual`.
    pub bounded: bool,
    /// `|V_m(n) − V(n)| ≤ Ĉ·m^{−q_m}` on `[1 − q_m, 2q_m]`.
    pub close: bool,
    pub sup_vm: f64,
    pub worst_ratio: f64,
}

impl Def3Report {
    pub fn all(&self) -> bool {
        self.periodic && self.bounded && self.close
    }
}

pub fn def3_check(v: &PotentialWindow, approximants: &[PeriodicApproximant], c_hat: f64) -> Result<Def3Report> {
    let mut periodic = true;
    let mut close = true;
    let mut sup_vm = 0.0f64;
    let mut max_res = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for a in approximants {
        let qi = a.q as i64;
        v.require(1 - qi, 2 * qi)?;
        max_res = max_res.max(a.max_residual());
        let bound = gordon_bound(c_hat, a.m, a.q);
        for n in -2 * qi..=2 * qi {
            periodic &= a.eval(n) == a.eval(n + qi);
            sup_vm = sup_vm.max(a.eval(n).abs());
        }
        for n in 1 - qi..=2 * qi {
            let dev = (a.eval(n) - v.at(n)).abs();
            close &= dev <= bound;
            worst_ratio = worst_ratio.max(dev / bound);
        }
    }
    let bounded = sup_vm <= v.sup_bound() + max_res;
    Ok(Def3Report {
        periodic,
        bounded,
        close,
        sup_vm,
        worst_ratio,
    })
}

/// A window `W` within `C·m^{−q_m}` of every approximant `V_m` wherever that
/// approximant is controlled (`1 − q_m ≤ n ≤ 2q_m`): the midpoint of the
/// intersection of the bands, or `V_m` itself where only one band applies.
pub fn synthesize_window(
    approximants: &[PeriodicApproximant],
    c: f64,
    lo: i64,
    hi: i64,
) -> Result<PotentialWindow> {
    let mut values = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    for n in lo..=hi {
        let mut band = (f64::NEG_INFINITY, f64::INFINITY);
        for a in approximants {
            let qi = a.q as i64;
            if n < 1 - qi || n > 2 * qi {
                continue;
            }
            let w = gordon_bound(c, a.m, a.q);
            band = (band.0.max(a.eval(n) - w), band.1.min(a.eval(n) + w));
        }
        if band.0 > band.1 {
            return Err(Error::InvalidArgument(format!("approximant bands do not meet at n = {n}")));
        }
        let value = if band.0.is_finite() {
            0.5 * (band.0 + band.1)
        } else {
            approximants.last().map(|a| a.eval(n)).unwrap_or(0.0)
        };
        values.push(value);
    }
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    PotentialWindow::new(lo, values, sup)
}

/// Closed arc on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TubeArc {
    /// Orbit index `i` with center `T^i α`.
    pub index: u64,
    /// `1 + (i − 1) mod q_k`.
    pub group: u64,
    pub center: f64,
    pub radius: f64,
}

impl TubeArc {
    pub fn contains(&self, x: f64) -> bool {
        circle_dist(x, self.center) <= self.radius
    }
}

/// `f` locked to a constant on each group of tube arcs.
#[derive(Clone, Debug)]
pub struct FlattenedFunction {
    base: SampleFn,
    alpha: AlphaRep,
    arcs: Vec<TubeArc>,
    locked_values: Vec<f64>,
    k: u64,
    q_k: u64,
    r_k: f64,
    min_gap: f64,
}

impl FlattenedFunction {
    pub fn eval(&self, x: f64) -> f64 {
        let x = frac(x);
        match self.arc_at(x) {
            Some(a) => self.locked_values[(a.group - 1) as usize],
            None => self.base.eval(&[x]),
        }
    }

    pub fn base_eval(&self, x: f64) -> f64 {
        self.base.eval(&[frac(x)])
    }

    pub fn arc_at(&self, x: f64) -> Option<&TubeArc> {
        self.arcs.iter().find(|a| a.contains(x))
    }

    pub fn arcs(&self) -> &[TubeArc] {
        &self.arcs
    }

    pub fn locked_values(&self) -> &[f64] {
        &self.locked_values
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn q_k(&self) -> u64 {
        self.q_k
    }

    pub fn radius(&self) -> f64 {
        self.r_k
    }

    pub fn alpha(&self) -> &AlphaRep {
        &self.alpha
    }

    /// Diameter of group `j`: spread of its centers plus `2r_k`.
    pub fn group_diameter(&self, j: u64) -> f64 {
        let centers: Vec<f64> = self.arcs.iter().filter(|a| a.group == j).map(|a| a.center).collect();
        let mut spread = 0.0f64;
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                spread = spread.max(circle_dist(*a, *b));
            }
        }
        spread + 2.0 * self.r_k
    }

    fn check_conditions(&self) -> Result<()> {
        let mut centers: Vec<f64> = self.arcs.iter().map(|a| a.center).collect();
        centers.sort_by(f64::total_cmp);
        let n = centers.len();
        for i in 0..n {
            let gap = if i + 1 < n {
                centers[i + 1] - centers[i]
            } else {
                centers[0] + 1.0 - centers[n - 1]
            };
            if n > 1 && gap <= 2.0 * self.r_k {
                return Err(Error::TubeCondition {
                    condition: 'a',
                    detail: format!("arcs at {} overlap (gap {gap}, radius {})", centers[i], self.r_k),
                });
            }
        }
        let limit = 4.0 / self.k as f64;
        for j in 1..=self.q_k {
            let d = self.group_diameter(j);
            if d > limit {
                return Err(Error::TubeCondition {
                    condition: 'b',
                    detail: format!("group {j} has diameter {d} > {limit}"),
                });
            }
        }
        Ok(())
    }
}

impl Serialize for FlattenedFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FlattenedFunction", 8)?;
        st.serialize_field("base", self.base.label())?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("q_k", &self.q_k)?;
        st.serialize_field("r_k", &self.r_k)?;
        st.serialize_field("min_gap", &self.min_gap)?;
        st.serialize_field("arcs", &self.arcs)?;
        st.serialize_field("locked_values", &self.locked_values)?;
        st.end()
    }
}

/// `T^i α` for the rotation by α, i.e. `(i + 1)α mod 1`.
fn orbit_of_alpha(alpha: &AlphaRep, i: i64) -> f64 {
    alpha.frac_mul(i as i128 + 1)
}

/// Locks `f` on the tube of radius `r_k = min(g/3, 1/(2k))` around the
/// first `4q_k` iterates of α, where `g` is their smallest pairwise gap.
pub fn flatten_along_tube(f: &SampleFn, alpha: &AlphaRep, k: u64, q_k: u64) -> Result<FlattenedFunction> {
    if k == 0 || q_k == 0 {
        return Err(Error::InvalidArgument("k and q_k must be >= 1".into()));
    }
    let count = 4 * q_k;
    let mut pts: Vec<(f64, u64)> = (1..=count).map(|i| (orbit_of_alpha(alpha, i as i64), i)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut min_gap = f64::INFINITY;
    let mut pair = (0, 0);
    for w in 0..pts.len() {
        let (x, i) = pts[w];
        let (y, j) = pts[(w + 1) % pts.len()];
        let gap = circle_dist(x, y);
        if pts.len() > 1 && gap < min_gap {
            min_gap = gap;
            pair = (i.min(j), i.max(j));
        }
    }
    if min_gap == 0.0 {
        return Err(Error::OrbitNotInjective {
            i: pair.0 as i64,
            j: pair.1 as i64,
        });
    }
    let r_k = (min_gap / 3.0).min(0.5 / k as f64);
    let arcs = (1..=count)
        .map(|i| TubeArc {
            index: i,
            group: (i - 1) % q_k + 1,
            center: orbit_of_alpha(alpha, i as i64),
            radius: r_k,
        })
        .collect();
    let locked_values = (1..=q_k).map(|j| f.eval(&[orbit_of_alpha(alpha, j as i64)])).collect();
    let g = FlattenedFunction {
        base: f.clone(),
        alpha: alpha.clone(),
        arcs,
        locked_values,
        k,
        q_k,
        r_k,
        min_gap,
    };
    g.check_conditions()?;
    Ok(g)
}

/// `T^{j+q_k} α` shifted by `offset`.
pub fn omega_f_tube_sample(alpha: &AlphaRep, k: u64, q_k: u64, j: u64, r_k: f64, offset: f64) -> Result<TorusPoint> {
    if k == 0 || q_k == 0 || j == 0 || j > q_k {
        return Err(Error::InvalidArgument("need k >= 1 and 1 <= j <= q_k".into()));
    }
    if !(r_k > 0.0) {
        return Err(Error::InvalidArgument("r_k must be > 0".into()));
    }
    TorusPoint::new(vec![orbit_of_alpha(alpha, (j + q_k) as i64) + offset])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub fwd: f64,
    pub bwd: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `max_{1≤j≤q_k}|g(T^jω) − g(T^{j±q_k}ω)|` against `2·k^{−q_k}`.
pub fn gordon_gap_verify(g: &FlattenedFunction, omega: &TorusPoint, k: u64, q_k: u64) -> Result<GapReport> {
    gap_report(g, omega, k, q_k, |x| g.eval(x))
}

/// Same as [`gordon_gap_verify`] with the un-flattened `f` in place of `g`.
pub fn gordon_gap_verify_base(g: &FlattenedFunction, omega: &TorusPoint, k: u64, q_k: u64) -> Result<GapReport> {
    gap_report(g, omega, k, q_k, |x| g.base_eval(x))
}

fn gap_report(
    g: &FlattenedFunction,
    omega: &TorusPoint,
    k: u64,
    q_k: u64,
    eval: impl Fn(f64) -> f64,
) -> Result<GapReport> {
    if k != g.k || q_k != g.q_k {
        return Err(Error::InvalidArgument(format!(
            "flattened function was built for k = {}, q_k = {}",
            g.k, g.q_k
        )));
    }
    if omega.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: omega.dim(),
        });
    }
    let x = omega.coords()[0];
    let in_image = g
        .arc_at(x)
        .map(|a| a.index > q_k && a.index <= 2 * q_k)
        .unwrap_or(false);
    if !in_image {
        return Err(Error::NotInTube);
    }
    let at = |n: i64| eval(frac(x + g.alpha.frac_mul(n as i128)));
    let q = q_k as i64;
    let mut fwd = 0.0f64;
    let mut bwd = 0.0f64;
    for j in 1..=q {
        let here = at(j);
        fwd = fwd.max((here - at(j + q)).abs());
        bwd = bwd.max((here - at(j - q)).abs());
    }
    let bound = 2.0 * (k as f64).powf(-(q_k as f64));
    Ok(GapReport {
        fwd,
        bwd,
        bound,
        pass: fwd < bound && bwd < bound,
    })
}
