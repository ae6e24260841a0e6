//! Continued fractions and Diophantine queries for rotation numbers.
//!
//! An [`AlphaRep`] is an exact description of a number α taken modulo one:
//! a rational in lowest terms, a sequence of partial quotients (finite,
//! eventually periodic, or produced by a rule), or a float literal whose
//! expansion is cut off before rounding noise starts to masquerade as
//! arithmetic structure.
//!
//! Integer work (convergent recurrences, `⟨qα⟩` for large `q`) is done in
//! arbitrary precision. Orbit code only needs `frac(nα)` as an `f64`, which is
//! served by [`AlphaRep::frac_mul`] without allocating.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Partial quotients `a_1, a_2, ...` (all `>= 1`).
#[derive(Clone)]
pub enum Quotients {
    Finite(Vec<u64>),
    /// `head` followed by `cycle` repeated forever.
    Periodic { head: Vec<u64>, cycle: Vec<u64> },
    /// `a_k = rule(k)` for `k >= 1`.
    Rule {
        label: String,
        rule: Arc<dyn Fn(usize) -> u64 + Send + Sync>,
    },
}

impl Quotients {
    /// `a_k` for `k >= 1`, or `None` past the end of a finite expansion.
    pub fn get(&self, k: usize) -> Option<u64> {
        assert!(k >= 1, "partial quotients are indexed from 1");
        match self {
            Quotients::Finite(v) => v.get(k - 1).copied(),
            Quotients::Periodic { head, cycle } => {
                if k <= head.len() {
                    Some(head[k - 1])
                } else {
                    Some(cycle[(k - 1 - head.len()) % cycle.len()])
                }
            }
            Quotients::Rule { rule, .. } => Some(rule(k)),
        }
    }

    fn is_finite(&self) -> bool {
        matches!(self, Quotients::Finite(_))
    }
}

impl fmt::Debug for Quotients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quotients::Finite(v) => f.debug_tuple("Finite").field(v).finish(),
            Quotients::Periodic { head, cycle } => f
                .debug_struct("Periodic")
                .field("head", head)
                .field("cycle", cycle)
                .finish(),
            Quotients::Rule { label, .. } => f.debug_struct("Rule").field("label", label).finish(),
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    /// `p/q` in lowest terms with `0 <= p < q`.
    Rational {
        p: BigInt,
        q: BigInt,
        liouville_depth: Option<u32>,
    },
    PartialQuotients { a0: i64, seq: Quotients },
    /// The exact binary value of `x` expanded to `depth` trustworthy
    /// partial quotients.
    FloatLiteral { x: f64, depth: usize },
}

/// How `frac(nα)` is evaluated.
#[derive(Clone, Debug)]
enum Phase {
    /// Exact `p/q` with both parts fitting in `i128`.
    Small { p: i128, q: i128 },
    /// Exact rational too large for `i128`.
    Big { p: BigInt, q: BigInt },
    /// Double-double `hi + lo` approximation of an irrational.
    DoubleDouble { hi: f64, lo: f64 },
    /// A single `f64` that is itself the exact value.
    Float(f64),
}

/// A rotation parameter α ∈ 𝕋 with an exact arithmetic representation.
#[derive(Clone, Debug)]
pub struct AlphaRep {
    repr: Repr,
    phase: Phase,
}

/// One convergent `p_k / q_k` of α together with `⟨q_k α⟩`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Convergent {
    pub k: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub q: BigInt,
    pub dist: f64,
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(small) => s.serialize_u64(small),
        None => s.serialize_str(&v.to_string()),
    }
}

impl AlphaRep {
    /// `p/q` reduced to lowest terms and taken modulo one.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        Self::rational_big(BigInt::from(p), BigInt::from(q))
    }

    pub fn rational_big(p: BigInt, q: BigInt) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::InvalidAlpha {
                text: format!("{p}/{q}"),
                reason: "denominator must be positive".into(),
            });
        }
        let p = p.mod_floor(&q);
        let g = p.gcd(&q);
        let (p, q) = if g.is_zero() { (p, q) } else { (&p / &g, &q / &g) };
        Ok(Self::from_repr(Repr::Rational {
            p,
            q,
            liouville_depth: None,
        }))
    }

    /// The golden mean `(√5 − 1)/2 = [0; 1, 1, 1, ...]`.
    pub fn golden() -> Self {
        Self::periodic(0, vec![], vec![1]).expect("valid cycle")
    }

    /// `√2 − 1 = [0; 2, 2, 2, ...]`.
    pub fn silver() -> Self {
        Self::periodic(0, vec![], vec![2]).expect("valid cycle")
    }

    pub fn from_partial_quotients(a0: i64, quotients: Vec<u64>) -> Result<Self> {
        check_quotients(&quotients)?;
        Ok(Self::from_repr(Repr::PartialQuotients {
            a0,
            seq: Quotients::Finite(quotients),
        }))
    }

    pub fn periodic(a0: i64, head: Vec<u64>, cycle: Vec<u64>) -> Result<Self> {
        check_quotients(&head)?;
        check_quotients(&cycle)?;
        if cycle.is_empty() {
            return Err(Error::InvalidAlpha {
                text: "cf".into(),
                reason: "periodic block must be nonempty".into(),
            });
        }
        Ok(Self::from_repr(Repr::PartialQuotients {
            a0,
            seq: Quotients::Periodic { head, cycle },
        }))
    }

    /// Partial quotients produced by `rule(k)`, `k >= 1`. The rule must
    /// return values `>= 1`.
    pub fn from_rule(
        a0: i64,
        label: impl Into<String>,
        rule: impl Fn(usize) -> u64 + Send + Sync + 'static,
    ) -> Self {
        let rule: Arc<dyn Fn(usize) -> u64 + Send + Sync> = Arc::new(move |k| rule(k).max(1));
        Self::from_repr(Repr::PartialQuotients {
            a0,
            seq: Quotients::Rule {
                label: label.into(),
                rule,
            },
        })
    }

    /// The truncated Liouville series `Σ_{j=1}^{depth} 10^{-j!}`, held as an
    /// exact rational with denominator `10^{depth!}`.
    pub fn liouville(depth: u32) -> Result<Self> {
        if !(1..=6).contains(&depth) {
            return Err(Error::InvalidAlpha {
                text: format!("liouville:{depth}"),
                reason: "depth must be in 1..=6".into(),
            });
        }
        let fact = |j: u32| (1..=j).product::<u32>();
        let q = BigInt::from(10u32).pow(fact(depth));
        let mut p = BigInt::zero();
        for j in 1..=depth {
            p += BigInt::from(10u32).pow(fact(depth) - fact(j));
        }
        let mut alpha = Self::rational_big(p, q)?;
        if let Repr::Rational {
            liouville_depth, ..
        } = &mut alpha.repr
        {
            *liouville_depth = Some(depth);
        }
        Ok(alpha)
    }

    /// A float literal in `(0, 1)`.
    pub fn float(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidAlpha {
                text: format!("float:{x}"),
                reason: "float literal must lie in (0, 1)".into(),
            });
        }
        let (p, q) = exact_dyadic(x);
        // Representation error of a double is half an ulp.
        let half_ulp = {
            let (hp, hq) = half_ulp_dyadic(x);
            (hp, hq)
        };
        let qs = euclid_quotients(&p, &q);
        let mut depth = 0;
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p_cur, mut q_cur) = (BigInt::zero(), BigInt::one());
        for a in qs.iter().skip(1) {
            let p_next = a * &p_cur + &p_prev;
            let q_next = a * &q_cur + &q_prev;
            // |x - p_next/q_next| > half_ulp  <=>  |p*q_next - p_next*q| * hq > hp * q * q_next
            let err_num = (&p * &q_next - &p_next * &q).abs() * &half_ulp.1;
            let bound = &half_ulp.0 * &q * &q_next;
            if err_num <= bound {
                // The simplest rational inside the rounding interval is still
                // determined by x; everything after it is noise.
                depth += 1;
                break;
            }
            depth += 1;
            p_prev = std::mem::replace(&mut p_cur, p_next);
            q_prev = std::mem::replace(&mut q_cur, q_next);
        }
        Ok(Self::from_repr(Repr::FloatLiteral { x, depth }))
    }

    fn from_repr(repr: Repr) -> Self {
        let phase = match &repr {
            Repr::Rational { p, q, .. } => match (p.to_i128(), q.to_i128()) {
                (Some(p), Some(q)) => Phase::Small { p, q },
                _ => Phase::Big {
                    p: p.clone(),
                    q: q.clone(),
                },
            },
            Repr::PartialQuotients { a0, seq } => {
                let (p, q) = deep_convergent(*a0, seq);
                let p = p.mod_floor(&q);
                if seq.is_finite() {
                    match (p.to_i128(), q.to_i128()) {
                        (Some(p), Some(q)) => Phase::Small { p, q },
                        _ => Phase::Big { p, q },
                    }
                } else {
                    let (hi, lo) = double_double(&p, &q);
                    Phase::DoubleDouble { hi, lo }
                }
            }
            Repr::FloatLiteral { x, .. } => Phase::Float(*x),
        };
        AlphaRep { repr, phase }
    }

    /// `true` when α is an exact rational (including float literals and
    /// finite expansions, whose values are rational).
    pub fn is_rational(&self) -> bool {
        match &self.repr {
            Repr::Rational { .. } | Repr::FloatLiteral { .. } => true,
            Repr::PartialQuotients { seq, .. } => seq.is_finite(),
        }
    }

    /// Depth of the trustworthy expansion of a float literal.
    pub fn float_depth(&self) -> Option<usize> {
        match &self.repr {
            Repr::FloatLiteral { depth, .. } => Some(*depth),
            _ => None,
        }
    }

    /// Best `f64` approximation of α mod 1.
    pub fn value(&self) -> f64 {
        self.frac_mul(1)
    }

    /// `frac(n·α)` in `[0, 1)`.
    pub fn frac_mul(&self, n: i128) -> f64 {
        match &self.phase {
            Phase::Small { p, q } => {
                let r = n.rem_euclid(*q);
                let num = match r.checked_mul(*p) {
                    Some(v) => v.rem_euclid(*q),
                    None => (BigInt::from(r) * BigInt::from(*p))
                        .mod_floor(&BigInt::from(*q))
                        .to_i128()
                        .expect("remainder below q fits"),
                };
                frac(small_ratio(num, *q))
            }
            Phase::Big { p, q } => {
                let num = (BigInt::from(n) * p).mod_floor(q);
                frac(ratio_to_f64(&num, q))
            }
            Phase::DoubleDouble { hi, lo } => {
                let nf = n as f64;
                let (ph, pl) = two_product(nf, *hi);
                frac(frac(ph) + pl + nf * lo)
            }
            Phase::Float(x) => {
                let nf = n as f64;
                let (ph, pl) = two_product(nf, *x);
                frac(frac(ph) + pl)
            }
        }
    }

    /// Partial quotients `a_1..a_K` (fewer if the expansion terminates).
    fn quotients_upto(&self, max: usize) -> Vec<BigInt> {
        match &self.repr {
            Repr::Rational { p, q, .. } => {
                euclid_quotients(p, q).into_iter().skip(1).take(max).collect()
            }
            Repr::PartialQuotients { seq, .. } => (1..=max)
                .map_while(|k| seq.get(k).map(BigInt::from))
                .collect(),
            Repr::FloatLiteral { x, depth } => {
                let (p, q) = exact_dyadic(*x);
                euclid_quotients(&p, &q)
                    .into_iter()
                    .skip(1)
                    .take(max.min(*depth))
                    .collect()
            }
        }
    }

    fn a0(&self) -> BigInt {
        match &self.repr {
            Repr::PartialQuotients { a0, .. } => BigInt::from(*a0),
            _ => BigInt::zero(),
        }
    }

    /// Partial quotient `a_k` (`k >= 1`).
    pub fn partial_quotient(&self, k: usize) -> Option<BigInt> {
        self.quotients_upto(k).get(k - 1).cloned()
    }

    /// `⟨qα⟩` for an arbitrary-precision `q`.
    pub fn dist_to_int_big(&self, q: &BigInt) -> f64 {
        let (p_ref, q_ref) = match &self.repr {
            Repr::Rational { p, q, .. } => (p.clone(), q.clone()),
            Repr::FloatLiteral { x, .. } => exact_dyadic(*x),
            Repr::PartialQuotients { a0, seq } => {
                // Pick a convergent P/Q with Q > |q|·2^64, so that
                // |qα − qP/Q| < |q|/Q² is far below ⟨qα⟩ ≥ 1/(2 q_{k+1}).
                let target = q.abs() << 64u32;
                reference_convergent(*a0, seq, &target)
            }
        };
        let r = (q * &p_ref).mod_floor(&q_ref);
        let other = &q_ref - &r;
        let near = if r <= other { r } else { other };
        ratio_to_f64(&near, &q_ref)
    }

    /// The first `count` nontrivial convergents `k = 1..=count`.
    pub fn convergents(&self, count: usize) -> Vec<Convergent> {
        let quotients = self.quotients_upto(count);
        let mut out = Vec::with_capacity(quotients.len());
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p_cur, mut q_cur) = (self.a0(), BigInt::one());
        for (i, a) in quotients.iter().enumerate() {
            let p_next = a * &p_cur + &p_prev;
            let q_next = a * &q_cur + &q_prev;
            let dist = self.dist_to_int_big(&q_next);
            out.push(Convergent {
                k: i + 1,
                p: p_next.clone(),
                q: q_next.clone(),
                dist,
            });
            p_prev = std::mem::replace(&mut p_cur, p_next);
            q_prev = std::mem::replace(&mut q_cur, q_next);
        }
        out
    }

    /// Convergents whose denominators do not exceed `horizon`.
    pub fn convergents_upto(&self, horizon: &BigInt) -> Vec<Convergent> {
        let mut batch = 32;
        loop {
            let all = self.convergents(batch);
            let exhausted = all.len() < batch;
            let within: Vec<_> = all.iter().take_while(|c| &c.q <= horizon).cloned().collect();
            if exhausted || within.len() < all.len() {
                return within;
            }
            batch *= 2;
        }
    }
}

/// `⟨qα⟩`, the distance from `qα` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_int(q: u64, alpha: &AlphaRep) -> f64 {
    alpha.dist_to_int_big(&BigInt::from(q))
}

/// The first `count` nontrivial convergents of `alpha`.
pub fn convergents(alpha: &AlphaRep, count: usize) -> Vec<Convergent> {
    alpha.convergents(count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "BadlyApproximable-evidence")]
    BadlyApproximableEvidence,
    #[serde(rename = "NotBadlyApproximable-evidence")]
    NotBadlyApproximableEvidence,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::BadlyApproximableEvidence => "BadlyApproximable-evidence",
            Verdict::NotBadlyApproximableEvidence => "NotBadlyApproximable-evidence",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// Partial quotients at most this large count as "bounded".
pub const BADLY_MAX_QUOTIENT: u64 = 100;
/// `c_estimate` floor for badly approximable evidence.
pub const BADLY_C_FLOOR: f64 = 1e-3;
/// `q_k⟨q_kα⟩` at or below this is evidence against badly approximable.
pub const NOT_BADLY_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub alpha: String,
    pub horizon: u64,
    /// Tail minimum of `q_k⟨q_kα⟩` over convergents with `q_k <= horizon`.
    pub c_estimate: f64,
    pub attained_q: String,
    /// Minimum of `q_k⟨q_kα⟩` over every convergent within the horizon.
    pub min_product: f64,
    pub max_partial_quotient: String,
    pub convergents_seen: usize,
    pub exact_rational: bool,
    pub verdict: Verdict,
}

/// Finite-horizon evidence for whether `c(α) = liminf q⟨qα⟩` is positive.
///
/// The liminf is attained along convergents; `c_estimate` takes the minimum
/// over the later half of the convergents below `horizon` so that the
/// transient first few terms do not dominate.
pub fn badly_approx_classify(alpha: &AlphaRep, horizon: u64) -> Result<Classification> {
    if horizon < 2 {
        return Err(Error::InvalidArgument("horizon must be >= 2".into()));
    }
    let h = BigInt::from(horizon);
    let within = alpha.convergents_upto(&h);
    let products: Vec<f64> = within
        .iter()
        .map(|c| c.q.to_f64().unwrap_or(f64::INFINITY) * c.dist)
        .collect();
    let max_a = within
        .iter()
        .enumerate()
        .map(|(i, _)| alpha.partial_quotient(i + 1).unwrap_or_default())
        .max()
        .unwrap_or_default();
    let min_product = products.iter().copied().fold(f64::INFINITY, f64::min);

    if alpha.is_rational() {
        let denominator = match &alpha.repr {
            Repr::Rational { q, .. } => q.clone(),
            Repr::FloatLiteral { x, .. } => exact_dyadic(*x).1,
            Repr::PartialQuotients { .. } => alpha
                .convergents(usize::MAX >> 1)
                .last()
                .map(|c| c.q.clone())
                .unwrap_or_else(BigInt::one),
        };
        return Ok(Classification {
            alpha: alpha.to_string(),
            horizon,
            c_estimate: 0.0,
            attained_q: denominator.to_string(),
            min_product,
            max_partial_quotient: max_a.to_string(),
            convergents_seen: within.len(),
            exact_rational: true,
            verdict: Verdict::NotBadlyApproximableEvidence,
        });
    }

    let tail_start = within.len() / 2;
    let (c_estimate, attained_q) = within
        .iter()
        .zip(&products)
        .skip(tail_start)
        .fold((f64::INFINITY, BigInt::zero()), |acc, (c, &v)| {
            if v < acc.0 {
                (v, c.q.clone())
            } else {
                acc
            }
        });
    let verdict = if min_product <= NOT_BADLY_THRESHOLD {
        Verdict::NotBadlyApproximableEvidence
    } else if max_a <= BigInt::from(BADLY_MAX_QUOTIENT) && c_estimate >= BADLY_C_FLOOR {
        Verdict::BadlyApproximableEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(Classification {
        alpha: alpha.to_string(),
        horizon,
        c_estimate,
        attained_q: attained_q.to_string(),
        min_product,
        max_partial_quotient: max_a.to_string(),
        convergents_seen: within.len(),
        exact_rational: false,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// text form

impl fmt::Display for AlphaRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rational {
                liouville_depth: Some(d),
                ..
            } => write!(f, "liouville:{d}"),
            Repr::Rational { p, q, .. } => write!(f, "rational:{p}/{q}"),
            Repr::FloatLiteral { x, .. } => write!(f, "float:{x:?}"),
            Repr::PartialQuotients { a0, seq } => match seq {
                Quotients::Periodic { head, cycle }
                    if *a0 == 0 && head.is_empty() && cycle.as_slice() == [1] =>
                {
                    f.write_str("golden")
                }
                Quotients::Finite(v) => write!(f, "cf:{a0};{}", join(v)),
                Quotients::Periodic { head, cycle } => {
                    write!(f, "cf:{a0};")?;
                    if !head.is_empty() {
                        write!(f, "{},", join(head))?;
                    }
                    write!(f, "({})", join(cycle))
                }
                Quotients::Rule { label, .. } => write!(f, "rule:{label}"),
            },
        }
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl FromStr for AlphaRep {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidAlpha {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let text_trim = text.trim();
        if text_trim == "golden" {
            return Ok(AlphaRep::golden());
        }
        let (kind, body) = text_trim
            .split_once(':')
            .ok_or_else(|| bad("expected rational:, cf:, golden, liouville: or float:"))?;
        match kind {
            "rational" => {
                let (p, q) = body.split_once('/').ok_or_else(|| bad("expected p/q"))?;
                let p: BigInt = p.trim().parse().map_err(|_| bad("bad numerator"))?;
                let q: BigInt = q.trim().parse().map_err(|_| bad("bad denominator"))?;
                AlphaRep::rational_big(p, q)
            }
            "liouville" => {
                let d: u32 = body.trim().parse().map_err(|_| bad("bad depth"))?;
                AlphaRep::liouville(d)
            }
            "float" => {
                let x: f64 = body.trim().parse().map_err(|_| bad("bad float"))?;
                AlphaRep::float(x)
            }
            "cf" => {
                let (a0, rest) = body.split_once(';').ok_or_else(|| bad("expected a0;a1,..."))?;
                let a0: i64 = a0.trim().parse().map_err(|_| bad("bad a0"))?;
                let (head_text, cycle_text) = match rest.find('(') {
                    Some(i) => {
                        let inner = rest[i + 1..]
                            .strip_suffix(')')
                            .ok_or_else(|| bad("unterminated periodic block"))?;
                        (rest[..i].trim_end_matches(','), Some(inner))
                    }
                    None => (rest, None),
                };
                let parse_list = |s: &str| -> Result<Vec<u64>> {
                    s.split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(|t| t.parse::<u64>().map_err(|_| bad("bad partial quotient")))
                        .collect()
                };
                let head = parse_list(head_text)?;
                match cycle_text {
                    Some(c) => AlphaRep::periodic(a0, head, parse_list(c)?),
                    None => AlphaRep::from_partial_quotients(a0, head),
                }
            }
            _ => Err(bad("unknown alpha kind")),
        }
    }
}

impl Serialize for AlphaRep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AlphaRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// numerics

/// Fractional part in `[0, 1)`.
pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Exact product `a*b = hi + lo`.
pub(crate) fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    (hi, lo)
}

fn small_ratio(num: i128, den: i128) -> f64 {
    if num.unsigned_abs() < (1u128 << 53) && den.unsigned_abs() < (1u128 << 53) {
        num as f64 / den as f64
    } else {
        ratio_to_f64(&BigInt::from(num), &BigInt::from(den))
    }
}

/// `num/den` to within a relative error of about `2^-64` (plus final rounding).
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let (n, d) = (num.abs(), den.abs());
    let shift = 64i64 + d.bits() as i64 - n.bits() as i64;
    let scaled = if shift >= 0 {
        (n << shift as u64) / &d
    } else {
        (n >> (-shift) as u64) / &d
    };
    let mantissa = scaled.to_f64().unwrap_or(f64::INFINITY);
    let v = mantissa * 2f64.powi(-(shift as i32).clamp(-1000, 1000)) * extra_scale(shift);
    if negative {
        -v
    } else {
        v
    }
}

fn extra_scale(shift: i64) -> f64 {
    if shift > 1000 {
        2f64.powi(-((shift - 1000) as i32).min(1074))
    } else if shift < -1000 {
        2f64.powi((-shift - 1000) as i32)
    } else {
        1.0
    }
}

/// `x = p/q` exactly with `q` a power of two.
fn exact_dyadic(x: f64) -> (BigInt, BigInt) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac_bits = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 {
        (frac_bits, -1074)
    } else {
        (frac_bits | (1u64 << 52), exp - 1075)
    };
    let m = BigInt::from(mantissa);
    let (p, q) = if e >= 0 {
        (m << e as u64, BigInt::one())
    } else {
        (m, BigInt::one() << (-e) as u64)
    };
    let g = p.gcd(&q);
    if g.is_zero() {
        (p, q)
    } else {
        (&p / &g, &q / &g)
    }
}

/// Half an ulp of `x` as an exact dyadic fraction.
fn half_ulp_dyadic(x: f64) -> (BigInt, BigInt) {
    let exp = ((x.to_bits() >> 52) & 0x7ff) as i64;
    let e = if exp == 0 { -1074 } else { exp - 1075 };
    // ulp = 2^e, half ulp = 2^(e-1)
    let e = e - 1;
    if e >= 0 {
        (BigInt::one() << e as u64, BigInt::one())
    } else {
        (BigInt::one(), BigInt::one() << (-e) as u64)
    }
}

/// Euclidean algorithm on `p/q`: returns `[a0, a1, ..., an]`.
fn euclid_quotients(p: &BigInt, q: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut a, mut b) = (p.clone(), q.clone());
    while !b.is_zero() {
        let (quot, rem) = a.div_mod_floor(&b);
        out.push(quot);
        a = b;
        b = rem;
    }
    out
}

fn check_quotients(v: &[u64]) -> Result<()> {
    if v.contains(&0) {
        return Err(Error::InvalidAlpha {
            text: format!("{v:?}"),
            reason: "partial quotients a_k (k >= 1) must be >= 1".into(),
        });
    }
    Ok(())
}

/// A convergent deep enough for double-double phase work, or the exact
/// value of a finite expansion.
fn deep_convergent(a0: i64, seq: &Quotients) -> (BigInt, BigInt) {
    reference_convergent(a0, seq, &(BigInt::one() << 160u32))
}

/// First convergent with denominator exceeding `target`, or the final one of
/// a finite expansion.
fn reference_convergent(a0: i64, seq: &Quotients, target: &BigInt) -> (BigInt, BigInt) {
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_cur, mut q_cur) = (BigInt::from(a0), BigInt::one());
    let mut k = 1;
    while &q_cur <= target {
        let Some(a) = seq.get(k) else { break };
        let a = BigInt::from(a);
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        k += 1;
    }
    (p_cur, q_cur)
}

/// `p/q ≈ hi + lo` for `0 <= p/q < 1`.
fn double_double(p: &BigInt, q: &BigInt) -> (f64, f64) {
    const S: u64 = 220;
    let scaled = (p << S) / q;
    let hi = ratio_to_f64(&scaled, &(BigInt::one() << S));
    let hi_scaled = f64_times_pow2(hi, S);
    let lo = ratio_to_f64(&(scaled - hi_scaled), &(BigInt::one() << S));
    (hi, lo)
}

/// `x · 2^s` as an exact integer (x must have at most `s` fractional bits).
fn f64_times_pow2(x: f64, s: u64) -> BigInt {
    let (p, q) = exact_dyadic(x);
    let qbits = q.bits() - 1;
    assert!(qbits <= s, "value has more fractional bits than the scale");
    p << (s - qbits)
}
