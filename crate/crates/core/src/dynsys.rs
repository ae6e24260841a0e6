//! Rotations and the skew-shift on the torus.
//!
//! Points are stored as coordinates in `[0, 1)`; every operation reduces
//! modulo one before returning. Distances use the sup over coordinates of
//! the circle distance `min(|x − y|, 1 − |x − y|)`.
//!
//! Iterates `T^n ω` are computed in closed form from `ω` rather than by
//! repeated stepping, so long orbits do not accumulate drift:
//!
//! * rotation: `T^n ω = ω + nα`
//! * skew-shift `T(x, y) = (x + 2α, x + y)`: `T^n(x, y) = (x + 2nα, y + nx + n(n−1)α)`
//!
//! Both formulas hold for negative `n` as well.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diophantine::{frac, two_product, AlphaRep};
use crate::error::{Error, Result};

/// A point of `𝕋^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Reduces every coordinate modulo one.
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        if coords.is_empty() {
            return Err(Error::InvalidArgument("torus point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("torus coordinates must be finite".into()));
        }
        Ok(Self::reduced(coords))
    }

    pub(crate) fn reduced(mut coords: Vec<f64>) -> Self {
        for c in &mut coords {
            *c = frac(*c);
        }
        TorusPoint { coords }
    }

    pub fn origin(dim: usize) -> Self {
        TorusPoint {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Shift by `offset` in every coordinate listed (others unchanged).
    pub fn offset(&self, offsets: &[f64]) -> Result<Self> {
        check_dim(self.dim(), offsets.len())?;
        Ok(Self::reduced(
            self.coords.iter().zip(offsets).map(|(c, o)| c + o).collect(),
        ))
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Circle distance between two coordinates.
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = frac(x - y);
    d.min(1.0 - d)
}

/// Sup over coordinates of the circle distance.
pub fn torus_dist(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(sup_circle_dist(x.coords(), y.coords()))
}

pub(crate) fn sup_circle_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| circle_dist(*a, *b))
        .fold(0.0, f64::max)
}

/// `ω + α` coordinatewise, modulo one.
pub fn rotation_step(omega: &TorusPoint, alpha: &[AlphaRep]) -> Result<TorusPoint> {
    rotation_iterate(omega, alpha, 1)
}

/// `ω + nα` coordinatewise, modulo one.
pub fn rotation_iterate(omega: &TorusPoint, alpha: &[AlphaRep], n: i64) -> Result<TorusPoint> {
    check_dim(omega.dim(), alpha.len())?;
    Ok(TorusPoint::reduced(
        omega
            .coords()
            .iter()
            .zip(alpha)
            .map(|(c, a)| c + a.frac_mul(n as i128))
            .collect(),
    ))
}

/// One skew-shift step `(ω₁ + 2α, ω₁ + ω₂)`.
pub fn skew_step(omega: &TorusPoint, alpha: &AlphaRep) -> Result<TorusPoint> {
    check_dim(2, omega.dim())?;
    let (x, y) = (omega.coords[0], omega.coords[1]);
    Ok(TorusPoint::reduced(vec![x + alpha.frac_mul(2), x + y]))
}

/// Inverse skew-shift step `(ω₁ − 2α, ω₂ − ω₁ + 2α)`.
pub fn skew_step_inverse(omega: &TorusPoint, alpha: &AlphaRep) -> Result<TorusPoint> {
    check_dim(2, omega.dim())?;
    let (x, y) = (omega.coords[0], omega.coords[1]);
    let x_prev = frac(x - alpha.frac_mul(2));
    Ok(TorusPoint::reduced(vec![x_prev, y - x_prev]))
}

/// `T^n ω` for the skew-shift, from the closed form
/// `(ω₁ + 2nα, ω₂ + nω₁ + n(n−1)α)`.
pub fn skew_iterate(omega: &TorusPoint, alpha: &AlphaRep, n: i64) -> Result<TorusPoint> {
    check_dim(2, omega.dim())?;
    let (x, y) = skew_coords(omega.coords[0], omega.coords[1], alpha, n);
    Ok(TorusPoint { coords: vec![x, y] })
}

#[inline]
fn skew_coords(x: f64, y: f64, alpha: &AlphaRep, n: i64) -> (f64, f64) {
    let n128 = n as i128;
    let first = frac(x + alpha.frac_mul(2 * n128));
    let second = frac(y + frac_mul_f64(n, x) + alpha.frac_mul(n128 * (n128 - 1)));
    (first, second)
}

/// `frac(n·x)` using an exact product.
pub(crate) fn frac_mul_f64(n: i64, x: f64) -> f64 {
    let (hi, lo) = two_product(n as f64, x);
    frac(frac(hi) + lo)
}

/// The map `T` of a dynamical system on the torus.
#[derive(Clone, Debug)]
pub enum DynSystem {
    /// `ω ↦ ω + α` on `𝕋^d`, `d = alpha.len()`.
    Rotation(Vec<AlphaRep>),
    /// `(ω₁, ω₂) ↦ (ω₁ + 2α, ω₁ + ω₂)` on `𝕋²`.
    SkewShift(AlphaRep),
}

impl DynSystem {
    pub fn rotation(alpha: Vec<AlphaRep>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("rotation needs at least one alpha".into()));
        }
        Ok(DynSystem::Rotation(alpha))
    }

    pub fn circle_rotation(alpha: AlphaRep) -> Self {
        DynSystem::Rotation(vec![alpha])
    }

    pub fn skew_shift(alpha: AlphaRep) -> Self {
        DynSystem::SkewShift(alpha)
    }

    pub fn dim(&self) -> usize {
        match self {
            DynSystem::Rotation(a) => a.len(),
            DynSystem::SkewShift(_) => 2,
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, DynSystem::Rotation(_))
    }

    pub fn check_point(&self, omega: &TorusPoint) -> Result<()> {
        check_dim(self.dim(), omega.dim())
    }

    pub fn step(&self, omega: &TorusPoint) -> Result<TorusPoint> {
        match self {
            DynSystem::Rotation(a) => rotation_step(omega, a),
            DynSystem::SkewShift(a) => skew_step(omega, a),
        }
    }

    pub fn step_inverse(&self, omega: &TorusPoint) -> Result<TorusPoint> {
        match self {
            DynSystem::Rotation(a) => rotation_iterate(omega, a, -1),
            DynSystem::SkewShift(a) => skew_step_inverse(omega, a),
        }
    }

    /// `T^n ω` for any integer `n`.
    pub fn iterate(&self, omega: &TorusPoint, n: i64) -> Result<TorusPoint> {
        match self {
            DynSystem::Rotation(a) => rotation_iterate(omega, a, n),
            DynSystem::SkewShift(a) => skew_iterate(omega, a, n),
        }
    }

    /// `d(T^n ω, T^{n+q} ω)` without allocating; `omega` must already have
    /// the right dimension.
    pub(crate) fn orbit_gap(&self, omega: &[f64], n: i64, q: i64) -> f64 {
        match self {
            DynSystem::Rotation(alpha) => omega
                .iter()
                .zip(alpha)
                .map(|(c, a)| {
                    let x = frac(c + a.frac_mul(n as i128));
                    let y = frac(c + a.frac_mul((n + q) as i128));
                    circle_dist(x, y)
                })
                .fold(0.0, f64::max),
            DynSystem::SkewShift(a) => {
                let (x0, y0) = skew_coords(omega[0], omega[1], a, n);
                let (x1, y1) = skew_coords(omega[0], omega[1], a, n + q);
                circle_dist(x0, x1).max(circle_dist(y0, y1))
            }
        }
    }
}

impl fmt::Display for DynSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynSystem::Rotation(a) => {
                let parts: Vec<String> = a.iter().map(ToString::to_string).collect();
                write!(f, "rotation[{}]", parts.join(" "))
            }
            DynSystem::SkewShift(a) => write!(f, "skew-shift[{a}]"),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SystemDescriptor<'a> {
    Rotation { alpha: &'a [AlphaRep] },
    SkewShift { alpha: &'a AlphaRep },
}

impl Serialize for DynSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DynSystem::Rotation(a) => SystemDescriptor::Rotation { alpha: a }.serialize(s),
            DynSystem::SkewShift(a) => SystemDescriptor::SkewShift { alpha: a }.serialize(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(torus_dist(&p(&[0.1]), &p(&[0.1])).unwrap(), 0.0);
        assert_abs_diff_eq!(torus_dist(&p(&[0.95]), &p(&[0.05])).unwrap(), 0.10, epsilon = 1e-15);
        assert_abs_diff_eq!(
            torus_dist(&p(&[0.2, 0.9]), &p(&[0.3, 0.05])).unwrap(),
            0.15,
            epsilon = 1e-15
        );
        assert!(matches!(
            torus_dist(&p(&[0.1]), &p(&[0.1, 0.2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coordinates_are_reduced() {
        let x = p(&[1.25, -0.25, -1e-20]);
        assert_eq!(x.coords(), &[0.25, 0.75, 0.0]);
    }

    #[test]
    fn rotation_examples() {
        let half = AlphaRep::rational(1, 2).unwrap();
        assert_eq!(rotation_step(&p(&[0.25]), &[half]).unwrap().coords(), &[0.75]);
        let fifth = AlphaRep::float(0.2).unwrap();
        assert_abs_diff_eq!(
            rotation_step(&p(&[0.9]), &[fifth]).unwrap().coords()[0],
            0.1,
            epsilon = 1e-15
        );
        let g = AlphaRep::golden();
        let alphas = vec![g.clone(), g.clone()];
        let mut x = TorusPoint::origin(2);
        for _ in 0..3 {
            x = rotation_step(&x, &alphas).unwrap();
        }
        let three = (3.0 * (5f64.sqrt() - 1.0) / 2.0).fract();
        assert_abs_diff_eq!(x.coords()[0], three, epsilon = 1e-14);
        assert_abs_diff_eq!(x.coords()[1], three, epsilon = 1e-14);
    }

    #[test]
    fn skew_examples() {
        let quarter = AlphaRep::rational(1, 4).unwrap();
        let zero = AlphaRep::rational(0, 1).unwrap();
        assert_eq!(skew_step(&p(&[0.0, 0.0]), &quarter).unwrap().coords(), &[0.5, 0.0]);
        let s = skew_step(&p(&[0.3, 0.4]), &zero).unwrap();
        assert_abs_diff_eq!(s.coords()[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coords()[1], 0.7, epsilon = 1e-15);

        // (0.1, 0.2) -> (0.6, 0.3) -> (0.1, 0.9)
        let twice = skew_step(&skew_step(&p(&[0.1, 0.2]), &quarter).unwrap(), &quarter).unwrap();
        assert_abs_diff_eq!(twice.coords()[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(twice.coords()[1], 0.9, epsilon = 1e-15);
        let closed = skew_iterate(&p(&[0.1, 0.2]), &quarter, 2).unwrap();
        assert_abs_diff_eq!(closed.coords()[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(closed.coords()[1], 0.9, epsilon = 1e-15);
    }

    #[test]
    fn skew_iterate_identity_and_first_step() {
        let g = AlphaRep::golden();
        let w = p(&[0.37, 0.81]);
        assert_eq!(skew_iterate(&w, &g, 0).unwrap(), w);
        let one = skew_iterate(&TorusPoint::origin(2), &g, 1).unwrap();
        assert_abs_diff_eq!(one.coords()[0], g.frac_mul(2), epsilon = 1e-16);
        assert_eq!(one.coords()[1], 0.0);
        assert!(skew_step(&p(&[0.1]), &g).is_err());
    }

    #[test]
    fn inverse_steps_undo_steps() {
        let sys = [
            DynSystem::circle_rotation(AlphaRep::golden()),
            DynSystem::skew_shift(AlphaRep::silver()),
        ];
        for s in &sys {
            let w = TorusPoint::new(vec![0.123; s.dim()]).unwrap();
            let back = s.step_inverse(&s.step(&w).unwrap()).unwrap();
            assert!(torus_dist(&w, &back).unwrap() < 1e-12);
            let neg = s.iterate(&s.iterate(&w, 17).unwrap(), -17).unwrap();
            assert!(torus_dist(&w, &neg).unwrap() < 1e-12);
        }
    }

    #[test]
    fn orbit_gap_matches_points() {
        let s = DynSystem::skew_shift(AlphaRep::golden());
        let w = p(&[0.1, 0.2]);
        for (n, q) in [(0, 5), (7, 13), (100, 55)] {
            let a = s.iterate(&w, n).unwrap();
            let b = s.iterate(&w, n + q).unwrap();
            assert_eq!(s.orbit_gap(w.coords(), n, q), torus_dist(&a, &b).unwrap());
        }
    }

    mod exact {
        use super::*;
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use num_traits::{ToPrimitive, Zero};
        use proptest::prelude::*;

        fn frac(x: BigRational) -> BigRational {
            let f = x.clone() - x.floor();
            if f < BigRational::zero() {
                f + BigRational::from_integer(1.into())
            } else {
                f
            }
        }

        fn r(p: i64, q: i64) -> BigRational {
            BigRational::new(BigInt::from(p), BigInt::from(q))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn skew_closed_form_matches_exact_steps(
                ap in 0i64..97, aq in 1i64..97, x in 0i64..1000, y in 0i64..1000, n in -40i64..40,
            ) {
                let a = r(ap, aq);
                let (mut u, mut v) = (r(x, 1000), r(y, 1000));
                for _ in 0..n.unsigned_abs() {
                    if n > 0 {
                        let nu = frac(u.clone() + a.clone() * BigInt::from(2));
                        v = frac(u + v);
                        u = nu;
                    } else {
                        u = frac(u - a.clone() * BigInt::from(2));
                        v = frac(v - u.clone());
                    }
                }
                let alpha = AlphaRep::rational(ap, aq).unwrap();
                let got = skew_iterate(&p(&[x as f64 / 1000.0, y as f64 / 1000.0]), &alpha, n).unwrap();
                let want = p(&[u.to_f64().unwrap(), v.to_f64().unwrap()]);
                prop_assert!(torus_dist(&got, &want).unwrap() < 1e-9);
            }
        }
    }
}
