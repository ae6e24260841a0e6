//! Shifting the base point along the orbit shifts the operator.

use gordonlab::diophantine::AlphaRep;
use gordonlab::dynsys::{DynSystem, TorusPoint};
use gordonlab::potential::SampleFn;
use gordonlab::spectrum::covariance_check;

fn main() -> gordonlab::Result<()> {
    let f = SampleFn::cos_coord(0);
    let cases = [
        ("rotation", DynSystem::circle_rotation(AlphaRep::golden()), vec![0.37]),
        ("skew-shift", DynSystem::skew_shift(AlphaRep::golden()), vec![0.3, 0.6]),
    ];
    for (name, sys, w) in cases {
        let w = TorusPoint::new(w)?;
        for t in [-5, -1, 2, 5] {
            let r = covariance_check(&f, &sys, &w, t, 64)?;
            println!("{name:>10} t={t:+}  max diff={:.2e}  pass={}", r.max_abs_diff, r.pass);
        }
    }
    Ok(())
}
