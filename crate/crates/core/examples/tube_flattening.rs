//! Lock cos(2πx) on a tube around the golden orbit and watch the Gordon gap close.

use gordonlab::diophantine::AlphaRep;
use gordonlab::dynsys::{DynSystem, TorusPoint};
use gordonlab::potential::{flatten_along_tube, gordon_gap_verify, gordon_gap_verify_base, omega_f_tube_sample, SampleFn};
use gordonlab::repetition::prp_probe;

fn main() -> gordonlab::Result<()> {
    let alpha = AlphaRep::golden();
    let k = 4;
    let probe = prp_probe(&DynSystem::circle_rotation(alpha.clone()), &TorusPoint::origin(1), k, 10_000)?;
    let q = probe.q_at(k).expect("golden rotation has certificates");
    let g = flatten_along_tube(&SampleFn::cos_coord(0), &alpha, k, q)?;
    println!("k={k} q_k={q} r_k={:.4e} arcs={}", g.radius(), g.arcs().len());
    for j in 1..=q {
        let w = omega_f_tube_sample(&alpha, k, q, j, g.radius(), 0.3 * g.radius())?;
        let flat = gordon_gap_verify(&g, &w, k, q)?;
        let raw = gordon_gap_verify_base(&g, &w, k, q)?;
        println!(
            "j={j}  g: fwd={:.2e} bwd={:.2e}  f: fwd={:.2e} bwd={:.2e}  bound={:.2e}",
            flat.fwd, flat.bwd, raw.fwd, raw.bwd, flat.bound
        );
    }
    Ok(())
}
