//! Repetition certificates for a rotation and for the skew-shift.

use gordonlab::diophantine::AlphaRep;
use gordonlab::dynsys::{DynSystem, TorusPoint};
use gordonlab::repetition::{prp_probe, qk_divergence_check, rp_search, theorem4_probe};

fn main() -> gordonlab::Result<()> {
    let rot = DynSystem::circle_rotation(AlphaRep::golden());
    let w = TorusPoint::origin(1);
    if let Some(c) = rp_search(&rot, &w, 0.01, 2, 100)? {
        println!("rotation: eps=0.01 r=2 -> q={} worst={:.6e}", c.q, c.worst_dist);
    }
    let report = prp_probe(&rot, &w, 8, 10_000)?;
    let div = qk_divergence_check(&report)?;
    println!("rotation q_k for k=1..8: {:?} (growing: {})", div.q_sequence, div.ok);

    let w2 = TorusPoint::new(vec![0.1, 0.2])?;
    for alpha in ["liouville:4", "golden"] {
        let r = theorem4_probe(&alpha.parse()?, &w2, 3, 2000, 100_000)?;
        let qs: Vec<_> = (1..=3).map(|k| r.probe.q_at(k)).collect();
        println!(
            "skew {alpha:>11}: {}  q_k={qs:?}  agreement={}",
            r.classification.verdict, r.agreement
        );
    }
    Ok(())
}
