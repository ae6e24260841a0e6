//! Finite sections of the almost Mathieu operator at three couplings.

use gordonlab::diophantine::AlphaRep;
use gordonlab::dynsys::{DynSystem, TorusPoint};
use gordonlab::potential::{sample_potential, SampleFn};
use gordonlab::spectrum::{build_truncation, decay_diagnostic, spectrum_report};

fn main() -> gordonlab::Result<()> {
    let n = 200;
    let sys = DynSystem::circle_rotation(AlphaRep::golden());
    let w = TorusPoint::new(vec![0.123])?;
    let base = sample_potential(&SampleFn::cos_coord(0), &sys, &w, -(n as i64), n as i64)?;
    for lambda in [0.5, 1.0, 3.0] {
        let v = gordonlab::potential::PotentialWindow::new(
            base.lo(),
            base.values().iter().map(|x| 2.0 * lambda * x).collect(),
            2.0 * lambda,
        )?;
        let rep = spectrum_report(&build_truncation(&v, n, 0)?, 1e-12)?;
        let d = decay_diagnostic(&rep)?;
        let worst = rep.residuals.iter().cloned().fold(0.0f64, f64::max);
        println!(
            "lambda={lambda}: E in [{:.3}, {:.3}]  median IPR={:.4}  max IPR={:.4}  max residual={worst:.1e}",
            rep.eigenvalues[0],
            rep.eigenvalues[n - 1],
            d.median_ipr,
            d.max_ipr
        );
    }
    Ok(())
}
