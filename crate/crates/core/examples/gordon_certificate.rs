//! Gordon certificate of a nested-periodic potential, its periodic
//! approximants, and a window rebuilt from them.

use gordonlab::potential::{
    def3_check, gordon_certify, periodic_approximant, synthesize_window, PotentialWindow,
};

fn main() -> gordonlab::Result<()> {
    let q = [2u64, 6, 18];
    let c = 2.0;
    // period-2 base plus tiny corrections of period 6 and 18
    let v = PotentialWindow::from_fn(-36, 36, |n| {
        let a = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let b = 1e-3 * ((n.rem_euclid(6)) as f64 - 2.5);
        let d = 1e-9 * ((n.rem_euclid(18)) as f64).sin();
        a + b + d
    })?;
    let cert = gordon_certify(&v, &q, c)?;
    for r in &cert.rows {
        println!("m={} q={:2}  fwd={:.3e} bwd={:.3e} bound={:.3e}", r.m, r.q_m, r.fwd_dev, r.bwd_dev, r.bound);
    }
    println!("certified: {}", cert.pass);

    let approx = q
        .iter()
        .enumerate()
        .map(|(i, &qm)| periodic_approximant(&v, qm, i as u64 + 1))
        .collect::<gordonlab::Result<Vec<_>>>()?;
    let d3 = def3_check(&v, &approx, 2.0 * c)?;
    println!("approximants: periodic={} bounded={} close={}", d3.periodic, d3.bounded, d3.close);

    let w = synthesize_window(&approx, c, v.lo(), v.hi())?;
    println!("rebuilt window certified at 2C: {}", gordon_certify(&w, &q, 2.0 * c)?.pass);
    Ok(())
}
