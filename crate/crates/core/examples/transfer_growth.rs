//! Four-point growth of solutions for a periodic potential over an energy grid.

use gordonlab::potential::PotentialWindow;
use gordonlab::transfer::{aux1_suite, aux2_suite, gordon_lower_bound_probe, monodromy, StateVec};

fn main() -> gordonlab::Result<()> {
    let cell = [0.7, -1.3, 0.2];
    let v = PotentialWindow::from_fn(-40, 41, |n| cell[n.rem_euclid(3) as usize])?;
    for i in 0..7 {
        let e = -3.0 + i as f64;
        let tr = monodromy(&v, e, 3)?;
        let rep = gordon_lower_bound_probe(&v, e, StateVec::new(1.0, 0.0), &[3, 6, 9])?;
        let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.ratio)).collect();
        println!("E={e:+.1}  tr M={:+.3}  ratios=[{}]", tr.a11 + tr.a22, ratios.join(", "));
    }
    let a1 = aux1_suite(1000, 20, 1)?;
    let a2 = aux2_suite(10_000, 1)?;
    println!("telescoping: {} failures / {}", a1.failures, a1.cases);
    println!("four powers: {} failures / {}, min slack {:.3}", a2.failures, a2.cases, a2.min_slack);
    Ok(())
}
