//! Orbit of the skew-shift, step by step and via the closed form.

use gordonlab::diophantine::AlphaRep;
use gordonlab::dynsys::{DynSystem, TorusPoint};

fn main() -> gordonlab::Result<()> {
    let sys = DynSystem::skew_shift("rational:1/4".parse::<AlphaRep>()?);
    let w = TorusPoint::new(vec![0.1, 0.2])?;
    let mut p = w.clone();
    for n in 0..=6 {
        let closed = sys.iterate(&w, n)?;
        println!("n={n:2}  stepped={p}  closed={closed}");
        p = sys.step(&p)?;
    }
    // negative times come from the inverse map
    println!("T^-3 w = {}", sys.iterate(&w, -3)?);
    Ok(())
}
