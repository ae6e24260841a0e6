//! Convergents and the badly-approximable verdict for a few rotation numbers.

use gordonlab::diophantine::{badly_approx_classify, convergents, AlphaRep};

fn main() -> gordonlab::Result<()> {
    for text in ["golden", "cf:0;(2)", "liouville:4", "float:0.1", "cf:0;1,(1,2)"] {
        let a: AlphaRep = text.parse()?;
        let cs = convergents(&a, 8);
        let qs: Vec<String> = cs.iter().map(|c| c.q.to_string()).collect();
        let c = badly_approx_classify(&a, 100_000)?;
        println!(
            "{text:>14}  alpha={:.12}  q_k=[{}]  c~{:.4}  {}",
            a.value(),
            qs.join(", "),
            c.c_estimate,
            c.verdict
        );
    }
    Ok(())
}
