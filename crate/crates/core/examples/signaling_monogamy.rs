//! Why two Bobs can both violate CHSH: Bob1's choice reaches Bob2.

use std::f64::consts::FRAC_PI_2;

use seqbell::sequential_chsh::{monogamy_sum, signaling_gap, WeakConfig};

fn main() -> seqbell::Result<()> {
    println!("{:>6} {:>10} {:>12}", "ε", "I1 + I2", "signaling");
    for k in 0..=10 {
        let e = FRAC_PI_2 * k as f64 / 10.0;
        let gap = signaling_gap(&WeakConfig::new(e)?)?;
        let sum = monogamy_sum(e);
        println!("{e:6.3} {sum:10.5} {gap:12.6}{}", if sum > 4.0 { "  above 4" } else { "" });
    }
    Ok(())
}
