//! Both CHSH values across measurement strengths, with the double-violation window.

use std::f64::consts::FRAC_PI_2;

use seqbell::sequential_chsh::{
    chsh_pair, closed_form_i1, closed_form_i2, double_violation_window, in_double_violation_window, WeakConfig,
};

fn main() -> seqbell::Result<()> {
    let (lo, hi) = double_violation_window();
    println!("double violation for ε in ({lo:.6}, {hi:.6})");
    println!("{:>8} {:>9} {:>9} {:>9} {:>9}  both", "ε", "I1", "I2", "I1 model", "I2 model");
    for k in 0..=16 {
        let e = FRAC_PI_2 * k as f64 / 16.0;
        let (i1, i2) = chsh_pair(&WeakConfig::new(e)?)?;
        println!(
            "{e:8.4} {:9.5} {:9.5} {i1:9.5} {i2:9.5}  {}",
            closed_form_i1(e, 0.0),
            closed_form_i2(e),
            if in_double_violation_window(e) { "yes" } else { "" }
        );
    }
    Ok(())
}
