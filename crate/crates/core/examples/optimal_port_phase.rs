//! How the port phase offset φ₀ trades off against I1, and its optimum.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use seqbell::sequential_chsh::{closed_form_i1, closed_form_i2, optimal_phi0};

fn main() {
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>8}", "ε", "φ₀*", "ε − π/2", "I1(0)", "I1(φ₀*)", "I2");
    for e in [0.2, 0.5, 0.8, 1.049, 1.3, FRAC_PI_2] {
        let (phi, best) = optimal_phi0(e);
        println!(
            "{e:6.3} {phi:10.6} {:10.6} {:10.6} {best:10.6} {:8.5}",
            e - FRAC_PI_2,
            closed_form_i1(e, 0.0),
            closed_form_i2(e)
        );
        assert!((best - 2.0 * SQRT_2 * e.sin()).abs() < 1e-9);
    }
    let e = 1.0;
    println!("\nI1 over φ₀ at ε = {e}");
    for k in -4..=4 {
        let phi = k as f64 * FRAC_PI_2 / 2.0;
        println!("  φ₀ = {phi:7.4}  I1 = {:8.5}", closed_form_i1(e, phi));
    }
}
