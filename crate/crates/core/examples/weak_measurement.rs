//! The ancilla-coupled weak measurement on a single photon.
//!
//! Shows the joint system ⊗ ancilla state, the reduced coherence left on the
//! photon, and how much information each ancilla readout carries.

use seqbell::qcore::{partial_trace, ComplexState, C64};
use seqbell::sequential_chsh::{bob1_projector, weak_channel, Bit, Outcome, WeakConfig};

fn main() -> seqbell::Result<()> {
    let input = ComplexState::qubit(C64::new(0.8, 0.0), C64::new(0.6, 0.0));
    println!("input (0.8, 0.6) in H/V, setting y1 = 0");
    println!("{:>6} {:>10} {:>10} {:>10}", "ε", "|ρ_HV|", "p(b1=+)", "p(b1=-)");
    for e in [0.0, 0.3, 0.6, 1.049, 1.3, std::f64::consts::FRAC_PI_2] {
        let cfg = WeakConfig::new(e)?;
        let joint = weak_channel(&input, Bit::Zero, &cfg)?.density();
        let photon = partial_trace(&joint, &[0])?;
        let p = |o| -> seqbell::Result<f64> {
            let ancilla = partial_trace(&joint, &[1])?;
            seqbell::qcore::expectation(&bob1_projector(o, cfg.phi0), &ancilla)
        };
        println!(
            "{e:6.3} {:10.5} {:10.5} {:10.5}",
            photon.element(0, 1).norm(),
            p(Outcome::Plus)?,
            p(Outcome::Minus)?
        );
    }
    Ok(())
}
