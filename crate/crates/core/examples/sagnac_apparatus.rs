//! Jones-calculus model of the optical setup against the ideal qubit model.

use std::f64::consts::FRAC_PI_3;

use seqbell::apparatus::{apparatus_distribution, sagnac_output, Apparatus, PlateSettings};
use seqbell::qcore::ComplexState;
use seqbell::sequential_chsh::{distribution_triple, Pair, WeakConfig};

fn main() -> seqbell::Result<()> {
    let plates = PlateSettings::for_epsilon(FRAC_PI_3)?;
    println!(
        "plates ε0 = {:.4}, ε1 = {:.4}, liquid crystal {:.4}",
        plates.eps0, plates.eps1, plates.lq_phase + 0.0
    );
    println!("\nport 2 probability for a diagonal photon versus glass phase");
    for k in 0..=8 {
        let phi = k as f64 * std::f64::consts::PI / 4.0;
        let out = sagnac_output(&ComplexState::plus(), &plates, phi)?;
        println!("  φ = {phi:6.3}  p = {:.5}", out.path_probability(0));
    }

    let mut setup = Apparatus::with_epsilon(FRAC_PI_3)?;
    for phi0 in [0.0, -0.5] {
        setup.port_phase = phi0;
        let optical = apparatus_distribution(&setup)?;
        let ideal = distribution_triple(&WeakConfig::new(FRAC_PI_3)?.with_phi0(phi0)?)?;
        let i1 = seqbell::sequential_chsh::chsh(&optical.ab1(), Pair::AB1)?.value;
        println!(
            "φ₀ = {phi0:5.2}: max |optics − ideal| = {:.1e}, optical I1 = {i1:.6}",
            optical.max_abs_diff(&ideal)
        );
    }
    let tilt = setup.glass.tilt_for_phase(setup.glass.phase_offset + 2371.0 + 1.0)?;
    println!("glass tilt adding one radian above normal incidence: {tilt:.6} rad");
    Ok(())
}
