//! Fit a glass-plate angle scan and recover the coupling strength.
//!
//! Writes a Poisson-noised synthetic scan to a file, reads it back the way a
//! measured scan would be read, and fits both polarization channels.

use seqbell::calibration::{fit_scan, generate_synthetic_scan, read_scan, write_scan, ScanDesign, SyntheticTruth};

fn main() -> seqbell::Result<()> {
    let truth = SyntheticTruth::reference();
    let scan = generate_synthetic_scan(&truth, &ScanDesign::reference(), 2024)?;
    let path = std::env::temp_dir().join("seqbell_scan.csv");
    let file = std::fs::File::create(&path).map_err(|source| seqbell::Error::Io {
        path: path.clone(),
        source,
    })?;
    write_scan(&scan, file)?;
    println!("wrote {} points to {}", scan.points.len(), path.display());

    let fit = fit_scan(&read_scan(&path)?, None)?;
    println!("χ  = {:.2} ± {:.2}", fit.chi, fit.chi_err);
    println!("θ0 = {:.5} ± {:.5}", fit.theta0, fit.theta0_err);
    for (name, c) in [("H", &fit.h), ("V", &fit.v)] {
        println!(
            "{name}: amplitude {:.0} ± {:.0}, phase {:.4} ± {:.4}, background {:.1} ± {:.1}",
            c.amplitude, c.amplitude_err, c.phase, c.phase_err, c.background, c.background_err
        );
    }
    println!(
        "ε  = {:.4} ± {:.4} (truth {:.4}), χ²/dof = {:.2}",
        fit.epsilon,
        fit.epsilon_err,
        truth.epsilon(),
        fit.reduced_chi_square()
    );
    println!("\n{:>8} {:>9} {:>9}", "θ", "res H", "res V");
    for (theta, h, v) in fit.residuals(&scan).into_iter().step_by(4) {
        println!("{theta:8.4} {h:9.2} {v:9.2}");
    }
    Ok(())
}
