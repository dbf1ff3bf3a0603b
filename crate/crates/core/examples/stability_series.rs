//! Long-run stability of the coupling strength from repeated calibrations.

use seqbell::calibration::{
    fit_scan, generate_synthetic_scan, stability, stability_of_fits, synthetic_stability_series, ScanDesign,
    SyntheticTruth,
};

fn main() -> seqbell::Result<()> {
    let s = stability(synthetic_stability_series(-0.5975, 0.0025, 100, 13)?)?;
    println!(
        "generator μ = -0.5975, σ = 0.0025 → mean {:.5}, rms {:.5} over {} estimates",
        s.mean,
        s.rms,
        s.estimates.len()
    );

    let truth = SyntheticTruth::reference();
    let fits = (0..20)
        .map(|seed| fit_scan(&generate_synthetic_scan(&truth, &ScanDesign::reference(), seed)?, None))
        .collect::<seqbell::Result<Vec<_>>>()?;
    let s = stability_of_fits(&fits)?;
    let reported = fits.iter().map(|f| f.epsilon_err).sum::<f64>() / fits.len() as f64;
    println!(
        "20 refits of the same scan design: mean ε {:.5}, rms {:.5}, mean fit error {reported:.5}",
        s.mean, s.rms
    );
    Ok(())
}
