//! Repeated finite-statistics Bell measurements at reference-scale acquisition.

use seqbell::cli::EMULATION_VISIBILITY;
use seqbell::montecarlo::{run_trials, summarize, AcquisitionPlan};
use seqbell::sequential_chsh::{closed_form_i1, closed_form_i2, WeakConfig};

fn main() -> seqbell::Result<()> {
    let eps = 1.049;
    let plan = AcquisitionPlan::reference(42);
    println!(
        "ε = {eps}, {} s × {} cps per configuration; ideal (I1, I2) = ({:.4}, {:.4})",
        plan.duration_s,
        plan.rate_cps,
        closed_form_i1(eps, 0.0),
        closed_form_i2(eps)
    );
    for v in [1.0, EMULATION_VISIBILITY] {
        let cfg = WeakConfig::new(eps)?.with_visibility(v)?;
        let trials = run_trials(8, &plan, &cfg)?;
        println!("\nvisibility {v}");
        for t in &trials {
            println!(
                "  trial {}  I1 = {:.4} ± {:.4} ({:4.1}σ)  I2 = {:.4} ± {:.4} ({:4.1}σ)",
                t.trial,
                t.ab1.value,
                t.ab1.std_error,
                t.ab1.sigma_above_classical(),
                t.ab2.value,
                t.ab2.std_error,
                t.ab2.sigma_above_classical()
            );
        }
        let s = summarize(&trials)?;
        println!(
            "  mean   I1 = {:.4} ± {:.4}         I2 = {:.4} ± {:.4}; double violations {}/{}",
            s.ab1.mean, s.ab1.mean_error, s.ab2.mean, s.ab2.mean_error, s.double_violations, s.n
        );
    }
    Ok(())
}
