//! Ensemble behaviour of the Monte Carlo estimators and the scan fitter.

use std::f64::consts::{FRAC_PI_3, SQRT_2};

use seqbell::calibration::{
    expected_scan, fit_scan, generate_synthetic_scan, stability, synthetic_stability_series, ScanDesign,
    SyntheticTruth,
};
use seqbell::montecarlo::{
    estimate_both, estimate_from_table, expected_counts, rounded_expected_record, run_trials, summarize,
    AcquisitionPlan,
};
use seqbell::sequential_chsh::{closed_form_i1, closed_form_i2, Pair, WeakConfig};

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn seed_ensemble_mean_matches_sine_squared_law() {
    let cfg = WeakConfig::new(1.049).unwrap();
    let s = summarize(&run_trials(200, &AcquisitionPlan::reference(77), &cfg).unwrap()).unwrap();
    let truth = 2.0 * SQRT_2 * 1.049f64.sin().powi(2);
    assert!((truth - 2.126).abs() < 1e-3);
    assert!((s.ab1.mean - truth).abs() < 3.0 * s.ab1.mean_error, "{:?}", s.ab1);
    assert!((s.ab2.mean - closed_form_i2(1.049)).abs() < 3.0 * s.ab2.mean_error, "{:?}", s.ab2);
}

#[test]
fn propagated_error_scales_as_inverse_root_n() {
    let cfg = WeakConfig::new(1.049).unwrap();
    let at = |t: f64| {
        let table = expected_counts(&AcquisitionPlan::new(t, 700.0, 0).unwrap(), &cfg).unwrap();
        [Pair::AB1, Pair::AB2].map(|w| estimate_from_table(&table, w, 0.5).unwrap().std_error)
    };
    let (lo, hi) = (at(3.0), at(30.0));
    for k in 0..2 {
        assert!((lo[k] / hi[k] / 10f64.sqrt() - 1.0).abs() < 0.05);
    }
}

#[test]
fn propagated_error_tracks_empirical_spread_over_a_decade() {
    let cfg = WeakConfig::new(1.049).unwrap();
    let mut reported = Vec::new();
    for t in [3.0, 30.0] {
        let s = summarize(&run_trials(400, &AcquisitionPlan::new(t, 700.0, 5).unwrap(), &cfg).unwrap()).unwrap();
        for st in [s.ab1, s.ab2] {
            // sample sd of 400 draws fluctuates by about 3.5 %
            assert!((st.mean_std_error / st.spread - 1.0).abs() < 0.15, "T={t}: {st:?}");
        }
        reported.push(s.ab1.mean_std_error);
    }
    assert!((reported[0] / reported[1] / 10f64.sqrt() - 1.0).abs() < 0.05);
}

#[test]
fn long_acquisition_converges_to_closed_forms() {
    for e in [0.3, 1.049, FRAC_PI_3, 1.5] {
        let cfg = WeakConfig::new(e).unwrap();
        let plan = AcquisitionPlan::new(30.0e4, 700.0, 0).unwrap();
        let (a, b) = estimate_both(&rounded_expected_record(&plan, &cfg).unwrap()).unwrap();
        assert!((a.value - closed_form_i1(e, 0.0)).abs() < 1e-3);
        assert!((b.value - closed_form_i2(e)).abs() < 1e-3);
    }
}

#[test]
fn trial_means_at_pi_over_three() {
    let cfg = WeakConfig::new(FRAC_PI_3).unwrap();
    let s = summarize(&run_trials(100, &AcquisitionPlan::reference(31), &cfg).unwrap()).unwrap();
    let truth = 3.0 * SQRT_2 / 2.0;
    assert!((s.ab1.mean - truth).abs() < 3.0 * s.ab1.mean_error);
    assert!((s.ab2.mean - truth).abs() < 3.0 * s.ab2.mean_error);
    assert_eq!(s.double_violations, 100);
}

#[test]
fn noisy_calibration_is_unbiased_and_honest() {
    let truth = SyntheticTruth::reference();
    let design = ScanDesign::reference();
    let fits: Vec<_> = (0..100)
        .map(|seed| fit_scan(&generate_synthetic_scan(&truth, &design, seed).unwrap(), None).unwrap())
        .collect();
    let eps: Vec<f64> = fits.iter().map(|f| f.epsilon).collect();
    let (m, sd) = mean_sd(&eps);
    let reported = fits.iter().map(|f| f.epsilon_err).sum::<f64>() / fits.len() as f64;
    assert!((m - truth.epsilon()).abs() < 3.0 * sd / 10.0, "mean {m}, sd {sd}");
    assert!((0.002..=0.012).contains(&sd), "sd {sd}");
    assert!((reported / sd - 1.0).abs() < 0.5, "reported {reported}, sd {sd}");
    assert!(eps.iter().all(|e| (e - truth.epsilon()).abs() < 0.012));
}

#[test]
fn identical_channels_give_no_coupling() {
    let truth = SyntheticTruth::with_phases(1185.5, 0.356, 0.9, 0.0);
    for seed in 0..5 {
        let f = fit_scan(&generate_synthetic_scan(&truth, &ScanDesign::reference(), seed).unwrap(), None).unwrap();
        assert!(f.epsilon.abs() < 3.0 * f.epsilon_err, "{} ± {}", f.epsilon, f.epsilon_err);
    }
}

#[test]
fn stability_recovers_generator_sigma() {
    for seed in 0..10 {
        let s = stability(synthetic_stability_series(-0.5975, 0.0025, 100, seed).unwrap()).unwrap();
        assert!((s.rms / 0.0025 - 1.0).abs() < 0.3, "seed {seed}: {}", s.rms);
        assert!((s.mean + 0.5975).abs() < 3.0 * 0.0025 / 10.0);
    }
}

#[test]
fn replicate_mean_matches_prediction() {
    let truth = SyntheticTruth::reference();
    let design = ScanDesign::linear(0.26, 0.45, 8, 1.0);
    let expect = expected_scan(&truth, &design).unwrap();
    let n = 1000;
    let mut sums = [(0.0, 0.0); 8];
    for seed in 0..n {
        let scan = generate_synthetic_scan(&truth, &design, seed).unwrap();
        for (s, p) in sums.iter_mut().zip(&scan.points) {
            s.0 += p.counts_h;
            s.1 += p.counts_v;
        }
    }
    for (s, p) in sums.iter().zip(&expect.points) {
        let n = n as f64;
        assert!((s.0 / n - p.counts_h).abs() < 3.0 * (p.counts_h / n).sqrt());
        assert!((s.1 / n - p.counts_v).abs() < 3.0 * (p.counts_v / n).sqrt());
    }
}
