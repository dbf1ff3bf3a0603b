//! Library results against independent reference computations.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, SQRT_2};

use seqbell::sequential_chsh::{
    chsh_pair, distribution_triple, double_violation_window, optimal_phi0, Bit, Outcome, SettingBits,
    WeakConfig,
};

fn bit(i: usize) -> Bit {
    Bit::from_index(i).unwrap()
}

#[test]
fn triple_distribution_matches_kraus_oracle() {
    for (eps, phi0, v) in [(0.0, 0.0, 1.0), (0.3, 1.1, 0.9), (1.049, 0.0, 1.0), (FRAC_PI_2, -2.0, 0.7), (1.3, 2.9, 1.0)] {
        let cfg = WeakConfig::new(eps).unwrap().with_phi0(phi0).unwrap().with_visibility(v).unwrap();
        let d = distribution_triple(&cfg).unwrap();
        for x in 0..2 {
            for y1 in 0..2 {
                for y2 in 0..2 {
                    let s = SettingBits::new(bit(x), bit(y1), bit(y2));
                    for a in 0..2 {
                        for b1 in 0..2 {
                            for b2 in 0..2 {
                                let lib = d.p(s, Outcome::from_index(a), Outcome::from_index(b1), Outcome::from_index(b2));
                                let or = common::triple(x, y1, y2, a, b1, b2, eps, phi0, v);
                                assert!((lib - or).abs() < 1e-12, "ε={eps} φ₀={phi0} {s:?} {a}{b1}{b2}: {lib} vs {or}");
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn chsh_pair_matches_oracle_on_grid() {
    for k in 0..=40 {
        let eps = FRAC_PI_2 * k as f64 / 40.0;
        for phi0 in [0.0, 0.6, -1.4] {
            let (i1, i2) = chsh_pair(&WeakConfig::new(eps).unwrap().with_phi0(phi0).unwrap()).unwrap();
            let (o1, o2) = common::chsh_pair(eps, phi0, 1.0);
            assert!((i1 - o1).abs() < 1e-12 && (i2 - o2).abs() < 1e-12);
        }
    }
}

#[test]
fn oracle_reproduces_closed_forms() {
    for k in 0..=20 {
        let eps = FRAC_PI_2 * k as f64 / 20.0;
        let (o1, o2) = common::chsh_pair(eps, 0.0, 1.0);
        assert!((o1 - 2.0 * SQRT_2 * eps.sin().powi(2)).abs() < 1e-12);
        assert!((o2 - SQRT_2 * (1.0 + eps.cos())).abs() < 1e-12);
    }
}

#[test]
fn pi_over_three_values() {
    let (i1, i2) = chsh_pair(&WeakConfig::new(FRAC_PI_3).unwrap()).unwrap();
    assert!((i1 - 1.5 * SQRT_2).abs() < 1e-12);
    assert!((i2 - 1.5 * SQRT_2).abs() < 1e-12);
    assert!((i1 + i2 - 4.242640687119285).abs() < 1e-12);
}

#[test]
fn window_by_bound_inversion() {
    // 2√2 sin²ε = 2 and √2(1 + cos ε) = 2
    let lo = (1.0 / SQRT_2).sqrt().asin();
    let hi = (SQRT_2 - 1.0).acos();
    let (a, b) = double_violation_window();
    assert!((a - lo).abs() < 1e-9 && (b - hi).abs() < 1e-9);
    assert!((lo - 0.998937).abs() < 1e-6 && (hi - 1.143718).abs() < 1e-6);
}

#[test]
fn optimum_against_brute_force_scan() {
    for eps in [0.2, 0.7, 1.049, 1.5] {
        let (p, v) = optimal_phi0(eps);
        let best = (0..20000)
            .map(|k| -PI + 2.0 * PI * k as f64 / 20000.0)
            .map(|q| common::chsh_pair(eps, q, 1.0).0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - best).abs() < 1e-6);
        assert!((v - 2.0 * SQRT_2 * eps.sin()).abs() < 1e-9);
        assert!((p - (eps - FRAC_PI_2)).abs() < 1e-6);
    }
}

#[test]
fn werner_noise_scales_both_values() {
    for v in [0.5, 0.97, 1.0] {
        let (i1, i2) = chsh_pair(&WeakConfig::new(0.9).unwrap().with_visibility(v).unwrap()).unwrap();
        let (o1, o2) = common::chsh_pair(0.9, 0.0, 1.0);
        assert!((i1 - v * o1).abs() < 1e-12 && (i2 - v * o2).abs() < 1e-12);
    }
}
