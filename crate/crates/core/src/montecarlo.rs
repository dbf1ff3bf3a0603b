//! Finite-statistics acquisition and CHSH estimation.
//!
//! A full Bell run has 16 configurations `(x, y₁, y₂, s)`, where `s` selects
//! the glass-plate phase φ₀ (`s = +`) or φ₀ + π (`s = −`) so that the single
//! monitored port reports Bob1's outcome `b₁ = s`. Every event carries
//! `(a, b₁, b₂)`, so both inequalities come from one shared acquisition.
//!
//! The coincidence rate of a configuration is proportional to `p(b₁ = s)`:
//! cell `(a, b₂)` has mean `2 · rate · T · p(a, s, b₂ | x, y₁, y₂)`, which
//! averages to `rate · T` per configuration. The configuration total is drawn
//! from a Poisson law and split multinomially over the four cells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::sequential_chsh::{
    distribution_triple, Bit, Outcome, Pair, SettingBits, TripleDistribution, WeakConfig,
};

/// Configurations per full Bell measurement.
pub const CONFIGURATIONS: usize = 16;

/// `[x][y1][y2][s][a][b2]`.
pub type CountTable<T> = [[[[[[T; 2]; 2]; 2]; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionPlan {
    /// Seconds per configuration.
    pub duration_s: f64,
    /// Mean coincidence rate per configuration, counts per second.
    pub rate_cps: f64,
    /// Flat accidental rate per configuration, spread evenly over outcomes.
    pub background_cps: f64,
    pub seed: u64,
}

impl AcquisitionPlan {
    pub fn new(duration_s: f64, rate_cps: f64, seed: u64) -> Result<Self> {
        Self {
            duration_s,
            rate_cps,
            background_cps: 0.0,
            seed,
        }
        .validated()
    }

    /// 30 s per configuration at 700 coincidences per second.
    pub fn reference(seed: u64) -> Self {
        Self {
            duration_s: 30.0,
            rate_cps: 700.0,
            background_cps: 0.0,
            seed,
        }
    }

    pub fn with_background(mut self, background_cps: f64) -> Result<Self> {
        self.background_cps = background_cps;
        self.validated()
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::OutOfRange {
                name: "duration",
                value: self.duration_s,
                range: "(0, ∞)",
            });
        }
        check_range("rate", self.rate_cps, 0.0, f64::MAX, "[0, ∞)")?;
        check_range("background", self.background_cps, 0.0, f64::MAX, "[0, ∞)")?;
        Ok(self)
    }

    /// `(x, y₁, y₂, s)` in acquisition order.
    pub fn configurations() -> impl Iterator<Item = (SettingBits, Outcome)> {
        SettingBits::all().flat_map(|s| Outcome::ALL.into_iter().map(move |o| (s, o)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub epsilon: f64,
    pub phi0: f64,
    pub visibility: f64,
    pub p_y1: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub counts: CountTable<u64>,
    pub meta: RecordMeta,
}

impl CountRecord {
    pub fn count(&self, s: SettingBits, port: Outcome, a: Outcome, b2: Outcome) -> u64 {
        self.counts[s.x.index()][s.y1.index()][s.y2.index()][port.index()][a.index()][b2.index()]
    }

    pub fn configuration_total(&self, s: SettingBits, port: Outcome) -> u64 {
        self.counts[s.x.index()][s.y1.index()][s.y2.index()][port.index()]
            .iter()
            .flatten()
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().flatten().flatten().flatten().sum()
    }

    pub fn as_f64(&self) -> CountTable<f64> {
        let mut t = [[[[[[0.0; 2]; 2]; 2]; 2]; 2]; 2];
        for (s, port) in AcquisitionPlan::configurations() {
            for a in Outcome::ALL {
                for b2 in Outcome::ALL {
                    t[s.x.index()][s.y1.index()][s.y2.index()][port.index()][a.index()][b2.index()] =
                        self.count(s, port, a, b2) as f64;
                }
            }
        }
        t
    }
}

fn meta(plan: &AcquisitionPlan, cfg: &WeakConfig) -> RecordMeta {
    RecordMeta {
        epsilon: cfg.epsilon,
        phi0: cfg.phi0,
        visibility: cfg.visibility,
        p_y1: cfg.p_y1,
        seed: plan.seed,
    }
}

fn cell_means(plan: &AcquisitionPlan, dist: &TripleDistribution) -> CountTable<f64> {
    let mut t = [[[[[[0.0; 2]; 2]; 2]; 2]; 2]; 2];
    let signal = 2.0 * plan.rate_cps * plan.duration_s;
    let accidental = plan.background_cps * plan.duration_s / 4.0;
    for (s, port) in AcquisitionPlan::configurations() {
        for a in Outcome::ALL {
            for b2 in Outcome::ALL {
                t[s.x.index()][s.y1.index()][s.y2.index()][port.index()][a.index()][b2.index()] =
                    signal * dist.p(s, a, port, b2) + accidental;
            }
        }
    }
    t
}

/// Mean count of every cell.
pub fn expected_counts(plan: &AcquisitionPlan, cfg: &WeakConfig) -> Result<CountTable<f64>> {
    let plan = plan.validated()?;
    Ok(cell_means(&plan, &distribution_triple(cfg)?))
}

/// Record whose counts are the rounded expectations.
pub fn rounded_expected_record(plan: &AcquisitionPlan, cfg: &WeakConfig) -> Result<CountRecord> {
    let means = expected_counts(plan, cfg)?;
    let mut counts = [[[[[[0u64; 2]; 2]; 2]; 2]; 2]; 2];
    for (s, port) in AcquisitionPlan::configurations() {
        for a in 0..2 {
            for b2 in 0..2 {
                let (x, y1, y2, p) = (s.x.index(), s.y1.index(), s.y2.index(), port.index());
                counts[x][y1][y2][p][a][b2] = means[x][y1][y2][p][a][b2].round() as u64;
            }
        }
    }
    Ok(CountRecord {
        counts,
        meta: meta(plan, cfg),
    })
}

fn draw_cells<R: Rng>(rng: &mut R, means: &[[f64; 2]; 2]) -> [[u64; 2]; 2] {
    let flat = [means[0][0], means[0][1], means[1][0], means[1][1]];
    let total_mean: f64 = flat.iter().sum();
    let mut out = [[0u64; 2]; 2];
    if total_mean <= 0.0 {
        return out;
    }
    let mut remaining = Poisson::new(total_mean).expect("positive finite mean").sample(rng) as u64;
    let mut mass = total_mean;
    for (k, &m) in flat.iter().enumerate() {
        let n = if k == 3 || mass <= 0.0 {
            remaining
        } else {
            let p = (m / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, p).expect("p in [0, 1]").sample(rng)
        };
        out[k / 2][k % 2] = n;
        remaining -= n;
        mass -= m;
    }
    out
}

/// Poisson acquisition of all 16 configurations, reproducible from `plan.seed`.
pub fn simulate_counts(plan: &AcquisitionPlan, cfg: &WeakConfig) -> Result<CountRecord> {
    simulate_with(&plan.validated()?, cfg, &distribution_triple(cfg)?)
}

fn simulate_with(plan: &AcquisitionPlan, cfg: &WeakConfig, dist: &TripleDistribution) -> Result<CountRecord> {
    let means = cell_means(plan, dist);
    let mut rng = ChaCha20Rng::seed_from_u64(plan.seed);
    let mut counts = [[[[[[0u64; 2]; 2]; 2]; 2]; 2]; 2];
    for (s, port) in AcquisitionPlan::configurations() {
        let (x, y1, y2, p) = (s.x.index(), s.y1.index(), s.y2.index(), port.index());
        counts[x][y1][y2][p] = draw_cells(&mut rng, &means[x][y1][y2][p]);
    }
    Ok(CountRecord {
        counts,
        meta: meta(plan, cfg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub value: f64,
    pub std_error: f64,
    pub which: Pair,
}

impl ChshEstimate {
    /// Violation of the classical bound in standard errors.
    pub fn sigma_above_classical(&self) -> f64 {
        (self.value - 2.0) / self.std_error
    }
}

/// Plug-in correlator of one setting block with its delta-method variance.
fn block_correlator(block: &[[[f64; 2]; 2]; 2], which: Pair) -> Option<(f64, f64)> {
    let mut total = 0.0;
    let mut signed = 0.0;
    // [port=b1][a][b2]
    let sign = |b1: usize, a: usize, b2: usize| -> f64 {
        let b = if which == Pair::AB1 { b1 } else { b2 };
        Outcome::from_index(a).sign() * Outcome::from_index(b).sign()
    };
    for b1 in 0..2 {
        for a in 0..2 {
            for b2 in 0..2 {
                let n = block[b1][a][b2];
                total += n;
                signed += sign(b1, a, b2) * n;
            }
        }
    }
    if total <= 0.0 {
        return None;
    }
    let e = signed / total;
    let mut var = 0.0;
    for b1 in 0..2 {
        for a in 0..2 {
            for b2 in 0..2 {
                var += (sign(b1, a, b2) - e).powi(2) * block[b1][a][b2];
            }
        }
    }
    Some((e, var / (total * total)))
}

/// CHSH estimate from a (possibly non-integer) count table.
///
/// The A–B1 correlators average the two `y₂` blocks evenly; the A–B2
/// correlators weight the `y₁` blocks by `1 − p_y1` and `p_y1`.
pub fn estimate_from_table(counts: &CountTable<f64>, which: Pair, p_y1: f64) -> Result<ChshEstimate> {
    let mut value = 0.0;
    let mut var = 0.0;
    for s in SettingBits::all() {
        let (x, y1, y2) = (s.x.index(), s.y1.index(), s.y2.index());
        let Some((e, v)) = block_correlator(&counts[x][y1][y2], which) else {
            return Err(Error::EmptyConfiguration(format!("x={x}, y1={y1}, y2={y2}")));
        };
        let (y, w) = match which {
            Pair::AB1 => (s.y1, 0.5),
            Pair::AB2 => (s.y2, if s.y1 == Bit::One { p_y1 } else { 1.0 - p_y1 }),
        };
        let sign = if s.x == Bit::One && y == Bit::One { -1.0 } else { 1.0 };
        value += sign * w * e;
        var += w * w * v;
    }
    Ok(ChshEstimate {
        value,
        std_error: var.sqrt(),
        which,
    })
}

pub fn estimate_chsh(rec: &CountRecord, which: Pair) -> Result<ChshEstimate> {
    estimate_from_table(&rec.as_f64(), which, rec.meta.p_y1)
}

/// `(Î₁, Î₂)` from one record.
pub fn estimate_both(rec: &CountRecord) -> Result<(ChshEstimate, ChshEstimate)> {
    Ok((estimate_chsh(rec, Pair::AB1)?, estimate_chsh(rec, Pair::AB2)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub ab1: ChshEstimate,
    pub ab2: ChshEstimate,
}

/// Seed of trial `k` in a campaign seeded with `seed`.
pub fn trial_seed(seed: u64, k: usize) -> u64 {
    seed ^ k as u64
}

/// `n` independent acquisitions seeded `plan.seed ⊕ k`.
pub fn run_trials(n: usize, plan: &AcquisitionPlan, cfg: &WeakConfig) -> Result<Vec<TrialResult>> {
    if n == 0 {
        return Err(Error::Usage("at least one trial is required".into()));
    }
    let plan = plan.validated()?;
    let dist = distribution_triple(cfg)?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let seed = trial_seed(plan.seed, k);
        let rec = simulate_with(&plan.with_seed(seed), cfg, &dist)?;
        let (ab1, ab2) = estimate_both(&rec)?;
        out.push(TrialResult {
            trial: k,
            seed,
            ab1,
            ab2,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub spread: f64,
    /// Standard error of the mean, `spread / √n`.
    pub mean_error: f64,
    /// Mean of the per-trial propagated errors.
    pub mean_std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub n: usize,
    pub ab1: SeriesStats,
    pub ab2: SeriesStats,
    /// Trials in which both estimates exceed the classical bound.
    pub double_violations: usize,
}

fn series(values: impl Iterator<Item = (f64, f64)> + Clone) -> SeriesStats {
    let n = values.clone().count() as f64;
    let mean = values.clone().map(|v| v.0).sum::<f64>() / n;
    let spread = if n > 1.0 {
        (values.clone().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    SeriesStats {
        mean,
        spread,
        mean_error: spread / n.sqrt(),
        mean_std_error: values.map(|v| v.1).sum::<f64>() / n,
    }
}

pub fn summarize(trials: &[TrialResult]) -> Result<TrialSummary> {
    if trials.is_empty() {
        return Err(Error::Usage("no trials to summarize".into()));
    }
    Ok(TrialSummary {
        n: trials.len(),
        ab1: series(trials.iter().map(|t| (t.ab1.value, t.ab1.std_error))),
        ab2: series(trials.iter().map(|t| (t.ab2.value, t.ab2.std_error))),
        double_violations: trials
            .iter()
            .filter(|t| t.ab1.value > 2.0 && t.ab2.value > 2.0)
            .count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequential_chsh::{closed_form_i1, closed_form_i2};
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn zero_rate_gives_no_counts() {
        let plan = AcquisitionPlan::new(30.0, 0.0, 1).unwrap();
        let rec = simulate_counts(&plan, &WeakConfig::new(1.0).unwrap()).unwrap();
        assert_eq!(rec.total(), 0);
        assert!(matches!(estimate_chsh(&rec, Pair::AB1), Err(Error::EmptyConfiguration(_))));
    }

    #[test]
    fn no_minus_port_at_zero_strength() {
        let rec = simulate_counts(&AcquisitionPlan::reference(4), &WeakConfig::new(0.0).unwrap()).unwrap();
        for s in SettingBits::all() {
            assert_eq!(rec.configuration_total(s, Outcome::Minus), 0);
            assert!(rec.configuration_total(s, Outcome::Plus) > 0);
        }
    }

    #[test]
    fn expected_counts_reproduce_closed_forms() {
        let cfg = WeakConfig::new(FRAC_PI_2).unwrap();
        let t = expected_counts(&AcquisitionPlan::reference(0), &cfg).unwrap();
        let e = estimate_from_table(&t, Pair::AB1, 0.5).unwrap();
        assert!((e.value - 2.0 * SQRT_2).abs() < 1e-12);
        let cfg = WeakConfig::new(1.049).unwrap();
        let t = expected_counts(&AcquisitionPlan::reference(0), &cfg).unwrap();
        assert!((estimate_from_table(&t, Pair::AB1, 0.5).unwrap().value - closed_form_i1(1.049, 0.0)).abs() < 1e-12);
        assert!((estimate_from_table(&t, Pair::AB2, 0.5).unwrap().value - closed_form_i2(1.049)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = WeakConfig::new(0.8).unwrap();
        let plan = AcquisitionPlan::reference(77);
        assert_eq!(simulate_counts(&plan, &cfg).unwrap(), simulate_counts(&plan, &cfg).unwrap());
        assert_ne!(
            simulate_counts(&plan, &cfg).unwrap(),
            simulate_counts(&plan.with_seed(78), &cfg).unwrap()
        );
    }

    #[test]
    fn trial_endpoints() {
        let t = run_trials(1, &AcquisitionPlan::reference(3), &WeakConfig::new(0.0).unwrap()).unwrap();
        assert!((t[0].ab2.value - 2.0 * SQRT_2).abs() < 0.03);
        assert!(t[0].ab1.value.abs() < 0.03);
        assert!(run_trials(0, &AcquisitionPlan::reference(3), &WeakConfig::default()).is_err());
    }

    #[test]
    fn background_adds_counts() {
        let cfg = WeakConfig::new(1.0).unwrap();
        let plan = AcquisitionPlan::new(30.0, 0.0, 2).unwrap().with_background(40.0).unwrap();
        let t = expected_counts(&plan, &cfg).unwrap();
        assert!((t[0][0][0][0][0][0] - 300.0).abs() < 1e-9);
        let e = estimate_from_table(&t, Pair::AB1, 0.5).unwrap();
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn summary_statistics() {
        let t = run_trials(4, &AcquisitionPlan::reference(10), &WeakConfig::new(1.049).unwrap()).unwrap();
        let s = summarize(&t).unwrap();
        assert_eq!(s.n, 4);
        assert!((s.ab1.mean - t.iter().map(|r| r.ab1.value).sum::<f64>() / 4.0).abs() < 1e-15);
        assert!(s.ab1.mean_error > 0.0);
        assert_eq!(t[2].seed, 10 ^ 2);
    }
}
