//! Estimating the measurement strength ε from glass-plate angle scans.
//!
//! A scan tilts the glass plate and records Bob2's H and V port-2 counts. Both
//! channels follow `I cos²(χ/cos(θ−θ₀) + φ) + b` with shared geometry
//! `(χ, θ₀)`, and `ε = φ_H − φ_V`.
//!
//! Phases are only defined modulo π. Reported phases lie in `[0, π)` and ε
//! in `(−π/2, π/2]`; a negative fitted amplitude is folded back through
//! `I cos²(u) = −I sin²(u) + I`, i.e. `φ → φ + π/2`, `b → b + I`, `I → −I`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    port_count_prediction, ChannelRates, FringeParams, GlassPlate, PlateSettings, ScanGeometry,
};
use crate::error::{Error, Result};
use crate::qcore::ComplexState;

pub const MIN_SCAN_POINTS: usize = 8;
const N_PARAMS: usize = 8;
const PHASE_STARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub theta: f64,
    /// Counts are real-valued so that noiseless expectations can be stored.
    pub counts_h: f64,
    pub counts_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanData {
    pub points: Vec<ScanPoint>,
    pub duration_per_point: f64,
}

impl ScanData {
    pub fn new(points: Vec<ScanPoint>, duration_per_point: f64) -> Result<Self> {
        let s = Self {
            points,
            duration_per_point,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < MIN_SCAN_POINTS {
            return Err(Error::TooFewPoints {
                needed: MIN_SCAN_POINTS,
                got: self.points.len(),
            });
        }
        if !(self.duration_per_point.is_finite() && self.duration_per_point >= 0.0) {
            return Err(Error::InvalidScan(format!(
                "duration {} is not a nonnegative number",
                self.duration_per_point
            )));
        }
        for p in &self.points {
            if !p.theta.is_finite() {
                return Err(Error::InvalidScan("non-finite tilt angle".into()));
            }
            for n in [p.counts_h, p.counts_v] {
                if !(n.is_finite() && n >= 0.0) {
                    return Err(Error::InvalidScan(format!(
                        "count {n} at θ={} is not a nonnegative number",
                        p.theta
                    )));
                }
            }
        }
        let mut t: Vec<f64> = self.points.iter().map(|p| p.theta).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidScan("tilt angles are not distinct".into()));
        }
        Ok(())
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }

    pub fn theta_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.theta), hi.max(p.theta))
            })
    }
}

/// Header of the scan file format.
pub const SCAN_HEADER: [&str; 4] = ["theta", "counts_h", "counts_v", "duration_s"];

/// Reads `theta,counts_h,counts_v[,duration_s]` rows; `#` starts a comment.
pub fn read_scan(path: &Path) -> Result<ScanData> {
    let f = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scan(BufReader::new(f), path)
}

/// [`read_scan`] over any reader; `origin` labels errors.
pub fn parse_scan<R: Read>(reader: R, origin: &Path) -> Result<ScanData> {
    let perr = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    let names: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    if names.len() < 3 || names.len() > 4 || names.iter().zip(SCAN_HEADER).any(|(a, b)| a != b) {
        return Err(perr(
            1,
            format!("expected header {}, found {}", SCAN_HEADER.join(","), names.join(",")),
        ));
    }
    let with_duration = names.len() == 4;
    let mut points = Vec::new();
    let mut duration: Option<f64> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            perr(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() {
            return Err(perr(
                line,
                format!("expected {} fields, found {}", names.len(), rec.len()),
            ));
        }
        let field = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| perr(line, format!("{}: cannot parse {:?} as a number", SCAN_HEADER[i], &rec[i])))
        };
        let p = ScanPoint {
            theta: field(0)?,
            counts_h: field(1)?,
            counts_v: field(2)?,
        };
        if !p.theta.is_finite() || !(p.counts_h >= 0.0) || !(p.counts_v >= 0.0) {
            return Err(perr(line, "counts must be nonnegative and θ finite".into()));
        }
        if with_duration {
            let d = field(3)?;
            match duration {
                Some(prev) if prev != d => {
                    return Err(perr(line, format!("duration {d} differs from {prev}")))
                }
                _ => duration = Some(d),
            }
        }
        points.push(p);
    }
    ScanData::new(points, duration.unwrap_or(1.0)).map_err(|e| perr(0, e.to_string()))
}

pub fn write_scan<W: Write>(data: &ScanData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "<scan output>".into(),
        source: e.into(),
    };
    w.write_record(SCAN_HEADER).map_err(io)?;
    for p in &data.points {
        w.write_record([
            p.theta.to_string(),
            p.counts_h.to_string(),
            p.counts_v.to_string(),
            data.duration_per_point.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<scan output>".into(),
        source,
    })
}

/// Physical parameters from which a synthetic scan is generated.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub plates: PlateSettings,
    pub glass: GlassPlate,
    pub input: ComplexState,
    /// Count rates per second.
    pub rates: ChannelRates,
}

impl SyntheticTruth {
    /// Plate and rates whose fringes are
    /// `8600 sin²(1185.5/cos(θ−0.356) + 2.45) + 98` and
    /// `11000 sin²(1185.5/cos(θ−0.356) + 1.40) + 68` at one second per point.
    pub fn reference() -> Self {
        Self::with_phases(1185.5, 0.356, 2.45 - FRAC_PI_2, 2.45 - 1.40)
    }

    /// Truth whose cos²-form fit parameters are `χ`, `θ₀`, `φ_H` and `φ_V = φ_H − ε`,
    /// with the reference rates.
    pub fn with_phases(chi: f64, theta0: f64, phase_h: f64, epsilon: f64) -> Self {
        Self {
            plates: PlateSettings::for_epsilon(epsilon).expect("ε in [0, π/2]"),
            glass: GlassPlate::new(2.0 * chi, theta0, 2.0 * phase_h),
            input: ComplexState::plus(),
            rates: ChannelRates {
                intensity_h: 8600.0,
                intensity_v: 11000.0,
                background_h: 98.0,
                background_v: 68.0,
            },
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.plates.epsilon()
    }
}

/// Tilt angles and dwell time of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDesign {
    pub thetas: Vec<f64>,
    pub duration_per_point: f64,
}

impl ScanDesign {
    /// `n` evenly spaced tilts over `[lo, hi]`.
    pub fn linear(lo: f64, hi: f64, n: usize, duration_per_point: f64) -> Self {
        let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
        Self {
            thetas: (0..n).map(|k| lo + step * k as f64).collect(),
            duration_per_point,
        }
    }

    /// 21 tilts over θ₀ ± 0.1 rad around θ₀ = 0.356, one second each.
    pub fn reference() -> Self {
        Self::linear(0.256, 0.456, 21, 1.0)
    }
}

/// Scan whose counts are the exact expectations.
pub fn expected_scan(truth: &SyntheticTruth, design: &ScanDesign) -> Result<ScanData> {
    let pred = port_count_prediction(&design.thetas, &truth.plates, &truth.glass, &truth.input, &truth.rates)?;
    let d = design.duration_per_point;
    let points = design
        .thetas
        .iter()
        .zip(pred)
        .map(|(&theta, (h, v))| ScanPoint {
            theta,
            counts_h: h * d,
            counts_v: v * d,
        })
        .collect();
    ScanData::new(points, d)
}

/// Poisson-distributed scan around [`expected_scan`], reproducible from `seed`.
pub fn generate_synthetic_scan(truth: &SyntheticTruth, design: &ScanDesign, seed: u64) -> Result<ScanData> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut scan = expected_scan(truth, design)?;
    let mut draw = |mean: f64| -> f64 {
        if mean > 0.0 {
            Poisson::new(mean).expect("positive finite mean").sample(&mut rng)
        } else {
            0.0
        }
    };
    for p in &mut scan.points {
        p.counts_h = draw(p.counts_h);
        p.counts_v = draw(p.counts_v);
    }
    Ok(scan)
}

/// Optional starting point for [`fit_scan`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitInit {
    pub chi: f64,
    pub theta0: f64,
    pub phase_h: Option<f64>,
    pub phase_v: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// χ search range when no initial geometry is given.
    pub chi_range: (f64, f64),
    /// θ₀ search range; `None` uses the scan's tilt range.
    pub theta0_range: Option<(f64, f64)>,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            chi_range: (50.0, 3000.0),
            theta0_range: None,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFit {
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub phase: f64,
    pub phase_err: f64,
    pub background: f64,
    pub background_err: f64,
}

impl ChannelFit {
    pub fn params(&self) -> FringeParams {
        FringeParams {
            amplitude: self.amplitude,
            phase: self.phase,
            background: self.background,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub chi: f64,
    pub chi_err: f64,
    pub theta0: f64,
    pub theta0_err: f64,
    pub h: ChannelFit,
    pub v: ChannelFit,
    pub epsilon: f64,
    pub epsilon_err: f64,
    /// Weighted residual sum of squares.
    pub chi_square: f64,
    pub dof: usize,
    pub iterations: usize,
}

impl FitResult {
    pub fn geometry(&self) -> ScanGeometry {
        ScanGeometry {
            chi: self.chi,
            theta0: self.theta0,
        }
    }

    pub fn reduced_chi_square(&self) -> f64 {
        self.chi_square / self.dof.max(1) as f64
    }

    /// `(θ, counts_h − model_h, counts_v − model_v)` per point.
    pub fn residuals(&self, data: &ScanData) -> Vec<(f64, f64, f64)> {
        let g = self.geometry();
        data.points
            .iter()
            .map(|p| {
                (
                    p.theta,
                    p.counts_h - g.fringe(&self.h.params(), p.theta),
                    p.counts_v - g.fringe(&self.v.params(), p.theta),
                )
            })
            .collect()
    }
}

/// Weighted observations flattened as H rows followed by V rows.
struct Problem {
    theta: Vec<f64>,
    y: [Vec<f64>; 2],
    inv_sigma: [Vec<f64>; 2],
}

impl Problem {
    fn new(data: &ScanData) -> Self {
        let y_h: Vec<f64> = data.points.iter().map(|p| p.counts_h).collect();
        let y_v: Vec<f64> = data.points.iter().map(|p| p.counts_v).collect();
        let w = |y: &[f64]| y.iter().map(|&n| 1.0 / n.max(1.0).sqrt()).collect();
        Self {
            theta: data.thetas(),
            inv_sigma: [w(&y_h), w(&y_v)],
            y: [y_h, y_v],
        }
    }

    fn n(&self) -> usize {
        self.theta.len()
    }

    /// Weighted residuals `(y − f)/σ` and their Jacobian.
    fn evaluate(&self, p: &[f64; N_PARAMS], jac: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let n = self.n();
        let mut r = DVector::zeros(2 * n);
        let mut j = jac.then(|| DMatrix::zeros(2 * n, N_PARAMS));
        let (chi, theta0) = (p[0], p[1]);
        for i in 0..n {
            let d = self.theta[i] - theta0;
            let sec = 1.0 / d.cos();
            let u0 = chi * sec;
            for ch in 0..2 {
                let base = 2 + 3 * ch;
                let (amp, phase, bg) = (p[base], p[base + 1], p[base + 2]);
                let u = u0 + phase;
                let c2 = u.cos().powi(2);
                let f = amp * c2 + bg;
                let row = ch * n + i;
                let w = self.inv_sigma[ch][i];
                r[row] = (self.y[ch][i] - f) * w;
                if let Some(j) = j.as_mut() {
                    let dfdu = -amp * (2.0 * u).sin();
                    j[(row, 0)] = -w * dfdu * sec;
                    j[(row, 1)] = w * dfdu * chi * sec * d.tan();
                    j[(row, base)] = -w * c2;
                    j[(row, base + 1)] = -w * dfdu;
                    j[(row, base + 2)] = -w;
                }
            }
        }
        (r, j)
    }

    /// Weighted linear fit `c0 + c1 cos 2u + c2 sin 2u` per channel at fixed geometry.
    /// Returns the summed cost and `(amplitude, phase, background)` per channel.
    fn profile(&self, chi: f64, theta0: f64) -> (f64, [(f64, f64, f64); 2]) {
        let cs: Vec<(f64, f64)> = self
            .theta
            .iter()
            .map(|t| (2.0 * chi / (t - theta0).cos()).sin_cos())
            .collect();
        self.linear_fit(&cs)
    }

    /// [`Problem::profile`] given `(sin 2u, cos 2u)` per point.
    fn linear_fit(&self, sc: &[(f64, f64)]) -> (f64, [(f64, f64, f64); 2]) {
        let mut total = 0.0;
        let mut out = [(0.0, 0.0, 0.0); 2];
        for ch in 0..2 {
            let [mut s1, mut sc_, mut ss, mut scc, mut scs, mut sss] = [0.0; 6];
            let [mut by, mut bc, mut bs, mut yy] = [0.0; 4];
            for (i, &(s, c)) in sc.iter().enumerate() {
                let w2 = self.inv_sigma[ch][i].powi(2);
                let y = self.y[ch][i];
                s1 += w2;
                sc_ += w2 * c;
                ss += w2 * s;
                scc += w2 * c * c;
                scs += w2 * c * s;
                sss += w2 * s * s;
                by += w2 * y;
                bc += w2 * y * c;
                bs += w2 * y * s;
                yy += w2 * y * y;
            }
            let a = Matrix3::new(s1, sc_, ss, sc_, scc, scs, ss, scs, sss);
            let b = Vector3::new(by, bc, bs);
            let Some(inv) = a.try_inverse() else {
                return (f64::INFINITY, out);
            };
            let c = inv * b;
            total += (yy - c.dot(&b)).max(0.0);
            // c1 cos 2u + c2 sin 2u = (I/2) cos(2u + 2φ)
            let amp = 2.0 * (c[1] * c[1] + c[2] * c[2]).sqrt();
            let phase = 0.5 * (-c[2]).atan2(c[1]);
            out[ch] = (amp, phase, c[0] - amp / 2.0);
        }
        (total, out)
    }
}

struct LmOutcome {
    params: [f64; N_PARAMS],
    cost: f64,
    iterations: usize,
}

fn levenberg_marquardt(prob: &Problem, start: [f64; N_PARAMS], max_iter: usize) -> Option<LmOutcome> {
    let mut p = start;
    let (mut r, mut j) = prob.evaluate(&p, true);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for it in 1..=max_iter {
        let jm = j.take().expect("jacobian requested");
        let jtj = jm.transpose() * &jm;
        let g = jm.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for k in 0..N_PARAMS {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut trial = p;
            for k in 0..N_PARAMS {
                trial[k] += step[k];
            }
            let (r_new, _) = prob.evaluate(&trial, false);
            let c_new = r_new.norm_squared();
            if c_new.is_finite() && c_new <= cost {
                let rel = (cost - c_new) / cost.max(f64::MIN_POSITIVE);
                let tiny_step = step
                    .iter()
                    .zip(&trial)
                    .all(|(s, x)| s.abs() <= 1e-14 * x.abs().max(1e-8));
                p = trial;
                cost = c_new;
                lambda = (lambda / 10.0).max(1e-12);
                if rel < 1e-10 || tiny_step || cost == 0.0 {
                    return Some(LmOutcome {
                        params: p,
                        cost,
                        iterations: it,
                    });
                }
                let (rr, jj) = prob.evaluate(&p, true);
                r = rr;
                j = jj;
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at any damping: stationary point
            return Some(LmOutcome {
                params: p,
                cost,
                iterations: it,
            });
        }
    }
    None
}

fn wrap_pi(x: f64) -> f64 {
    x.rem_euclid(PI)
}

/// Reduces to `(−π/2, π/2]`.
fn wrap_half(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

fn canonicalize(p: &mut [f64; N_PARAMS]) {
    for base in [2, 5] {
        if p[base] < 0.0 {
            p[base + 2] += p[base];
            p[base] = -p[base];
            p[base + 1] += FRAC_PI_2;
        }
        p[base + 1] = wrap_pi(p[base + 1]);
    }
}

fn initial_geometry(prob: &Problem, data: &ScanData, opts: &FitOptions) -> Result<(f64, f64)> {
    let (lo, hi) = opts.theta0_range.unwrap_or_else(|| data.theta_range());
    let (chi_lo, chi_hi) = opts.chi_range;
    if !(chi_lo > 0.0 && chi_hi > chi_lo && hi >= lo) {
        return Err(Error::InvalidScan("empty χ or θ₀ search range".into()));
    }
    let (t_lo, t_hi) = data.theta_range();
    // θ₀ step bounds the phase error at the scan edge by 0.5 rad for χ = chi_hi
    let max_tan = (t_hi - lo).abs().max((hi - t_lo).abs()).min(1.4).tan();
    let d_theta = (0.5 / (chi_hi * max_tan.max(1e-6))).max((hi - lo) / 4000.0).max(1e-9);
    let n_theta = (((hi - lo) / d_theta).ceil() as usize).max(1);
    let mut best = (f64::INFINITY, chi_lo, lo);
    let mut sc = vec![(0.0, 0.0); prob.n()];
    for k in 0..=n_theta {
        let theta0 = lo + (hi - lo) * k as f64 / n_theta as f64;
        let secs: Vec<f64> = prob.theta.iter().map(|t| 1.0 / (t - theta0).cos()).collect();
        let span = secs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - secs.iter().cloned().fold(f64::INFINITY, f64::min);
        // χ step bounds the phase error across the scan by 0.25 rad
        let d_chi = (0.25 / span.max(1e-12)).max((chi_hi - chi_lo) / 20000.0);
        let rot: Vec<(f64, f64)> = secs.iter().map(|s| (2.0 * d_chi * s).sin_cos()).collect();
        let mut step = 0usize;
        let mut chi = chi_lo;
        while chi <= chi_hi {
            if step % 64 == 0 {
                for (v, s) in sc.iter_mut().zip(&secs) {
                    *v = (2.0 * chi * s).sin_cos();
                }
            }
            let (c, _) = prob.linear_fit(&sc);
            if c < best.0 {
                best = (c, chi, theta0);
            }
            for (v, r) in sc.iter_mut().zip(&rot) {
                let (s, co) = *v;
                *v = (s * r.1 + co * r.0, co * r.1 - s * r.0);
            }
            step += 1;
            chi = chi_lo + d_chi * step as f64;
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NonConvergence("no usable starting geometry".into()));
    }
    Ok((best.1, best.2))
}

/// Joint damped least-squares fit of both channels with shared `(χ, θ₀)`.
pub fn fit_scan(data: &ScanData, init: Option<FitInit>) -> Result<FitResult> {
    fit_scan_with(data, init, &FitOptions::default())
}

pub fn fit_scan_with(data: &ScanData, init: Option<FitInit>, opts: &FitOptions) -> Result<FitResult> {
    data.validate()?;
    let prob = Problem::new(data);
    let (chi, theta0) = match init {
        Some(i) => (i.chi, i.theta0),
        None => initial_geometry(&prob, data, opts)?,
    };
    let (_, lin) = prob.profile(chi, theta0);
    let base = |ph: f64, pv: f64| -> [f64; N_PARAMS] {
        [chi, theta0, lin[0].0, ph, lin[0].2, lin[1].0, pv, lin[1].2]
    };
    let mut starts = Vec::with_capacity(PHASE_STARTS * PHASE_STARTS + 1);
    let (ph0, pv0) = match init {
        Some(FitInit {
            phase_h: Some(h),
            phase_v: Some(v),
            ..
        }) => (h, v),
        _ => (lin[0].1, lin[1].1),
    };
    starts.push(base(ph0, pv0));
    for a in 0..PHASE_STARTS {
        for b in 0..PHASE_STARTS {
            let step = PI / PHASE_STARTS as f64;
            starts.push(base(ph0 + a as f64 * step, pv0 + b as f64 * step));
        }
    }
    let mut best: Option<LmOutcome> = None;
    for s in starts {
        if let Some(out) = levenberg_marquardt(&prob, s, opts.max_iter) {
            if best.as_ref().is_none_or(|b| out.cost < b.cost) {
                best = Some(out);
            }
        }
    }
    let Some(best) = best else {
        return Err(Error::NonConvergence(format!(
            "no start converged within {} iterations",
            opts.max_iter
        )));
    };
    let mut p = best.params;
    canonicalize(&mut p);
    let (_, j) = prob.evaluate(&p, true);
    let j = j.expect("jacobian requested");
    let jtj = j.transpose() * &j;
    let cov = invert_covariance(&jtj)?;
    let err = |k: usize| cov[(k, k)].sqrt();
    let eps_var = cov[(3, 3)] + cov[(6, 6)] - 2.0 * cov[(3, 6)];
    if !(eps_var > 0.0) {
        return Err(Error::RankDeficient(format!("ε variance {eps_var}")));
    }
    let channel = |b: usize| ChannelFit {
        amplitude: p[b],
        amplitude_err: err(b),
        phase: p[b + 1],
        phase_err: err(b + 1),
        background: p[b + 2],
        background_err: err(b + 2),
    };
    Ok(FitResult {
        chi: p[0],
        chi_err: err(0),
        theta0: p[1],
        theta0_err: err(1),
        h: channel(2),
        v: channel(5),
        epsilon: wrap_half(p[3] - p[6]),
        epsilon_err: eps_var.sqrt(),
        chi_square: best.cost,
        dof: 2 * prob.n() - N_PARAMS,
        iterations: best.iterations,
    })
}

fn invert_covariance(jtj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = jtj.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= max * 1e-15 {
        return Err(Error::RankDeficient(format!(
            "normal-matrix eigenvalues span [{min:e}, {max:e}]"
        )));
    }
    jtj.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::RankDeficient("normal matrix is not positive definite".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub timestamp: f64,
    pub epsilon: f64,
    pub epsilon_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySeries {
    pub estimates: Vec<StabilityPoint>,
    pub mean: f64,
    /// Root-mean-square deviation about the mean, used as the per-measurement error.
    pub rms: f64,
}

pub fn stability(estimates: Vec<StabilityPoint>) -> Result<StabilitySeries> {
    if estimates.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: estimates.len(),
        });
    }
    let n = estimates.len() as f64;
    let mean = estimates.iter().map(|e| e.epsilon).sum::<f64>() / n;
    let rms = (estimates.iter().map(|e| (e.epsilon - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(StabilitySeries { estimates, mean, rms })
}

/// [`stability`] over fits taken at consecutive integer timestamps.
pub fn stability_of_fits(fits: &[FitResult]) -> Result<StabilitySeries> {
    stability(
        fits.iter()
            .enumerate()
            .map(|(k, f)| StabilityPoint {
                timestamp: k as f64,
                epsilon: f.epsilon,
                epsilon_err: f.epsilon_err,
            })
            .collect(),
    )
}

/// Gaussian stand-in for a long run of ε estimates, one per hour fraction.
pub fn synthetic_stability_series(mean: f64, sigma: f64, n: usize, seed: u64) -> Result<Vec<StabilityPoint>> {
    let normal = Normal::new(mean, sigma).map_err(|e| Error::InvalidScan(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|k| StabilityPoint {
            timestamp: k as f64 * 13.0 / n.max(1) as f64,
            epsilon: normal.sample(&mut rng),
            epsilon_err: sigma,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_reference_recovery() {
        let scan = expected_scan(&SyntheticTruth::reference(), &ScanDesign::reference()).unwrap();
        let fit = fit_scan(&scan, None).unwrap();
        assert!((fit.epsilon - 1.05).abs() < 1e-6, "{fit:?}");
        assert!((fit.chi - 1185.5).abs() < 1e-6 * 1185.5);
        assert!((fit.theta0 - 0.356).abs() < 1e-6);
        assert!((fit.h.amplitude - 8600.0).abs() < 1e-6 * 8600.0);
        assert!((fit.v.background - 68.0).abs() < 1e-4);
        assert!(fit.epsilon_err > 0.0);
    }

    #[test]
    fn identical_channels_give_zero() {
        let truth = SyntheticTruth::with_phases(1185.5, 0.356, 0.9, 0.0);
        let scan = generate_synthetic_scan(&truth, &ScanDesign::reference(), 3).unwrap();
        let fit = fit_scan(&scan, None).unwrap();
        assert!(fit.epsilon.abs() < 4.0 * fit.epsilon_err, "{fit:?}");
    }

    #[test]
    fn stability_arithmetic() {
        let pts = |v: &[f64]| {
            v.iter()
                .map(|&e| StabilityPoint {
                    timestamp: 0.0,
                    epsilon: e,
                    epsilon_err: 0.0,
                })
                .collect::<Vec<_>>()
        };
        let s = stability(pts(&[0.0, 0.01])).unwrap();
        assert!((s.mean - 0.005).abs() < 1e-15 && (s.rms - 0.005).abs() < 1e-15);
        assert_eq!(stability(pts(&[0.3; 5])).unwrap().rms, 0.0);
        assert!(stability(pts(&[0.3])).is_err());
    }

    #[test]
    fn zero_duration_and_determinism() {
        let truth = SyntheticTruth::reference();
        let mut d = ScanDesign::reference();
        d.duration_per_point = 0.0;
        let z = generate_synthetic_scan(&truth, &d, 1).unwrap();
        assert!(z.points.iter().all(|p| p.counts_h == 0.0 && p.counts_v == 0.0));
        let a = generate_synthetic_scan(&truth, &ScanDesign::reference(), 9).unwrap();
        let b = generate_synthetic_scan(&truth, &ScanDesign::reference(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scan_csv_round_trip_and_errors() {
        let scan = generate_synthetic_scan(&SyntheticTruth::reference(), &ScanDesign::reference(), 5).unwrap();
        let mut buf = Vec::new();
        write_scan(&scan, &mut buf).unwrap();
        let back = parse_scan(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, scan);
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("0.9,abc,3,1\n");
        match parse_scan(text.as_bytes(), Path::new("mem")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 23),
            other => panic!("{other:?}"),
        }
        assert!(parse_scan("a,b,c\n".as_bytes(), Path::new("mem")).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        let d = ScanDesign::linear(0.3, 0.4, 5, 1.0);
        assert!(matches!(
            expected_scan(&SyntheticTruth::reference(), &d),
            Err(Error::TooFewPoints { .. })
        ));
    }
}
