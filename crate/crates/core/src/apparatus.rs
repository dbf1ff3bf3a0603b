//! Jones-calculus model of the optical setup.
//!
//! Bob1's controlled-phase gate is a Sagnac loop whose two counter-propagating
//! paths act as the ancilla: a 50/50 beam splitter (factor `i` on
//! reflection) sends the photon clockwise (`|0⟩`, carrying HWP3 and the glass
//! plate phase φ) or anticlockwise (`|1⟩`, carrying HWP4), the same splitter
//! recombines the paths into output ports `|2⟩` and `|3⟩`, and a liquid
//! crystal removes the common retardation `(ε₀+ε₁)/2`. With φ = 0 the loop
//! sends `α|H⟩ + β|V⟩` to `α|H⟩|2⟩ + β|V⟩(cos ε|2⟩ + sin ε|3⟩)`, up to a global
//! phase, where `ε = (ε₁−ε₀)/2`.
//!
//! Only port 2 is monitored. Bob1's `−` outcome is read by tilting the glass
//! plate so that φ advances by π, which swaps the two ports.
//!
//! Polarization index 0 is `|H⟩`; path index 0 is `|0⟩` inside the loop and
//! `|2⟩` at the output. Joint states are ordered polarization ⊗ path.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qcore::{apply, c, CMatrix, ComplexState, Operator, OperatorKind, Tensor, C64, ONE, TOL, ZERO};
use crate::sequential_chsh::{
    singlet_state, Bit, Outcome, SettingBits, TripleDistribution,
};

/// Range of `|θ − θ₀|` where the refraction-free plate model is used.
pub const GLASS_TILT_LIMIT: f64 = 0.5;

/// Half-wave plate with fast axis at `angle` (radians) from horizontal.
pub fn hwp_jones(angle: f64) -> Operator {
    let (s, co) = (2.0 * angle).sin_cos();
    Operator::unitary(CMatrix::from_row_slice(
        2,
        2,
        &[c(co, 0.0), c(s, 0.0), c(s, 0.0), c(-co, 0.0)],
    ))
    .expect("reflection matrices are unitary")
}

/// Retarder adding phase `phase` to `|V⟩` relative to `|H⟩`.
pub fn retarder(phase: f64) -> Operator {
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, C64::from_polar(1.0, phase)]));
    Operator::unitary(m).expect("diagonal phases are unitary")
}

/// Symmetric 50/50 beam splitter acting on a path qubit.
pub fn beam_splitter() -> Operator {
    let s = FRAC_1_SQRT_2;
    Operator::unitary(CMatrix::from_row_slice(
        2,
        2,
        &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)],
    ))
    .expect("beam splitter is unitary")
}

/// Retardations inside Bob1's interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateSettings {
    /// HWP3, clockwise path.
    pub eps0: f64,
    /// HWP4, anticlockwise path.
    pub eps1: f64,
    /// Liquid-crystal retardation after the loop.
    pub lq_phase: f64,
}

impl PlateSettings {
    pub fn new(eps0: f64, eps1: f64, lq_phase: f64) -> Result<Self> {
        check_range("eps0", eps0, -PI, PI, "[-π, π]")?;
        check_range("eps1", eps1, -PI, PI, "[-π, π]")?;
        check_range("lq_phase", lq_phase, -PI, PI, "[-π, π]")?;
        Ok(Self { eps0, eps1, lq_phase })
    }

    /// Plates `ε₀ = −ε`, `ε₁ = +ε` with a compensating liquid crystal.
    pub fn for_epsilon(epsilon: f64) -> Result<Self> {
        check_range("epsilon", epsilon, 0.0, FRAC_PI_2 + 1e-12, "[0, π/2]")?;
        Self::compensated(-epsilon, epsilon)
    }

    /// Given retardations with the liquid crystal set to `−(ε₀+ε₁)/2`.
    pub fn compensated(eps0: f64, eps1: f64) -> Result<Self> {
        Self::new(eps0, eps1, -(eps0 + eps1) / 2.0)
    }

    /// Measurement strength `(ε₁ − ε₀)/2`.
    pub fn epsilon(&self) -> f64 {
        (self.eps1 - self.eps0) / 2.0
    }

    pub fn common_phase(&self) -> f64 {
        (self.eps0 + self.eps1) / 2.0
    }
}

/// Which polarizing-beam-splitter exit is reported as the `+` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PbsPort {
    Transmitted,
    Reflected,
}

impl PbsPort {
    fn polarization(self) -> usize {
        match self {
            PbsPort::Transmitted => 0,
            PbsPort::Reflected => 1,
        }
    }
}

/// Wave-plate angles (degrees) per setting bit, plus Alice's port labeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlateAngles {
    pub hwp1: [f64; 2],
    pub hwp2: [f64; 2],
    pub hwp5: [f64; 2],
    pub hwp6: [f64; 2],
    /// PBS exit mapped to Alice's `+` outcome for x = 0, 1.
    pub alice_plus: [PbsPort; 2],
}

impl Default for WavePlateAngles {
    /// HWP1 at 11.25°/33.75°; HWP2, HWP5 and HWP6 at 0°/22.5°.
    fn default() -> Self {
        Self {
            hwp1: [11.25, 33.75],
            hwp2: [0.0, 22.5],
            hwp5: [0.0, 22.5],
            hwp6: [0.0, 22.5],
            alice_plus: [PbsPort::Reflected, PbsPort::Transmitted],
        }
    }
}

impl WavePlateAngles {
    fn validate(&self) -> Result<()> {
        for y in 0..2 {
            // A half-wave plate is its own inverse, so R† needs the same angle.
            if (self.hwp2[y] - self.hwp5[y]).abs() > 1e-12 {
                return Err(Error::InconsistentPlates(format!(
                    "HWP5 at {}° does not undo HWP2 at {}° for y1={y}",
                    self.hwp5[y], self.hwp2[y]
                )));
            }
        }
        Ok(())
    }
}

/// Tilted thin glass plate in the clockwise path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlassPlate {
    /// `2π d Δn / λ`.
    pub chi: f64,
    pub theta0: f64,
    /// Additive path phase at any tilt.
    pub phase_offset: f64,
    pub theta: f64,
}

impl GlassPlate {
    pub fn new(chi: f64, theta0: f64, phase_offset: f64) -> Self {
        Self {
            chi,
            theta0,
            phase_offset,
            theta: theta0,
        }
    }

    pub fn at(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    /// `χ = 2π d Δn / λ` from thickness, index step and wavelength.
    pub fn chi_from(thickness: f64, delta_n: f64, wavelength: f64) -> f64 {
        2.0 * PI * thickness * delta_n / wavelength
    }

    /// Smallest tilt `θ > θ₀` whose phase is congruent to `target` mod 2π.
    pub fn tilt_for_phase(&self, target: f64) -> Result<f64> {
        let base = self.chi + self.phase_offset;
        let two_pi = 2.0 * PI;
        let mut goal = base + (target - base).rem_euclid(two_pi);
        if goal <= base {
            goal += two_pi;
        }
        let phase_at = |d: f64| self.chi / d.cos() + self.phase_offset;
        let max_d = GLASS_TILT_LIMIT * (1.0 - 1e-9);
        if phase_at(max_d) < goal || self.chi <= 0.0 {
            return Err(Error::InconsistentPlates(format!(
                "glass plate cannot reach phase {target} within the tilt range"
            )));
        }
        let (mut lo, mut hi) = (0.0, max_d);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phase_at(mid) < goal {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        Ok(self.theta0 + 0.5 * (lo + hi))
    }
}

/// `φ(θ) = χ / cos(θ − θ₀) + φ_offset`.
pub fn glass_phase(g: &GlassPlate) -> Result<f64> {
    let d = g.theta - g.theta0;
    if !(d.abs() < GLASS_TILT_LIMIT) {
        return Err(Error::OutOfRange {
            name: "glass tilt |θ-θ0|",
            value: d.abs(),
            range: "[0, 0.5) rad",
        });
    }
    Ok(g.chi / d.cos() + g.phase_offset)
}

/// Where in the interferometer a [`PortState`] was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathBasis {
    /// `|0⟩` clockwise, `|1⟩` anticlockwise.
    Loop,
    /// `|2⟩`, `|3⟩` output ports.
    Output,
}

/// Polarization ⊗ path state of Bob1's photon.
#[derive(Debug, Clone, PartialEq)]
pub struct PortState {
    pub state: ComplexState,
    pub basis: PathBasis,
}

impl PortState {
    /// Polarization amplitudes `(H, V)` on path index `k`.
    pub fn path_amplitudes(&self, k: usize) -> (C64, C64) {
        (self.state.amplitude(k), self.state.amplitude(2 + k))
    }

    pub fn path_probability(&self, k: usize) -> f64 {
        let (h, v) = self.path_amplitudes(k);
        h.norm_sqr() + v.norm_sqr()
    }

    /// Unnormalized single-photon polarization state on path `k`.
    pub fn port(&self, k: usize) -> ComplexState {
        let (h, v) = self.path_amplitudes(k);
        ComplexState::qubit(h, v)
    }
}

/// Path-conditional retardation: clockwise gets `e^{iφ}·diag(1, e^{iε₀})`.
fn loop_phases(plates: &PlateSettings, phi: f64) -> Operator {
    let cw = retarder(plates.eps0).matrix() * C64::from_polar(1.0, phi);
    let ccw = retarder(plates.eps1).matrix().clone();
    let mut m = CMatrix::zeros(4, 4);
    for p in 0..2 {
        for q in 0..2 {
            // index = pol * 2 + path
            m[(2 * p, 2 * q)] = cw[(p, q)];
            m[(2 * p + 1, 2 * q + 1)] = ccw[(p, q)];
        }
    }
    Operator::with_dims(m, OperatorKind::Unitary, vec![2, 2]).expect("block-diagonal unitary")
}

fn check_input(input: &ComplexState) -> Result<()> {
    if input.dims() != [2] {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: input.len(),
        });
    }
    if !input.is_normalized(TOL) {
        return Err(Error::NotNormalized(input.norm()));
    }
    Ok(())
}

/// Entry port of the loop: the path index the beam splitter maps to
/// `(i|0⟩ + |1⟩)/√2`.
fn entry_state() -> ComplexState {
    ComplexState::qubit(ZERO, ONE)
}

/// State after the first beam-splitter pass and the in-loop plates.
pub fn sagnac_midstate(input: &ComplexState, plates: &PlateSettings, phi: f64) -> Result<PortState> {
    check_input(input)?;
    let s = input.tensor(&entry_state());
    let s = apply(&beam_splitter(), &s, &[1])?;
    let s = apply(&loop_phases(plates, phi), &s, &[0, 1])?;
    Ok(PortState {
        state: s,
        basis: PathBasis::Loop,
    })
}

/// Output ports after recombination and liquid-crystal compensation.
pub fn sagnac_output(input: &ComplexState, plates: &PlateSettings, phi: f64) -> Result<PortState> {
    let mid = sagnac_midstate(input, plates, phi)?;
    let s = apply(&beam_splitter(), &mid.state, &[1])?;
    let s = apply(&retarder(plates.lq_phase), &s, &[0])?;
    Ok(PortState {
        state: s,
        basis: PathBasis::Output,
    })
}

/// Fringe parameters for one detector channel:
/// `amplitude·cos²(χ/cos(θ−θ₀) + phase) + background`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeParams {
    pub amplitude: f64,
    pub phase: f64,
    pub background: f64,
}

/// Geometry shared by the H and V fringe of one glass-plate scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGeometry {
    pub chi: f64,
    pub theta0: f64,
}

impl ScanGeometry {
    pub fn argument(&self, theta: f64) -> f64 {
        self.chi / (theta - self.theta0).cos()
    }

    pub fn fringe(&self, p: &FringeParams, theta: f64) -> f64 {
        let u = self.argument(theta) + p.phase;
        p.amplitude * u.cos().powi(2) + p.background
    }
}

/// Detector count rates of Bob2's H and V channels at full transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRates {
    pub intensity_h: f64,
    pub intensity_v: f64,
    pub background_h: f64,
    pub background_v: f64,
}

/// Bob2's Z-basis port-2 counts `(P_H, P_V)` at each glass tilt, computed by
/// propagating `input` through the loop.
pub fn port_count_prediction(
    thetas: &[f64],
    plates: &PlateSettings,
    glass: &GlassPlate,
    input: &ComplexState,
    rates: &ChannelRates,
) -> Result<Vec<(f64, f64)>> {
    check_input(input)?;
    let (ah, av) = (input.amplitude(0).norm_sqr(), input.amplitude(1).norm_sqr());
    thetas
        .iter()
        .map(|&theta| {
            let phi = glass_phase(&glass.at(theta))?;
            let out = sagnac_output(input, plates, phi)?;
            let (h, v) = out.path_amplitudes(0);
            let ph = if ah > 0.0 { h.norm_sqr() / ah } else { 0.0 };
            let pv = if av > 0.0 { v.norm_sqr() / av } else { 0.0 };
            Ok((
                rates.intensity_h * ph + rates.background_h,
                rates.intensity_v * pv + rates.background_v,
            ))
        })
        .collect()
}

/// Fit-form fringe parameters equivalent to a physical glass plate and loop:
/// `χ_fit = χ/2`, `φ_H = φ_offset/2`, `φ_V = φ_H − ε`.
pub fn fringe_model(glass: &GlassPlate, plates: &PlateSettings, rates: &ChannelRates) -> (ScanGeometry, FringeParams, FringeParams) {
    let geometry = ScanGeometry {
        chi: glass.chi / 2.0,
        theta0: glass.theta0,
    };
    let phase_h = glass.phase_offset / 2.0;
    let h = FringeParams {
        amplitude: rates.intensity_h,
        phase: phase_h,
        background: rates.background_h,
    };
    let v = FringeParams {
        amplitude: rates.intensity_v,
        phase: phase_h - plates.epsilon(),
        background: rates.background_v,
    };
    (geometry, h, v)
}

/// Complete optical configuration for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Apparatus {
    pub plates: PlateSettings,
    pub angles: WavePlateAngles,
    pub glass: GlassPlate,
    /// Bob1's port phase offset φ₀; the `−` outcome uses φ₀ + π.
    pub port_phase: f64,
    pub visibility: f64,
}

impl Apparatus {
    /// Reference setup at strength ε with compensated plates and φ₀ = 0.
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        Ok(Self {
            plates: PlateSettings::for_epsilon(epsilon)?,
            angles: WavePlateAngles::default(),
            glass: GlassPlate::new(2371.0, 0.356, 0.0),
            port_phase: 0.0,
            visibility: 1.0,
        })
    }
}

fn deg(a: f64) -> f64 {
    a.to_radians()
}

/// Three-photon-path amplitudes of the optics for one pure two-photon input,
/// returning `p(a, port-2, b2)` for glass phase `phi`.
fn optical_probabilities(
    source: &ComplexState,
    s: SettingBits,
    setup: &Apparatus,
    phi: f64,
) -> Result<[[f64; 2]; 2]> {
    // subsystems: 0 Alice polarization, 1 Bob polarization, 2 loop path
    let st = source.tensor(&entry_state());
    let st = apply(&hwp_jones(deg(setup.angles.hwp1[s.x.index()])), &st, &[0])?;
    let st = apply(&hwp_jones(deg(setup.angles.hwp2[s.y1.index()])), &st, &[1])?;
    let st = apply(&beam_splitter(), &st, &[2])?;
    let st = apply(&loop_phases(&setup.plates, phi), &st, &[1, 2])?;
    let st = apply(&beam_splitter(), &st, &[2])?;
    let st = apply(&retarder(setup.plates.lq_phase), &st, &[1])?;
    let st = apply(&hwp_jones(deg(setup.angles.hwp5[s.y1.index()])), &st, &[1])?;
    let st = apply(&hwp_jones(deg(setup.angles.hwp6[s.y2.index()])), &st, &[1])?;
    let alice_plus = setup.angles.alice_plus[s.x.index()].polarization();
    let mut out = [[0.0; 2]; 2];
    for a in Outcome::ALL {
        let pa = if a == Outcome::Plus { alice_plus } else { 1 - alice_plus };
        for b2 in Outcome::ALL {
            // Bob2's PBS: transmitted (H) is +
            let pb = b2.index();
            // path index 0 at the output is port 2
            out[a.index()][b2.index()] = st.amplitude(pa * 4 + pb * 2).norm_sqr();
        }
    }
    Ok(out)
}

/// `p(a, b₁, b₂)` for one setting triple, from the optics alone.
///
/// Bob1's `+` is a port-2 detection with the glass at φ₀, `−` a port-2
/// detection with the glass at φ₀ + π. The Werner-noise part of the source is
/// propagated as an even mixture of the four product basis states.
pub fn full_apparatus_distribution(s: SettingBits, setup: &Apparatus) -> Result<[[[f64; 2]; 2]; 2]> {
    setup.angles.validate()?;
    check_range("visibility", setup.visibility, 0.0, 1.0, "[0, 1]")?;
    let mut sources = vec![(setup.visibility, singlet_state())];
    if setup.visibility < 1.0 {
        for k in 0..4 {
            sources.push(((1.0 - setup.visibility) / 4.0, ComplexState::basis(&[2, 2], k)?));
        }
    }
    let mut out = [[[0.0; 2]; 2]; 2];
    for b1 in Outcome::ALL {
        let target = match b1 {
            Outcome::Plus => setup.port_phase,
            Outcome::Minus => setup.port_phase + PI,
        };
        let theta = setup.glass.tilt_for_phase(target)?;
        let phi = glass_phase(&setup.glass.at(theta))?;
        for (w, src) in &sources {
            let t = optical_probabilities(src, s, setup, phi)?;
            for a in 0..2 {
                for b2 in 0..2 {
                    out[a][b1.index()][b2] += w * t[a][b2];
                }
            }
        }
    }
    Ok(out)
}

/// [`full_apparatus_distribution`] for all eight setting triples.
pub fn apparatus_distribution(setup: &Apparatus) -> Result<TripleDistribution> {
    let mut d = TripleDistribution::zeros();
    for s in SettingBits::all() {
        d.set_setting(s, full_apparatus_distribution(s, setup)?);
    }
    Ok(d)
}

/// Settings bits for one optical configuration, for readability at call sites.
pub fn settings(x: Bit, y1: Bit, y2: Bit) -> SettingBits {
    SettingBits::new(x, y1, y2)
}
