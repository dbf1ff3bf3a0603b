//! Ideal model of the three-observer sequential Bell test.
//!
//! Alice measures one half of a singlet strongly. Bob1 couples the other
//! half to a path ancilla prepared in `|+⟩` through a controlled-phase gate
//! of angle ε and reads the ancilla; Bob2 then measures the same photon
//! strongly. Every probability here is computed with density operators from
//! [`crate::qcore`]: Alice's projection gives the conditional state
//! `ρ_{a|x}`, Bob1's coupling turns it into the system–ancilla state
//! `ρ_{a|xy₁}`, and both Bobs' statistics are traces against it.
//!
//! Conventions:
//! * Bob1's rotation for `y₁ = 1` is the Hadamard `(σz + σx)/√2`.
//! * Bob1 outcome `+` is output port 2, whose ancilla state at port phase φ
//!   is `cos(φ/2)|+⟩ + i sin(φ/2)|−⟩`; outcome `−` is the same port at
//!   phase φ + π. φ = 0 recovers the `{|+⟩, |−⟩}` readout.
//! * Source noise is Werner mixing `v|Ψ⁻⟩⟨Ψ⁻| + (1−v)𝟙/4`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::qcore::{
    apply, c, evolve, expectation, partial_trace, CMatrix, ComplexState, DensityOperator,
    Operator, Tensor, C64, I, TOL, ZERO,
};

pub const CLASSICAL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// One binary setting choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const ALL: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            _ => Err(Error::OutOfRange {
                name: "setting bit",
                value: i as f64,
                range: "{0, 1}",
            }),
        }
    }
}

/// Dichotomic measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SettingBits {
    pub x: Bit,
    pub y1: Bit,
    pub y2: Bit,
}

impl SettingBits {
    pub fn new(x: Bit, y1: Bit, y2: Bit) -> Self {
        Self { x, y1, y2 }
    }

    /// All eight `(x, y₁, y₂)` combinations in lexicographic order.
    pub fn all() -> impl Iterator<Item = SettingBits> {
        Bit::ALL.into_iter().flat_map(|x| {
            Bit::ALL
                .into_iter()
                .flat_map(move |y1| Bit::ALL.into_iter().map(move |y2| SettingBits { x, y1, y2 }))
        })
    }
}

/// Which observer pair a CHSH value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    AB1,
    AB2,
}

impl std::fmt::Display for Pair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pair::AB1 => "AB1",
            Pair::AB2 => "AB2",
        })
    }
}

/// Dial settings of the weak measurement and source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakConfig {
    pub epsilon: f64,
    pub phi0: f64,
    pub p_y1: f64,
    pub visibility: f64,
}

impl Default for WeakConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            phi0: 0.0,
            p_y1: 0.5,
            visibility: 1.0,
        }
    }
}

impl WeakConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self {
            epsilon,
            ..Self::default()
        }
        .validated()
    }

    pub fn with_phi0(mut self, phi0: f64) -> Result<Self> {
        self.phi0 = phi0;
        self.validated()
    }

    pub fn with_visibility(mut self, visibility: f64) -> Result<Self> {
        self.visibility = visibility;
        self.validated()
    }

    pub fn with_p_y1(mut self, p_y1: f64) -> Result<Self> {
        self.p_y1 = p_y1;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        check_range("epsilon", self.epsilon, 0.0, FRAC_PI_2 + 1e-12, "[0, π/2]")?;
        check_range("phi0", self.phi0, -PI - 1e-12, PI + 1e-12, "[-π, π]")?;
        check_range("p_y1", self.p_y1, 0.0, 1.0, "[0, 1]")?;
        check_range("visibility", self.visibility, 0.0, 1.0, "[0, 1]")?;
        Ok(self)
    }

    pub fn p_y1_of(&self, y1: Bit) -> f64 {
        match y1 {
            Bit::Zero => 1.0 - self.p_y1,
            Bit::One => self.p_y1,
        }
    }
}

/// Orthonormal pair `{|+⟩, |−⟩}` of single-qubit states.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    states: [ComplexState; 2],
}

impl MeasurementBasis {
    /// Basis whose `+` state has Bloch vector `(sin t, 0, cos t)`.
    pub fn xz_plane(t: f64) -> Self {
        let (s, co) = (t / 2.0).sin_cos();
        Self {
            states: [
                ComplexState::qubit(c(co, 0.0), c(s, 0.0)),
                ComplexState::qubit(c(-s, 0.0), c(co, 0.0)),
            ],
        }
    }

    pub fn state(&self, o: Outcome) -> &ComplexState {
        &self.states[o.index()]
    }

    pub fn projector(&self, o: Outcome) -> Operator {
        Operator::projector_onto(self.state(o)).expect("basis states are normalized")
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        self.states[0].bloch_vector().expect("single qubit")
    }
}

/// Alice's strong-measurement basis: Bloch direction `−(Z+X)/√2` for x = 0
/// and `(X−Z)/√2` for x = 1.
pub fn alice_basis(x: Bit) -> MeasurementBasis {
    match x {
        Bit::Zero => MeasurementBasis::xz_plane(-3.0 * PI / 4.0),
        Bit::One => MeasurementBasis::xz_plane(3.0 * PI / 4.0),
    }
}

/// Z (y = 0) or X (y = 1) basis, shared by Bob1 and Bob2.
pub fn bob_basis(y: Bit) -> MeasurementBasis {
    match y {
        Bit::Zero => MeasurementBasis::xz_plane(0.0),
        Bit::One => MeasurementBasis::xz_plane(FRAC_PI_2),
    }
}

/// Prefactor applied to `σz + σx` when building Bob1's `y₁ = 1` rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationScale {
    /// `1/√2`: the Hadamard, a genuine rotation.
    Unitary,
    /// `1/2`, as the rotation is commonly printed; not unitary.
    Half,
}

pub fn bob_rotation_matrix(y1: Bit, scale: RotationScale) -> CMatrix {
    match y1 {
        Bit::Zero => CMatrix::identity(2, 2),
        Bit::One => {
            let k = match scale {
                RotationScale::Unitary => FRAC_1_SQRT_2,
                RotationScale::Half => 0.5,
            };
            (Operator::pauli_z().matrix() + Operator::pauli_x().matrix()) * c(k, 0.0)
        }
    }
}

/// Bob1's basis rotation `R_{y₁}` with `R_{y₁}|ω_{y₁}⟩ = |H⟩`.
pub fn bob_rotation(y1: Bit) -> Operator {
    Operator::unitary(bob_rotation_matrix(y1, RotationScale::Unitary)).expect("Hadamard is unitary")
}

/// `CP_ε = |H⟩⟨H| ⊗ 𝟙 + |V⟩⟨V| ⊗ e^{iεσz}` on system ⊗ ancilla.
pub fn controlled_phase(epsilon: f64) -> Operator {
    let mut m = CMatrix::identity(4, 4);
    m[(2, 2)] = C64::from_polar(1.0, epsilon);
    m[(3, 3)] = C64::from_polar(1.0, -epsilon);
    Operator::with_dims(m, crate::qcore::OperatorKind::Unitary, vec![2, 2])
        .expect("diagonal phases are unitary")
}

/// `(R† ⊗ 𝟙) · CP_ε · (R ⊗ 𝟙)`: Bob1's full coupling for setting `y₁`.
pub fn weak_unitary(y1: Bit, epsilon: f64) -> Operator {
    let r = bob_rotation(y1).tensor(&Operator::identity(2));
    r.adjoint()
        .compose(&controlled_phase(epsilon))
        .and_then(|m| m.compose(&r))
        .expect("4x4 operators")
}

/// Weak measurement of a single photon: returns the system ⊗ ancilla state.
pub fn weak_channel(input: &ComplexState, y1: Bit, cfg: &WeakConfig) -> Result<ComplexState> {
    if input.dims() != [2] {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: input.len(),
        });
    }
    if !input.is_normalized(TOL) {
        return Err(Error::NotNormalized(input.norm()));
    }
    let joint = input.tensor(&ComplexState::plus());
    apply(&weak_unitary(y1, cfg.epsilon), &joint, &[0, 1])
}

/// `α|ω⟩|+⟩ + β|ω⊥⟩(cos ε|+⟩ + i sin ε|−⟩)` written out directly.
pub fn weak_channel_closed_form(input: &ComplexState, y1: Bit, epsilon: f64) -> Result<ComplexState> {
    let basis = bob_basis(y1);
    let omega = basis.state(Outcome::Plus);
    let omega_perp = basis.state(Outcome::Minus);
    let alpha = omega.inner(input)?;
    let beta = omega_perp.inner(input)?;
    let plus = ComplexState::plus();
    let kicked = ComplexState::new(
        plus.amplitudes()
            .iter()
            .zip(ComplexState::minus().amplitudes())
            .map(|(p, m)| p * epsilon.cos() + I * m * epsilon.sin())
            .collect(),
        vec![2],
    )?;
    let a = omega.tensor(&plus).scaled(alpha);
    let b = omega_perp.tensor(&kicked).scaled(beta);
    ComplexState::new(
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| x + y)
            .collect(),
        vec![2, 2],
    )
}

/// Ancilla state read out at output port 2 when the port phase is `phi`.
pub fn port_ancilla_state(phi: f64) -> ComplexState {
    let (s, co) = (phi / 2.0).sin_cos();
    let plus = ComplexState::plus();
    let minus = ComplexState::minus();
    ComplexState::qubit(
        plus.amplitude(0) * co + I * minus.amplitude(0) * s,
        plus.amplitude(1) * co + I * minus.amplitude(1) * s,
    )
}

/// Bob1's ancilla projector for outcome `b1` at port phase offset `phi0`.
pub fn bob1_projector(b1: Outcome, phi0: f64) -> Operator {
    let phi = match b1 {
        Outcome::Plus => phi0,
        Outcome::Minus => phi0 + PI,
    };
    Operator::projector_onto(&port_ancilla_state(phi)).expect("unit vector")
}

/// Werner-mixed singlet `v|Ψ⁻⟩⟨Ψ⁻| + (1−v)𝟙/4`.
pub fn singlet(visibility: f64) -> Result<DensityOperator> {
    check_range("visibility", visibility, 0.0, 1.0, "[0, 1]")?;
    let pure = singlet_state().density();
    let mixed = DensityOperator::maximally_mixed(&[2, 2])?;
    DensityOperator::mix(visibility, &pure, &mixed)
}

/// `(|HV⟩ − |VH⟩)/√2`.
pub fn singlet_state() -> ComplexState {
    let s = FRAC_1_SQRT_2;
    ComplexState::new(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO], vec![2, 2])
        .expect("4 amplitudes over two qubits")
}

/// 2×2 probability table indexed `[a][b]`.
pub type OutcomeTable = [[f64; 2]; 2];

/// Probabilities `p(a, b | x, y)` for one observer pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    /// Indexed `[x][y][a][b]`.
    table: [[OutcomeTable; 2]; 2],
}

impl JointDistribution {
    pub fn new(table: [[OutcomeTable; 2]; 2]) -> Result<Self> {
        let d = Self { table };
        d.check_normalized(1e-12)?;
        Ok(d)
    }

    /// Wrap without validation; [`chsh`] still checks normalization.
    pub fn from_table_unchecked(table: [[OutcomeTable; 2]; 2]) -> Self {
        Self { table }
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        for x in 0..2 {
            for y in 0..2 {
                let t = &self.table[x][y];
                let sum: f64 = t.iter().flatten().sum();
                if (sum - 1.0).abs() > tol || t.iter().flatten().any(|&p| p < -tol) {
                    return Err(Error::UnnormalizedDistribution { x, y, sum });
                }
            }
        }
        Ok(())
    }

    pub fn p(&self, x: Bit, y: Bit, a: Outcome, b: Outcome) -> f64 {
        self.table[x.index()][y.index()][a.index()][b.index()]
    }

    pub fn setting(&self, x: Bit, y: Bit) -> &OutcomeTable {
        &self.table[x.index()][y.index()]
    }

    pub fn table(&self) -> &[[OutcomeTable; 2]; 2] {
        &self.table
    }

    /// `p(a=b) − p(a≠b)` for one setting pair.
    pub fn correlator(&self, x: Bit, y: Bit) -> f64 {
        let t = self.setting(x, y);
        t[0][0] + t[1][1] - t[0][1] - t[1][0]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.table
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .zip(other.table.iter().flatten().flatten().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `p(a, b₁, b₂ | x, y₁, y₂)` for the full three-observer experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleDistribution {
    /// Indexed `[x][y1][y2][a][b1][b2]`.
    table: [[[[[[f64; 2]; 2]; 2]; 2]; 2]; 2],
}

impl TripleDistribution {
    pub fn p(&self, s: SettingBits, a: Outcome, b1: Outcome, b2: Outcome) -> f64 {
        self.table[s.x.index()][s.y1.index()][s.y2.index()][a.index()][b1.index()][b2.index()]
    }

    pub fn setting(&self, s: SettingBits) -> &[[[f64; 2]; 2]; 2] {
        &self.table[s.x.index()][s.y1.index()][s.y2.index()]
    }

    pub(crate) fn set_setting(&mut self, s: SettingBits, t: [[[f64; 2]; 2]; 2]) {
        self.table[s.x.index()][s.y1.index()][s.y2.index()] = t;
    }

    pub(crate) fn zeros() -> Self {
        Self {
            table: [[[[[[0.0; 2]; 2]; 2]; 2]; 2]; 2],
        }
    }

    /// A–B1 marginal; `y₂` does not influence Bob1, so it is averaged evenly.
    pub fn ab1(&self) -> JointDistribution {
        let mut table = [[[[0.0; 2]; 2]; 2]; 2];
        for s in SettingBits::all() {
            let t = self.setting(s);
            for a in 0..2 {
                for b1 in 0..2 {
                    table[s.x.index()][s.y1.index()][a][b1] += 0.5 * (t[a][b1][0] + t[a][b1][1]);
                }
            }
        }
        JointDistribution { table }
    }

    /// A–B2 marginal, weighting Bob1's choice by `p(y₁ = 1) = p_y1`.
    pub fn ab2(&self, p_y1: f64) -> JointDistribution {
        let mut table = [[[[0.0; 2]; 2]; 2]; 2];
        for s in SettingBits::all() {
            let w = match s.y1 {
                Bit::Zero => 1.0 - p_y1,
                Bit::One => p_y1,
            };
            let t = self.setting(s);
            for a in 0..2 {
                for b2 in 0..2 {
                    table[s.x.index()][s.y2.index()][a][b2] += w * (t[a][0][b2] + t[a][1][b2]);
                }
            }
        }
        JointDistribution { table }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.table
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .flatten()
            .flatten()
            .zip(other.table.iter().flatten().flatten().flatten().flatten().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshValue {
    pub value: f64,
    pub which: Pair,
}

/// Alice's conditional state on the Bobs' side, `ρ_{a|x}`, and `p(a|x)`.
pub fn alice_conditional(rho: &DensityOperator, x: Bit, a: Outcome) -> Result<(DensityOperator, f64)> {
    let p = alice_basis(x).projector(a);
    let full = p.embed(rho.dims(), &[0])?;
    let projected = DensityOperator::from_unnormalized(rho.sandwich(&full), rho.dims().to_vec())?;
    let (joint, prob) = projected;
    Ok((partial_trace(&joint, &[1])?, prob))
}

/// `ρ_{a|xy₁}`: Bob1's system ⊗ ancilla after the weak coupling.
pub fn post_weak_state(rho_b: &DensityOperator, y1: Bit, epsilon: f64) -> Result<DensityOperator> {
    let joint = rho_b.tensor(&ComplexState::plus().density());
    evolve(&weak_unitary(y1, epsilon), &joint, &[0, 1])
}

/// Operator-level model of the experiment for one configuration.
struct Model {
    cfg: WeakConfig,
    /// `[x][a] -> (ρ_{a|x}, p(a|x))`
    conditionals: Vec<Vec<(DensityOperator, f64)>>,
}

impl Model {
    fn new(cfg: &WeakConfig) -> Result<Self> {
        let cfg = cfg.validated()?;
        let rho = singlet(cfg.visibility)?;
        let conditionals = Bit::ALL
            .iter()
            .map(|&x| {
                Outcome::ALL
                    .iter()
                    .map(|&a| alice_conditional(&rho, x, a))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cfg, conditionals })
    }

    fn weak_state(&self, x: Bit, a: Outcome, y1: Bit) -> Result<(DensityOperator, f64)> {
        let (rho_b, pa) = &self.conditionals[x.index()][a.index()];
        Ok((post_weak_state(rho_b, y1, self.cfg.epsilon)?, *pa))
    }

    fn prob_b1(&self, x: Bit, y1: Bit) -> Result<OutcomeTable> {
        let mut t = [[0.0; 2]; 2];
        for a in Outcome::ALL {
            let (rho, pa) = self.weak_state(x, a, y1)?;
            for b1 in Outcome::ALL {
                let op = Operator::identity(2).tensor(&bob1_projector(b1, self.cfg.phi0));
                t[a.index()][b1.index()] = expectation(&op, &rho)? * pa;
            }
        }
        Ok(t)
    }

    fn prob_b2_given_y1(&self, x: Bit, y1: Bit, y2: Bit) -> Result<OutcomeTable> {
        let mut t = [[0.0; 2]; 2];
        let basis = bob_basis(y2);
        for a in Outcome::ALL {
            let (rho, pa) = self.weak_state(x, a, y1)?;
            for b2 in Outcome::ALL {
                let op = basis.projector(b2).tensor(&Operator::identity(2));
                t[a.index()][b2.index()] = expectation(&op, &rho)? * pa;
            }
        }
        Ok(t)
    }

    fn prob_b2(&self, x: Bit, y2: Bit) -> Result<OutcomeTable> {
        let mut t = [[0.0; 2]; 2];
        for y1 in Bit::ALL {
            let w = self.cfg.p_y1_of(y1);
            let part = self.prob_b2_given_y1(x, y1, y2)?;
            for a in 0..2 {
                for b in 0..2 {
                    t[a][b] += w * part[a][b];
                }
            }
        }
        Ok(t)
    }

    fn prob_triple(&self, s: SettingBits) -> Result<[[[f64; 2]; 2]; 2]> {
        let mut t = [[[0.0; 2]; 2]; 2];
        let basis = bob_basis(s.y2);
        for a in Outcome::ALL {
            let (rho, pa) = self.weak_state(s.x, a, s.y1)?;
            for b1 in Outcome::ALL {
                for b2 in Outcome::ALL {
                    let op = basis.projector(b2).tensor(&bob1_projector(b1, self.cfg.phi0));
                    t[a.index()][b1.index()][b2.index()] = expectation(&op, &rho)? * pa;
                }
            }
        }
        Ok(t)
    }
}

/// `p(a, b₁ | x, y₁)` indexed `[a][b₁]`.
pub fn joint_prob_b1(x: Bit, y1: Bit, cfg: &WeakConfig) -> Result<OutcomeTable> {
    Model::new(cfg)?.prob_b1(x, y1)
}

/// `p(a, b₂ | x, y₂)` indexed `[a][b₂]`, averaged over Bob1's choice.
pub fn joint_prob_b2(x: Bit, y2: Bit, cfg: &WeakConfig) -> Result<OutcomeTable> {
    Model::new(cfg)?.prob_b2(x, y2)
}

/// `p(a, b₂ | x, y₁, y₂)`: Bob2's statistics for a fixed Bob1 choice.
pub fn joint_prob_b2_given_y1(x: Bit, y1: Bit, y2: Bit, cfg: &WeakConfig) -> Result<OutcomeTable> {
    Model::new(cfg)?.prob_b2_given_y1(x, y1, y2)
}

pub fn distribution_ab1(cfg: &WeakConfig) -> Result<JointDistribution> {
    let model = Model::new(cfg)?;
    let mut table = [[[[0.0; 2]; 2]; 2]; 2];
    for x in Bit::ALL {
        for y in Bit::ALL {
            table[x.index()][y.index()] = model.prob_b1(x, y)?;
        }
    }
    JointDistribution::new(table)
}

pub fn distribution_ab2(cfg: &WeakConfig) -> Result<JointDistribution> {
    let model = Model::new(cfg)?;
    let mut table = [[[[0.0; 2]; 2]; 2]; 2];
    for x in Bit::ALL {
        for y in Bit::ALL {
            table[x.index()][y.index()] = model.prob_b2(x, y)?;
        }
    }
    JointDistribution::new(table)
}

/// Full `p(a, b₁, b₂ | x, y₁, y₂)`.
pub fn distribution_triple(cfg: &WeakConfig) -> Result<TripleDistribution> {
    let model = Model::new(cfg)?;
    let mut d = TripleDistribution::zeros();
    for s in SettingBits::all() {
        d.set_setting(s, model.prob_triple(s)?);
    }
    Ok(d)
}

/// `Σ_{x,y} (−1)^{x·y} [p(a=b|x,y) − p(a≠b|x,y)]`.
pub fn chsh(dist: &JointDistribution, which: Pair) -> Result<ChshValue> {
    dist.check_normalized(1e-9)?;
    let mut value = 0.0;
    for x in Bit::ALL {
        for y in Bit::ALL {
            let sign = if x == Bit::One && y == Bit::One { -1.0 } else { 1.0 };
            value += sign * dist.correlator(x, y);
        }
    }
    Ok(ChshValue { value, which })
}

/// Both CHSH values `(I₁, I₂)` from the operator model.
pub fn chsh_pair(cfg: &WeakConfig) -> Result<(f64, f64)> {
    let i1 = chsh(&distribution_ab1(cfg)?, Pair::AB1)?.value;
    let i2 = chsh(&distribution_ab2(cfg)?, Pair::AB2)?.value;
    Ok((i1, i2))
}

/// `√2 [cos φ₀ − cos(φ₀ − 2ε)]`; equals `2√2 sin²ε` at φ₀ = 0.
pub fn closed_form_i1(epsilon: f64, phi0: f64) -> f64 {
    SQRT_2 * (phi0.cos() - (phi0 - 2.0 * epsilon).cos())
}

/// `√2 (1 + cos ε)`.
pub fn closed_form_i2(epsilon: f64) -> f64 {
    SQRT_2 * (1.0 + epsilon.cos())
}

/// `I₁ + I₂` at φ₀ = 0; above 4 inside the double-violation window.
pub fn monogamy_sum(epsilon: f64) -> f64 {
    closed_form_i1(epsilon, 0.0) + closed_form_i2(epsilon)
}

/// Largest change in `p(a, b₂ | x, y₂)` caused by switching Bob1's setting.
pub fn signaling_gap(cfg: &WeakConfig) -> Result<f64> {
    let model = Model::new(cfg)?;
    let mut gap: f64 = 0.0;
    for x in Bit::ALL {
        for y2 in Bit::ALL {
            let t0 = model.prob_b2_given_y1(x, Bit::Zero, y2)?;
            let t1 = model.prob_b2_given_y1(x, Bit::One, y2)?;
            for a in 0..2 {
                for b in 0..2 {
                    gap = gap.max((t0[a][b] - t1[a][b]).abs());
                }
            }
        }
    }
    Ok(gap)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Interval of ε (at φ₀ = 0) where both closed forms exceed the classical
/// bound, located by bisection.
pub fn double_violation_window() -> (f64, f64) {
    let lo = bisect(0.0, FRAC_PI_2, |e| closed_form_i1(e, 0.0) - CLASSICAL_BOUND);
    let hi = bisect(0.0, FRAC_PI_2, |e| closed_form_i2(e) - CLASSICAL_BOUND);
    (lo, hi)
}

pub fn in_double_violation_window(epsilon: f64) -> bool {
    closed_form_i1(epsilon, 0.0) > CLASSICAL_BOUND && closed_form_i2(epsilon) > CLASSICAL_BOUND
}

/// Port phase offset maximizing `I₁` at fixed ε, found numerically.
///
/// Returns `(φ₀*, I₁(ε, φ₀*))`.
pub fn optimal_phi0(epsilon: f64) -> (f64, f64) {
    let f = |p: f64| closed_form_i1(epsilon, p);
    // coarse scan then golden-section refinement around the best node
    let n = 720;
    let step = 2.0 * PI / n as f64;
    let best = (0..=n)
        .map(|k| -PI + k as f64 * step)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("nonempty grid");
    let (mut a, mut b) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c1 = b - g * (b - a);
    let mut c2 = a + g * (b - a);
    while b - a > 1e-12 {
        if f(c1) > f(c2) {
            b = c2;
            c2 = c1;
            c1 = b - g * (b - a);
        } else {
            a = c1;
            c1 = c2;
            c2 = a + g * (b - a);
        }
    }
    let p = 0.5 * (a + b);
    (p, f(p))
}
