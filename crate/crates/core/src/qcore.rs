//! Dense complex linear algebra for small quantum systems.
//!
//! States live on a labeled tensor-product space: every [`ComplexState`],
//! [`Operator`] and [`DensityOperator`] carries the list of subsystem
//! dimensions, and tensor indices are big-endian in argument order, so
//! `|H⟩ ⊗ |V⟩` sits at index 1 of the ordering `HH, HV, VH, VV`.
//!
//! Matrices are backed by `nalgebra::DMatrix<Complex64>`; nothing here is
//! sparse because the largest space used by the simulator is 8-dimensional.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default numerical tolerance for structural checks.
pub const TOL: f64 = 1e-12;

/// Eigenvalue floor accepted for density operators.
pub const PSD_TOL: f64 = 1e-10;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const ONE: C64 = c(1.0, 0.0);
pub const ZERO: C64 = c(0.0, 0.0);
pub const I: C64 = c(0.0, 1.0);

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: d,
        });
    }
    let p = product(dims);
    if p != len {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: len,
        });
    }
    Ok(())
}

/// Big-endian digits of `index` over `dims`.
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn compose_index(digits: &[usize], dims: &[usize], which: &[usize]) -> usize {
    which.iter().fold(0, |acc, &k| acc * dims[k] + digits[k])
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

fn validate_targets(targets: &[usize], count: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= count {
            return Err(Error::InvalidSubsystem { index: t, count });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateSubsystem(t));
        }
    }
    Ok(())
}

/// A pure state: amplitude vector over a labeled tensor-product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl ComplexState {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        Ok(Self { amplitudes, dims })
    }

    /// Single qubit `alpha |H⟩ + beta |V⟩` (not normalized).
    pub fn qubit(alpha: C64, beta: C64) -> Self {
        Self {
            amplitudes: vec![alpha, beta],
            dims: vec![2],
        }
    }

    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let n = product(dims);
        check_dims(dims, n)?;
        if index >= n {
            return Err(Error::InvalidSubsystem { index, count: n });
        }
        let mut amplitudes = vec![ZERO; n];
        amplitudes[index] = ONE;
        Ok(Self {
            amplitudes,
            dims: dims.to_vec(),
        })
    }

    pub fn h() -> Self {
        Self::qubit(ONE, ZERO)
    }

    pub fn v() -> Self {
        Self::qubit(ZERO, ONE)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::qubit(c(s, 0.0), c(s, 0.0))
    }

    /// `(|0⟩ − |1⟩)/√2`.
    pub fn minus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::qubit(c(s, 0.0), c(-s, 0.0))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized(n));
        }
        for z in &mut self.amplitudes {
            *z /= n;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scaled(&self, k: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * k).collect(),
            dims: self.dims.clone(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Equality modulo one global phase, tested as `|⟨a|b⟩| = ‖a‖‖b‖`.
    ///
    /// The norms must agree as well, so unnormalized vectors compare by
    /// magnitude too.
    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if self.dims != other.dims {
            return false;
        }
        let (na, nb) = (self.norm(), other.norm());
        if (na - nb).abs() > tol {
            return false;
        }
        match self.inner(other) {
            Ok(ov) => (ov.norm() - na * nb).abs() <= tol,
            Err(_) => false,
        }
    }

    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        let v = self.to_vector();
        DensityOperator {
            matrix: &v * v.adjoint(),
            dims: self.dims.clone(),
        }
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a normalized single qubit.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dims != [2] {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.len(),
            });
        }
        let (a, b) = (self.amplitudes[0], self.amplitudes[1]);
        let ab = a.conj() * b;
        Ok([2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()])
    }
}

/// What an [`Operator`] is known to be; checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Projector,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    kind: OperatorKind,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(matrix: CMatrix, kind: OperatorKind) -> Result<Self> {
        let n = matrix.nrows();
        Self::with_dims(matrix, kind, vec![n])
    }

    pub fn with_dims(matrix: CMatrix, kind: OperatorKind, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_dims(&dims, matrix.nrows())?;
        let op = Self { matrix, kind, dims };
        match kind {
            OperatorKind::Unitary => {
                let dev = op.unitarity_defect();
                if dev > TOL {
                    return Err(Error::NotUnitary(dev));
                }
            }
            OperatorKind::Projector => {
                let dev = op.projector_defect();
                if dev > TOL {
                    return Err(Error::NotProjector(dev));
                }
            }
            OperatorKind::Generic => {}
        }
        Ok(op)
    }

    pub fn unitary(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, OperatorKind::Unitary)
    }

    pub fn projector(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, OperatorKind::Projector)
    }

    pub fn generic(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, OperatorKind::Generic)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
            kind: OperatorKind::Unitary,
            dims: vec![n],
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            matrix: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            kind: OperatorKind::Unitary,
            dims: vec![2],
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            matrix: CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            kind: OperatorKind::Unitary,
            dims: vec![2],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            matrix: CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
            kind: OperatorKind::Unitary,
            dims: vec![2],
        }
    }

    /// Rank-one projector `|s⟩⟨s|`; the state must be normalized.
    pub fn projector_onto(state: &ComplexState) -> Result<Self> {
        if !state.is_normalized(TOL) {
            return Err(Error::NotNormalized(state.norm()));
        }
        let v = state.to_vector();
        Self::with_dims(
            &v * v.adjoint(),
            OperatorKind::Projector,
            state.dims().to_vec(),
        )
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            kind: self.kind,
            dims: self.dims.clone(),
        }
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            _ => OperatorKind::Generic,
        };
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            kind,
            dims: self.dims.clone(),
        })
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs_diff(&(self.matrix.adjoint() * &self.matrix), &CMatrix::identity(n, n))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn projector_defect(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        max_abs_diff(&sq, &self.matrix).max(self.hermiticity_defect())
    }

    /// Lift the operator onto the full space `dims`, acting on `targets`
    /// (in the operator's own factor order) and as identity elsewhere.
    pub fn embed(&self, dims: &[usize], targets: &[usize]) -> Result<CMatrix> {
        validate_targets(targets, dims.len())?;
        let target_dim: usize = targets.iter().map(|&t| dims[t]).product();
        if target_dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: target_dim,
                found: self.dim(),
            });
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
        let n = product(dims);
        let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if rest.iter().all(|&k| all[i][k] == all[j][k]) {
                    let si = compose_index(&all[i], dims, targets);
                    let sj = compose_index(&all[j], dims, targets);
                    out[(i, j)] = self.matrix[(si, sj)];
                }
            }
        }
        Ok(out)
    }
}

/// Mixed state `ρ` over a labeled tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validated constructor: Hermitian, unit trace, eigenvalues ≥ −1e-10.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity("matrix is not square".into()));
        }
        check_dims(&dims, matrix.nrows())?;
        let rho = Self { matrix, dims };
        rho.validate(TOL)?;
        Ok(rho)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let n = product(dims);
        check_dims(dims, n)?;
        Ok(Self {
            matrix: CMatrix::identity(n, n) / c(n as f64, 0.0),
            dims: dims.to_vec(),
        })
    }

    /// `w·a + (1−w)·b`.
    pub fn mix(w: f64, a: &Self, b: &Self) -> Result<Self> {
        if a.dims != b.dims {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(Self {
            matrix: &a.matrix * c(w, 0.0) + &b.matrix * c(1.0 - w, 0.0),
            dims: a.dims.clone(),
        })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = max_abs_diff(&self.matrix, &self.matrix.adjoint());
        if herm > tol {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// `P ρ P` restricted to no renormalization; used for conditional states.
    pub fn sandwich(&self, op: &CMatrix) -> CMatrix {
        op * &self.matrix * op.adjoint()
    }

    /// Re-wrap an unnormalized positive matrix, dividing by its trace.
    pub fn from_unnormalized(matrix: CMatrix, dims: Vec<usize>) -> Result<(Self, f64)> {
        let tr = matrix.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let rho = Self::new(matrix / c(tr, 0.0), dims)?;
        Ok((rho, tr))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

/// Kronecker product that concatenates subsystem labels.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for ComplexState {
    fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.len() * other.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amplitudes, dims }
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            (OperatorKind::Projector, OperatorKind::Projector) => OperatorKind::Projector,
            _ => OperatorKind::Generic,
        };
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            kind,
            dims,
        }
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            dims,
        }
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Apply `op` to the `targets` subsystems of `s`, identity elsewhere.
pub fn apply(op: &Operator, s: &ComplexState, targets: &[usize]) -> Result<ComplexState> {
    let full = op.embed(s.dims(), targets)?;
    let out = full * s.to_vector();
    Ok(ComplexState {
        amplitudes: out.iter().copied().collect(),
        dims: s.dims.clone(),
    })
}

/// `ρ ↦ U ρ U†` with `op` acting on `targets`.
pub fn evolve(op: &Operator, rho: &DensityOperator, targets: &[usize]) -> Result<DensityOperator> {
    let full = op.embed(rho.dims(), targets)?;
    Ok(DensityOperator {
        matrix: rho.sandwich(&full),
        dims: rho.dims.clone(),
    })
}

/// Trace out every subsystem not listed in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = rho.dims();
    validate_targets(keep, dims.len())?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let out_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let m = product(&out_dims);
    let n = rho.dim();
    let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let mut out = CMatrix::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            if traced.iter().all(|&k| all[i][k] == all[j][k]) {
                let ki = compose_index(&all[i], dims, &keep);
                let kj = compose_index(&all[j], dims, &keep);
                out[(ki, kj)] += rho.matrix[(i, j)];
            }
        }
    }
    Ok(DensityOperator {
        matrix: out,
        dims: out_dims,
    })
}

/// `Tr[op · ρ]` for Hermitian `op`.
pub fn expectation(op: &Operator, rho: &DensityOperator) -> Result<f64> {
    if op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.dim(),
        });
    }
    let herm = op.hermiticity_defect();
    if herm > TOL {
        return Err(Error::NotHermitian(herm));
    }
    let value = (op.matrix() * rho.matrix()).trace();
    if value.im.abs() > 1e-10 {
        return Err(Error::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}
