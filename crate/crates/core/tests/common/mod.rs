//! Reference computations written without the library's linear algebra.
//!
//! Every operator in the sequential experiment is real in the H/V basis, so
//! the oracle works with plain `[[f64; 2]; 2]` matrices. Bob1's weak
//! measurement acts on his photon through the Kraus operator
//! `K = R† diag(⟨φ|+⟩, ⟨φ|e^{iεσz}|+⟩) R`, where the two entries reduce to
//! `cos(φ/2)` and `cos(φ/2 − ε)`.

#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

pub type M2 = [[f64; 2]; 2];

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// `(1 + s n·σ)/2` for a Bloch vector `(n_x, n_z)` in the x–z plane.
pub fn projector(nx: f64, nz: f64, sign: f64) -> M2 {
    [
        [0.5 * (1.0 + sign * nz), 0.5 * sign * nx],
        [0.5 * sign * nx, 0.5 * (1.0 - sign * nz)],
    ]
}

pub fn alice(x: usize, sign: f64) -> M2 {
    let s = FRAC_1_SQRT_2;
    match x {
        0 => projector(-s, -s, sign),
        _ => projector(s, -s, sign),
    }
}

pub fn bob2(y: usize, sign: f64) -> M2 {
    match y {
        0 => projector(0.0, 1.0, sign),
        _ => projector(1.0, 0.0, sign),
    }
}

pub fn rotation(y1: usize) -> M2 {
    let s = FRAC_1_SQRT_2;
    match y1 {
        0 => [[1.0, 0.0], [0.0, 1.0]],
        _ => [[s, s], [s, -s]],
    }
}

pub fn kraus(y1: usize, b1_sign: f64, epsilon: f64, phi0: f64) -> M2 {
    let phi = if b1_sign > 0.0 { phi0 } else { phi0 + std::f64::consts::PI };
    let d = [[(phi / 2.0).cos(), 0.0], [0.0, (phi / 2.0 - epsilon).cos()]];
    let r = rotation(y1);
    mul(&transpose(&r), &mul(&d, &r))
}

/// Singlet amplitudes `(|HV⟩ − |VH⟩)/√2` indexed `[alice][bob]`.
fn singlet() -> M2 {
    [[0.0, FRAC_1_SQRT_2], [-FRAC_1_SQRT_2, 0.0]]
}

/// `⟨ψ| A ⊗ B |ψ⟩` for real ψ given as a 2×2 amplitude table.
fn sandwich(psi: &M2, a: &M2, b: &M2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s += psi[i][j] * a[i][k] * b[j][l] * psi[k][l];
                }
            }
        }
    }
    s
}

fn trace(m: &M2) -> f64 {
    m[0][0] + m[1][1]
}

fn sign(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `p(a, b₁, b₂ | x, y₁, y₂)` for a Werner source of visibility `v`.
pub fn triple(x: usize, y1: usize, y2: usize, a: usize, b1: usize, b2: usize, eps: f64, phi0: f64, v: f64) -> f64 {
    let k = kraus(y1, sign(b1), eps, phi0);
    let bob = mul(&transpose(&k), &mul(&bob2(y2, sign(b2)), &k));
    let pa = alice(x, sign(a));
    v * sandwich(&singlet(), &pa, &bob) + (1.0 - v) / 4.0 * trace(&pa) * trace(&bob)
}

/// `p(a, b₁ | x, y₁)`, Bob2 summed out.
pub fn ab1(x: usize, y1: usize, a: usize, b1: usize, eps: f64, phi0: f64, v: f64) -> f64 {
    (0..2).map(|b2| triple(x, y1, 0, a, b1, b2, eps, phi0, v)).sum()
}

/// `p(a, b₂ | x, y₂)` with Bob1's setting uniform and his outcome summed out.
pub fn ab2(x: usize, y2: usize, a: usize, b2: usize, eps: f64, phi0: f64, v: f64) -> f64 {
    let mut p = 0.0;
    for y1 in 0..2 {
        for b1 in 0..2 {
            p += 0.5 * triple(x, y1, y2, a, b1, b2, eps, phi0, v);
        }
    }
    p
}

pub fn chsh(p: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
    let mut s = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let e: f64 = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| sign(a) * sign(b) * p(x, y, a, b))
                .sum();
            s += if x == 1 && y == 1 { -e } else { e };
        }
    }
    s
}

/// `(I₁, I₂)` from the oracle.
pub fn chsh_pair(eps: f64, phi0: f64, v: f64) -> (f64, f64) {
    (
        chsh(|x, y, a, b| ab1(x, y, a, b, eps, phi0, v)),
        chsh(|x, y, a, b| ab2(x, y, a, b, eps, phi0, v)),
    )
}
