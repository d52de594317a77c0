//! Spin-1 operators, the parametric non-Hermitian Hamiltonian family, its
//! symmetry checks, and symmetry metadata.

use crate::error::CoreError;
use crate::linalg::max_abs3;
use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The four dimensionless model knobs plus the angular-frequency scale `s`
/// (rad/s) that converts dimensionless evolution time into lab time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub h: f64,
    pub mu: f64,
    pub nu: f64,
    /// Angular-frequency scale in rad/s; must be positive.
    pub s: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, h: f64, mu: f64, nu: f64, s: f64) -> Result<Self, CoreError> {
        let p = ModelParams { gamma, h, mu, nu, s };
        p.validate()?;
        Ok(p)
    }

    /// Dimensionless parameters with a default 2π×40 kHz scale.
    pub fn dimensionless(gamma: f64, h: f64, mu: f64, nu: f64) -> Self {
        ModelParams {
            gamma,
            h,
            mu,
            nu,
            s: 2.0 * std::f64::consts::PI * 40e3,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("h", self.h),
            ("mu", self.mu),
            ("nu", self.nu),
            ("s", self.s),
        ] {
            if !v.is_finite() {
                return Err(CoreError::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.s <= 0.0 {
            return Err(CoreError::InvalidParams("s must be > 0".into()));
        }
        Ok(())
    }
}

/// Symmetry classes the model family can realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    /// U_PT · H · U_PT⁻¹ = conj(H)
    PT,
    /// U_psCh · H · U_psCh⁻¹ = −H†
    PseudoChirality,
}

/// A 3×3 complex matrix tagged with the symmetries it is claimed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct NHMatrix {
    pub entries: Matrix3<C64>,
    pub claimed_symmetries: BTreeSet<Symmetry>,
}

impl NHMatrix {
    pub fn new(entries: Matrix3<C64>) -> Self {
        NHMatrix {
            entries,
            claimed_symmetries: BTreeSet::new(),
        }
    }

    pub fn with_symmetries(entries: Matrix3<C64>, syms: impl IntoIterator<Item = Symmetry>) -> Self {
        NHMatrix {
            entries,
            claimed_symmetries: syms.into_iter().collect(),
        }
    }
}

/// Standard spin-1 operators (Sx, Sy, Sz) in the m = +1, 0, −1 basis.
pub fn spin1_operators() -> (Matrix3<C64>, Matrix3<C64>, Matrix3<C64>) {
    let sx = Matrix3::new(
        c(0.0, 0.0), c(SQRT2_INV, 0.0), c(0.0, 0.0),
        c(SQRT2_INV, 0.0), c(0.0, 0.0), c(SQRT2_INV, 0.0),
        c(0.0, 0.0), c(SQRT2_INV, 0.0), c(0.0, 0.0),
    );
    let sy = Matrix3::new(
        c(0.0, 0.0), c(0.0, -SQRT2_INV), c(0.0, 0.0),
        c(0.0, SQRT2_INV), c(0.0, 0.0), c(0.0, -SQRT2_INV),
        c(0.0, 0.0), c(0.0, SQRT2_INV), c(0.0, 0.0),
    );
    let sz = Matrix3::new(
        c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0),
    );
    (sx, sy, sz)
}

/// Antidiagonal exchange unitary implementing the parity part of the PT check.
pub fn u_pt() -> Matrix3<C64> {
    Matrix3::new(
        c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
        c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
    )
}

/// Diagonal sign unitary implementing the pseudo-chirality check.
pub fn u_psch() -> Matrix3<C64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)))
}

/// The real antisymmetric coupling multiplying μ.
fn mu_matrix() -> Matrix3<C64> {
    Matrix3::new(
        c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        c(-1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0),
        c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
    )
}

/// H = Sx + (iγ+ν)Sz + h·Sy + μ·K with K the antisymmetric coupling.
///
/// Claimed symmetries are derived from the knobs: the PT check holds iff
/// ν = 0, and the pseudo-chirality check holds iff μ = 0 and ν = 0 (a real
/// diagonal term νSz fails the anti-Hermitian relation just as μK does).
pub fn build_hamiltonian(p: &ModelParams) -> NHMatrix {
    let (sx, sy, sz) = spin1_operators();
    let entries = sx + sz * c(p.nu, p.gamma) + sy * c(p.h, 0.0) + mu_matrix() * c(p.mu, 0.0);
    let mut syms = BTreeSet::new();
    if p.nu == 0.0 {
        syms.insert(Symmetry::PT);
    }
    if p.mu == 0.0 && p.nu == 0.0 {
        syms.insert(Symmetry::PseudoChirality);
    }
    NHMatrix {
        entries,
        claimed_symmetries: syms,
    }
}

/// H^x = Sx + iγSz + hSy + x·[[0,1,0],[1,−i,0],[0,0,0]]: keeps the
/// pseudo-chirality check while breaking the PT check for x ≠ 0.
pub fn build_x_hamiltonian(gamma: f64, h: f64, x: f64) -> NHMatrix {
    let (sx, sy, sz) = spin1_operators();
    let xm = Matrix3::new(
        c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0),
        c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
    );
    let entries = sx + sz * c(0.0, gamma) + sy * c(h, 0.0) + xm * c(x, 0.0);
    let mut syms = BTreeSet::new();
    syms.insert(Symmetry::PseudoChirality);
    if x == 0.0 {
        syms.insert(Symmetry::PT);
    }
    NHMatrix {
        entries,
        claimed_symmetries: syms,
    }
}

/// Default symmetry-check tolerance, relative to the max entry magnitude.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Evaluates a symmetry defining relation: returns whether it holds within
/// `SYMMETRY_TOL` (relative) and the max-norm residual of the defect.
pub fn check_symmetry(h: &NHMatrix, kind: Symmetry) -> (bool, f64) {
    let m = &h.entries;
    let residual = match kind {
        Symmetry::PT => {
            let u = u_pt();
            max_abs3(&(u * m * u.adjoint() - m.map(|z| z.conj())))
        }
        Symmetry::PseudoChirality => {
            let u = u_psch();
            max_abs3(&(u * m * u.adjoint() + m.adjoint()))
        }
    };
    let scale = 1.0 + max_abs3(m);
    (residual < SYMMETRY_TOL * scale, residual)
}
