//! Characteristic-polynomial algebra for the 3×3 family: monic cubic
//! coefficients, closed-form resultants, a Cardano solver with a
//! companion-matrix fallback near degeneracies, and a brute-force Sylvester
//! determinant used as an oracle.

use crate::error::CoreError;
use crate::model::NHMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Monic cubic λ³ + f2·λ² + f1·λ + f0 (f3 = 1 by construction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub f3: C64,
    pub f2: C64,
    pub f1: C64,
    pub f0: C64,
}

/// The resultant pair gating EP classification: r1 = Res(P, P′) and the
/// companion quantity r2 = 36·f0 for a depressed monic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultantPair {
    pub r1: C64,
    pub r2: C64,
}

/// Coefficients of det(λI − H) for a 3×3 matrix, computed from the power
/// sums (traces), so the result is exact polynomial algebra in the entries.
///
/// Coefficient components below the roundoff floor of that algebra are
/// snapped to exact zero: algebraically-vanishing coefficients (e.g. both
/// lower coefficients at a triple root) otherwise survive as ~1e-16 residue
/// that the root solvers amplify to ~1e-8 spurious splittings.
pub fn char_poly(h: &NHMatrix) -> CubicCoeffs {
    let m = &h.entries;
    let tr = m.trace();
    let m2 = m * m;
    let tr2 = m2.trace();
    let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
    let scale = 1.0 + crate::linalg::max_abs3(m);
    let snap = |z: C64, order: i32| -> C64 {
        let floor = 1e-13 * scale.powi(order);
        C64::new(
            if z.re.abs() < floor { 0.0 } else { z.re },
            if z.im.abs() < floor { 0.0 } else { z.im },
        )
    };
    CubicCoeffs {
        f3: C64::new(1.0, 0.0),
        f2: snap(-tr, 1),
        f1: snap((tr * tr - tr2) * 0.5, 2),
        f0: snap(-det, 3),
    }
}

/// Removes the quadratic term by the shift λ = x − f2/3, returning the
/// depressed coefficients (p, q) of x³ + p·x + q and the applied shift.
pub fn depress(c: &CubicCoeffs) -> (C64, C64, C64) {
    let shift = c.f2 / 3.0;
    let p = c.f1 - c.f2 * c.f2 / 3.0;
    let q = c.f0 - c.f1 * c.f2 / 3.0 + c.f2 * c.f2 * c.f2 * (2.0 / 27.0);
    (p, q, shift)
}

/// Closed-form resultant pair for a monic cubic; a nonzero f2 is depressed
/// away first (r1 is shift-invariant; r2 is reported for the depressed form).
pub fn resultants(c: &CubicCoeffs) -> ResultantPair {
    let (p, q, _) = depress(c);
    ResultantPair {
        r1: p * p * p * 4.0 + q * q * 27.0,
        r2: q * 36.0,
    }
}

/// Determinant of the (deg p + deg q)-square Sylvester matrix of two
/// polynomials given by ascending coefficient slices [c0, c1, ..., c_deg].
pub fn sylvester_resultant(p: &[C64], q: &[C64]) -> Result<C64, CoreError> {
    let trim = |c: &[C64]| -> Vec<C64> {
        let mut v = c.to_vec();
        while v.len() > 1 && v.last().map_or(false, |z| z.norm() == 0.0) {
            v.pop();
        }
        v
    };
    let p = trim(p);
    let q = trim(q);
    if p.iter().all(|z| z.norm() == 0.0) || q.iter().all(|z| z.norm() == 0.0) {
        return Err(CoreError::InvalidInput("zero polynomial has no resultant".into()));
    }
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    if dp < 1 || dq < 1 {
        return Err(CoreError::InvalidInput(
            "resultant requires both degrees >= 1".into(),
        ));
    }
    let n = dp + dq;
    let mut s = DMatrix::<C64>::zeros(n, n);
    // Rows of shifted p (descending-degree layout), then shifted q.
    for i in 0..dq {
        for (j, &coef) in p.iter().rev().enumerate() {
            s[(i, i + j)] = coef;
        }
    }
    for i in 0..dp {
        for (j, &coef) in q.iter().rev().enumerate() {
            s[(dq + i, i + j)] = coef;
        }
    }
    Ok(det_dyn(&s))
}

/// LU determinant with partial pivoting for a dynamic complex matrix.
fn det_dyn(m: &DMatrix<C64>) -> C64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].norm();
        for i in k + 1..n {
            if a[(i, k)].norm() > best {
                best = a[(i, k)].norm();
                piv = i;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != k {
            a.swap_rows(piv, k);
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / a[(k, k)];
            for j in k..n {
                let sub = factor * a[(k, j)];
                a[(i, j)] -= sub;
            }
        }
    }
    det
}

/// Ascending coefficients of the monic cubic, its first, and its second
/// derivative — convenient inputs for `sylvester_resultant`.
pub fn poly_and_derivatives(c: &CubicCoeffs) -> ([C64; 4], [C64; 3], [C64; 2]) {
    let p = [c.f0, c.f1, c.f2, c.f3];
    let dp = [c.f1, c.f2 * 2.0, c.f3 * 3.0];
    let ddp = [c.f2 * 2.0, c.f3 * 6.0];
    (p, dp, ddp)
}

/// Roots of the monic cubic by Cardano's formula with a consistent cube-root
/// branch, falling back to the companion-matrix QR eigensolver when the
/// discriminant quantity is small enough for catastrophic cancellation.
/// Output is sorted by (Re, then Im).
pub fn eigenvalues_cubic(c: &CubicCoeffs) -> [C64; 3] {
    let (p, q, shift) = depress(c);
    // Exact triple root: x³ = 0 after depression. The QR fallback would
    // smear the nilpotent spectrum to ~1e-8, so return the root directly.
    if p.norm() == 0.0 && q.norm() == 0.0 {
        return [-shift; 3];
    }
    // Δ-like gate: 4p³ + 27q² small in absolute terms means a near-multiple
    // root, where the closed form loses digits.
    let disc = p * p * p * 4.0 + q * q * 27.0;
    let scale = 1.0 + p.norm().powi(3) + q.norm().powi(2);
    let mut roots = if disc.norm() < 1e-20 * scale.max(1.0) * 1e8 {
        companion_roots(c)
    } else {
        let mut r = cardano_depressed(p, q);
        for root in &mut r {
            *root -= shift;
        }
        // Guard: if the closed form degraded (residual check), fall back.
        let resid = r
            .iter()
            .map(|&x| (((x + shift) * (x + shift) * (x + shift)) + p * (x + shift) + q).norm())
            .fold(0.0f64, f64::max);
        if resid > 1e-8 * scale {
            companion_roots(c)
        } else {
            r
        }
    };
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    roots
}

/// Cardano roots of x³ + p·x + q (depressed, monic).
fn cardano_depressed(p: C64, q: C64) -> [C64; 3] {
    let half_q = q * 0.5;
    let inner = (half_q * half_q + p * p * p / 27.0).sqrt();
    // Pick the branch that maximizes |u³| to keep u well away from zero.
    let u3a = -half_q + inner;
    let u3b = -half_q - inner;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
    if u3.norm() == 0.0 {
        return [C64::new(0.0, 0.0); 3];
    }
    let u = u3.cbrt();
    let omega = C64::new(-0.5, 0.75f64.sqrt());
    let mut out = [C64::new(0.0, 0.0); 3];
    let mut uk = u;
    for slot in &mut out {
        // x = u − p/(3u), the Vieta substitution.
        *slot = uk - p / (uk * 3.0);
        uk *= omega;
    }
    out
}

/// Roots via the companion matrix of the monic cubic and the QR eigensolver.
pub fn companion_roots(c: &CubicCoeffs) -> [C64; 3] {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let m = DMatrix::from_row_slice(3, 3, &[
        zero, zero, -c.f0,
        one, zero, -c.f1,
        zero, one, -c.f2,
    ]);
    let eigs = crate::linalg::complex_eigenvalues(&m);
    let mut out = [zero; 3];
    for (slot, e) in out.iter_mut().zip(eigs) {
        *slot = e;
    }
    out
}
