//! Complex linear-algebra helpers shared across the crate.
//!
//! Small dense problems only (3×3 and 6×6): scaled-and-squared matrix
//! exponentials, Hermitian eigendecompositions, principal Hermitian square
//! roots, and a general complex eigensolver via the shifted QR iteration on
//! the companion/Hessenberg form.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3};
use num_complex::Complex64 as C64;

/// Maximum absolute entry of a dynamic complex matrix.
pub fn max_abs_dyn(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Maximum absolute entry of a 3×3 complex matrix.
pub fn max_abs3(m: &Matrix3<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Maximum absolute entry of a 6×6 complex matrix.
pub fn max_abs6(m: &Matrix6<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Hermiticity defect ‖M − M†‖_max for a 3×3 matrix.
pub fn herm_residual3(m: &Matrix3<C64>) -> f64 {
    max_abs3(&(m - m.adjoint()))
}

/// exp(A) for a dynamic square complex matrix by scaling and squaring with a
/// truncated Taylor series on the scaled matrix.
///
/// The matrices here are tiny (n ≤ 6) and well scaled, so a Taylor core with
/// ‖A/2^k‖ ≤ 1/4 and term-wise convergence to machine precision is both
/// simple and accurate.
pub fn expm_dyn(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    let norm = max_abs_dyn(a) * n as f64;
    let k = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scale = 2f64.powi(k as i32);
    let b = a.map(|z| z / scale);

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for j in 1..60 {
        term = (&term * &b) / C64::new(j as f64, 0.0);
        result += &term;
        if max_abs_dyn(&term) < 1e-20 * max_abs_dyn(&result) {
            break;
        }
    }
    for _ in 0..k {
        result = &result * &result;
    }
    result
}

/// exp(A) for a 3×3 complex matrix.
pub fn expm3(a: &Matrix3<C64>) -> Matrix3<C64> {
    let d = DMatrix::from_fn(3, 3, |i, j| a[(i, j)]);
    let e = expm_dyn(&d);
    Matrix3::from_fn(|i, j| e[(i, j)])
}

/// exp(A) for a 6×6 complex matrix.
pub fn expm6(a: &Matrix6<C64>) -> Matrix6<C64> {
    let d = DMatrix::from_fn(6, 6, |i, j| a[(i, j)]);
    let e = expm_dyn(&d);
    Matrix6::from_fn(|i, j| e[(i, j)])
}

/// Eigendecomposition of a 3×3 Hermitian matrix by cyclic complex Jacobi
/// rotations: returns (eigenvalues ascending, unitary eigenvector columns).
pub fn herm_eig3(m: &Matrix3<C64>) -> (Vector3<f64>, Matrix3<C64>) {
    let mut a = *m;
    // Symmetrize to kill rounding-level skew parts.
    a = (a + a.adjoint()).map(|z| z * 0.5);
    let mut v = Matrix3::<C64>::identity();
    let one = C64::new(1.0, 0.0);

    for _sweep in 0..60 {
        let off = (0..3)
            .flat_map(|p| (0..3).map(move |q| (p, q)))
            .filter(|&(p, q)| p < q)
            .fold(0.0f64, |acc, (p, q)| acc + a[(p, q)].norm_sqr());
        if off < 1e-32 * (1.0 + max_abs3(&a).powi(2)) {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                let apq = a[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Unitary 2×2 rotation [c, s̄; -s, c] annihilating a_pq.
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);

                // Apply on the right: columns p, q of A and V.
                for r in 0..3 {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * (c * one) - arq * s.conj();
                    a[(r, q)] = arp * s + arq * (c * one);
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * (c * one) - vrq * s.conj();
                    v[(r, q)] = vrp * s + vrq * (c * one);
                }
                // Apply the adjoint on the left: rows p, q of A.
                for r in 0..3 {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = apr * (c * one) - aqr * s.conj().conj();
                    a[(q, r)] = apr * s.conj() + aqr * (c * one);
                }
                // Re-Hermitize the touched 2×2 block against rounding drift.
                a[(p, q)] = (a[(p, q)] + a[(q, p)].conj()) * 0.5;
                a[(q, p)] = a[(p, q)].conj();
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals = Vector3::new(a[(order[0], order[0])].re, a[(order[1], order[1])].re, a[(order[2], order[2])].re);
    let mut vecs = Matrix3::<C64>::zeros();
    for (col, &src) in order.iter().enumerate() {
        for r in 0..3 {
            vecs[(r, col)] = v[(r, src)];
        }
    }
    (vals, vecs)
}

/// Principal Hermitian square root of a Hermitian PSD 3×3 matrix.
///
/// Negative eigenvalues below `floor_tol` in magnitude are clamped to zero;
/// anything more negative is reported via `Err` with the offending value.
pub fn herm_sqrt3(m: &Matrix3<C64>, floor_tol: f64) -> Result<Matrix3<C64>, f64> {
    let (vals, vecs) = herm_eig3(m);
    if vals.min() < -floor_tol {
        return Err(vals.min());
    }
    let sq = Vector3::new(vals[0].max(0.0).sqrt(), vals[1].max(0.0).sqrt(), vals[2].max(0.0).sqrt());
    let d = Matrix3::from_diagonal(&Vector3::new(
        C64::new(sq[0], 0.0),
        C64::new(sq[1], 0.0),
        C64::new(sq[2], 0.0),
    ));
    Ok(vecs * d * vecs.adjoint())
}

/// Eigenvalues of a general complex n×n matrix via unshifted-to-Wilkinson
/// QR iteration on the Hessenberg form. Used as the companion-matrix oracle
/// for the closed-form cubic solver and for small spectral checks.
pub fn complex_eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let mut a = hessenberg(m);
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter_guard = 0usize;
    while hi > 0 {
        iter_guard += 1;
        if iter_guard > 500 * n {
            // Fall back: accept current diagonal (should not happen for our
            // well-conditioned 3×3/6×6 inputs).
            for i in 0..hi {
                eigs.push(a[(i, i)]);
            }
            break;
        }
        if hi == 1 {
            eigs.push(a[(0, 0)]);
            hi = 0;
            continue;
        }
        // Deflate tiny subdiagonals.
        let mut deflated = false;
        for i in (1..hi).rev() {
            let small = 1e-16 * (a[(i - 1, i - 1)].norm() + a[(i, i)].norm() + 1e-300);
            if a[(i, i - 1)].norm() < small {
                if i == hi - 1 {
                    eigs.push(a[(hi - 1, hi - 1)]);
                    hi -= 1;
                    deflated = true;
                }
                break;
            }
        }
        if deflated {
            continue;
        }
        // Wilkinson shift from the trailing 2×2 block.
        let a11 = a[(hi - 2, hi - 2)];
        let a12 = a[(hi - 2, hi - 1)];
        let a21 = a[(hi - 1, hi - 2)];
        let a22 = a[(hi - 1, hi - 1)];
        let tr = a11 + a22;
        let det = a11 * a22 - a12 * a21;
        let disc = (tr * tr - det * 4.0).sqrt();
        let l1 = (tr + disc) * 0.5;
        let l2 = (tr - disc) * 0.5;
        let shift = if (l1 - a22).norm() < (l2 - a22).norm() { l1 } else { l2 };

        for i in 0..hi {
            a[(i, i)] -= shift;
        }
        // One QR step by Givens rotations on the active block.
        let mut rots: Vec<(usize, C64, C64)> = Vec::with_capacity(hi - 1);
        for i in 0..hi - 1 {
            let x = a[(i, i)];
            let y = a[(i + 1, i)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if r < 1e-300 {
                rots.push((i, C64::new(1.0, 0.0), C64::new(0.0, 0.0)));
                continue;
            }
            let c = x / r;
            let s = y / r;
            rots.push((i, c, s));
            for j in i..n {
                let ai = a[(i, j)];
                let aj = a[(i + 1, j)];
                a[(i, j)] = c.conj() * ai + s.conj() * aj;
                a[(i + 1, j)] = -s * ai + c * aj;
            }
        }
        for &(i, c, s) in &rots {
            for r in 0..(i + 2).min(hi) {
                let ai = a[(r, i)];
                let aj = a[(r, i + 1)];
                a[(r, i)] = ai * c + aj * s;
                a[(r, i + 1)] = -ai * s.conj() + aj * c.conj();
            }
        }
        for i in 0..hi {
            a[(i, i)] += shift;
        }
    }
    eigs
}

/// Reduce a complex matrix to upper Hessenberg form by Householder similarity.
fn hessenberg(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let mut x = DVector::<C64>::zeros(n - k - 1);
        for i in 0..n - k - 1 {
            x[i] = a[(k + 1 + i, k)];
        }
        let alpha = x.norm();
        if alpha < 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 1e-300 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm = v.norm();
        if vnorm < 1e-300 {
            continue;
        }
        let v = v.map(|z| z / vnorm);
        // A ← (I − 2vv†) A (I − 2vv†) applied to the trailing block.
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..n - k - 1 {
                dot += v[i].conj() * a[(k + 1 + i, j)];
            }
            for i in 0..n - k - 1 {
                let upd = v[i] * dot * 2.0;
                a[(k + 1 + i, j)] -= upd;
            }
        }
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in 0..n - k - 1 {
                dot += a[(i, k + 1 + j)] * v[j];
            }
            for j in 0..n - k - 1 {
                let upd = dot * v[j].conj() * 2.0;
                a[(i, k + 1 + j)] -= upd;
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Matrix3::<C64>::zeros();
        let e = expm3(&z);
        assert_abs_diff_eq!(max_abs3(&(e - Matrix3::identity())), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_diagonal() {
        let d = Matrix3::from_diagonal(&Vector3::new(
            C64::new(1.0, 0.0),
            C64::new(0.0, 2.0),
            C64::new(-0.5, 0.3),
        ));
        let e = expm3(&d);
        for i in 0..3 {
            let expect = d[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_skew_hermitian_is_unitary() {
        let a = Matrix3::new(
            C64::new(0.0, 0.3), C64::new(0.2, 0.1), C64::new(-0.4, 0.5),
            C64::new(-0.2, 0.1), C64::new(0.0, -1.1), C64::new(0.7, 0.0),
            C64::new(0.4, 0.5), C64::new(-0.7, 0.0), C64::new(0.0, 0.8),
        );
        let e = expm3(&a);
        let defect = e.adjoint() * e - Matrix3::identity();
        assert!(max_abs3(&defect) < 1e-13);
    }

    #[test]
    fn herm_eig_recomposes() {
        let m = Matrix3::new(
            C64::new(2.0, 0.0), C64::new(0.5, 0.3), C64::new(-0.2, 0.7),
            C64::new(0.5, -0.3), C64::new(-1.0, 0.0), C64::new(0.1, -0.4),
            C64::new(-0.2, -0.7), C64::new(0.1, 0.4), C64::new(0.5, 0.0),
        );
        let (vals, vecs) = herm_eig3(&m);
        let d = Matrix3::from_diagonal(&Vector3::new(
            C64::new(vals[0], 0.0), C64::new(vals[1], 0.0), C64::new(vals[2], 0.0),
        ));
        let recomposed = vecs * d * vecs.adjoint();
        assert!(max_abs3(&(recomposed - m)) < 1e-12);
        let unitary_defect = vecs.adjoint() * vecs - Matrix3::identity();
        assert!(max_abs3(&unitary_defect) < 1e-12);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
    }

    #[test]
    fn herm_sqrt_squares_back() {
        let b = Matrix3::new(
            C64::new(1.0, 0.0), C64::new(0.2, 0.1), C64::new(0.0, -0.3),
            C64::new(0.4, 0.2), C64::new(2.0, 0.0), C64::new(0.5, 0.0),
            C64::new(0.3, 0.3), C64::new(-0.1, 0.2), C64::new(1.5, 0.0),
        );
        let m = b.adjoint() * b; // Hermitian PSD
        let s = herm_sqrt3(&m, 1e-12).unwrap();
        assert!(max_abs3(&(s * s - m)) < 1e-12);
        assert!(herm_residual3(&s) < 1e-12);
    }

    #[test]
    fn complex_eigenvalues_of_triangular() {
        let m = DMatrix::from_row_slice(3, 3, &[
            C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(0.0, 3.0),
            C64::new(0.0, 0.0), C64::new(-2.0, 0.5), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.25, -1.0),
        ]);
        let mut eigs = complex_eigenvalues(&m);
        eigs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut expect = [C64::new(1.0, 1.0), C64::new(-2.0, 0.5), C64::new(0.25, -1.0)];
        expect.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - x).norm() < 1e-10, "{e} vs {x}");
        }
    }
}
