//! Randomized property tests for the algebraic core: symmetry residuals,
//! resultant oracles, root/coefficient consistency, invariant structure of
//! the readout permutations, and evolution composition laws.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use el3_core::cubic::{
    char_poly, eigenvalues_cubic, poly_and_derivatives, resultants, sylvester_resultant,
};
use el3_core::dynamics::{fidelity, propagate, DensityMatrix3};
use el3_core::ep::topological_invariant;
use el3_core::linalg::expm3;
use el3_core::model::{build_hamiltonian, check_symmetry, ModelParams, Symmetry};
use el3_core::readout::{sequence_permutation, PiPulse, PulseSeq};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn param() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// PT symmetry holds iff ν = 0; pseudo-chirality iff μ = ν = 0. The
    /// builder's claimed flags must agree with the numeric residual check.
    #[test]
    fn symmetry_flags_match_residuals(gamma in param(), h in param(), mu in param(), nu in param()) {
        for (m, n) in [(0.0, 0.0), (mu, 0.0), (0.0, nu), (mu, nu)] {
            let ham = build_hamiltonian(&ModelParams::dimensionless(gamma, h, m, n));
            let (pt_ok, _) = check_symmetry(&ham, Symmetry::PT);
            let (ps_ok, _) = check_symmetry(&ham, Symmetry::PseudoChirality);
            prop_assert_eq!(pt_ok, n == 0.0);
            prop_assert_eq!(ps_ok, m == 0.0 && n == 0.0);
            prop_assert_eq!(ham.claimed_symmetries.contains(&Symmetry::PT), pt_ok);
            prop_assert_eq!(ham.claimed_symmetries.contains(&Symmetry::PseudoChirality), ps_ok);
        }
    }

    /// Closed-form R1 equals the Sylvester determinant Res(p, p′); R2 is a
    /// fixed multiple of Res(p, p″): R2 = −Res(p, p″)/6.
    #[test]
    fn resultant_oracles(gamma in param(), h in param(), mu in param(), nu in param()) {
        let coeffs = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, nu)));
        let r = resultants(&coeffs);
        let (p, dp, ddp) = poly_and_derivatives(&coeffs);
        let s1 = sylvester_resultant(&p, &dp).unwrap();
        prop_assert!((r.r1 - s1).norm() < 1e-9 * (1.0 + r.r1.norm()));
        // Res(p, p″) = −216·f0 for the depressed monic cubic, i.e. −6·R2.
        let s2 = sylvester_resultant(&p, &ddp).unwrap();
        prop_assert!((r.r2 + s2 / 6.0).norm() < 1e-9 * (1.0 + r.r2.norm()));
    }

    /// Every Cardano root satisfies the characteristic polynomial, and the
    /// roots regenerate its coefficients through the Vieta relations.
    #[test]
    fn roots_regenerate_coefficients(gamma in param(), h in param(), mu in param(), nu in param()) {
        let coeffs = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, nu)));
        let roots = eigenvalues_cubic(&coeffs);
        let scale = 1.0 + coeffs.f1.norm().powf(1.5) + coeffs.f0.norm();
        for x in roots {
            let val = ((x + coeffs.f2) * x + coeffs.f1) * x + coeffs.f0;
            prop_assert!(val.norm() < 1e-8 * scale, "residual {} at {}", val.norm(), x);
        }
        let e1 = roots[0] + roots[1] + roots[2];
        let e2 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2];
        let e3 = roots[0] * roots[1] * roots[2];
        prop_assert!((e1 + coeffs.f2).norm() < 1e-8 * scale);
        prop_assert!((e2 - coeffs.f1).norm() < 1e-8 * scale);
        prop_assert!((e3 + coeffs.f0).norm() < 1e-8 * scale);
    }

    /// With ν = 0 (PT symmetry) both resultants are real.
    #[test]
    fn pt_resultants_are_real(gamma in param(), h in param(), mu in param()) {
        let coeffs = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, 0.0)));
        let r = resultants(&coeffs);
        prop_assert!(r.r1.im.abs() < 1e-10 * (1.0 + r.r1.norm()));
        prop_assert!(r.r2.im.abs() < 1e-10 * (1.0 + r.r2.norm()));
    }

    /// Swapping the point pair flips the sign of the crossing invariant.
    #[test]
    fn invariant_is_antisymmetric(h in -1.3..1.3f64, d1 in 0.05..0.4f64, d2 in 0.05..0.4f64) {
        let gc = (1.0 + h * h).sqrt();
        let a = (gc + d1, h);
        let b = (gc - d2, h);
        let w_ab = topological_invariant(a, b, 0.0, 0.0).unwrap();
        let w_ba = topological_invariant(b, a, 0.0, 0.0).unwrap();
        prop_assert_eq!(w_ab, -w_ba);
        prop_assert_eq!(w_ab, 1);
    }

    /// Propagation composes: evolving t1 then t2 equals evolving t1 + t2.
    #[test]
    fn propagation_composes(gamma in param(), h in param(), mu in param(), nu in param(),
                            t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
        let ham = build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, nu));
        let psi0 = Vector3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let once = propagate(&ham, t1 + t2, &psi0).unwrap();
        let mid = propagate(&ham, t1, &psi0).unwrap();
        let twice = propagate(&ham, t2, &(mid / c(mid.norm(), 0.0))).unwrap() * c(mid.norm(), 0.0);
        let scale = once.norm().max(1.0);
        prop_assert!((once - twice).norm() < 1e-10 * scale);
    }

    /// Fidelity is symmetric and invariant under a simultaneous unitary
    /// rotation of both density matrices.
    #[test]
    fn fidelity_unitary_invariance(a in param(), b in param(), d in param(),
                                   re in -1.0..1.0f64, im in -1.0..1.0f64) {
        let v1 = Vector3::new(c(1.0, 0.1), c(re, im), c(0.3, -0.2)).normalize();
        let v2 = Vector3::new(c(im, 0.4), c(0.2, re), c(1.0, 0.0)).normalize();
        let r1 = DensityMatrix3::from_pure(&v1);
        let r2 = DensityMatrix3::from_pure(&v2);
        let f = fidelity(&r1, &r2);
        // Symmetric up to the iterative-eigensolver precision on the
        // near-rank-1 inputs.
        prop_assert!((f - fidelity(&r2, &r1)).abs() < 1e-6);
        prop_assert!((f - v1.dotc(&v2).norm_sqr()).abs() < 1e-6);

        // Unitary from a Hermitian generator.
        let herm = Matrix3::new(
            c(a, 0.0), c(b, d), c(0.0, 0.3),
            c(b, -d), c(d, 0.0), c(re, im),
            c(0.0, -0.3), c(re, -im), c(b, 0.0),
        );
        let u = expm3(&(herm * c(0.0, 1.0)));
        let rot = |r: &DensityMatrix3| DensityMatrix3::new(u * r.0 * u.adjoint()).unwrap();
        prop_assert!((fidelity(&rot(&r1), &rot(&r2)) - f).abs() < 1e-6);
    }
}

/// Every pulse sequence maps to a genuine permutation matrix, and
/// concatenation composes contravariantly with matrix product.
#[test]
fn pulse_sequences_are_permutations() {
    let pulses = [
        PiPulse::R12,
        PiPulse::R23,
        PiPulse::R25,
        PiPulse::R36,
        PiPulse::R45,
    ];
    for &p1 in &pulses {
        for &p2 in &pulses {
            let m1 = sequence_permutation(&PulseSeq(vec![p1]));
            let m2 = sequence_permutation(&PulseSeq(vec![p2]));
            let m12 = sequence_permutation(&PulseSeq(vec![p1, p2]));
            for m in [&m1, &m2, &m12] {
                for i in 0..6 {
                    let row: f64 = (0..6).map(|j| m[i][j]).sum();
                    let col: f64 = (0..6).map(|j| m[j][i]).sum();
                    assert_eq!(row, 1.0);
                    assert_eq!(col, 1.0);
                    for j in 0..6 {
                        assert!(m[i][j] == 0.0 || m[i][j] == 1.0);
                    }
                }
            }
            // Applying p1 then p2 to a population vector is M2·(M1·p).
            let p: [f64; 6] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.25];
            let apply = |m: &[[f64; 6]; 6], v: &[f64; 6]| -> [f64; 6] {
                std::array::from_fn(|i| (0..6).map(|j| m[i][j] * v[j]).sum())
            };
            let seq = apply(&m12, &p);
            let step = apply(&m2, &apply(&m1, &p));
            assert_eq!(seq, step);
        }
    }
}
