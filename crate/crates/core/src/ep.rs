//! Exceptional-point detection and classification, exceptional-line tracing,
//! Riemann-sheet sweeps, dispersion scans, and the topological invariant.

use crate::cubic::{char_poly, eigenvalues_cubic, resultants};
use crate::error::CoreError;
use crate::model::{build_hamiltonian, ModelParams};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Degeneracy class of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EPKind {
    Regular,
    EP2,
    EP3,
}

/// Classification result with the residual magnitudes that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EPClass {
    pub kind: EPKind,
    pub location: (f64, f64),
    /// (|r1|, |r2|)
    pub residuals: (f64, f64),
}

/// Rectangle in the (gamma, h) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub h_min: f64,
    pub h_max: f64,
}

/// Continuity-sorted eigenvalue sheets over a (gamma, h) grid.
#[derive(Debug, Clone)]
pub struct SheetGrid {
    pub gammas: Vec<f64>,
    pub hs: Vec<f64>,
    /// sheets[k][i][j] = k-th sheet value at (gammas[i], hs[j]).
    pub sheets: [Vec<Vec<C64>>; 3],
    /// True where the continuity assignment needed a non-identity permutation
    /// relative to the (Re, Im)-sorted order — a proxy for branch-cut cells.
    pub branch_flags: Vec<Vec<bool>>,
}

/// Cube-root (or linear) splitting scan around an anchor on the EL3.
#[derive(Debug, Clone)]
pub struct DispersionScan {
    pub anchor: (f64, f64),
    pub mu_samples: Vec<f64>,
    pub splittings: Vec<f64>,
    pub fitted_exponent: f64,
    pub eps_plus: Vec<C64>,
    pub eps_minus: Vec<C64>,
}

/// Relative EP tolerance scale: r1 grows cubically in the coefficients, so
/// the gate is |r1| < tol·(1 + |f1|³ + |f0|²).
fn ep_scale(f1: C64, f0: C64) -> f64 {
    1.0 + f1.norm().powi(3) + f0.norm().powi(2)
}

/// Classifies a parameter point by the vanishing pattern of (r1, r2).
pub fn classify_point(p: &ModelParams, tol: f64) -> EPClass {
    let c = char_poly(&build_hamiltonian(p));
    let r = resultants(&c);
    let scale = ep_scale(c.f1, c.f0);
    let r1_small = r.r1.norm() < tol * scale;
    let r2_small = r.r2.norm() < tol * scale;
    let kind = match (r1_small, r2_small) {
        (true, true) => EPKind::EP3,
        (true, false) => EPKind::EP2,
        _ => EPKind::Regular,
    };
    EPClass {
        kind,
        location: (p.gamma, p.h),
        residuals: (r.r1.norm(), r.r2.norm()),
    }
}

fn re_r1(gamma: f64, h: f64, mu: f64, nu: f64) -> f64 {
    let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, nu)));
    resultants(&c).r1.re
}

/// Traces the EP3 locus in a rectangle.
///
/// With both symmetries (μ=ν=0) the locus is a curve: a sign-change scan on
/// Re r1 along γ at fixed h, refined by bisection. With PT only (μ≠0, ν=0)
/// it collapses to isolated points on h=0 with γ² = 1 − 2μ²; with ν≠0 it is
/// empty.
pub fn trace_ep3_locus(
    mu: f64,
    nu: f64,
    region: Region,
    resolution: usize,
) -> Result<Vec<(f64, f64)>, CoreError> {
    if resolution < 2 {
        return Err(CoreError::InvalidInput("resolution must be >= 2".into()));
    }
    for v in [region.gamma_min, region.gamma_max, region.h_min, region.h_max] {
        if !v.is_finite() {
            return Err(CoreError::InvalidInput("region must be finite".into()));
        }
    }
    if nu != 0.0 {
        if mu != 0.0 {
            // Four independent real constraints on two knobs: generically empty.
            return Ok(Vec::new());
        }
        // μ=0, ν≠0: f0 = 0 so r1 = 4f1³ with complex f1 = γ²−1−h²−ν²−2iγν;
        // Im f1 = 0 forces γ = 0, then Re f1 = −1−h²−ν² < 0: empty.
        return Ok(Vec::new());
    }
    if mu != 0.0 {
        let g2 = 1.0 - 2.0 * mu * mu;
        let mut pts = Vec::new();
        if g2 > 0.0 {
            let g = g2.sqrt();
            for cand in [g, -g] {
                let in_gamma = cand >= region.gamma_min && cand <= region.gamma_max;
                let in_h = region.h_min <= 0.0 && region.h_max >= 0.0;
                if in_gamma && in_h {
                    pts.push((cand, 0.0));
                }
            }
        }
        pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        return Ok(pts);
    }

    // Both symmetries: scan each h-column for sign changes of Re r1 in γ.
    let mut pts = Vec::new();
    let nh = resolution;
    let ng = resolution;
    for j in 0..nh {
        let h = if nh == 1 {
            region.h_min
        } else {
            region.h_min + (region.h_max - region.h_min) * j as f64 / (nh - 1) as f64
        };
        let gam = |i: usize| {
            region.gamma_min + (region.gamma_max - region.gamma_min) * i as f64 / (ng - 1) as f64
        };
        let mut prev = re_r1(gam(0), h, 0.0, 0.0);
        for i in 1..ng {
            let cur = re_r1(gam(i), h, 0.0, 0.0);
            if prev == 0.0 {
                pts.push((gam(i - 1), h));
            } else if prev * cur < 0.0 {
                // Bisection refinement to 1e-10 in γ.
                let (mut lo, mut hi) = (gam(i - 1), gam(i));
                let (mut flo, _fhi) = (prev, cur);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let fm = re_r1(mid, h, 0.0, 0.0);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                pts.push((0.5 * (lo + hi), h));
            }
            prev = cur;
        }
    }
    Ok(pts)
}

/// Eigenvalue sheets over a grid, continuity-matched along a serpentine
/// column-major traversal.
pub fn sweep_sheets(
    region: Region,
    resolution: (usize, usize),
    mu: f64,
    nu: f64,
) -> Result<SheetGrid, CoreError> {
    let (ng, nh) = resolution;
    if ng < 1 || nh < 1 {
        return Err(CoreError::InvalidInput("resolution must be >= 1 per axis".into()));
    }
    let axis = |min: f64, max: f64, n: usize, i: usize| {
        if n == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    };
    let gammas: Vec<f64> = (0..ng).map(|i| axis(region.gamma_min, region.gamma_max, ng, i)).collect();
    let hs: Vec<f64> = (0..nh).map(|j| axis(region.h_min, region.h_max, nh, j)).collect();

    let mut sheets = [
        vec![vec![C64::new(0.0, 0.0); nh]; ng],
        vec![vec![C64::new(0.0, 0.0); nh]; ng],
        vec![vec![C64::new(0.0, 0.0); nh]; ng],
    ];
    let mut flags = vec![vec![false; nh]; ng];

    let mut prev: Option<[C64; 3]> = None;
    for j in 0..nh {
        // Serpentine: alternate the γ direction per column for continuity.
        let order: Vec<usize> = if j % 2 == 0 {
            (0..ng).collect()
        } else {
            (0..ng).rev().collect()
        };
        for &i in &order {
            let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(
                gammas[i], hs[j], mu, nu,
            )));
            let roots = eigenvalues_cubic(&c);
            let assigned = match prev {
                None => roots,
                Some(reference) => {
                    let (perm, nontrivial) = best_matching(&reference, &roots);
                    flags[i][j] = nontrivial;
                    [roots[perm[0]], roots[perm[1]], roots[perm[2]]]
                }
            };
            for k in 0..3 {
                sheets[k][i][j] = assigned[k];
            }
            prev = Some(assigned);
        }
    }
    Ok(SheetGrid {
        gammas,
        hs,
        sheets,
        branch_flags: flags,
    })
}

/// Minimal-total-distance assignment of `new` roots to `reference` slots.
/// Returns the permutation and whether it differs from identity.
fn best_matching(reference: &[C64; 3], new: &[C64; 3]) -> ([usize; 3], bool) {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0],
    ];
    let mut best = PERMS[0];
    let mut best_cost = f64::INFINITY;
    for perm in PERMS {
        let cost: f64 = (0..3).map(|k| (reference[k] - new[perm[k]]).norm()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = perm;
        }
    }
    (best, best != [0, 1, 2])
}

/// Splitting-vs-μ scan at an EL3 anchor, with a log-log least-squares slope.
pub fn dispersion_scan(
    h0: f64,
    gamma0: f64,
    mu_list: &[f64],
) -> Result<DispersionScan, CoreError> {
    if (gamma0 * gamma0 - h0 * h0 - 1.0).abs() > 1e-9 {
        return Err(CoreError::InvalidInput(format!(
            "anchor ({gamma0}, {h0}) is off the gamma^2 - h^2 = 1 curve"
        )));
    }
    if mu_list.len() < 2 {
        return Err(CoreError::InvalidInput(
            "need at least 2 mu samples for an exponent fit".into(),
        ));
    }
    if mu_list.iter().any(|&m| m <= 0.0) {
        return Err(CoreError::InvalidInput("mu samples must be positive".into()));
    }
    let mut splittings = Vec::with_capacity(mu_list.len());
    let mut eps_plus = Vec::with_capacity(mu_list.len());
    let mut eps_minus = Vec::with_capacity(mu_list.len());
    for &mu in mu_list {
        let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma0, h0, mu, 0.0)));
        let roots = eigenvalues_cubic(&c);
        let mut split = 0.0f64;
        let (mut a, mut b) = (roots[0], roots[1]);
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d = (roots[i] - roots[j]).norm();
                if d > split {
                    split = d;
                    a = roots[i];
                    b = roots[j];
                }
            }
        }
        splittings.push(split);
        eps_plus.push(a);
        eps_minus.push(b);
    }
    // Least-squares slope of log(splitting) vs log(mu).
    let xs: Vec<f64> = mu_list.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = splittings.iter().map(|s| s.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let fitted_exponent = sxy / sxx;
    Ok(DispersionScan {
        anchor: (h0, gamma0),
        mu_samples: mu_list.to_vec(),
        splittings,
        fitted_exponent,
        eps_plus,
        eps_minus,
    })
}

/// Sign-difference invariant W = ½(sgn Re r1(pt₊) − sgn Re r1(pt₋)).
pub fn topological_invariant(
    pt_plus: (f64, f64),
    pt_minus: (f64, f64),
    mu: f64,
    nu: f64,
) -> Result<i32, CoreError> {
    let tol = 1e-12;
    let mut signs = [0.0f64; 2];
    for (slot, (gamma, h)) in signs.iter_mut().zip([pt_plus, pt_minus]) {
        let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, nu)));
        let r = resultants(&c);
        if r.r1.re.abs() < tol * ep_scale(c.f1, c.f0) {
            return Err(CoreError::InvalidInput(format!(
                "point ({gamma}, {h}) lies on the exceptional locus; sign undefined"
            )));
        }
        *slot = r.r1.re.signum();
    }
    Ok(((signs[0] - signs[1]) / 2.0) as i32)
}

/// Serializes a sheet grid to the documented CSV schema.
pub fn sheet_grid_to_csv(grid: &SheetGrid) -> String {
    let mut out = String::from("gamma,h,re_E1,im_E1,re_E2,im_E2,re_E3,im_E3,branch_flag\n");
    for i in 0..grid.gammas.len() {
        for j in 0..grid.hs.len() {
            let e: Vec<C64> = (0..3).map(|k| grid.sheets[k][i][j]).collect();
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
                grid.gammas[i], grid.hs[j],
                e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im,
                grid.branch_flags[i][j] as u8,
            ));
        }
    }
    out
}

/// Serializes a traced locus to CSV with the r1 residual per point.
pub fn locus_to_csv(points: &[(f64, f64)], mu: f64, nu: f64) -> String {
    let mut out = String::from("gamma,h,r1_residual\n");
    for &(gamma, h) in points {
        let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(gamma, h, mu, nu)));
        let r = resultants(&c);
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", gamma, h, r.r1.norm()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_known_points() {
        let ep3 = classify_point(&ModelParams::dimensionless(1.0, 0.0, 0.0, 0.0), 1e-8);
        assert_eq!(ep3.kind, EPKind::EP3);

        let regular = classify_point(&ModelParams::dimensionless(0.5, 0.0, 0.0, 0.0), 1e-8);
        assert_eq!(regular.kind, EPKind::Regular);

        let pt_only = classify_point(
            &ModelParams::dimensionless((1.0f64 - 2.0 * 0.04).sqrt(), 0.0, 0.2, 0.0),
            1e-8,
        );
        assert_eq!(pt_only.kind, EPKind::EP3);

        // Exact EP2 root of r1 = 0 on the h = -0.35, mu = 0.2 line.
        let ep2 = classify_point(
            &ModelParams::dimensionless(0.7243587400249358, -0.35, 0.2, 0.0),
            1e-8,
        );
        assert_eq!(ep2.kind, EPKind::EP2, "residuals {:?}", ep2.residuals);
    }

    #[test]
    fn locus_both_symmetries_is_hyperbola() {
        let region = Region { gamma_min: 0.0, gamma_max: 2.0, h_min: -1.5, h_max: 1.5 };
        let pts = trace_ep3_locus(0.0, 0.0, region, 121).unwrap();
        assert!(!pts.is_empty());
        for &(g, h) in &pts {
            assert!((g * g - h * h - 1.0).abs() < 1e-6, "({g}, {h})");
        }
    }

    #[test]
    fn locus_pt_only_and_empty() {
        let region = Region { gamma_min: -2.0, gamma_max: 2.0, h_min: -2.0, h_max: 2.0 };
        let pts = trace_ep3_locus(0.2, 0.0, region, 50).unwrap();
        assert_eq!(pts.len(), 2);
        let g = (1.0f64 - 0.08).sqrt();
        assert!((pts[0].0 - g).abs() < 1e-9 && pts[0].1 == 0.0);
        assert!((pts[1].0 + g).abs() < 1e-9 && pts[1].1 == 0.0);

        let none = trace_ep3_locus(0.2, 0.05, region, 50).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn sheets_middle_is_zero_for_both_symmetries() {
        let region = Region { gamma_min: 0.2, gamma_max: 1.8, h_min: -0.8, h_max: 0.8 };
        let grid = sweep_sheets(region, (15, 15), 0.0, 0.0).unwrap();
        // f0 = 0 on this family, so 0 is always a root; one sheet carries it.
        for i in 0..grid.gammas.len() {
            for j in 0..grid.hs.len() {
                let min_mod = (0..3)
                    .map(|k| grid.sheets[k][i][j].norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(min_mod < 1e-10);
            }
        }
    }

    #[test]
    fn sheets_are_permutation_of_exact_roots() {
        let region = Region { gamma_min: 0.3, gamma_max: 1.7, h_min: -0.5, h_max: 0.5 };
        let grid = sweep_sheets(region, (8, 8), 0.2, 0.05).unwrap();
        for (i, &g) in grid.gammas.iter().enumerate() {
            for (j, &h) in grid.hs.iter().enumerate() {
                let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(g, h, 0.2, 0.05)));
                let mut exact = eigenvalues_cubic(&c).to_vec();
                let mut got: Vec<C64> = (0..3).map(|k| grid.sheets[k][i][j]).collect();
                let cmp = |x: &C64, y: &C64| {
                    x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
                };
                exact.sort_by(cmp);
                got.sort_by(cmp);
                for (a, b) in exact.iter().zip(got.iter()) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_node_grid_matches_direct_roots() {
        let region = Region { gamma_min: 1.2, gamma_max: 1.2, h_min: 0.3, h_max: 0.3 };
        let grid = sweep_sheets(region, (1, 1), 0.1, 0.0).unwrap();
        let c = char_poly(&build_hamiltonian(&ModelParams::dimensionless(1.2, 0.3, 0.1, 0.0)));
        let roots = eigenvalues_cubic(&c);
        for k in 0..3 {
            assert!((grid.sheets[k][0][0] - roots[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn dispersion_exponents() {
        let mus: Vec<f64> = (0..9).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect();
        let scan = dispersion_scan(0.75, 1.25, &mus).unwrap();
        assert!((scan.fitted_exponent - 1.0 / 3.0).abs() < 0.03, "{}", scan.fitted_exponent);

        let scan = dispersion_scan(0.0, 1.0, &mus).unwrap();
        assert!((scan.fitted_exponent - 1.0).abs() < 0.03, "{}", scan.fitted_exponent);
        // On this anchor the splitting is exactly sqrt(2)·mu... times 2 for
        // the pair ±i√2·mu; check the exact law instead of the fit alone.
        for (m, s) in scan.mu_samples.iter().zip(&scan.splittings) {
            assert!((s / (2.0 * 2f64.sqrt() * m) - 1.0).abs() < 1e-6, "{m} {s}");
        }
    }

    #[test]
    fn dispersion_rejects_bad_anchor_and_short_list() {
        assert!(dispersion_scan(0.5, 1.25, &[1e-3, 1e-2]).is_err());
        assert!(dispersion_scan(0.75, 1.25, &[1e-3]).is_err());
    }

    #[test]
    fn invariant_values_and_antisymmetry() {
        let w = topological_invariant((1.5, 0.0), (0.5, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(w, 1);
        let w0 = topological_invariant((1.5, 0.0), (1.8, 0.2), 0.0, 0.0).unwrap();
        assert_eq!(w0, 0);
        let wr = topological_invariant((0.5, 0.0), (1.5, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(wr, -1);
        assert!(topological_invariant((1.0, 0.0), (0.5, 0.0), 0.0, 0.0).is_err());
    }
}
