//! Fluorescence-count measurement model: per-level photoluminescence rates,
//! π-pulse permutation sequences, count simulation with optional Poisson
//! shot noise, and the polarization / population inversions.

use crate::error::CoreError;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

/// Measurement model: photoluminescence rate per level (counts/s), electron
/// polarization, and the shot-noise convention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// Photoluminescence rates L1..L6 in counts/s.
    pub l_cps: [f64; 6],
    /// Electron polarization S ∈ (0, 1].
    pub s: f64,
    pub shot_noise: bool,
    /// Number of repetitions averaged per data point.
    pub averages: u64,
    /// Photon-collection window per repetition (s); together with the rates
    /// this sets the photon budget that Poisson noise is drawn against.
    pub window_s: f64,
    pub seed: u64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        // Synthetic convention: m_S = 0 levels (2 and 5) bright, m_S = ±1 dim.
        // The rates are deliberately all distinct: exactly equal rates (e.g.
        // L2 == L5) make the inversion sequences lose rank.
        ReadoutModel {
            l_cps: [105.0e3, 150.0e3, 102.0e3, 99.0e3, 120.0e3, 108.0e3],
            s: 0.98,
            shot_noise: false,
            averages: 1_000_000,
            window_s: 3e-7,
            seed: 0,
        }
    }
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.l_cps.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(CoreError::InvalidParams("all rates must be positive".into()));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(CoreError::InvalidParams("polarization must be in (0, 1]".into()));
        }
        Ok(())
    }

    /// Polarized initial populations ((1−S)/2, S, (1−S)/2, 0, 0, 0).
    pub fn polarized_populations(&self) -> [f64; 6] {
        let q = (1.0 - self.s) / 2.0;
        [q, self.s, q, 0.0, 0.0, 0.0]
    }
}

/// A selective π pulse swapping two of the six levels (1-based labels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PiPulse {
    R12,
    R23,
    R25,
    R36,
    R45,
}

impl PiPulse {
    fn swap(self) -> (usize, usize) {
        match self {
            PiPulse::R12 => (0, 1),
            PiPulse::R23 => (1, 2),
            PiPulse::R25 => (1, 4),
            PiPulse::R36 => (2, 5),
            PiPulse::R45 => (3, 4),
        }
    }
}

/// An ordered π-pulse sequence; applied first-to-last to the populations.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PulseSeq(pub Vec<PiPulse>);

/// Compiles a sequence to its 6×6 permutation matrix (row-major [i][j]).
pub fn sequence_permutation(seq: &PulseSeq) -> [[f64; 6]; 6] {
    // Track where each level index ends up.
    let mut perm: [usize; 6] = [0, 1, 2, 3, 4, 5];
    for pulse in &seq.0 {
        let (a, b) = pulse.swap();
        perm.swap(a, b);
    }
    // M p must place old population of level j into its new slot: the swap
    // trace above already gives the composite mapping.
    let mut m = [[0.0; 6]; 6];
    for (i, &j) in perm.iter().enumerate() {
        m[i][j] = 1.0;
    }
    m
}

fn apply_perm(m: &[[f64; 6]; 6], p: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i] += m[i][j] * p[j];
        }
    }
    out
}

/// C = Lᵀ·(M·p) in counts/s; with shot noise, a Poisson draw against the
/// model's photon budget (rate·window·averages) converted back to a rate.
pub fn simulate_counts<R: Rng>(
    p: &[f64; 6],
    model: &ReadoutModel,
    seq: &PulseSeq,
    rng: Option<&mut R>,
) -> Result<f64, CoreError> {
    model.validate()?;
    if p.iter().any(|&x| x < -1e-12) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(CoreError::InvalidInput("populations must be >= 0 and sum to 1".into()));
    }
    let m = sequence_permutation(seq);
    let moved = apply_perm(&m, p);
    let mean: f64 = model.l_cps.iter().zip(&moved).map(|(l, q)| l * q).sum();
    if model.shot_noise {
        let rng = rng.ok_or_else(|| {
            CoreError::InvalidInput("shot noise requires a seeded generator".into())
        })?;
        let budget = model.window_s * model.averages as f64;
        let lambda = (mean * budget).max(1e-12);
        let draw = Poisson::new(lambda)
            .map_err(|e| CoreError::InvalidParams(format!("bad Poisson rate: {e}")))?
            .sample(rng);
        Ok(draw / budget)
    } else {
        Ok(mean)
    }
}

/// The five polarization sequences: 𝕀, R23, R25, R23+R36, R23+R25.
pub fn polarization_sequences() -> [PulseSeq; 5] {
    [
        PulseSeq(vec![]),
        PulseSeq(vec![PiPulse::R23]),
        PulseSeq(vec![PiPulse::R25]),
        PulseSeq(vec![PiPulse::R23, PiPulse::R36]),
        PulseSeq(vec![PiPulse::R23, PiPulse::R25]),
    ]
}

/// The five population sequences: 𝕀, R12, R23, R36+R23, R25.
pub fn population_sequences() -> [PulseSeq; 5] {
    [
        PulseSeq(vec![]),
        PulseSeq(vec![PiPulse::R12]),
        PulseSeq(vec![PiPulse::R23]),
        PulseSeq(vec![PiPulse::R36, PiPulse::R23]),
        PulseSeq(vec![PiPulse::R25]),
    ]
}

/// Polarization solve result.
#[derive(Debug, Clone)]
pub struct PolarizationSolution {
    pub s: f64,
    /// Recovered rates (L2, L3, L5, L6) in counts/s.
    pub l: [f64; 4],
    /// Condition number of the linear stage at the solution.
    pub condition: f64,
    /// Residual of the consistency equation at the solution.
    pub residual: f64,
}

/// Solves the five polarization equations for S and (L2, L3, L5, L6), given
/// the known level-1 rate for the constant background L1·(1−S)/2.
///
/// With q = (1−S)/2, the sequence differences C5−C2 = q(L5−L2) and
/// C3−C1 = S(L5−L2) give ρ = q/S directly, hence S = 1/(1+2ρ) in closed
/// form; the four rates then follow from the first four equations and the
/// fifth supplies a consistency residual.
pub fn solve_polarization(counts: &[f64; 5], l1: f64) -> Result<PolarizationSolution, CoreError> {
    if counts.iter().any(|&c| c <= 0.0) || l1 <= 0.0 {
        return Err(CoreError::InvalidInput("counts and L1 must be positive".into()));
    }
    let scale = counts.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()));
    let denom = counts[2] - counts[0];
    if denom.abs() < 1e-9 * scale.max(1.0) {
        return Err(CoreError::NoSolution(
            "polarization ratio undefined: sequences 1 and 3 coincide (L5 ≈ L2)".into(),
        ));
    }
    let rho = (counts[4] - counts[1]) / denom;
    let s = 1.0 / (1.0 + 2.0 * rho);
    if !s.is_finite() || s <= 0.0 || s > 1.0 + 1e-9 {
        return Err(CoreError::NoSolution(format!(
            "polarization root S = {s} outside (0, 1]"
        )));
    }
    let q = (1.0 - s) / 2.0;
    let bg = l1 * q;
    let y: Vec<f64> = counts.iter().map(|c| c - bg).collect();
    // y1 = S·L2 + q·L3 ; y2 = q·L2 + S·L3.
    let det = s * s - q * q;
    if det.abs() < 1e-12 || s.abs() < 1e-12 {
        return Err(CoreError::NoSolution(
            "polarization stage degenerate (S ≈ (1−S)/2)".into(),
        ));
    }
    let l2 = (s * y[0] - q * y[1]) / det;
    let l3 = (s * y[1] - q * y[0]) / det;
    let l5 = (y[2] - q * l3) / s;
    let l6 = (y[3] - q * l2) / s;
    let resid = y[4] - (s * l3 + q * l5);
    // Condition of the 2×2 stage (symmetric, eigenvalues s ± q).
    let cond = ((s + q).abs() / (s - q).abs()).max((s - q).abs() / (s + q).abs());
    Ok(PolarizationSolution {
        s,
        l: [l2, l3, l5, l6],
        condition: cond,
        residual: resid,
    })
}

/// Solves the five population equations plus Σp = 1 for the six populations.
pub fn solve_populations(counts: &[f64; 5], model: &ReadoutModel) -> Result<[f64; 6], CoreError> {
    model.validate()?;
    // Build the 6×6 system: rows LᵀM_m, then the all-ones constraint row.
    let seqs = population_sequences();
    let mut a = [[0.0f64; 6]; 6];
    let mut b = [0.0f64; 6];
    for (row, seq) in seqs.iter().enumerate() {
        let m = sequence_permutation(seq);
        for j in 0..6 {
            // (Lᵀ M)_j = Σ_i L_i M_ij
            a[row][j] = (0..6).map(|i| model.l_cps[i] * m[i][j]).sum();
        }
        b[row] = counts[row];
    }
    for j in 0..6 {
        a[5][j] = 1.0;
    }
    b[5] = 1.0;
    solve6(a, b)
}

/// Dense 6×6 Gaussian elimination with partial pivoting.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Result<[f64; 6], CoreError> {
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    for k in 0..6 {
        let (piv, mag) = (k..6)
            .map(|i| (i, a[i][k].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if mag < 1e-10 * scale.max(1.0) {
            return Err(CoreError::SingularSystem(
                "population system is singular (rates carry no level information)".into(),
            ));
        }
        a.swap(piv, k);
        b.swap(piv, k);
        for i in k + 1..6 {
            let f = a[i][k] / a[k][k];
            for j in k..6 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0f64; 6];
    for k in (0..6).rev() {
        let mut acc = b[k];
        for j in k + 1..6 {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Ok(x)
}
