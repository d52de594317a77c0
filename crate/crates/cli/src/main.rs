//! `el3`: command-line front end for the non-Hermitian spin-1 toolkit.
//!
//! Every pipeline stage is exposed as a subcommand with file-based output.
//! Frequencies are entered in human units (kHz for scaling factors, μs for
//! times) and converted to rad/s and seconds internally.
//!
//! Exit codes: 0 success, 2 usage, 3 domain error, 4 numerical failure.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use el3_core::dilation::{evolve_dilated, pulse_schedule, schedule_sidecar, schedule_to_csv};
use el3_core::dynamics::{
    conserved_psch, conserved_pt, eigenstate_triple, fidelity, labeled_eigenvalues,
    population_trace, trace_from_csv, trace_to_csv, EvolutionTrace,
};
use el3_core::ep::{
    classify_point, dispersion_scan, locus_to_csv, sheet_grid_to_csv, sweep_sheets,
    topological_invariant, trace_ep3_locus, Region,
};
use el3_core::error::CoreError;
use el3_core::model::{build_hamiltonian, ModelParams};
use el3_core::nv::{build_nv_levels, NVLevelsConfig};
use el3_core::retrieval::{
    estimates_json, eigenvalues_with_errors, fit_gamma_h, retrieve_mu, retrieve_nu,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Environment variable naming the default NV/readout config path.
const CONFIG_ENV: &str = "EL3_CONFIG";

#[derive(Parser)]
#[command(name = "el3", version, about = "Non-Hermitian spin-1 exceptional-line toolkit")]
struct Cli {
    /// Print the documented CSV/JSON schemas and exit.
    #[arg(long, global = true)]
    emit_schema: bool,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format where both are supported.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for any stochastic stage (required when noise is enabled).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// NV-levels JSON config (falls back to $EL3_CONFIG, then defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct PointArgs {
    /// Gain/loss strength γ (dimensionless).
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    /// Transverse field h (dimensionless).
    #[arg(long, allow_hyphen_values = true)]
    h: f64,
    /// Pseudo-chirality-breaking strength μ.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    /// PT-breaking strength ν.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    nu: f64,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    gamma_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    gamma_max: f64,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    h_min: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    h_max: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a parameter point by its resultant pattern.
    Classify {
        #[command(flatten)]
        point: PointArgs,
        /// Relative detection tolerance for |R1|, |R2|.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Sweep the three eigenvalue sheets over a (γ, h) rectangle.
    Sweep {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 200)]
        res_gamma: usize,
        #[arg(long, default_value_t = 200)]
        res_h: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        nu: f64,
    },
    /// Trace the third-order exceptional locus in a rectangle.
    Locus {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 400)]
        resolution: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        nu: f64,
    },
    /// Sign-crossing invariant W between two (γ, h) points.
    Invariant {
        #[arg(long, allow_hyphen_values = true)]
        gamma1: f64,
        #[arg(long, allow_hyphen_values = true)]
        h1: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma2: f64,
        #[arg(long, allow_hyphen_values = true)]
        h2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        nu: f64,
    },
    /// Eigenvalue-splitting exponent scan in μ at a locus anchor.
    Dispersion {
        #[arg(long, allow_hyphen_values = true)]
        h0: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma0: f64,
        #[arg(long, default_value_t = 1e-4)]
        mu_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        mu_max: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Non-unitary evolution: population trace, optionally via the
    /// Hermitian dilation.
    Evolve {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 40.0)]
        s_khz: f64,
        #[arg(long, default_value_t = 30.0)]
        tmax_us: f64,
        #[arg(long, default_value_t = 3000)]
        steps: usize,
        /// Initial state, three comma-separated re:im components.
        #[arg(long, default_value = "0:0,1:0,0:0")]
        psi: String,
        /// Measurement state (defaults to psi).
        #[arg(long)]
        phi: Option<String>,
        /// Evolve through the 6-level Hermitian dilation instead.
        #[arg(long)]
        dilated: bool,
        /// Dilation parameter η0 (with --dilated).
        #[arg(long, default_value_t = 0.5477225575051661)]
        eta0: f64,
    },
    /// Conserved-quantity time series for the slope-based retrieval.
    Conserved {
        #[command(flatten)]
        point: PointArgs,
        /// Which conserved quantity: the PT or the pseudo-chiral one.
        #[arg(long, value_enum)]
        kind: ConservedKind,
        /// Scaling factor in kHz (s1 or s2).
        #[arg(long)]
        s_khz: f64,
        #[arg(long, default_value_t = 1.0)]
        window_us: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Compile the six-channel pulse schedule for the dilated evolution.
    Pulses {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 40.0)]
        s_khz: f64,
        #[arg(long, default_value_t = 0.45)]
        tmax_us: f64,
        #[arg(long, default_value_t = 900)]
        steps: usize,
        #[arg(long, default_value_t = 0.5477225575051661)]
        eta0: f64,
    },
    /// Full parameter retrieval from trace and conserved-quantity files.
    Retrieve {
        /// First probe-trace CSV (ψ = φ = |0⟩ population pair).
        #[arg(long)]
        trace0: PathBuf,
        /// Second probe-trace CSV (superposition probe pair).
        #[arg(long)]
        trace1: PathBuf,
        /// PT conserved-quantity CSV (t_us,value).
        #[arg(long)]
        cpt: PathBuf,
        /// Pseudo-chiral conserved-quantity CSV (t_us,value).
        #[arg(long)]
        cpsch: PathBuf,
        #[arg(long, default_value_t = 40.0)]
        s_khz: f64,
        #[arg(long, default_value_t = 30.0)]
        s1_khz: f64,
        #[arg(long, default_value_t = 20.0)]
        s2_khz: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        guess_gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        guess_h: f64,
        /// Monte-Carlo samples for eigenvalue error bars (0 disables).
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
    },
    /// Eigenstate fidelity table at a parameter point.
    Eigenstates {
        #[command(flatten)]
        point: PointArgs,
        /// Shift for the middle (shift-invert) filter.
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConservedKind {
    Pt,
    Psch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.emit_schema {
        print!("{}", schema_text());
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: a subcommand is required (try --help)");
        return ExitCode::from(2);
    };
    match run(&cli, command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Maps error kinds onto the documented exit codes: 3 for domain errors
/// (bad inputs, out-of-window requests), 4 for numerical failures.
fn exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidParams(_)
        | CoreError::InvalidInput(_)
        | CoreError::MetricNotPositive { .. }
        | CoreError::WindowTooWide(_)
        | CoreError::SingularShift
        | CoreError::NoSolution(_)
        | CoreError::Io(_)
        | CoreError::Serde(_) => 3,
        CoreError::NormOverflow
        | CoreError::NoConvergence(_)
        | CoreError::StepTooCoarse(_)
        | CoreError::SingularSystem(_)
        | CoreError::DegenerateFit
        | CoreError::MatchingAmbiguous => 4,
    }
}

fn run(cli: &Cli, command: &Command) -> Result<(), CoreError> {
    match command {
        Command::Classify { point, tol } => {
            let p = params(point, TWO_PI * 40e3)?;
            let class = classify_point(&p, *tol);
            emit(cli, &serde_json::to_string_pretty(&class)?)
        }
        Command::Sweep {
            region,
            res_gamma,
            res_h,
            mu,
            nu,
        } => {
            let grid = sweep_sheets(to_region(region), (*res_gamma, *res_h), *mu, *nu)?;
            emit_table(cli, &sheet_grid_to_csv(&grid))
        }
        Command::Locus {
            region,
            resolution,
            mu,
            nu,
        } => {
            let locus = trace_ep3_locus(*mu, *nu, to_region(region), *resolution)?;
            emit_table(cli, &locus_to_csv(&locus, *mu, *nu))
        }
        Command::Invariant {
            gamma1,
            h1,
            gamma2,
            h2,
            mu,
            nu,
        } => {
            let w = topological_invariant((*gamma1, *h1), (*gamma2, *h2), *mu, *nu)?;
            emit(
                cli,
                &serde_json::to_string_pretty(&serde_json::json!({
                    "w": w,
                    "plus": {"gamma": gamma1, "h": h1},
                    "minus": {"gamma": gamma2, "h": h2},
                }))?,
            )
        }
        Command::Dispersion {
            h0,
            gamma0,
            mu_min,
            mu_max,
            points,
        } => {
            if *points < 2 || *mu_min <= 0.0 || *mu_max <= *mu_min {
                return Err(CoreError::InvalidInput(
                    "need points >= 2 and 0 < mu-min < mu-max".into(),
                ));
            }
            let mus: Vec<f64> = (0..*points)
                .map(|k| {
                    mu_min
                        * (mu_max / mu_min).powf(k as f64 / (*points as f64 - 1.0))
                })
                .collect();
            let scan = dispersion_scan(*h0, *gamma0, &mus)?;
            let samples: Vec<_> = scan
                .mu_samples
                .iter()
                .zip(&scan.splittings)
                .map(|(m, s)| serde_json::json!({"mu": m, "splitting": s}))
                .collect();
            emit(
                cli,
                &serde_json::to_string_pretty(&serde_json::json!({
                    "anchor": {"h": scan.anchor.0, "gamma": scan.anchor.1},
                    "fitted_exponent": scan.fitted_exponent,
                    "samples": samples,
                }))?,
            )
        }
        Command::Evolve {
            point,
            s_khz,
            tmax_us,
            steps,
            psi,
            phi,
            dilated,
            eta0,
        } => {
            let s = TWO_PI * s_khz * 1e3;
            let p = params(point, s)?;
            let ham = build_hamiltonian(&p);
            let psi_v = parse_state(psi)?;
            let trace: EvolutionTrace = if *dilated {
                let out = evolve_dilated(&ham, &psi_v, *eta0, s, tmax_us * 1e-6, *steps)?;
                out.projected
            } else {
                let phi_v = match phi {
                    Some(text) => parse_state(text)?,
                    None => psi_v,
                };
                population_trace(&ham, s, &psi_v, &phi_v, tmax_us * 1e-6, *steps)?
            };
            emit_table(cli, &trace_to_csv(&trace))
        }
        Command::Conserved {
            point,
            kind,
            s_khz,
            window_us,
            steps,
        } => {
            let s = TWO_PI * s_khz * 1e3;
            let p = params(point, s)?;
            let ham = build_hamiltonian(&p);
            let samples = match kind {
                ConservedKind::Pt => conserved_pt(&ham, s, window_us * 1e-6, *steps),
                ConservedKind::Psch => conserved_psch(&ham, s, window_us * 1e-6, *steps),
            };
            let mut out = String::from("t_us,value\n");
            for (t, v) in samples {
                out.push_str(&format!("{:.17e},{:.17e}\n", t * 1e6, v));
            }
            emit_table(cli, &out)
        }
        Command::Pulses {
            point,
            s_khz,
            tmax_us,
            steps,
            eta0,
        } => {
            let s = TWO_PI * s_khz * 1e3;
            let p = params(point, s)?;
            let ham = build_hamiltonian(&p);
            let nv = build_nv_levels(&load_nv_config(cli)?)?;
            let sched = pulse_schedule(&ham, &nv, *eta0, s, tmax_us * 1e-6, *steps)?;
            let sidecar = serde_json::to_string_pretty(&schedule_sidecar(&sched, &nv))?;
            match &cli.out {
                Some(path) => {
                    write_out(Some(path), &schedule_to_csv(&sched))?;
                    let mut meta = path.as_os_str().to_owned();
                    meta.push(".meta.json");
                    write_out(Some(Path::new(&meta)), &sidecar)?;
                    Ok(())
                }
                None => {
                    print!("{}", schedule_to_csv(&sched));
                    eprintln!("{sidecar}");
                    Ok(())
                }
            }
        }
        Command::Retrieve {
            trace0,
            trace1,
            cpt,
            cpsch,
            s_khz,
            s1_khz,
            s2_khz,
            guess_gamma,
            guess_h,
            mc_samples,
        } => {
            let s = TWO_PI * s_khz * 1e3;
            let s1 = TWO_PI * s1_khz * 1e3;
            let s2 = TWO_PI * s2_khz * 1e3;
            let t0 = trace_from_csv(&std::fs::read_to_string(trace0)?)?;
            let t1 = trace_from_csv(&std::fs::read_to_string(trace1)?)?;
            let cpt = read_pairs(cpt)?;
            let cpsch = read_pairs(cpsch)?;
            let nu_hat = retrieve_nu(&cpt, s1)?;
            let mu_hat = retrieve_mu(&cpsch, s2)?;
            let fit = fit_gamma_h(
                &[t0, t1],
                s,
                mu_hat.value,
                nu_hat.value,
                (*guess_gamma, *guess_h),
            )?;
            let eigs = if *mc_samples > 0 {
                let seed = cli.seed.ok_or_else(|| {
                    CoreError::InvalidInput("--seed is required with --mc-samples".into())
                })?;
                Some(eigenvalues_with_errors(
                    &[
                        fit.gamma.clone(),
                        fit.h.clone(),
                        mu_hat.clone(),
                        nu_hat.clone(),
                    ],
                    *mc_samples,
                    seed,
                )?)
            } else {
                None
            };
            let doc = estimates_json(&fit.gamma, &fit.h, &mu_hat, &nu_hat, eigs.as_ref());
            emit(cli, &serde_json::to_string_pretty(&doc)?)
        }
        Command::Eigenstates { point, alpha, tol } => {
            let p = params(point, TWO_PI * 40e3)?;
            // At an exceptional point the states coalesce and the filters
            // cannot separate them; report the degeneracy instead.
            let class = classify_point(&p, 1e-9);
            let labels = labeled_eigenvalues(&build_hamiltonian(&p));
            let labels_json: Vec<_> = labels
                .iter()
                .map(|e| serde_json::json!({"re": e.re, "im": e.im}))
                .collect();
            let degenerate = !matches!(class.kind, el3_core::ep::EPKind::Regular);
            let doc = if degenerate {
                serde_json::json!({
                    "kind": class.kind,
                    "degenerate": true,
                    "eigenvalues": labels_json,
                    "reason": "eigenstates coalesce at an exceptional point",
                })
            } else {
                match eigenstate_triple(&build_hamiltonian(&p), C64::new(*alpha, 0.0), *tol) {
                    Ok(states) => serde_json::json!({
                        "kind": class.kind,
                        "degenerate": false,
                        "eigenvalues": labels_json,
                        "fidelities": {
                            "f12": fidelity(&states[0], &states[1]),
                            "f13": fidelity(&states[0], &states[2]),
                            "f23": fidelity(&states[1], &states[2]),
                        },
                    }),
                    // Near-degenerate spectra outside the classifier's
                    // tolerance can still starve the power-iteration filters.
                    Err(CoreError::NoConvergence(why)) => serde_json::json!({
                        "kind": class.kind,
                        "degenerate": true,
                        "eigenvalues": labels_json,
                        "reason": why,
                    }),
                    Err(e) => return Err(e),
                }
            };
            emit(cli, &serde_json::to_string_pretty(&doc)?)
        }
    }
}

fn params(point: &PointArgs, s: f64) -> Result<ModelParams, CoreError> {
    ModelParams::new(point.gamma, point.h, point.mu, point.nu, s)
}

fn to_region(r: &RegionArgs) -> Region {
    Region {
        gamma_min: r.gamma_min,
        gamma_max: r.gamma_max,
        h_min: r.h_min,
        h_max: r.h_max,
    }
}

/// Parses "re:im,re:im,re:im" into a unit-normalized 3-vector.
fn parse_state(text: &str) -> Result<nalgebra::Vector3<C64>, CoreError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CoreError::InvalidInput(format!(
            "state needs 3 comma-separated components, got {}",
            parts.len()
        )));
    }
    let mut comps = [C64::new(0.0, 0.0); 3];
    for (slot, part) in comps.iter_mut().zip(&parts) {
        let (re, im) = match part.split_once(':') {
            Some((re, im)) => (re, im),
            None => (*part, "0"),
        };
        let re: f64 = re
            .trim()
            .parse()
            .map_err(|_| CoreError::InvalidInput(format!("bad component '{part}'")))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|_| CoreError::InvalidInput(format!("bad component '{part}'")))?;
        *slot = C64::new(re, im);
    }
    let v = nalgebra::Vector3::new(comps[0], comps[1], comps[2]);
    let n = v.norm();
    if n < 1e-12 {
        return Err(CoreError::InvalidInput("state must be nonzero".into()));
    }
    Ok(v / C64::new(n, 0.0))
}

/// Reads a two-column t_us,value CSV into (t_seconds, value) pairs.
fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>, CoreError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let t: f64 = cols
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| CoreError::InvalidInput(format!("bad CSV line {}", k + 1)))?;
        let v: f64 = cols
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| CoreError::InvalidInput(format!("bad CSV line {}", k + 1)))?;
        out.push((t * 1e-6, v));
    }
    if out.len() < 3 {
        return Err(CoreError::InvalidInput("need at least 3 CSV rows".into()));
    }
    Ok(out)
}

fn load_nv_config(cli: &Cli) -> Result<NVLevelsConfig, CoreError> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(NVLevelsConfig::default()),
    }
}

fn emit(cli: &Cli, payload: &str) -> Result<(), CoreError> {
    write_out(cli.out.as_deref(), payload)
}

/// Emits a tabular payload, honoring `--format json` by re-encoding the
/// CSV as a {"columns", "rows"} document.
fn emit_table(cli: &Cli, csv: &str) -> Result<(), CoreError> {
    match cli.format {
        Format::Csv => emit(cli, csv),
        Format::Json => emit(cli, &serde_json::to_string_pretty(&csv_to_json_table(csv))?),
    }
}

fn write_out(path: Option<&Path>, payload: &str) -> Result<(), CoreError> {
    let mut payload = payload.to_string();
    if !payload.ends_with('\n') {
        payload.push('\n');
    }
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(payload.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn schema_text() -> String {
    let mut s = String::new();
    s.push_str("# Output schemas\n\n");
    s.push_str("Tabular outputs honor --format json as ");
    s.push_str("{\"columns\": [...], \"rows\": [[...], ...]}.\n\n");
    s.push_str("## sweep (CSV)\n");
    s.push_str("gamma,h,re_E1,im_E1,re_E2,im_E2,re_E3,im_E3,branch_flag\n\n");
    s.push_str("## locus (CSV)\n");
    s.push_str("gamma,h,r1_residual\n\n");
    s.push_str("## evolve / traces (CSV)\n");
    s.push_str("t_us,p0,norm,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3\n\n");
    s.push_str("## conserved (CSV)\n");
    s.push_str("t_us,value\n\n");
    s.push_str("## pulses (CSV + JSON sidecar)\n");
    s.push_str("t_us, then omega_<chan>_kHz,phi_<chan>_rad,carrier_<chan>_MHz per ");
    s.push_str("channel (MW1, MW2, MW3, MW4, EF1, EF2)\n");
    s.push_str("sidecar '<out>.meta.json': {\"eta0\", \"s_rad_per_s\", \"nv_levels\"}\n\n");
    s.push_str("## retrieve (JSON)\n");
    s.push_str("{\"gamma\": {\"value\", \"sigma\"}, \"h\": {..}, \"mu\": {..}, \"nu\": {..},\n");
    s.push_str(" \"eigenvalues\": [{\"re\", \"im\", \"re_std\", \"im_std\"}], \"degenerate\": bool}\n\n");
    s.push_str("## NV config (JSON, all optional with defaults)\n");
    s.push_str("{\"d_hz\", \"q_hz\", \"a_hz\", \"b_gauss\", \"gamma_e_hz_per_gauss\", \"gamma_n_hz_per_gauss\"}\n");
    s
}

/// Converts a header-plus-rows CSV payload into its JSON table form
/// {"columns": [...], "rows": [[...], ...]} for `--format json`.
fn csv_to_json_table(csv: &str) -> serde_json::Value {
    let mut lines = csv.lines();
    let columns: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rows: Vec<serde_json::Value> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|cell| match cell.trim().parse::<f64>() {
                    Ok(x) => serde_json::json!(x),
                    Err(_) => serde_json::json!(cell.trim()),
                })
                .collect()
        })
        .collect();
    serde_json::json!({"columns": columns, "rows": rows})
}
