//! From detection records to an expectation-value estimate.
//!
//! The protected polarization never collapses across the run, so the whole
//! ensemble's information sits in one number: the mean transverse shift,
//! which equals N kappa <O> to first order in the coupling. Inverting that
//! relation is the entire estimator — no tomography, no per-photon readout
//! of polarization. The competing strategy measures O projectively on each
//! photon and pays the full quantum variance 1 - <O>^2; comparing the two
//! at a matched *sent*-photon budget (losses included, since protection
//! losses are intrinsic) is what the sweep table is for.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loop_sim::{calibrate_zero_position, run_ensemble, Fate, ImagerConfig, LoopConfig, TrialOutcome};
use crate::zeno::{lattice_survival, lattice_weights, ZenoParams};

/// How an estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ProtectiveZeno,
    ProjectiveBaseline,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ProtectiveZeno => "protective_zeno",
            Method::ProjectiveBaseline => "projective_baseline",
        }
    }
}

/// Point estimate of <O> with its uncertainty and the photon accounting
/// needed to compare methods fairly. `o_hat` is clamped to the physical
/// range [-1, 1]; `o_hat_raw` keeps the unclamped inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub o_hat: f64,
    pub o_hat_raw: f64,
    /// Standard error of the mean estimate (infinite for a single count).
    pub std_error: f64,
    pub n_used: usize,
    pub n_sent: usize,
    pub survival_fraction: f64,
    pub method: Method,
}

/// Invert the mean shift: o_hat = (mean(detections) - zero) / (N kappa).
///
/// `detections` are imager readings (any frame, as long as `zero` is the
/// calibrated no-shift reading in the same frame); `n_sent` is the total
/// photon budget, kept for survival accounting.
pub fn estimate_expectation(
    detections: &[f64],
    zero: f64,
    n_steps: usize,
    kappa: f64,
    n_sent: usize,
) -> Result<EstimateReport> {
    if detections.is_empty() {
        return Err(Error::InsufficientData);
    }
    if n_steps < 1 {
        return Err(Error::invalid("n_steps", "must be >= 1"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid("kappa", format!("must be > 0, got {kappa}")));
    }
    if n_sent < detections.len() {
        return Err(Error::invalid("n_sent", "cannot be smaller than the detection count"));
    }
    let n = detections.len();
    let scale = n_steps as f64 * kappa;
    let mean = detections.iter().sum::<f64>() / n as f64;
    let o_hat_raw = (mean - zero) / scale;
    let std_error = if n > 1 {
        let var = detections.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt() / scale
    } else {
        f64::INFINITY
    };
    Ok(EstimateReport {
        o_hat: o_hat_raw.clamp(-1.0, 1.0),
        o_hat_raw,
        std_error,
        n_used: n,
        n_sent,
        survival_fraction: n as f64 / n_sent as f64,
        method: Method::ProtectiveZeno,
    })
}

/// Strong-measurement baseline: `n_photons` ideal projective measurements
/// of O, each destroying its photon and yielding +/-1 with the Born
/// probabilities. Every photon counts as used.
pub fn projective_baseline(theta: f64, n_photons: usize, seed: u64) -> Result<EstimateReport> {
    if n_photons < 1 {
        return Err(Error::invalid("n_photons", "must be >= 1"));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid("theta", format!("must be in [0, pi/2], got {theta}")));
    }
    let p_plus = theta.cos().powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..n_photons {
        let u: f64 = rng.gen();
        sum += if u < p_plus { 1.0 } else { -1.0 };
    }
    let n = n_photons as f64;
    let mean = sum / n;
    let std_error = if n_photons > 1 {
        // Sample variance of +/-1 outcomes: n/(n-1) * (1 - mean^2).
        let var = (n / (n - 1.0)) * (1.0 - mean * mean).max(0.0);
        (var / n).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(EstimateReport {
        o_hat: mean.clamp(-1.0, 1.0),
        o_hat_raw: mean,
        std_error,
        n_used: n_photons,
        n_sent: n_photons,
        survival_fraction: 1.0,
        method: Method::ProjectiveBaseline,
    })
}

/// Imager readings (true landing position plus mounting offset) of the
/// photons the camera counted as signal.
pub fn detected_true_readings(outcomes: &[TrialOutcome], imager: &ImagerConfig, include_ungated: bool) -> Vec<f64> {
    outcomes
        .iter()
        .filter(|o| {
            o.fate == Fate::Detected
                || (include_ungated && o.fate == Fate::PrematureExitDetectedUngated)
        })
        .filter_map(|o| o.true_position.map(|x| x + imager.center_offset))
        .collect()
}

/// Pixel-center readings of the counted photons: same selection as
/// [`detected_true_readings`] but quantized by the camera geometry.
pub fn detected_pixel_readings(outcomes: &[TrialOutcome], imager: &ImagerConfig, include_ungated: bool) -> Vec<f64> {
    outcomes
        .iter()
        .filter(|o| {
            o.fate == Fate::Detected
                || (include_ungated && o.fate == Fate::PrematureExitDetectedUngated)
        })
        .filter_map(|o| o.pixel_index.map(|i| imager.pixel_center(i)))
        .collect()
}

/// Parameter grid for a sweep; rows are produced in nested order with
/// `n_list` outermost, then `xi_list`, then `theta_list`.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub n_list: Vec<usize>,
    pub xi_list: Vec<f64>,
    pub theta_list: Vec<f64>,
    pub photons_per_cell: usize,
}

/// One sweep cell: protocol parameters, exact and sampled survival, the
/// protective estimate, and the projective baseline at the same sent-photon
/// budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_steps: usize,
    pub xi: f64,
    pub theta: f64,
    pub photons_sent: usize,
    pub detected: usize,
    pub exact_survival: f64,
    pub mc_survival: f64,
    pub o_hat: f64,
    pub std_error: f64,
    pub baseline_std_error: f64,
}

/// SplitMix64 finalizer; decorrelates per-cell seeds derived from the run
/// seed and the cell index.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn cell_seed(seed: u64, cell_index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(cell_index.wrapping_add(1)))
}

/// Run the full grid. Each cell reuses `base` for everything but the
/// protocol parameters, runs its own ensemble on a decorrelated seed, and
/// estimates <O> from the true-position readings of detected photons.
/// Cells with zero detections report NaN estimates rather than failing.
pub fn sweep(base: &LoopConfig, grid: &SweepGrid, seed: u64) -> Result<Vec<SweepRow>> {
    if grid.n_list.is_empty() || grid.xi_list.is_empty() || grid.theta_list.is_empty() {
        return Err(Error::invalid("grid", "all three parameter lists must be nonempty"));
    }
    if grid.photons_per_cell < 1 {
        return Err(Error::invalid("photons_per_cell", "must be >= 1"));
    }
    let mut rows = Vec::with_capacity(grid.n_list.len() * grid.xi_list.len() * grid.theta_list.len());
    let mut idx = 0u64;
    for &n in &grid.n_list {
        for &xi in &grid.xi_list {
            for &theta in &grid.theta_list {
                let zeno = ZenoParams::with_geometry(theta, xi, n, base.zeno.sigma, base.zeno.x0)?;
                let mut cfg = base.clone();
                cfg.zeno = zeno;
                cfg.n_target = n;
                cfg.max_cycles = cfg.max_cycles.max(4 * n + 8);
                cfg.validate()?;

                let s = cell_seed(seed, idx);
                let record = run_ensemble(&cfg, grid.photons_per_cell, s)?;
                let detected = record.summary.detected;
                let readings = detected_true_readings(&record.outcomes, &cfg.imager, false);
                let zero = calibrate_zero_position(&cfg);
                let (o_hat, std_error) = if readings.is_empty() || cfg.zeno.kappa() == 0.0 {
                    (f64::NAN, f64::NAN)
                } else {
                    let est = estimate_expectation(
                        &readings,
                        zero,
                        n,
                        cfg.zeno.kappa(),
                        grid.photons_per_cell,
                    )?;
                    (est.o_hat, est.std_error)
                };
                let baseline =
                    projective_baseline(theta, grid.photons_per_cell, splitmix64(s))?;
                rows.push(SweepRow {
                    n_steps: n,
                    xi,
                    theta,
                    photons_sent: grid.photons_per_cell,
                    detected,
                    exact_survival: lattice_survival(&lattice_weights(n, theta), xi),
                    mc_survival: detected as f64 / grid.photons_per_cell as f64,
                    o_hat,
                    std_error,
                    baseline_std_error: baseline.std_error,
                });
                idx += 1;
            }
        }
    }
    Ok(rows)
}
