//! Monte Carlo simulation of the optical storage loop, photon by photon.
//!
//! A heralded photon enters through the entry polarizing beam splitter and
//! is trapped on the vertical rail: the first Pockels cell rotates its
//! polarization by 90° once, and each round trip then runs
//!
//! ```text
//! PBS -> (PC1, first pass) -> HWP1 -> BC shift -> PL -> HWP2
//!     -> [reinforcement PL] -> (PC2, final pass) -> PBS
//! ```
//!
//! HWP1 maps the rail polarization onto the protected state, the
//! birefringent crystal entangles polarization with transverse position
//! (+kappa for H, -kappa for V), and the protection polarizer projects back.
//! After the target number of trips PC2 rotates the rail back so the photon
//! transmits out to a time-gated pixel imager.
//!
//! Everything that can go wrong is a [`Fate`], not an error: absorption at
//! a polarizer, in-loop loss, and premature exits through beam-splitter
//! cross-talk. Trials are independent given disjoint RNG substreams keyed
//! by (seed, trial index), so ensembles are reproducible bit for bit
//! regardless of how many worker threads run them.
//!
//! When every jitter is switched off and the Pockels cells are reliable,
//! all surviving trajectories are identical, so the per-cycle protection
//! probabilities and conditional spatial states can be precomputed from the
//! exact lattice engine once per ensemble; the fallback path evolves the
//! polarization and the Gaussian mixture explicitly and is used whenever
//! any per-cycle randomness perturbs the state itself.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{
    merge_and_prune, GaussianComponent, GaussianMixture, DEFAULT_AMP_FLOOR,
};
use crate::polarization::{
    hwp, pbs_route, polarizer_project, rotate, PolarizationState, Port,
};
use crate::sampling::PositionSampler;
use crate::zeno::{lattice_survival, lattice_weights, unnormalized_lattice_mixture, ZenoParams};

/// Imperfection parameters of the loop optics. All fields default to the
/// ideal value; probabilities live in [0, 1] and jitter widths are standard
/// deviations of zero-mean Gaussian perturbations resampled every cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Probability that the beam splitter routes a photon out the wrong port.
    pub pbs_crosstalk: f64,
    /// Per-round-trip absorption probability, lumped over all in-loop optics.
    pub per_pass_loss: f64,
    /// Angle jitter of both half-wave plates (radians, axis angle).
    pub hwp_angle_jitter_sd: f64,
    /// Angle jitter of the protection (and reinforcement) polarizers.
    pub polarizer_angle_jitter_sd: f64,
    /// Relative jitter of the per-cycle displacement, as a fraction of kappa.
    pub displacement_jitter_sd: f64,
    /// Probability that a Pockels cell fails to rotate when activated.
    pub pockels_failure: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            pbs_crosstalk: 0.0,
            per_pass_loss: 0.0,
            hwp_angle_jitter_sd: 0.0,
            polarizer_angle_jitter_sd: 0.0,
            displacement_jitter_sd: 0.0,
            pockels_failure: 0.0,
        }
    }
}

impl NoiseConfig {
    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("pbs_crosstalk", self.pbs_crosstalk),
            ("per_pass_loss", self.per_pass_loss),
            ("pockels_failure", self.pockels_failure),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, format!("probability must be in [0, 1], got {p}")));
            }
        }
        for (name, sd) in [
            ("hwp_angle_jitter_sd", self.hwp_angle_jitter_sd),
            ("polarizer_angle_jitter_sd", self.polarizer_angle_jitter_sd),
            ("displacement_jitter_sd", self.displacement_jitter_sd),
        ] {
            if !(sd >= 0.0) || !sd.is_finite() {
                return Err(Error::invalid(name, format!("standard deviation must be >= 0, got {sd}")));
            }
        }
        Ok(())
    }

    /// True when no per-cycle randomness perturbs the quantum state itself,
    /// so every surviving trajectory follows the exact lattice evolution.
    pub fn is_schedule_stable(&self) -> bool {
        self.hwp_angle_jitter_sd == 0.0
            && self.polarizer_angle_jitter_sd == 0.0
            && self.displacement_jitter_sd == 0.0
            && self.pockels_failure == 0.0
    }
}

/// One-dimensional cross-section of the pixel array. Readings are in the
/// imager frame: `reading = position + center_offset`, with the array
/// centered on reading zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagerConfig {
    pub pixel_count: u32,
    pub pixel_pitch: f64,
    /// Mounting offset added to the physical transverse position.
    pub center_offset: f64,
}

impl Default for ImagerConfig {
    fn default() -> Self {
        Self {
            pixel_count: 32,
            pixel_pitch: 0.25,
            center_offset: 0.0,
        }
    }
}

impl ImagerConfig {
    fn validate(&self) -> Result<()> {
        if self.pixel_count < 1 {
            return Err(Error::invalid("pixel_count", "must be >= 1"));
        }
        if !(self.pixel_pitch > 0.0) || !self.pixel_pitch.is_finite() {
            return Err(Error::invalid("pixel_pitch", format!("must be > 0, got {}", self.pixel_pitch)));
        }
        if !self.center_offset.is_finite() {
            return Err(Error::invalid("center_offset", "must be finite"));
        }
        Ok(())
    }

    fn left_edge(&self) -> f64 {
        -0.5 * self.pixel_count as f64 * self.pixel_pitch
    }

    /// Pixel hit by a photon at physical position `x` (hits beyond the array
    /// are assigned to the edge pixel).
    pub fn pixel_index(&self, x: f64) -> u32 {
        let reading = x + self.center_offset;
        let raw = ((reading - self.left_edge()) / self.pixel_pitch).floor();
        raw.clamp(0.0, (self.pixel_count - 1) as f64) as u32
    }

    /// Center of pixel `index`, in the imager reading frame.
    pub fn pixel_center(&self, index: u32) -> f64 {
        self.left_edge() + (index as f64 + 0.5) * self.pixel_pitch
    }
}

/// Full parameter set for one loop experiment.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub zeno: ZenoParams,
    /// Round-trip time (arbitrary units).
    pub loop_period: f64,
    /// Designed number of round trips; must equal `zeno.n_steps`.
    pub n_target: usize,
    /// Half-width of the imager time gate around `n_target * loop_period`.
    pub gate_halfwidth: f64,
    /// When false the imager records off-gate arrivals too (they become
    /// [`Fate::PrematureExitDetectedUngated`] instead of being rejected).
    pub time_gating: bool,
    /// Hard cap on circulations: a photon still trapped after this many
    /// round trips (possible when PC2 misfires) counts as absorbed in-loop.
    pub max_cycles: usize,
    pub imager: ImagerConfig,
    pub noise: NoiseConfig,
    /// Extra polarizer just before PC2 that re-purifies the rail
    /// polarization every cycle.
    pub reinforcement_polarizer: bool,
}

impl LoopConfig {
    /// Ideal loop around the given protocol parameters: unit round-trip
    /// time, quarter-period gate, no noise, no reinforcement polarizer.
    pub fn new(zeno: ZenoParams) -> Self {
        Self {
            zeno,
            loop_period: 1.0,
            n_target: zeno.n_steps,
            gate_halfwidth: 0.25,
            time_gating: true,
            max_cycles: 4 * zeno.n_steps + 8,
            imager: ImagerConfig::default(),
            noise: NoiseConfig::default(),
            reinforcement_polarizer: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.zeno.validate()?;
        if self.n_target < 1 {
            return Err(Error::invalid("n_target", "loop needs at least one round trip"));
        }
        if self.n_target != self.zeno.n_steps {
            return Err(Error::invalid(
                "n_target",
                format!("must equal zeno.n_steps ({} vs {})", self.n_target, self.zeno.n_steps),
            ));
        }
        if !(self.loop_period > 0.0) || !self.loop_period.is_finite() {
            return Err(Error::invalid("loop_period", "must be > 0"));
        }
        if !(self.gate_halfwidth >= 0.0) || self.gate_halfwidth >= 0.5 * self.loop_period {
            return Err(Error::invalid(
                "gate_halfwidth",
                "gates of adjacent cycles must not overlap (need 0 <= halfwidth < period/2)",
            ));
        }
        if self.max_cycles < self.n_target {
            return Err(Error::invalid("max_cycles", "must be >= n_target"));
        }
        self.imager.validate()?;
        self.noise.validate()
    }
}

/// What finally happened to one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    /// Arrived at the imager inside the time gate with a recorded pixel.
    Detected,
    /// Absorbed by the protection (or reinforcement) polarizer.
    AbsorbedAtPolarizer,
    /// Lost to in-loop absorption, or trapped past `max_cycles`.
    AbsorbedInLoop,
    /// Left the loop outside the gate (or never entered it at all, for
    /// entry cross-talk) and was discarded.
    PrematureExitRejected,
    /// Left the loop outside the gate but was recorded anyway because time
    /// gating was disabled.
    PrematureExitDetectedUngated,
}

impl Fate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Fate::Detected => "detected",
            Fate::AbsorbedAtPolarizer => "absorbed_at_polarizer",
            Fate::AbsorbedInLoop => "absorbed_in_loop",
            Fate::PrematureExitRejected => "premature_exit_rejected",
            Fate::PrematureExitDetectedUngated => "premature_exit_detected_ungated",
        }
    }
}

/// Per-photon record. Spatial fields are present only when the photon
/// actually reached the imager plane; the pixel only when the camera
/// recorded the hit. `polarization_error` is the angle between the
/// pre-exit polarization and the nominal output rail, kept for detected
/// photons to quantify how well the loop preserved the polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub fate: Fate,
    pub cycles_completed: u32,
    pub arrival_time: f64,
    pub true_position: Option<f64>,
    pub pixel_index: Option<u32>,
    pub polarization_error: Option<f64>,
}

/// Ensemble result: every trial in submission order plus summary counts.
#[derive(Debug, Clone)]
pub struct EnsembleRecord {
    pub outcomes: Vec<TrialOutcome>,
    pub summary: EnsembleSummary,
}

/// Counts always sum to the number of photons sent. The means run over
/// detected photons only (pixel positions are in the imager reading frame).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub n_photons: usize,
    pub detected: usize,
    pub absorbed_at_polarizer: usize,
    pub absorbed_in_loop: usize,
    pub premature_rejected: usize,
    pub premature_detected_ungated: usize,
    pub mean_pixel_position: Option<f64>,
    pub mean_true_position: Option<f64>,
    pub mean_polarization_error: Option<f64>,
}

impl EnsembleSummary {
    pub fn from_outcomes(imager: &ImagerConfig, outcomes: &[TrialOutcome]) -> Self {
        let mut s = Self {
            n_photons: outcomes.len(),
            detected: 0,
            absorbed_at_polarizer: 0,
            absorbed_in_loop: 0,
            premature_rejected: 0,
            premature_detected_ungated: 0,
            mean_pixel_position: None,
            mean_true_position: None,
            mean_polarization_error: None,
        };
        let (mut pix, mut pos, mut err) = (0.0, 0.0, 0.0);
        for o in outcomes {
            match o.fate {
                Fate::Detected => {
                    s.detected += 1;
                    if let Some(i) = o.pixel_index {
                        pix += imager.pixel_center(i);
                    }
                    if let Some(x) = o.true_position {
                        pos += x;
                    }
                    if let Some(e) = o.polarization_error {
                        err += e;
                    }
                }
                Fate::AbsorbedAtPolarizer => s.absorbed_at_polarizer += 1,
                Fate::AbsorbedInLoop => s.absorbed_in_loop += 1,
                Fate::PrematureExitRejected => s.premature_rejected += 1,
                Fate::PrematureExitDetectedUngated => s.premature_detected_ungated += 1,
            }
        }
        if s.detected > 0 {
            let n = s.detected as f64;
            s.mean_pixel_position = Some(pix / n);
            s.mean_true_position = Some(pos / n);
            s.mean_polarization_error = Some(err / n);
        }
        s
    }
}

// --- trial simulation ----------------------------------------------------

/// Rail polarizations: the photon circulates vertically polarized and
/// leaves horizontally polarized after PC2 fires.
fn hwp1_axis(theta: f64) -> f64 {
    // Maps V onto cos(theta) H + sin(theta) V (and back, being an involution).
    FRAC_PI_4 + 0.5 * theta
}

fn polarization_error_from_h(state: &PolarizationState) -> f64 {
    let norm = state.squared_norm().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    (state.amp_v.norm() / norm).clamp(0.0, 1.0).asin()
}

fn gate_accepts(cfg: &LoopConfig, cycles: usize) -> bool {
    let dt = (cycles as f64 - cfg.n_target as f64) * cfg.loop_period;
    dt.abs() <= cfg.gate_halfwidth
}

/// Classify an imager arrival after `cycles` round trips and sample its
/// landing position through one uniform draw.
fn imager_arrival<R: Rng>(
    cfg: &LoopConfig,
    cycles: usize,
    sampler: &PositionSampler,
    pre_exit_pol: &PolarizationState,
    rng: &mut R,
) -> TrialOutcome {
    let x = sampler.sample(rng);
    let gated_in = gate_accepts(cfg, cycles);
    let (fate, pixel, pol_err) = if gated_in {
        (
            Fate::Detected,
            Some(cfg.imager.pixel_index(x)),
            Some(polarization_error_from_h(pre_exit_pol)),
        )
    } else if cfg.time_gating {
        (Fate::PrematureExitRejected, None, None)
    } else {
        (
            Fate::PrematureExitDetectedUngated,
            Some(cfg.imager.pixel_index(x)),
            None,
        )
    };
    TrialOutcome {
        fate,
        cycles_completed: cycles as u32,
        arrival_time: cycles as f64 * cfg.loop_period,
        true_position: Some(x),
        pixel_index: pixel,
        polarization_error: pol_err,
    }
}

fn absorbed(fate: Fate, cycles_completed: usize, cfg: &LoopConfig) -> TrialOutcome {
    TrialOutcome {
        fate,
        cycles_completed: cycles_completed as u32,
        arrival_time: cycles_completed as f64 * cfg.loop_period,
        true_position: None,
        pixel_index: None,
        polarization_error: None,
    }
}

/// Simulate one heralded photon, evolving polarization and spatial mixture
/// explicitly. This is the reference path: it handles every noise process,
/// at the cost of per-cycle mixture algebra.
///
/// The per-cycle draw order is fixed regardless of configuration flags
/// (disabled elements still consume their draws), so outcome streams stay
/// aligned when a single flag is toggled on the same seed.
pub fn run_trial<R: Rng>(cfg: &LoopConfig, rng: &mut R) -> Result<TrialOutcome> {
    cfg.validate()?;
    Ok(trial_general(cfg, rng))
}

fn trial_general<R: Rng>(cfg: &LoopConfig, rng: &mut R) -> TrialOutcome {
    let noise = &cfg.noise;
    let theta = cfg.zeno.theta;
    let kappa = cfg.zeno.kappa();
    let sigma = cfg.zeno.sigma;
    // Merge tolerance: displacement jitter spreads lattice sites into
    // clusters of width ~ kappa * sd per cycle; collapse anything well
    // inside a site spacing, and always collapse exact duplicates.
    let merge_tol = (8.0 * kappa * noise.displacement_jitter_sd)
        .clamp(1e-9 * sigma, (0.5 * kappa).max(1e-9 * sigma));

    // Entry beam splitter: cross-talk reflects the photon away from the
    // loop entirely (it exits through the unused port, so it can never be
    // recorded, gated or not).
    let (port, mut pol) =
        pbs_route(&PolarizationState::horizontal(), noise.pbs_crosstalk, rng).expect("valid eps");
    if port == Port::Reflect {
        return TrialOutcome {
            fate: Fate::PrematureExitRejected,
            cycles_completed: 0,
            arrival_time: 0.0,
            true_position: None,
            pixel_index: None,
            polarization_error: None,
        };
    }

    let mut mix = GaussianMixture::single(sigma, cfg.zeno.x0).expect("validated sigma");
    for cycle in 1..=cfg.max_cycles {
        if cycle == 1 {
            // PC1 traps the photon by rotating the entry polarization onto
            // the circulating rail; on failure the photon continues
            // horizontally polarized and the protection polarizer will see
            // an (almost exactly) orthogonal state.
            let u: f64 = rng.gen();
            if u >= noise.pockels_failure {
                pol = rotate(&pol, FRAC_PI_2);
            }
        }

        let u_loss: f64 = rng.gen();
        if u_loss < noise.per_pass_loss {
            return absorbed(Fate::AbsorbedInLoop, cycle - 1, cfg);
        }

        // HWP1: rail -> protected state.
        let j_hwp1: f64 = rng.sample(StandardNormal);
        pol = hwp(&pol, hwp1_axis(theta) + noise.hwp_angle_jitter_sd * j_hwp1);

        // Birefringent crystal: +shift for H, -shift for V, entangling
        // polarization with position.
        let j_disp: f64 = rng.sample(StandardNormal);
        let kappa_cycle = kappa * (1.0 + noise.displacement_jitter_sd * j_disp);

        // Protection polarizer at the prepared angle: the passing amplitude
        // recombines the two shifted spatial branches.
        let j_pl: f64 = rng.sample(StandardNormal);
        let chi = theta + noise.polarizer_angle_jitter_sd * j_pl;
        let mut comps: Vec<GaussianComponent> = Vec::with_capacity(2 * mix.len());
        let (w_plus, w_minus) = (pol.amp_h * chi.cos(), pol.amp_v * chi.sin());
        for c in mix.components() {
            comps.push(GaussianComponent::new(c.amplitude * w_plus, c.center + kappa_cycle));
        }
        for c in mix.components() {
            comps.push(GaussianComponent::new(c.amplitude * w_minus, c.center - kappa_cycle));
        }
        let combined = GaussianMixture::new(sigma, comps).expect("validated sigma");
        let pass_prob = combined.squared_norm().min(1.0);
        let u_pl: f64 = rng.gen();
        if u_pl >= pass_prob {
            return absorbed(Fate::AbsorbedAtPolarizer, cycle - 1, cfg);
        }
        let renorm = combined.scaled((1.0 / pass_prob.sqrt()).into());
        mix = merge_and_prune(&renorm, merge_tol, DEFAULT_AMP_FLOOR)
            .expect("merge of nonempty mixture")
            .mixture;
        pol = PolarizationState {
            amp_h: chi.cos().into(),
            amp_v: chi.sin().into(),
        };

        // HWP2: protected state -> rail.
        let j_hwp2: f64 = rng.sample(StandardNormal);
        pol = hwp(&pol, hwp1_axis(theta) + noise.hwp_angle_jitter_sd * j_hwp2);

        // Reinforcement polarizer (vertical rail axis). The draws are
        // consumed even when the element is absent, keeping streams aligned
        // between configurations that differ only in this flag.
        let j_reinf: f64 = rng.sample(StandardNormal);
        let u_reinf: f64 = rng.gen();
        if cfg.reinforcement_polarizer {
            let axis = FRAC_PI_2 + noise.polarizer_angle_jitter_sd * j_reinf;
            let (projected, prob) = match polarizer_project(&pol, axis) {
                Ok(r) => r,
                // Polarization exactly orthogonal to the reinforcement axis.
                Err(_) => return absorbed(Fate::AbsorbedAtPolarizer, cycle - 1, cfg),
            };
            if u_reinf >= prob {
                return absorbed(Fate::AbsorbedAtPolarizer, cycle - 1, cfg);
            }
            pol = projected;
        }

        // PC2 fires once, on the designed final pass.
        if cycle == cfg.n_target {
            let u: f64 = rng.gen();
            if u >= noise.pockels_failure {
                pol = rotate(&pol, FRAC_PI_2);
            }
        }

        let pre_exit_pol = pol.clone();
        let (port, collapsed) =
            pbs_route(&pol, noise.pbs_crosstalk, rng).expect("valid eps");
        if port == Port::Transmit {
            let sampler = PositionSampler::new(&mix).expect("nonempty mixture");
            return imager_arrival(cfg, cycle, &sampler, &pre_exit_pol, rng);
        }
        pol = collapsed;
    }

    absorbed(Fate::AbsorbedInLoop, cfg.max_cycles, cfg)
}

// --- schedule-stable fast path -------------------------------------------

/// Precomputed per-cycle quantities for noise settings where the quantum
/// state evolution is deterministic (only routing decisions are random).
struct ScheduleCache {
    /// survivals[k] = exact probability of passing the first k protections.
    survivals: Vec<OnceLock<f64>>,
    /// Inverse-CDF samplers of the conditional position density after k cycles.
    samplers: Vec<OnceLock<PositionSampler>>,
    /// Polarization just before the exit beam splitter on the designed pass.
    pre_exit_pol: PolarizationState,
}

impl ScheduleCache {
    fn new(cfg: &LoopConfig) -> Self {
        Self {
            survivals: (0..=cfg.max_cycles).map(|_| OnceLock::new()).collect(),
            samplers: (0..=cfg.max_cycles).map(|_| OnceLock::new()).collect(),
            pre_exit_pol: rotate(&PolarizationState::vertical(), FRAC_PI_2),
        }
    }

    fn survival(&self, cfg: &LoopConfig, k: usize) -> f64 {
        *self.survivals[k].get_or_init(|| {
            if k == 0 {
                1.0
            } else {
                lattice_survival(&lattice_weights(k, cfg.zeno.theta), cfg.zeno.xi)
            }
        })
    }

    fn pass_prob(&self, cfg: &LoopConfig, cycle: usize) -> f64 {
        self.survival(cfg, cycle) / self.survival(cfg, cycle - 1)
    }

    fn sampler(&self, cfg: &LoopConfig, k: usize) -> &PositionSampler {
        self.samplers[k].get_or_init(|| {
            PositionSampler::new(&unnormalized_lattice_mixture(&cfg.zeno, k))
                .expect("lattice mixture is nonempty")
        })
    }
}

/// Fast path: identical draw schedule and (up to floating-point evaluation
/// order) identical decision thresholds as [`trial_general`], but with all
/// state evolution replaced by exact lattice lookups.
fn trial_scheduled<R: Rng>(cfg: &LoopConfig, cache: &ScheduleCache, rng: &mut R) -> TrialOutcome {
    let eps = cfg.noise.pbs_crosstalk;

    let u_entry: f64 = rng.gen();
    if u_entry >= 1.0 - eps {
        return TrialOutcome {
            fate: Fate::PrematureExitRejected,
            cycles_completed: 0,
            arrival_time: 0.0,
            true_position: None,
            pixel_index: None,
            polarization_error: None,
        };
    }

    // Rail state flag: true once PC2 has fired, i.e. the photon reaches the
    // beam splitter horizontally polarized and is meant to leave.
    let mut exiting_rail = false;
    for cycle in 1..=cfg.max_cycles {
        if cycle == 1 {
            let _u_pc1: f64 = rng.gen(); // pockels_failure == 0 on this path
        }
        let u_loss: f64 = rng.gen();
        if u_loss < cfg.noise.per_pass_loss {
            return absorbed(Fate::AbsorbedInLoop, cycle - 1, cfg);
        }
        let _j_hwp1: f64 = rng.sample(StandardNormal);
        let _j_disp: f64 = rng.sample(StandardNormal);
        let _j_pl: f64 = rng.sample(StandardNormal);
        let u_pl: f64 = rng.gen();
        if u_pl >= cache.pass_prob(cfg, cycle) {
            return absorbed(Fate::AbsorbedAtPolarizer, cycle - 1, cfg);
        }
        let _j_hwp2: f64 = rng.sample(StandardNormal);
        let _j_reinf: f64 = rng.sample(StandardNormal);
        let _u_reinf: f64 = rng.gen();
        // A jitter-free reinforcement polarizer sees exactly the rail state,
        // so it never absorbs: u_reinf < 1 always holds.

        if cycle == cfg.n_target {
            let _u_pc2: f64 = rng.gen();
            exiting_rail = true;
        }

        let u_pbs: f64 = rng.gen();
        let p_transmit = if exiting_rail { 1.0 - eps } else { eps };
        if u_pbs < p_transmit {
            let sampler = cache.sampler(cfg, cycle);
            return imager_arrival(cfg, cycle, sampler, &cache.pre_exit_pol, rng);
        }
        // Reflected back onto the vertical rail (the beam splitter
        // collapses the polarization to the port state).
        exiting_rail = false;
    }

    absorbed(Fate::AbsorbedInLoop, cfg.max_cycles, cfg)
}

// --- ensembles ------------------------------------------------------------

/// RNG for one trial: a fixed keyed generator on a per-trial stream, so any
/// subset of trials can be simulated independently and in any order.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Simulate `n_photons` independent trials. Reproducible for a fixed seed
/// no matter how many rayon workers participate; the outcome list is in
/// trial order.
pub fn run_ensemble(cfg: &LoopConfig, n_photons: usize, seed: u64) -> Result<EnsembleRecord> {
    cfg.validate()?;
    if n_photons < 1 {
        return Err(Error::invalid("n_photons", "must be >= 1"));
    }
    let cache = cfg.noise.is_schedule_stable().then(|| ScheduleCache::new(cfg));
    let outcomes: Vec<TrialOutcome> = (0..n_photons as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            match &cache {
                Some(c) => trial_scheduled(cfg, c, &mut rng),
                None => trial_general(cfg, &mut rng),
            }
        })
        .collect();
    let summary = EnsembleSummary::from_outcomes(&cfg.imager, &outcomes);
    Ok(EnsembleRecord { outcomes, summary })
}

/// Analytic zero of the shift measurement: with the crystals and polarizer
/// removed and no Pockels activation, a photon passes straight through and
/// lands at its injection center, read in the imager frame.
pub fn calibrate_zero_position(cfg: &LoopConfig) -> f64 {
    cfg.zeno.x0 + cfg.imager.center_offset
}

/// Monte Carlo counterpart of [`calibrate_zero_position`]: mean imager
/// reading over `n_photons` single-pass photons.
pub fn calibrate_zero_position_mc(cfg: &LoopConfig, n_photons: usize, seed: u64) -> Result<f64> {
    cfg.validate()?;
    if n_photons < 1 {
        return Err(Error::invalid("n_photons", "must be >= 1"));
    }
    let beam = GaussianMixture::single(cfg.zeno.sigma, cfg.zeno.x0)?;
    let sampler = PositionSampler::new(&beam)?;
    let sum: f64 = (0..n_photons as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            sampler.sample(&mut rng) + cfg.imager.center_offset
        })
        .sum();
    Ok(sum / n_photons as f64)
}
