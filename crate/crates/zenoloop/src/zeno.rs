//! Exact engine for the repeated interaction–protection cycle.
//!
//! One cycle entangles the polarization with the transverse position
//! (|H> shifts the packet by +kappa, |V> by -kappa) and then projects the
//! polarization back onto the prepared state cos(theta)|H> + sin(theta)|V>.
//! Because the projection closes over the same two branch amplitudes every
//! time, the spatial state after k cycles lives on an integer lattice: the
//! unnormalized amplitude at center `x0 + (2j - k) kappa` is
//!
//! ```text
//! w_j = C(k, j) (cos^2 theta)^j (sin^2 theta)^(k-j),   j = 0..=k
//! ```
//!
//! i.e. a binomial row — k+1 components instead of 2^k branches. All
//! norms and moments are O(k^2) Gram sums over the lattice with overlaps
//! `exp(-(j-j')^2 xi^2 / 2)`, where `xi = kappa / sigma` is the measurement
//! strength. Weights are built by a compensated log-space recurrence so the
//! far binomial tails neither overflow nor poison the moment sums; the Gram
//! sums are grouped by lattice distance so the exp() count is O(k), not
//! O(k^2).
//!
//! [`evolve_exact`] reports the full trace (per-step survival ratios, cost
//! O(N^3) worst case — fine up to a few thousand steps); [`weak_limit_series`]
//! skips the trace and scales to N ~ 10^4 and beyond for convergence scans.

use crate::error::{Error, Result};
use crate::gaussian::{GaussianComponent, GaussianMixture};
use crate::polarization::{expectation, prepare};

/// Parameters of an exact run. `xi` is the displacement in units of the
/// packet width (`kappa = xi * sigma`).
#[derive(Debug, Clone, Copy)]
pub struct ZenoParams {
    pub theta: f64,
    pub xi: f64,
    pub n_steps: usize,
    pub sigma: f64,
    pub x0: f64,
}

impl ZenoParams {
    /// `sigma = 1`, `x0 = 0`; the common case for analysis in packet-width units.
    pub fn new(theta: f64, xi: f64, n_steps: usize) -> Result<Self> {
        Self::with_geometry(theta, xi, n_steps, 1.0, 0.0)
    }

    pub fn with_geometry(theta: f64, xi: f64, n_steps: usize, sigma: f64, x0: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::invalid("theta", format!("must be in [0, pi/2], got {theta}")));
        }
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::invalid("xi", format!("must be >= 0 and finite, got {xi}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("must be > 0 and finite, got {sigma}")));
        }
        if !x0.is_finite() {
            return Err(Error::invalid("x0", "must be finite"));
        }
        Ok(Self { theta, xi, n_steps, sigma, x0 })
    }

    /// Re-check all field constraints (fields are public and may have been
    /// edited after construction).
    pub fn validate(&self) -> Result<()> {
        Self::with_geometry(self.theta, self.xi, self.n_steps, self.sigma, self.x0).map(|_| ())
    }

    pub fn kappa(&self) -> f64 {
        self.xi * self.sigma
    }

    /// <O> of the protected state: cos^2(theta) - sin^2(theta).
    pub fn observable_expectation(&self) -> f64 {
        // prepare() cannot fail here: theta was validated to [0, pi/2].
        expectation(&prepare(self.theta).expect("validated theta"))
            .expect("prepared states are normalized")
    }
}

/// Everything [`evolve_exact`] knows about the post-protocol state.
#[derive(Debug, Clone)]
pub struct ExactZenoResult {
    /// Probability that the photon survives all N protections.
    pub survival_probability: f64,
    /// Spatial state conditional on survival (normalized).
    pub final_mixture: GaussianMixture,
    pub mean_position: f64,
    pub position_variance: f64,
    /// First-order prediction for the mean shift: N kappa <O>.
    pub weak_limit_shift: f64,
    /// survival(k) / survival(k-1) for k = 1..=N; the product telescopes
    /// back to `survival_probability`.
    pub per_step_survival: Vec<f64>,
}

/// One row of a weak-limit convergence scan.
#[derive(Debug, Clone, Copy)]
pub struct WeakLimitPoint {
    pub n: usize,
    /// Conditional mean position shift, in units of sigma.
    pub mean_shift: f64,
    pub survival: f64,
}

/// Outcome probabilities of an interaction-free detection run.
#[derive(Debug, Clone, Copy)]
pub struct IfmOutcome {
    pub prob_detect_h: f64,
    pub prob_absorbed: f64,
    pub prob_detect_v: f64,
}

// --- lattice kernels ---------------------------------------------------

/// Compensated (Kahan) accumulator; the log-weight recurrence and the
/// Gram-sum reductions both run long enough that naive summation error
/// would be visible next to 1e-10 acceptance tolerances.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum
    }
}

/// Binomial branch weights after `n` cycles at preparation angle `theta`.
/// Exact eigenstates collapse to a single unit weight; otherwise the row is
/// built as exp of a compensated log recurrence, so underflowed far tails
/// come out as exact zeros rather than garbage.
pub(crate) fn lattice_weights(n: usize, theta: f64) -> Vec<f64> {
    let cos_t = theta.cos();
    let sin_t = theta.sin();
    let p_h = cos_t * cos_t;
    let p_v = sin_t * sin_t;
    let mut w = vec![0.0; n + 1];
    if p_v == 0.0 {
        w[n] = 1.0;
        return w;
    }
    if p_h == 0.0 {
        w[0] = 1.0;
        return w;
    }
    let ln_ratio = p_h.ln() - p_v.ln();
    let mut acc = Kahan::default();
    acc.add(n as f64 * p_v.ln());
    w[0] = acc.value().exp();
    for k in 0..n {
        acc.add(((n - k) as f64).ln() - ((k + 1) as f64).ln() + ln_ratio);
        w[k + 1] = acc.value().exp();
    }
    w
}

struct LatticeStats {
    survival: f64,
    /// E[j + j' - n] over the Gram-weighted lattice: mean position is
    /// x0 + kappa * mean_lattice.
    mean_lattice: f64,
}

/// Survival and first-moment Gram sums in one O(n^2) pass, grouped by
/// lattice distance so the Gaussian overlap is evaluated once per distance.
/// (Higher moments of the conditional state go through the mixture kernels
/// instead; this fast path exists for large-n convergence scans.)
fn lattice_stats(weights: &[f64], xi: f64) -> LatticeStats {
    let n = weights.len() - 1;
    let nf = n as f64;
    let mut total = Kahan::default();
    let mut s_g = Kahan::default();
    let mut s1_g = Kahan::default();
    for delta in 0..=n {
        let mut a = Kahan::default();
        let mut b = Kahan::default();
        for k in 0..=(n - delta) {
            let p = weights[k] * weights[k + delta];
            if p == 0.0 {
                continue;
            }
            let m = (2 * k + delta) as f64 - nf;
            a.add(p);
            b.add(p * m);
        }
        let (a, b) = (a.value(), b.value());
        if delta == 0 {
            total.add(a);
            s_g.add(a);
            s1_g.add(b);
        } else {
            let g = (-0.5 * (delta as f64 * xi) * (delta as f64 * xi)).exp();
            total.add(2.0 * a);
            s_g.add(2.0 * g * a);
            s1_g.add(2.0 * g * b);
        }
    }
    let survival = (s_g.value() / total.value()).clamp(0.0, 1.0);
    LatticeStats {
        survival,
        mean_lattice: s1_g.value() / s_g.value(),
    }
}

/// Survival only — the cheap third of [`lattice_stats`], used for per-step
/// traces and bisection.
pub(crate) fn lattice_survival(weights: &[f64], xi: f64) -> f64 {
    let n = weights.len() - 1;
    let mut total = Kahan::default();
    let mut s_g = Kahan::default();
    for delta in 0..=n {
        let mut a = Kahan::default();
        for k in 0..=(n - delta) {
            let p = weights[k] * weights[k + delta];
            if p != 0.0 {
                a.add(p);
            }
        }
        if delta == 0 {
            total.add(a.value());
            s_g.add(a.value());
        } else {
            let g = (-0.5 * (delta as f64 * xi) * (delta as f64 * xi)).exp();
            total.add(2.0 * a.value());
            s_g.add(2.0 * g * a.value());
        }
    }
    (s_g.value() / total.value()).clamp(0.0, 1.0)
}

/// Unnormalized lattice state after `k` cycles: binomial weights at centers
/// `x0 + (2j - k) kappa`. Exact-zero weights (eigenstates, underflowed
/// tails) are dropped. With kappa = 0 every center coincides, so the state
/// is a single unit component.
pub(crate) fn unnormalized_lattice_mixture(params: &ZenoParams, k: usize) -> GaussianMixture {
    let kappa = params.kappa();
    if kappa == 0.0 || k == 0 {
        return GaussianMixture::single(params.sigma, params.x0).expect("validated sigma");
    }
    let weights = lattice_weights(k, params.theta);
    let comps: Vec<GaussianComponent> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(j, &w)| {
            GaussianComponent::real(w, params.x0 + ((2 * j) as f64 - k as f64) * kappa)
        })
        .collect();
    GaussianMixture::new(params.sigma, comps).expect("validated sigma")
}

// --- public operations --------------------------------------------------

/// Run the full N-step protocol exactly.
///
/// Survival and moments come from the Gaussian-mixture kernels applied to
/// the lattice state; the per-step trace re-evaluates prefix norms, which
/// costs O(N^3) in the worst case (use [`weak_limit_series`] for large-N
/// convergence scans, which skips the trace).
pub fn evolve_exact(params: &ZenoParams) -> Result<ExactZenoResult> {
    let n = params.n_steps;
    let kappa = params.kappa();
    let weak_limit_shift = n as f64 * kappa * params.observable_expectation();

    if n == 0 || kappa == 0.0 {
        // No steps, or displacement-free cycles: protection succeeds with
        // certainty and the packet never moves.
        let mixture = GaussianMixture::single(params.sigma, params.x0)?;
        let (mean, var) = mixture.position_moments()?;
        return Ok(ExactZenoResult {
            survival_probability: 1.0,
            final_mixture: mixture,
            mean_position: mean,
            position_variance: var,
            weak_limit_shift,
            per_step_survival: vec![1.0; n],
        });
    }

    let unnorm = unnormalized_lattice_mixture(params, n);
    let survival = unnorm.squared_norm().min(1.0);
    if survival <= 0.0 {
        return Err(Error::ZeroNorm {
            context: "post-protocol state",
        });
    }
    let final_mixture = unnorm.scaled((1.0 / survival.sqrt()).into());
    let (mean_position, position_variance) = final_mixture.position_moments()?;

    let mut per_step_survival = Vec::with_capacity(n);
    let mut prev = 1.0;
    for k in 1..=n {
        let s_k = lattice_survival(&lattice_weights(k, params.theta), params.xi);
        per_step_survival.push(s_k / prev);
        prev = s_k;
    }

    Ok(ExactZenoResult {
        survival_probability: survival,
        final_mixture,
        mean_position,
        position_variance,
        weak_limit_shift,
        per_step_survival,
    })
}

/// Exact mean shift and survival along `n_list` with the displacement scaled
/// as `kappa = c sigma / n` (sigma = 1, x0 = 0: results are in packet-width
/// units). As n grows the mean shift approaches `c <O>` and survival
/// approaches 1.
pub fn weak_limit_series(c: f64, theta: f64, n_list: &[usize]) -> Result<Vec<WeakLimitPoint>> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("c", format!("must be > 0 and finite, got {c}")));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid("theta", format!("must be in [0, pi/2], got {theta}")));
    }
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(Error::invalid("n_list", "entries must be >= 1"));
        }
        let xi = c / n as f64;
        let weights = lattice_weights(n, theta);
        let stats = lattice_stats(&weights, xi);
        out.push(WeakLimitPoint {
            n,
            mean_shift: xi * stats.mean_lattice,
            survival: stats.survival,
        });
    }
    Ok(out)
}

/// Largest `xi` at which the N-step survival still reaches `target`,
/// found by bisection to `tol` (survival is strictly decreasing in xi away
/// from the eigenstates, so the threshold is unique).
pub fn survival_threshold_xi(
    n_steps: usize,
    theta: f64,
    target: f64,
    tol: f64,
) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "must be >= 1"));
    }
    if !(0.0 < target && target < 1.0) {
        return Err(Error::invalid("target", format!("must be in (0, 1), got {target}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let weights = lattice_weights(n_steps, theta);
    let survival_at = |xi: f64| lattice_survival(&weights, xi);

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut tries = 0;
    while survival_at(hi) >= target {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::invalid(
                "theta",
                "survival never drops below the target (observable eigenstate?)",
            ));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if survival_at(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Interaction-free detection: n cycles of a pi/(2n) polarization rotation,
/// with the object (when present) absorbing the V component each cycle.
/// Evolves the state explicitly; the closed form `1 - cos^{2n}(pi/2n)` is a
/// test oracle only.
pub fn simulate_ifm(n: usize, object_present: bool) -> Result<IfmOutcome> {
    if n == 0 {
        return Err(Error::invalid("n", "cycle count must be >= 1"));
    }
    let dtheta = std::f64::consts::FRAC_PI_2 / n as f64;
    let mut state = crate::polarization::PolarizationState::horizontal();
    let mut absorbed = Kahan::default();
    for _ in 0..n {
        state = crate::polarization::rotate(&state, dtheta);
        if object_present {
            absorbed.add(state.amp_v.norm_sqr());
            state.amp_v = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    Ok(IfmOutcome {
        prob_detect_h: state.amp_h.norm_sqr(),
        prob_absorbed: absorbed.value(),
        prob_detect_v: state.amp_v.norm_sqr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    /// Brute-force oracle: walk all 2^N branch histories, no lattice
    /// collapsing, and evaluate the Gram sums pair by pair.
    fn brute_force(params: &ZenoParams) -> (f64, f64, f64) {
        let n = params.n_steps;
        let kappa = params.kappa();
        let (ph_amp, pv_amp) = (params.theta.cos().powi(2), params.theta.sin().powi(2));
        let mut amps = Vec::with_capacity(1 << n);
        let mut centers = Vec::with_capacity(1 << n);
        for mask in 0u64..(1u64 << n) {
            let mut amp = 1.0;
            let mut center = params.x0;
            for bit in 0..n {
                if mask >> bit & 1 == 1 {
                    amp *= ph_amp;
                    center += kappa;
                } else {
                    amp *= pv_amp;
                    center -= kappa;
                }
            }
            amps.push(amp);
            centers.push(center);
        }
        let s2 = 8.0 * params.sigma * params.sigma;
        // Two passes with compensated sums: the pair count reaches ~10^6 at
        // n = 10 and the raw second moment cancels against mean^2, so the
        // naive one-pass form loses digits the comparison needs.
        let mut norm = Kahan::default();
        let mut first = Kahan::default();
        for j in 0..amps.len() {
            for k in 0..amps.len() {
                let d = centers[j] - centers[k];
                let o = (-d * d / s2).exp();
                let w = amps[j] * amps[k] * o;
                norm.add(w);
                first.add(w * 0.5 * (centers[j] + centers[k]));
            }
        }
        let mean = first.value() / norm.value();
        let mut central = Kahan::default();
        for j in 0..amps.len() {
            for k in 0..amps.len() {
                let d = centers[j] - centers[k];
                let o = (-d * d / s2).exp();
                let w = amps[j] * amps[k] * o;
                let m = 0.5 * (centers[j] + centers[k]) - mean;
                central.add(w * (m * m + params.sigma * params.sigma));
            }
        }
        (norm.value(), mean, central.value() / norm.value())
    }

    #[test]
    fn one_step_closed_form() {
        let r = evolve_exact(&ZenoParams::new(PI / 4.0, 1.0, 1).unwrap()).unwrap();
        let expected = 0.5 + 0.5 * (-0.5f64).exp();
        assert!((r.survival_probability - expected).abs() < 1e-12);
        assert!((r.survival_probability - 0.8032653298563167).abs() < 1e-12);
        assert_eq!(r.final_mixture.len(), 2);
    }

    #[test]
    fn eigenstates_never_decay() {
        let r = evolve_exact(&ZenoParams::with_geometry(0.0, 0.7, 9, 1.0, 0.25).unwrap()).unwrap();
        assert_eq!(r.survival_probability, 1.0);
        assert_eq!(r.final_mixture.len(), 1);
        assert!((r.mean_position - (0.25 + 9.0 * 0.7)).abs() < 1e-12);
        assert!(r.per_step_survival.iter().all(|&s| s == 1.0));

        let r = evolve_exact(&ZenoParams::new(PI / 2.0, 0.7, 9).unwrap()).unwrap();
        assert_eq!(r.survival_probability, 1.0);
        assert!((r.mean_position + 9.0 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_strength_and_zero_steps() {
        let r = evolve_exact(&ZenoParams::new(0.9, 0.0, 40).unwrap()).unwrap();
        assert_eq!(r.survival_probability, 1.0);
        assert_eq!(r.final_mixture.len(), 1);
        assert!((r.mean_position).abs() < 1e-15);
        assert_eq!(r.per_step_survival.len(), 40);

        let r = evolve_exact(&ZenoParams::new(0.9, 0.5, 0).unwrap()).unwrap();
        assert_eq!(r.survival_probability, 1.0);
        assert!(r.per_step_survival.is_empty());
    }

    #[test]
    fn default_run_shape_and_regression() {
        // 7 stages, theta = pi/8, xi = 0.1 — the shipped default config.
        let r = evolve_exact(&ZenoParams::new(PI / 8.0, 0.1, 7).unwrap()).unwrap();
        assert_eq!(r.final_mixture.len(), 8);
        assert!((r.survival_probability - 0.9913684610807829).abs() < 1e-9);
        assert!((r.mean_position - 0.49558358177240386).abs() < 1e-9);
        // First-order prediction within O(N kappa^3 / sigma^2).
        let wls = 7.0 * 0.1 * (PI / 4.0).cos();
        assert!((r.weak_limit_shift - wls).abs() < 1e-12);
        assert!((r.mean_position - r.weak_limit_shift).abs() < 7.0 * 0.1f64.powi(3));
    }

    #[test]
    fn hundred_step_survival_regression() {
        let r = evolve_exact(&ZenoParams::new(PI / 4.0, 0.1, 100).unwrap()).unwrap();
        assert!(r.survival_probability > 0.5);
        assert!((r.survival_probability - 0.8163830181981271).abs() < 1e-9);
    }

    #[test]
    fn per_step_product_telescopes() {
        let r = evolve_exact(&ZenoParams::new(0.6, 0.35, 25).unwrap()).unwrap();
        assert_eq!(r.per_step_survival.len(), 25);
        let product: f64 = r.per_step_survival.iter().product();
        assert!(
            (product - r.survival_probability).abs() < 1e-12,
            "product {product} vs survival {}",
            r.survival_probability
        );
        assert!(r.per_step_survival.iter().all(|&s| (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for &n in &[1usize, 2, 3, 6, 10] {
            for &theta in &[0.3, PI / 4.0, 1.2] {
                for &xi in &[0.2, 1.0] {
                    let p = ZenoParams::with_geometry(theta, xi, n, 1.0, -0.4).unwrap();
                    let r = evolve_exact(&p).unwrap();
                    let (norm, mean, var) = brute_force(&p);
                    assert!(
                        (r.survival_probability - norm).abs() < 1e-10,
                        "survival n={n} theta={theta} xi={xi}"
                    );
                    assert!((r.mean_position - mean).abs() < 1e-10, "mean n={n}");
                    assert!((r.position_variance - var).abs() < 1e-10, "var n={n}");
                }
            }
        }
    }

    #[test]
    fn survival_monotone_in_steps_and_strength() {
        let mut prev = 1.0;
        for n in 1..=30 {
            let s = evolve_exact(&ZenoParams::new(0.5, 0.4, n).unwrap())
                .unwrap()
                .survival_probability;
            assert!(s <= prev + 1e-14, "survival rose at n={n}");
            prev = s;
        }
        let mut prev = 1.0;
        for i in 1..=20 {
            let xi = i as f64 * 0.15;
            let s = evolve_exact(&ZenoParams::new(0.5, xi, 8).unwrap())
                .unwrap()
                .survival_probability;
            assert!(s < prev, "survival not strictly decreasing at xi={xi}");
            prev = s;
        }
    }

    #[test]
    fn angle_reflection_negates_mean_shift() {
        for &theta in &[0.2, 0.5, 1.1] {
            for &(xi, n) in &[(0.3, 5), (0.8, 12)] {
                let a = evolve_exact(&ZenoParams::new(theta, xi, n).unwrap()).unwrap();
                let b = evolve_exact(&ZenoParams::new(PI / 2.0 - theta, xi, n).unwrap()).unwrap();
                assert!(
                    (a.mean_position + b.mean_position).abs() < 1e-12,
                    "means {} vs {}",
                    a.mean_position,
                    b.mean_position
                );
                assert!((a.survival_probability - b.survival_probability).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn series_agrees_with_full_engine() {
        let c = 0.8;
        for &n in &[5usize, 40, 150] {
            let series = weak_limit_series(c, 1.1, &[n]).unwrap()[0];
            let full = evolve_exact(&ZenoParams::new(1.1, c / n as f64, n).unwrap()).unwrap();
            assert!((series.survival - full.survival_probability).abs() < 1e-10);
            assert!((series.mean_shift - full.mean_position).abs() < 1e-10);
        }
    }

    #[test]
    fn series_limits() {
        // Eigenstate: full shift, no decay, at every n.
        for p in weak_limit_series(1.3, 0.0, &[1, 10, 100]).unwrap() {
            assert!((p.mean_shift - 1.3).abs() < 1e-12);
            assert_eq!(p.survival, 1.0);
        }
        // Survival deficit shrinks like 1/n.
        let pts = weak_limit_series(1.0, PI / 3.0, &[100, 1000]).unwrap();
        let slope = ((1.0 - pts[1].survival) / (1.0 - pts[0].survival)).ln()
            / (pts[1].n as f64 / pts[0].n as f64).ln();
        assert!((slope + 1.0).abs() < 0.1, "deficit slope {slope}");
    }

    #[test]
    fn threshold_bisection_brackets_target() {
        let target = 0.9;
        let xi_star = survival_threshold_xi(10, PI / 4.0, target, 1e-9).unwrap();
        let weights = lattice_weights(10, PI / 4.0);
        let at = lattice_survival(&weights, xi_star);
        assert!((at - target).abs() < 1e-6, "survival at threshold {at}");
        assert!(lattice_survival(&weights, xi_star - 1e-3) > target);
        assert!(lattice_survival(&weights, xi_star + 1e-3) < target);
        // Eigenstate never crosses.
        assert!(survival_threshold_xi(10, 0.0, 0.5, 1e-9).is_err());
    }

    #[test]
    fn ifm_closed_form_and_limits() {
        let r = simulate_ifm(1, true).unwrap();
        assert!(r.prob_detect_h < 1e-12);
        assert!((r.prob_absorbed - 1.0).abs() < 1e-12);
        assert_eq!(r.prob_detect_v, 0.0);

        let r = simulate_ifm(5, true).unwrap();
        let oracle = 1.0 - (PI / 10.0).cos().powi(10);
        assert!((r.prob_absorbed - oracle).abs() < 1e-13);
        assert!((r.prob_absorbed - 0.3945709502868937).abs() < 1e-9);
        assert!((r.prob_detect_h + r.prob_absorbed - 1.0).abs() < 1e-12);

        let r = simulate_ifm(17, false).unwrap();
        assert!((r.prob_detect_v - 1.0).abs() < 1e-12);
        assert!(r.prob_detect_h < 1e-12);
        assert_eq!(r.prob_absorbed, 0.0);
    }
}
