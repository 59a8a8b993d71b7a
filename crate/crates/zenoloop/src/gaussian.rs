//! Equal-width Gaussian wave-packet mixtures in one transverse dimension.
//!
//! Every spatial state in this crate is a superposition of Gaussian
//! amplitudes that share a single width `sigma`:
//!
//! ```text
//! psi(x) = sum_k c_k * g(x - x_k),   g(u) = (2 pi sigma^2)^(-1/4) exp(-u^2 / (4 sigma^2))
//! ```
//!
//! so that |g|^2 is a normal density with standard deviation `sigma`. Because
//! all components share the width, every inner product reduces to closed
//! form. With `O_ab = exp(-(a-b)^2 / (8 sigma^2))` and `m_ab = (a+b)/2`:
//!
//! ```text
//! <g_a | g_b>       = O_ab
//! <g_a | x | g_b>   = m_ab * O_ab
//! <g_a | x^2 | g_b> = (m_ab^2 + sigma^2) * O_ab
//! ```
//!
//! Norms, means and variances of a K-component mixture are O(K^2) sums of
//! these kernels — no quadrature anywhere in the evaluation path. Packet
//! spreading (dispersion) is not modeled; `sigma` is the unit of transverse
//! length throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default center tolerance for [`merge_and_prune`], as a fraction of sigma.
/// Tight enough that only components identical up to floating-point noise
/// collapse; noisy-loop evolution passes a larger, jitter-derived tolerance.
pub const DEFAULT_MERGE_TOL_FACTOR: f64 = 1e-9;

/// Default amplitude floor for [`merge_and_prune`].
pub const DEFAULT_AMP_FLOOR: f64 = 1e-12;

/// One Gaussian component: complex amplitude and packet center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub amplitude: Complex64,
    pub center: f64,
}

impl GaussianComponent {
    pub fn new(amplitude: Complex64, center: f64) -> Self {
        Self { amplitude, center }
    }

    /// Real-amplitude convenience constructor.
    pub fn real(amplitude: f64, center: f64) -> Self {
        Self::new(Complex64::new(amplitude, 0.0), center)
    }
}

/// A superposition of equal-width Gaussian packets. May be unnormalized or
/// even empty (zero norm); operations that require a norm say so.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    width_sigma: f64,
    components: Vec<GaussianComponent>,
}

/// Single-pair overlap kernel `<g_a | g_b> = exp(-(a-b)^2 / (8 sigma^2))`.
pub fn overlap(center_a: f64, center_b: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(overlap_unchecked(center_a, center_b, sigma))
}

#[inline]
fn overlap_unchecked(a: f64, b: f64, sigma: f64) -> f64 {
    let d = a - b;
    (-d * d / (8.0 * sigma * sigma)).exp()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(
            "sigma",
            format!("width must be positive and finite, got {sigma}"),
        ));
    }
    Ok(())
}

/// Outcome of [`merge_and_prune`]: the canonicalized mixture plus an upper
/// bound on how much the squared norm moved (here: the exact change).
#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub mixture: GaussianMixture,
    /// |squared_norm(after) - squared_norm(before)|.
    pub norm_change: f64,
    /// Components eliminated by merging.
    pub merged: usize,
    /// Components dropped by the amplitude floor.
    pub pruned: usize,
}

impl GaussianMixture {
    pub fn new(width_sigma: f64, components: Vec<GaussianComponent>) -> Result<Self> {
        check_sigma(width_sigma)?;
        for c in &components {
            if !c.center.is_finite() || !c.amplitude.re.is_finite() || !c.amplitude.im.is_finite() {
                return Err(Error::invalid("components", "non-finite amplitude or center"));
            }
        }
        Ok(Self {
            width_sigma,
            components,
        })
    }

    /// A single unit-amplitude packet at `center`.
    pub fn single(width_sigma: f64, center: f64) -> Result<Self> {
        Self::new(width_sigma, vec![GaussianComponent::real(1.0, center)])
    }

    pub fn width_sigma(&self) -> f64 {
        self.width_sigma
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `<psi|psi>`. Always real and >= 0; the imaginary parts of the
    /// cross terms cancel pairwise, so only the real part is accumulated.
    pub fn squared_norm(&self) -> f64 {
        let s = self.width_sigma;
        let n = self.components.len();
        let mut acc = 0.0;
        for j in 0..n {
            let cj = &self.components[j];
            acc += cj.amplitude.norm_sqr();
            for k in (j + 1)..n {
                let ck = &self.components[k];
                let re = cj.amplitude.re * ck.amplitude.re + cj.amplitude.im * ck.amplitude.im;
                acc += 2.0 * re * overlap_unchecked(cj.center, ck.center, s);
            }
        }
        acc.max(0.0)
    }

    /// Position density `|psi(x)|^2` (unnormalized: integrates to
    /// `squared_norm`, not 1).
    pub fn position_pdf(&self, x: f64) -> f64 {
        let s = self.width_sigma;
        let norm_g = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
        let mut amp = Complex64::new(0.0, 0.0);
        for c in &self.components {
            let u = x - c.center;
            amp += c.amplitude * norm_g * (-u * u / (4.0 * s * s)).exp();
        }
        amp.norm_sqr()
    }

    /// Normalized position mean and variance via the closed-form kernels.
    ///
    /// Errors with [`Error::ZeroNorm`] when the squared norm has vanished
    /// (or cancelled away) relative to the total amplitude mass, in which
    /// case the ratio of moment sums is meaningless.
    pub fn position_moments(&self) -> Result<(f64, f64)> {
        let s = self.width_sigma;
        let norm = self.squared_norm();
        let amp_mass: f64 = self.components.iter().map(|c| c.amplitude.norm()).sum();
        if norm <= f64::EPSILON * amp_mass * amp_mass || norm == 0.0 {
            return Err(Error::ZeroNorm {
                context: "position moments",
            });
        }
        let n = self.components.len();
        let mut first = 0.0;
        let mut second = 0.0;
        for j in 0..n {
            let cj = &self.components[j];
            for k in j..n {
                let ck = &self.components[k];
                let re = cj.amplitude.re * ck.amplitude.re + cj.amplitude.im * ck.amplitude.im;
                let weight = if j == k { re } else { 2.0 * re * overlap_unchecked(cj.center, ck.center, s) };
                let m = 0.5 * (cj.center + ck.center);
                first += weight * m;
                second += weight * (m * m + s * s);
            }
        }
        let mean = first / norm;
        let var = (second / norm - mean * mean).max(0.0);
        Ok((mean, var))
    }

    /// Translate every center by `delta`. Norm-invariant.
    pub fn shifted(&self, delta: f64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| GaussianComponent::new(c.amplitude, c.center + delta))
            .collect();
        Self {
            width_sigma: self.width_sigma,
            components,
        }
    }

    /// Scale every amplitude by a complex factor.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| GaussianComponent::new(c.amplitude * factor, c.center))
            .collect();
        Self {
            width_sigma: self.width_sigma,
            components,
        }
    }
}

/// Canonicalize a mixture: sort by center, merge runs of components whose
/// centers sit within `center_tol` of the first member of the run (anchored,
/// so tolerance chains cannot creep), then drop components with
/// `|amplitude| < amp_floor`.
///
/// A merged run is replaced by one component carrying the amplitude sum,
/// centered at the |amplitude|-weighted mean center. With `center_tol = 0`
/// and `amp_floor = 0` this is the identity up to center ordering.
///
/// The returned [`MergeOutcome::norm_change`] is the exact |Δ squared_norm|,
/// which for well-separated clusters of spread d is O(norm · d²/σ²).
pub fn merge_and_prune(
    mixture: &GaussianMixture,
    center_tol: f64,
    amp_floor: f64,
) -> Result<MergeOutcome> {
    if center_tol < 0.0 || !center_tol.is_finite() {
        return Err(Error::invalid("center_tol", "must be >= 0 and finite"));
    }
    if amp_floor < 0.0 || !amp_floor.is_finite() {
        return Err(Error::invalid("amp_floor", "must be >= 0 and finite"));
    }
    let norm_before = mixture.squared_norm();
    let mut comps = mixture.components.clone();
    comps.sort_by(|a, b| a.center.partial_cmp(&b.center).expect("finite centers"));

    let mut merged_out: Vec<GaussianComponent> = Vec::with_capacity(comps.len());
    let mut merged = 0usize;
    let mut i = 0usize;
    while i < comps.len() {
        let anchor = comps[i].center;
        let mut j = i;
        let mut amp_sum = Complex64::new(0.0, 0.0);
        let mut weight_sum = 0.0;
        let mut center_acc = 0.0;
        let mut plain_center_acc = 0.0;
        while j < comps.len() && comps[j].center - anchor <= center_tol {
            let w = comps[j].amplitude.norm();
            amp_sum += comps[j].amplitude;
            weight_sum += w;
            center_acc += w * comps[j].center;
            plain_center_acc += comps[j].center;
            j += 1;
        }
        let count = j - i;
        let center = if weight_sum > 0.0 {
            center_acc / weight_sum
        } else {
            plain_center_acc / count as f64
        };
        merged_out.push(GaussianComponent::new(amp_sum, center));
        merged += count - 1;
        i = j;
    }

    let before_prune = merged_out.len();
    merged_out.retain(|c| c.amplitude.norm() >= amp_floor || amp_floor == 0.0);
    let pruned = before_prune - merged_out.len();

    let result = GaussianMixture {
        width_sigma: mixture.width_sigma,
        components: merged_out,
    };
    let norm_change = (result.squared_norm() - norm_before).abs();
    Ok(MergeOutcome {
        mixture: result,
        norm_change,
        merged,
        pruned,
    })
}
