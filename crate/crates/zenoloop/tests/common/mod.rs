//! Shared reference oracles for the integration suites.
//!
//! Everything here recomputes expectations from first principles and on
//! purpose ignores the library's lattice/autocorrelation machinery: branch
//! histories are enumerated one by one (2^N of them) and wave functions are
//! integrated on a grid. Slow, obvious, and independent — which is the point.

// Each integration test binary compiles its own copy of this module and
// typically uses only a few helpers.
#![allow(dead_code)]

use rayon::prelude::*;
use zenoloop::zeno::ZenoParams;

/// Compensated accumulator; the pair sums below run to ~10^8 terms.
#[derive(Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// One spatial branch after N cycles: a real amplitude weight and the
/// Gaussian center it rode to.
#[derive(Clone, Copy)]
pub struct Branch {
    pub amp: f64,
    pub center: f64,
}

/// Expand the full 2^N history tree. Each cycle multiplies the amplitude by
/// cos^2(theta) (kick +kappa) or sin^2(theta) (kick -kappa): one factor from
/// the polarization component taking that arm, one from the projection back
/// onto the protected state.
pub fn enumerate_branches(params: &ZenoParams) -> Vec<Branch> {
    let n = params.n_steps;
    let kappa = params.kappa();
    let wh = params.theta.cos().powi(2);
    let wv = params.theta.sin().powi(2);
    let mut out = Vec::with_capacity(1usize << n);
    for mask in 0u64..(1u64 << n) {
        let ups = mask.count_ones() as i32;
        let downs = n as i32 - ups;
        out.push(Branch {
            amp: wh.powi(ups) * wv.powi(downs),
            center: params.x0 + f64::from(ups - downs) * kappa,
        });
    }
    out
}

/// Survival, conditional mean, and conditional variance from the raw branch
/// Gram sum: <Psi|Psi>, <Psi|x|Psi>, <Psi|x^2|Psi> over all branch pairs,
/// using the closed-form Gaussian pair integrals
///   <g_a|g_b>      = exp(-(a-b)^2 / 8 sigma^2)
///   <g_a|x|g_b>    = ((a+b)/2) <g_a|g_b>
///   <g_a|x^2|g_b>  = (((a+b)/2)^2 + sigma^2) <g_a|g_b>.
/// The second moment is accumulated about a pilot mean so the final
/// variance never forms the difference of two large numbers.
pub fn pair_moments(branches: &[Branch], sigma: f64) -> (f64, f64, f64) {
    let s8 = 8.0 * sigma * sigma;

    // Pilot center: diagonal-term mean, cheap and close enough that the
    // centered sums below stay O(variance)-sized.
    let (mut dw, mut dwc) = (Kahan::default(), Kahan::default());
    for b in branches {
        dw.add(b.amp * b.amp);
        dwc.add(b.amp * b.amp * b.center);
    }
    let pilot = dwc.value() / dw.value();

    // Row-parallel pair sweep; each row keeps its own compensated partials.
    let (norm, first_c, second_c) = branches
        .par_iter()
        .map(|bj| {
            let mut norm = Kahan::default();
            let mut first = Kahan::default();
            let mut second = Kahan::default();
            for bk in branches {
                let d = bj.center - bk.center;
                let w = bj.amp * bk.amp * (-d * d / s8).exp();
                let m = 0.5 * (bj.center + bk.center) - pilot;
                norm.add(w);
                first.add(w * m);
                second.add(w * (m * m + sigma * sigma));
            }
            (norm.value(), first.value(), second.value())
        })
        .reduce(
            || (0.0, 0.0, 0.0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );

    let mean_c = first_c / norm;
    (norm, pilot + mean_c, second_c / norm - mean_c * mean_c)
}

/// Survival, conditional mean, and conditional variance by direct grid
/// integration of |Psi(x)|^2, x|Psi|^2, x^2|Psi|^2. For entire functions
/// with Gaussian decay the plain trapezoid sum converges geometrically in
/// the step, so sigma/8 spacing already sits at rounding level; the window
/// is padded 12 sigma past the extreme centers (truncated mass ~1e-33).
pub fn quadrature_moments(branches: &[Branch], sigma: f64) -> (f64, f64, f64) {
    let lo = branches.iter().map(|b| b.center).fold(f64::INFINITY, f64::min) - 12.0 * sigma;
    let hi = branches
        .iter()
        .map(|b| b.center)
        .fold(f64::NEG_INFINITY, f64::max)
        + 12.0 * sigma;
    let h = sigma / 8.0;
    let steps = ((hi - lo) / h).ceil() as usize;
    let prefactor = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);

    let (mut p0, mut p1, mut p2) = (Kahan::default(), Kahan::default(), Kahan::default());
    for i in 0..=steps {
        let x = lo + i as f64 * h;
        let mut psi = 0.0;
        for b in branches {
            let d = x - b.center;
            psi += b.amp * prefactor * (-d * d / (4.0 * sigma * sigma)).exp();
        }
        let dens = psi * psi;
        p0.add(dens);
        p1.add(x * dens);
        p2.add(x * x * dens);
    }
    let norm = p0.value() * h;
    let mean = p1.value() * h / norm;
    (norm, mean, p2.value() * h / norm - mean * mean)
}

/// Least-squares slope of ln(y) against ln(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Sample mean and standard error of the mean (ddof = 1).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
