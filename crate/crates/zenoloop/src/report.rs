//! CSV emission. All tables share one dialect: comma separators, a header
//! row, `\n`-terminated rows, `.` decimal points, and reals printed with 12
//! significant digits so byte-identical output is a meaningful determinism
//! check.

use crate::analysis::SweepRow;
use crate::gaussian::GaussianMixture;
use crate::loop_sim::{EnsembleRecord, TrialOutcome};
use crate::sampling::TAIL_SIGMAS;
use crate::zeno::{ExactZenoResult, IfmOutcome, ZenoParams};

/// Fixed-precision real formatting: 12 significant digits, scientific.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn opt_int<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One-row overview of an exact run.
pub fn exact_summary_csv(params: &ZenoParams, result: &ExactZenoResult) -> String {
    let mut s = String::from(
        "theta,xi,n_steps,sigma,x0,survival_probability,mean_position,position_variance,weak_limit_shift,component_count\n",
    );
    s.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        fmt_real(params.theta),
        fmt_real(params.xi),
        params.n_steps,
        fmt_real(params.sigma),
        fmt_real(params.x0),
        fmt_real(result.survival_probability),
        fmt_real(result.mean_position),
        fmt_real(result.position_variance),
        fmt_real(result.weak_limit_shift),
        result.final_mixture.len(),
    ));
    s
}

/// Per-protection survival trace: step index, conditional pass probability,
/// and the cumulative product up to that step.
pub fn exact_per_step_csv(result: &ExactZenoResult) -> String {
    let mut s = String::from("step,pass_probability,cumulative_survival\n");
    let mut cumulative = 1.0;
    for (i, &p) in result.per_step_survival.iter().enumerate() {
        cumulative *= p;
        s.push_str(&format!("{},{},{}\n", i + 1, fmt_real(p), fmt_real(cumulative)));
    }
    s
}

/// Position density of the final conditional state, tabulated on a uniform
/// grid spanning all components plus the standard sampling margin.
pub fn exact_pdf_csv(mixture: &GaussianMixture, points: usize) -> String {
    let sigma = mixture.width_sigma();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in mixture.components() {
        lo = lo.min(c.center);
        hi = hi.max(c.center);
    }
    let lo = lo - TAIL_SIGMAS * sigma;
    let hi = hi + TAIL_SIGMAS * sigma;
    let step = (hi - lo) / (points - 1) as f64;
    let mut s = String::from("x,density\n");
    for i in 0..points {
        let x = lo + i as f64 * step;
        s.push_str(&format!("{},{}\n", fmt_real(x), fmt_real(mixture.position_pdf(x))));
    }
    s
}

/// One row per photon, in trial order.
pub fn trials_csv(outcomes: &[TrialOutcome]) -> String {
    let mut s =
        String::from("trial_id,fate,cycles_completed,arrival_time,true_position,pixel_index\n");
    for (i, o) in outcomes.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i,
            o.fate.as_str(),
            o.cycles_completed,
            fmt_real(o.arrival_time),
            opt_real(o.true_position),
            opt_int(o.pixel_index),
        ));
    }
    s
}

/// Ensemble summary row. Premature exits are counted together whether the
/// camera recorded them or not; the means run over gated detections.
pub fn ensemble_summary_csv(record: &EnsembleRecord) -> String {
    let s = &record.summary;
    let mut out = String::from(
        "detected_count,absorbed_pl_count,absorbed_loop_count,premature_count,mean_pixel_position,mean_true_position,mean_polarization_error\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        s.detected,
        s.absorbed_at_polarizer,
        s.absorbed_in_loop,
        s.premature_rejected + s.premature_detected_ungated,
        opt_real(s.mean_pixel_position),
        opt_real(s.mean_true_position),
        opt_real(s.mean_polarization_error),
    ));
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "N,xi,theta,photons_sent,detected,exact_survival,mc_survival,o_hat,std_error,baseline_std_error\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.n_steps,
            fmt_real(r.xi),
            fmt_real(r.theta),
            r.photons_sent,
            r.detected,
            fmt_real(r.exact_survival),
            fmt_real(r.mc_survival),
            fmt_real(r.o_hat),
            fmt_real(r.std_error),
            fmt_real(r.baseline_std_error),
        ));
    }
    s
}

/// Interaction-free detection table with the closed-form absorption oracle
/// alongside the simulated values.
pub fn ifm_csv(rows: &[(usize, IfmOutcome, f64)]) -> String {
    let mut s = String::from("n,prob_detect_h,prob_absorbed,prob_detect_v,closed_form_absorbed\n");
    for (n, outcome, oracle) in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            n,
            fmt_real(outcome.prob_detect_h),
            fmt_real(outcome.prob_absorbed),
            fmt_real(outcome.prob_detect_v),
            fmt_real(*oracle),
        ));
    }
    s
}
