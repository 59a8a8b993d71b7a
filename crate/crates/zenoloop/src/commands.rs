//! Subcommand implementations: each one loads nothing itself — it receives
//! a resolved [`RunConfig`], runs the corresponding engine, and writes CSVs
//! plus the effective configuration into the output directory. Output bytes
//! are deterministic functions of the effective configuration.

use std::fs;
use std::path::Path;

use crate::analysis::sweep;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::loop_sim::run_ensemble;
use crate::report;
use crate::zeno::{evolve_exact, simulate_ifm};

/// Run `f` on a rayon pool with the configured worker count (0 = default
/// global pool).
fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build a {threads}-thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Echo the effective configuration (stdout unless quiet, and always as a
/// file next to the results, so any run can be reproduced exactly).
fn emit_effective_config(cfg: &RunConfig, quiet: bool) -> Result<()> {
    let echo = cfg.to_effective_toml();
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("effective_config.toml"), &echo)?;
    if !quiet {
        print!("{echo}");
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Exact lattice evolution: `exact_summary.csv` (one row), the per-step
/// survival trace, and the final conditional position density on a grid.
pub fn cmd_exact(cfg: &RunConfig, quiet: bool) -> Result<()> {
    emit_effective_config(cfg, quiet)?;
    let params = cfg.loop_config.zeno;
    let result = evolve_exact(&params)?;
    write_file(&cfg.out_dir, "exact_summary.csv", &report::exact_summary_csv(&params, &result))?;
    write_file(&cfg.out_dir, "exact_per_step.csv", &report::exact_per_step_csv(&result))?;
    write_file(
        &cfg.out_dir,
        "exact_pdf.csv",
        &report::exact_pdf_csv(&result.final_mixture, cfg.pdf_points),
    )?;
    Ok(())
}

/// Monte Carlo ensemble: one `trials.csv` row per photon plus `summary.csv`.
pub fn cmd_montecarlo(cfg: &RunConfig, quiet: bool) -> Result<()> {
    emit_effective_config(cfg, quiet)?;
    let record = with_pool(cfg.threads, || {
        run_ensemble(&cfg.loop_config, cfg.n_photons, cfg.seed)
    })??;
    write_file(&cfg.out_dir, "trials.csv", &report::trials_csv(&record.outcomes))?;
    write_file(&cfg.out_dir, "summary.csv", &report::ensemble_summary_csv(&record))?;
    Ok(())
}

/// Parameter sweep over (N, xi, theta): `sweep.csv`, one row per cell.
pub fn cmd_sweep(cfg: &RunConfig, quiet: bool) -> Result<()> {
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep command needs a [sweep] section".to_string()))?;
    emit_effective_config(cfg, quiet)?;
    let rows = with_pool(cfg.threads, || sweep(&cfg.loop_config, grid, cfg.seed))??;
    write_file(&cfg.out_dir, "sweep.csv", &report::sweep_csv(&rows))?;
    Ok(())
}

/// Interaction-free detection table across cycle counts, with the
/// closed-form absorption probability as an oracle column.
pub fn cmd_ifm(cfg: &RunConfig, quiet: bool) -> Result<()> {
    emit_effective_config(cfg, quiet)?;
    let mut rows = Vec::with_capacity(cfg.ifm.n_list.len());
    for &n in &cfg.ifm.n_list {
        let outcome = simulate_ifm(n, cfg.ifm.object_present)?;
        let oracle = if cfg.ifm.object_present {
            let half = std::f64::consts::FRAC_PI_2 / n as f64;
            1.0 - half.cos().powi(2 * n as i32)
        } else {
            0.0
        };
        rows.push((n, outcome, oracle));
    }
    write_file(&cfg.out_dir, "ifm.csv", &report::ifm_csv(&rows))?;
    Ok(())
}
