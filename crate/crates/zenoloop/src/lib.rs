//! Simulation toolkit for protective measurement of a single photon's
//! polarization in a quantum-Zeno optical storage loop.
//!
//! A photon prepared as `cos(theta)|H> + sin(theta)|V>` circulates through a
//! sequence of identical stages. Each stage weakly couples the polarization
//! to the transverse beam position (a birefringent displacement of +/-kappa)
//! and then projects the polarization back onto the prepared state. In the
//! many-stage, weak-coupling limit the projections protect the state while
//! the displacements accumulate coherently, so a *single* photon's mean
//! landing position on an imager reads out the expectation value
//! `<O> = cos^2(theta) - sin^2(theta)` of the polarization observable
//! `O = |H><H| - |V><V|` — no ensemble collapse statistics involved.
//!
//! The crate has three layers:
//!
//! * exact engines ([`gaussian`], [`polarization`], [`zeno`]): closed-form
//!   Gaussian-mixture algebra on the displacement lattice, survival and
//!   moment computation, weak-limit scans, and the related interaction-free
//!   detection protocol;
//! * a discrete-event Monte Carlo of the optical loop ([`sampling`],
//!   [`loop_sim`]): per-photon trajectories through beam splitter, Pockels
//!   cells, wave plates, displacer, and polarizers, with configurable
//!   imperfections and a time-gated pixel imager;
//! * estimation and plumbing ([`analysis`], [`config`], [`report`],
//!   [`commands`]): expectation-value estimators with uncertainties, the
//!   projective-measurement baseline, parameter sweeps, and a CSV-emitting
//!   CLI.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod loop_sim;
pub mod polarization;
pub mod report;
pub mod sampling;
pub mod zeno;

pub use commands::{cmd_exact, cmd_ifm, cmd_montecarlo, cmd_sweep};
pub use error::{Error, Result};
