//! Segmented compressed sampling toolkit.
//!
//! An analog-to-information converter (AIC) measures a signal against `K`
//! random waveforms and integrates over a period. Splitting the period into
//! `M` segments yields a `K x M` matrix of sub-samples that can be re-added
//! under column permutations to mint additional samples without extra
//! hardware branches; this is equivalent to extending the `K x N`
//! measurement matrix with rows assembled from permuted blocks of the
//! original rows.
//!
//! The crate provides the pieces needed to simulate and analyse that scheme
//! end to end:
//!
//! * [`sensing`] — random measurement ensembles, sparse test signals and
//!   SNR/noise-variance arithmetic.
//! * [`perm`] — construction and validation of the column-permutation
//!   families that define the additional samples.
//! * [`sampler`] — sub-sampling, sample aggregation, extended-matrix
//!   assembly and correlated-noise sample synthesis.
//! * [`rip`] — empirical restricted-isometry constants, row partitioning,
//!   probability bounds and null-space containment checks.
//! * [`recovery`] — basis pursuit / BPDN via ADMM and empirical-risk
//!   minimization via iterative hard thresholding.
//! * [`bounds`] — closed-form evaluation of the recovery-error constants.
//! * [`experiment`] — seeded Monte-Carlo MSE experiments over the original /
//!   extended / enlarged sampling schemes, with CSV/JSON outputs.

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod io;
pub mod perm;
pub mod recovery;
pub mod rip;
pub mod rng;
pub mod sampler;
pub mod sensing;

pub use error::{Error, Result};
