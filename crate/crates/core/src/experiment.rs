//! Seeded Monte-Carlo experiments over the three sampling schemes.
//!
//! A config describes a grid of (scheme, SNR, K_a/K) cells; every cell runs
//! independent trials whose seeds derive from (master_seed, cell, trial), so
//! results are a pure function of the config regardless of thread schedule.
//! Wall-clock columns are the one exception and are excluded from equality
//! comparisons.

use std::path::Path;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{sweep_c1e_vs_2c1, SweepRow};
use crate::error::{Error, Result};
use crate::perm::{build_family, max_admissible_sets, PermutationFamily};
use crate::recovery::{
    basis_pursuit_with, bpdn_with, erm_recover, AdmmOptions, ErmConfig,
};
use crate::rip::{
    null_space_containment, partition_extended, restricted_isometry_constant,
    rip_probability_bounds, BoundReport, NullSpaceReport, PartitionOutcome, RipMode,
};
use crate::rng::derive_rng;
use crate::sampler::{extend_matrix, sample_noisy, sample_noisy_iid};
use crate::sensing::{
    generate_measurement_matrix, generate_sparse_signal, snr_to_noise_variance, Amplitude,
    Ensemble, Signal,
};

/// Sampling scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// `K x N` i.i.d. matrix, i.i.d. noise.
    Original,
    /// `K_e x N` extended matrix with correlated sub-sample noise.
    Extended,
    /// `K_e x N` i.i.d. matrix (hardware-cost baseline), i.i.d. noise.
    Enlarged,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Original => "original",
            Scheme::Extended => "extended",
            Scheme::Enlarged => "enlarged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryMethod {
    L1,
    Erm,
}

/// l1-solver tolerances and the failure budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub admm_feas_tol: f64,
    pub admm_gap_tol: f64,
    pub admm_max_iter: usize,
    /// Fraction of failed trials tolerated per cell before the run aborts.
    pub failure_budget: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            admm_feas_tol: 1e-9,
            admm_gap_tol: 1e-7,
            admm_max_iter: 100_000,
            failure_budget: 0.01,
        }
    }
}

/// ERM thresholds: one for the extended scheme, one for the others.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ErmSettings {
    pub threshold_extended: f64,
    pub threshold_default: f64,
    pub stop_theta: f64,
    pub max_iter: usize,
}

impl Default for ErmSettings {
    fn default() -> Self {
        Self {
            threshold_extended: 0.035,
            threshold_default: 0.05,
            stop_theta: 1e-3,
            max_iter: 10_000,
        }
    }
}

/// Declarative description of one MSE experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub m: usize,
    /// Each ratio times `K` must be an integer number of additional rows.
    pub ka_over_k_grid: Vec<f64>,
    /// dB values; the strings "inf"/"infinity" denote noiseless sampling.
    #[serde(
        serialize_with = "ser_snr_list",
        deserialize_with = "de_snr_list"
    )]
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub recovery: RecoveryMethod,
    pub ensemble: Ensemble,
    pub master_seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub erm: ErmSettings,
}

fn ser_snr_list<S: serde::Serializer>(
    list: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(list.len()))?;
    for &v in list {
        if v.is_finite() {
            seq.serialize_element(&v)?;
        } else {
            seq.serialize_element("inf")?;
        }
    }
    seq.end()
}

fn de_snr_list<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Snr {
        Num(f64),
        Text(String),
    }
    let raw = Vec::<Snr>::deserialize(d)?;
    raw.into_iter()
        .map(|v| match v {
            Snr::Num(x) => Ok(x),
            Snr::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "bad SNR entry {other:?}; expected a number or \"inf\""
                ))),
            },
        })
        .collect()
}

impl ExperimentConfig {
    /// Validates the config and resolves the `K_a` grid to integers.
    pub fn ka_values(&self) -> Result<Vec<usize>> {
        if self.n == 0 || self.s == 0 || self.k == 0 || self.m == 0 {
            return Err(Error::Config("dimensions must be positive".into()));
        }
        if self.s > self.n {
            return Err(Error::Config(format!("S = {} exceeds N = {}", self.s, self.n)));
        }
        if self.n % self.m != 0 {
            return Err(Error::Config(format!(
                "M = {} must divide N = {}",
                self.m, self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.schemes.is_empty() || self.snr_db_list.is_empty() || self.ka_over_k_grid.is_empty()
        {
            return Err(Error::Config(
                "schemes, snr_db_list and ka_over_k_grid must be non-empty".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.solver.failure_budget) {
            return Err(Error::Config("failure_budget must lie in [0, 1]".into()));
        }
        let max_sets = max_admissible_sets(self.k, self.m)?;
        let mut out = Vec::with_capacity(self.ka_over_k_grid.len());
        for &ratio in &self.ka_over_k_grid {
            let exact = ratio * self.k as f64;
            let rounded = exact.round();
            if ratio < 0.0 || (exact - rounded).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "K_a/K = {ratio} does not give an integer K_a for K = {}",
                    self.k
                )));
            }
            let ka = rounded as usize;
            if ka > self.k * max_sets {
                return Err(Error::Config(format!(
                    "K_a = {ka} exceeds K * I = {} admissible additional rows",
                    self.k * max_sets
                )));
            }
            out.push(ka);
        }
        Ok(out)
    }
}

/// Aggregates of one (scheme, snr, ka) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    #[serde(serialize_with = "ser_snr", deserialize_with = "de_snr")]
    pub snr_db: f64,
    pub ka_over_k: f64,
    pub trials: usize,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub exact_recovery_rate: f64,
    pub mean_iterations: f64,
    pub failures: usize,
    pub wall_time_s: f64,
}

fn ser_snr<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

fn de_snr<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Snr {
        Num(f64),
        Text(String),
    }
    match Snr::deserialize(d)? {
        Snr::Num(x) => Ok(x),
        Snr::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
        Snr::Text(t) => Err(serde::de::Error::custom(format!("bad SNR {t:?}"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Row-wise equality of everything except wall time, which is not a
    /// pure function of the config.
    pub fn stats_eq(&self, other: &ResultTable) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.scheme == b.scheme
                    && (a.snr_db == b.snr_db
                        || (a.snr_db.is_infinite() && b.snr_db.is_infinite()))
                    && a.ka_over_k == b.ka_over_k
                    && a.trials == b.trials
                    && a.mse_mean.to_bits() == b.mse_mean.to_bits()
                    && a.mse_stderr.to_bits() == b.mse_stderr.to_bits()
                    && a.exact_recovery_rate == b.exact_recovery_rate
                    && a.mean_iterations == b.mean_iterations
                    && a.failures == b.failures
            })
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record([
            "scheme",
            "snr_db",
            "ka_over_k",
            "trials",
            "mse_mean",
            "mse_stderr",
            "exact_recovery_rate",
            "mean_iterations",
            "failures",
            "wall_time_s",
        ])?;
        for r in &self.rows {
            let snr = if r.snr_db.is_finite() {
                r.snr_db.to_string()
            } else {
                "inf".to_string()
            };
            w.write_record([
                r.scheme.as_str().to_string(),
                snr,
                r.ka_over_k.to_string(),
                r.trials.to_string(),
                r.mse_mean.to_string(),
                r.mse_stderr.to_string(),
                r.exact_recovery_rate.to_string(),
                r.mean_iterations.to_string(),
                r.failures.to_string(),
                r.wall_time_s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Row for one cell, if present.
    pub fn cell(&self, scheme: Scheme, snr_db: f64, ka_over_k: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.scheme == scheme
                && (r.snr_db == snr_db || (r.snr_db.is_infinite() && snr_db.is_infinite()))
                && r.ka_over_k == ka_over_k
        })
    }
}

struct TrialOutcome {
    mse: f64,
    exact: bool,
    iterations: usize,
    failed: bool,
}

fn run_trial(
    cfg: &ExperimentConfig,
    family: Option<&PermutationFamily>,
    scheme: Scheme,
    snr_db: f64,
    ka: usize,
    cell_id: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let mut seeds = derive_rng(cfg.master_seed, &[0x5452_4941_4c53, cell_id, trial]);
    let phi_seed = seeds.next_u64();
    let signal_seed = seeds.next_u64();
    let noise_seed = seeds.next_u64();

    let x = generate_sparse_signal(cfg.n, cfg.s, Amplitude::PmOne, signal_seed)?;
    let f = Signal::new(x.values.clone());
    let sigma2 = snr_to_noise_variance(&f, cfg.n, snr_db)?;
    let sigma = sigma2.sqrt();

    let (a, y, k_prime) = match scheme {
        Scheme::Original => {
            let phi = generate_measurement_matrix(cfg.k, cfg.n, cfg.ensemble, phi_seed)?;
            let y = sample_noisy_iid(&phi, &f, sigma2, noise_seed)?;
            (phi.entries, y, cfg.k)
        }
        Scheme::Extended => {
            let phi = generate_measurement_matrix(cfg.k, cfg.n, cfg.ensemble, phi_seed)?;
            let fam = family.ok_or_else(|| Error::Config("missing family".into()))?;
            let ext = extend_matrix(&phi, fam, ka)?;
            let y = sample_noisy(&f, &phi, fam, ka, sigma2, noise_seed)?;
            (ext.entries, y.values, cfg.k + ka)
        }
        Scheme::Enlarged => {
            let phi =
                generate_measurement_matrix(cfg.k + ka, cfg.n, cfg.ensemble, phi_seed)?;
            let y = sample_noisy_iid(&phi, &f, sigma2, noise_seed)?;
            (phi.entries, y, cfg.k + ka)
        }
    };

    let recovered = match cfg.recovery {
        RecoveryMethod::L1 => {
            let opts = AdmmOptions {
                feas_tol: cfg.solver.admm_feas_tol,
                gap_tol: cfg.solver.admm_gap_tol,
                max_iter: cfg.solver.admm_max_iter,
                ..Default::default()
            };
            if sigma2 == 0.0 {
                basis_pursuit_with(&a, &y, &opts)
            } else {
                let gamma = (k_prime as f64).sqrt() * sigma;
                bpdn_with(&a, &y, gamma, &opts)
            }
        }
        RecoveryMethod::Erm => {
            let threshold = if scheme == Scheme::Extended {
                cfg.erm.threshold_extended
            } else {
                cfg.erm.threshold_default
            };
            erm_recover(
                &a,
                &y,
                &ErmConfig {
                    threshold,
                    stop_theta: cfg.erm.stop_theta,
                    max_iter: cfg.erm.max_iter,
                    ..Default::default()
                },
            )
        }
    };

    Ok(match recovered {
        Ok(r) if r.converged => {
            let err = &r.x_hat - &x.values;
            TrialOutcome {
                mse: err.norm_squared(),
                exact: err.amax() < 1e-4,
                iterations: r.iterations,
                failed: false,
            }
        }
        Ok(r) => TrialOutcome {
            mse: f64::NAN,
            exact: false,
            iterations: r.iterations,
            failed: true,
        },
        Err(Error::NonConvergence { iterations, .. }) => TrialOutcome {
            mse: f64::NAN,
            exact: false,
            iterations,
            failed: true,
        },
        Err(Error::Infeasible(_)) => TrialOutcome {
            mse: f64::NAN,
            exact: false,
            iterations: 0,
            failed: true,
        },
        Err(e) => return Err(e),
    })
}

/// Runs every (scheme, snr, ka) cell of the config. Trials execute in
/// parallel; aggregation order is fixed by trial index, so the statistics
/// are bit-identical across runs and thread counts.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let ka_values = cfg.ka_values()?;
    let max_ka = ka_values.iter().copied().max().unwrap_or(0);
    let family = if cfg.schemes.contains(&Scheme::Extended) && max_ka > 0 {
        let sets_needed = max_ka.div_ceil(cfg.k);
        Some(build_family(cfg.k, cfg.m, sets_needed)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut cell_id = 0u64;
    for &scheme in &cfg.schemes {
        for &snr_db in &cfg.snr_db_list {
            for (&ratio, &ka) in cfg.ka_over_k_grid.iter().zip(&ka_values) {
                let start = Instant::now();
                let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.trials as u64)
                    .into_par_iter()
                    .map(|trial| {
                        run_trial(cfg, family.as_ref(), scheme, snr_db, ka, cell_id, trial)
                    })
                    .collect();

                let mut mses = Vec::with_capacity(cfg.trials);
                let mut exact = 0usize;
                let mut iter_sum = 0usize;
                let mut failures = 0usize;
                for outcome in outcomes {
                    let o = outcome?;
                    iter_sum += o.iterations;
                    if o.failed {
                        failures += 1;
                    } else {
                        mses.push(o.mse);
                        if o.exact {
                            exact += 1;
                        }
                    }
                }
                if (failures as f64) > cfg.solver.failure_budget * cfg.trials as f64 {
                    return Err(Error::FailureBudget {
                        failed: failures,
                        trials: cfg.trials,
                        budget: cfg.solver.failure_budget,
                    });
                }
                let nr = mses.len() as f64;
                let mean = mses.iter().sum::<f64>() / nr;
                let var = if mses.len() > 1 {
                    mses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nr - 1.0)
                } else {
                    0.0
                };
                rows.push(ResultRow {
                    scheme,
                    snr_db,
                    ka_over_k: ratio,
                    trials: cfg.trials,
                    mse_mean: mean,
                    mse_stderr: (var / nr).sqrt(),
                    exact_recovery_rate: exact as f64 / nr.max(1.0),
                    mean_iterations: iter_sum as f64 / cfg.trials as f64,
                    failures,
                    wall_time_s: start.elapsed().as_secs_f64(),
                });
                cell_id += 1;
            }
        }
    }
    Ok(ResultTable { rows })
}

/// ERM-threshold sweep: reruns the experiment with each candidate threshold
/// applied to every scheme, tagging rows by the threshold.
#[derive(Debug, Clone, Serialize)]
pub struct TauSweepRow {
    pub tau: f64,
    #[serde(flatten)]
    pub row: ResultRow,
}

pub fn run_tau_sweep(cfg: &ExperimentConfig, taus: &[f64]) -> Result<Vec<TauSweepRow>> {
    if taus.is_empty() {
        return Err(Error::Config("empty threshold sweep".into()));
    }
    let mut out = Vec::new();
    for &tau in taus {
        if tau <= 0.0 {
            return Err(Error::Config(format!("threshold {tau} must be positive")));
        }
        let mut sub = cfg.clone();
        sub.recovery = RecoveryMethod::Erm;
        sub.erm.threshold_extended = tau;
        sub.erm.threshold_default = tau;
        let table = run_mse_experiment(&sub)?;
        out.extend(table.rows.into_iter().map(|row| TauSweepRow { tau, row }));
    }
    Ok(out)
}

pub fn write_tau_sweep_csv<P: AsRef<Path>>(path: P, rows: &[TauSweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record([
        "tau",
        "scheme",
        "snr_db",
        "ka_over_k",
        "trials",
        "mse_mean",
        "mse_stderr",
        "exact_recovery_rate",
        "mean_iterations",
        "failures",
        "wall_time_s",
    ])?;
    for r in rows {
        w.write_record([
            r.tau.to_string(),
            r.row.scheme.as_str().to_string(),
            r.row.snr_db.to_string(),
            r.row.ka_over_k.to_string(),
            r.row.trials.to_string(),
            r.row.mse_mean.to_string(),
            r.row.mse_stderr.to_string(),
            r.row.exact_recovery_rate.to_string(),
            r.row.mean_iterations.to_string(),
            r.row.failures.to_string(),
            r.row.wall_time_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parameters of the bound-versus-SNR curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Fig3Params {
    pub snr_db_min: f64,
    pub snr_db_max: f64,
    pub snr_db_step: f64,
    pub k: usize,
    pub ka: usize,
    pub m: usize,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Self {
            snr_db_min: -20.0,
            snr_db_max: 40.0,
            snr_db_step: 1.0,
            k: 16,
            ka: 16,
            m: 8,
        }
    }
}

pub fn run_fig3_sweep(params: &Fig3Params) -> Result<Vec<SweepRow>> {
    if params.snr_db_step <= 0.0 || params.snr_db_max < params.snr_db_min {
        return Err(Error::Config("bad SNR grid".into()));
    }
    let mut grid = Vec::new();
    let mut snr = params.snr_db_min;
    while snr <= params.snr_db_max + 1e-9 {
        grid.push(snr);
        snr += params.snr_db_step;
    }
    sweep_c1e_vs_2c1(&grid, params.ka, params.k, params.m)
}

pub fn write_fig3_csv<P: AsRef<Path>>(path: P, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["snr_db", "c1e", "two_c1"])?;
    for r in rows {
        w.write_record([r.snr_db.to_string(), r.c1e.to_string(), r.two_c1.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fig3_csv<P: AsRef<Path>>(path: P) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .ok_or_else(|| Error::Config("short fig3 row".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad fig3 float: {e}")))
        };
        rows.push(SweepRow {
            snr_db: parse(0)?,
            c1e: parse(1)?,
            two_c1: parse(2)?,
        });
    }
    Ok(rows)
}

/// Config of the RIP scan batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipScanConfig {
    pub n: usize,
    pub k: usize,
    pub ka: usize,
    pub m: usize,
    pub s: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_ensemble")]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub mode: RipMode,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Target isometry constant for the probability-bound evaluation.
    #[serde(default = "default_delta")]
    pub delta_s: f64,
    #[serde(default = "default_c3")]
    pub c3: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_ensemble() -> Ensemble {
    Ensemble::Gaussian
}
fn default_budget() -> usize {
    1 << 20
}
fn default_delta() -> f64 {
    0.5
}
fn default_c3() -> f64 {
    0.001
}
fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize)]
pub struct RipScanEntry {
    pub seed: u64,
    pub delta_phi: f64,
    pub delta_ext: f64,
    pub subsets_checked: usize,
    pub partition: PartitionOutcome,
    /// Absent when `K_e >= N` leaves no null space to check.
    pub null_space: Option<NullSpaceReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RipScanReport {
    pub config: RipScanConfig,
    pub bounds: BoundReport,
    pub entries: Vec<RipScanEntry>,
}

/// Empirical RIP constants, partition plans, probability bounds and
/// null-space checks for a seeded batch of matrices. An empty seed list
/// yields an empty report.
pub fn rip_scan(cfg: &RipScanConfig) -> Result<RipScanReport> {
    if cfg.n % cfg.m != 0 {
        return Err(Error::Config(format!(
            "M = {} must divide N = {}",
            cfg.m, cfg.n
        )));
    }
    let sets_needed = cfg.ka.div_ceil(cfg.k).max(1);
    let family = build_family(cfg.k, cfg.m, sets_needed)?;
    let bounds = rip_probability_bounds(cfg.k, cfg.ka, cfg.m, cfg.n, cfg.s, cfg.delta_s, cfg.c3)?;

    let entries = cfg
        .seeds
        .iter()
        .map(|&seed| {
            let phi = generate_measurement_matrix(cfg.k, cfg.n, cfg.ensemble, seed)?;
            let ext = extend_matrix(&phi, &family, cfg.ka)?;
            let delta_phi = restricted_isometry_constant(
                &phi.entries,
                cfg.s,
                cfg.k,
                cfg.mode,
                cfg.budget,
                seed,
            )?;
            let delta_ext = restricted_isometry_constant(
                &ext.entries,
                cfg.s,
                ext.k_e(),
                cfg.mode,
                cfg.budget,
                seed,
            )?;
            let null_space = if ext.k_e() < cfg.n {
                Some(null_space_containment(&phi, &ext, cfg.tol)?)
            } else {
                None
            };
            Ok(RipScanEntry {
                seed,
                delta_phi: delta_phi.delta,
                delta_ext: delta_ext.delta,
                subsets_checked: delta_phi.subsets_checked,
                partition: partition_extended(&ext)?,
                null_space,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RipScanReport {
        config: cfg.clone(),
        bounds,
        entries,
    })
}

/// Run manifest: config digest plus provenance of the invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub master_seed: u64,
    pub git_describe: String,
    pub wall_time_s: f64,
}

pub fn build_manifest(config_json: &str, master_seed: u64, wall_time_s: f64) -> Manifest {
    let digest = Sha256::digest(config_json.as_bytes());
    let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    let git_describe = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into());
    Manifest {
        config_sha256,
        master_seed,
        git_describe,
        wall_time_s,
    }
}
