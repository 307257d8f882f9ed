//! Sparse recovery: l1 minimization (noiseless and noisy) and
//! empirical-risk minimization by iterative hard thresholding.

mod admm;

pub use admm::AdmmOptions;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derive_rng;

/// Which solver produced a [`RecoveryResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    BasisPursuit,
    Bpdn,
    Erm,
}

/// Recovered coefficient vector with solver diagnostics.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub x_hat: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Solver-specific objective at the returned iterate: the l1 norm for
    /// basis pursuit / BPDN, the l0-penalized squared residual for ERM.
    pub objective: f64,
    pub solver: SolverTag,
}

/// Noiseless recovery: `min ||x||_1 s.t. A x = y`.
pub fn basis_pursuit(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<RecoveryResult> {
    basis_pursuit_with(a, y, &AdmmOptions::default())
}

pub fn basis_pursuit_with(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    opts: &AdmmOptions,
) -> Result<RecoveryResult> {
    let solve = admm::solve_l1(a, y, 0.0, opts)?;
    Ok(RecoveryResult {
        objective: solve.x.lp_norm(1),
        iterations: solve.iterations,
        converged: solve.converged,
        x_hat: solve.x,
        solver: SolverTag::BasisPursuit,
    })
}

/// Noisy recovery: `min ||x||_1 s.t. ||A x - y|| <= gamma`, with `gamma` the
/// noise-energy bound (`sqrt(K') sigma` in the experiments).
pub fn bpdn(a: &DMatrix<f64>, y: &DVector<f64>, gamma: f64) -> Result<RecoveryResult> {
    bpdn_with(a, y, gamma, &AdmmOptions::default())
}

pub fn bpdn_with(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gamma: f64,
    opts: &AdmmOptions,
) -> Result<RecoveryResult> {
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    let solve = admm::solve_l1(a, y, gamma, opts)?;
    Ok(RecoveryResult {
        objective: solve.x.lp_norm(1),
        iterations: solve.iterations,
        converged: solve.converged,
        x_hat: solve.x,
        solver: SolverTag::Bpdn,
    })
}

/// Configuration of the iterative bound optimization (hard-thresholded
/// Landweber iteration) for the l0-penalized empirical risk.
#[derive(Debug, Clone)]
pub struct ErmConfig {
    /// Hard threshold `tau`.
    pub threshold: f64,
    /// Gradient step; defaults to `1/lambda` with `lambda` the largest
    /// eigenvalue of `A^T A`.
    pub step: Option<f64>,
    /// Stop once `||x_{i+1} - x_i||_inf` drops to this value.
    pub stop_theta: f64,
    pub max_iter: usize,
    /// Risk-penalty scale; only used to derive the theoretical threshold.
    pub epsilon: Option<f64>,
}

impl Default for ErmConfig {
    fn default() -> Self {
        Self {
            threshold: 0.05,
            step: None,
            stop_theta: 1e-3,
            max_iter: 10_000,
            epsilon: None,
        }
    }
}

impl ErmConfig {
    /// Threshold `sqrt(2 log(2) log(N) / (lambda epsilon))` that aligns the
    /// hard-threshold iteration with the l0 penalty `2 log(2) log(N) / eps`.
    pub fn theoretical_threshold(lambda: f64, n: usize, epsilon: f64) -> f64 {
        (2.0 * std::f64::consts::LN_2 * (n as f64).ln() / (lambda * epsilon)).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.threshold <= 0.0 {
            return Err(Error::InvalidParameter("ERM threshold must be > 0".into()));
        }
        if self.stop_theta <= 0.0 {
            return Err(Error::InvalidParameter("ERM stop theta must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("ERM max_iter must be >= 1".into()));
        }
        if let Some(step) = self.step {
            if step <= 0.0 {
                return Err(Error::InvalidParameter("ERM step must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Largest eigenvalue of `A^T A` by power iteration.
pub fn largest_gram_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut rng = derive_rng(0x504f_5745_52, &[n as u64]);
    use rand::Rng;
    let mut v = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    v /= v.norm();
    let mut lambda = 0.0f64;
    for _ in 0..10_000 {
        let av = a * &v;
        let w = a.transpose() * av;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let next = (a * &v).norm_squared();
        if (next - lambda).abs() <= 1e-14 * next.max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// One hard-thresholded gradient step `H_tau(x + step A^T (y - A x))`.
pub fn erm_step(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DVector<f64>,
    step: f64,
    tau: f64,
) -> DVector<f64> {
    let mut v = x + a.transpose() * (y - a * x) * step;
    for z in v.iter_mut() {
        if z.abs() <= tau {
            *z = 0.0;
        }
    }
    v
}

/// Penalized objective `||y - A x||^2 + weight ||x||_0`. With
/// `weight = lambda tau^2` the hard-threshold iteration is a
/// majorize-minimize scheme for this objective and never increases it.
pub fn erm_objective(a: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, weight: f64) -> f64 {
    let nnz = x.iter().filter(|v| **v != 0.0).count();
    (y - a * x).norm_squared() + weight * nnz as f64
}

/// Empirical-risk recovery by iterative bound optimization; starts from
/// zero and stops on the infinity-norm step criterion. Exhausting
/// `max_iter` reports `converged = false` on the returned result rather
/// than failing.
pub fn erm_recover(a: &DMatrix<f64>, y: &DVector<f64>, cfg: &ErmConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    if y.len() != a.nrows() {
        return Err(Error::Dimension(format!(
            "y has length {}, matrix has {} rows",
            y.len(),
            a.nrows()
        )));
    }
    let lambda = match cfg.step {
        Some(step) => 1.0 / step,
        None => largest_gram_eigenvalue(a),
    };
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(
            "A^T A has no positive eigenvalue; step is undefined".into(),
        ));
    }
    let step = cfg.step.unwrap_or(1.0 / lambda);

    let mut x = DVector::zeros(a.ncols());
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iter {
        iterations = it;
        let next = erm_step(a, y, &x, step, cfg.threshold);
        let delta = (&next - &x).amax();
        x = next;
        if delta <= cfg.stop_theta {
            converged = true;
            break;
        }
    }
    let objective = erm_objective(a, y, &x, lambda * cfg.threshold * cfg.threshold);
    Ok(RecoveryResult {
        x_hat: x,
        iterations,
        converged,
        objective,
        solver: SolverTag::Erm,
    })
}

/// Mean squared residual `(1/K) sum_j (y_j - phi_j f_hat)^2`.
pub fn empirical_risk(phi: &DMatrix<f64>, y: &DVector<f64>, f_hat: &DVector<f64>) -> Result<f64> {
    if y.len() != phi.nrows() || f_hat.len() != phi.ncols() {
        return Err(Error::Dimension(format!(
            "risk dimensions: phi {}x{}, y {}, f_hat {}",
            phi.nrows(),
            phi.ncols(),
            y.len(),
            f_hat.len()
        )));
    }
    Ok((y - phi * f_hat).norm_squared() / phi.nrows() as f64)
}

/// Per-sample excess-risk terms
/// `U_j = (y_j - phi_j f)^2 - (y_j - phi_j f_hat)^2`.
pub fn risk_gap_terms(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    f: &DVector<f64>,
    f_hat: &DVector<f64>,
) -> Result<DVector<f64>> {
    if y.len() != phi.nrows() || f.len() != phi.ncols() || f_hat.len() != phi.ncols() {
        return Err(Error::Dimension("risk-gap dimension mismatch".into()));
    }
    let res_true = y - phi * f;
    let res_hat = y - phi * f_hat;
    Ok(DVector::from_fn(y.len(), |j, _| {
        res_true[j] * res_true[j] - res_hat[j] * res_hat[j]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use crate::sensing::{
        generate_measurement_matrix, generate_sparse_signal, Amplitude, Ensemble,
    };
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn planted(
        k: usize,
        n: usize,
        s: usize,
        seed: u64,
    ) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let phi = generate_measurement_matrix(k, n, Ensemble::Gaussian, seed).unwrap();
        let x = generate_sparse_signal(n, s, Amplitude::PmOne, seed ^ 0xabcd).unwrap();
        let y = &phi.entries * &x.values;
        (phi.entries, y, x.values)
    }

    #[test]
    fn identity_matrix_recovers_exactly() {
        let a = DMatrix::<f64>::identity(6, 6);
        let y = DVector::from_vec(vec![0.5, 0.0, -2.0, 0.0, 1.0, 0.0]);
        let r = basis_pursuit(&a, &y).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.x_hat, y, epsilon = 1e-7);
    }

    #[test]
    fn zero_samples_recover_zero() {
        let (a, _, _) = planted(8, 24, 2, 1);
        let r = basis_pursuit(&a, &DVector::zeros(8)).unwrap();
        assert_eq!(r.x_hat, DVector::zeros(24));
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn plant_and_recover_noiseless() {
        let mut exact = 0;
        let trials = 100;
        for seed in 0..trials {
            let (a, y, x) = planted(24, 64, 2, seed);
            let r = basis_pursuit(&a, &y).unwrap();
            if (&r.x_hat - &x).amax() < 1e-4 {
                exact += 1;
            } else {
                println!("seed {seed}: max deviation {:.3e}", (&r.x_hat - &x).amax());
            }
        }
        assert!(exact >= 95, "only {exact}/{trials} exact recoveries");
    }

    #[test]
    fn infeasible_system_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        match basis_pursuit(&a, &y) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn bpdn_large_gamma_returns_zero() {
        let (a, y, _) = planted(12, 32, 2, 3);
        let r = bpdn(&a, &y, y.norm() * 1.01).unwrap();
        assert_eq!(r.x_hat, DVector::zeros(32));
    }

    #[test]
    fn bpdn_rejects_negative_gamma() {
        let (a, y, _) = planted(12, 32, 2, 4);
        assert!(bpdn(&a, &y, -1.0).is_err());
    }

    #[test]
    fn bpdn_zero_gamma_matches_basis_pursuit() {
        for seed in 0..50 {
            let (a, y, _) = planted(16, 40, 3, 100 + seed);
            let bp = basis_pursuit(&a, &y).unwrap();
            let dn = bpdn(&a, &y, 0.0).unwrap();
            assert!(
                (&bp.x_hat - &dn.x_hat).amax() < 1e-6,
                "seed {seed}: deviation {:.3e}",
                (&bp.x_hat - &dn.x_hat).amax()
            );
        }
    }

    #[test]
    fn bpdn_feasibility_contract() {
        // 25 dB planted instance; gamma = sqrt(K) sigma.
        let (a, y_clean, x) = planted(24, 64, 2, 7);
        let sigma2 = x.norm_squared() / (64.0 * 10f64.powf(2.5));
        let mut rng = derive_rng(19, &[]);
        let noise = DVector::from_fn(24, |_, _| {
            let z: f64 = rng.sample(StandardNormal);
            z * sigma2.sqrt()
        });
        let y = &y_clean + noise;
        let gamma = (24.0 * sigma2).sqrt();
        let r = bpdn(&a, &y, gamma).unwrap();
        assert!(r.converged);
        let feas = (&a * &r.x_hat - &y).norm();
        assert!(feas <= gamma * (1.0 + 1e-6), "{feas} > {gamma}");
        // Error at most a small multiple of gamma on a well-conditioned
        // planted instance.
        assert!((&r.x_hat - &x).norm() <= 10.0 * gamma);
    }

    #[test]
    fn solution_invariant_under_scaling() {
        for seed in 0..10 {
            let (a, y, _) = planted(16, 40, 2, 300 + seed);
            let base = basis_pursuit(&a, &y).unwrap();
            let scaled = basis_pursuit(&(&a * 3.7), &(&y * 3.7)).unwrap();
            assert!(
                (&base.x_hat - &scaled.x_hat).amax() < 1e-8,
                "seed {seed}: deviation {:.3e}",
                (&base.x_hat - &scaled.x_hat).amax()
            );
        }
    }

    #[test]
    fn erm_zero_input_fixed_point() {
        let (a, _, _) = planted(12, 32, 2, 5);
        let r = erm_recover(&a, &DVector::zeros(12), &ErmConfig::default()).unwrap();
        assert_eq!(r.x_hat, DVector::zeros(32));
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn erm_identity_single_step_threshold() {
        let a = DMatrix::<f64>::identity(5, 5);
        let mut y = DVector::zeros(5);
        y[0] = 1.0;
        y[1] = 0.2;
        let cfg = ErmConfig {
            threshold: 0.5,
            ..Default::default()
        };
        let r = erm_recover(&a, &y, &cfg).unwrap();
        let mut expected = DVector::zeros(5);
        expected[0] = 1.0;
        assert_eq!(r.x_hat, expected);
        assert!(r.converged);
    }

    #[test]
    fn erm_objective_descends() {
        for seed in 0..100 {
            let (a, y_clean, _) = planted(24, 48, 3, 500 + seed);
            let mut rng = derive_rng(seed, &[1]);
            let y = DVector::from_fn(24, |j, _| {
                let z: f64 = rng.sample(StandardNormal);
                y_clean[j] + 0.05 * z
            });
            let lambda = largest_gram_eigenvalue(&a);
            let tau = 0.05;
            let weight = lambda * tau * tau;
            let mut x = DVector::zeros(48);
            let mut obj = erm_objective(&a, &y, &x, weight);
            for _ in 0..200 {
                x = erm_step(&a, &y, &x, 1.0 / lambda, tau);
                let next = erm_objective(&a, &y, &x, weight);
                assert!(
                    next <= obj + 1e-12 * obj.abs().max(1.0),
                    "seed {seed}: objective rose from {obj} to {next}"
                );
                obj = next;
            }
        }
    }

    #[test]
    fn erm_flags_non_convergence_without_error() {
        let (a, y, _) = planted(12, 32, 2, 6);
        let cfg = ErmConfig {
            max_iter: 2,
            stop_theta: 1e-12,
            ..Default::default()
        };
        let r = erm_recover(&a, &y, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn power_iteration_matches_eigen() {
        let (a, _, _) = planted(10, 24, 2, 8);
        let lambda = largest_gram_eigenvalue(&a);
        let exact = (a.transpose() * &a).symmetric_eigenvalues().max();
        assert_relative_eq!(lambda, exact, max_relative = 1e-9);
    }

    #[test]
    fn empirical_risk_values() {
        let (a, y, x) = planted(16, 32, 3, 9);
        assert_relative_eq!(empirical_risk(&a, &y, &x).unwrap(), 0.0, epsilon = 1e-20);

        let u = risk_gap_terms(&a, &y, &x, &x).unwrap();
        assert_eq!(u, DVector::zeros(16));

        assert!(empirical_risk(&a, &DVector::zeros(3), &x).is_err());
    }

    #[test]
    fn empirical_risk_estimates_noise_floor() {
        // With f_hat = f the residual is pure noise, so the empirical risk
        // estimates sigma^2; 3-standard-error Monte-Carlo band.
        let (a, y_clean, x) = planted(16, 32, 3, 10);
        let sigma2 = 0.04;
        let trials = 2_000;
        let mut acc = 0.0;
        for t in 0..trials {
            let mut rng = derive_rng(t, &[2]);
            let y = DVector::from_fn(16, |j, _| {
                let z: f64 = rng.sample(StandardNormal);
                y_clean[j] + z * sigma2.sqrt()
            });
            acc += empirical_risk(&a, &y, &x).unwrap();
        }
        let mean = acc / trials as f64;
        // var of one risk draw = 2 sigma^4 / K.
        let se = (2.0 * sigma2 * sigma2 / (16.0 * trials as f64)).sqrt();
        assert!(
            (mean - sigma2).abs() <= 3.0 * se,
            "risk {mean:.5} vs sigma2 {sigma2} (se {se:.2e})"
        );
    }
}
