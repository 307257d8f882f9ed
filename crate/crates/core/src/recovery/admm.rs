//! ADMM solver for equality- and ball-constrained l1 minimization.
//!
//! Both programs are handled in one splitting over `w = (x, r)`:
//!
//! ```text
//! min ||x||_1 + I{||r|| <= gamma}(r)   s.t.   A x + r = y
//! ```
//!
//! The prox step is a soft threshold on `x` and a ball projection on `r`;
//! the consensus step is an exact projection onto the affine set, backed by
//! a single Cholesky factorization of `A A^T + I`. Convergence is declared
//! from a dual certificate: `mu = rho * u_r` scaled into the dual-feasible
//! set `||A^T mu||_inf <= 1` bounds the optimum from below by
//! `y^T mu - gamma ||mu||`, so the reported duality gap is rigorous.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct AdmmOptions {
    /// Feasibility tolerance, relative to `max(1, ||y||)`.
    pub feas_tol: f64,
    /// Duality-gap tolerance, relative to `max(1, ||x||_1)`.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in (1, 2).
    pub relaxation: f64,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-10,
            gap_tol: 1e-9,
            max_iter: 100_000,
            relaxation: 1.7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmmSolve {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `||A x - y|| - gamma`, clamped at zero.
    pub feas_violation: f64,
    /// Certified duality gap at the returned iterate.
    pub gap: f64,
}

fn soft_threshold(v: &mut DVector<f64>, kappa: f64) {
    for z in v.iter_mut() {
        *z = z.signum() * (z.abs() - kappa).max(0.0);
    }
}

fn ball_project(v: &mut DVector<f64>, gamma: f64) {
    let norm = v.norm();
    if norm > gamma {
        if gamma == 0.0 {
            v.fill(0.0);
        } else {
            *v *= gamma / norm;
        }
    }
}

/// Rejects instances where no `x` satisfies `||A x - y|| <= gamma`, via the
/// ridge-regularized least-squares residual.
fn check_feasible(a: &DMatrix<f64>, y: &DVector<f64>, gamma: f64) -> Result<()> {
    let n = a.ncols();
    let gram = a.transpose() * a;
    let delta = 1e-12 * (gram.trace() / n as f64).max(f64::MIN_POSITIVE);
    let reg = &gram + DMatrix::<f64>::identity(n, n) * delta;
    let chol = Cholesky::new(reg).ok_or_else(|| {
        Error::InvalidParameter("could not factor A^T A for the feasibility check".into())
    })?;
    let x_ls = chol.solve(&(a.transpose() * y));
    let residual = (a * x_ls - y).norm();
    let feasible = if gamma == 0.0 {
        residual <= 1e-7 * y.norm().max(1.0)
    } else {
        residual <= gamma * (1.0 + 1e-9) + 1e-12
    };
    if feasible {
        Ok(())
    } else {
        Err(Error::Infeasible(format!(
            "distance from y to the range of A is {residual:.3e}, above gamma = {gamma:.3e}"
        )))
    }
}

/// Minimizes `||x||_1` subject to `||A x - y|| <= gamma` (`gamma = 0` is the
/// equality-constrained program).
pub fn solve_l1(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gamma: f64,
    opts: &AdmmOptions,
) -> Result<AdmmSolve> {
    let k = a.nrows();
    let n = a.ncols();
    if y.len() != k {
        return Err(Error::Dimension(format!(
            "y has length {}, matrix has {k} rows",
            y.len()
        )));
    }

    // Zero is feasible and l1-minimal.
    if y.norm() <= gamma {
        return Ok(AdmmSolve {
            x: DVector::zeros(n),
            iterations: 0,
            converged: true,
            feas_violation: 0.0,
            gap: 0.0,
        });
    }
    check_feasible(a, y, gamma)?;

    let gram = a * a.transpose() + DMatrix::<f64>::identity(k, k);
    let chol = Cholesky::new(gram)
        .ok_or_else(|| Error::InvalidParameter("could not factor A A^T + I".into()))?;

    let y_scale = y.norm().max(1.0);
    let alpha = opts.relaxation;
    let mut rho = 1.0f64;

    let mut x = DVector::<f64>::zeros(n);
    let mut r = DVector::<f64>::zeros(k);
    let mut vx = DVector::<f64>::zeros(n);
    let mut vr = DVector::<f64>::zeros(k);
    let mut ux = DVector::<f64>::zeros(n);
    let mut ur = DVector::<f64>::zeros(k);

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut feas_violation = f64::INFINITY;
    let mut gap = f64::INFINITY;

    for it in 1..=opts.max_iter {
        iterations = it;

        x.copy_from(&vx);
        x -= &ux;
        soft_threshold(&mut x, 1.0 / rho);
        r.copy_from(&vr);
        r -= &ur;
        ball_project(&mut r, gamma);

        // Relaxed consensus point.
        let hx = &x * alpha + &vx * (1.0 - alpha);
        let hr = &r * alpha + &vr * (1.0 - alpha);

        let px = &hx + &ux;
        let pr = &hr + &ur;
        let s = chol.solve(&(a * &px + &pr - y));
        let vx_old = vx.clone();
        let vr_old = vr.clone();
        vx = &px - a.transpose() * &s;
        vr = &pr - &s;

        ux += &hx - &vx;
        ur += &hr - &vr;

        if it % 10 == 0 || it == opts.max_iter {
            let resid = (a * &x - y).norm();
            feas_violation = (resid - gamma).max(0.0);
            let l1 = x.lp_norm(1);
            let mu = &ur * rho;
            let scale = (a.transpose() * &mu).amax().max(1.0);
            let dual_value = (y.dot(&mu) - gamma * mu.norm()) / scale;
            gap = l1 - dual_value;

            let score = feas_violation / y_scale + gap.abs() / l1.max(1.0);
            if best.as_ref().map_or(true, |(b, _)| score < *b) {
                best = Some((score, x.clone()));
            }
            if feas_violation <= opts.feas_tol * y_scale
                && gap <= opts.gap_tol * l1.max(1.0)
            {
                converged = true;
                break;
            }
        }

        if it % 25 == 0 {
            let prim = ((&x - &vx).norm_squared() + (&r - &vr).norm_squared()).sqrt();
            let dual = rho
                * ((&vx - &vx_old).norm_squared() + (&vr - &vr_old).norm_squared()).sqrt();
            if prim > 10.0 * dual && rho < 1e8 {
                rho *= 2.0;
                ux /= 2.0;
                ur /= 2.0;
            } else if dual > 10.0 * prim && rho > 1e-8 {
                rho /= 2.0;
                ux *= 2.0;
                ur *= 2.0;
            }
        }
    }

    if converged {
        Ok(AdmmSolve {
            x,
            iterations,
            converged,
            feas_violation,
            gap,
        })
    } else {
        let best = best.map(|(_, x)| x).unwrap_or(x);
        Err(Error::NonConvergence {
            iterations,
            residual: feas_violation,
            best: Box::new(best),
        })
    }
}
