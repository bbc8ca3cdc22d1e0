//! Newton minimization of the path cost with block-tridiagonal factorization.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{SdeModel, StepScratch};
use crate::pathspace::{deterministic_path, BlockTridiag, Path, PathProblem};

/// Settings for the Levenberg-regularized Newton iteration.
#[derive(Debug, Clone)]
pub struct NewtonSettings {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub levenberg_init: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            grad_tol: 1e-9,
            max_iters: 100,
            levenberg_init: 1e-8,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 40,
        }
    }
}

/// Block Cholesky factor of a (possibly shifted) block-tridiagonal matrix:
/// `H + lambda I = L L^T` with lower-bidiagonal block structure. Enables
/// `O(K D^3)` solves, log-determinant, and Gaussian sampling.
pub struct BlockCholesky {
    dim: usize,
    blocks: usize,
    /// Lower-triangular diagonal blocks `L_i`.
    l: Vec<f64>,
    /// Sub-diagonal blocks `C_i = B_{i-1} L_{i-1}^{-T}` (index shifted: `c[i]`
    /// couples block-row `i+1` with block-column `i`).
    c: Vec<f64>,
}

/// Factorize `h + shift * I`. The shift is the Levenberg regularization; pass
/// zero for a plain factorization. `NotPositiveDefinite` carries the index of
/// the first failing block and is an expected outcome, not a fault.
pub fn factorize_shifted(h: &BlockTridiag, shift: f64) -> Result<BlockCholesky> {
    let d = h.dim();
    let k = h.blocks();
    let dd = d * d;
    let mut l = vec![0.0; k * dd];
    let mut c = vec![0.0; k.saturating_sub(1) * dd];
    let mut work = vec![0.0; dd];
    for i in 0..k {
        work.copy_from_slice(h.diag_block(i));
        for r in 0..d {
            work[r * d + r] += shift;
        }
        if i > 0 {
            // C_i from C_i L_{i-1}^T = B_{i-1}: forward-solve each row.
            let lprev = &l[(i - 1) * dd..i * dd];
            let b = h.off_block(i - 1);
            let ci = &mut c[(i - 1) * dd..i * dd];
            ci.copy_from_slice(b);
            for r in 0..d {
                let row = &mut ci[r * d..(r + 1) * d];
                linalg::solve_lower(d, lprev, row);
            }
            linalg::sub_aat(d, ci, &mut work);
        }
        if !linalg::chol_lower(d, &mut work) {
            return Err(Error::NotPositiveDefinite { block: i });
        }
        l[i * dd..(i + 1) * dd].copy_from_slice(&work);
    }
    Ok(BlockCholesky { dim: d, blocks: k, l, c })
}

/// Plain factorization of `h`.
pub fn factorize(h: &BlockTridiag) -> Result<BlockCholesky> {
    factorize_shifted(h, 0.0)
}

impl BlockCholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    fn l_block(&self, i: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.l[i * dd..(i + 1) * dd]
    }

    fn c_block(&self, i: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.c[i * dd..(i + 1) * dd]
    }

    /// Solve `(L L^T) x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let d = self.dim;
        let mut tmp = vec![0.0; d];
        // forward: L y = b
        for i in 0..self.blocks {
            if i > 0 {
                let ci = self.c_block(i - 1);
                let (head, tail) = x.split_at_mut(i * d);
                let yprev = &head[(i - 1) * d..i * d];
                linalg::mat_vec(d, ci, yprev, &mut tmp);
                for r in 0..d {
                    tail[r] -= tmp[r];
                }
            }
            linalg::solve_lower(d, self.l_block(i), &mut x[i * d..(i + 1) * d]);
        }
        // backward: L^T x = y
        for i in (0..self.blocks).rev() {
            if i + 1 < self.blocks {
                let ci = self.c_block(i);
                let (head, tail) = x.split_at_mut((i + 1) * d);
                let xnext = &tail[..d];
                linalg::mat_t_vec(d, ci, xnext, &mut tmp);
                for r in 0..d {
                    head[i * d + r] -= tmp[r];
                }
            }
            linalg::solve_lower_t(d, self.l_block(i), &mut x[i * d..(i + 1) * d]);
        }
    }

    /// Solve `L^T x = z` in place. Mapping a standard normal `z` through this
    /// produces a draw with covariance `(L L^T)^{-1}`.
    pub fn solve_lt_in_place(&self, x: &mut [f64]) {
        let d = self.dim;
        let mut tmp = vec![0.0; d];
        for i in (0..self.blocks).rev() {
            if i + 1 < self.blocks {
                let ci = self.c_block(i);
                let (head, tail) = x.split_at_mut((i + 1) * d);
                let xnext = &tail[..d];
                linalg::mat_t_vec(d, ci, xnext, &mut tmp);
                for r in 0..d {
                    head[i * d + r] -= tmp[r];
                }
            }
            linalg::solve_lower_t(d, self.l_block(i), &mut x[i * d..(i + 1) * d]);
        }
    }

    /// `log det (L L^T)`.
    pub fn log_det(&self) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..self.blocks {
            let li = self.l_block(i);
            for r in 0..d {
                s += li[r * d + r].ln();
            }
        }
        2.0 * s
    }
}

/// First `D x D` block of `H^{-1}`, divided by `dt`: the next-step marginal
/// covariance of the dynamic proposal. Computed by solving `H u = e_i` for the
/// leading unit vectors; the inverse is never formed.
pub fn marginal_covariance(chol: &BlockCholesky, dt: f64) -> Vec<f64> {
    let d = chol.dim();
    let n = chol.blocks() * d;
    let mut sigma = vec![0.0; d * d];
    let mut u = vec![0.0; n];
    for i in 0..d {
        u.fill(0.0);
        u[i] = 1.0;
        chol.solve_in_place(&mut u);
        for r in 0..d {
            sigma[r * d + i] = u[r] / dt;
        }
    }
    // Enforce exact symmetry against roundoff.
    for r in 0..d {
        for c in (r + 1)..d {
            let m = 0.5 * (sigma[r * d + c] + sigma[c * d + r]);
            sigma[r * d + c] = m;
            sigma[c * d + r] = m;
        }
    }
    sigma
}

/// Outcome of a successful path optimization.
pub struct OptimalPathResult {
    /// The minimizer.
    pub phi: Path,
    /// `F(phi)`.
    pub cost: f64,
    /// Hessian at `phi`.
    pub hessian: BlockTridiag,
    /// Unshifted Cholesky factor of the Hessian.
    pub chol: BlockCholesky,
    /// `(H^{-1})_{1,1} / dt`, row-major `D x D`.
    pub sigma_first: Vec<f64>,
    /// Infinity norm of the gradient at `phi`.
    pub grad_norm: f64,
    /// Newton steps taken.
    pub iterations: usize,
}

/// Minimize the path cost by Newton's method with Levenberg regularization
/// and Armijo backtracking.
pub fn minimize_path(
    model: &SdeModel,
    dt: f64,
    start: &[f64],
    init: &Path,
    settings: &NewtonSettings,
) -> Result<OptimalPathResult> {
    let d = model.dim();
    let k = init.len();
    assert!(k >= 1);
    if !init.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    let mut prob = PathProblem::new(model, dt, start);
    let mut x = init.clone();
    let mut cost = prob.cost(&x)?;
    let mut grad = vec![0.0; k * d];
    let mut h = BlockTridiag::zeros(d, k);
    let mut lambda = settings.levenberg_init;
    let mut iterations = 0;

    let mut at_floor = false;

    loop {
        prob.grad_into(&x, &mut grad)?;
        let mut gnorm = linalg::inf_norm(&grad);
        if gnorm <= settings.grad_tol || at_floor {
            let mut hessian = h_at(&mut prob, &x)?;
            let mut chol = factorize(&hessian)?;
            // One unregularized polishing step: quadratic convergence takes
            // the gradient from "just under tolerance" to the roundoff floor,
            // which matters downstream where weights divide residual gradients
            // by epsilon. Reverted if it does not keep the cost at its floor.
            let mut delta: Vec<f64> = grad.iter().map(|g| -g).collect();
            chol.solve_in_place(&mut delta);
            let mut trial = x.clone();
            linalg::axpy(1.0, &delta, trial.as_flat_mut());
            let slack = 4.0 * f64::EPSILON * cost.abs().max(1.0);
            if let Ok(f_trial) = prob.cost(&trial) {
                if f_trial <= cost + slack {
                    if let Ok(h_new) = h_at(&mut prob, &trial) {
                        if let Ok(chol_new) = factorize(&h_new) {
                            x = trial;
                            cost = f_trial;
                            prob.grad_into(&x, &mut grad)?;
                            gnorm = linalg::inf_norm(&grad);
                            hessian = h_new;
                            chol = chol_new;
                        }
                    }
                }
            }
            let sigma_first = marginal_covariance(&chol, dt);
            return Ok(OptimalPathResult {
                phi: x,
                cost,
                hessian,
                chol,
                sigma_first,
                grad_norm: gnorm,
                iterations,
            });
        }
        if iterations >= settings.max_iters {
            return Err(Error::MaxItersExceeded {
                max_iters: settings.max_iters,
                best: x.as_flat().to_vec(),
                best_cost: cost,
                grad_norm: gnorm,
            });
        }
        prob.hessian_into(&x, &mut h)?;

        // One Newton step; on factorization failure or a failed line search
        // the regularization grows and the step is retried.
        let mut stepped = false;
        for _attempt in 0..60 {
            let chol = match factorize_shifted(&h, lambda) {
                Ok(c) => c,
                Err(Error::NotPositiveDefinite { .. }) => {
                    lambda = (lambda * 10.0).max(settings.levenberg_init);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut delta: Vec<f64> = grad.iter().map(|g| -g).collect();
            chol.solve_in_place(&mut delta);
            let slope = linalg::dot(&grad, &delta);
            // Stop once the predicted decrease of an (essentially) unshifted
            // Newton step falls below the floating-point resolution of the
            // cost: the iterate is at the roundoff floor even if the gradient
            // floor sits above `grad_tol`. The SPD guard (small lambda) keeps
            // this from firing at saddle points, where the shift is large.
            if lambda <= 1e-6 && 0.5 * slope.abs() <= 8.0 * f64::EPSILON * (1.0 + cost.abs()) {
                at_floor = true;
                stepped = true;
                break;
            }
            // Armijo backtracking on F. The roundoff slack keeps the final
            // polishing steps acceptable once the true decrease drops below
            // floating-point resolution of the cost.
            let slack = 4.0 * f64::EPSILON * cost.abs().max(1.0);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=settings.max_backtracks {
                let mut trial = x.clone();
                linalg::axpy(t, &delta, trial.as_flat_mut());
                match prob.cost(&trial) {
                    Ok(f_trial)
                        if f_trial <= cost + settings.armijo_c * t * slope + slack =>
                    {
                        x = trial;
                        cost = f_trial;
                        accepted = true;
                        break;
                    }
                    _ => t *= settings.backtrack_factor,
                }
            }
            if accepted {
                lambda *= 0.1;
                stepped = true;
                break;
            }
            lambda = (lambda * 10.0).max(settings.levenberg_init);
        }
        if !stepped {
            return Err(Error::MaxItersExceeded {
                max_iters: settings.max_iters,
                best: x.as_flat().to_vec(),
                best_cost: cost,
                grad_norm: linalg::inf_norm(&grad),
            });
        }
        iterations += 1;
    }
}

fn h_at(prob: &mut PathProblem, x: &Path) -> Result<BlockTridiag> {
    let mut h = BlockTridiag::zeros(x.dim(), x.len());
    prob.hessian_into(x, &mut h)?;
    Ok(h)
}

/// Minimize starting from the noise-free trajectory, the default
/// initialization for a from-scratch optimization.
pub fn minimize_from_deterministic(
    model: &SdeModel,
    dt: f64,
    start: &[f64],
    k: usize,
    settings: &NewtonSettings,
) -> Result<OptimalPathResult> {
    let init = deterministic_path(model, dt, start, k)?;
    minimize_path(model, dt, start, &init, settings)
}

/// Initialization for the next shorter optimization: drop the head of the
/// previous optimal path and shift every remaining entry by the linearized
/// flow applied to the start perturbation.
pub fn warm_start(prev: &OptimalPathResult, new_start: &[f64], model: &SdeModel, dt: f64) -> Path {
    let d = model.dim();
    let k = prev.phi.len();
    assert!(k >= 2);
    let mut scratch = StepScratch::new(d);
    let mut jac = vec![0.0; d * d];
    let mut delta: Vec<f64> = new_start
        .iter()
        .zip(prev.phi.state(0))
        .map(|(a, b)| a - b)
        .collect();
    let mut jd = vec![0.0; d];
    let mut out = Path::zeros(d, 0);
    let mut buf = vec![0.0; d];
    for i in 1..k {
        model.eff_jacobian_into(prev.phi.state(i - 1), dt, &mut scratch, &mut jac);
        linalg::mat_vec(d, &jac, &delta, &mut jd);
        for r in 0..d {
            delta[r] += dt * jd[r];
        }
        for r in 0..d {
            buf[r] = prev.phi.state(i)[r] + delta[r];
        }
        out.push_state(&buf);
    }
    out
}
