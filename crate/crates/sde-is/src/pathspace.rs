//! Path containers and the discrete cost functional.
//!
//! The cost of a path `x_{1:K}` with fixed start `x_0` is
//!
//! `F(x) = dt/(2 sigma^2) * sum_n || (x_{n+1} - x_n)/dt - f_tilde(x_n, dt) ||^2 + g(x_K)`
//!
//! whose Hessian couples only adjacent steps and is therefore stored in
//! block-tridiagonal form. Only test oracles ever materialize a dense matrix.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{PathGrid, SdeModel, StepScratch};

/// A path of `K` free states in `R^D`, stored flat. The start state is not a
/// free variable and lives outside the container.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    dim: usize,
    data: Vec<f64>,
}

impl Path {
    pub fn zeros(dim: usize, len: usize) -> Self {
        Path {
            dim,
            data: vec![0.0; dim * len],
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim >= 1 && data.len() % dim == 0);
        Path { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of free states.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn state_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn push_state(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim);
        self.data.extend_from_slice(x);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Symmetric block-tridiagonal matrix: `K` diagonal `D x D` blocks and `K-1`
/// sub-diagonal blocks (the super-diagonal is the transpose).
#[derive(Debug, Clone)]
pub struct BlockTridiag {
    dim: usize,
    blocks: usize,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl BlockTridiag {
    pub fn zeros(dim: usize, blocks: usize) -> Self {
        assert!(blocks >= 1);
        BlockTridiag {
            dim,
            blocks,
            diag: vec![0.0; blocks * dim * dim],
            off: vec![0.0; blocks.saturating_sub(1) * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn diag_block(&self, i: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.diag[i * dd..(i + 1) * dd]
    }

    pub fn diag_block_mut(&mut self, i: usize) -> &mut [f64] {
        let dd = self.dim * self.dim;
        &mut self.diag[i * dd..(i + 1) * dd]
    }

    /// Sub-diagonal block coupling block-row `i+1` with block-column `i`.
    pub fn off_block(&self, i: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.off[i * dd..(i + 1) * dd]
    }

    pub fn off_block_mut(&mut self, i: usize) -> &mut [f64] {
        let dd = self.dim * self.dim;
        &mut self.off[i * dd..(i + 1) * dd]
    }

    /// `out = H x` for a flat vector of length `blocks * dim`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.fill(0.0);
        for i in 0..self.blocks {
            let xi = &x[i * d..(i + 1) * d];
            let bi = self.diag_block(i);
            for r in 0..d {
                out[i * d + r] += linalg::dot(&bi[r * d..(r + 1) * d], xi);
            }
            if i + 1 < self.blocks {
                let b = self.off_block(i);
                let xn = &x[(i + 1) * d..(i + 2) * d];
                for r in 0..d {
                    // row i+1 gets B x_i, row i gets B^T x_{i+1}
                    out[(i + 1) * d + r] += linalg::dot(&b[r * d..(r + 1) * d], xi);
                }
                for c in 0..d {
                    for r in 0..d {
                        out[i * d + c] += b[r * d + c] * xn[r];
                    }
                }
            }
        }
    }

    /// Quadratic form `x^T H x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut hx = vec![0.0; x.len()];
        self.mul_vec(x, &mut hx);
        linalg::dot(x, &hx)
    }

    /// Dense assembly, for small problems and test oracles only.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim;
        let n = self.blocks * d;
        let mut m = vec![0.0; n * n];
        for i in 0..self.blocks {
            let bi = self.diag_block(i);
            for r in 0..d {
                for c in 0..d {
                    m[(i * d + r) * n + i * d + c] = bi[r * d + c];
                }
            }
            if i + 1 < self.blocks {
                let b = self.off_block(i);
                for r in 0..d {
                    for c in 0..d {
                        m[((i + 1) * d + r) * n + i * d + c] = b[r * d + c];
                        m[(i * d + c) * n + (i + 1) * d + r] = b[r * d + c];
                    }
                }
            }
        }
        m
    }
}

/// The standard-normal increments that generated a sampled path, recorded in
/// step order for symmetrization replay.
#[derive(Debug, Clone)]
pub struct NoiseDraw {
    pub dim: usize,
    pub xi: Vec<f64>,
}

impl NoiseDraw {
    pub fn step(&self, n: usize) -> &[f64] {
        &self.xi[n * self.dim..(n + 1) * self.dim]
    }

    pub fn negated(&self) -> NoiseDraw {
        NoiseDraw {
            dim: self.dim,
            xi: self.xi.iter().map(|v| -v).collect(),
        }
    }
}

/// Evaluation context for the cost functional on one (start, dt) pair.
/// Holds scratch buffers so that repeated gradient/Hessian evaluations do not
/// allocate.
pub struct PathProblem<'a> {
    pub model: &'a SdeModel,
    pub dt: f64,
    pub start: Vec<f64>,
    scratch: StepScratch,
    resid: Vec<f64>,
    ftilde: Vec<f64>,
    jac: Vec<f64>,
    hess: Vec<f64>,
    vbuf: Vec<f64>,
}

impl<'a> PathProblem<'a> {
    pub fn new(model: &'a SdeModel, dt: f64, start: &[f64]) -> Self {
        let d = model.dim();
        assert_eq!(start.len(), d);
        assert!(dt > 0.0);
        PathProblem {
            model,
            dt,
            start: start.to_vec(),
            scratch: StepScratch::new(d),
            resid: vec![0.0; d],
            ftilde: vec![0.0; d],
            jac: vec![0.0; d * d],
            hess: vec![0.0; d * d * d],
            vbuf: vec![0.0; d],
        }
    }

    /// `F(x)`: residual sum plus the end-time log-likelihood.
    pub fn cost(&mut self, path: &Path) -> Result<f64> {
        let d = self.model.dim();
        let k = path.len();
        assert!(k >= 1);
        let c = self.dt / (2.0 * self.model.sigma() * self.model.sigma());
        let mut total = 0.0;
        for n in 0..k {
            let xc = if n == 0 { &self.start[..] } else { path.state(n - 1) };
            let xn = path.state(n);
            self.model
                .eff_drift_into(xc, self.dt, &mut self.scratch, &mut self.ftilde)?;
            let mut ssq = 0.0;
            for i in 0..d {
                let r = (xn[i] - xc[i]) / self.dt - self.ftilde[i];
                ssq += r * r;
            }
            total += c * ssq;
        }
        total += self.model.loglik(path.last());
        if !total.is_finite() {
            return Err(Error::NonFiniteCost);
        }
        Ok(total)
    }

    /// Analytic gradient of `F` over the free variables, written into `out`
    /// (length `K * D`).
    pub fn grad_into(&mut self, path: &Path, out: &mut [f64]) -> Result<()> {
        let d = self.model.dim();
        let k = path.len();
        let sig2 = self.model.sigma() * self.model.sigma();
        out.fill(0.0);
        // Each residual r_n couples free variables n-1 ("next" state) and n
        // ("current" state); n = 0 has the fixed start as current state.
        for n in 0..k {
            let xc = if n == 0 { &self.start[..] } else { path.state(n - 1) };
            let xn = path.state(n);
            self.model
                .eff_drift_into(xc, self.dt, &mut self.scratch, &mut self.ftilde)?;
            for i in 0..d {
                self.resid[i] = (xn[i] - xc[i]) / self.dt - self.ftilde[i];
            }
            // d r_n / d x_{n+1} = I/dt  ->  += r_n / sigma^2
            for i in 0..d {
                out[n * d + i] += self.resid[i] / sig2;
            }
            // d r_n / d x_n = -(I/dt + J(x_n)) for n >= 1
            if n >= 1 {
                self.model
                    .eff_jacobian_into(xc, self.dt, &mut self.scratch, &mut self.jac);
                linalg::mat_t_vec(d, &self.jac, &self.resid, &mut self.vbuf);
                for i in 0..d {
                    out[(n - 1) * d + i] -= (self.resid[i] / self.dt + self.vbuf[i]) * self.dt / sig2;
                }
            }
        }
        self.model.loglik_grad_into(path.last(), &mut self.vbuf);
        for i in 0..d {
            out[(k - 1) * d + i] += self.vbuf[i];
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCost);
        }
        Ok(())
    }

    /// Exact Hessian of `F` in block-tridiagonal layout.
    pub fn hessian_into(&mut self, path: &Path, h: &mut BlockTridiag) -> Result<()> {
        let d = self.model.dim();
        let k = path.len();
        assert_eq!(h.blocks(), k);
        assert_eq!(h.dim(), d);
        let dt = self.dt;
        let sig2 = self.model.sigma() * self.model.sigma();
        let w = dt / sig2; // 2c
        h.diag.fill(0.0);
        h.off.fill(0.0);
        // Residual r_n contributes I/(sigma^2 dt) to the diagonal block of
        // free variable n, and for n >= 1 the Gauss-Newton plus curvature
        // terms to free variable n-1 along with the coupling block.
        for n in 0..k {
            let diag = h.diag_block_mut(n);
            for i in 0..d {
                diag[i * d + i] += 1.0 / (sig2 * dt);
            }
            if n >= 1 {
                let xc = path.state(n - 1);
                let xn = path.state(n);
                self.model
                    .eff_drift_into(xc, dt, &mut self.scratch, &mut self.ftilde)?;
                for i in 0..d {
                    self.resid[i] = (xn[i] - xc[i]) / dt - self.ftilde[i];
                }
                self.model
                    .eff_jacobian_into(xc, dt, &mut self.scratch, &mut self.jac);
                self.model
                    .eff_hessian_into(xc, dt, &mut self.scratch, &mut self.hess);
                // A = I/dt + J(x_n)
                let a = &mut self.jac;
                for i in 0..d {
                    a[i * d + i] += 1.0 / dt;
                }
                {
                    let diag = h.diag_block_mut(n - 1);
                    for r in 0..d {
                        for c2 in 0..d {
                            let mut s = 0.0;
                            for i in 0..d {
                                s += a[i * d + r] * a[i * d + c2];
                            }
                            // second-order term: - sum_i r_i d2 f_i / dx_r dx_c
                            let mut curv = 0.0;
                            for i in 0..d {
                                curv += self.resid[i] * self.hess[i * d * d + r * d + c2];
                            }
                            diag[r * d + c2] += w * s - w * curv;
                        }
                    }
                }
                // Coupling block (row = free var n, col = free var n-1):
                // 2c (I/dt)^T (-A) = -A / sigma^2
                let off = h.off_block_mut(n - 1);
                for r in 0..d {
                    for c2 in 0..d {
                        off[r * d + c2] = -a[r * d + c2] / sig2;
                    }
                }
                // restore jac buffer is not needed; it is overwritten next use
            }
        }
        self.model.loglik_hess_into(path.last(), &mut self.jac);
        let diag = h.diag_block_mut(k - 1);
        for i in 0..d * d {
            diag[i] += self.jac[i];
        }
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCost);
        }
        Ok(())
    }
}

/// `F(x)` as a standalone call.
pub fn path_cost(model: &SdeModel, dt: f64, start: &[f64], path: &Path) -> Result<f64> {
    PathProblem::new(model, dt, start).cost(path)
}

/// Gradient of `F` as a standalone call.
pub fn path_cost_grad(model: &SdeModel, dt: f64, start: &[f64], path: &Path) -> Result<Vec<f64>> {
    let mut out = vec![0.0; path.len() * model.dim()];
    PathProblem::new(model, dt, start).grad_into(path, &mut out)?;
    Ok(out)
}

/// Hessian of `F` as a standalone call.
pub fn path_cost_hessian(
    model: &SdeModel,
    dt: f64,
    start: &[f64],
    path: &Path,
) -> Result<BlockTridiag> {
    let mut h = BlockTridiag::zeros(model.dim(), path.len());
    PathProblem::new(model, dt, start).hessian_into(path, &mut h)?;
    Ok(h)
}

/// Log density of the full path `x_{1:N}` under the unconditioned discretized
/// SDE, normalization constants included:
/// `sum_n log N(x_{n+1}; x_n + dt f_tilde(x_n), dt eps sigma^2 I)`.
pub fn log_prior_density(model: &SdeModel, grid: &PathGrid, path: &Path) -> Result<f64> {
    let d = model.dim();
    assert_eq!(path.len(), grid.n_steps);
    let var = grid.dt * grid.epsilon * model.sigma() * model.sigma();
    let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI * var).ln();
    let mut scratch = StepScratch::new(d);
    let mut ftilde = vec![0.0; d];
    let mut total = 0.0;
    for n in 0..grid.n_steps {
        let xc = if n == 0 { &grid.x0[..] } else { path.state(n - 1) };
        let xn = path.state(n);
        model.eff_drift_into(xc, grid.dt, &mut scratch, &mut ftilde)?;
        let mut ssq = 0.0;
        for i in 0..d {
            let r = xn[i] - xc[i] - grid.dt * ftilde[i];
            ssq += r * r;
        }
        total += log_norm - ssq / (2.0 * var);
    }
    if !total.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    Ok(total)
}

/// The noise-free trajectory `x_{n+1} = x_n + dt f_tilde(x_n)` with `k` steps
/// after the start state.
pub fn deterministic_path(model: &SdeModel, dt: f64, start: &[f64], k: usize) -> Result<Path> {
    let d = model.dim();
    let mut scratch = StepScratch::new(d);
    let mut ftilde = vec![0.0; d];
    let mut x = start.to_vec();
    let mut path = Path::zeros(d, 0);
    for _ in 0..k {
        model.eff_drift_into(&x, dt, &mut scratch, &mut ftilde)?;
        for i in 0..d {
            x[i] += dt * ftilde[i];
        }
        path.push_state(&x);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_model, linear_gaussian_model, ModelParams};
    use approx::assert_relative_eq;

    fn bm() -> SdeModel {
        linear_gaussian_model(0.0, 1.0, 0.0, 1.0)
    }

    fn bm_g0() -> SdeModel {
        // f = 0, g = 0
        SdeModel::new(
            1,
            1.0,
            crate::model::StepperKind::Euler,
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x| 0.0),
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x, out| out[0] = 0.0),
        )
    }

    #[test]
    fn bm_cost_hand_value() {
        // dt = 0.5, start 0, path (1, 1): (0.5/2) * [2^2 + 0^2] = 1.0
        let m = bm_g0();
        let path = Path::from_flat(1, vec![1.0, 1.0]);
        let f = path_cost(&m, 0.5, &[0.0], &path).unwrap();
        assert_relative_eq!(f, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn deterministic_trajectory_has_zero_cost() {
        let (m, grid) = builtin_model("langevin_bimodal", &ModelParams::new()).unwrap();
        let path = deterministic_path(&m, grid.dt, &[0.7], 50).unwrap();
        drop(m);
        // g != 0 for the built-in; strip it by evaluating the residual part via
        // a g = 0 clone of the drift.
        let m0 = linear_gaussian_model(1.0, 1.0, 0.0, 1.0);
        let path0 = deterministic_path(&m0, grid.dt, &[0.7], 50).unwrap();
        assert_eq!(path.as_flat(), path0.as_flat());
        let g_end = m0.loglik(path0.last());
        let f = path_cost(&m0, grid.dt, &[0.7], &path0).unwrap();
        assert_relative_eq!(f, g_end, epsilon = 1e-12);
    }

    #[test]
    fn constant_zero_path_on_bm_unimodal_costs_zero() {
        let (m, grid) = builtin_model("bm_unimodal", &ModelParams::new()).unwrap();
        let path = Path::zeros(1, grid.n_steps);
        let f = path_cost(&m, grid.dt, &grid.x0, &path).unwrap();
        assert_eq!(f, 0.0);
    }

    fn fd_grad(m: &SdeModel, dt: f64, start: &[f64], path: &Path) -> Vec<f64> {
        let n = path.len() * path.dim();
        let mut g = vec![0.0; n];
        for i in 0..n {
            let h = 1e-5 * path.as_flat()[i].abs().max(1.0);
            let mut pp = path.clone();
            pp.as_flat_mut()[i] += h;
            let mut pm = path.clone();
            pm.as_flat_mut()[i] -= h;
            let fp = path_cost(m, dt, start, &pp).unwrap();
            let fm = path_cost(m, dt, start, &pm).unwrap();
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    fn fd_hessian_dense(m: &SdeModel, dt: f64, start: &[f64], path: &Path) -> Vec<f64> {
        // central differences of the analytic gradient
        let n = path.len() * path.dim();
        let mut h = vec![0.0; n * n];
        for j in 0..n {
            let hstep = 1e-5 * path.as_flat()[j].abs().max(1.0);
            let mut pp = path.clone();
            pp.as_flat_mut()[j] += hstep;
            let mut pm = path.clone();
            pm.as_flat_mut()[j] -= hstep;
            let gp = path_cost_grad(m, dt, start, &pp).unwrap();
            let gm = path_cost_grad(m, dt, start, &pm).unwrap();
            for i in 0..n {
                h[i * n + j] = (gp[i] - gm[i]) / (2.0 * hstep);
            }
        }
        h
    }

    fn pseudo_random_path(dim: usize, len: usize, seed: u64) -> Path {
        let mut s = seed | 1;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        Path::from_flat(dim, (0..dim * len).map(|_| next()).collect())
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (name, len) in [
            ("bm_unimodal", 8),
            ("langevin_bimodal", 8),
            ("gissinger", 5),
        ] {
            let (m, grid) = builtin_model(name, &ModelParams::new()).unwrap();
            let path = pseudo_random_path(m.dim(), len, 42);
            let g = path_cost_grad(&m, grid.dt, &grid.x0, &path).unwrap();
            let g_fd = fd_grad(&m, grid.dt, &grid.x0, &path);
            for i in 0..g.len() {
                let scale = g[i].abs().max(1.0);
                assert!(
                    (g[i] - g_fd[i]).abs() <= 1e-6 * scale,
                    "{name}: grad[{i}] {} vs fd {}",
                    g[i],
                    g_fd[i]
                );
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        for (name, len) in [
            ("bm_unimodal", 6),
            ("langevin_bimodal", 6),
            ("gissinger", 4),
        ] {
            let (m, grid) = builtin_model(name, &ModelParams::new()).unwrap();
            let path = pseudo_random_path(m.dim(), len, 7);
            let h = path_cost_hessian(&m, grid.dt, &grid.x0, &path).unwrap();
            let dense = h.to_dense();
            let dense_fd = fd_hessian_dense(&m, grid.dt, &grid.x0, &path);
            let n = len * m.dim();
            let scale = dense.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
            for i in 0..n * n {
                assert!(
                    (dense[i] - dense_fd[i]).abs() <= 1e-4 * scale,
                    "{name}: H[{}] {} vs fd {}",
                    i,
                    dense[i],
                    dense_fd[i]
                );
            }
        }
    }

    #[test]
    fn bm_hessian_blocks_closed_form() {
        // f = 0, sigma = 1, g = 0: diag 2/dt (last 1/dt), off -1/dt.
        let m = bm_g0();
        let dt = 0.1;
        let path = Path::zeros(1, 4);
        let h = path_cost_hessian(&m, dt, &[0.0], &path).unwrap();
        for i in 0..3 {
            assert_relative_eq!(h.diag_block(i)[0], 2.0 / dt, epsilon = 1e-12);
        }
        assert_relative_eq!(h.diag_block(3)[0], 1.0 / dt, epsilon = 1e-12);
        for i in 0..3 {
            assert_relative_eq!(h.off_block(i)[0], -1.0 / dt, epsilon = 1e-12);
        }
    }

    #[test]
    fn hessian_dense_assembly_is_symmetric() {
        let (m, grid) = builtin_model("gissinger", &ModelParams::new()).unwrap();
        let path = pseudo_random_path(3, 5, 3);
        let h = path_cost_hessian(&m, grid.dt, &grid.x0, &path).unwrap();
        let dense = h.to_dense();
        let n = 15;
        for i in 0..n {
            for j in 0..n {
                assert_eq!(dense[i * n + j], dense[j * n + i]);
            }
        }
    }

    #[test]
    fn log_prior_at_deterministic_step_is_gaussian_peak() {
        let m = bm();
        let grid = PathGrid {
            n_steps: 1,
            dt: 0.25,
            x0: vec![0.3],
            epsilon: 0.05,
        };
        let path = deterministic_path(&m, grid.dt, &grid.x0, 1).unwrap();
        let lp = log_prior_density(&m, &grid, &path).unwrap();
        let var = grid.dt * grid.epsilon;
        assert_relative_eq!(lp, -0.5 * (2.0 * std::f64::consts::PI * var).ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_prior_is_additive_over_steps() {
        let m = linear_gaussian_model(0.5, 1.3, 0.0, 1.0);
        let grid2 = PathGrid {
            n_steps: 2,
            dt: 0.1,
            x0: vec![0.4],
            epsilon: 0.2,
        };
        let path = Path::from_flat(1, vec![0.6, 0.1]);
        let lp2 = log_prior_density(&m, &grid2, &path).unwrap();
        let grid1a = PathGrid { n_steps: 1, x0: vec![0.4], ..grid2.clone() };
        let grid1b = PathGrid { n_steps: 1, x0: vec![0.6], ..grid2.clone() };
        let pa = Path::from_flat(1, vec![0.6]);
        let pb = Path::from_flat(1, vec![0.1]);
        let sum = log_prior_density(&m, &grid1a, &pa).unwrap()
            + log_prior_density(&m, &grid1b, &pb).unwrap();
        assert_relative_eq!(lp2, sum, epsilon = 1e-12);
    }

    #[test]
    fn log_prior_matches_quadratic_cost_up_to_constant() {
        // For g = 0, log rho + F/eps must be path-independent.
        let m0 = SdeModel::new(
            1,
            0.8,
            crate::model::StepperKind::Euler,
            Box::new(|x, out| out[0] = -x[0]),
            Box::new(|_x, out| out[0] = -1.0),
            Box::new(|_x| 0.0),
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x, out| out[0] = 0.0),
        );
        let grid = PathGrid {
            n_steps: 6,
            dt: 0.1,
            x0: vec![0.5],
            epsilon: 0.07,
        };
        let mut consts = Vec::new();
        for seed in 1..=10u64 {
            let path = pseudo_random_path(1, 6, seed);
            let lp = log_prior_density(&m0, &grid, &path).unwrap();
            let f = path_cost(&m0, grid.dt, &grid.x0, &path).unwrap();
            consts.push(lp + f / grid.epsilon);
        }
        for c in &consts[1..] {
            assert_relative_eq!(*c, consts[0], epsilon = 1e-10);
        }
    }

    #[test]
    fn cost_nonnegative_when_g_nonnegative() {
        for name in ["bm_unimodal", "bm_bimodal", "langevin_bimodal", "gissinger"] {
            let (m, grid) = builtin_model(name, &ModelParams::new()).unwrap();
            for seed in 0..20u64 {
                let path = pseudo_random_path(m.dim(), 6, seed * 13 + 1);
                let f = path_cost(&m, grid.dt, &grid.x0, &path).unwrap();
                assert!(f >= 0.0, "{name}: cost {f} < 0");
            }
        }
    }
}
