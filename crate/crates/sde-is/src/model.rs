//! SDE-plus-observation problem definitions.
//!
//! An [`SdeModel`] bundles the drift `f`, its derivatives, the scalar
//! diffusion coefficient `sigma`, and the end-time log-likelihood `g` together
//! with the discretization stepper. The effective drift `f_tilde(x, dt)` is
//! either `f` itself (Euler) or the increment of one RK4 step of `xdot = f`
//! divided by `dt`, so that `x + dt * f_tilde` is the RK4 map.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Choice of effective drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepperKind {
    Euler,
    Rk4Drift,
}

type DriftFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type ScalarFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One SDE-plus-observation problem instance.
///
/// Derivative buffers are row-major: the Jacobian is `d x d` with entry
/// `[i*d + j] = df_i/dx_j`; the drift Hessian is `d x d x d` with entry
/// `[i*d*d + j*d + k] = d2 f_i / dx_j dx_k`.
pub struct SdeModel {
    dim: usize,
    sigma: f64,
    stepper: StepperKind,
    drift: DriftFn,
    drift_jacobian: DriftFn,
    drift_hessian: Option<DriftFn>,
    loglik: ScalarFn,
    loglik_grad: DriftFn,
    loglik_hess: DriftFn,
}

/// Discretization metadata fixing the path-space dimension `n_steps * dim`.
#[derive(Debug, Clone)]
pub struct PathGrid {
    pub n_steps: usize,
    pub dt: f64,
    pub x0: Vec<f64>,
    pub epsilon: f64,
}

impl PathGrid {
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Finite-difference step for first derivatives of the composite RK4 map.
fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Reusable buffers for effective-drift evaluation (RK4 stages and
/// finite-difference probes). Sized for one state dimension.
pub struct StepScratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    xs: Vec<f64>,
    jx: Vec<f64>,
    fp: Vec<f64>,
    fm: Vec<f64>,
    hx: Vec<f64>,
    jp: Vec<f64>,
    jm: Vec<f64>,
}

impl StepScratch {
    pub fn new(d: usize) -> Self {
        StepScratch {
            k1: vec![0.0; d],
            k2: vec![0.0; d],
            k3: vec![0.0; d],
            k4: vec![0.0; d],
            xs: vec![0.0; d],
            jx: vec![0.0; d],
            fp: vec![0.0; d],
            fm: vec![0.0; d],
            hx: vec![0.0; d],
            jp: vec![0.0; d * d],
            jm: vec![0.0; d * d],
        }
    }
}

struct Rk4Bufs<'a> {
    k1: &'a mut [f64],
    k2: &'a mut [f64],
    k3: &'a mut [f64],
    k4: &'a mut [f64],
    xs: &'a mut [f64],
}

impl SdeModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        sigma: f64,
        stepper: StepperKind,
        drift: DriftFn,
        drift_jacobian: DriftFn,
        loglik: ScalarFn,
        loglik_grad: DriftFn,
        loglik_hess: DriftFn,
    ) -> Self {
        assert!(dim >= 1, "state dimension must be at least 1");
        assert!(sigma > 0.0, "sigma must be positive");
        SdeModel {
            dim,
            sigma,
            stepper,
            drift,
            drift_jacobian,
            drift_hessian: None,
            loglik,
            loglik_grad,
            loglik_hess,
        }
    }

    /// Attach an analytic second-derivative tensor for the drift.
    pub fn with_drift_hessian(mut self, h: DriftFn) -> Self {
        self.drift_hessian = Some(h);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn stepper(&self) -> StepperKind {
        self.stepper
    }

    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out);
    }

    pub fn drift_jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        (self.drift_jacobian)(x, out);
    }

    pub fn loglik(&self, x: &[f64]) -> f64 {
        (self.loglik)(x)
    }

    pub fn loglik_grad_into(&self, x: &[f64], out: &mut [f64]) {
        (self.loglik_grad)(x, out);
    }

    pub fn loglik_hess_into(&self, x: &[f64], out: &mut [f64]) {
        (self.loglik_hess)(x, out);
    }

    fn rk4_drift(&self, x: &[f64], dt: f64, b: Rk4Bufs, out: &mut [f64]) {
        let d = self.dim;
        (self.drift)(x, b.k1);
        for i in 0..d {
            b.xs[i] = x[i] + 0.5 * dt * b.k1[i];
        }
        (self.drift)(b.xs, b.k2);
        for i in 0..d {
            b.xs[i] = x[i] + 0.5 * dt * b.k2[i];
        }
        (self.drift)(b.xs, b.k3);
        for i in 0..d {
            b.xs[i] = x[i] + dt * b.k3[i];
        }
        (self.drift)(b.xs, b.k4);
        for i in 0..d {
            out[i] = (b.k1[i] + 2.0 * b.k2[i] + 2.0 * b.k3[i] + b.k4[i]) / 6.0;
        }
    }

    /// Effective drift `f_tilde(x, dt)` written into `out`.
    pub fn eff_drift_into(
        &self,
        x: &[f64],
        dt: f64,
        s: &mut StepScratch,
        out: &mut [f64],
    ) -> Result<()> {
        match self.stepper {
            StepperKind::Euler => (self.drift)(x, out),
            StepperKind::Rk4Drift => {
                let b = Rk4Bufs {
                    k1: &mut s.k1,
                    k2: &mut s.k2,
                    k3: &mut s.k3,
                    k4: &mut s.k4,
                    xs: &mut s.xs,
                };
                self.rk4_drift(x, dt, b, out);
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteModelOutput { state: x.to_vec() });
        }
        Ok(())
    }

    /// Allocating convenience wrapper around [`Self::eff_drift_into`].
    pub fn eff_drift(&self, x: &[f64], dt: f64) -> Result<Vec<f64>> {
        let mut s = StepScratch::new(self.dim);
        let mut out = vec![0.0; self.dim];
        self.eff_drift_into(x, dt, &mut s, &mut out)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn eff_jacobian_raw(
        &self,
        x: &[f64],
        dt: f64,
        k1: &mut [f64],
        k2: &mut [f64],
        k3: &mut [f64],
        k4: &mut [f64],
        xs: &mut [f64],
        jx: &mut [f64],
        fp: &mut [f64],
        fm: &mut [f64],
        out: &mut [f64],
    ) {
        let d = self.dim;
        match self.stepper {
            StepperKind::Euler => (self.drift_jacobian)(x, out),
            StepperKind::Rk4Drift => {
                // Central differences of the composite RK4 map.
                jx.copy_from_slice(x);
                for j in 0..d {
                    let h = fd_step(x[j]);
                    jx[j] = x[j] + h;
                    self.rk4_drift(jx, dt, Rk4Bufs { k1, k2, k3, k4, xs }, fp);
                    jx[j] = x[j] - h;
                    self.rk4_drift(jx, dt, Rk4Bufs { k1, k2, k3, k4, xs }, fm);
                    jx[j] = x[j];
                    for i in 0..d {
                        out[i * d + j] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
            }
        }
    }

    /// Jacobian of the effective drift.
    pub fn eff_jacobian_into(&self, x: &[f64], dt: f64, s: &mut StepScratch, out: &mut [f64]) {
        let StepScratch {
            k1, k2, k3, k4, xs, jx, fp, fm, ..
        } = s;
        self.eff_jacobian_raw(x, dt, k1, k2, k3, k4, xs, jx, fp, fm, out);
    }

    /// Second-derivative tensor of the effective drift, `d x d x d`.
    ///
    /// Analytic when the model ships a drift Hessian and the stepper is Euler;
    /// otherwise central finite differences of the (possibly itself
    /// finite-difference) Jacobian.
    pub fn eff_hessian_into(&self, x: &[f64], dt: f64, s: &mut StepScratch, out: &mut [f64]) {
        let d = self.dim;
        if self.stepper == StepperKind::Euler {
            if let Some(h) = &self.drift_hessian {
                h(x, out);
                return;
            }
        }
        let StepScratch {
            k1, k2, k3, k4, xs, jx, fp, fm, hx, jp, jm,
        } = s;
        hx.copy_from_slice(x);
        for j in 0..d {
            let h = fd_step(x[j]);
            hx[j] = x[j] + h;
            self.eff_jacobian_raw(hx, dt, k1, k2, k3, k4, xs, jx, fp, fm, jp);
            hx[j] = x[j] - h;
            self.eff_jacobian_raw(hx, dt, k1, k2, k3, k4, xs, jx, fp, fm, jm);
            hx[j] = x[j];
            for i in 0..d {
                for k in 0..d {
                    out[i * d * d + j * d + k] = (jp[i * d + k] - jm[i * d + k]) / (2.0 * h);
                }
            }
        }
        // Symmetrize in the two differentiation indices.
        for i in 0..d {
            for j in 0..d {
                for k in (j + 1)..d {
                    let a = out[i * d * d + j * d + k];
                    let b = out[i * d * d + k * d + j];
                    let m = 0.5 * (a + b);
                    out[i * d * d + j * d + k] = m;
                    out[i * d * d + k * d + j] = m;
                }
            }
        }
    }
}

/// Fixed points of the Gissinger vector field, to the three digits reported
/// for them.
pub const GISSINGER_P_PLUS: [f64; 3] = [-0.96, 1.05, -0.109];
pub const GISSINGER_P_MINUS: [f64; 3] = [0.96, -1.05, -0.109];
pub const GISSINGER_ORIGIN: [f64; 3] = [0.0, 0.0, 0.9];

/// Model parameters from the CLI: scalar values have length 1, state-valued
/// parameters (`x0`, `obs_y`) carry one entry per component.
pub type ModelParams = BTreeMap<String, Vec<f64>>;

fn take_scalar(params: &ModelParams, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) if v.len() == 1 => Ok(v[0]),
        Some(_) => Err(Error::InvalidParam {
            key: key.to_string(),
            reason: "expected a single value".to_string(),
        }),
    }
}

fn take_vec(params: &ModelParams, key: &str, dim: usize, default: &[f64]) -> Result<Vec<f64>> {
    match params.get(key) {
        None => Ok(default.to_vec()),
        Some(v) if v.len() == dim => Ok(v.clone()),
        Some(v) => Err(Error::InvalidParam {
            key: key.to_string(),
            reason: format!("expected {} components, got {}", dim, v.len()),
        }),
    }
}

fn check_keys(params: &ModelParams, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidParam {
                key: key.clone(),
                reason: "unknown parameter for this model".to_string(),
            });
        }
    }
    Ok(())
}

fn grid_from_params(
    params: &ModelParams,
    dim: usize,
    dt: f64,
    n_steps: usize,
    x0: &[f64],
) -> Result<PathGrid> {
    let dt = take_scalar(params, "dt", dt)?;
    let n_steps_f = take_scalar(params, "n_steps", n_steps as f64)?;
    let epsilon = take_scalar(params, "epsilon", 0.1)?;
    let x0 = take_vec(params, "x0", dim, x0)?;
    if dt <= 0.0 {
        return Err(Error::InvalidParam {
            key: "dt".to_string(),
            reason: "must be positive".to_string(),
        });
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidParam {
            key: "epsilon".to_string(),
            reason: "must be positive".to_string(),
        });
    }
    if n_steps_f < 1.0 || n_steps_f.fract() != 0.0 {
        return Err(Error::InvalidParam {
            key: "n_steps".to_string(),
            reason: "must be a positive integer".to_string(),
        });
    }
    Ok(PathGrid {
        n_steps: n_steps_f as usize,
        dt,
        x0,
        epsilon,
    })
}

fn scalar_bm(sigma: f64, g: ScalarFn, gg: DriftFn, gh: DriftFn) -> SdeModel {
    SdeModel::new(
        1,
        sigma,
        StepperKind::Euler,
        Box::new(|_x, out| out[0] = 0.0),
        Box::new(|_x, out| out[0] = 0.0),
        g,
        gg,
        gh,
    )
    .with_drift_hessian(Box::new(|_x, out| out[0] = 0.0))
}

/// Construct one of the benchmark models by registry name.
///
/// Names: `bm_unimodal`, `bm_bimodal`, `langevin_bimodal`, `gissinger`.
/// Every built-in likelihood is shifted by a constant so that `min g = 0`;
/// constants cancel in the importance weights.
pub fn builtin_model(name: &str, params: &ModelParams) -> Result<(SdeModel, PathGrid)> {
    match name {
        "bm_unimodal" => {
            check_keys(params, &["sigma", "dt", "n_steps", "epsilon", "x0"])?;
            let sigma = take_scalar(params, "sigma", 1.0)?;
            let model = scalar_bm(
                sigma,
                Box::new(|x: &[f64]| {
                    let v = x[0];
                    v.powi(4) / 24.0 + v.powi(3) / 6.0 + v * v / 2.0
                }),
                Box::new(|x, out| {
                    let v = x[0];
                    out[0] = v.powi(3) / 6.0 + v * v / 2.0 + v;
                }),
                Box::new(|x, out| {
                    let v = x[0];
                    out[0] = v * v / 2.0 + v + 1.0;
                }),
            );
            let grid = grid_from_params(params, 1, 1e-2, 100, &[0.0])?;
            Ok((model, grid))
        }
        "bm_bimodal" => {
            check_keys(params, &["sigma", "dt", "n_steps", "epsilon", "x0"])?;
            let sigma = take_scalar(params, "sigma", 1.0)?;
            // min g at x = +-1; shifted up by 25 so min g = 0.
            let model = scalar_bm(
                sigma,
                Box::new(|x: &[f64]| {
                    let v = x[0];
                    100.0 * (v.powi(4) / 4.0 - v * v / 2.0) + 25.0
                }),
                Box::new(|x, out| {
                    let v = x[0];
                    out[0] = 100.0 * (v.powi(3) - v);
                }),
                Box::new(|x, out| {
                    let v = x[0];
                    out[0] = 100.0 * (3.0 * v * v - 1.0);
                }),
            );
            let grid = grid_from_params(params, 1, 1e-2, 100, &[0.01])?;
            Ok((model, grid))
        }
        "langevin_bimodal" => {
            check_keys(params, &["sigma", "alpha", "dt", "n_steps", "epsilon", "x0"])?;
            let sigma = take_scalar(params, "sigma", 1.0)?;
            let alpha = take_scalar(params, "alpha", 1.0)?;
            let model = SdeModel::new(
                1,
                sigma,
                StepperKind::Euler,
                Box::new(move |x, out| out[0] = -alpha * x[0]),
                Box::new(move |_x, out| out[0] = -alpha),
                Box::new(|x: &[f64]| {
                    let v = x[0];
                    10.0 * (v.powi(4) / 4.0 - v * v / 2.0) + 2.5
                }),
                Box::new(|x, out| {
                    let v = x[0];
                    out[0] = 10.0 * (v.powi(3) - v);
                }),
                Box::new(|x, out| {
                    let v = x[0];
                    out[0] = 10.0 * (3.0 * v * v - 1.0);
                }),
            )
            .with_drift_hessian(Box::new(|_x, out| out[0] = 0.0));
            let grid = grid_from_params(params, 1, 1e-3, 1000, &[0.1])?;
            Ok((model, grid))
        }
        "gissinger" => {
            check_keys(params, &["sigma", "dt", "n_steps", "epsilon", "x0", "obs_y"])?;
            let sigma = take_scalar(params, "sigma", 1.0)?;
            let y = take_vec(params, "obs_y", 3, &GISSINGER_P_PLUS)?;
            let y2 = y.clone();
            let model = SdeModel::new(
                3,
                sigma,
                StepperKind::Rk4Drift,
                Box::new(|x, out| {
                    out[0] = 0.119 * x[0] - x[1] * x[2];
                    out[1] = -0.1 * x[1] + x[0] * x[2];
                    out[2] = 0.9 - x[2] + x[0] * x[1];
                }),
                Box::new(|x, out| {
                    // Row-major Jacobian of the base vector field.
                    out.copy_from_slice(&[
                        0.119, -x[2], -x[1], //
                        x[2], -0.1, x[0], //
                        x[1], x[0], -1.0,
                    ]);
                }),
                Box::new(move |x: &[f64]| {
                    0.5 * x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                }),
                Box::new(move |x, out| {
                    for i in 0..3 {
                        out[i] = x[i] - y2[i];
                    }
                }),
                Box::new(|_x, out| {
                    out.fill(0.0);
                    out[0] = 1.0;
                    out[4] = 1.0;
                    out[8] = 1.0;
                }),
            );
            let x0_default: Vec<f64> = GISSINGER_P_PLUS.iter().map(|v| v + 0.05).collect();
            let grid = grid_from_params(params, 3, 1e-1, 100, &x0_default)?;
            Ok((model, grid))
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Scalar linear SDE with Gaussian end-time likelihood: `f(x) = -alpha x`,
/// `g(x) = (x - y)^2 / (2 r)`. Closed forms for the continuous-time optimal
/// path exist for this family, which the dt-consistency check relies on.
pub fn linear_gaussian_model(alpha: f64, sigma: f64, y: f64, r: f64) -> SdeModel {
    assert!(r > 0.0);
    SdeModel::new(
        1,
        sigma,
        StepperKind::Euler,
        Box::new(move |x, out| out[0] = -alpha * x[0]),
        Box::new(move |_x, out| out[0] = -alpha),
        Box::new(move |x: &[f64]| (x[0] - y) * (x[0] - y) / (2.0 * r)),
        Box::new(move |x, out| out[0] = (x[0] - y) / r),
        Box::new(move |_x, out| out[0] = 1.0 / r),
    )
    .with_drift_hessian(Box::new(|_x, out| out[0] = 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn no_params() -> ModelParams {
        ModelParams::new()
    }

    #[test]
    fn euler_effective_drift_is_drift() {
        let m = linear_gaussian_model(1.0, 1.0, 0.0, 1.0);
        let f = m.eff_drift(&[2.0], 0.1).unwrap();
        assert_eq!(f[0], -2.0);
    }

    #[test]
    fn rk4_zero_field_is_zero() {
        let m = SdeModel::new(
            1,
            1.0,
            StepperKind::Rk4Drift,
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x| 0.0),
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x, out| out[0] = 0.0),
        );
        let f = m.eff_drift(&[3.7], 0.1).unwrap();
        assert_eq!(f[0], 0.0);
    }

    #[test]
    fn rk4_linear_field_matches_stage_polynomial() {
        // f(x) = -x, x = 1, dt = 0.1: one RK4 step gives the degree-4 Taylor
        // polynomial of exp(-dt), so f_tilde = (R - 1)/dt.
        let m = SdeModel::new(
            1,
            1.0,
            StepperKind::Rk4Drift,
            Box::new(|x, out| out[0] = -x[0]),
            Box::new(|_x, out| out[0] = -1.0),
            Box::new(|_x| 0.0),
            Box::new(|_x, out| out[0] = 0.0),
            Box::new(|_x, out| out[0] = 0.0),
        );
        let dt = 0.1_f64;
        let r = 1.0 - dt + dt * dt / 2.0 - dt.powi(3) / 6.0 + dt.powi(4) / 24.0;
        let f = m.eff_drift(&[1.0], dt).unwrap();
        assert_relative_eq!(f[0], (r - 1.0) / dt, epsilon = 1e-14);
        assert_relative_eq!(f[0], -0.951625, epsilon = 1e-12);
    }

    #[test]
    fn gissinger_drift_vanishes_at_fixed_points() {
        let (m, _) = builtin_model("gissinger", &no_params()).unwrap();
        let mut f = [0.0; 3];
        m.drift_into(&GISSINGER_ORIGIN, &mut f);
        assert_eq!(f, [0.0, 0.0, 0.0]);
        for p in [GISSINGER_P_PLUS, GISSINGER_P_MINUS] {
            m.drift_into(&p, &mut f);
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1e-2, "|f(p)| = {} at {:?}", norm, p);
        }
    }

    #[test]
    fn builtin_likelihoods_are_shifted_to_zero_minimum() {
        let (m, _) = builtin_model("bm_unimodal", &no_params()).unwrap();
        assert_eq!(m.loglik(&[0.0]), 0.0);
        let (m, _) = builtin_model("bm_bimodal", &no_params()).unwrap();
        assert_relative_eq!(m.loglik(&[1.0]), 0.0, epsilon = 1e-12);
        assert_relative_eq!(m.loglik(&[-1.0]), 0.0, epsilon = 1e-12);
        let (m, _) = builtin_model("langevin_bimodal", &no_params()).unwrap();
        assert_relative_eq!(m.loglik(&[1.0]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unknown_model_and_bad_params_are_rejected() {
        assert!(matches!(
            builtin_model("nope", &no_params()),
            Err(Error::UnknownModel(_))
        ));
        let mut p = no_params();
        p.insert("frobnicate".to_string(), vec![1.0]);
        assert!(matches!(
            builtin_model("bm_unimodal", &p),
            Err(Error::InvalidParam { .. })
        ));
        let mut p = no_params();
        p.insert("dt".to_string(), vec![-0.5]);
        assert!(matches!(
            builtin_model("bm_unimodal", &p),
            Err(Error::InvalidParam { .. })
        ));
    }

    #[test]
    fn grid_overrides_apply() {
        let mut p = no_params();
        p.insert("dt".to_string(), vec![0.05]);
        p.insert("n_steps".to_string(), vec![20.0]);
        p.insert("epsilon".to_string(), vec![0.01]);
        p.insert("x0".to_string(), vec![0.3]);
        let (_, grid) = builtin_model("bm_unimodal", &p).unwrap();
        assert_eq!(grid.n_steps, 20);
        assert_eq!(grid.dt, 0.05);
        assert_eq!(grid.epsilon, 0.01);
        assert_eq!(grid.x0, vec![0.3]);
        assert_relative_eq!(grid.horizon(), 1.0, epsilon = 1e-12);
    }

    /// Central-difference check of the analytic Jacobians over random states.
    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng_state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng_state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for name in ["bm_unimodal", "bm_bimodal", "langevin_bimodal", "gissinger"] {
            let (m, _) = builtin_model(name, &no_params()).unwrap();
            let d = m.dim();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d).map(|_| next()).collect();
                let mut jac = vec![0.0; d * d];
                m.drift_jacobian_into(&x, &mut jac);
                let mut fp = vec![0.0; d];
                let mut fm = vec![0.0; d];
                for j in 0..d {
                    let h = 1e-5 * x[j].abs().max(1.0);
                    let mut xp = x.clone();
                    xp[j] += h;
                    let mut xm = x.clone();
                    xm[j] -= h;
                    m.drift_into(&xp, &mut fp);
                    m.drift_into(&xm, &mut fm);
                    for i in 0..d {
                        let fd = (fp[i] - fm[i]) / (2.0 * h);
                        let scale = jac[i * d + j].abs().max(1.0);
                        assert!(
                            (jac[i * d + j] - fd).abs() <= 1e-5 * scale,
                            "{name}: jac[{i},{j}] = {} vs fd {}",
                            jac[i * d + j],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rk4_jacobian_consistent_with_map() {
        let (m, grid) = builtin_model("gissinger", &no_params()).unwrap();
        let x = [0.5, -0.3, 0.8];
        let mut s = StepScratch::new(3);
        let mut jac = vec![0.0; 9];
        m.eff_jacobian_into(&x, grid.dt, &mut s, &mut jac);
        // Independent forward/backward probes with a different step size.
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = x.to_vec();
            xp[j] += h;
            let mut xm = x.to_vec();
            xm[j] -= h;
            let fp = m.eff_drift(&xp, grid.dt).unwrap();
            let fm = m.eff_drift(&xm, grid.dt).unwrap();
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert_relative_eq!(jac[i * 3 + j], fd, epsilon = 1e-6, max_relative = 1e-5);
            }
        }
    }
}
