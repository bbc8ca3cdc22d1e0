//! The path samplers: direct forward simulation, the linear-map proposal, the
//! dynamic linear map, and their antithetic symmetrizations.
//!
//! Every sampler is a deterministic function of its standard-normal draws, so
//! a symmetrized variant can rerun the same sampler with the noise negated and
//! combine the two branches into one unbiased weighted sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{PathGrid, SdeModel, StepScratch};
use crate::optimize::{
    minimize_from_deterministic, minimize_path, warm_start, NewtonSettings, OptimalPathResult,
};
use crate::pathspace::{log_prior_density, NoiseDraw, Path};

/// Which proposal to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    /// Forward simulation of the discretized SDE; weight `exp(-g(x_N)/eps)`.
    Direct,
    /// Gaussian centered on the optimal path with covariance `eps H^{-1}`.
    Lm,
    /// Symmetrized linear map.
    Slm,
    /// Step-wise re-optimized linear map.
    Dlm,
    /// Symmetrized dynamic linear map.
    Sdlm,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Direct => "direct",
            SamplerKind::Lm => "lm",
            SamplerKind::Slm => "slm",
            SamplerKind::Dlm => "dlm",
            SamplerKind::Sdlm => "sdlm",
        }
    }

    pub fn all() -> [SamplerKind; 5] {
        [
            SamplerKind::Direct,
            SamplerKind::Lm,
            SamplerKind::Slm,
            SamplerKind::Dlm,
            SamplerKind::Sdlm,
        ]
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SamplerKind::Direct),
            "lm" => Ok(SamplerKind::Lm),
            "slm" => Ok(SamplerKind::Slm),
            "dlm" => Ok(SamplerKind::Dlm),
            "sdlm" => Ok(SamplerKind::Sdlm),
            other => Err(Error::Config(format!("unknown sampler `{other}`"))),
        }
    }
}

/// Which antithetic branch a symmetrized sampler selected; `Na` for plain
/// samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
    Na,
}

/// One weighted sample: the path, its unnormalized log weight, the noise that
/// generated it, and (for symmetrized samplers) the selected branch.
#[derive(Debug, Clone)]
pub struct WeightedPath {
    pub path: Path,
    pub log_weight: f64,
    pub noise: NoiseDraw,
    pub branch: Branch,
}

/// A sampler that is a deterministic map from a standard-normal draw to a
/// weighted path — the property symmetrization relies on.
pub trait ReplayableSampler {
    /// Number of standard normals consumed per sample.
    fn n_noise(&self) -> usize;

    /// Map a noise draw to `(path, log_weight)`.
    fn sample_with_noise(&self, noise: &NoiseDraw) -> Result<(Path, f64)>;
}

/// Forward simulation of the discretized SDE.
pub struct DirectSampler<'a> {
    model: &'a SdeModel,
    grid: &'a PathGrid,
}

impl<'a> DirectSampler<'a> {
    pub fn new(model: &'a SdeModel, grid: &'a PathGrid) -> Self {
        DirectSampler { model, grid }
    }
}

impl ReplayableSampler for DirectSampler<'_> {
    fn n_noise(&self) -> usize {
        self.grid.n_steps * self.model.dim()
    }

    fn sample_with_noise(&self, noise: &NoiseDraw) -> Result<(Path, f64)> {
        let d = self.model.dim();
        let g = self.grid;
        let scale = (g.dt * g.epsilon).sqrt() * self.model.sigma();
        let mut scratch = StepScratch::new(d);
        let mut ftilde = vec![0.0; d];
        let mut x = g.x0.clone();
        let mut path = Path::zeros(d, 0);
        for n in 0..g.n_steps {
            self.model
                .eff_drift_into(&x, g.dt, &mut scratch, &mut ftilde)?;
            let xi = noise.step(n);
            for i in 0..d {
                x[i] += g.dt * ftilde[i] + scale * xi[i];
            }
            path.push_state(&x);
        }
        // Proposal density equals the prior, so only the likelihood remains.
        let lw = -self.model.loglik(path.last()) / g.epsilon;
        if !lw.is_finite() {
            return Err(Error::SampleFailed("non-finite weight".to_string()));
        }
        Ok((path, lw))
    }
}

/// Linear map: one optimization up front, then Gaussian draws
/// `X = phi + sqrt(eps) L^{-T} xi` with `H = L L^T` the cost Hessian at `phi`.
pub struct LmSampler<'a> {
    model: &'a SdeModel,
    grid: &'a PathGrid,
    opt: OptimalPathResult,
}

impl<'a> LmSampler<'a> {
    pub fn new(model: &'a SdeModel, grid: &'a PathGrid, settings: &NewtonSettings) -> Result<Self> {
        let opt = minimize_from_deterministic(model, grid.dt, &grid.x0, grid.n_steps, settings)?;
        Ok(LmSampler { model, grid, opt })
    }

    /// The optimization result the proposal is built from.
    pub fn optimal(&self) -> &OptimalPathResult {
        &self.opt
    }
}

impl ReplayableSampler for LmSampler<'_> {
    fn n_noise(&self) -> usize {
        self.grid.n_steps * self.model.dim()
    }

    fn sample_with_noise(&self, noise: &NoiseDraw) -> Result<(Path, f64)> {
        let g = self.grid;
        let kd = self.n_noise();
        let mut x = noise.xi.clone();
        self.opt.chol.solve_lt_in_place(&mut x);
        let sqrt_eps = g.epsilon.sqrt();
        for (xv, pv) in x.iter_mut().zip(self.opt.phi.as_flat()) {
            *xv = pv + sqrt_eps * *xv;
        }
        let path = Path::from_flat(self.model.dim(), x);
        let log_q = 0.5 * self.opt.chol.log_det()
            - 0.5 * kd as f64 * (2.0 * std::f64::consts::PI * g.epsilon).ln()
            - 0.5 * linalg::norm_sq(&noise.xi);
        let lw = log_prior_density(self.model, g, &path)?
            - self.model.loglik(path.last()) / g.epsilon
            - log_q;
        if !lw.is_finite() {
            return Err(Error::SampleFailed("non-finite weight".to_string()));
        }
        Ok((path, lw))
    }
}

/// Dynamic linear map: after each sampled step the remaining path is
/// re-optimized (warm-started from the previous optimum) and the next state is
/// drawn from `N(phi_1, dt eps Sigma)` with `Sigma = (H^{-1})_{11} / dt`.
pub struct DlmSampler<'a> {
    model: &'a SdeModel,
    grid: &'a PathGrid,
    first: OptimalPathResult,
    settings: NewtonSettings,
}

impl<'a> DlmSampler<'a> {
    pub fn new(model: &'a SdeModel, grid: &'a PathGrid, settings: &NewtonSettings) -> Result<Self> {
        let first = minimize_from_deterministic(model, grid.dt, &grid.x0, grid.n_steps, settings)?;
        Ok(DlmSampler {
            model,
            grid,
            first,
            settings: settings.clone(),
        })
    }
}

/// Draw `out = mean + scale * L xi` where `L` is the (already computed) lower
/// Cholesky factor of the covariance shape.
fn gaussian_step(d: usize, mean: &[f64], scale: f64, l: &[f64], xi: &[f64], out: &mut [f64]) {
    for i in 0..d {
        let mut s = 0.0;
        for k in 0..=i {
            s += l[i * d + k] * xi[k];
        }
        out[i] = mean[i] + scale * s;
    }
}

impl ReplayableSampler for DlmSampler<'_> {
    fn n_noise(&self) -> usize {
        self.grid.n_steps * self.model.dim()
    }

    fn sample_with_noise(&self, noise: &NoiseDraw) -> Result<(Path, f64)> {
        let d = self.model.dim();
        let g = self.grid;
        let n = g.n_steps;
        let scale = (g.dt * g.epsilon).sqrt();
        let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI * g.dt * g.epsilon).ln();
        let mut path = Path::zeros(d, 0);
        let mut x = vec![0.0; d];
        let mut lsig = vec![0.0; d * d];
        let mut log_q = 0.0;
        let mut current: Option<OptimalPathResult> = None;
        for step in 0..n {
            let res = current.as_ref().unwrap_or(&self.first);
            lsig.copy_from_slice(&res.sigma_first);
            if !linalg::chol_lower(d, &mut lsig) {
                return Err(Error::SampleFailed(format!(
                    "proposal covariance not positive definite at step {step}"
                )));
            }
            let mut half_log_det = 0.0;
            for i in 0..d {
                half_log_det += lsig[i * d + i].ln();
            }
            let xi = noise.step(step);
            gaussian_step(d, res.phi.state(0), scale, &lsig, xi, &mut x);
            path.push_state(&x);
            log_q += log_norm - half_log_det - 0.5 * linalg::norm_sq(xi);
            if step + 1 < n {
                // The warm start is a cheap, accurate init but always lies in
                // the previous optimum's basin; the deterministic init tracks
                // the current state instead and can land in a different basin
                // (this is what lets the sampler follow a mode switch). Run
                // Newton from both and keep the lower-cost minimizer.
                let init = warm_start(res, &x, self.model, g.dt);
                let warm = minimize_path(self.model, g.dt, &x, &init, &self.settings);
                let det = minimize_from_deterministic(
                    self.model,
                    g.dt,
                    &x,
                    n - step - 1,
                    &self.settings,
                );
                let next = match (warm, det) {
                    (Ok(a), Ok(b)) => {
                        if a.cost <= b.cost {
                            a
                        } else {
                            b
                        }
                    }
                    (Ok(a), Err(_)) => a,
                    (Err(_), Ok(b)) => b,
                    (Err(e), Err(_)) => {
                        return Err(Error::SampleFailed(format!("step {}: {e}", step + 1)))
                    }
                };
                current = Some(next);
            }
        }
        let lw = log_prior_density(self.model, g, &path)?
            - self.model.loglik(path.last()) / g.epsilon
            - log_q;
        if !lw.is_finite() {
            return Err(Error::SampleFailed("non-finite weight".to_string()));
        }
        Ok((path, lw))
    }
}

/// Probability of selecting the plus branch given the two branch log weights.
fn plus_probability(lw_plus: f64, lw_minus: f64) -> f64 {
    // W+ / (W+ + W-) computed stably in log space
    1.0 / (1.0 + (lw_minus - lw_plus).exp())
}

/// Run one symmetrized sample: evaluate the base sampler at `xi` and `-xi`,
/// pick a branch proportionally to its weight, and assign the average weight.
pub fn symmetrized_sample<S: ReplayableSampler>(
    base: &S,
    noise: &NoiseDraw,
    u: f64,
) -> Result<(Path, f64, Branch)> {
    let (path_plus, lw_plus) = base.sample_with_noise(noise)?;
    let (path_minus, lw_minus) = base.sample_with_noise(&noise.negated())?;
    let p_plus = plus_probability(lw_plus, lw_minus);
    let lw = linalg::log_add_exp(lw_plus, lw_minus) - std::f64::consts::LN_2;
    if u < p_plus {
        Ok((path_plus, lw, Branch::Plus))
    } else {
        Ok((path_minus, lw, Branch::Minus))
    }
}

/// A finished ensemble: the successful samples and the number of failures.
pub struct EnsembleResult {
    pub samples: Vec<WeightedPath>,
    pub failed: usize,
}

/// Per-sample RNG seed: two rounds of splitmix64 over (seed, index) so that
/// nearby ensemble seeds do not produce correlated streams.
fn sample_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
    }
    z
}

fn draw_noise(rng: &mut ChaCha12Rng, dim: usize, count: usize) -> NoiseDraw {
    let xi: Vec<f64> = (0..count).map(|_| rng.sample(StandardNormal)).collect();
    NoiseDraw { dim, xi }
}

fn run_plain<S: ReplayableSampler>(
    base: &S,
    dim: usize,
    m: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    let mut samples = Vec::with_capacity(m);
    let mut failed = 0;
    for idx in 0..m {
        let mut rng = ChaCha12Rng::seed_from_u64(sample_seed(seed, idx as u64));
        let noise = draw_noise(&mut rng, dim, base.n_noise());
        match base.sample_with_noise(&noise) {
            Ok((path, log_weight)) => samples.push(WeightedPath {
                path,
                log_weight,
                noise,
                branch: Branch::Na,
            }),
            Err(Error::SampleFailed(_)) | Err(Error::MaxItersExceeded { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    finish_ensemble(samples, failed, m)
}

fn run_symmetrized<S: ReplayableSampler>(
    base: &S,
    dim: usize,
    m: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    let mut samples = Vec::with_capacity(m);
    let mut failed = 0;
    for idx in 0..m {
        let mut rng = ChaCha12Rng::seed_from_u64(sample_seed(seed, idx as u64));
        let noise = draw_noise(&mut rng, dim, base.n_noise());
        let u: f64 = rng.gen();
        match symmetrized_sample(base, &noise, u) {
            Ok((path, log_weight, branch)) => samples.push(WeightedPath {
                path,
                log_weight,
                noise,
                branch,
            }),
            Err(Error::SampleFailed(_)) | Err(Error::MaxItersExceeded { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    finish_ensemble(samples, failed, m)
}

fn finish_ensemble(
    samples: Vec<WeightedPath>,
    failed: usize,
    total: usize,
) -> Result<EnsembleResult> {
    if failed as f64 > 0.01 * total as f64 {
        return Err(Error::TooManyFailures { failed, total });
    }
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(EnsembleResult { samples, failed })
}

/// Draw `m` weighted samples with the given sampler. For a fixed
/// `(model, grid, kind, m, seed)` the result is bit-identical across runs.
pub fn run_ensemble(
    model: &SdeModel,
    grid: &PathGrid,
    kind: SamplerKind,
    m: usize,
    seed: u64,
    settings: &NewtonSettings,
) -> Result<EnsembleResult> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let d = model.dim();
    match kind {
        SamplerKind::Direct => run_plain(&DirectSampler::new(model, grid), d, m, seed),
        SamplerKind::Lm => run_plain(&LmSampler::new(model, grid, settings)?, d, m, seed),
        SamplerKind::Slm => run_symmetrized(&LmSampler::new(model, grid, settings)?, d, m, seed),
        SamplerKind::Dlm => run_plain(&DlmSampler::new(model, grid, settings)?, d, m, seed),
        SamplerKind::Sdlm => run_symmetrized(&DlmSampler::new(model, grid, settings)?, d, m, seed),
    }
}
