//! Experiment runners behind the CLI subcommands: ε sweeps, weighted
//! histograms with analytic overlays, Langevin crossing counts, and the
//! continuous-limit consistency check.
//!
//! Every runner is a pure function of its [`ExperimentConfig`]: identical
//! configs produce byte-identical CSV output. Rows are flushed as they are
//! produced so a failed run leaves a usable partial table.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path as FsPath;

use crate::config::ExperimentConfig;
use crate::diagnostics::{
    avg_zero_crossings, coordinate_at_step, ensemble_stats, loglog_slope, EnsembleStats,
    WeightedHistogram,
};
use crate::error::{Error, Result};
use crate::model::{builtin_model, linear_gaussian_model, SdeModel};
use crate::optimize::{minimize_from_deterministic, NewtonSettings};
use crate::samplers::{run_ensemble, SamplerKind};

/// CSV float format: 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn open_csv(dir: &FsPath, name: &str, header: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    writeln!(w, "{header}")?;
    w.flush()?;
    Ok(w)
}

/// One `(method, epsilon)` cell of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub method: SamplerKind,
    pub epsilon: f64,
    pub q: f64,
    pub n_eff: f64,
    pub m: usize,
    pub failed: usize,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Fitted `Q ~ eps^slope` per method; `None` if some `Q` was zero.
    pub slopes: Vec<(SamplerKind, Option<f64>)>,
}

impl SweepOutcome {
    pub fn slope(&self, method: SamplerKind) -> Option<f64> {
        self.slopes
            .iter()
            .find(|(k, _)| *k == method)
            .and_then(|(_, s)| *s)
    }

    pub fn q(&self, method: SamplerKind, epsilon: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.epsilon == epsilon)
            .map(|r| r.q)
    }
}

/// Run every configured method over the ε grid and tabulate `Q` and `N_eff`.
/// Writes `sweep.csv` and `slopes.csv` into the output directory.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let settings = NewtonSettings::default();
    let (model, base_grid) = builtin_model(&cfg.model_name, &cfg.model_params)?;
    let mut w = open_csv(&cfg.out_dir, "sweep.csv", "method,epsilon,q,n_eff,m,failed,seed")?;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (i, &method) in cfg.methods.iter().enumerate() {
        let m = cfg.samples_for(i);
        let mut qs = Vec::new();
        for &epsilon in &cfg.epsilons {
            let mut grid = base_grid.clone();
            grid.epsilon = epsilon;
            let ens = run_ensemble(&model, &grid, method, m, cfg.seed, &settings)?;
            let lw: Vec<f64> = ens.samples.iter().map(|s| s.log_weight).collect();
            let stats = ensemble_stats(&lw)?;
            let row = SweepRow {
                method,
                epsilon,
                q: stats.q_hat,
                n_eff: stats.n_eff,
                m,
                failed: ens.failed,
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                method.as_str(),
                fmt_float(epsilon),
                fmt_float(row.q),
                fmt_float(row.n_eff),
                m,
                ens.failed,
                cfg.seed
            )?;
            w.flush()?;
            qs.push(stats.q_hat);
            rows.push(row);
        }
        slopes.push((method, loglog_slope(&cfg.epsilons, &qs).ok()));
    }
    let mut sw = open_csv(&cfg.out_dir, "slopes.csv", "method,slope")?;
    for (method, slope) in &slopes {
        let s = slope.map_or("nan".to_string(), fmt_float);
        writeln!(sw, "{},{}", method.as_str(), s)?;
    }
    sw.flush()?;
    Ok(SweepOutcome { rows, slopes })
}

/// One method/coordinate marginal from a histogram run, with the raw values
/// and log weights retained for further statistics.
#[derive(Debug)]
pub struct HistEntry {
    pub method: SamplerKind,
    pub coord: usize,
    pub step: usize,
    pub hist: WeightedHistogram,
    pub stats: EnsembleStats,
    pub values: Vec<f64>,
    pub log_weights: Vec<f64>,
}

#[derive(Debug)]
pub struct HistogramOutcome {
    pub entries: Vec<HistEntry>,
}

impl HistogramOutcome {
    pub fn entry(&self, method: SamplerKind, coord: usize) -> Option<&HistEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.coord == coord)
    }
}

/// Drift slope `a` with `f(x) = -a x` for registry models whose drift is
/// linear; `None` for nonlinear drifts (no analytic overlay possible).
fn linear_drift_alpha(cfg: &ExperimentConfig) -> Option<f64> {
    match cfg.model_name.as_str() {
        "bm_unimodal" | "bm_bimodal" => Some(0.0),
        "langevin_bimodal" => Some(
            cfg.model_params
                .get("alpha")
                .map(|v| v[0])
                .unwrap_or(1.0),
        ),
        _ => None,
    }
}

/// Weighted marginal histograms of every coordinate at the configured step
/// (default: the final step), at `epsilons[0]`. Writes one
/// `hist_<method>_<coord>_<step>.csv` per method and coordinate, plus the
/// analytic end-time target curve `target.csv` for 1-D linear-drift models.
pub fn run_histogram(cfg: &ExperimentConfig) -> Result<HistogramOutcome> {
    cfg.validate()?;
    let settings = NewtonSettings::default();
    let (model, mut grid) = builtin_model(&cfg.model_name, &cfg.model_params)?;
    grid.epsilon = cfg.epsilons[0];
    let step = cfg.step.unwrap_or(grid.n_steps);
    if step < 1 || step > grid.n_steps {
        return Err(Error::OutOfRangeStep {
            step,
            n_steps: grid.n_steps,
        });
    }
    let d = model.dim();
    let mut entries = Vec::new();
    let mut overlay_range: Option<(f64, f64)> = None;
    for (i, &method) in cfg.methods.iter().enumerate() {
        let m = cfg.samples_for(i);
        let ens = run_ensemble(&model, &grid, method, m, cfg.seed, &settings)?;
        let log_weights: Vec<f64> = ens.samples.iter().map(|s| s.log_weight).collect();
        let stats = ensemble_stats(&log_weights)?;
        for coord in 0..d {
            let values = coordinate_at_step(&ens.samples, coord, step)?;
            let hist = WeightedHistogram::from_samples(&values, &log_weights, cfg.bins);
            let name = format!("hist_{}_{}_{}.csv", method.as_str(), coord, step);
            let mut w = open_csv(&cfg.out_dir, &name, "bin_left,bin_right,mass")?;
            for (b, mass) in hist.mass.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt_float(hist.edges[b]),
                    fmt_float(hist.edges[b + 1]),
                    fmt_float(*mass)
                )?;
                w.flush()?;
            }
            if coord == 0 && step == grid.n_steps {
                let (lo, hi) = (hist.edges[0], *hist.edges.last().unwrap());
                overlay_range = Some(match overlay_range {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
            entries.push(HistEntry {
                method,
                coord,
                step,
                hist,
                stats,
                values,
                log_weights: log_weights.clone(),
            });
        }
    }
    if let (Some(alpha), Some((lo, hi)), true) =
        (linear_drift_alpha(cfg), overlay_range, d == 1 && step == grid.n_steps)
    {
        // End-time marginal of the discretized prior is Gaussian:
        // mean x0 a^N, variance eps * sigma^2 dt sum a^{2k}, a = 1 - alpha dt.
        let a = 1.0 - alpha * grid.dt;
        let mean = grid.x0[0] * a.powi(grid.n_steps as i32);
        let mut var_shape = 0.0;
        for k in 0..grid.n_steps {
            var_shape += a.powi(2 * k as i32);
        }
        var_shape *= model.sigma() * model.sigma() * grid.dt;
        let points = 400;
        // Potential U(x) = g(x) + (x - mean)^2 / (2 var_shape); the curve is
        // exp(-(U - min U)/eps), unnormalized but underflow-free.
        let us: Vec<f64> = (0..=points)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / points as f64;
                let dx = x - mean;
                model.loglik(&[x]) + dx * dx / (2.0 * var_shape)
            })
            .collect();
        let u_min = us.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut w = open_csv(&cfg.out_dir, "target.csv", "x,value")?;
        for (i, u) in us.iter().enumerate() {
            let x = lo + (hi - lo) * i as f64 / points as f64;
            writeln!(
                w,
                "{},{}",
                fmt_float(x),
                fmt_float((-(u - u_min) / grid.epsilon).exp())
            )?;
        }
        w.flush()?;
    }
    Ok(HistogramOutcome { entries })
}

#[derive(Debug, Clone, Copy)]
pub struct CrossingsRow {
    pub x0: f64,
    pub epsilon: f64,
    pub q: f64,
    pub avg_crossings: f64,
    pub m: usize,
}

#[derive(Debug)]
pub struct CrossingsOutcome {
    pub rows: Vec<CrossingsRow>,
}

/// For every `(x0, epsilon)` pair run the DLM sampler and record `Q` together
/// with the average number of sign changes of the path. Writes
/// `crossings.csv`.
pub fn run_crossings(cfg: &ExperimentConfig) -> Result<CrossingsOutcome> {
    cfg.validate()?;
    let settings = NewtonSettings::default();
    let m = cfg.samples_for(0);
    let (probe, _) = builtin_model(&cfg.model_name, &cfg.model_params)?;
    if probe.dim() != 1 {
        return Err(Error::ModelNotSupported(format!(
            "crossings requires a 1-D model, `{}` has dimension {}",
            cfg.model_name,
            probe.dim()
        )));
    }
    let mut w = open_csv(&cfg.out_dir, "crossings.csv", "x0,epsilon,q,avg_crossings,m,seed")?;
    let mut rows = Vec::new();
    for &x0 in &cfg.x0_list {
        let mut params = cfg.model_params.clone();
        params.insert("x0".to_string(), vec![x0]);
        let (model, base_grid) = builtin_model(&cfg.model_name, &params)?;
        for &epsilon in &cfg.epsilons {
            let mut grid = base_grid.clone();
            grid.epsilon = epsilon;
            let ens = run_ensemble(&model, &grid, SamplerKind::Dlm, m, cfg.seed, &settings)?;
            let lw: Vec<f64> = ens.samples.iter().map(|s| s.log_weight).collect();
            let stats = ensemble_stats(&lw)?;
            let avg = avg_zero_crossings(&ens.samples, &grid.x0, 0)?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_float(x0),
                fmt_float(epsilon),
                fmt_float(stats.q_hat),
                fmt_float(avg),
                m,
                cfg.seed
            )?;
            w.flush()?;
            rows.push(CrossingsRow {
                x0,
                epsilon,
                q: stats.q_hat,
                avg_crossings: avg,
                m,
            });
        }
    }
    Ok(CrossingsOutcome { rows })
}

#[derive(Debug, Clone, Copy)]
pub struct ConsistencyRow {
    pub dt: f64,
    pub drift_err: f64,
    pub sigma_err: f64,
}

#[derive(Debug)]
pub struct ConsistencyOutcome {
    pub rows: Vec<ConsistencyRow>,
    /// Fitted convergence orders of the two error columns; `None` when an
    /// error column hits zero (exact cases).
    pub drift_order: Option<f64>,
    pub sigma_order: Option<f64>,
}

/// Continuous-time optimal path of the linear-Gaussian problem
/// `f(x) = -alpha x`, `g(x) = (x-y)^2/(2r)`: the Euler-Lagrange equation is
/// `phi'' = alpha^2 phi` with `phi(0) = x0` and the transversality condition
/// `(phi'(T) + alpha phi(T))/sigma^2 + (phi(T) - y)/r = 0`.
/// Returns `(phi(t), phi'(t))`.
fn continuous_optimal_path(
    alpha: f64,
    sigma: f64,
    y: f64,
    r: f64,
    x0: f64,
    t_end: f64,
) -> impl Fn(f64) -> (f64, f64) {
    let sig2 = sigma * sigma;
    if alpha == 0.0 {
        // Straight line with slope sigma^2 (y - x0) / (r + sigma^2 T).
        let slope = sig2 * (y - x0) / (r + sig2 * t_end);
        return Box::new(move |t: f64| (x0 + slope * t, slope)) as Box<dyn Fn(f64) -> (f64, f64)>;
    }
    let (c, s) = ((alpha * t_end).cosh(), (alpha * t_end).sinh());
    let a = x0;
    let b = (y / r - a * (alpha * (s + c) / sig2 + c / r)) / (alpha * (c + s) / sig2 + s / r);
    Box::new(move |t: f64| {
        let (ch, sh) = ((alpha * t).cosh(), (alpha * t).sinh());
        (a * ch + b * sh, alpha * (a * sh + b * ch))
    })
}

/// For each configured step size, optimize the discrete path of the
/// linear-Gaussian problem and compare its forward-difference slope and
/// first-step marginal covariance against the continuous closed forms.
/// Writes `consistency.csv`.
pub fn run_dt_consistency(cfg: &ExperimentConfig) -> Result<ConsistencyOutcome> {
    cfg.validate()?;
    if cfg.model_explicit && cfg.model_name != "linear_gaussian" {
        return Err(Error::ModelNotSupported(format!(
            "dt-consistency needs linear drift and quadratic likelihood; \
             use the built-in linear_gaussian family, not `{}`",
            cfg.model_name
        )));
    }
    let settings = NewtonSettings::default();
    let (alpha, sigma, y, r, t_end) = (cfg.alpha, cfg.sigma, cfg.obs_y, cfg.obs_var, cfg.horizon);
    let x0 = cfg
        .model_params
        .get("x0")
        .map(|v| v[0])
        .unwrap_or(0.0);
    let model = linear_gaussian_model(alpha, sigma, y, r);
    let phi_cont = continuous_optimal_path(alpha, sigma, y, r, x0, t_end);
    let mut w = open_csv(&cfg.out_dir, "consistency.csv", "dt,drift_err,sigma_err")?;
    let mut rows = Vec::new();
    for &dt in &cfg.dts {
        let n = (t_end / dt).round() as usize;
        if n < 1 || (n as f64 * dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::Config(format!(
                "dt {dt} does not divide the horizon {t_end}"
            )));
        }
        let res = minimize_from_deterministic(&model, dt, &[x0], n, &settings)?;
        let mut drift_err = 0.0_f64;
        let mut prev = x0;
        for k in 0..n {
            let cur = res.phi.state(k)[0];
            let slope = (cur - prev) / dt;
            let (_, phidot) = phi_cont(k as f64 * dt);
            drift_err = drift_err.max((slope - phidot).abs());
            prev = cur;
        }
        let sigma_err = (res.sigma_first[0] - sigma * sigma).abs();
        writeln!(
            w,
            "{},{},{}",
            fmt_float(dt),
            fmt_float(drift_err),
            fmt_float(sigma_err)
        )?;
        w.flush()?;
        rows.push(ConsistencyRow {
            dt,
            drift_err,
            sigma_err,
        });
    }
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let de: Vec<f64> = rows.iter().map(|r| r.drift_err).collect();
    let se: Vec<f64> = rows.iter().map(|r| r.sigma_err).collect();
    Ok(ConsistencyOutcome {
        rows,
        drift_order: loglog_slope(&dts, &de).ok(),
        sigma_order: loglog_slope(&dts, &se).ok(),
    })
}

/// Allocating helper for tests and the CLI: registry model plus optimal path.
pub fn optimal_path_for(
    name: &str,
    cfg: &ExperimentConfig,
) -> Result<(SdeModel, crate::model::PathGrid, crate::optimize::OptimalPathResult)> {
    let (model, grid) = builtin_model(name, &cfg.model_params)?;
    let res = minimize_from_deterministic(
        &model,
        grid.dt,
        &grid.x0,
        grid.n_steps,
        &NewtonSettings::default(),
    )?;
    Ok((model, grid, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use tempfile::tempdir;

    fn base_cfg(out: &FsPath) -> ExperimentConfig {
        ExperimentConfig {
            out_dir: out.to_path_buf(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sweep_writes_schema_and_is_byte_identical() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.methods = vec![SamplerKind::Lm];
        cfg.epsilons = vec![1e-2, 1e-1];
        cfg.samples = vec![30];
        cfg.model_params.insert("n_steps".to_string(), vec![20.0]);
        run_sweep(&cfg).unwrap();
        let first = fs::read(dir.path().join("sweep.csv")).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.starts_with("method,epsilon,q,n_eff,m,failed,seed\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 3);
        run_sweep(&cfg).unwrap();
        let second = fs::read(dir.path().join("sweep.csv")).unwrap();
        assert_eq!(first, second);
        let slopes = fs::read_to_string(dir.path().join("slopes.csv")).unwrap();
        assert!(slopes.starts_with("method,slope\n"));
        assert!(slopes.lines().nth(1).unwrap().starts_with("lm,"));
    }

    #[test]
    fn sweep_rejects_empty_methods_before_compute() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.methods.clear();
        assert!(matches!(run_sweep(&cfg), Err(Error::Config(_))));
        assert!(!dir.path().join("sweep.csv").exists());
    }

    #[test]
    fn histogram_masses_sum_to_one_and_target_written() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.model_name = "bm_unimodal".to_string();
        cfg.methods = vec![SamplerKind::Lm];
        cfg.epsilons = vec![0.05];
        cfg.samples = vec![200];
        cfg.model_params.insert("n_steps".to_string(), vec![20.0]);
        let out = run_histogram(&cfg).unwrap();
        let e = out.entry(SamplerKind::Lm, 0).unwrap();
        assert_relative_eq!(e.hist.mass.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(e.step, 20);
        let name = dir.path().join("hist_lm_0_20.csv");
        let text = fs::read_to_string(name).unwrap();
        assert!(text.starts_with("bin_left,bin_right,mass\n"));
        assert_eq!(text.lines().count(), cfg.bins + 1);
        let target = fs::read_to_string(dir.path().join("target.csv")).unwrap();
        assert!(target.starts_with("x,value\n"));
    }

    #[test]
    fn histogram_rejects_out_of_range_step() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.methods = vec![SamplerKind::Direct];
        cfg.samples = vec![10];
        cfg.step = Some(500);
        assert!(matches!(
            run_histogram(&cfg),
            Err(Error::OutOfRangeStep { .. })
        ));
    }

    #[test]
    fn crossings_runs_on_short_langevin() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.model_name = "langevin_bimodal".to_string();
        cfg.model_params.insert("n_steps".to_string(), vec![50.0]);
        cfg.x0_list = vec![0.5];
        cfg.epsilons = vec![0.05];
        cfg.samples = vec![20];
        let out = run_crossings(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.rows[0].avg_crossings >= 0.0);
        let text = fs::read_to_string(dir.path().join("crossings.csv")).unwrap();
        assert!(text.starts_with("x0,epsilon,q,avg_crossings,m,seed\n"));
    }

    #[test]
    fn crossings_rejects_multidimensional_model() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.model_name = "gissinger".to_string();
        cfg.x0_list = vec![0.1];
        assert!(matches!(
            run_crossings(&cfg),
            Err(Error::ModelNotSupported(_))
        ));
    }

    #[test]
    fn dt_consistency_sigma_order_one_for_bm_quadratic() {
        let dir = tempdir().unwrap();
        let cfg = base_cfg(dir.path());
        // defaults: alpha 0, sigma 1, y 1, r 1, T 1, dts halving from 0.1
        let out = run_dt_consistency(&cfg).unwrap();
        assert_eq!(out.rows.len(), 5);
        let order = out.sigma_order.unwrap();
        assert!((0.8..=1.2).contains(&order), "sigma order {order}");
        for w in out.rows.windows(2) {
            assert!(w[1].sigma_err < w[0].sigma_err);
        }
        // BM is superconvergent in the drift: the discrete slope equals the
        // continuous one, so the error column is numerically zero.
        for r in &out.rows {
            assert!(r.drift_err <= 1e-6, "drift_err {}", r.drift_err);
        }
    }

    #[test]
    fn dt_consistency_drift_order_one_for_ou() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.alpha = 1.0;
        let out = run_dt_consistency(&cfg).unwrap();
        let order = out.drift_order.unwrap();
        assert!((0.8..=1.2).contains(&order), "drift order {order}");
        for w in out.rows.windows(2) {
            assert!(w[1].drift_err < w[0].drift_err);
        }
    }

    #[test]
    fn dt_consistency_free_end_sigma_exact() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.sigma = 2.0;
        cfg.obs_var = 1e30; // g effectively zero
        let out = run_dt_consistency(&cfg).unwrap();
        for r in &out.rows {
            assert!(r.sigma_err <= 1e-10, "sigma_err {}", r.sigma_err);
        }
    }

    #[test]
    fn dt_consistency_rejects_nonlinear_model() {
        let dir = tempdir().unwrap();
        let mut cfg = base_cfg(dir.path());
        cfg.model_name = "gissinger".to_string();
        cfg.model_explicit = true;
        assert!(matches!(
            run_dt_consistency(&cfg),
            Err(Error::ModelNotSupported(_))
        ));
    }

    #[test]
    fn continuous_path_satisfies_boundary_conditions() {
        for (alpha, sigma, y, r, x0, t_end) in [
            (0.0, 1.0, 1.0, 1.0, 0.0, 1.0),
            (1.3, 0.7, -0.5, 0.4, 0.2, 2.0),
        ] {
            let phi = continuous_optimal_path(alpha, sigma, y, r, x0, t_end);
            let (p0, _) = phi(0.0);
            assert_relative_eq!(p0, x0, epsilon = 1e-12);
            let (pt, pdt) = phi(t_end);
            let bc = (pdt + alpha * pt) / (sigma * sigma) + (pt - y) / r;
            assert_relative_eq!(bc, 0.0, epsilon = 1e-10);
            // Euler-Lagrange residual via central difference
            let h = 1e-5;
            let (pm, _) = phi(0.5 * t_end - h);
            let (pc, _) = phi(0.5 * t_end);
            let (pp, _) = phi(0.5 * t_end + h);
            let second = (pp - 2.0 * pc + pm) / (h * h);
            assert_relative_eq!(second, alpha * alpha * pc, epsilon = 1e-4, max_relative = 1e-4);
        }
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        let s = fmt_float(1.0 / 3.0);
        assert_eq!(s, "3.3333333333333331e-1");
        let v: f64 = s.parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }
}
