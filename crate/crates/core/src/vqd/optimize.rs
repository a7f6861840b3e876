use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ansatz::{AnsatzKernel, AnsatzSpec};
use super::backend::EnergyBackend;
use super::cost::{CostFunction, DeflationState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Lbfgs,
    NelderMead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub restarts: usize,
    /// Cost evaluations allowed per restart. A value-and-gradient call
    /// counts once with analytic gradients and `2P + 1` times with finite
    /// differences.
    pub max_evals: usize,
    /// Stop when the best cost improved by less than this over `window`
    /// iterations.
    pub tol: f64,
    pub window: usize,
    /// Stop when `max |grad| <= gtol * max(1, |cost|)`.
    pub gtol: f64,
    pub gradient: GradientMode,
    pub fd_step: f64,
    /// Initial parameters are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub lbfgs_memory: usize,
    pub simplex_step: f64,
    /// Finish with finite-difference L-BFGS from the best point.
    pub polish: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Lbfgs,
            restarts: 5,
            max_evals: 20_000,
            tol: 1e-9,
            window: 50,
            gtol: 1e-10,
            gradient: GradientMode::Analytic,
            fd_step: 1e-5,
            init_scale: 0.1,
            lbfgs_memory: 10,
            simplex_step: 0.1,
            polish: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_evals == 0 || self.window == 0 || self.lbfgs_memory == 0 {
            return Err(Error::arg("restarts, max_evals, window and lbfgs_memory must be positive"));
        }
        let positive = [self.fd_step, self.simplex_step];
        let nonneg = [self.tol, self.gtol, self.init_scale];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || nonneg.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::arg("optimizer tolerances and step sizes must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Gradient,
    Stalled,
    /// No step along the search direction lowers the cost any further.
    LineSearch,
    Budget,
}

impl StopReason {
    pub fn converged(self) -> bool {
        self != StopReason::Budget
    }
}

pub trait Objective {
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
    /// Evaluations charged per `value_grad` call.
    fn grad_evals(&self, n: usize) -> usize;
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Best value after each iteration.
    pub history: Vec<f64>,
    pub stop: StopReason,
}

struct Progress {
    history: Vec<f64>,
    window: usize,
    tol: f64,
}

impl Progress {
    fn stalled(&self) -> bool {
        let n = self.history.len();
        n > self.window && self.history[n - 1 - self.window] - self.history[n - 1] < self.tol
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Limited-memory BFGS with a backtracking Armijo line search.
pub fn lbfgs(obj: &dyn Objective, x0: Vec<f64>, cfg: &OptimizerConfig, max_evals: usize) -> Result<Minimum> {
    let n = x0.len();
    let per = obj.grad_evals(n);
    let mut x = x0;
    let (mut f, mut g) = obj.value_grad(&x)?;
    let mut evals = per;
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut progress = Progress { history: vec![f], window: cfg.window, tol: cfg.tol };
    let mut iterations = 0;
    let stop = loop {
        if inf_norm(&g) <= cfg.gtol * f.abs().max(1.0) {
            break StopReason::Gradient;
        }
        if evals + per > max_evals {
            break StopReason::Budget;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = match mem.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / inf_norm(&g).max(1.0),
        };
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            mem.clear();
            let scale = 1.0 / inf_norm(&g).max(1.0);
            dir = g.iter().map(|v| -v * scale).collect();
            slope = dot(&dir, &g);
        }

        let mut t = 1.0;
        let accepted = loop {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let (fn_, gn) = obj.value_grad(&xn)?;
            evals += per;
            if fn_.is_finite() && fn_ <= f + 1e-4 * t * slope {
                break Some((xn, fn_, gn));
            }
            if evals + per > max_evals || t < 1e-16 {
                break None;
            }
            // safeguarded quadratic interpolation
            let denom = 2.0 * (fn_ - f - slope * t);
            let trial = if fn_.is_finite() && denom > 0.0 { -slope * t * t / denom } else { 0.1 * t };
            t = trial.clamp(0.1 * t, 0.5 * t);
        };
        let Some((xn, fn_, gn)) = accepted else {
            if evals + per > max_evals {
                break StopReason::Budget;
            }
            if mem.is_empty() {
                break StopReason::LineSearch;
            }
            mem.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            mem.push_back((s, y, 1.0 / sy));
            if mem.len() > cfg.lbfgs_memory {
                mem.pop_front();
            }
        }
        x = xn;
        f = fn_;
        g = gn;
        iterations += 1;
        progress.history.push(f);
        if progress.stalled() {
            break StopReason::Stalled;
        }
    };
    Ok(Minimum {
        x,
        value: f,
        evaluations: evals,
        iterations,
        history: progress.history,
        stop,
    })
}

/// Nelder-Mead simplex search with dimension-adapted coefficients.
pub fn nelder_mead(obj: &dyn Objective, x0: Vec<f64>, cfg: &OptimizerConfig, max_evals: usize) -> Result<Minimum> {
    let n = x0.len();
    let nf = n.max(1) as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut simplex = vec![x0.clone()];
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += cfg.simplex_step;
        simplex.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &simplex {
        values.push(obj.value(v)?);
    }
    let mut evals = n + 1;
    let mut order: Vec<usize> = (0..=n).collect();
    let sort = |order: &mut Vec<usize>, values: &[f64]| {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    };
    sort(&mut order, &values);
    let mut progress = Progress { history: vec![values[order[0]]], window: cfg.window, tol: cfg.tol };
    let mut iterations = 0;
    let stop = loop {
        if evals + 2 > max_evals || n == 0 {
            break StopReason::Budget;
        }
        let worst = order[n];
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / nf;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[worst]).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let xr = along(alpha);
        let fr = obj.value(&xr)?;
        evals += 1;
        let best = values[order[0]];
        let second_worst = values[order[n - 1]];
        if fr < best {
            let xe = along(alpha * gamma);
            let fe = obj.value(&xe)?;
            evals += 1;
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < second_worst {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let (xc, fc) = if fr < values[worst] {
                let xc = along(alpha * rho);
                let fc = obj.value(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = obj.value(&xc)?;
                (xc, fc)
            };
            evals += 1;
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                let b = simplex[order[0]].clone();
                for &i in &order[1..] {
                    if evals >= max_evals {
                        break;
                    }
                    for (v, bv) in simplex[i].iter_mut().zip(&b) {
                        *v = bv + sigma * (*v - bv);
                    }
                    values[i] = obj.value(&simplex[i])?;
                    evals += 1;
                }
            }
        }
        sort(&mut order, &values);
        iterations += 1;
        progress.history.push(values[order[0]]);
        if progress.stalled() {
            break StopReason::Stalled;
        }
    };
    Ok(Minimum {
        x: simplex[order[0]].clone(),
        value: values[order[0]],
        evaluations: evals,
        iterations,
        history: progress.history,
        stop,
    })
}

/// Central finite differences of any objective's value.
pub struct FiniteDifference<'a> {
    pub inner: &'a dyn Objective,
    pub step: f64,
}

impl Objective for FiniteDifference<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.inner.value(x)
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.inner.value(x)?;
        let mut xp = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            xp[i] = x[i] + self.step;
            let up = self.inner.value(&xp)?;
            xp[i] = x[i] - self.step;
            let dn = self.inner.value(&xp)?;
            xp[i] = x[i];
            g[i] = (up - dn) / (2.0 * self.step);
        }
        Ok((f, g))
    }

    fn grad_evals(&self, n: usize) -> usize {
        2 * n + 1
    }
}

impl Objective for CostFunction<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(CostFunction::value(self, x)?.cost)
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (v, g) = self.value_and_gradient(x)?;
        Ok((v.cost, g))
    }

    fn grad_evals(&self, _n: usize) -> usize {
        1
    }
}

/// Minimize from `x0` with the configured method and gradient source.
pub fn minimize(obj: &dyn Objective, x0: Vec<f64>, cfg: &OptimizerConfig) -> Result<Minimum> {
    let fd = FiniteDifference { inner: obj, step: cfg.fd_step };
    let graded: &dyn Objective = match cfg.gradient {
        GradientMode::Analytic => obj,
        GradientMode::FiniteDifference => &fd,
    };
    let mut m = match cfg.method {
        Method::Lbfgs => lbfgs(graded, x0, cfg, cfg.max_evals)?,
        Method::NelderMead => nelder_mead(obj, x0, cfg, cfg.max_evals)?,
    };
    let left = cfg.max_evals.saturating_sub(m.evaluations);
    if cfg.polish && left > fd.grad_evals(m.x.len()) {
        let p = lbfgs(&fd, m.x.clone(), cfg, left)?;
        if p.value <= m.value {
            m.history.extend(p.history.iter().skip(1));
            m = Minimum {
                evaluations: m.evaluations + p.evaluations,
                iterations: m.iterations + p.iterations,
                history: m.history,
                stop: p.stop,
                x: p.x,
                value: p.value,
            };
        } else {
            m.evaluations += p.evaluations;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateOptimization {
    pub params: Vec<f64>,
    /// Deflated cost at `params`.
    pub cost: f64,
    /// Backend energy at `params`, without the penalty.
    pub energy: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub stop: StopReason,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
    /// Evaluations summed over all restarts.
    pub total_evaluations: usize,
}

/// RNG for restart `restart` of deflation level `level`.
pub fn restart_rng(seed: u64, level: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | restart as u64);
    rng
}

/// Optimize one deflation level from `config.restarts` random starts and
/// keep the lowest cost (ties go to the lower restart index).
pub fn optimize_state(
    ansatz: &AnsatzSpec,
    backend: &dyn EnergyBackend,
    deflation: &DeflationState,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<StateOptimization> {
    config.validate()?;
    let kernel = AnsatzKernel::new(*ansatz)?;
    let cost = CostFunction::new(&kernel, backend, deflation)?;
    let level = deflation.len();
    let runs: Vec<Result<Minimum>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(seed, level, r);
            let s = config.init_scale;
            let x0: Vec<f64> = (0..ansatz.num_params())
                .map(|_| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 })
                .collect();
            minimize(&cost, x0, config)
        })
        .collect();
    let runs: Vec<Minimum> = runs.into_iter().collect::<Result<_>>()?;
    let total_evaluations = runs.iter().map(|m| m.evaluations).sum();
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .expect("at least one restart");
    let value = cost.value(&best.x)?;
    Ok(StateOptimization {
        cost: value.cost,
        energy: value.energy,
        evaluations: best.evaluations,
        iterations: best.iterations,
        converged: best.stop.converged(),
        stop: best.stop,
        history: best.history,
        params: best.x,
        restart,
        total_evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum())
        }

        fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
            let mut g = vec![0.0; x.len()];
            for i in 0..x.len() - 1 {
                let t = x[i + 1] - x[i] * x[i];
                g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
                g[i + 1] += 200.0 * t;
            }
            Ok((self.value(x)?, g))
        }

        fn grad_evals(&self, _n: usize) -> usize {
            1
        }
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let cfg = OptimizerConfig::default();
        let m = lbfgs(&Rosenbrock, vec![-1.2, 1.0, -0.5, 0.8], &cfg, cfg.max_evals).unwrap();
        assert!(m.value < 1e-12, "{}", m.value);
        assert!(m.stop.converged());
        assert!(m.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nelder_mead_solves_rosenbrock() {
        let cfg = OptimizerConfig { tol: 1e-14, window: 200, ..Default::default() };
        let m = nelder_mead(&Rosenbrock, vec![-1.2, 1.0], &cfg, cfg.max_evals).unwrap();
        assert!(m.value < 1e-8, "{}", m.value);
    }

    #[test]
    fn finite_difference_lbfgs() {
        let cfg = OptimizerConfig { gradient: GradientMode::FiniteDifference, ..Default::default() };
        let m = minimize(&Rosenbrock, vec![-1.2, 1.0], &cfg).unwrap();
        assert!(m.value < 1e-8, "{}", m.value);
    }

    #[test]
    fn budget_is_respected() {
        let cfg = OptimizerConfig { max_evals: 30, ..Default::default() };
        let m = lbfgs(&Rosenbrock, vec![-1.2, 1.0], &cfg, cfg.max_evals).unwrap();
        assert!(m.evaluations <= 30);
        assert_eq!(m.stop, StopReason::Budget);
        let m = nelder_mead(&Rosenbrock, vec![-1.2, 1.0], &cfg, cfg.max_evals).unwrap();
        assert!(m.evaluations <= 30);
    }

    #[test]
    fn config_defaults_from_json() {
        let c: OptimizerConfig = serde_json::from_str(r#"{"restarts": 2, "max_evals": 100, "tol": 1e-8}"#).unwrap();
        assert_eq!(c.restarts, 2);
        assert_eq!(c.method, Method::Lbfgs);
        let c: OptimizerConfig = serde_json::from_str(r#"{"method": "nelder-mead"}"#).unwrap();
        assert_eq!(c.method, Method::NelderMead);
        assert!(serde_json::from_str::<OptimizerConfig>(r#"{"restart": 2}"#).is_err());
    }
}
