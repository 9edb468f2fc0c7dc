//! Multi-start derivative-free search over products of unitary groups.
//!
//! Each factor `U(n)` is explored in a local chart `U = U₀ exp(A(x))` where
//! `A(x)` is anti-Hermitian with `n²` real coordinates. A restart runs
//! Nelder–Mead in the chart, re-centres the chart on the best point found and
//! repeats with a smaller simplex until a round stops improving.

use crate::linalg::{self, CMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Settings for the multi-start unitary search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Nelder–Mead iterations allowed per restart, summed over rounds.
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            step_tol: 1e-10,
            value_tol: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerStats {
    pub restarts: usize,
    pub iterations: usize,
    /// Second-best restart value minus the best (in the objective's units).
    pub gap: f64,
    pub converged_restarts: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub point: Vec<CMatrix>,
    pub value: f64,
    pub stats: OptimizerStats,
    pub converged: bool,
}

#[derive(Debug, Clone)]
struct RestartOutcome {
    point: Vec<CMatrix>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Minimize `f` over `U(dims[0]) × U(dims[1]) × …`.
///
/// Restart `r` starts from Haar-random unitaries drawn from the stream
/// `(cfg.seed, r)`; a warm start, when given, replaces restart 0. The result
/// is independent of the number of worker threads.
pub(crate) fn minimize_unitaries<F>(
    dims: &[usize],
    f: F,
    cfg: &OptimizerConfig,
    warm: Option<Vec<CMatrix>>,
) -> SearchOutcome
where
    F: Fn(&[CMatrix]) -> f64 + Sync,
{
    let restarts = cfg.restarts.max(1);
    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = match (&warm, r) {
                (Some(w), 0) => w.clone(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(r as u64);
                    dims.iter().map(|&n| linalg::haar_unitary(n, &mut rng)).collect()
                }
            };
            local_search(dims, &f, start, cfg)
        })
        .collect();

    let best_value = outcomes
        .iter()
        .map(|o| o.value)
        .fold(f64::INFINITY, f64::min);
    // among ties, prefer the point closest to the identity, then the lowest restart index
    let chosen = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value <= best_value + cfg.value_tol)
        .map(|(k, o)| (distance_to_identity(&o.point), k))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, k)| k)
        .unwrap_or(0);
    let mut values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let gap = if values.len() > 1 {
        values[1] - values[0]
    } else {
        f64::INFINITY
    };
    let stats = OptimizerStats {
        restarts,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        gap,
        converged_restarts: outcomes.iter().filter(|o| o.converged).count(),
    };
    let best = &outcomes[chosen];
    SearchOutcome {
        point: best.point.clone(),
        value: best.value,
        converged: best.converged,
        stats,
    }
}

fn distance_to_identity(point: &[CMatrix]) -> f64 {
    point
        .iter()
        .map(|u| (u - CMatrix::identity(u.nrows(), u.ncols())).norm())
        .sum()
}

fn chart_point(base: &[CMatrix], dims: &[usize], x: &[f64]) -> Vec<CMatrix> {
    let mut offset = 0;
    base.iter()
        .zip(dims)
        .map(|(u0, &n)| {
            let a = linalg::anti_hermitian_from_params(&x[offset..offset + n * n], n);
            offset += n * n;
            u0 * linalg::expm_anti_hermitian(&a)
        })
        .collect()
}

fn local_search<F>(dims: &[usize], f: &F, start: Vec<CMatrix>, cfg: &OptimizerConfig) -> RestartOutcome
where
    F: Fn(&[CMatrix]) -> f64,
{
    let nparams: usize = dims.iter().map(|n| n * n).sum();
    let mut base = start;
    let mut value = f(&base);
    let mut iterations = 0;
    let mut step = 0.6;
    let mut converged = false;
    let ftol = cfg.value_tol * 1e-3;
    while iterations < cfg.max_iters {
        let nm = NelderMead {
            max_iters: cfg.max_iters - iterations,
            ftol,
            xtol: cfg.step_tol,
        };
        let x0 = vec![0.0; nparams];
        let out = nm.minimize(|x| f(&chart_point(&base, dims, x)), &x0, step);
        iterations += out.iterations;
        let moved = out.x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let improvement = value - out.value;
        if out.value < value {
            base = chart_point(&base, dims, &out.x);
            value = out.value;
        }
        if out.converged && (improvement <= ftol || moved <= cfg.step_tol) {
            converged = true;
            break;
        }
        // shrink the next simplex around the new centre
        step = (moved * 2.0).min(step * 0.5).max(cfg.step_tol * 10.0);
    }
    RestartOutcome {
        point: base,
        value,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead with dimension-adapted coefficients (Gao & Han).
#[derive(Debug, Clone)]
pub(crate) struct NelderMead {
    pub max_iters: usize,
    pub ftol: f64,
    pub xtol: f64,
}

impl NelderMead {
    pub(crate) fn minimize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        x0: &[f64],
        step: f64,
    ) -> NelderMeadOutcome {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
        let (rho, sigma) = (0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for k in 0..n {
            let mut v = x0.to_vec();
            v[k] += step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut order: Vec<usize> = (0..=n).collect();
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.max_iters {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[n];
            let second = order[n - 1];
            let spread = values[worst] - values[best];
            let diameter = simplex
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[best])
                        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
                })
                .fold(0.0f64, f64::max);
            // flat (gauge) directions of the objective keep the diameter
            // large, so a small value spread alone ends the round; the caller
            // confirms with a fresh simplex
            if spread <= self.ftol || diameter <= self.xtol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for &k in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(alpha);
            let fr = f(&xr);
            if fr < values[best] {
                let xe = along(alpha * gamma);
                let fe = f(&xe);
                if fe < fr {
                    simplex[worst] = xe;
                    values[worst] = fe;
                } else {
                    simplex[worst] = xr;
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second] {
                simplex[worst] = xr;
                values[worst] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[worst] {
                let xc = along(alpha * rho);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
                continue;
            }
            // shrink towards the best vertex
            let xb = simplex[best].clone();
            for &k in &order[1..] {
                let v: Vec<f64> = xb
                    .iter()
                    .zip(&simplex[k])
                    .map(|(b, x)| b + sigma * (x - b))
                    .collect();
                values[k] = f(&v);
                simplex[k] = v;
            }
        }
        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap_or(0);
        NelderMeadOutcome {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            converged,
        }
    }
}
