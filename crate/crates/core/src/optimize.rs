//! Multi-start Nelder–Mead search over unitary parameterizations.
//!
//! Unitaries are written as `U(θ) = exp(i·H(θ))` with `H` Hermitian and
//! assembled from `d²` real numbers: `d` diagonal entries followed by the
//! real and imaginary parts of the strict upper triangle, row by row.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, eigh_unchecked, ComplexMatrix};

/// Knobs shared by every optimized quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub simplex_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
    /// Restarts whose classical correlation lies within this window of the
    /// best are treated as distinct maximizing bases.
    pub chi_basis_slack: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 24,
            max_iters: 2000,
            simplex_tol: 1e-7,
            value_tol: 1e-9,
            seed: 0,
            chi_basis_slack: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Same settings with a different seed.
    pub fn with_seed_value(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.restarts > 0
            && self.max_iters > 0
            && self.simplex_tol > 0.0
            && self.value_tol > 0.0
            && self.chi_basis_slack > 0.0;
        if !positive {
            return Err(Error::Domain(format!("optimizer settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// SplitMix64 mix of `(seed, index)`; used for per-restart and per-sample seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of real parameters of `U(θ)` in dimension `d`.
pub fn unitary_param_count(d: usize) -> usize {
    d * d
}

/// Hermitian generator `H(θ)`.
pub fn hermitian_from_params(d: usize, theta: &[f64]) -> ComplexMatrix {
    assert_eq!(theta.len(), unitary_param_count(d), "expected d² parameters");
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = c(theta[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = c(theta[k], theta[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// `U(θ) = exp(i·H(θ))`, evaluated through the spectral decomposition of `H`.
pub fn unitary_from_params(d: usize, theta: &[f64]) -> ComplexMatrix {
    let (vals, v) = eigh_unchecked(&hermitian_from_params(d, theta));
    let mut scaled = v.clone();
    for (k, lambda) in vals.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, *lambda);
        for i in 0..d {
            scaled[(i, k)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// `diag(1, e^{iφ₁}, …, e^{iφ_{d−1}})`.
pub fn phase_diagonal(phases: &[f64]) -> ComplexMatrix {
    let d = phases.len() + 1;
    ComplexMatrix::from_diagonal(&DVector::from_fn(d, |i, _| {
        if i == 0 {
            c(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, phases[i - 1])
        }
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    pub simplex_tol: f64,
    pub value_tol: f64,
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` with the dimension-adaptive Nelder–Mead coefficients
/// (reflection 1, expansion 1 + 2/n, contraction 3/4 − 1/(2n), shrink 1 − 1/n).
///
/// Terminates when the spread of simplex values is within `value_tol` and
/// every vertex is within `simplex_tol` (sup norm) of the best vertex.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
    let rho = (0.75 - 0.5 / nf).max(0.5);
    let sigma = (1.0 - 1.0 / nf).max(0.5);

    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iters = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    while iters < opts.max_iters {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let size = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.value_tol && size <= opts.simplex_tol {
            converged = true;
            break;
        }
        iters += 1;

        let mut centroid = vec![0.0; n];
        for &idx in &order[..n] {
            for (cj, xj) in centroid.iter_mut().zip(&simplex[idx]) {
                *cj += xj / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(cj, wj)| cj + t * (cj - wj))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < values[best] {
            let xe = along(gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            let shrunk: Vec<f64> = anchor
                .iter()
                .zip(&simplex[idx])
                .map(|(b, x)| b + sigma * (x - b))
                .collect();
            values[idx] = eval(&shrunk);
            simplex[idx] = shrunk;
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("non-empty simplex");
    NelderMeadOutcome {
        x: simplex[best].clone(),
        value: values[best],
        iters,
        evals,
        converged,
    }
}

/// One restart of [`multistart_maximize`].
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evals: usize,
}

#[derive(Debug, Clone)]
pub struct MultiStart {
    pub best: usize,
    pub restarts: Vec<RestartOutcome>,
}

impl MultiStart {
    pub fn best(&self) -> &RestartOutcome {
        &self.restarts[self.best]
    }

    pub fn converged_count(&self) -> usize {
        self.restarts.iter().filter(|r| r.converged).count()
    }

    pub fn values(&self) -> Vec<f64> {
        self.restarts.iter().map(|r| r.value).collect()
    }
}

const INITIAL_STEP: f64 = 0.6;
const POLISH_STEP: f64 = 0.05;
const POLISH_ROUNDS: usize = 3;

/// Maximizes `objective` over `R^dim` from `cfg.restarts` seeded starting
/// points drawn uniformly from `[−π, π]^dim`.
///
/// Each restart runs Nelder–Mead and then re-seeds a small simplex at its
/// optimum until the value stops improving. Restarts run in parallel; the
/// per-restart seed depends only on `(cfg.seed, index)`, so results do not
/// depend on scheduling. Ties go to the lowest restart index.
pub fn multistart_maximize<F>(dim: usize, cfg: &OptimizerConfig, objective: F) -> MultiStart
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let restarts: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, r as u64));
            let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-PI..PI)).collect();
            maximize_from(&objective, &x0, cfg)
        })
        .collect();
    let best = restarts
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.value > restarts[best].value { i } else { best });
    MultiStart { best, restarts }
}

/// Local maximization from `x0` with polishing restarts.
pub fn maximize_from<F>(objective: &F, x0: &[f64], cfg: &OptimizerConfig) -> RestartOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let neg = |x: &[f64]| -objective(x);
    if x0.is_empty() {
        return RestartOutcome { x: Vec::new(), value: objective(&[]), converged: true, evals: 1 };
    }
    let mut opts = NelderMeadOptions {
        max_iters: cfg.max_iters,
        simplex_tol: cfg.simplex_tol,
        value_tol: cfg.value_tol,
        initial_step: INITIAL_STEP,
    };
    let mut out = nelder_mead(neg, x0, &opts);
    let mut evals = out.evals;
    let mut converged = out.converged;
    opts.initial_step = POLISH_STEP;
    for _ in 0..POLISH_ROUNDS {
        let next = nelder_mead(neg, &out.x, &opts);
        evals += next.evals;
        let gain = out.value - next.value;
        if next.value < out.value {
            converged = next.converged;
            out = next;
        }
        if gain <= cfg.value_tol {
            break;
        }
    }
    RestartOutcome { x: out.x, value: -out.value, converged, evals }
}
