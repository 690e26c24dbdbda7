//! Correlation quantities defined through local projective measurements on A.
//!
//! Every quantity here is built from the Holevo quantity
//! `χ = S(Σ p_k ρ_k^b) − Σ p_k S(ρ_k^b)` of the ensemble Bob holds after
//! Alice measures in a basis. Maximizations over bases go through
//! [`multistart_maximize`] on the `exp(iH)` parameterization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, entropy_unchecked, ComplexMatrix, DensityMatrix, Subsystem};
use crate::mub::{fourier_matrix, is_prime, wootters_fields_mubs, Basis};
use crate::optimize::{
    derive_seed, multistart_maximize, phase_diagonal, unitary_from_params, unitary_param_count, MultiStart,
};

pub use crate::optimize::OptimizerConfig;

/// Outcomes with probability below this are dropped from ensembles.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

/// Discord values in `[−DISCORD_CLAMP, 0)` are reported as zero.
pub const DISCORD_CLAMP: f64 = 1e-6;

/// Bob's ensemble `{p_k, ρ_k^b}` after Alice's projective measurement.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    pub probs: Vec<f64>,
    pub conditionals: Vec<ComplexMatrix>,
    /// Index of the basis vector each retained outcome came from.
    pub outcomes: Vec<usize>,
}

impl MeasurementEnsemble {
    /// `Σ p_k ρ_k^b`.
    pub fn average(&self) -> ComplexMatrix {
        let n = self.conditionals[0].nrows();
        self.probs
            .iter()
            .zip(&self.conditionals)
            .fold(ComplexMatrix::zeros(n, n), |acc, (p, rho)| acc + rho.scale(*p))
    }

    /// Holevo quantity of the ensemble.
    pub fn holevo(&self) -> f64 {
        let avg = entropy_unchecked(&self.average());
        let cond: f64 = self
            .probs
            .iter()
            .zip(&self.conditionals)
            .map(|(p, rho)| p * entropy_unchecked(rho))
            .sum();
        (avg - cond).max(0.0)
    }
}

/// Precomputed `d_b × d_b` blocks `ρ_{ij} = ⟨i|ρ|j⟩_A` for fast repeated
/// Holevo evaluations on one state.
#[derive(Debug, Clone)]
pub struct HolevoEvaluator {
    dim_a: usize,
    dim_b: usize,
    blocks: Vec<ComplexMatrix>,
    entropy_b: f64,
}

impl HolevoEvaluator {
    pub fn new(rho: &DensityMatrix) -> Self {
        let (da, db) = (rho.dim_a(), rho.dim_b());
        let m = rho.matrix();
        let blocks = (0..da * da)
            .map(|ij| {
                let (i, j) = (ij / da, ij % da);
                m.view((i * db, j * db), (db, db)).into_owned()
            })
            .collect();
        Self {
            dim_a: da,
            dim_b: db,
            blocks,
            entropy_b: entropy_unchecked(&rho.partial_trace(Subsystem::A)),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    /// `S(ρ_b)`, the upper bound of every Holevo quantity on this state.
    pub fn entropy_b(&self) -> f64 {
        self.entropy_b
    }

    /// Unnormalized conditional `⟨e|ρ|e⟩_A` for the vector in column `k` of `u`.
    fn conditional(&self, u: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let da = self.dim_a;
        let mut sigma = ComplexMatrix::zeros(self.dim_b, self.dim_b);
        for i in 0..da {
            let ui = u[(i, k)].conj();
            if ui == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..da {
                let w = ui * u[(j, k)];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                sigma.zip_apply(&self.blocks[i * da + j], |s, b| *s += w * b);
            }
        }
        sigma
    }

    pub fn ensemble(&self, u: &ComplexMatrix) -> MeasurementEnsemble {
        let mut ens = MeasurementEnsemble { probs: Vec::new(), conditionals: Vec::new(), outcomes: Vec::new() };
        for k in 0..self.dim_a {
            let sigma = self.conditional(u, k);
            let p: f64 = sigma.diagonal().iter().map(|z| z.re).sum();
            if p < MIN_OUTCOME_PROBABILITY {
                continue;
            }
            ens.probs.push(p);
            ens.conditionals.push(sigma.unscale(p));
            ens.outcomes.push(k);
        }
        ens
    }

    /// `χ` for the basis formed by the columns of the unitary `u`.
    pub fn holevo(&self, u: &ComplexMatrix) -> f64 {
        let mut cond = 0.0;
        for k in 0..self.dim_a {
            let sigma = self.conditional(u, k);
            let p: f64 = sigma.diagonal().iter().map(|z| z.re).sum();
            if p < MIN_OUTCOME_PROBABILITY {
                continue;
            }
            cond += p * entropy_unchecked(&sigma.unscale(p));
        }
        (self.entropy_b - cond).max(0.0)
    }
}

fn check_basis(rho: &DensityMatrix, basis: &Basis) -> Result<()> {
    if basis.dim() != rho.dim_a() {
        return Err(Error::Dimension(format!(
            "basis has dimension {}, subsystem A has {}",
            basis.dim(),
            rho.dim_a()
        )));
    }
    Ok(())
}

/// `p_k = tr((|e_k⟩⟨e_k| ⊗ I)ρ)`, `ρ_k^b = ⟨e_k|ρ|e_k⟩ / p_k`.
pub fn measure_and_condition(rho: &DensityMatrix, basis: &Basis) -> Result<MeasurementEnsemble> {
    check_basis(rho, basis)?;
    Ok(HolevoEvaluator::new(rho).ensemble(basis.matrix()))
}

/// Holevo quantity of Bob's ensemble after Alice measures in `basis`.
pub fn holevo(rho: &DensityMatrix, basis: &Basis) -> Result<f64> {
    check_basis(rho, basis)?;
    Ok(HolevoEvaluator::new(rho).holevo(basis.matrix()))
}

/// Eigenbasis of `n·σ` (columns: `+1` then `−1` eigenvector).
pub fn bloch_basis(n: [f64; 3]) -> Result<Basis> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Domain("Bloch direction must be non-zero".into()));
    }
    let [x, y, z] = n.map(|v| v / norm);
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = Complex64::from_polar(1.0, phi);
    Basis::new(ComplexMatrix::from_row_slice(2, 2, &[c(ct, 0.0), c(-st, 0.0), e * st, e * ct]))
}

/// Outcome of an optimized quantity.
#[derive(Debug, Clone)]
pub struct OptimizerResult {
    /// Best value found, in bits.
    pub value: f64,
    /// Parameters of the arg-max.
    pub basis_params: Vec<f64>,
    /// The arg-max measurement bases.
    pub bases: Vec<Basis>,
    pub restarts_converged: usize,
    pub per_restart_values: Vec<f64>,
}

impl OptimizerResult {
    fn from_multistart(ms: &MultiStart, bases: Vec<Basis>) -> Self {
        Self {
            value: ms.best().value,
            basis_params: ms.best().x.clone(),
            bases,
            restarts_converged: ms.converged_count(),
            per_restart_values: ms.values(),
        }
    }
}

fn check_dim_a(rho: &DensityMatrix) -> Result<usize> {
    let d = rho.dim_a();
    if d < 2 {
        return Err(Error::Dimension("subsystem A must have dimension at least 2".into()));
    }
    Ok(d)
}

/// Runs the C₁ search and returns the raw multistart record.
fn c1_search(ev: &HolevoEvaluator, cfg: &OptimizerConfig) -> MultiStart {
    let d = ev.dim_a();
    multistart_maximize(unitary_param_count(d), cfg, |theta| ev.holevo(&unitary_from_params(d, theta)))
}

/// Classical correlation `C₁`: the largest Holevo quantity over all bases of A.
/// The arg-max basis is a χ-basis of the state.
pub fn classical_correlation_c1(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    cfg.validate()?;
    let d = check_dim_a(rho)?;
    let ev = HolevoEvaluator::new(rho);
    let ms = c1_search(&ev, cfg);
    let basis = Basis::from_unitary_unchecked(unitary_from_params(d, &ms.best().x));
    Ok(OptimizerResult::from_multistart(&ms, vec![basis]))
}

/// The MUB-pair correlation `𝒞`: the largest `min(χ(Π₁), χ(Π₂))` over
/// mutually unbiased pairs `Π₁ = U·E₀`, `Π₂ = U·D_φ·F₀`.
///
/// `E₀` is the computational basis, `F₀` the Fourier basis and `D_φ` a
/// diagonal phase matrix with `d − 1` free phases. This covers every MU pair
/// (up to outcome relabeling) when all `d×d` complex Hadamard matrices are
/// Fourier-equivalent, i.e. `d ∈ {2, 3, 5}`; elsewhere the value is a lower
/// bound.
pub fn measure_c(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    cfg.validate()?;
    let d = check_dim_a(rho)?;
    let ev = HolevoEvaluator::new(rho);
    let f0 = fourier_matrix(d);
    let nu = unitary_param_count(d);
    let pair = |x: &[f64]| {
        let u = unitary_from_params(d, &x[..nu]);
        let w = &u * phase_diagonal(&x[nu..]) * &f0;
        (u, w)
    };
    let ms = multistart_maximize(nu + d - 1, cfg, |x| {
        let (u, w) = pair(x);
        ev.holevo(&u).min(ev.holevo(&w))
    });
    let (u, w) = pair(&ms.best().x);
    Ok(OptimizerResult::from_multistart(
        &ms,
        vec![Basis::from_unitary_unchecked(u), Basis::from_unitary_unchecked(w)],
    ))
}

/// `𝒞ₘ`: the largest minimum Holevo quantity over `m` pairwise MU bases.
///
/// For `m ≥ 3` the tuple is `U` applied to the first `m` bases of the full
/// prime-dimension set, so `d_a` must be prime. `m = 2` is [`measure_c`].
pub fn measure_cm(rho: &DensityMatrix, m: usize, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    cfg.validate()?;
    let d = check_dim_a(rho)?;
    if m < 2 || m > d + 1 {
        return Err(Error::Domain(format!("m = {m} outside 2..={}", d + 1)));
    }
    if m == 2 {
        return measure_c(rho, cfg);
    }
    if !is_prime(d) {
        return Err(Error::Domain(format!("m >= 3 needs a prime dimension for subsystem A, got {d}")));
    }
    let set: Vec<ComplexMatrix> = wootters_fields_mubs(d)?
        .into_bases()
        .into_iter()
        .take(m)
        .map(|b| b.matrix().clone())
        .collect();
    let ev = HolevoEvaluator::new(rho);
    let ms = multistart_maximize(unitary_param_count(d), cfg, |theta| {
        let u = unitary_from_params(d, theta);
        set.iter().map(|b| ev.holevo(&(&u * b))).fold(f64::INFINITY, f64::min)
    });
    let u = unitary_from_params(d, &ms.best().x);
    let bases = set.iter().map(|b| Basis::from_unitary_unchecked(&u * b)).collect();
    Ok(OptimizerResult::from_multistart(&ms, bases))
}

/// `Q₂`: the largest Holevo quantity over bases MU to a χ-basis, maximized
/// over the χ-bases found.
///
/// Every C₁ restart ending within `chi_basis_slack` of the best is taken as a
/// χ-basis (duplicates describing the same measurement are merged). For each,
/// bases MU to it are searched as `E*·D_φ·F₀`. `per_restart_values` holds the
/// best value per χ-basis candidate.
pub fn measure_q2(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    cfg.validate()?;
    let d = check_dim_a(rho)?;
    let ev = HolevoEvaluator::new(rho);
    let c1 = c1_search(&ev, cfg);
    let threshold = c1.best().value - cfg.chi_basis_slack;

    let mut candidates: Vec<Basis> = Vec::new();
    let mut order: Vec<usize> = (0..c1.restarts.len()).collect();
    order.sort_by(|&a, &b| c1.restarts[b].value.total_cmp(&c1.restarts[a].value).then(a.cmp(&b)));
    for idx in order {
        let r = &c1.restarts[idx];
        if r.value < threshold {
            break;
        }
        let basis = Basis::from_unitary_unchecked(unitary_from_params(d, &r.x));
        if !candidates.iter().any(|b| b.same_measurement(&basis, 1e-6)) {
            candidates.push(basis);
        }
    }

    let f0 = fourier_matrix(d);
    let mut best: Option<(f64, Vec<f64>, Basis, Basis)> = None;
    let mut per_candidate = Vec::with_capacity(candidates.len());
    for (k, chi_basis) in candidates.into_iter().enumerate() {
        let inner_cfg = OptimizerConfig { seed: derive_seed(cfg.seed, 0x5132_0000 + k as u64), ..cfg.clone() };
        let e = chi_basis.matrix().clone();
        let ms = multistart_maximize(d - 1, &inner_cfg, |phi| ev.holevo(&(&e * phase_diagonal(phi) * &f0)));
        let value = ms.best().value;
        per_candidate.push(value);
        if best.as_ref().map_or(true, |b| value > b.0) {
            let mu = Basis::from_unitary_unchecked(&e * phase_diagonal(&ms.best().x) * &f0);
            best = Some((value, ms.best().x.clone(), chi_basis, mu));
        }
    }
    let (value, params, chi_basis, mu) = best.expect("the best C1 restart is always a candidate");
    Ok(OptimizerResult {
        value,
        basis_params: params,
        bases: vec![chi_basis, mu],
        restarts_converged: c1.converged_count(),
        per_restart_values: per_candidate,
    })
}

/// `I(A:B) = S(ρ_a) + S(ρ_b) − S(ρ_ab)`.
pub fn mutual_information(rho: &DensityMatrix) -> f64 {
    entropy_unchecked(&rho.reduced_a()) + entropy_unchecked(&rho.reduced_b()) - rho.entropy()
}

/// Quantum discord with rank-one projective measurements on A: `I − C₁`.
pub fn quantum_discord(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    let c1 = classical_correlation_c1(rho, cfg)?.value;
    let d = mutual_information(rho) - c1;
    if d >= 0.0 {
        Ok(d)
    } else if d >= -DISCORD_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("classical correlation {c1} exceeds mutual information by {}", -d)))
    }
}
