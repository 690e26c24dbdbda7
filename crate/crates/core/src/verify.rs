//! Constructive check that every non-product state has correlation in two
//! mutually unbiased bases at once.
//!
//! For a non-product state the search takes a χ-basis `E` (positive Holevo
//! quantity) and the MU basis `F = E·F₀`. If `χ(F)` already clears the
//! threshold the pair is the witness. Otherwise Bob's blocks of `ρ` in the `F`
//! basis are diagonal-proportional to `ρ_b`, some off-diagonal block `(k, l)`
//! is non-zero, and a small real rotation `[[√(1−ε²), ε], [−ε, √(1−ε²)]]` on
//! `span{f_k, f_l}` applied to both bases makes both quantities positive.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, tensor_product, ComplexMatrix, DensityMatrix};
use crate::measures::{classical_correlation_c1, HolevoEvaluator, OptimizerConfig};
use crate::mub::{fourier_matrix, is_mutually_unbiased, Basis};
use crate::optimize::derive_seed;
use crate::states::{random_density_matrix, random_product_state};

/// Holevo quantities at or below this many bits count as zero.
pub const NONZERO_CHI: f64 = 1e-9;

pub const DEFAULT_EPS_SCHEDULE: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

/// `‖ρ − ρ_a ⊗ ρ_b‖_F ≤ tol`.
pub fn is_product_state(rho: &DensityMatrix, tol: f64) -> bool {
    product_distance(rho) <= tol
}

/// Frobenius distance from `ρ` to the product of its marginals.
pub fn product_distance(rho: &DensityMatrix) -> f64 {
    let prod = tensor_product(&rho.reduced_a(), &rho.reduced_b());
    (rho.matrix() - prod).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessPath {
    /// The χ-basis and its Fourier partner already work.
    Direct,
    /// Needed the rotation on `span{f_k, f_l}`.
    EpsilonRotation,
}

/// A mutually unbiased pair with both Holevo quantities positive.
#[derive(Debug, Clone)]
pub struct Witness {
    pub basis_1: Basis,
    pub basis_2: Basis,
    pub chi_1: f64,
    pub chi_2: f64,
    /// Zero on the direct path.
    pub epsilon_used: f64,
    pub path: WitnessPath,
}

/// Coordinates of the search that the ε-rotation acts on.
#[derive(Debug, Clone)]
pub struct RotationPlan {
    pub chi_basis: ComplexMatrix,
    pub partner: ComplexMatrix,
    /// Indices `(k, l)` of the largest off-diagonal Bob block in the partner basis.
    pub block: (usize, usize),
    pub block_norm: f64,
}

/// `(ε, χ of rotated E, χ of rotated F)` along a schedule.
pub type EpsilonTrace = Vec<(f64, f64, f64)>;

/// Frobenius norms of the Bob blocks `⟨f_k|ρ|f_l⟩_A` for `k < l`, largest first
/// (ties broken by index).
fn largest_off_diagonal_block(ev: &HolevoEvaluator, rho: &DensityMatrix, f: &ComplexMatrix) -> ((usize, usize), f64) {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let _ = ev;
    let m = rho.matrix();
    let mut best = ((0, 1), -1.0);
    for k in 0..da {
        for l in k + 1..da {
            let mut block = ComplexMatrix::zeros(db, db);
            for i in 0..da {
                for j in 0..da {
                    let w = f[(i, k)].conj() * f[(j, l)];
                    block += m.view((i * db, j * db), (db, db)) * w;
                }
            }
            let norm = block.norm();
            if norm > best.1 {
                best = ((k, l), norm);
            }
        }
    }
    best
}

/// `U₂(ε) ⊕ I` in the coordinates of the partner basis; `phase` multiplies
/// the off-diagonal entries.
fn embedded_rotation(d: usize, (k, l): (usize, usize), eps: f64, phase: Complex64) -> ComplexMatrix {
    let mut g = ComplexMatrix::identity(d, d);
    let cth = c((1.0 - eps * eps).sqrt(), 0.0);
    g[(k, k)] = cth;
    g[(l, l)] = cth;
    g[(k, l)] = phase * eps;
    g[(l, k)] = -phase.conj() * eps;
    g
}

fn rotated_pair(plan: &RotationPlan, eps: f64, phase: Complex64) -> (ComplexMatrix, ComplexMatrix) {
    let d = plan.partner.nrows();
    let g = embedded_rotation(d, plan.block, eps, phase);
    // R = F G F† acts on both bases: R·F = F·G
    let r = &plan.partner * &g * plan.partner.adjoint();
    (&r * &plan.chi_basis, &plan.partner * g)
}

/// Holevo quantities of the rotated pair for each ε (real rotation).
pub fn epsilon_trace(rho: &DensityMatrix, plan: &RotationPlan, schedule: &[f64]) -> EpsilonTrace {
    let ev = HolevoEvaluator::new(rho);
    schedule
        .iter()
        .map(|&eps| {
            let (e, f) = rotated_pair(plan, eps, c(1.0, 0.0));
            (eps, ev.holevo(&e), ev.holevo(&f))
        })
        .collect()
}

/// The χ-basis, its Fourier partner and the block the rotation would use.
pub fn rotation_plan(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<RotationPlan> {
    let c1 = classical_correlation_c1(rho, cfg)?;
    let chi_basis = c1.bases[0].matrix().clone();
    let partner = &chi_basis * fourier_matrix(rho.dim_a());
    let ev = HolevoEvaluator::new(rho);
    let (block, block_norm) = largest_off_diagonal_block(&ev, rho, &partner);
    Ok(RotationPlan { chi_basis, partner, block, block_norm })
}

/// Finds a MU pair with both Holevo quantities above [`NONZERO_CHI`].
///
/// The real rotation is tried over the whole schedule first; if an
/// off-diagonal block is anti-Hermitian the real rotation cannot separate the
/// conditionals, so the schedule is retried with an `i` phase on the
/// off-diagonal entries.
pub fn find_witness_mub_pair(rho: &DensityMatrix, cfg: &OptimizerConfig, eps_schedule: &[f64]) -> Result<Witness> {
    if rho.dim_a() < 2 {
        return Err(Error::Dimension("subsystem A must have dimension at least 2".into()));
    }
    if is_product_state(rho, 1e-10) {
        return Err(Error::Domain("state is a product state; no witness exists".into()));
    }
    let plan = rotation_plan(rho, cfg)?;
    let ev = HolevoEvaluator::new(rho);
    let chi_1 = ev.holevo(&plan.chi_basis);
    let chi_2 = ev.holevo(&plan.partner);
    if chi_1 > NONZERO_CHI && chi_2 > NONZERO_CHI {
        return Ok(Witness {
            basis_1: Basis::from_unitary_unchecked(plan.chi_basis),
            basis_2: Basis::from_unitary_unchecked(plan.partner),
            chi_1,
            chi_2,
            epsilon_used: 0.0,
            path: WitnessPath::Direct,
        });
    }
    let mut tried = Vec::new();
    for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
        for &eps in eps_schedule {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Domain(format!("epsilon {eps} outside (0, 1)")));
            }
            let (e, f) = rotated_pair(&plan, eps, phase);
            let (x1, x2) = (ev.holevo(&e), ev.holevo(&f));
            if x1 > NONZERO_CHI && x2 > NONZERO_CHI {
                return Ok(Witness {
                    basis_1: Basis::from_unitary_unchecked(e),
                    basis_2: Basis::from_unitary_unchecked(f),
                    chi_1: x1,
                    chi_2: x2,
                    epsilon_used: eps,
                    path: WitnessPath::EpsilonRotation,
                });
            }
            tried.push(format!("eps={eps}: chi=({x1:e}, {x2:e})"));
        }
    }
    Err(Error::Numerical(format!(
        "no witness: direct chi=({chi_1:e}, {chi_2:e}); block {:?} norm {:e}; {}",
        plan.block,
        plan.block_norm,
        tried.join("; ")
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationFailure {
    pub seed: u64,
    pub diagnostics: String,
}

/// Aggregate of a nullity-theorem run.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub products_detected: usize,
    pub witnesses_found: usize,
    pub failures: Vec<VerificationFailure>,
    /// Smallest of `min(chi_1, chi_2)` over all witnesses (`null` when none).
    pub min_chi_over_witnesses: Option<f64>,
    pub direct_witnesses: usize,
    pub rotation_witnesses: usize,
}

impl VerificationReport {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Kinds of states in a verification corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Product,
    Random { rank: usize },
}

enum Outcome {
    Product,
    Witness(Witness),
    Failure(String),
}

fn check_sample(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Outcome {
    if is_product_state(rho, 1e-10) {
        return Outcome::Product;
    }
    match find_witness_mub_pair(rho, cfg, &DEFAULT_EPS_SCHEDULE) {
        Ok(w) => match is_mutually_unbiased(&w.basis_1, &w.basis_2, 1e-8) {
            Ok(true) => Outcome::Witness(w),
            _ => Outcome::Failure("witness bases are not mutually unbiased".into()),
        },
        Err(e) => Outcome::Failure(e.to_string()),
    }
}

/// Runs the witness search over explicit `(seed, state)` pairs.
pub fn verify_states(states: &[(u64, DensityMatrix)], cfg: &OptimizerConfig) -> VerificationReport {
    let outcomes: Vec<Outcome> = states.par_iter().map(|(_, rho)| check_sample(rho, cfg)).collect();
    let mut report = VerificationReport {
        samples: states.len(),
        products_detected: 0,
        witnesses_found: 0,
        failures: Vec::new(),
        min_chi_over_witnesses: None,
        direct_witnesses: 0,
        rotation_witnesses: 0,
    };
    for ((seed, _), outcome) in states.iter().zip(outcomes) {
        match outcome {
            Outcome::Product => report.products_detected += 1,
            Outcome::Witness(w) => {
                report.witnesses_found += 1;
                match w.path {
                    WitnessPath::Direct => report.direct_witnesses += 1,
                    WitnessPath::EpsilonRotation => report.rotation_witnesses += 1,
                }
                let m = w.chi_1.min(w.chi_2);
                report.min_chi_over_witnesses = Some(report.min_chi_over_witnesses.map_or(m, |x| x.min(m)));
            }
            Outcome::Failure(diagnostics) => report.failures.push(VerificationFailure { seed: *seed, diagnostics }),
        }
    }
    report
}

/// Kind of sample `index` in a [`verify_nullity_theorem`] run: every tenth
/// sample is an explicit product state; the rest cycle through full rank,
/// rank 1 and rank 2.
pub fn sample_kind(index: usize, dim: usize) -> SampleKind {
    if index % 10 == 9 {
        return SampleKind::Product;
    }
    match index % 3 {
        0 => SampleKind::Random { rank: dim },
        1 => SampleKind::Random { rank: 1 },
        _ => SampleKind::Random { rank: 2.min(dim) },
    }
}

/// Draws `samples` seeded states and checks each for a witness.
pub fn verify_nullity_theorem(
    samples: usize,
    dim_a: usize,
    dim_b: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if dim_a < 2 || dim_b < 1 {
        return Err(Error::Dimension(format!("dims ({dim_a}, {dim_b}) unsupported")));
    }
    cfg.validate()?;
    let states = (0..samples)
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let rho = match sample_kind(i, dim_a * dim_b) {
                SampleKind::Product => random_product_state(dim_a, dim_b, s)?,
                SampleKind::Random { rank } => random_density_matrix(dim_a, dim_b, rank, s)?,
            };
            Ok((s, rho))
        })
        .collect::<Result<Vec<_>>>()?;
    let per_sample_cfg = cfg.clone();
    Ok(verify_states(&states, &per_sample_cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use crate::measures::holevo;
    use crate::states::{bell_diagonal, werner_state, BellState, BlochTriple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_detection() {
        assert!(is_product_state(&random_product_state(2, 2, 1).unwrap(), 1e-10));
        assert!(!is_product_state(&BellState::PhiPlus.state(), 1e-10));
        assert!(is_product_state(&werner_state(2, 0.0).unwrap(), 1e-10));
    }

    #[test]
    fn bell_state_witness_is_direct() {
        let w = find_witness_mub_pair(&BellState::PhiPlus.state(), &OptimizerConfig::default(), &DEFAULT_EPS_SCHEDULE)
            .unwrap();
        assert_eq!(w.path, WitnessPath::Direct);
        assert!((w.chi_1 - 1.0).abs() < 1e-9 && (w.chi_2 - 1.0).abs() < 1e-9);
        assert!(is_mutually_unbiased(&w.basis_1, &w.basis_2, 1e-8).unwrap());
    }

    #[test]
    fn classical_state_needs_rotation() {
        let rho = bell_diagonal(&BlochTriple::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let w = find_witness_mub_pair(&rho, &OptimizerConfig::default(), &DEFAULT_EPS_SCHEDULE).unwrap();
        assert_eq!(w.path, WitnessPath::EpsilonRotation);
        assert_eq!(w.epsilon_used, 0.2);
        assert!(w.chi_1 < 0.188_721_875_540_867_17 && w.chi_1 > 0.15, "{}", w.chi_1);
        assert!(w.chi_2 > NONZERO_CHI);
        assert!(is_mutually_unbiased(&w.basis_1, &w.basis_2, 1e-8).unwrap());
    }

    #[test]
    fn random_full_rank_state_seed_7() {
        let rho = random_density_matrix(2, 2, 4, 7).unwrap();
        let w = find_witness_mub_pair(&rho, &OptimizerConfig::default(), &DEFAULT_EPS_SCHEDULE).unwrap();
        assert!(w.chi_1 > 1e-6 && w.chi_2 > 1e-6);
    }

    #[test]
    fn product_states_are_rejected() {
        let rho = random_product_state(2, 2, 3).unwrap();
        assert!(matches!(
            find_witness_mub_pair(&rho, &OptimizerConfig::default(), &DEFAULT_EPS_SCHEDULE),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn products_have_no_holevo_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..5 {
            let rho = random_product_state(3, 2, seed).unwrap();
            for _ in 0..20 {
                let b = Basis::new(haar_unitary(3, &mut rng)).unwrap();
                assert!(holevo(&rho, &b).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn epsilon_trace_converges_to_chi_basis_value() {
        let rho = bell_diagonal(&BlochTriple::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let plan = rotation_plan(&rho, &OptimizerConfig::default()).unwrap();
        let base = HolevoEvaluator::new(&rho).holevo(&plan.chi_basis);
        let trace = epsilon_trace(&rho, &plan, &DEFAULT_EPS_SCHEDULE);
        let gaps: Vec<f64> = trace.iter().map(|(_, x1, _)| (base - x1).abs()).collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "{gaps:?}");
        }
        assert!(gaps.last().unwrap() < &1e-3);
    }

    #[test]
    fn explicit_product_corpus() {
        let states: Vec<(u64, DensityMatrix)> =
            (0..100).map(|s| (s, random_product_state(2, 2, s).unwrap())).collect();
        let report = verify_states(&states, &OptimizerConfig::default());
        assert_eq!(report.products_detected, 100);
        assert_eq!(report.witnesses_found, 0);
        assert!(report.is_success());
        assert_eq!(report.min_chi_over_witnesses, None);
    }

    #[test]
    fn zero_samples_is_an_error() {
        assert!(verify_nullity_theorem(0, 2, 2, 1, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn report_accounting_and_json() {
        let report = verify_nullity_theorem(20, 2, 2, 3, &OptimizerConfig::default().with_restarts(6)).unwrap();
        assert_eq!(report.samples, report.products_detected + report.witnesses_found + report.failures.len());
        assert_eq!(report.products_detected, 2);
        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(json["samples"], 20);
        assert!(json["failures"].as_array().unwrap().is_empty());
    }
}
