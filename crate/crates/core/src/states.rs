//! Constructors for the bipartite state families, seeded random states and
//! the JSON state file format.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, identity, max_entangled_projector, pauli_x, pauli_y, pauli_z, projector, swap_operator,
    tensor_product, ComplexMatrix, DensityMatrix,
};

/// Correlation coefficients `r_j` of `(I⊗I + Σ r_j σ_j⊗σ_j)/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochTriple {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl BlochTriple {
    const PSD_TOL: f64 = 1e-12;

    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        let t = Self { r1, r2, r3 };
        if let Some(min) = t.bell_weights().into_iter().reduce(f64::min) {
            if !(min >= -Self::PSD_TOL) {
                return Err(Error::InvalidState(format!(
                    "Bloch triple ({r1}, {r2}, {r3}) gives Bell weight {min}"
                )));
            }
        }
        Ok(t)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    /// Weights on `(ψ⁻, φ⁻, φ⁺, ψ⁺)`, i.e. the spectrum of the state.
    pub fn bell_weights(&self) -> [f64; 4] {
        let Self { r1, r2, r3 } = *self;
        [
            (1.0 - r1 - r2 - r3) / 4.0,
            (1.0 - r1 + r2 + r3) / 4.0,
            (1.0 + r1 - r2 + r3) / 4.0,
            (1.0 + r1 + r2 - r3) / 4.0,
        ]
    }

    /// Magnitudes sorted so that `|r̄₁| ≥ |r̄₂| ≥ |r̄₃|`.
    pub fn sorted_magnitudes(&self) -> [f64; 3] {
        let mut m = self.as_array().map(f64::abs);
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }
}

/// Schmidt coefficients `λ_i` of `Σ √λ_i |i⟩|i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector {
    lambdas: Vec<f64>,
}

impl SchmidtVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::Domain("need at least two Schmidt coefficients".into()));
        }
        if lambdas.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::Domain(format!("Schmidt coefficients must be non-negative: {lambdas:?}")));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("Schmidt coefficients sum to {sum}, expected 1")));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Entanglement entropy `−Σ λ log₂ λ`.
    pub fn entropy(&self) -> f64 {
        self.lambdas.iter().map(|&l| -crate::linalg::xlog2x(l)).sum()
    }
}

/// The four Bell states in the convention `|φ^±⟩ = (|00⟩ ± |11⟩)/√2`,
/// `|ψ^±⟩ = (|01⟩ ± |10⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub fn vector(self) -> [Complex64; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (z, p, m) = (c(0.0, 0.0), c(s, 0.0), c(-s, 0.0));
        match self {
            BellState::PhiPlus => [p, z, z, p],
            BellState::PhiMinus => [p, z, z, m],
            BellState::PsiPlus => [z, p, p, z],
            BellState::PsiMinus => [z, p, m, z],
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        projector(&self.vector())
    }

    pub fn state(self) -> DensityMatrix {
        DensityMatrix::from_approx(2, 2, self.projector()).expect("Bell projector is a valid state")
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("local dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// `(I − αP)/(d(d − α))` with `P` the swap operator.
pub fn werner_state(d: usize, alpha: f64) -> Result<DensityMatrix> {
    check_dim(d)?;
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("Werner parameter alpha = {alpha} outside [-1, 1]")));
    }
    let df = d as f64;
    let mat = (identity(d * d) - swap_operator(d).scale(alpha)).unscale(df * (df - alpha));
    DensityMatrix::from_approx(d, d, mat)
}

/// `((1 − β)I + (d²β − 1)P⁺)/(d² − 1)`.
pub fn isotropic_state(d: usize, beta: f64) -> Result<DensityMatrix> {
    check_dim(d)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("isotropic parameter beta = {beta} outside [0, 1]")));
    }
    let d2 = (d * d) as f64;
    let mat = (identity(d * d).scale(1.0 - beta) + max_entangled_projector(d).scale(d2 * beta - 1.0))
        .unscale(d2 - 1.0);
    DensityMatrix::from_approx(d, d, mat)
}

/// `(I₂⊗I₂ + Σ r_j σ_j⊗σ_j)/4`.
pub fn bell_diagonal(r: &BlochTriple) -> Result<DensityMatrix> {
    // re-validate: the fields are public
    let r = BlochTriple::new(r.r1, r.r2, r.r3)?;
    let mut mat = identity(4);
    for (rj, s) in r.as_array().into_iter().zip([pauli_x(), pauli_y(), pauli_z()]) {
        mat += tensor_product(&s, &s).scale(rj);
    }
    DensityMatrix::from_approx(2, 2, mat.scale(0.25))
}

/// `|ψ⟩⟨ψ|` for `|ψ⟩ = Σ √λ_i |i⟩|i⟩`.
pub fn pure_from_schmidt(s: &SchmidtVector) -> Result<DensityMatrix> {
    let d = s.lambdas.len();
    let mut psi = vec![c(0.0, 0.0); d * d];
    for (i, &l) in s.lambdas.iter().enumerate() {
        psi[i * d + i] = c(l.sqrt(), 0.0);
    }
    DensityMatrix::from_approx(d, d, projector(&psi))
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("mixing parameter p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `½|ψ⁺⟩⟨ψ⁺| + (p/2)|φ⁺⟩⟨φ⁺| + ((1−p)/2)|φ⁻⟩⟨φ⁻|`, with Bloch triple `(p, 1−p, 0)`.
pub fn fig3_rho1(p: f64) -> Result<(DensityMatrix, BlochTriple)> {
    check_probability(p)?;
    let mat = BellState::PsiPlus.projector().scale(0.5)
        + BellState::PhiPlus.projector().scale(p / 2.0)
        + BellState::PhiMinus.projector().scale((1.0 - p) / 2.0);
    Ok((DensityMatrix::from_approx(2, 2, mat)?, BlochTriple::new(p, 1.0 - p, 0.0)?))
}

/// `p|ψ⁻⟩⟨ψ⁻| + ((1−p)/2)(|ψ⁺⟩⟨ψ⁺| + |φ⁺⟩⟨φ⁺|)`, with Bloch triple `(1−2p, −p, −p)`.
pub fn fig3_rho2(p: f64) -> Result<(DensityMatrix, BlochTriple)> {
    check_probability(p)?;
    let mat = BellState::PsiMinus.projector().scale(p)
        + (BellState::PsiPlus.projector() + BellState::PhiPlus.projector()).scale((1.0 - p) / 2.0);
    Ok((DensityMatrix::from_approx(2, 2, mat)?, BlochTriple::new(1.0 - 2.0 * p, -p, -p)?))
}

/// `tr(ρ (σ_j ⊗ σ_j))` for a two-qubit state.
pub fn correlation_triple(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::Dimension("correlation triple needs a two-qubit state".into()));
    }
    Ok([pauli_x(), pauli_y(), pauli_z()].map(|s| {
        let m = rho.matrix() * tensor_product(&s, &s);
        crate::linalg::trace(&m).re
    }))
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Reduced state of a Haar-random pure state on `H_a ⊗ H_b ⊗ C^rank`.
///
/// Full rank gives the Hilbert–Schmidt measure; `rank = 1` gives a pure state.
pub fn random_density_matrix(dim_a: usize, dim_b: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let n = dim_a * dim_b;
    if n == 0 {
        return Err(Error::Dimension("subsystem dimensions must be positive".into()));
    }
    if rank == 0 || rank > n {
        return Err(Error::Domain(format!("rank {rank} outside 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(n, rank, &mut rng);
    DensityMatrix::from_approx(dim_a, dim_b, &g * g.adjoint())
}

/// `ρ_a ⊗ ρ_b` with independent full-rank random factors.
pub fn random_product_state(dim_a: usize, dim_b: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ga = ginibre(dim_a, dim_a, &mut rng);
    let gb = ginibre(dim_b, dim_b, &mut rng);
    let (ra, rb) = (&ga * ga.adjoint(), &gb * gb.adjoint());
    let ra = ra.unscale(crate::linalg::trace(&ra).re);
    let rb = rb.unscale(crate::linalg::trace(&rb).re);
    DensityMatrix::product(&ra, &rb)
}

/// On-disk state: row-major `(d_a·d_b)²` matrix of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateJson {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self {
            dim_a: rho.dim_a(),
            dim_b: rho.dim_b(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn into_state(self) -> Result<DensityMatrix> {
        let n = self.dim_a * self.dim_b;
        if self.matrix.len() != n || self.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!(
                "matrix must be {n}x{n} for dims ({}, {})",
                self.dim_a, self.dim_b
            )));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| c(self.matrix[i][j][0], self.matrix[i][j][1]));
        DensityMatrix::new(self.dim_a, self.dim_b, m)
    }
}

pub fn save_state(rho: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&StateJson::from_state(rho))?)?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let json: StateJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    json.into_state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, Subsystem};
    use crate::verify::is_product_state;

    fn assert_valid(rho: &DensityMatrix) {
        let tr = crate::linalg::trace(rho.matrix());
        assert!((tr.re - 1.0).abs() < 1e-12);
        assert!(rho.eigenvalues()[0] >= -1e-12);
    }

    #[test]
    fn werner_examples() {
        let singlet = werner_state(2, 1.0).unwrap();
        assert!(max_abs_diff(singlet.matrix(), &BellState::PsiMinus.projector()) < 1e-15);
        let spec = singlet.eigenvalues();
        for (v, e) in spec.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!(max_abs_diff(werner_state(2, 0.0).unwrap().matrix(), &identity(4).scale(0.25)) < 1e-16);
        for d in [2, 3, 4] {
            for alpha in [-1.0, -0.3, 0.0, 0.7, 1.0] {
                assert_valid(&werner_state(d, alpha).unwrap());
            }
        }
        assert!(matches!(werner_state(2, 1.5), Err(Error::Domain(_))));
        assert!(werner_state(1, 0.0).is_err());
    }

    #[test]
    fn isotropic_examples() {
        let phi = isotropic_state(2, 1.0).unwrap();
        assert!(max_abs_diff(phi.matrix(), &BellState::PhiPlus.projector()) < 1e-15);
        assert!(max_abs_diff(isotropic_state(2, 0.25).unwrap().matrix(), &identity(4).scale(0.25)) < 1e-16);
        let rho = isotropic_state(3, 0.0).unwrap();
        let expect = (identity(9) - max_entangled_projector(3)).unscale(8.0);
        assert!(max_abs_diff(rho.matrix(), &expect) < 1e-16);
        assert_valid(&rho);
        assert!(isotropic_state(2, -0.1).is_err());
        assert!(isotropic_state(2, 2.0).is_err());
    }

    #[test]
    fn maximally_mixed_parameters_agree() {
        for d in [2, 3] {
            let w = werner_state(d, 0.0).unwrap();
            let iso = isotropic_state(d, 1.0 / (d * d) as f64).unwrap();
            let mixed = identity(d * d).unscale((d * d) as f64);
            assert!(max_abs_diff(w.matrix(), &mixed) < 1e-15);
            assert!(max_abs_diff(iso.matrix(), &mixed) < 1e-15);
        }
    }

    #[test]
    fn bell_diagonal_examples() {
        let zero = bell_diagonal(&BlochTriple::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(max_abs_diff(zero.matrix(), &identity(4).scale(0.25)) < 1e-16);
        let phi = bell_diagonal(&BlochTriple::new(1.0, -1.0, 1.0).unwrap()).unwrap();
        assert!(max_abs_diff(phi.matrix(), &BellState::PhiPlus.projector()) < 1e-15);
        assert!(matches!(BlochTriple::new(1.0, 1.0, 1.0), Err(Error::InvalidState(_))));
        let forged = BlochTriple { r1: 1.0, r2: 1.0, r3: 1.0 };
        assert!(bell_diagonal(&forged).is_err());
    }

    #[test]
    fn bell_weights_are_the_spectrum() {
        let t = BlochTriple::new(0.5, -0.3, 0.1).unwrap();
        let mut w = t.bell_weights().to_vec();
        w.sort_by(f64::total_cmp);
        let spec = bell_diagonal(&t).unwrap().eigenvalues();
        for (a, b) in w.iter().zip(&spec) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(t.sorted_magnitudes(), [0.5, 0.3, 0.1]);
    }

    #[test]
    fn schmidt_examples() {
        let prod = pure_from_schmidt(&SchmidtVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
        let mut e00 = ComplexMatrix::zeros(4, 4);
        e00[(0, 0)] = c(1.0, 0.0);
        assert!(max_abs_diff(prod.matrix(), &e00) < 1e-16);

        let bell = pure_from_schmidt(&SchmidtVector::new(vec![0.5, 0.5]).unwrap()).unwrap();
        assert!(max_abs_diff(bell.matrix(), &BellState::PhiPlus.projector()) < 1e-15);

        let s = SchmidtVector::new(vec![0.7, 0.3]).unwrap();
        let rho = pure_from_schmidt(&s).unwrap();
        let sb = crate::linalg::von_neumann_entropy(&rho.partial_trace(Subsystem::A)).unwrap();
        // h(0.3)
        assert!((sb - 0.881_290_899_230_692_7).abs() < 1e-12);
        assert!((s.entropy() - sb).abs() < 1e-12);
        assert!(SchmidtVector::new(vec![0.6, 0.6]).is_err());
        assert!(SchmidtVector::new(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn fig3_families() {
        let (_, t) = fig3_rho1(1.0).unwrap();
        assert_eq!(t.as_array(), [1.0, 0.0, 0.0]);
        let (_, t) = fig3_rho1(0.5).unwrap();
        assert_eq!(t.as_array(), [0.5, 0.5, 0.0]);
        let (rho, t) = fig3_rho2(1.0).unwrap();
        assert_eq!(t.as_array(), [-1.0, -1.0, -1.0]);
        assert!(max_abs_diff(rho.matrix(), &BellState::PsiMinus.projector()) < 1e-15);
        assert!(fig3_rho1(1.5).is_err());
        assert!(fig3_rho2(-0.5).is_err());

        for k in 0..=100 {
            let p = k as f64 / 100.0;
            for (rho, t) in [fig3_rho1(p).unwrap(), fig3_rho2(p).unwrap()] {
                assert_valid(&rho);
                let direct = bell_diagonal(&t).unwrap();
                assert!(max_abs_diff(rho.matrix(), direct.matrix()) < 1e-14);
            }
        }
    }

    #[test]
    fn random_states() {
        let a = random_density_matrix(2, 3, 6, 42).unwrap();
        let b = random_density_matrix(2, 3, 6, 42).unwrap();
        assert_eq!(a, b);
        assert_valid(&a);
        let pure = random_density_matrix(3, 3, 1, 7).unwrap();
        assert!(pure.entropy() < 1e-10);
        let low = random_density_matrix(3, 3, 2, 7).unwrap();
        assert!(low.eigenvalues()[..7].iter().all(|l| l.abs() < 1e-12));
        assert!(random_density_matrix(2, 2, 0, 1).is_err());
        assert!(random_density_matrix(2, 2, 5, 1).is_err());
    }

    #[test]
    fn random_states_are_not_products() {
        for seed in 0..1000 {
            let rho = random_density_matrix(2, 2, 4, seed).unwrap();
            assert!(!is_product_state(&rho, 1e-6), "seed {seed}");
        }
    }

    #[test]
    fn random_products_are_products() {
        for seed in 0..20 {
            assert!(is_product_state(&random_product_state(2, 3, seed).unwrap(), 1e-10));
        }
    }

    #[test]
    fn correlation_triple_round_trips() {
        for t in [(0.5, 0.3, 0.1), (-0.2, 0.5, -0.3), (1.0, -1.0, 1.0)] {
            let triple = BlochTriple::new(t.0, t.1, t.2).unwrap();
            let r = correlation_triple(&bell_diagonal(&triple).unwrap()).unwrap();
            for (a, b) in r.iter().zip(triple.as_array()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bell.json");
        let bell = BellState::PhiPlus.state();
        save_state(&bell, &path).unwrap();
        let back = load_state(&path).unwrap();
        assert!(max_abs_diff(back.matrix(), bell.matrix()) <= 1e-15);

        let rho = random_density_matrix(2, 3, 4, 3).unwrap();
        save_state(&rho, &path).unwrap();
        assert!(max_abs_diff(load_state(&path).unwrap().matrix(), rho.matrix()) <= 1e-15);

        let mut json = StateJson::from_state(&werner_state(2, 0.0).unwrap());
        for i in 0..4 {
            json.matrix[i][i][0] = 0.225;
        }
        std::fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();
        assert!(matches!(load_state(&path), Err(Error::InvalidState(_))));

        let mut json = StateJson::from_state(&werner_state(2, 0.0).unwrap());
        json.matrix[1][2] = [0.1, 0.0];
        std::fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();
        match load_state(&path) {
            Err(e @ Error::NotHermitian { row: 1, col: 2, .. }) => assert!(e.to_string().contains("(1, 2)")),
            other => panic!("unexpected {other:?}"),
        }

        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_state(&path), Err(Error::Json(_))));
    }
}
