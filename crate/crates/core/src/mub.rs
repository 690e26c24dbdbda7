//! Orthonormal measurement bases and sets of mutually unbiased bases (MUBs).

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, check_unitary, unitarity_defect, ComplexMatrix};

/// Tolerance used when validating freshly constructed bases and sets.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

/// Largest prime dimension for which a full MUB set is built.
pub const MAX_PRIME_DIM: usize = 13;

/// An ordered orthonormal basis; column `k` of the unitary is `|e_k⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    columns: ComplexMatrix,
}

impl Basis {
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        if columns.nrows() < 2 || columns.nrows() != columns.ncols() {
            return Err(Error::Dimension(format!(
                "a basis needs a square matrix of size >= 2, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        check_unitary(&columns, CONSTRUCTION_TOL)?;
        Ok(Self { columns })
    }

    /// For matrices that are unitary by construction (e.g. `exp(iH)`).
    pub(crate) fn from_unitary_unchecked(columns: ComplexMatrix) -> Self {
        debug_assert!(unitarity_defect(&columns) < 1e-9);
        Self { columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.columns
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.columns.column(k).iter().copied().collect()
    }

    /// The basis `{U|e_k⟩}`.
    pub fn rotated(&self, u: &ComplexMatrix) -> Self {
        Self { columns: u * &self.columns }
    }

    /// Same rank-one projectors, up to ordering and column phases.
    pub fn same_measurement(&self, other: &Basis, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let overlap = self.columns.adjoint() * &other.columns;
        (0..self.dim()).all(|i| (0..self.dim()).any(|j| overlap[(i, j)].norm() > 1.0 - tol))
    }
}

pub fn computational_basis(d: usize) -> Result<Basis> {
    check_dim(d)?;
    Basis::new(ComplexMatrix::identity(d, d))
}

/// Column `k` has entries `ω^{jk}/√d`, `ω = e^{2πi/d}`.
pub fn fourier_basis(d: usize) -> Result<Basis> {
    check_dim(d)?;
    Basis::new(fourier_matrix(d))
}

pub(crate) fn fourier_matrix(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| Complex64::from_polar(norm, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("basis dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// True iff every overlap `|⟨ψ_i|φ_j⟩|` is within `tol` of `1/√d`.
pub fn is_mutually_unbiased(b1: &Basis, b2: &Basis, tol: f64) -> Result<bool> {
    Ok(mu_defect(b1, b2)? <= tol)
}

/// `max_{ij} | |⟨ψ_i|φ_j⟩| − 1/√d |`.
pub fn mu_defect(b1: &Basis, b2: &Basis) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(Error::Dimension(format!("bases of dimension {} and {}", b1.dim(), b2.dim())));
    }
    let target = 1.0 / (b1.dim() as f64).sqrt();
    let overlap = b1.matrix().adjoint() * b2.matrix();
    Ok(overlap.iter().map(|z| (z.norm() - target).abs()).fold(0.0, f64::max))
}

/// A list of pairwise mutually unbiased bases of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MubSet {
    dim: usize,
    bases: Vec<Basis>,
}

impl MubSet {
    /// Validates pairwise unbiasedness at [`CONSTRUCTION_TOL`].
    pub fn new(bases: Vec<Basis>) -> Result<Self> {
        Self::with_tolerance(bases, CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(bases: Vec<Basis>, tol: f64) -> Result<Self> {
        let dim = bases
            .first()
            .map(Basis::dim)
            .ok_or_else(|| Error::Domain("a MUB set needs at least one basis".into()))?;
        for (k, bk) in bases.iter().enumerate() {
            for (l, bl) in bases.iter().enumerate().skip(k + 1) {
                let defect = mu_defect(bk, bl)?;
                if defect > tol {
                    return Err(Error::Numerical(format!(
                        "bases {k} and {l} are not mutually unbiased (overlap defect {defect:e})"
                    )));
                }
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn into_bases(self) -> Vec<Basis> {
        self.bases
    }

    /// Largest overlap defect over all pairs.
    pub fn max_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, bk) in self.bases.iter().enumerate() {
            for bl in &self.bases[k + 1..] {
                worst = worst.max(mu_defect(bk, bl).expect("equal dimensions"));
            }
        }
        worst
    }

    pub fn to_json(&self) -> MubSetJson {
        MubSetJson {
            dim: self.dim,
            bases: self
                .bases
                .iter()
                .map(|b| {
                    (0..b.dim())
                        .map(|k| b.matrix().column(k).iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(json: &MubSetJson) -> Result<Self> {
        let d = json.dim;
        let mut bases = Vec::with_capacity(json.bases.len());
        for (b, cols) in json.bases.iter().enumerate() {
            if cols.len() != d || cols.iter().any(|col| col.len() != d) {
                return Err(Error::Dimension(format!("basis {b} is not {d}x{d}")));
            }
            let m = ComplexMatrix::from_fn(d, d, |i, k| c(cols[k][i][0], cols[k][i][1]));
            bases.push(Basis::new(m)?);
        }
        Self::with_tolerance(bases, 1e-8)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let json: MubSetJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_json(&json)
    }
}

/// On-disk form: `bases[b][k][i] = [re, im]` is entry `i` of column `k`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MubSetJson {
    pub dim: usize,
    pub bases: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// Full set of `d + 1` MUBs for prime `d`.
///
/// Order: computational, Fourier, then the quadratic-phase bases
/// `(1/√d) Σ_j ω^{r j² + k j}|j⟩` for `r = 1..d−1`. For `d = 2` this is
/// the Z, X and Y eigenbases.
pub fn wootters_fields_mubs(d: usize) -> Result<MubSet> {
    if !is_prime(d) || d > MAX_PRIME_DIM {
        return Err(Error::Domain(format!(
            "full MUB sets are built for prime dimensions 2..={MAX_PRIME_DIM}; {d} is not supported"
        )));
    }
    let mut bases = vec![computational_basis(d)?];
    if d == 2 {
        bases.push(fourier_basis(2)?);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        bases.push(Basis::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)],
        ))?);
    } else {
        let norm = 1.0 / (d as f64).sqrt();
        for r in 0..d {
            let m = ComplexMatrix::from_fn(d, d, |j, k| {
                let exponent = (r * j * j + k * j) % d;
                Complex64::from_polar(norm, 2.0 * PI * exponent as f64 / d as f64)
            });
            bases.push(Basis::new(m)?);
        }
    }
    MubSet::new(bases)
}

/// Applies `U` to every basis of the set.
pub fn rotate_mub_set(u: &ComplexMatrix, set: &MubSet) -> Result<MubSet> {
    if u.nrows() != set.dim() || u.ncols() != set.dim() {
        return Err(Error::Dimension(format!("rotation is {}x{}, set has dimension {}", u.nrows(), u.ncols(), set.dim())));
    }
    check_unitary(u, 1e-8)?;
    Ok(MubSet {
        dim: set.dim,
        bases: set.bases.iter().map(|b| b.rotated(u)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn computational_and_fourier() {
        let e = computational_basis(2).unwrap();
        assert_eq!(e.vector(0), vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(e.vector(1), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(computational_basis(3).unwrap().matrix(), &ComplexMatrix::identity(3, 3));

        let h = fourier_basis(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        assert!(max_abs_diff(h.matrix(), &hadamard) < 1e-15);

        let f3 = fourier_basis(3).unwrap();
        assert!(f3.matrix().iter().all(|z| (z.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-15));
        assert!(computational_basis(1).is_err());
        assert!(fourier_basis(0).is_err());
    }

    #[test]
    fn unbiasedness_checks() {
        for d in [2, 3, 4, 6] {
            let e = computational_basis(d).unwrap();
            let f = fourier_basis(d).unwrap();
            assert!(is_mutually_unbiased(&e, &f, 1e-10).unwrap());
            assert!(!is_mutually_unbiased(&e, &e, 1e-10).unwrap());
        }
        assert!(is_mutually_unbiased(&computational_basis(2).unwrap(), &computational_basis(3).unwrap(), 1e-10).is_err());
    }

    #[test]
    fn common_rotation_preserves_unbiasedness() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = haar_unitary(3, &mut rng);
        let e = computational_basis(3).unwrap().rotated(&u);
        let f = fourier_basis(3).unwrap().rotated(&u);
        assert!(is_mutually_unbiased(&e, &f, 1e-10).unwrap());
    }

    #[test]
    fn full_sets_for_primes() {
        for d in [2, 3, 5, 7, 11, 13] {
            let set = wootters_fields_mubs(d).unwrap();
            assert_eq!(set.len(), d + 1);
            assert!(set.max_defect() < 1e-10, "d={d}");
        }
        let qubit = wootters_fields_mubs(2).unwrap();
        assert_eq!(qubit.bases()[0], computational_basis(2).unwrap());
        assert_eq!(qubit.bases()[1], fourier_basis(2).unwrap());
        // Y eigenbasis: ⟨σ_y⟩ = ±1 on its columns
        let y = crate::linalg::pauli_y();
        let b = qubit.bases()[2].matrix();
        let expect = b.adjoint() * &y * b;
        assert!((expect[(0, 0)].re - 1.0).abs() < 1e-14 && (expect[(1, 1)].re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_set_rejects_composites() {
        for d in [1, 4, 6, 9, 17] {
            assert!(matches!(wootters_fields_mubs(d), Err(Error::Domain(_))), "d={d}");
        }
    }

    #[test]
    fn rotations() {
        let set = wootters_fields_mubs(2).unwrap();
        assert_eq!(rotate_mub_set(&ComplexMatrix::identity(2, 2), &set).unwrap(), set);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(2, &mut rng);
        assert!(rotate_mub_set(&u, &set).unwrap().max_defect() < 1e-10);

        let pair = MubSet::new(vec![computational_basis(4).unwrap(), fourier_basis(4).unwrap()]).unwrap();
        let phases = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| {
            Complex64::from_polar(1.0, rng.gen_range(-PI..PI) * i as f64)
        }));
        assert!(rotate_mub_set(&phases, &pair).unwrap().max_defect() < 1e-10);

        let not_unitary = ComplexMatrix::identity(2, 2).scale(1.1);
        assert!(matches!(rotate_mub_set(&not_unitary, &set), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn per_column_phases_keep_unbiasedness() {
        let f = fourier_basis(5).unwrap();
        let mut m = f.matrix().clone();
        for k in 0..5 {
            let ph = Complex64::from_polar(1.0, 0.3 * k as f64 + 0.1);
            for i in 0..5 {
                m[(i, k)] *= ph;
            }
        }
        let g = Basis::new(m).unwrap();
        assert!(is_mutually_unbiased(&computational_basis(5).unwrap(), &g, 1e-10).unwrap());
        assert!(f.same_measurement(&g, 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let set = wootters_fields_mubs(3).unwrap();
        let text = serde_json::to_string(&set.to_json()).unwrap();
        let back = MubSet::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, set);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["dim"], 3);
        assert_eq!(value["bases"].as_array().unwrap().len(), 4);
    }
}
