//! Dense complex matrix primitives: Kronecker products, partial traces,
//! Hermitian spectra and entropies (in bits).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Tolerance for the Hermitian precondition of the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_EIGEN_LIMIT, 0)` are treated as rounding noise.
pub const NEGATIVE_EIGEN_LIMIT: f64 = 1e-8;

const TRACE_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which tensor factor of `H_a ⊗ H_b` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)])
}

/// The swap operator `P = Σ |i⟩⟨j| ⊗ |j⟩⟨i|` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            p[(i * d + j, j * d + i)] = ONE;
        }
    }
    p
}

/// Projector onto `|Φ⁺⟩ = Σ_i |ii⟩ / √d`.
pub fn max_entangled_projector(d: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(d * d, d * d);
    let w = c(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            p[(i * d + i, j * d + j)] = w;
        }
    }
    p
}

/// Outer product `|v⟩⟨v|`.
pub fn projector(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// Kronecker product; `(A⊗B)[(i·rB+k),(j·cB+l)] = A[i,j]·B[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Partial trace of a `(dim_a·dim_b)²` matrix, removing `traced`.
pub fn partial_trace(
    mat: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if mat.nrows() != n || mat.ncols() != n || n == 0 {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, expected {n}x{n} for dims ({dim_a}, {dim_b})",
            mat.nrows(),
            mat.ncols()
        )));
    }
    Ok(match traced {
        Subsystem::B => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| mat[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a).map(|i| mat[(i * dim_b + k, i * dim_b + l)]).sum()
        }),
    })
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Largest `|a_ij - conj(a_ji)|` together with its position.
pub fn hermitian_deviation(a: &ComplexMatrix) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            let dev = (a[(i, j)] - a[(j, i)].conj()).norm();
            if dev > worst.0 {
                worst = (dev, i, j);
            }
        }
    }
    worst
}

pub fn check_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let (dev, row, col) = hermitian_deviation(a);
    if dev > tol {
        return Err(Error::NotHermitian { row, col, deviation: dev });
    }
    Ok(())
}

/// `max |U†U − I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &ComplexMatrix, tol: f64) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect > tol {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvals_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a, HERMITIAN_TOL)?;
    Ok(eigvals_hermitian_unchecked(a))
}

/// Same as [`eigvals_hermitian`] without the Hermitian check; only the
/// upper triangle of `a` is trusted in the 2x2 path.
pub(crate) fn eigvals_hermitian_unchecked(a: &ComplexMatrix) -> Vec<f64> {
    match a.nrows() {
        1 => vec![a[(0, 0)].re],
        2 => {
            let (p, q) = (a[(0, 0)].re, a[(1, 1)].re);
            let mean = 0.5 * (p + q);
            let half_gap = (0.25 * (p - q) * (p - q) + a[(0, 1)].norm_sqr()).sqrt();
            vec![mean - half_gap, mean + half_gap]
        }
        _ => {
            let mut vals: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
            vals.sort_by(f64::total_cmp);
            vals
        }
    }
}

/// Full eigendecomposition `A = V diag(λ) V†`, eigenvalues ascending and
/// eigenvectors in the matching columns of `V`.
pub fn eigh(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(a, HERMITIAN_TOL)?;
    Ok(eigh_unchecked(a))
}

pub(crate) fn eigh_unchecked(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_fn(a.nrows(), a.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// `x·log₂x` with the convention `0·log₂0 = 0`.
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy in bits of a spectrum, clamping rounding negatives.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lambda in eigenvalues {
        if lambda < -NEGATIVE_EIGEN_LIMIT {
            return Err(Error::InvalidState(format!("negative eigenvalue {lambda:e}")));
        }
        s -= xlog2x(lambda);
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy `−tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    entropy_of_spectrum(&eigvals_hermitian(rho)?)
}

/// Entropy of a matrix known to be Hermitian with unit trace.
pub(crate) fn entropy_unchecked(rho: &ComplexMatrix) -> f64 {
    eigvals_hermitian_unchecked(rho)
        .into_iter()
        .map(|l| -xlog2x(l))
        .sum::<f64>()
        .max(0.0)
}

/// Binary entropy `h(x) = −x log₂x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let x = x.clamp(0.0, 1.0);
    Ok(-xlog2x(x) - xlog2x(1.0 - x))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { ONE };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// A bipartite density matrix on `H_a ⊗ H_b`; composite index `i_a·d_b + i_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-8;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Dimension("subsystem dimensions must be positive".into()));
        }
        let n = dim_a * dim_b;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected {n}x{n} for dims ({dim_a}, {dim_b})",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        check_hermitian(&mat, Self::HERMITIAN_TOL)?;
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {:.15}, expected 1", tr.re)));
        }
        let min = eigvals_hermitian_unchecked(&mat)[0];
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!("not positive semidefinite: eigenvalue {min:e}")));
        }
        Ok(Self { dim_a, dim_b, mat })
    }

    /// Symmetrizes and renormalizes before validation; for matrices built
    /// by floating-point arithmetic that are valid up to rounding.
    pub fn from_approx(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Result<Self> {
        let herm = (&mat + mat.adjoint()).scale(0.5);
        let tr = trace(&herm).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        Self::new(dim_a, dim_b, herm.unscale(tr))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Reduced state after tracing out `traced`.
    pub fn partial_trace(&self, traced: Subsystem) -> ComplexMatrix {
        partial_trace(&self.mat, self.dim_a, self.dim_b, traced).expect("dimensions validated at construction")
    }

    pub fn reduced_a(&self) -> ComplexMatrix {
        self.partial_trace(Subsystem::B)
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        self.partial_trace(Subsystem::A)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvals_hermitian_unchecked(&self.mat)
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.mat)
    }

    /// `(U_a ⊗ U_b) ρ (U_a ⊗ U_b)†`.
    pub fn local_unitary(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.nrows() != self.dim_a || u_b.nrows() != self.dim_b {
            return Err(Error::Dimension("local unitary sizes do not match subsystems".into()));
        }
        check_unitary(u_a, 1e-8)?;
        check_unitary(u_b, 1e-8)?;
        let u = tensor_product(u_a, u_b);
        Self::from_approx(self.dim_a, self.dim_b, &u * &self.mat * u.adjoint())
    }

    /// `ρ_a ⊗ ρ_b` from single-party states.
    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        Self::from_approx(rho_a.nrows(), rho_b.nrows(), tensor_product(rho_a, rho_b))
    }

    /// The state with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        let (da, db) = (self.dim_a, self.dim_b);
        let mat = ComplexMatrix::from_fn(da * db, da * db, |r, s| {
            let (rb, ra) = (r / da, r % da);
            let (sb, sa) = (s / da, s % da);
            self.mat[(ra * db + rb, sa * db + sb)]
        });
        Self { dim_a: db, dim_b: da, mat }
    }
}
