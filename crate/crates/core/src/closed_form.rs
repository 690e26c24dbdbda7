//! Analytic values of the correlation measures on the Werner, isotropic and
//! Bell-diagonal families. These serve as oracles for the numerical search.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{binary_entropy, eigh_unchecked, entropy_of_spectrum, pauli_y, tensor_product, xlog2x, DensityMatrix};
use crate::states::BlochTriple;

/// The quantities compared across the state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// MUB-pair correlation 𝒞.
    C,
    /// 𝒞₃, three pairwise MU bases.
    C3,
    /// Best Holevo quantity over bases MU to a χ-basis.
    Q2,
    /// Classical correlation.
    C1,
    /// Quantum discord.
    D,
    /// Entanglement of formation.
    Ef,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [Self::C, Self::C3, Self::Q2, Self::C1, Self::D, Self::Ef];

    pub fn name(self) -> &'static str {
        match self {
            Self::C => "C",
            Self::C3 => "C3",
            Self::Q2 => "Q2",
            Self::C1 => "C1",
            Self::D => "D",
            Self::Ef => "Ef",
        }
    }

    /// Parses a comma-separated list such as `C,D,Ef`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse()).collect()
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown measure '{s}' (expected one of C, C3, Q2, C1, D, Ef)")))
    }
}

fn h(x: f64) -> f64 {
    binary_entropy(x).expect("argument constructed inside [0, 1]")
}

fn check_werner(d: usize, alpha: f64) -> Result<f64> {
    if d < 2 || !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("Werner parameters d = {d}, alpha = {alpha}")));
    }
    Ok(d as f64)
}

fn check_isotropic(d: usize, beta: f64) -> Result<f64> {
    if d < 2 || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("isotropic parameters d = {d}, beta = {beta}")));
    }
    Ok(d as f64)
}

/// `𝒞` of the Werner state: `log₂(d/(d−α)) + ((1−α)/(d−α)) log₂(1−α)`.
///
/// Every local basis gives the same Holevo quantity on this family, so the
/// value is also its C₁, Q₂ and 𝒞ₘ.
pub fn c_werner(d: usize, alpha: f64) -> Result<f64> {
    let df = check_werner(d, alpha)?;
    Ok((df / (df - alpha)).log2() + xlog2x(1.0 - alpha) / (df - alpha))
}

/// Entanglement of formation `h(½(1 + √(1 − c²)))`, `c = max(0, (dα−1)/(d−α))`.
pub fn ef_werner(d: usize, alpha: f64) -> Result<f64> {
    let df = check_werner(d, alpha)?;
    let conc = ((df * alpha - 1.0) / (df - alpha)).max(0.0);
    Ok(h(0.5 * (1.0 + (1.0 - conc * conc).max(0.0).sqrt())))
}

/// `𝒞` of the isotropic state:
/// `log₂d + ((dβ+1)/(d+1)) log₂((dβ+1)/(d+1)) + ((d−dβ)/(d+1)) log₂((d−dβ)/(d²−1))`.
///
/// Basis independent like the Werner case.
pub fn c_isotropic(d: usize, beta: f64) -> Result<f64> {
    let df = check_isotropic(d, beta)?;
    let top = (df * beta + 1.0) / (df + 1.0);
    let rest = (df - df * beta) / (df * df - 1.0);
    // (d − dβ)/(d + 1) = (d − 1)·rest
    Ok(df.log2() + xlog2x(top) + (df - 1.0) * xlog2x(rest))
}

/// Piecewise entanglement of formation of the isotropic state. For `d = 2`
/// the middle branch covers all of `(1/2, 1]`.
pub fn ef_isotropic(d: usize, beta: f64) -> Result<f64> {
    let df = check_isotropic(d, beta)?;
    if beta <= 1.0 / df {
        return Ok(0.0);
    }
    let upper = 4.0 * (df - 1.0) / (df * df);
    if d == 2 || beta < upper {
        let gamma = (beta.sqrt() + ((df - 1.0) * (1.0 - beta)).sqrt()).powi(2) / df;
        Ok(h(gamma.min(1.0)) + (1.0 - gamma) * (df - 1.0).log2())
    } else {
        Ok((beta - 1.0) * df * (df - 1.0).log2() / (df - 2.0) + df.log2())
    }
}

/// Discord of the isotropic state (measurement on A):
/// `β log₂β + ((1−β)/(d+1)) log₂((1−β)/(d²−1)) − ((1+dβ)/(d+1)) log₂((1−β−1/d+dβ)/(d²−1))`.
pub fn discord_isotropic(d: usize, beta: f64) -> Result<f64> {
    let df = check_isotropic(d, beta)?;
    let d2m1 = df * df - 1.0;
    let noise = (1.0 - beta) / d2m1;
    let last = (1.0 - beta - 1.0 / df + df * beta) / d2m1;
    // (1−β)/(d+1) = (d − 1)·noise
    let value = xlog2x(beta) + (df - 1.0) * xlog2x(noise) - (1.0 + df * beta) / (df + 1.0) * last.log2();
    Ok(value.max(0.0))
}

fn bell_value(norm_sq: f64) -> f64 {
    1.0 - h((1.0 + norm_sq.max(0.0).sqrt()) / 2.0)
}

fn valid(r: &BlochTriple) -> Result<BlochTriple> {
    BlochTriple::new(r.r1, r.r2, r.r3)
}

/// `1 − h((1 + √((r₁² + r₂²)/2))/2)`, using the first two coefficients as
/// given (not sorted by magnitude).
pub fn c_bell_diagonal(r: &BlochTriple) -> Result<f64> {
    let r = valid(r)?;
    Ok(bell_value((r.r1 * r.r1 + r.r2 * r.r2) / 2.0))
}

/// `1 − h((1 + √((r̄₁² + r̄₂²)/2))/2)` with the two largest magnitudes; the
/// best orthogonal Bloch-axis pair lies at 45° in their plane.
pub fn c_bell_diagonal_sorted(r: &BlochTriple) -> Result<f64> {
    let [a, b, _] = valid(r)?.sorted_magnitudes();
    Ok(bell_value((a * a + b * b) / 2.0))
}

/// `1 − h((1 + √((r̄₂² + r̄₃²)/2))/2)`, the published three-basis formula.
///
/// This is not the maximum over orthonormal Bloch triads in general; see
/// [`c3_bell_diagonal_balanced`].
pub fn c3_bell_diagonal(r: &BlochTriple) -> Result<f64> {
    let [_, b, c] = valid(r)?.sorted_magnitudes();
    Ok(bell_value((b * b + c * c) / 2.0))
}

/// `𝒞₃` from the Schur–Horn theorem: a real symmetric matrix is orthogonally
/// similar to one with constant diagonal, so some orthonormal triad sees
/// `|R n_k|² = (r₁² + r₂² + r₃²)/3` on every axis, and no triad does better.
pub fn c3_bell_diagonal_balanced(r: &BlochTriple) -> Result<f64> {
    let r = valid(r)?;
    Ok(bell_value((r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3) / 3.0))
}

/// `Q₂ = 1 − h((1 + |r̄₂|)/2)`: the χ-basis is the largest-|r| axis and its
/// MU bases are the orthogonal axes.
pub fn q2_bell_diagonal(r: &BlochTriple) -> Result<f64> {
    let [_, b, _] = valid(r)?.sorted_magnitudes();
    Ok(bell_value(b * b))
}

/// `C₁ = 1 − h((1 + |r̄₁|)/2)`.
pub fn c1_bell_diagonal(r: &BlochTriple) -> Result<f64> {
    let [a, _, _] = valid(r)?.sorted_magnitudes();
    Ok(bell_value(a * a))
}

/// `D = 2 − S(ρ) − C₁`; the marginals of the family are maximally mixed.
pub fn discord_bell_diagonal(r: &BlochTriple) -> Result<f64> {
    let r = valid(r)?;
    let s = entropy_of_spectrum(&r.bell_weights().map(|w| w.max(0.0)))?;
    Ok((2.0 - s - c1_bell_diagonal(&r)?).max(0.0))
}

/// Two-qubit entanglement of formation from the concurrence
/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, `λ` the descending square roots of the
/// spectrum of `√ρ ρ̃ √ρ`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn ef_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    Ok(h(0.5 * (1.0 + (1.0 - concurrence(rho)?.powi(2)).max(0.0).sqrt())))
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::Dimension(format!(
            "concurrence needs a 2x2 system, got {}x{}",
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let yy = tensor_product(&pauli_y(), &pauli_y());
    let m = rho.matrix();
    let (vals, v) = eigh_unchecked(m);
    let mut sqrt_rho = v.clone();
    for (k, lambda) in vals.iter().enumerate() {
        // rounding noise in null directions would otherwise enter at √ε
        let s = if *lambda > 1e-14 { lambda.sqrt() } else { 0.0 };
        for i in 0..4 {
            sqrt_rho[(i, k)] *= s;
        }
    }
    let sqrt_rho = sqrt_rho * v.adjoint();
    let sqrt_flipped = &yy * sqrt_rho.conjugate() * &yy;
    // λ are the singular values of √ρ √ρ̃
    let mut lambdas: Vec<f64> = (&sqrt_rho * sqrt_flipped).singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
