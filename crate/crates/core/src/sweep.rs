//! Parameter sweeps over the state families, rendered as CSV.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::closed_form::{
    c1_bell_diagonal, c3_bell_diagonal_balanced, c_bell_diagonal_sorted, c_isotropic, c_werner,
    discord_bell_diagonal, discord_isotropic, ef_isotropic, ef_two_qubit, ef_werner, q2_bell_diagonal, MeasureKind,
};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::measures::{classical_correlation_c1, measure_c, measure_cm, measure_q2, quantum_discord};
use crate::optimize::{derive_seed, OptimizerConfig};
use crate::states::{fig3_rho1, fig3_rho2, isotropic_state, werner_state, BlochTriple};

/// Restart budget for numeric discord on Werner states with `d ≥ 3`.
pub const WERNER_DISCORD_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Werner,
    Isotropic,
    BellDiagonalRho1,
    BellDiagonalRho2,
}

impl Family {
    pub const ALL: [Family; 4] = [Self::Werner, Self::Isotropic, Self::BellDiagonalRho1, Self::BellDiagonalRho2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Werner => "werner",
            Self::Isotropic => "isotropic",
            Self::BellDiagonalRho1 => "bell-diagonal-rho1",
            Self::BellDiagonalRho2 => "bell-diagonal-rho2",
        }
    }

    /// Closed parameter interval of the family.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Self::Werner => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn default_steps(self) -> usize {
        match self {
            Self::Werner | Self::Isotropic => 81,
            _ => 101,
        }
    }

    fn is_two_qubit(self) -> bool {
        matches!(self, Self::BellDiagonalRho1 | Self::BellDiagonalRho2)
    }

    /// The state at parameter `x`, with its Bloch triple when Bell-diagonal.
    pub fn state(self, d: usize, x: f64) -> Result<(DensityMatrix, Option<BlochTriple>)> {
        match self {
            Self::Werner => Ok((werner_state(d, x)?, None)),
            Self::Isotropic => Ok((isotropic_state(d, x)?, None)),
            Self::BellDiagonalRho1 => fig3_rho1(x).map(|(s, r)| (s, Some(r))),
            Self::BellDiagonalRho2 => fig3_rho2(x).map(|(s, r)| (s, Some(r))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            Error::Domain(format!(
                "unknown family '{s}' (expected werner, isotropic, bell-diagonal-rho1, bell-diagonal-rho2)"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    ClosedForm,
    Numeric,
    Both,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Self::ClosedForm),
            "numeric" => Ok(Self::Numeric),
            "both" => Ok(Self::Both),
            _ => Err(Error::Domain(format!("unknown mode '{s}' (expected closed-form, numeric, both)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: Family,
    /// Local dimension; fixed to 2 for the Bell-diagonal families.
    pub d: usize,
    pub param_from: f64,
    pub param_to: f64,
    pub steps: usize,
    pub measures: Vec<MeasureKind>,
    pub mode: SweepMode,
}

impl SweepSpec {
    /// Full domain at the default resolution.
    pub fn new(family: Family, d: usize, measures: Vec<MeasureKind>, mode: SweepMode) -> Self {
        let (param_from, param_to) = family.domain();
        Self { family, d, param_from, param_to, steps: family.default_steps(), measures, mode }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Domain(format!("steps = {} (need at least 2)", self.steps)));
        }
        if self.measures.is_empty() {
            return Err(Error::Domain("no measures requested".into()));
        }
        if self.d < 2 {
            return Err(Error::Domain(format!("d = {}", self.d)));
        }
        if self.family.is_two_qubit() && self.d != 2 {
            return Err(Error::Domain(format!("{} is a two-qubit family (d = 2)", self.family)));
        }
        let (lo, hi) = self.family.domain();
        for x in [self.param_from, self.param_to] {
            if !(lo..=hi).contains(&x) {
                return Err(Error::Domain(format!("parameter {x} outside [{lo}, {hi}] for {}", self.family)));
            }
        }
        if self.param_from >= self.param_to {
            return Err(Error::Domain("param_from must be below param_to".into()));
        }
        for m in &self.measures {
            if self.mode != SweepMode::Numeric && closed_form_value(self.family, self.d, *m, 0.5 * (lo + hi), None).is_none()
            {
                if self.mode == SweepMode::ClosedForm {
                    return Err(Error::Domain(format!("no closed form for {m} on {} with d = {}", self.family, self.d)));
                }
            }
            if self.mode != SweepMode::ClosedForm && !numeric_available(self.family, self.d, *m) {
                if self.mode == SweepMode::Numeric {
                    return Err(Error::Domain(format!("no numeric evaluation of {m} on {} with d = {}", self.family, self.d)));
                }
            }
        }
        Ok(())
    }

    /// Uniform grid; both endpoints are hit exactly.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.param_to
                } else {
                    self.param_from + (self.param_to - self.param_from) * i as f64 / n as f64
                }
            })
            .collect()
    }

    pub fn header(&self) -> String {
        let mut cols = vec!["param".to_string()];
        for m in &self.measures {
            match self.mode {
                SweepMode::Both => {
                    cols.push(format!("{m}_cf"));
                    cols.push(format!("{m}_num"));
                }
                _ => cols.push(m.to_string()),
            }
        }
        cols.join(",")
    }
}

/// Werner `d = 2` as a Bell-diagonal state: `r = −α/(2 − α)·(1, 1, 1)`.
fn werner_qubit_triple(alpha: f64) -> Result<BlochTriple> {
    let r = -alpha / (2.0 - alpha);
    BlochTriple::new(r, r, r)
}

fn closed_form_value(family: Family, d: usize, m: MeasureKind, x: f64, r: Option<&BlochTriple>) -> Option<Result<f64>> {
    use MeasureKind::*;
    match family {
        Family::Werner => match m {
            C | C3 | Q2 | C1 => Some(c_werner(d, x)),
            Ef => Some(ef_werner(d, x)),
            D if d == 2 => Some(werner_qubit_triple(x).and_then(|r| discord_bell_diagonal(&r))),
            D => None,
        },
        Family::Isotropic => match m {
            C | C3 | Q2 | C1 => Some(c_isotropic(d, x)),
            D => Some(discord_isotropic(d, x)),
            Ef => Some(ef_isotropic(d, x)),
        },
        Family::BellDiagonalRho1 | Family::BellDiagonalRho2 => {
            let owned;
            let r = match r {
                Some(r) => r,
                None => {
                    owned = match family.state(2, x) {
                        Ok((_, Some(r))) => r,
                        Ok(_) => unreachable!(),
                        Err(e) => return Some(Err(e)),
                    };
                    &owned
                }
            };
            Some(match m {
                C => c_bell_diagonal_sorted(r),
                C3 => c3_bell_diagonal_balanced(r),
                Q2 => q2_bell_diagonal(r),
                C1 => c1_bell_diagonal(r),
                D => discord_bell_diagonal(r),
                Ef => bell_state_ef(r),
            })
        }
    }
}

fn bell_state_ef(r: &BlochTriple) -> Result<f64> {
    ef_two_qubit(&crate::states::bell_diagonal(r)?)
}

fn numeric_available(family: Family, d: usize, m: MeasureKind) -> bool {
    match m {
        MeasureKind::Ef => d == 2 || family.is_two_qubit(),
        MeasureKind::C3 => crate::mub::is_prime(d) && d + 1 >= 3,
        _ => true,
    }
}

fn numeric_value(family: Family, d: usize, m: MeasureKind, rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    match m {
        MeasureKind::C => Ok(measure_c(rho, cfg)?.value),
        MeasureKind::C3 => Ok(measure_cm(rho, 3, cfg)?.value),
        MeasureKind::Q2 => Ok(measure_q2(rho, cfg)?.value),
        MeasureKind::C1 => Ok(classical_correlation_c1(rho, cfg)?.value),
        MeasureKind::D => {
            if family == Family::Werner && d >= 3 {
                let reduced = cfg.clone().with_restarts(cfg.restarts.min(WERNER_DISCORD_RESTARTS));
                quantum_discord(rho, &reduced)
            } else {
                quantum_discord(rho, cfg)
            }
        }
        MeasureKind::Ef => ef_two_qubit(rho),
    }
}

fn fmt_value(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        // 9 significant digits; normalize −0
        let v = if v == 0.0 { 0.0 } else { v };
        let _ = write!(out, "{v:.8e}");
    }
}

fn row(spec: &SweepSpec, index: usize, x: f64, cfg: &OptimizerConfig) -> Result<String> {
    let point_cfg = cfg.clone().with_seed_value(derive_seed(cfg.seed, index as u64));
    let (rho, triple) = spec.family.state(spec.d, x)?;
    let mut line = String::new();
    fmt_value(&mut line, Some(x));
    for &m in &spec.measures {
        if spec.mode != SweepMode::Numeric {
            line.push(',');
            let v = closed_form_value(spec.family, spec.d, m, x, triple.as_ref()).transpose()?;
            fmt_value(&mut line, v);
        }
        if spec.mode != SweepMode::ClosedForm {
            line.push(',');
            let v = if numeric_available(spec.family, spec.d, m) {
                Some(numeric_value(spec.family, spec.d, m, &rho, &point_cfg)?)
            } else {
                None
            };
            fmt_value(&mut line, v);
        }
    }
    Ok(line)
}

/// Evaluates the sweep and returns the complete CSV text (header included,
/// `\n` line endings). Grid points run in parallel; rows keep grid order.
pub fn run_sweep(spec: &SweepSpec, cfg: &OptimizerConfig) -> Result<String> {
    spec.validate()?;
    cfg.validate()?;
    let grid = spec.grid();
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| row(spec, i, x, cfg))
        .collect::<Result<Vec<String>>>()?;
    let mut out = spec.header();
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
