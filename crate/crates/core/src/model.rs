//! Validated inputs of a construction: the prescribed convergence curve, the
//! restart schedule, the spectrum, and the monic polynomials that carry the
//! spectrum into the companion blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Eigenvalues smaller than this fraction of the largest modulus are rejected.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Shape of an admissible cycle-convergence curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum CurveVariant {
    /// `f(0) > f(1) > ... > f(q) > 0`
    Decreasing,
    /// Strictly decreasing through `f(s)`, then `f(s) = f(s+1) = ... = f(q)`.
    Stagnating { s: usize },
    /// Strictly decreasing and positive, with `f(q) = 0`.
    ZeroTail,
}

impl fmt::Display for CurveVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveVariant::Decreasing => write!(f, "decreasing"),
            CurveVariant::Stagnating { s } => write!(f, "stagnating(s={s})"),
            CurveVariant::ZeroTail => write!(f, "zero-tail"),
        }
    }
}

/// Prescribed residual norms `f(0), ..., f(q)` at the cycle ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    values: Vec<f64>,
    variant: CurveVariant,
}

impl ConvergenceCurve {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn variant(&self) -> CurveVariant {
        self.variant
    }

    /// Number of prescribed cycles.
    pub fn q(&self) -> usize {
        self.values.len() - 1
    }

    pub fn f(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Number of cycles the construction has to shape explicitly. For a
    /// stagnating curve only the cycles up to the first stagnant one.
    pub fn shaped_cycles(&self) -> usize {
        match self.variant {
            CurveVariant::Stagnating { s } => s + 1,
            _ => self.q(),
        }
    }
}

fn non_admissible(index: usize, reason: impl Into<String>) -> Error {
    Error::NonAdmissible {
        index,
        reason: reason.into(),
    }
}

/// Classifies a list of residual norms as one of the admissible curve shapes.
pub fn validate_curve(values: &[f64]) -> Result<ConvergenceCurve> {
    if values.len() < 2 {
        return Err(non_admissible(
            values.len().saturating_sub(1),
            "need f(0) and at least one cycle value",
        ));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(non_admissible(i, "value is not finite"));
        }
        if v < 0.0 {
            return Err(non_admissible(i, "value is negative"));
        }
    }
    if values[0] <= 0.0 {
        return Err(non_admissible(0, "f(0) must be positive"));
    }

    let q = values.len() - 1;
    let mut stagnation: Option<usize> = None;
    for i in 1..=q {
        let (prev, cur) = (values[i - 1], values[i]);
        if cur > prev {
            return Err(non_admissible(i, format!("increase from {prev} to {cur}")));
        }
        if cur == prev {
            if cur == 0.0 {
                return Err(non_admissible(i, "stagnation at zero"));
            }
            stagnation.get_or_insert(i - 1);
        } else {
            if stagnation.is_some() {
                return Err(non_admissible(i, "decrease after stagnation"));
            }
            if cur == 0.0 && i < q {
                return Err(non_admissible(i, "zero residual before the final entry"));
            }
        }
    }

    let variant = match stagnation {
        Some(s) => CurveVariant::Stagnating { s },
        None if values[q] == 0.0 => CurveVariant::ZeroTail,
        None => CurveVariant::Decreasing,
    };
    Ok(ConvergenceCurve {
        values: values.to_vec(),
        variant,
    })
}

/// Krylov dimensions `m_1, ..., m_q` of successive cycles for a matrix of order `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestartSchedule {
    cycles: Vec<usize>,
    n: usize,
}

impl RestartSchedule {
    pub fn new(cycles: Vec<usize>, n: usize) -> Result<Self> {
        if cycles.is_empty() {
            return Err(Error::InvalidSchedule("no cycles".into()));
        }
        if let Some((k, &m)) = cycles.iter().enumerate().find(|(_, &m)| m == 0 || m >= n) {
            return Err(Error::InvalidSchedule(format!(
                "m_{} = {m} must lie in [1, {}]",
                k + 1,
                n.saturating_sub(1)
            )));
        }
        let total: usize = cycles.iter().sum();
        if total >= n {
            return Err(Error::SizeMismatch(format!(
                "sum of restart lengths {total} must be below the order {n}"
            )));
        }
        Ok(RestartSchedule { cycles, n })
    }

    /// `q` cycles of the fixed restart length `m`.
    pub fn uniform(m: usize, q: usize, n: usize) -> Result<Self> {
        Self::new(vec![m; q], n)
    }

    pub fn cycles(&self) -> &[usize] {
        &self.cycles
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.cycles.windows(2).all(|w| w[0] == w[1])
    }

    /// Restart length of the 1-based cycle `k`; the list repeats cyclically.
    pub fn restart_for_cycle(&self, k: usize) -> usize {
        self.cycles[(k - 1) % self.cycles.len()]
    }
}

/// The prescribed eigenvalues, in the order their blocks will consume them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    eigenvalues: Vec<C64>,
}

impl SpectrumSpec {
    pub fn new(eigenvalues: Vec<C64>, n: usize) -> Result<Self> {
        if eigenvalues.len() != n {
            return Err(Error::SizeMismatch(format!(
                "spectrum has {} eigenvalues for order {n}",
                eigenvalues.len()
            )));
        }
        if let Some(i) = eigenvalues
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite(format!("eigenvalue {i}")));
        }
        let largest = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = EIGENVALUE_FLOOR * largest;
        if let Some((index, z)) = eigenvalues
            .iter()
            .enumerate()
            .find(|(_, z)| z.norm() == 0.0 || z.norm() < floor)
        {
            return Err(Error::ZeroEigenvalue {
                index,
                modulus: z.norm(),
            });
        }
        Ok(SpectrumSpec { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Splits the spectrum into consecutive runs of the given sizes plus a final
/// run holding whatever is left.
pub fn partition_spectrum(spectrum: &SpectrumSpec, block_sizes: &[usize]) -> Result<Vec<Vec<C64>>> {
    let n = spectrum.len();
    let used: usize = block_sizes.iter().sum();
    if used >= n {
        return Err(Error::SizeMismatch(format!(
            "blocks use {used} of {n} eigenvalues and leave no final block"
        )));
    }
    let eig = spectrum.eigenvalues();
    let mut parts = Vec::with_capacity(block_sizes.len() + 1);
    let mut start = 0;
    for &size in block_sizes {
        parts.push(eig[start..start + size].to_vec());
        start += size;
    }
    parts.push(eig[start..].to_vec());
    Ok(parts)
}

/// `p(x) = x^d - Σ_{j<d} alpha_j x^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    alphas: Vec<C64>,
}

impl MonicPolynomial {
    /// Wraps coefficients already in the `x^d - Σ alpha_j x^j` convention.
    pub fn from_alphas(alphas: Vec<C64>) -> Self {
        MonicPolynomial { alphas }
    }

    pub fn degree(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[C64] {
        &self.alphas
    }

    pub fn alpha(&self, j: usize) -> C64 {
        self.alphas[j]
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.alphas.iter().rev().fold(ONE, |acc, &a| acc * x - a)
    }
}

/// Expands `Π (x - root)` one linear factor at a time.
pub fn poly_from_roots(roots: &[C64]) -> Result<MonicPolynomial> {
    if let Some(index) = roots.iter().position(|&r| r == ZERO) {
        return Err(Error::ZeroRoot { index });
    }
    // coeffs[j] multiplies x^j; leading coefficient kept implicitly as 1
    let mut coeffs: Vec<C64> = vec![ONE];
    for &r in roots {
        let mut next = vec![ZERO; coeffs.len() + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= r * c;
        }
        coeffs = next;
    }
    coeffs.pop();
    Ok(MonicPolynomial {
        alphas: coeffs.into_iter().map(|c| -c).collect(),
    })
}

/// Which construction builds the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    Standard,
    Stagnation,
    NonConvergent,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantKind::Standard => "standard",
            VariantKind::Stagnation => "stagnation",
            VariantKind::NonConvergent => "nonconvergent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    kind: VariantKind,
    gamma: C64,
}

impl VariantConfig {
    pub fn new(kind: VariantKind, gamma: C64) -> Result<Self> {
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(Error::NonFinite("gamma".into()));
        }
        if kind == VariantKind::NonConvergent
            && (ONE + gamma).norm() <= 1e-14 * gamma.norm().max(1.0)
        {
            return Err(Error::GammaForbidden);
        }
        Ok(VariantConfig { kind, gamma })
    }

    pub fn standard() -> Self {
        VariantConfig {
            kind: VariantKind::Standard,
            gamma: ONE,
        }
    }

    pub fn stagnation() -> Self {
        VariantConfig {
            kind: VariantKind::Stagnation,
            gamma: ONE,
        }
    }

    pub fn nonconvergent(gamma: C64) -> Result<Self> {
        Self::new(VariantKind::NonConvergent, gamma)
    }

    pub fn kind(&self) -> VariantKind {
        self.kind
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }
}
