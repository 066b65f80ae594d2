//! Exact integer arithmetic on weights and exponent tuples.
//!
//! A domain in ℂ² is `(m₁, m₂)`-circular when it is invariant under the
//! weighted rotation `f_θ(z) = (e^{i m₁ θ} z₁, e^{i m₂ θ} z₂)`. Expanding a
//! holomorphic function in monomials and averaging over θ kills every
//! coefficient whose phase `Σ m_j k_j` (possibly shifted) is non-zero. The
//! functions here enumerate exactly which exponents survive that averaging.
//!
//! No floating point is used anywhere in this module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default per-coordinate enumeration bound for exhaustive scans.
pub const DEFAULT_BOUND: u32 = 64;

/// Weight `(m₁, …, m_n)` of a quasi-circular domain, all entries ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Weight(Vec<u32>);

impl Weight {
    pub fn new(entries: impl Into<Vec<u32>>) -> Result<Self> {
        let entries = entries.into();
        if entries.is_empty() || entries.len() > 2 {
            return Err(Error::InvalidWeight(format!(
                "length {} (only n = 1, 2 are supported)",
                entries.len()
            )));
        }
        if entries.contains(&0) {
            return Err(Error::InvalidWeight("entries must be positive".into()));
        }
        Ok(Weight(entries))
    }

    pub fn pair(m1: u32, m2: u32) -> Result<Self> {
        Self::new(vec![m1, m2])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn as_pair(&self) -> Result<(i64, i64)> {
        match self.0.as_slice() {
            &[a, b] => Ok((a as i64, b as i64)),
            _ => Err(Error::InvalidWeight(format!("expected n = 2, got {}", self.len()))),
        }
    }
}

impl TryFrom<Vec<u32>> for Weight {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for Vec<u32> {
    fn from(w: Weight) -> Self {
        w.0
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

/// Exponent tuple `(k₁, …, k_n)`. Negative entries are only meaningful for
/// the Laurent basis of the annulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<i32>);

impl MultiIndex {
    pub fn new(k: impl Into<Vec<i32>>) -> Self {
        MultiIndex(k.into())
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_j` (0-based `j`).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut k = vec![0; n];
        k[j] = 1;
        MultiIndex(k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|&k| k as i64).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&k| k >= 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Circular,
    Normal,
    Nonnormal,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Circular => "circular",
            Classification::Normal => "normal",
            Classification::Nonnormal => "nonnormal",
        };
        f.write_str(s)
    }
}

/// Which averaging argument to enumerate survivors for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientClass {
    /// Phase `Σ m_j k_j`: Taylor coefficients of `K(z, 0)`.
    Kernel,
    /// Phase `m₂ − m₁ + Σ m_j k_j`: coefficients of `T₁₂(z, 0)`.
    C,
    /// Phase `m₁ − m₂ + Σ m_j k_j`: coefficients of `T₂₁(z, 0)`.
    CPrime,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Sorts a two-entry weight ascending and divides out the gcd.
pub fn reduce(m: &Weight) -> Result<(Weight, u32)> {
    let (a, b) = m.as_pair()?;
    let (lo, hi) = if a <= b { (a as u32, b as u32) } else { (b as u32, a as u32) };
    let g = gcd(lo, hi);
    Ok((Weight(vec![lo / g, hi / g]), g))
}

/// Classifies a weight after reducing it.
pub fn classify(m: &Weight) -> Result<Classification> {
    let (r, _) = reduce(m)?;
    let (lo, hi) = (r.0[0], r.0[1]);
    Ok(if lo == hi {
        Classification::Circular
    } else if lo >= 2 {
        Classification::Normal
    } else {
        Classification::Nonnormal
    })
}

/// `Σ m_j k_j`.
pub fn weighted_degree(k: &MultiIndex, m: &Weight) -> Result<i64> {
    if k.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: m.len(), got: k.len() });
    }
    Ok(k.0.iter().zip(&m.0).map(|(&k, &m)| k as i64 * m as i64).sum())
}

/// `c_{k,m} = m₂ − m₁ + Σ m_j k_j`.
pub fn class_c(k: &MultiIndex, m: &Weight) -> Result<i64> {
    let (m1, m2) = m.as_pair()?;
    Ok(m2 - m1 + weighted_degree(k, m)?)
}

/// `c′_{k,m} = m₁ − m₂ + Σ m_j k_j`.
pub fn class_c_prime(k: &MultiIndex, m: &Weight) -> Result<i64> {
    let (m1, m2) = m.as_pair()?;
    Ok(m1 - m2 + weighted_degree(k, m)?)
}

pub fn class_value(k: &MultiIndex, m: &Weight, which: CoefficientClass) -> Result<i64> {
    match which {
        CoefficientClass::Kernel => weighted_degree(k, m),
        CoefficientClass::C => class_c(k, m),
        CoefficientClass::CPrime => class_c_prime(k, m),
    }
}

fn grid(n: usize, bound: u32) -> impl Iterator<Item = MultiIndex> {
    let b = bound as i32;
    let total = (b as usize + 1).pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut k = vec![0; n];
        for slot in k.iter_mut().rev() {
            *slot = (idx % (b as usize + 1)) as i32;
            idx /= b as usize + 1;
        }
        MultiIndex(k)
    })
}

/// All `k` with `max kᵢ ≤ bound` whose class value vanishes, in lexicographic
/// order.
pub fn surviving_indices(m: &Weight, which: CoefficientClass, bound: u32) -> Result<Vec<MultiIndex>> {
    m.as_pair()?;
    let mut out = Vec::new();
    for k in grid(2, bound) {
        if class_value(&k, m, which)? == 0 {
            out.push(k);
        }
    }
    Ok(out)
}

/// Exponents `k` (within the bound) with `Σ mᵢ kᵢ = m_j`: the monomials that
/// may appear in component `j` (1-based) of a polynomial map commuting with
/// the weighted rotation.
pub fn equivariant_monomials(m: &Weight, j: usize, bound: u32) -> Result<Vec<MultiIndex>> {
    if j == 0 || j > m.len() {
        return Err(Error::InvalidWeight(format!("component {j} out of range 1..={}", m.len())));
    }
    let target = m.0[j - 1] as i64;
    let mut out = Vec::new();
    for k in grid(m.len(), bound) {
        if weighted_degree(&k, m)? == target {
            out.push(k);
        }
    }
    Ok(out)
}

/// True when every component admits only its own linear monomial.
pub fn linear_forced(m: &Weight, bound: u32) -> Result<bool> {
    let n = m.len();
    for j in 1..=n {
        let allowed = equivariant_monomials(m, j, bound)?;
        if allowed != [MultiIndex::unit(n, j - 1)] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `diag(e^{i m₁ θ}, e^{i m₂ θ})` is central in `Mat₂(ℂ)` iff `m₁ = m₂`.
pub fn center_commutes(m: &Weight) -> Result<bool> {
    let (m1, m2) = m.as_pair()?;
    Ok(m1 == m2)
}
