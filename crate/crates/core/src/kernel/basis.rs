use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::weight::{weighted_degree, MultiIndex, Weight};

/// How the monomial basis is truncated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Cutoff {
    /// `Σ kᵢ ≤ n`.
    TotalDegree { n: u32 },
    /// `Σ mᵢ kᵢ ≤ n`.
    WeightedDegree { weight: Weight, n: u32 },
}

impl Cutoff {
    pub fn value(&self, k: &MultiIndex) -> i64 {
        match self {
            Cutoff::TotalDegree { .. } => k.total_degree(),
            Cutoff::WeightedDegree { weight, .. } => weighted_degree(k, weight).expect("basis dimension checked"),
        }
    }

    pub fn bound(&self) -> u32 {
        match self {
            Cutoff::TotalDegree { n } | Cutoff::WeightedDegree { n, .. } => *n,
        }
    }
}

/// Ordered monomial (or Laurent monomial, in one variable) basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialBasis {
    pub dimension: usize,
    pub exponents: Vec<MultiIndex>,
    pub cutoff: Cutoff,
}

/// Enumerates every exponent whose cutoff value is at most the bound.
///
/// `laurent_min` extends a one-variable total-degree basis down to negative
/// exponents (used for the annulus).
pub fn monomial_basis(n: usize, cutoff: Cutoff, laurent_min: Option<i32>) -> Result<MonomialBasis> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidBasis(format!("dimension {n} is not supported")));
    }
    if let Cutoff::WeightedDegree { weight, .. } = &cutoff {
        if weight.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: weight.len() });
        }
    }
    let lo = match laurent_min {
        None => 0,
        Some(m) if n == 1 && m < 0 && matches!(cutoff, Cutoff::TotalDegree { .. }) => m,
        Some(m) => {
            return Err(Error::InvalidBasis(format!(
                "laurent_min = {m} requires a one-variable total-degree basis and a negative value"
            )))
        }
    };
    let bound = cutoff.bound() as i64;
    let mut exponents = Vec::new();
    if n == 1 {
        for k in lo..=bound as i32 {
            let idx = MultiIndex::new(vec![k]);
            if cutoff.value(&idx) <= bound {
                exponents.push(idx);
            }
        }
    } else {
        for k1 in 0..=bound as i32 {
            for k2 in 0..=bound as i32 {
                let idx = MultiIndex::new(vec![k1, k2]);
                if cutoff.value(&idx) <= bound {
                    exponents.push(idx);
                }
            }
        }
    }
    if exponents.is_empty() {
        return Err(Error::EmptyBasis);
    }
    exponents.sort_by(|a, b| cutoff.value(a).cmp(&cutoff.value(b)).then_with(|| a.cmp(b)));
    Ok(MonomialBasis { dimension: n, exponents, cutoff })
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.exponents.iter().position(|e| e == k)
    }

    pub(crate) fn evaluator(&self) -> MonomialEvaluator {
        MonomialEvaluator::new(self)
    }
}

/// Evaluates all basis monomials (and first derivatives) at a point via
/// per-variable power tables.
pub(crate) struct MonomialEvaluator {
    exponents: Vec<Vec<i32>>,
    min: Vec<i32>,
    max: Vec<i32>,
}

impl MonomialEvaluator {
    fn new(basis: &MonomialBasis) -> Self {
        let n = basis.dimension;
        let mut min = vec![0; n];
        let mut max = vec![0; n];
        for k in &basis.exponents {
            for j in 0..n {
                min[j] = min[j].min(k.0[j] - 1);
                max[j] = max[j].max(k.0[j]);
            }
        }
        MonomialEvaluator { exponents: basis.exponents.iter().map(|k| k.0.clone()).collect(), min, max }
    }

    fn tables(&self, z: &[C64]) -> Vec<Vec<C64>> {
        z.iter()
            .enumerate()
            .map(|(j, &x)| {
                let (lo, hi) = (self.min[j], self.max[j]);
                let mut t = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
                let zero = (-lo) as usize;
                t[zero] = C64::new(1.0, 0.0);
                for e in 1..=hi as usize {
                    t[zero + e] = t[zero + e - 1] * x;
                }
                if lo < 0 {
                    let inv = x.inv();
                    for e in 1..=(-lo) as usize {
                        t[zero - e] = t[zero - e + 1] * inv;
                    }
                }
                t
            })
            .collect()
    }

    fn pw(&self, t: &[Vec<C64>], j: usize, e: i32) -> C64 {
        t[j][(e - self.min[j]) as usize]
    }

    /// Monomial values `z^a`.
    pub fn values_into(&self, z: &[C64], out: &mut [C64]) {
        let t = self.tables(z);
        for (o, k) in out.iter_mut().zip(&self.exponents) {
            *o = k.iter().enumerate().map(|(j, &e)| self.pw(&t, j, e)).product();
        }
    }

    pub fn values(&self, z: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.exponents.len()];
        self.values_into(z, &mut out);
        out
    }

    /// Values and the partial derivatives `∂_{z_j} z^a` for each `j`.
    pub fn values_and_gradients(&self, z: &[C64]) -> (Vec<C64>, Vec<Vec<C64>>) {
        let t = self.tables(z);
        let n = z.len();
        let mut vals = Vec::with_capacity(self.exponents.len());
        let mut grads = vec![Vec::with_capacity(self.exponents.len()); n];
        for k in &self.exponents {
            vals.push(k.iter().enumerate().map(|(j, &e)| self.pw(&t, j, e)).product());
            for (d, g) in grads.iter_mut().enumerate() {
                if k[d] == 0 {
                    g.push(C64::new(0.0, 0.0));
                    continue;
                }
                let mut v = C64::new(k[d] as f64, 0.0);
                for (j, &e) in k.iter().enumerate() {
                    v *= self.pw(&t, j, if j == d { e - 1 } else { e });
                }
                g.push(v);
            }
        }
        (vals, grads)
    }
}
