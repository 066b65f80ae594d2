//! Sparse complex polynomials in one or two variables.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::weight::MultiIndex;

/// `Σ c_k z^k` with exponents stored in a `BTreeMap` (so iteration order and
/// therefore evaluation are deterministic).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<MultiIndex, C64>,
}

/// Serialized form of one term: `{"k": [...], "c": [re, im]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: Vec<i32>,
    pub c: [f64; 2],
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::zeros(nvars), c);
        p
    }

    /// The coordinate function `z_j` (0-based).
    pub fn variable(nvars: usize, j: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::unit(nvars, j), C64::new(1.0, 0.0));
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, C64)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (k, c) in terms {
            if k.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: k.len() });
            }
            if !k.is_nonnegative() {
                return Err(Error::InvalidMap(format!("negative exponent {k}")));
            }
            p.add_term(k, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &MultiIndex) -> C64 {
        self.terms.get(k).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> i64 {
        self.terms.keys().map(MultiIndex::total_degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, k: MultiIndex, c: C64) {
        let zero = C64::new(0.0, 0.0);
        match self.terms.entry(k) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == zero {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c != zero {
                    e.insert(c);
                }
            }
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(k, c)| c * k.0.iter().zip(z).map(|(&e, &x)| x.powi(e)).product::<C64>())
            .sum()
    }

    /// `∂/∂z_j` (0-based).
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            if k.0[j] == 0 {
                continue;
            }
            let mut shifted = k.clone();
            shifted.0[j] -= 1;
            out.add_term(shifted, c * k.0[j] as f64);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(self.nvars, C64::new(1.0, 0.0)), |acc, _| &acc * self)
    }

    /// Substitutes `g_j` for `z_j`.
    pub fn compose(&self, inner: &[Polynomial]) -> Result<Self> {
        if inner.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: inner.len() });
        }
        let nv = inner.first().map_or(self.nvars, |g| g.nvars);
        let mut out = Self::zero(nv);
        for (k, c) in &self.terms {
            let mut term = Self::constant(nv, *c);
            for (e, g) in k.0.iter().zip(inner) {
                term = &term * &g.pow(*e as u32);
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(k, c)| (k.clone(), *c)).collect(),
        }
    }

    /// Largest coefficient difference.
    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<&MultiIndex> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.terms.iter().map(|(k, c)| Term { k: k.0.clone(), c: [c.re, c.im] }).collect()
    }

    pub fn from_serialized(nvars: usize, terms: &[Term]) -> Result<Self> {
        Self::from_terms(nvars, terms.iter().map(|t| (MultiIndex(t.k.clone()), C64::new(t.c[0], t.c[1]))))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), *c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let k = MultiIndex(ka.0.iter().zip(&kb.0).map(|(a, b)| a + b).collect());
                out.add_term(k, ca * cb);
            }
        }
        out
    }
}
