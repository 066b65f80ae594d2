use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::MonomialBasis;
use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_part, CMat, C64};
use crate::sampling::SampleCloud;

/// Default relative eigenvalue floor for [`orthonormalize`].
pub const DEFAULT_FLOOR_RATIO: f64 = 1e-10;

/// Points per chunk in the QMC reduction; fixed so sums do not depend on the
/// number of worker threads.
const GRAM_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GramSource {
    Exact,
    Qmc { seed: u64, count: usize, accepted: usize },
}

/// `G[a][b] = ∫_D z^a conj(z^b) dV`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: CMat,
    pub source: GramSource,
    /// `λ_max / λ_min` of the raw matrix (infinite when singular).
    pub condition: f64,
}

fn condition_of(g: &CMat) -> f64 {
    let (values, _) = hermitian_eigen(g);
    let lo = values.first().copied().unwrap_or(0.0);
    let hi = values.last().copied().unwrap_or(0.0);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn disk_moment(k: i32) -> Option<f64> {
    (k >= 0).then(|| PI / (k as f64 + 1.0))
}

fn annulus_moment(k: i32, r: f64) -> f64 {
    if k == -1 {
        2.0 * PI * (1.0 / r).ln()
    } else {
        let e = 2.0 * k as f64 + 2.0;
        PI * (1.0 - r.powf(e)) / (k as f64 + 1.0)
    }
}

/// `π² k₁! k₂! / (k₁ + k₂ + 2)!`, formed as a running product.
fn ball_moment(k1: i32, k2: i32) -> f64 {
    let (small, big) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
    // k₁! k₂! / (k₁+k₂+2)! = small! / ((big+1)(big+2)…(big+small+2))
    let mut v = PI * PI;
    for i in 1..=small {
        v *= i as f64;
    }
    for i in (big + 1)..=(big + small + 2) {
        v /= i as f64;
    }
    v
}

/// Closed-form Gram matrix on Reinhardt domains, where distinct monomials are
/// orthogonal and the diagonal moments are known.
pub fn gram_exact_reinhardt(spec: &DomainSpec, basis: &MonomialBasis) -> Result<GramMatrix> {
    if basis.dimension != spec.dimension() {
        return Err(Error::DimensionMismatch { expected: spec.dimension(), got: basis.dimension });
    }
    let negative = || Error::InvalidBasis(format!("negative exponents are not integrable on `{}`", spec.id()));
    let mut diag = Vec::with_capacity(basis.len());
    for k in &basis.exponents {
        let v = match spec.kind {
            DomainKind::Disk => disk_moment(k.0[0]).ok_or_else(negative)?,
            DomainKind::Annulus { inner } => annulus_moment(k.0[0], inner),
            DomainKind::Polydisk2 => {
                disk_moment(k.0[0]).ok_or_else(negative)? * disk_moment(k.0[1]).ok_or_else(negative)?
            }
            DomainKind::Ball2 => {
                if !k.is_nonnegative() {
                    return Err(negative());
                }
                ball_moment(k.0[0], k.0[1])
            }
            _ => return Err(Error::UnsupportedDomain(spec.id().to_string())),
        };
        diag.push(v);
    }
    let entries = CMat::from_fn(basis.len(), basis.len(), |a, b| {
        if a == b {
            C64::new(diag[a], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let hi = diag.iter().copied().fold(f64::MIN, f64::max);
    let lo = diag.iter().copied().fold(f64::MAX, f64::min);
    Ok(GramMatrix { entries, source: GramSource::Exact, condition: hi / lo })
}

/// Quasi-Monte Carlo Gram matrix: `volume × mean_w(w^a conj(w^b))` over the
/// cloud, Hermitian-symmetrized.
pub fn gram_qmc(basis: &MonomialBasis, cloud: &SampleCloud) -> Result<GramMatrix> {
    if cloud.is_empty() {
        return Err(Error::DegenerateSample { id: "cloud".into(), requested: cloud.requested });
    }
    if basis.dimension != cloud.dimension {
        return Err(Error::DimensionMismatch { expected: cloud.dimension, got: basis.dimension });
    }
    let nb = basis.len();
    let eval = basis.evaluator();
    let partials: Vec<Vec<C64>> = cloud
        .point_chunks(GRAM_CHUNK)
        .map(|chunk| {
            let mut acc = vec![C64::new(0.0, 0.0); nb * nb];
            let mut v = vec![C64::new(0.0, 0.0); nb];
            for z in chunk.chunks_exact(cloud.dimension) {
                eval.values_into(z, &mut v);
                for a in 0..nb {
                    let va = v[a];
                    let row = &mut acc[a * nb..(a + 1) * nb];
                    for b in a..nb {
                        row[b] += va * v[b].conj();
                    }
                }
            }
            acc
        })
        .collect();
    let mut sum = vec![C64::new(0.0, 0.0); nb * nb];
    for p in &partials {
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
    }
    let scale = cloud.volume_estimate / cloud.accepted as f64;
    let mut g = CMat::zeros(nb, nb);
    for a in 0..nb {
        for b in a..nb {
            let v = sum[a * nb + b] * scale;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteGram(a, b));
            }
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    let entries = hermitian_part(&g);
    let condition = condition_of(&entries);
    Ok(GramMatrix {
        entries,
        source: GramSource::Qmc { seed: cloud.seed, count: cloud.requested, accepted: cloud.accepted },
        condition,
    })
}

/// Result of [`orthonormalize`]: row `j` of `transform` holds the monomial
/// coefficients of the `j`-th orthonormal function.
#[derive(Debug, Clone)]
pub struct Orthonormalization {
    pub transform: CMat,
    pub effective_rank: usize,
    /// Kept eigenvalues of the diagonally equilibrated Gram, descending.
    pub kept_eigenvalues: Vec<f64>,
    pub floor_ratio: f64,
}

/// Rank-truncated orthonormalization of a Gram matrix.
///
/// The Gram is first equilibrated, `G̃ = D^{-1/2} G D^{-1/2}` with
/// `D = diag(G)`, then diagonalized as `G̃ = U Λ U*`. Eigenvalues below
/// `floor_ratio · λ_max` are dropped and the transform is
/// `B = Λ^{-1/2} U* D^{-1/2}`, so that `B G B* = I`.
pub fn orthonormalize(gram: &GramMatrix, floor_ratio: f64) -> Result<Orthonormalization> {
    let g = &gram.entries;
    let n = g.nrows();
    let mut dinv = Vec::with_capacity(n);
    for a in 0..n {
        let d = g[(a, a)].re;
        if !(d > 0.0) {
            return Err(Error::DegenerateGram(d));
        }
        dinv.push(1.0 / d.sqrt());
    }
    let scaled = CMat::from_fn(n, n, |a, b| g[(a, b)] * dinv[a] * dinv[b]);
    let (values, u) = hermitian_eigen(&scaled);
    let lmax = values.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(Error::DegenerateGram(lmax));
    }
    let floor = floor_ratio * lmax;
    let kept: Vec<usize> = (0..n).rev().filter(|&i| values[i] >= floor).collect();
    let rank = kept.len();
    let transform = CMat::from_fn(rank, n, |j, a| {
        let i = kept[j];
        u[(a, i)].conj() * (dinv[a] / values[i].sqrt())
    });
    Ok(Orthonormalization {
        transform,
        effective_rank: rank,
        kept_eigenvalues: kept.iter().map(|&i| values[i]).collect(),
        floor_ratio,
    })
}
