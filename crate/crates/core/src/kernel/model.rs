use serde::{Deserialize, Serialize};

use super::basis::{monomial_basis, Cutoff, MonomialBasis};
use super::gram::{gram_exact_reinhardt, gram_qmc, orthonormalize, GramSource, Orthonormalization, DEFAULT_FLOOR_RATIO};
use super::{BergmanKernel, KernelInfo, KernelJet, KernelSource};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, C64};
use crate::poly::Polynomial;
use crate::sampling::{sample, SampleCloud};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub domain: String,
    pub gram: GramSource,
    pub floor_ratio: f64,
}

/// A truncated Bergman kernel `K_N(z, w) = Σ C[a][b] z^a conj(w)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub basis: MonomialBasis,
    pub coeffs: CMat,
    pub effective_rank: usize,
    pub volume_estimate: f64,
    pub provenance: Provenance,
}

/// Assembles the coefficient matrix from an orthonormalizing transform:
/// `C[a][b] = Σ_j B[j][a] conj(B[j][b])`.
pub fn kernel_model(
    basis: MonomialBasis,
    ortho: &Orthonormalization,
    volume_estimate: f64,
    provenance: Provenance,
) -> Result<KernelModel> {
    let b = &ortho.transform;
    if b.ncols() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), got: b.ncols() });
    }
    let coeffs = b.transpose() * b.map(|x| x.conj());
    Ok(KernelModel { basis, coeffs, effective_rank: ortho.effective_rank, volume_estimate, provenance })
}

/// Which Gram matrix to use when building a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramChoice {
    /// Exact on Reinhardt domains, QMC elsewhere.
    Auto,
    Exact,
    Qmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub cutoff: Cutoff,
    pub laurent_min: Option<i32>,
    pub gram: GramChoice,
    pub samples: usize,
    pub seed: u64,
    pub floor_ratio: f64,
}

impl ModelConfig {
    /// Weighted degree ≤ 12 for weighted ℂ² domains, total degree ≤ 40 in ℂ¹,
    /// total degree ≤ 12 otherwise; 10⁶ proposals, seed 1.
    pub fn default_for(spec: &DomainSpec) -> Self {
        let cutoff = match (&spec.weight, spec.dimension()) {
            (_, 1) => Cutoff::TotalDegree { n: 40 },
            (Some(w), _) => Cutoff::WeightedDegree { weight: w.clone(), n: 12 },
            (None, _) => Cutoff::TotalDegree { n: 12 },
        };
        let laurent_min = matches!(spec.kind, crate::domain::DomainKind::Annulus { .. }).then_some(-40);
        ModelConfig {
            cutoff,
            laurent_min,
            gram: GramChoice::Auto,
            samples: 1_000_000,
            seed: 1,
            floor_ratio: DEFAULT_FLOOR_RATIO,
        }
    }
}

/// Builds a kernel model for a catalog domain.
pub fn build_model(spec: &DomainSpec, config: &ModelConfig) -> Result<KernelModel> {
    let basis = monomial_basis(spec.dimension(), config.cutoff.clone(), config.laurent_min)?;
    let exact = match config.gram {
        GramChoice::Auto => spec.kind.is_reinhardt(),
        GramChoice::Exact => true,
        GramChoice::Qmc => false,
    };
    if exact {
        let gram = gram_exact_reinhardt(spec, &basis)?;
        let ortho = orthonormalize(&gram, config.floor_ratio)?;
        let volume = spec.known_volume.ok_or_else(|| Error::UnsupportedDomain(spec.id().to_string()))?;
        let prov = Provenance { domain: spec.id().to_string(), gram: gram.source, floor_ratio: config.floor_ratio };
        kernel_model(basis, &ortho, volume, prov)
    } else {
        let cloud = sample(spec, config.samples, config.seed)?;
        model_from_cloud(spec, basis, &cloud, config.floor_ratio)
    }
}

/// QMC model from an existing cloud.
pub fn model_from_cloud(spec: &DomainSpec, basis: MonomialBasis, cloud: &SampleCloud, floor_ratio: f64) -> Result<KernelModel> {
    let gram = gram_qmc(&basis, cloud)?;
    let ortho = orthonormalize(&gram, floor_ratio)?;
    let prov = Provenance { domain: spec.id().to_string(), gram: gram.source, floor_ratio };
    kernel_model(basis, &ortho, cloud.volume_estimate, prov)
}

impl KernelModel {
    /// Smallest and largest eigenvalue of `C`.
    pub fn coefficient_spectrum(&self) -> (f64, f64) {
        let (v, _) = hermitian_eigen(&self.coeffs);
        (v[0], v[v.len() - 1])
    }

    fn check(&self, z: &[C64], w: &[C64]) -> Result<()> {
        let n = self.basis.dimension;
        for p in [z, w] {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
        }
        Ok(())
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_conj_vec(c: &CMat, v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n).map(|a| (0..n).map(|b| c[(a, b)] * v[b].conj()).sum()).collect()
}

impl BergmanKernel for KernelModel {
    fn dimension(&self) -> usize {
        self.basis.dimension
    }

    fn volume(&self) -> f64 {
        self.volume_estimate
    }

    fn source(&self) -> KernelSource {
        match self.provenance.gram {
            GramSource::Exact => KernelSource::ExactGram,
            GramSource::Qmc { .. } => KernelSource::Qmc,
        }
    }

    fn label(&self) -> String {
        self.provenance.domain.clone()
    }

    fn info(&self) -> KernelInfo {
        KernelInfo {
            label: self.label(),
            source: self.source(),
            volume: self.volume_estimate,
            cutoff: Some(self.basis.cutoff.clone()),
            effective_rank: Some(self.effective_rank),
            gram: Some(self.provenance.gram),
            floor_ratio: Some(self.provenance.floor_ratio),
        }
    }

    fn eval(&self, z: &[C64], w: &[C64]) -> Result<C64> {
        self.check(z, w)?;
        let ev = self.basis.evaluator();
        let mz = ev.values(z);
        let mw = ev.values(w);
        Ok(dot(&mz, &mat_conj_vec(&self.coeffs, &mw)))
    }

    fn jet(&self, z: &[C64], w: &[C64]) -> Result<KernelJet> {
        self.check(z, w)?;
        let n = self.basis.dimension;
        let ev = self.basis.evaluator();
        let (mz, dmz) = ev.values_and_gradients(z);
        let (mw, dmw) = ev.values_and_gradients(w);
        let u = mat_conj_vec(&self.coeffs, &mw);
        let ui: Vec<Vec<C64>> = dmw.iter().map(|d| mat_conj_vec(&self.coeffs, d)).collect();
        Ok(KernelJet {
            value: dot(&mz, &u),
            dz: dmz.iter().map(|d| dot(d, &u)).collect(),
            dwbar: ui.iter().map(|v| dot(&mz, v)).collect(),
            mixed: CMat::from_fn(n, n, |i, j| dot(&dmz[j], &ui[i])),
        })
    }
}

/// Max over `probes` of `|∫ f(w) K(z, w) dV(w) − f(z)|`, the integral taken
/// by QMC over `cloud`.
pub fn reproducing_residual(model: &KernelModel, f: &Polynomial, cloud: &SampleCloud, probes: &[Vec<C64>]) -> Result<f64> {
    for (k, _) in f.terms() {
        if model.basis.position(k).is_none() {
            return Err(Error::InvalidBasis(format!("exponent {k} is not in the basis")));
        }
    }
    if cloud.dimension != model.basis.dimension {
        return Err(Error::DimensionMismatch { expected: model.basis.dimension, got: cloud.dimension });
    }
    let ev = model.basis.evaluator();
    let nb = model.basis.len();
    // s_b = Σ_w f(w) conj(w^b)
    let mut s = vec![C64::new(0.0, 0.0); nb];
    let mut v = vec![C64::new(0.0, 0.0); nb];
    for w in cloud.points() {
        ev.values_into(w, &mut v);
        let fw = f.eval(w);
        for (sb, vb) in s.iter_mut().zip(&v) {
            *sb += fw * vb.conj();
        }
    }
    let scale = cloud.volume_estimate / cloud.accepted as f64;
    let mut worst = 0.0_f64;
    for z in probes {
        let mz = ev.values(z);
        let integral: C64 = (0..nb)
            .map(|a| mz[a] * (0..nb).map(|b| model.coeffs[(a, b)] * s[b]).sum::<C64>())
            .sum::<C64>()
            * scale;
        worst = worst.max((integral - f.eval(z)).norm());
    }
    Ok(worst)
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    basis: MonomialBasis,
    #[serde(rename = "C")]
    c: Vec<[f64; 2]>,
    effective_rank: usize,
    volume_estimate: f64,
    provenance: Provenance,
}

impl Serialize for KernelModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.coeffs.nrows();
        let mut c = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let v = self.coeffs[(a, b)];
                c.push([v.re, v.im]);
            }
        }
        ModelJson {
            basis: self.basis.clone(),
            c,
            effective_rank: self.effective_rank,
            volume_estimate: self.volume_estimate,
            provenance: self.provenance.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KernelModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ModelJson::deserialize(d)?;
        let n = raw.basis.len();
        if raw.c.len() != n * n {
            return Err(D::Error::custom(format!("C has {} entries, expected {}", raw.c.len(), n * n)));
        }
        let coeffs = CMat::from_fn(n, n, |a, b| {
            let [re, im] = raw.c[a * n + b];
            C64::new(re, im)
        });
        Ok(KernelModel {
            basis: raw.basis,
            coeffs,
            effective_rank: raw.effective_rank,
            volume_estimate: raw.volume_estimate,
            provenance: raw.provenance,
        })
    }
}
