//! The catalog of bounded test domains in ℂ and ℂ².
//!
//! Each domain is described by a [`DomainSpec`]: a membership predicate, a
//! bounding box over the real coordinates `(re z₁, im z₁, re z₂, im z₂)`, and
//! optionally the weight of its quasi-circular symmetry.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::weight::Weight;

/// An owned point of ℂⁿ.
pub type ComplexPoint = Vec<C64>;

/// Inner radius used by the catalog annulus.
pub const DEFAULT_ANNULUS_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Disk,
    Annulus { inner: f64 },
    Polydisk2,
    Ball2,
    /// `𝔹² ∩ {|z₁³ + z₂²| < 1}`; the extra constraint is vacuous on the ball.
    D1,
    /// `𝔹² ∩ {|z₁² + z₂| < 1}`.
    D2,
    /// `|z₁|² + |z₂|² + |z₁³ + z₂²| < 1`, a non-Reinhardt (2,3)-circular fixture.
    D1f,
    /// Symmetrized bidisk.
    G2,
    /// Symmetrized (1/2, 2)-ellipsoid.
    EHalf2,
}

impl DomainKind {
    pub fn id(&self) -> &'static str {
        match self {
            DomainKind::Disk => "disk",
            DomainKind::Annulus { .. } => "annulus",
            DomainKind::Polydisk2 => "polydisk2",
            DomainKind::Ball2 => "ball2",
            DomainKind::D1 => "D1",
            DomainKind::D2 => "D2",
            DomainKind::D1f => "D1f",
            DomainKind::G2 => "G2",
            DomainKind::EHalf2 => "E_half2",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            DomainKind::Disk | DomainKind::Annulus { .. } => 1,
            _ => 2,
        }
    }

    /// True for domains invariant under independent coordinate rotations.
    pub fn is_reinhardt(&self) -> bool {
        matches!(
            self,
            DomainKind::Disk | DomainKind::Annulus { .. } | DomainKind::Polydisk2 | DomainKind::Ball2
        )
    }
}

/// A catalog domain together with its sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub weight: Option<Weight>,
    /// Intervals for each real coordinate, `2n` of them.
    pub bounding_box: Vec<(f64, f64)>,
    pub known_volume: Option<f64>,
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

fn boxes(n: usize, per: &[(f64, f64)]) -> Vec<(f64, f64)> {
    assert_eq!(per.len(), 2 * n);
    per.to_vec()
}

impl DomainSpec {
    pub fn new(kind: DomainKind) -> Result<Self> {
        let unit = (-1.0, 1.0);
        let (weight, bbox, volume): (Option<Vec<u32>>, Vec<(f64, f64)>, Option<f64>) = match kind {
            DomainKind::Disk => (Some(vec![1]), boxes(1, &[unit, unit]), Some(PI)),
            DomainKind::Annulus { inner } => {
                if !(inner > 0.0 && inner < 1.0) {
                    return Err(Error::InvalidDomain(format!("annulus radius {inner} not in (0,1)")));
                }
                (None, boxes(1, &[unit, unit]), Some(PI * (1.0 - inner * inner)))
            }
            DomainKind::Polydisk2 => (Some(vec![1, 1]), vec![unit; 4], Some(PI * PI)),
            DomainKind::Ball2 => (Some(vec![1, 1]), vec![unit; 4], Some(PI * PI / 2.0)),
            DomainKind::D1 => (Some(vec![2, 3]), vec![unit; 4], Some(PI * PI / 2.0)),
            DomainKind::D2 => (Some(vec![1, 2]), vec![unit; 4], None),
            DomainKind::D1f => (Some(vec![2, 3]), vec![unit; 4], None),
            DomainKind::G2 => (
                Some(vec![1, 2]),
                vec![(-2.0, 2.0), (-2.0, 2.0), unit, unit],
                Some(PI * PI / 2.0),
            ),
            DomainKind::EHalf2 => (
                Some(vec![1, 2]),
                vec![unit, unit, (-0.25, 0.25), (-0.25, 0.25)],
                Some(PI * PI / 30.0),
            ),
        };
        Ok(DomainSpec {
            kind,
            weight: weight.map(Weight::new).transpose()?,
            bounding_box: bbox,
            known_volume: volume,
        })
    }

    /// Looks up a catalog domain by id. `annulus` uses the default radius.
    pub fn by_id(id: &str) -> Result<Self> {
        let kind = match id {
            "disk" => DomainKind::Disk,
            "annulus" => DomainKind::Annulus { inner: DEFAULT_ANNULUS_RADIUS },
            "polydisk2" => DomainKind::Polydisk2,
            "ball2" => DomainKind::Ball2,
            "D1" => DomainKind::D1,
            "D2" => DomainKind::D2,
            "D1f" => DomainKind::D1f,
            "G2" => DomainKind::G2,
            "E_half2" => DomainKind::EHalf2,
            other => return Err(Error::UnknownDomain(other.to_string())),
        };
        Self::new(kind)
    }

    pub fn annulus(inner: f64) -> Result<Self> {
        Self::new(DomainKind::Annulus { inner })
    }

    pub fn id(&self) -> &'static str {
        self.kind.id()
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        if let DomainKind::Annulus { inner } = self.kind {
            p.insert("r".to_string(), inner);
        }
        p
    }

    pub fn box_volume(&self) -> f64 {
        self.bounding_box.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// True when the origin belongs to the domain.
    pub fn contains_origin(&self) -> bool {
        !matches!(self.kind, DomainKind::Annulus { .. })
    }

    pub fn membership(&self, z: &[C64]) -> Result<bool> {
        let n = self.dimension();
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        Ok(self.contains(z))
    }

    /// Membership without the dimension check. Callers guarantee `z.len()`.
    pub(crate) fn contains(&self, z: &[C64]) -> bool {
        let in_ball = |z: &[C64]| z[0].norm_sqr() + z[1].norm_sqr() < 1.0;
        match self.kind {
            DomainKind::Disk => z[0].norm_sqr() < 1.0,
            DomainKind::Annulus { inner } => {
                let m = z[0].norm();
                inner < m && m < 1.0
            }
            DomainKind::Polydisk2 => z[0].norm_sqr() < 1.0 && z[1].norm_sqr() < 1.0,
            DomainKind::Ball2 => in_ball(z),
            DomainKind::D1 => in_ball(z) && (z[0] * z[0] * z[0] + z[1] * z[1]).norm() < 1.0,
            DomainKind::D2 => in_ball(z) && (z[0] * z[0] + z[1]).norm() < 1.0,
            DomainKind::D1f => {
                z[0].norm_sqr() + z[1].norm_sqr() + (z[0] * z[0] * z[0] + z[1] * z[1]).norm() < 1.0
            }
            DomainKind::G2 => {
                let (a, b) = symmetric_roots(z[0], z[1]);
                a.norm() < 1.0 && b.norm() < 1.0
            }
            DomainKind::EHalf2 => {
                let (a, b) = symmetric_roots(z[0], z[1]);
                a.norm() + b.norm() < 1.0
            }
        }
    }
}

/// Roots of `λ² − s λ + p`, larger modulus first.
///
/// The larger root is formed without cancellation and the smaller one is
/// recovered from the product `p / λ₁`.
pub fn symmetric_roots(s: C64, p: C64) -> (C64, C64) {
    let d = (s * s - 4.0 * p).sqrt();
    // pick the sign that adds s and d constructively
    let big = if (s.conj() * d).re >= 0.0 { (s + d) * 0.5 } else { (s - d) * 0.5 };
    if big == C64::new(0.0, 0.0) {
        (big, big)
    } else {
        (big, p / big)
    }
}

/// All catalog entries.
pub fn catalog() -> Vec<DomainSpec> {
    [
        DomainKind::Disk,
        DomainKind::Annulus { inner: DEFAULT_ANNULUS_RADIUS },
        DomainKind::Polydisk2,
        DomainKind::Ball2,
        DomainKind::D1,
        DomainKind::D2,
        DomainKind::D1f,
        DomainKind::G2,
        DomainKind::EHalf2,
    ]
    .into_iter()
    .map(|k| DomainSpec::new(k).expect("catalog entries are valid"))
    .collect()
}

#[derive(Serialize, Deserialize)]
struct DomainJson {
    id: String,
    dimension: usize,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    weight: Option<Weight>,
    bounding_box: Vec<[f64; 2]>,
}

impl Serialize for DomainSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainJson {
            id: self.id().to_string(),
            dimension: self.dimension(),
            params: self.params(),
            weight: self.weight.clone(),
            bounding_box: self.bounding_box.iter().map(|&(a, b)| [a, b]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DomainJson::deserialize(d)?;
        DomainSpec::from_json_parts(raw).map_err(D::Error::custom)
    }
}

impl DomainSpec {
    fn from_json_parts(raw: DomainJson) -> Result<Self> {
        let mut spec = match raw.id.as_str() {
            "annulus" => {
                let r = raw.params.get("r").copied().unwrap_or(DEFAULT_ANNULUS_RADIUS);
                DomainSpec::annulus(r)?
            }
            id => DomainSpec::by_id(id)?,
        };
        if raw.dimension != spec.dimension() {
            return Err(Error::DimensionMismatch { expected: spec.dimension(), got: raw.dimension });
        }
        if raw.weight.is_some() && raw.weight != spec.weight {
            return Err(Error::InvalidDomain(format!("weight does not match catalog entry `{}`", raw.id)));
        }
        // a declared box may be larger than the catalog one, never smaller
        if !raw.bounding_box.is_empty() {
            if raw.bounding_box.len() != spec.bounding_box.len() {
                return Err(Error::InvalidDomain("bounding box has the wrong length".into()));
            }
            let covers = raw
                .bounding_box
                .iter()
                .zip(&spec.bounding_box)
                .all(|(&[a, b], &(lo, hi))| a <= lo && b >= hi);
            if !covers {
                return Err(Error::InvalidDomain("bounding box does not contain the domain".into()));
            }
            spec.bounding_box = raw.bounding_box.iter().map(|&[a, b]| (a, b)).collect();
        }
        Ok(spec)
    }
}
