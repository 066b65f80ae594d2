//! Verification reports: named residuals, their tolerances and a verdict.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::ComplexPoint;
use crate::kernel::{KernelInfo, KernelSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Minimality,
    Representativity,
    Unitarity,
    Diagram,
    Transformation,
    Linearity,
}

impl ReportKind {
    pub const ALL: [ReportKind; 6] = [
        ReportKind::Minimality,
        ReportKind::Representativity,
        ReportKind::Unitarity,
        ReportKind::Diagram,
        ReportKind::Transformation,
        ReportKind::Linearity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Minimality => "minimality",
            ReportKind::Representativity => "representativity",
            ReportKind::Unitarity => "unitarity",
            ReportKind::Diagram => "diagram",
            ReportKind::Transformation => "transformation",
            ReportKind::Linearity => "linearity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tolerance tier: "exact" for closed forms and exact Grams, "qmc" when any
/// kernel involved was built from a sampled Gram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Exact,
    Qmc,
}

impl Tier {
    pub fn for_sources(sources: &[KernelSource]) -> Self {
        if sources.contains(&KernelSource::Qmc) {
            Tier::Qmc
        } else {
            Tier::Exact
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Tier::Exact),
            "qmc" => Some(Tier::Qmc),
            _ => None,
        }
    }
}

/// Residual names and their tolerance for one kind of check.
pub fn tolerances(kind: ReportKind, tier: Tier) -> BTreeMap<String, f64> {
    let (exact, qmc): (&[(&str, f64)], &[(&str, f64)]) = match kind {
        ReportKind::Minimality => (&[("k_variation", 1e-8), ("volume_constant", 1e-8)], &[("k_variation", 0.05), ("volume_constant", 0.05)]),
        ReportKind::Representativity => (&[("t_variation", 1e-8), ("off_diagonal", 1e-8)], &[("t_variation", 0.1), ("off_diagonal", 0.1)]),
        ReportKind::Unitarity => (&[("unitarity", 1e-8)], &[("unitarity", 0.05)]),
        ReportKind::Diagram => (&[("diagram", 1e-6)], &[("diagram", 0.1)]),
        ReportKind::Transformation => (&[("kernel", 1e-10), ("t_matrix", 1e-8)], &[("kernel", 0.1), ("t_matrix", 0.1)]),
        ReportKind::Linearity => (&[("linearity", 1e-8)], &[("linearity", 0.1)]),
    };
    let table = match tier {
        Tier::Exact => exact,
        Tier::Qmc => qmc,
    };
    table.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub tier: Tier,
    pub kernels: Vec<KernelInfo>,
    pub probe_count: usize,
    pub skipped_probes: usize,
    pub version: String,
    /// Fully resolved run configuration, filled in by drivers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: ReportKind,
    pub domain: String,
    pub map: Option<String>,
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub verdict: bool,
    /// Probe points as `[[re, im], ...]` per point.
    #[serde(with = "points_serde")]
    pub probes: Vec<ComplexPoint>,
    pub provenance: ReportProvenance,
}

impl VerificationReport {
    /// Builds a report whose verdict is "every residual is finite and within
    /// its tolerance"; a report with skipped probes only passes if at least
    /// one probe was used.
    pub fn new(
        kind: ReportKind,
        domain: impl Into<String>,
        map: Option<String>,
        residuals: BTreeMap<String, f64>,
        tier: Tier,
        kernels: Vec<KernelInfo>,
        probes: Vec<ComplexPoint>,
        skipped_probes: usize,
    ) -> Self {
        let tolerances = tolerances(kind, tier);
        let within = tolerances.iter().all(|(name, tol)| residuals.get(name).is_some_and(|r| r.is_finite() && r <= tol));
        let verdict = within && skipped_probes < probes.len().max(1);
        VerificationReport {
            kind,
            domain: domain.into(),
            map,
            residuals,
            tolerances,
            verdict,
            provenance: ReportProvenance {
                tier,
                kernels,
                probe_count: probes.len(),
                skipped_probes,
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: None,
            },
            probes,
        }
    }

    /// Re-evaluates the verdict against another tier's tolerances.
    pub fn with_tier(mut self, tier: Tier) -> Self {
        self.tolerances = tolerances(self.kind, tier);
        self.provenance.tier = tier;
        let within = self.tolerances.iter().all(|(name, tol)| self.residuals.get(name).is_some_and(|r| r.is_finite() && r <= tol));
        self.verdict = within && self.provenance.skipped_probes < self.probes.len().max(1);
        self
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.residuals.get(name).copied().unwrap_or(f64::NAN)
    }
}

mod points_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::domain::ComplexPoint;
    use crate::linalg::C64;

    pub fn serialize<S: Serializer>(points: &[ComplexPoint], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = points.iter().map(|p| p.iter().map(|z| [z.re, z.im]).collect()).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexPoint>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw.into_iter().map(|p| p.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect())
    }
}
