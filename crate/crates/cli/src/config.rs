use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bergman_lab::holomap::HoloMap;
use bergman_lab::kernel::{Cutoff, ModelConfig, DEFAULT_FLOOR_RATIO};
use bergman_lab::{DomainSpec, Tier};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "BERGMAN_LAB_SEED";

/// Which kernel a check runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    /// Truncated model for minimality and representativity; the closed form,
    /// when the domain has one, for checks involving a map.
    #[default]
    Auto,
    Closed,
    Model,
}

impl KernelChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(KernelChoice::Auto),
            "closed" => Ok(KernelChoice::Closed),
            "model" => Ok(KernelChoice::Model),
            other => bail!("unknown kernel choice `{other}` (auto, closed, model)"),
        }
    }
}

/// Everything a run depends on. Every field has a default; the resolved
/// value is embedded in each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<String>,
    pub seed: u64,
    pub samples: usize,
    /// Basis cutoff `N`; the domain default when absent.
    pub cutoff: Option<u32>,
    /// Weighted-degree cutoff instead of total degree; the domain default
    /// when absent.
    pub weighted: Option<bool>,
    pub floor: f64,
    /// Forces a tolerance tier instead of deriving it from the kernels.
    pub tol_tier: Option<Tier>,
    pub kernel: KernelChoice,
    pub map: Option<String>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: None,
            seed: 1,
            samples: 1_000_000,
            cutoff: None,
            weighted: None,
            floor: DEFAULT_FLOOR_RATIO,
            tol_tier: None,
            kernel: KernelChoice::Auto,
            map: None,
            out: None,
        }
    }
}

/// Values given on the command line; `None` leaves the lower layer alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub domain: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub cutoff: Option<u32>,
    pub weighted: Option<bool>,
    pub floor: Option<f64>,
    pub tol_tier: Option<Tier>,
    pub kernel: Option<KernelChoice>,
    pub map: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Layers, lowest first: built-in defaults, the seed environment
    /// variable, the JSON config file, command-line flags.
    pub fn resolve(file: Option<&Path>, env_seed: Option<&str>, flags: Overrides) -> Result<Self> {
        let mut config = RunConfig::default();
        if let Some(s) = env_seed {
            config.seed = s.trim().parse().with_context(|| format!("{SEED_ENV}=`{s}` is not an unsigned integer"))?;
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
            let mut value: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("config `{}` is not valid JSON", path.display()))?;
            // a file without a seed keeps the environment seed
            if let Some(obj) = value.as_object_mut() {
                obj.entry("seed").or_insert(serde_json::json!(config.seed));
            }
            config = serde_json::from_value(value).with_context(|| format!("invalid config `{}`", path.display()))?;
        }
        let Overrides { domain, seed, samples, cutoff, weighted, floor, tol_tier, kernel, map, out } = flags;
        config.domain = domain.or(config.domain);
        config.seed = seed.unwrap_or(config.seed);
        config.samples = samples.unwrap_or(config.samples);
        config.cutoff = cutoff.or(config.cutoff);
        config.weighted = weighted.or(config.weighted);
        config.floor = floor.unwrap_or(config.floor);
        config.tol_tier = tol_tier.or(config.tol_tier);
        config.kernel = kernel.unwrap_or(config.kernel);
        config.map = map.or(config.map);
        config.out = out.or(config.out);
        Ok(config)
    }

    pub fn domain_or(&self, default: &str) -> Result<DomainSpec> {
        let id = self.domain.as_deref().unwrap_or(default);
        Ok(DomainSpec::by_id(id)?)
    }

    pub fn with_domain(&self, id: &str) -> Self {
        RunConfig { domain: Some(id.to_string()), ..self.clone() }
    }

    /// Model settings for `spec`: the domain defaults with this config's
    /// overrides applied.
    pub fn model_config(&self, spec: &DomainSpec) -> Result<ModelConfig> {
        let mut mc = ModelConfig::default_for(spec);
        mc.samples = self.samples;
        mc.seed = self.seed;
        mc.floor_ratio = self.floor;
        let default_n = match &mc.cutoff {
            Cutoff::TotalDegree { n } | Cutoff::WeightedDegree { n, .. } => *n,
        };
        let default_weighted = matches!(mc.cutoff, Cutoff::WeightedDegree { .. });
        let n = self.cutoff.unwrap_or(default_n);
        mc.cutoff = if self.weighted.unwrap_or(default_weighted) {
            let weight = spec.weight.clone().with_context(|| format!("`{}` has no weight for a weighted cutoff", spec.id()))?;
            Cutoff::WeightedDegree { weight, n }
        } else {
            Cutoff::TotalDegree { n }
        };
        Ok(mc)
    }
}

/// Parses a map description:
/// `identity`, `swap`, `rotation:θ` (weighted by the domain weight),
/// `mobius:a` or `mobius:re,im`, `zapalowski` or `zapalowski:θ` (ζ = e^{iθ}),
/// or a path to a map JSON file.
pub fn parse_map(text: &str, spec: &DomainSpec) -> Result<HoloMap> {
    if text.ends_with(".json") || text.contains('/') {
        let raw = std::fs::read_to_string(text).with_context(|| format!("cannot read map `{text}`"))?;
        return serde_json::from_str(&raw).with_context(|| format!("invalid map JSON `{text}`"));
    }
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    let number = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number `{s}` in map `{text}`"));
    let map = match (name, arg) {
        ("identity", None) => HoloMap::identity(spec.dimension()),
        ("swap", None) => HoloMap::swap(),
        ("rotation", Some(a)) => {
            let weight = spec.weight.clone().with_context(|| format!("`{}` has no rotation weight", spec.id()))?;
            HoloMap::rotation_weighted(&weight, number(a)?)
        }
        ("mobius", Some(a)) => {
            let a = match a.split_once(',') {
                Some((re, im)) => C::new(number(re)?, number(im)?),
                None => C::new(number(a)?, 0.0),
            };
            HoloMap::mobius_disk(a)?
        }
        ("zapalowski", None) => HoloMap::zapalowski(C::new(1.0, 0.0))?,
        ("zapalowski", Some(t)) => HoloMap::zapalowski(C::from_polar(1.0, number(t)?))?,
        _ => bail!("unknown map `{text}`"),
    };
    if map.dim_in() != spec.dimension() {
        bail!("map `{text}` acts on ℂ^{} but `{}` lives in ℂ^{}", map.dim_in(), spec.id(), spec.dimension());
    }
    Ok(map)
}

/// Parses a point written as `re,im;re,im` (the imaginary part may be
/// omitted).
pub fn parse_point(text: &str) -> Result<Vec<C>> {
    text.split(';')
        .map(|coord| {
            let parts: Vec<&str> = coord.split(',').map(str::trim).collect();
            let num = |s: &str| s.parse::<f64>().with_context(|| format!("bad coordinate `{coord}`"));
            match parts.as_slice() {
                [re] => Ok(C::new(num(re)?, 0.0)),
                [re, im] => Ok(C::new(num(re)?, num(im)?)),
                _ => bail!("bad coordinate `{coord}`"),
            }
        })
        .collect()
}
