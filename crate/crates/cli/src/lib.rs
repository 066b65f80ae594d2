//! Library side of the `bergman-lab` command: run configuration and the
//! subcommands, each returning its output and exit code so they can be
//! driven from tests.

mod config;

use std::path::Path;

use anyhow::{bail, Context, Result};
use bergman_lab::geometry::{
    diagram_residual, extract_linear, grid_csv, minimality_report, representativity_report, t_matrix,
    transformation_report, unitarity_report, GridQuantity, GridSlice,
};
use bergman_lab::kernel::build_model;
use bergman_lab::sampling::{probes, sample};
use bergman_lab::weight::{
    center_commutes, classify, equivariant_monomials, linear_forced, reduce, surviving_indices, CoefficientClass,
    DEFAULT_BOUND,
};
use bergman_lab::{BergmanKernel, ClosedForm, ComplexPoint, DomainSpec, ReportKind, VerificationReport, Weight};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{parse_map, parse_point, KernelChoice, Overrides, RunConfig, SEED_ENV};

/// Exit code when a check ran but did not meet its expectation.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit code for invalid input or a runtime error.
pub const EXIT_ERROR: u8 = 2;

/// Text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `config.out` when set, otherwise returns it for stdout.
fn emit(config: &RunConfig, text: String) -> Result<String> {
    match &config.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("cannot write `{}`", path.display()))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn complex_json(z: C) -> Value {
    json!([z.re, z.im])
}

pub fn cmd_catalog() -> Result<Output> {
    let entries: Vec<Value> = bergman_lab::catalog()
        .iter()
        .map(|spec| {
            let mut v = serde_json::to_value(spec).expect("domain specs serialize");
            v["volume"] = json!(spec.known_volume);
            v["reinhardt"] = json!(spec.kind.is_reinhardt());
            v["closed_form"] = json!(ClosedForm::from_spec(spec).is_ok());
            v
        })
        .collect();
    Ok(Output::ok(pretty(&entries)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightsAction {
    Classify { m1: u32, m2: u32 },
    Surviving { m1: u32, m2: u32, class: CoefficientClass, bound: u32 },
    Equivariant { m1: u32, m2: u32, component: usize, bound: u32 },
}

pub fn parse_class(s: &str) -> Result<CoefficientClass> {
    match s {
        "kernel" => Ok(CoefficientClass::Kernel),
        "c" => Ok(CoefficientClass::C),
        "c_prime" | "cprime" => Ok(CoefficientClass::CPrime),
        other => bail!("unknown coefficient class `{other}` (kernel, c, c_prime)"),
    }
}

pub fn cmd_weights(action: &WeightsAction) -> Result<Output> {
    let indices = |v: Vec<bergman_lab::MultiIndex>| -> Value { v.into_iter().map(|k| json!(k.0)).collect() };
    let value = match *action {
        WeightsAction::Classify { m1, m2 } => {
            let w = Weight::pair(m1, m2)?;
            let (r, g) = reduce(&w)?;
            let class = classify(&w)?;
            json!({
                "weight": w,
                "reduced": r,
                "gcd": g,
                "classification": class,
                "class": class,
                "linear_forced": linear_forced(&w, DEFAULT_BOUND)?,
                "center_commutes": center_commutes(&w)?,
            })
        }
        WeightsAction::Surviving { m1, m2, class, bound } => {
            let w = Weight::pair(m1, m2)?;
            json!({ "weight": w, "class": class, "bound": bound, "indices": indices(surviving_indices(&w, class, bound)?) })
        }
        WeightsAction::Equivariant { m1, m2, component, bound } => {
            let w = Weight::pair(m1, m2)?;
            json!({
                "weight": w,
                "component": component,
                "bound": bound,
                "monomials": indices(equivariant_monomials(&w, component, bound)?),
            })
        }
    };
    Ok(Output::ok(pretty(&value)?))
}

fn is_map_check(kind: ReportKind) -> bool {
    !matches!(kind, ReportKind::Minimality | ReportKind::Representativity)
}

/// The kernel used for `spec` under the configured choice.
pub fn kernel_for(config: &RunConfig, spec: &DomainSpec, map_check: bool) -> Result<Box<dyn BergmanKernel>> {
    let closed = ClosedForm::from_spec(spec);
    match (config.kernel, closed) {
        (KernelChoice::Closed, Ok(k)) => Ok(Box::new(k)),
        (KernelChoice::Closed, Err(_)) => bail!("`{}` has no closed-form kernel", spec.id()),
        (KernelChoice::Auto, Ok(k)) if map_check => Ok(Box::new(k)),
        _ => Ok(Box::new(build_model(spec, &config.model_config(spec)?)?)),
    }
}

pub fn cmd_kernel_build(config: &RunConfig) -> Result<Output> {
    let spec = config.domain_or("disk")?;
    let model = build_model(&spec, &config.model_config(&spec)?)?;
    Ok(Output::ok(emit(config, pretty(&model)?)?))
}

pub fn cmd_kernel_eval(config: &RunConfig, z: &[C], w: &[C], model_file: Option<&Path>) -> Result<Output> {
    let spec = config.domain_or("disk")?;
    let kernel: Box<dyn BergmanKernel> = match model_file {
        Some(path) => {
            let raw = std::fs::read_to_string(path).with_context(|| format!("cannot read model `{}`", path.display()))?;
            Box::new(serde_json::from_str::<bergman_lab::KernelModel>(&raw).with_context(|| format!("invalid model `{}`", path.display()))?)
        }
        None => kernel_for(config, &spec, false)?,
    };
    let k = kernel.eval(z, w)?;
    let t = match t_matrix(kernel.as_ref(), z, w) {
        Ok(t) => {
            let rows: Vec<Value> = t.entries.row_iter().map(|r| r.iter().map(|x| complex_json(*x)).collect()).collect();
            Value::Array(rows)
        }
        Err(bergman_lab::Error::KernelNearZero(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let point = |p: &[C]| -> Value { p.iter().map(|x| complex_json(*x)).collect() };
    let value = json!({
        "domain": kernel.label(),
        "source": kernel.source(),
        "z": point(z),
        "w": point(w),
        "K": complex_json(k),
        "T": t,
    });
    Ok(Output::ok(emit(config, pretty(&value)?)?))
}

fn default_map(kind: ReportKind, spec: &DomainSpec) -> &'static str {
    match (spec.id(), kind) {
        ("E_half2", _) => "zapalowski",
        ("disk", ReportKind::Linearity) => "rotation:0.7",
        ("disk", _) => "mobius:0.3",
        _ => "rotation:0.7",
    }
}

/// Runs one check. The returned report embeds the resolved configuration
/// (without the output path, so reports do not depend on where they go).
pub fn run_check(kind: ReportKind, config: &RunConfig) -> Result<VerificationReport> {
    let spec = config.domain_or("disk")?;
    let mut resolved = RunConfig { domain: Some(spec.id().to_string()), out: None, ..config.clone() };
    let ps: Vec<ComplexPoint> = probes(&spec, config.seed)?;
    if ps.is_empty() {
        bail!("no probe points for `{}`", spec.id());
    }
    let origin = vec![C::new(0.0, 0.0); spec.dimension()];
    let needs_origin = matches!(kind, ReportKind::Minimality | ReportKind::Representativity | ReportKind::Linearity);
    if needs_origin && !spec.contains_origin() {
        bail!("`{}` does not contain the origin", spec.id());
    }
    let center = if spec.contains_origin() { origin } else { ps[0].clone() };
    let kernel = kernel_for(config, &spec, is_map_check(kind))?;
    let k = kernel.as_ref();
    let map = if is_map_check(kind) {
        let text = config.map.clone().unwrap_or_else(|| default_map(kind, &spec).to_string());
        resolved.map = Some(text.clone());
        Some(parse_map(&text, &spec)?)
    } else {
        resolved.map = None;
        None
    };
    let mut report = match (kind, &map) {
        (ReportKind::Minimality, _) => minimality_report(k, &ps, &center)?,
        (ReportKind::Representativity, _) => representativity_report(k, &ps, &center)?,
        (ReportKind::Unitarity, Some(m)) => unitarity_report(k, k, m, &center)?,
        (ReportKind::Diagram, Some(m)) => diagram_residual(k, k, m, &center, &ps)?,
        (ReportKind::Transformation, Some(m)) => {
            let pairs: Vec<_> = (0..10.min(ps.len())).map(|i| (ps[i].clone(), ps[(i + 5) % ps.len()].clone())).collect();
            transformation_report(k, k, m, &pairs)?
        }
        (ReportKind::Linearity, Some(m)) => extract_linear(k, k, m, &ps)?.1,
        _ => unreachable!("map checks always carry a map"),
    };
    if let Some(tier) = config.tol_tier {
        report = report.with_tier(tier);
    }
    report.provenance.config = Some(serde_json::to_value(&resolved)?);
    Ok(report)
}

pub fn cmd_verify(kind: ReportKind, config: &RunConfig) -> Result<Output> {
    let report = run_check(kind, config)?;
    let code = if report.verdict { 0 } else { EXIT_CHECK_FAILED };
    Ok(Output { stdout: emit(config, pretty(&report)?)?, code })
}

pub fn cmd_grid(config: &RunConfig, quantity: GridQuantity, steps: usize, extent: Option<f64>) -> Result<Output> {
    let spec = config.domain_or("disk")?;
    if !spec.contains_origin() {
        bail!("grids are taken against w = 0, which is outside `{}`", spec.id());
    }
    let kernel = kernel_for(config, &spec, false)?;
    let mut slice = GridSlice::default_for(&spec, steps);
    if let Some(e) = extent {
        slice.extent = e;
    }
    Ok(Output::ok(emit(config, grid_csv(kernel.as_ref(), &spec, quantity, &slice)?)?))
}

pub fn cmd_sample(config: &RunConfig) -> Result<Output> {
    let spec = config.domain_or("disk")?;
    let cloud = sample(&spec, config.samples, config.seed)?;
    Ok(Output::ok(emit(config, cloud.to_csv())?))
}

/// One entry of the suite plan. `expected: None` marks informational checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedCheck {
    pub kind: ReportKind,
    pub domain: &'static str,
    pub map: Option<&'static str>,
    pub expected: Option<bool>,
}

/// Minimality and representativity on every weighted catalog domain, the
/// disk/Möbius map checks, and linearity extraction on D1f (expected to
/// hold) and on E_half2 with its nonlinear automorphism (expected to fail).
pub fn suite_plan() -> Vec<PlannedCheck> {
    let check = |kind, domain, map, expected| PlannedCheck { kind, domain, map, expected };
    let mut plan = Vec::new();
    for spec in bergman_lab::catalog().into_iter().filter(|s| s.weight.is_some()) {
        plan.push(check(ReportKind::Minimality, spec.id(), None, Some(true)));
    }
    for spec in bergman_lab::catalog().into_iter().filter(|s| s.weight.is_some()) {
        // representativity is only claimed for circular and normal weights
        let expected = match spec.id() {
            "D2" | "G2" | "E_half2" => None,
            _ => Some(true),
        };
        plan.push(check(ReportKind::Representativity, spec.id(), None, expected));
    }
    for kind in [ReportKind::Diagram, ReportKind::Unitarity, ReportKind::Transformation] {
        plan.push(check(kind, "disk", Some("mobius:0.3"), Some(true)));
    }
    plan.push(check(ReportKind::Linearity, "D1f", Some("rotation:0.7"), Some(true)));
    plan.push(check(ReportKind::Linearity, "E_half2", Some("zapalowski"), Some(false)));
    plan
}

pub fn cmd_suite(config: &RunConfig) -> Result<Output> {
    let plan = suite_plan();
    let reports: Vec<Result<VerificationReport>> = plan
        .par_iter()
        .map(|c| {
            let mut cc = config.with_domain(c.domain);
            cc.map = c.map.map(str::to_string);
            run_check(c.kind, &cc)
        })
        .collect();
    let out_dir = config.out.clone();
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    }
    let mut entries = Vec::new();
    let mut failed = 0;
    for (i, (check, report)) in plan.iter().zip(reports).enumerate() {
        let report = report.with_context(|| format!("{} on {}", check.kind, check.domain))?;
        let ok = check.expected.is_none_or(|e| e == report.verdict);
        failed += usize::from(!ok);
        let file = format!("{:02}-{}-{}.json", i + 1, check.kind, check.domain);
        if let Some(dir) = &out_dir {
            std::fs::write(dir.join(&file), pretty(&report)?)?;
        }
        entries.push(json!({
            "kind": check.kind,
            "domain": check.domain,
            "map": check.map,
            "residuals": report.residuals,
            "verdict": report.verdict,
            "expected": check.expected,
            "ok": ok,
            "report": out_dir.as_ref().map(|_| file),
        }));
    }
    let resolved = RunConfig { out: None, domain: None, map: None, ..config.clone() };
    let summary = json!({
        "total": entries.len(),
        "passed": entries.len() - failed,
        "failed": failed,
        "config": resolved,
        "checks": entries,
    });
    let text = pretty(&summary)?;
    if let Some(dir) = &out_dir {
        std::fs::write(dir.join("summary.json"), &text)?;
    }
    Ok(Output { stdout: text, code: if failed == 0 { 0 } else { EXIT_CHECK_FAILED } })
}
