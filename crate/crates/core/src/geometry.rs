//! The matrix `T(z, w)`, Bergman mappings, `L(φ, p)`, and the verification
//! reports built on them.
//!
//! `T(z, w)[i][j] = ∂² log K / ∂conj(w_i) ∂z_j`, evaluated from the kernel jet,
//! so no finite differences are involved.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{ComplexPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::holomap::HoloMap;
use crate::kernel::BergmanKernel;
use crate::linalg::{apply, hermitian_inv_sqrt, hermitian_sqrt, max_abs, max_diff, unitarity_defect, CMat, C64};
use crate::report::{ReportKind, Tier, VerificationReport};

/// `|K(z, w)|` at or below this makes `T` undefined.
pub const KERNEL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TMatrix {
    pub entries: CMat,
    pub at: (ComplexPoint, ComplexPoint),
    pub kernel_value: C64,
}

pub fn t_matrix(kernel: &dyn BergmanKernel, z: &[C64], w: &[C64]) -> Result<TMatrix> {
    let jet = kernel.jet(z, w)?;
    let k = jet.value;
    if k.norm() <= KERNEL_FLOOR {
        return Err(Error::KernelNearZero(k.norm()));
    }
    let n = z.len();
    let k2 = k * k;
    let entries = CMat::from_fn(n, n, |i, j| (k * jet.mixed[(i, j)] - jet.dwbar[i] * jet.dz[j]) / k2);
    Ok(TMatrix { entries, at: (z.to_vec(), w.to_vec()), kernel_value: k })
}

/// `σ_p(z) = T(p,p)^{-1/2} (∂_{conj w} log K(z, w) − ∂_{conj w} log K(p, w))|_{w=p}`.
pub struct BergmanMap<'a> {
    kernel: &'a dyn BergmanKernel,
    pub center: ComplexPoint,
    pub t_inv_sqrt: CMat,
    pub t_center: CMat,
    /// `∂_{conj w} log K(p, w)` at `w = p`.
    pub offset: Vec<C64>,
}

impl<'a> BergmanMap<'a> {
    pub fn new(kernel: &'a dyn BergmanKernel, p: &[C64]) -> Result<Self> {
        let jet = kernel.jet(p, p)?;
        if jet.value.norm() <= KERNEL_FLOOR {
            return Err(Error::KernelNearZero(jet.value.norm()));
        }
        let t = t_matrix(kernel, p, p)?;
        Ok(BergmanMap {
            kernel,
            center: p.to_vec(),
            t_inv_sqrt: hermitian_inv_sqrt(&t.entries)?,
            t_center: t.entries,
            offset: jet.dwbar.iter().map(|d| d / jet.value).collect(),
        })
    }

    pub fn eval(&self, z: &[C64]) -> Result<ComplexPoint> {
        let jet = self.kernel.jet(z, &self.center)?;
        if jet.value.norm() <= KERNEL_FLOOR {
            return Err(Error::KernelNearZero(jet.value.norm()));
        }
        let g: Vec<C64> = jet.dwbar.iter().zip(&self.offset).map(|(d, o)| d / jet.value - o).collect();
        Ok(apply(&self.t_inv_sqrt, &g))
    }

    /// `J(σ_p, z) = T(p,p)^{-1/2} T(z, p)`.
    pub fn jacobian(&self, z: &[C64]) -> Result<CMat> {
        Ok(&self.t_inv_sqrt * t_matrix(self.kernel, z, &self.center)?.entries)
    }
}

pub fn bergman_map<'a>(kernel: &'a dyn BergmanKernel, p: &[C64]) -> Result<BergmanMap<'a>> {
    BergmanMap::new(kernel, p)
}

/// `L(φ, p) = T'(φp, φp)^{-1/2} (J(φ, p)*)^{-1} T(p, p)^{1/2}`.
pub fn l_matrix(kernel_d: &dyn BergmanKernel, kernel_target: &dyn BergmanKernel, map: &HoloMap, p: &[C64]) -> Result<CMat> {
    let j = map.jacobian(p)?;
    let det = j.determinant();
    if !(det.norm() > 1e-14) {
        return Err(Error::SingularJacobian);
    }
    let j_adj_inv = j.adjoint().try_inverse().ok_or(Error::SingularJacobian)?;
    let q = map.eval(p)?;
    let t_target = t_matrix(kernel_target, &q, &q)?;
    let t_d = t_matrix(kernel_d, p, p)?;
    Ok(hermitian_inv_sqrt(&t_target.entries)? * j_adj_inv * hermitian_sqrt(&t_d.entries)?)
}

fn tier_of(kernels: &[&dyn BergmanKernel]) -> Tier {
    Tier::for_sources(&kernels.iter().map(|k| k.source()).collect::<Vec<_>>())
}

fn infos(kernels: &[&dyn BergmanKernel]) -> Vec<crate::kernel::KernelInfo> {
    kernels.iter().map(|k| k.info()).collect()
}

fn named(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Residuals: `k_variation = max |K(z, c) − K(c, c)| / |K(c, c)|` over the
/// probes and `volume_constant = |K(c, c) · Vol − 1|`.
pub fn minimality_report(kernel: &dyn BergmanKernel, probes: &[ComplexPoint], center: &[C64]) -> Result<VerificationReport> {
    let k0 = kernel.eval(center, center)?;
    let mut variation = 0.0_f64;
    for z in probes {
        variation = variation.max((kernel.eval(z, center)? - k0).norm() / k0.norm());
    }
    let volume_constant = (k0 * kernel.volume() - 1.0).norm();
    Ok(VerificationReport::new(
        ReportKind::Minimality,
        kernel.label(),
        None,
        named(&[("k_variation", variation), ("volume_constant", volume_constant)]),
        tier_of(&[kernel]),
        infos(&[kernel]),
        probes.to_vec(),
        0,
    ))
}

/// Residuals: `t_variation = max ‖T(z, c) − T(c, c)‖ / ‖T(c, c)‖` and
/// `off_diagonal = max |T(z, c)[i][j]|, i ≠ j`, relative to the largest
/// diagonal entry of `T(c, c)`. Norms are entrywise max.
pub fn representativity_report(kernel: &dyn BergmanKernel, probes: &[ComplexPoint], center: &[C64]) -> Result<VerificationReport> {
    let t0 = t_matrix(kernel, center, center)?.entries;
    let scale = max_abs(&t0);
    let diag_scale = (0..t0.nrows()).map(|i| t0[(i, i)].norm()).fold(0.0, f64::max);
    let mut variation = 0.0_f64;
    let mut off = 0.0_f64;
    for z in probes {
        let t = t_matrix(kernel, z, center)?.entries;
        variation = variation.max(max_abs(&(&t - &t0)) / scale);
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                if i != j {
                    off = off.max(t[(i, j)].norm() / diag_scale);
                }
            }
        }
    }
    Ok(VerificationReport::new(
        ReportKind::Representativity,
        kernel.label(),
        None,
        named(&[("t_variation", variation), ("off_diagonal", off)]),
        tier_of(&[kernel]),
        infos(&[kernel]),
        probes.to_vec(),
        0,
    ))
}

/// `‖L*L − I‖` at `p`.
pub fn unitarity_report(
    kernel_d: &dyn BergmanKernel,
    kernel_target: &dyn BergmanKernel,
    map: &HoloMap,
    p: &[C64],
) -> Result<VerificationReport> {
    let l = l_matrix(kernel_d, kernel_target, map, p)?;
    Ok(VerificationReport::new(
        ReportKind::Unitarity,
        kernel_d.label(),
        Some(map.name.clone()),
        named(&[("unitarity", unitarity_defect(&l))]),
        tier_of(&[kernel_d, kernel_target]),
        infos(&[kernel_d, kernel_target]),
        vec![p.to_vec()],
        0,
    ))
}

/// Max over probes of `‖σ'_{φ(p)}(φ(z)) − L(φ, p) σ_p(z)‖`. Probes where a
/// kernel is too close to zero are skipped and counted.
pub fn diagram_residual(
    kernel_d: &dyn BergmanKernel,
    kernel_target: &dyn BergmanKernel,
    map: &HoloMap,
    p: &[C64],
    probes: &[ComplexPoint],
) -> Result<VerificationReport> {
    let l = l_matrix(kernel_d, kernel_target, map, p)?;
    let sigma = BergmanMap::new(kernel_d, p)?;
    let sigma_target = BergmanMap::new(kernel_target, &map.eval(p)?)?;
    let mut worst = 0.0_f64;
    let mut skipped = 0;
    for z in probes {
        let lhs = map.eval(z).and_then(|fz| sigma_target.eval(&fz));
        let rhs = sigma.eval(z);
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => worst = worst.max(max_diff(&a, &apply(&l, &b))),
            (Err(Error::KernelNearZero(_)), _) | (_, Err(Error::KernelNearZero(_))) => skipped += 1,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(VerificationReport::new(
        ReportKind::Diagram,
        kernel_d.label(),
        Some(map.name.clone()),
        named(&[("diagram", worst)]),
        tier_of(&[kernel_d, kernel_target]),
        infos(&[kernel_d, kernel_target]),
        probes.to_vec(),
        skipped,
    ))
}

/// Checks the kernel transformation rule (relative deviation) and the
/// matching rule `T(z, w) = J(φ, w)* T'(φz, φw) J(φ, z)` on pairs of probes.
pub fn transformation_report(
    kernel_d: &dyn BergmanKernel,
    kernel_target: &dyn BergmanKernel,
    map: &HoloMap,
    pairs: &[(ComplexPoint, ComplexPoint)],
) -> Result<VerificationReport> {
    let kernel_res = crate::holomap::transformation_residual(kernel_d, kernel_target, map, pairs)?;
    let mut t_res = 0.0_f64;
    for (z, w) in pairs {
        let lhs = t_matrix(kernel_d, z, w)?.entries;
        let rhs = map.jacobian(w)?.adjoint() * t_matrix(kernel_target, &map.eval(z)?, &map.eval(w)?)?.entries * map.jacobian(z)?;
        t_res = t_res.max(max_abs(&(&lhs - rhs)) / max_abs(&lhs));
    }
    let probes = pairs.iter().flat_map(|(z, w)| [z.clone(), w.clone()]).collect();
    Ok(VerificationReport::new(
        ReportKind::Transformation,
        kernel_d.label(),
        Some(map.name.clone()),
        named(&[("kernel", kernel_res), ("t_matrix", t_res)]),
        tier_of(&[kernel_d, kernel_target]),
        infos(&[kernel_d, kernel_target]),
        probes,
        0,
    ))
}

/// The linear map `A = T'(0,0)^{-1/2} L(f, 0) T(0,0)^{1/2}` that an
/// origin-preserving biholomorphism between minimal representative domains
/// must equal, and the report of the per-component relative residual
/// `max_j max_z |f_j(z) − (A z)_j| / max_z |f_j(z)|` over the probes.
pub fn extract_linear(
    kernel_d: &dyn BergmanKernel,
    kernel_target: &dyn BergmanKernel,
    map: &HoloMap,
    probes: &[ComplexPoint],
) -> Result<(CMat, VerificationReport)> {
    let n = kernel_d.dimension();
    let origin = vec![C64::new(0.0, 0.0); n];
    let image = map.eval(&origin)?;
    if image.iter().any(|x| x.norm() > 1e-12) {
        return Err(Error::InvalidMap(format!("`{}` does not fix the origin", map.name)));
    }
    let l = l_matrix(kernel_d, kernel_target, map, &origin)?;
    let t_target = t_matrix(kernel_target, &origin, &origin)?.entries;
    let t_d = t_matrix(kernel_d, &origin, &origin)?.entries;
    let a = hermitian_inv_sqrt(&t_target)? * l * hermitian_sqrt(&t_d)?;
    let m = map.dim_out();
    let mut err = vec![0.0_f64; m];
    let mut scale = vec![0.0_f64; m];
    for z in probes {
        let (fz, az) = (map.eval(z)?, apply(&a, z));
        for j in 0..m {
            err[j] = err[j].max((fz[j] - az[j]).norm());
            scale[j] = scale[j].max(fz[j].norm());
        }
    }
    let worst = (0..m).map(|j| if scale[j] > 0.0 { err[j] / scale[j] } else { err[j] }).fold(0.0, f64::max);
    let report = VerificationReport::new(
        ReportKind::Linearity,
        kernel_d.label(),
        Some(map.name.clone()),
        named(&[("linearity", worst)]),
        tier_of(&[kernel_d, kernel_target]),
        infos(&[kernel_d, kernel_target]),
        probes.to_vec(),
        0,
    );
    Ok((a, report))
}

/// What a grid export evaluates at each point `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridQuantity {
    /// `K(z, 0)`.
    Kernel,
    /// Entries of `T(z, 0)`.
    T,
}

/// Points `base + s·u + t·v` for `s, t` on a uniform grid in `[−extent, extent]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSlice {
    pub base: ComplexPoint,
    pub u: ComplexPoint,
    pub v: ComplexPoint,
    pub extent: f64,
    pub steps: usize,
}

impl GridSlice {
    /// In ℂ: the complex plane of `z`. In ℂ²: the real `(z₁, z₂)` plane.
    pub fn default_for(spec: &DomainSpec, steps: usize) -> Self {
        let n = spec.dimension();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let (u, v) = if n == 1 {
            (vec![one], vec![C64::new(0.0, 1.0)])
        } else {
            (vec![one, zero], vec![zero, one])
        };
        let extent = spec.bounding_box.iter().map(|&(lo, hi)| lo.abs().max(hi.abs())).fold(0.0, f64::max);
        GridSlice { base: vec![zero; n], u, v, extent, steps }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64, ComplexPoint)> + '_ {
        let steps = self.steps.max(2);
        let h = 2.0 * self.extent / (steps - 1) as f64;
        (0..steps).flat_map(move |i| {
            (0..steps).map(move |j| {
                let s = -self.extent + i as f64 * h;
                let t = -self.extent + j as f64 * h;
                let z = (0..self.base.len()).map(|k| self.base[k] + self.u[k] * s + self.v[k] * t).collect();
                (s, t, z)
            })
        })
    }
}

/// CSV of `K(z, 0)` or `T(z, 0)` over a slice. Points outside the domain or
/// where the kernel is too small get empty value fields.
pub fn grid_csv(kernel: &dyn BergmanKernel, spec: &DomainSpec, quantity: GridQuantity, slice: &GridSlice) -> Result<String> {
    let n = kernel.dimension();
    let origin = vec![C64::new(0.0, 0.0); n];
    let mut cols = vec!["s".to_string(), "t".to_string(), "inside".to_string()];
    match quantity {
        GridQuantity::Kernel => cols.extend(["re_k".to_string(), "im_k".to_string()]),
        GridQuantity::T => {
            for i in 1..=n {
                for j in 1..=n {
                    cols.push(format!("re_t{i}{j}"));
                    cols.push(format!("im_t{i}{j}"));
                }
            }
        }
    }
    let width = cols.len() - 3;
    let mut out = cols.join(",");
    out.push('\n');
    for (s, t, z) in slice.points() {
        let inside = spec.membership(&z)?;
        let values: Option<Vec<C64>> = if inside {
            match quantity {
                GridQuantity::Kernel => kernel.eval(&z, &origin).ok().map(|k| vec![k]),
                GridQuantity::T => t_matrix(kernel, &z, &origin).ok().map(|t| t.entries.transpose().iter().copied().collect()),
            }
        } else {
            None
        };
        out.push_str(&format!("{s},{t},{}", inside as u8));
        match values {
            Some(v) => v.iter().for_each(|x| out.push_str(&format!(",{},{}", x.re, x.im))),
            None => (0..width).for_each(|_| out.push(',')),
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomap::HoloMap;
    use crate::kernel::{build_model, ClosedForm, Cutoff, GramChoice, ModelConfig};
    use crate::linalg::{c, hermitian_part, min_eigenvalue};
    use crate::sampling::{probes, sample};
    use crate::weight::Weight;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn disk_probes() -> Vec<ComplexPoint> {
        probes(&DomainSpec::by_id("disk").unwrap(), 1).unwrap()
    }

    fn d1f_model() -> &'static crate::kernel::KernelModel {
        static M: OnceLock<crate::kernel::KernelModel> = OnceLock::new();
        M.get_or_init(|| {
            let spec = DomainSpec::by_id("D1f").unwrap();
            build_model(&spec, &ModelConfig::default_for(&spec)).unwrap()
        })
    }

    #[test]
    fn disk_t_values() {
        let k = ClosedForm::Disk;
        for z in disk_probes() {
            let t = t_matrix(&k, &z, &[c(0.0, 0.0)]).unwrap();
            assert!((t.entries[(0, 0)] - c(2.0, 0.0)).norm() < 1e-12);
        }
        let t = t_matrix(&k, &[c(0.3, 0.0)], &[c(0.2, 0.0)]).unwrap();
        assert!((t.entries[(0, 0)].re - 2.0 / (0.94f64 * 0.94)).abs() < 1e-12);
        assert!((t.entries[(0, 0)].re - 2.26347).abs() < 1e-5);
    }

    #[test]
    fn ball_t_at_origin() {
        let t = t_matrix(&ClosedForm::Ball2, &[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2]).unwrap();
        assert!(max_abs(&(t.entries - CMat::from_diagonal_element(2, 2, c(3.0, 0.0)))) < 1e-12);
    }

    #[test]
    fn exact_disk_model_geometry() {
        let spec = DomainSpec::by_id("disk").unwrap();
        let model = build_model(&spec, &ModelConfig::default_for(&spec)).unwrap();
        let ps = disk_probes();
        let zero = [c(0.0, 0.0)];
        let m = minimality_report(&model, &ps, &zero).unwrap();
        assert!(m.verdict, "{:?}", m.residuals);
        let r = representativity_report(&model, &ps, &zero).unwrap();
        assert!(r.verdict, "{:?}", r.residuals);
        assert_eq!(r.provenance.tier, Tier::Exact);
    }

    #[test]
    fn off_center_minimality_fails() {
        let ps = disk_probes();
        let m = minimality_report(&ClosedForm::Disk, &ps, &[c(0.4, 0.0)]).unwrap();
        assert!(m.residual("k_variation") > 0.1);
        assert!(!m.verdict);
    }

    #[test]
    fn kernel_zero_is_reported() {
        let k = ClosedForm::Annulus { inner: 0.05 };
        // K(z, 0.3) vanishes near z ≈ −0.8003
        let near = [c(-0.800_29, 0.0)];
        let v = k.eval(&near, &[c(0.3, 0.0)]).unwrap().norm();
        assert!(v < 1e-3, "{v}");
        let err = t_matrix(&ZeroKernel, &[c(0.1, 0.0)], &[c(0.1, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::KernelNearZero(_)));
    }

    struct ZeroKernel;

    impl BergmanKernel for ZeroKernel {
        fn dimension(&self) -> usize {
            1
        }
        fn volume(&self) -> f64 {
            1.0
        }
        fn source(&self) -> crate::kernel::KernelSource {
            crate::kernel::KernelSource::ClosedForm
        }
        fn label(&self) -> String {
            "zero".into()
        }
        fn jet(&self, _: &[C64], _: &[C64]) -> Result<crate::kernel::KernelJet> {
            Ok(crate::kernel::KernelJet {
                value: c(0.0, 0.0),
                dz: vec![c(1.0, 0.0)],
                dwbar: vec![c(1.0, 0.0)],
                mixed: CMat::zeros(1, 1),
            })
        }
    }

    #[test]
    fn disk_sigma_is_scaled_identity() {
        let k = ClosedForm::Disk;
        let s = bergman_map(&k, &[c(0.0, 0.0)]).unwrap();
        for z in disk_probes() {
            let v = s.eval(&z).unwrap();
            assert!((v[0] - z[0] * 2f64.sqrt()).norm() < 1e-12);
        }
    }

    #[test]
    fn sigma_vanishes_at_center() {
        let kernels: Vec<(Box<dyn BergmanKernel>, DomainSpec)> = vec![
            (Box::new(ClosedForm::Disk), DomainSpec::by_id("disk").unwrap()),
            (Box::new(ClosedForm::Ball2), DomainSpec::by_id("ball2").unwrap()),
            (Box::new(ClosedForm::Polydisk2), DomainSpec::by_id("polydisk2").unwrap()),
            (Box::new(ClosedForm::Annulus { inner: 0.05 }), DomainSpec::annulus(0.05).unwrap()),
        ];
        for (k, spec) in &kernels {
            for p in probes(spec, 3).unwrap().iter().take(5) {
                let s = bergman_map(k.as_ref(), p).unwrap();
                assert!(s.eval(p).unwrap().iter().all(|x| x.norm() < 1e-12), "{}", spec.id());
            }
        }
        let m = d1f_model();
        for p in probes(&DomainSpec::by_id("D1f").unwrap(), 1).unwrap().iter().take(5) {
            let s = bergman_map(m, p).unwrap();
            assert!(s.eval(p).unwrap().iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn sigma_jacobian_matches_finite_differences() {
        let kernels: Vec<(Box<dyn BergmanKernel>, DomainSpec)> = vec![
            (Box::new(ClosedForm::Disk), DomainSpec::by_id("disk").unwrap()),
            (Box::new(ClosedForm::Ball2), DomainSpec::by_id("ball2").unwrap()),
            (Box::new(ClosedForm::Polydisk2), DomainSpec::by_id("polydisk2").unwrap()),
        ];
        let h = 1e-6;
        for (k, spec) in &kernels {
            let ps = probes(spec, 1).unwrap();
            let s = bergman_map(k.as_ref(), &ps[0]).unwrap();
            for z in ps.iter().skip(1).take(10) {
                let jac = s.jacobian(z).unwrap();
                for j in 0..z.len() {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[j] += h;
                    zm[j] -= h;
                    let (fp, fm) = (s.eval(&zp).unwrap(), s.eval(&zm).unwrap());
                    for i in 0..z.len() {
                        let fd = (fp[i] - fm[i]) / (2.0 * h);
                        assert!((fd - jac[(i, j)]).norm() < 1e-6, "{} ({i},{j})", spec.id());
                    }
                }
            }
        }
    }

    #[test]
    fn t_diagonal_is_positive_definite() {
        let m = d1f_model();
        let cloud = sample(&DomainSpec::by_id("D1f").unwrap(), 2000, 5).unwrap();
        for z in cloud.points().take(200) {
            let t = t_matrix(m, z, z).unwrap().entries;
            assert!(max_abs(&(&t - hermitian_part(&t))) < 1e-8 * max_abs(&t));
            assert!(min_eigenvalue(&t) > 0.0);
        }
    }

    #[test]
    fn rotation_l_matrix() {
        let theta = 0.7;
        let k = ClosedForm::Disk;
        let l = l_matrix(&k, &k, &HoloMap::rotation(theta), &[c(0.0, 0.0)]).unwrap();
        assert!((l[(0, 0)] - C64::from_polar(1.0, theta)).norm() < 1e-12);
        let id = l_matrix(&k, &k, &HoloMap::identity(1), &[c(0.2, 0.1)]).unwrap();
        assert!((id[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mobius_unitarity_diagram_transformation() {
        let k = ClosedForm::Disk;
        let mob = HoloMap::mobius_disk(c(0.3, 0.0)).unwrap();
        let ps = disk_probes();
        let zero = [c(0.0, 0.0)];
        let u = unitarity_report(&k, &k, &mob, &zero).unwrap();
        assert!(u.verdict && u.residual("unitarity") < 1e-8);
        let d = diagram_residual(&k, &k, &mob, &zero, &ps).unwrap();
        assert!(d.verdict && d.residual("diagram") < 1e-6, "{:?}", d.residuals);
        let d_off = diagram_residual(&k, &k, &mob, &ps[2], &ps).unwrap();
        assert!(d_off.verdict, "{:?}", d_off.residuals);
        let id = diagram_residual(&k, &k, &HoloMap::identity(1), &zero, &ps).unwrap();
        assert_eq!(id.residual("diagram"), 0.0);
        let pairs: Vec<_> = (0..10).map(|i| (ps[i].clone(), ps[(i + 5) % ps.len()].clone())).collect();
        let t = transformation_report(&k, &k, &mob, &pairs).unwrap();
        assert!(t.verdict, "{:?}", t.residuals);
        assert!(t.residual("t_matrix") < 1e-8);
    }

    #[test]
    fn disk_rotation_is_extracted() {
        let k = ClosedForm::Disk;
        let (a, r) = extract_linear(&k, &k, &HoloMap::rotation(0.7), &disk_probes()).unwrap();
        assert!((a[(0, 0)] - C64::from_polar(1.0, 0.7)).norm() < 1e-12);
        assert!(r.verdict && r.residual("linearity") < 1e-8);
        let mob = HoloMap::mobius_disk(c(0.3, 0.0)).unwrap();
        assert!(matches!(extract_linear(&k, &k, &mob, &disk_probes()), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn d1f_representative_and_rotation_linear() {
        let m = d1f_model();
        let spec = DomainSpec::by_id("D1f").unwrap();
        let ps = probes(&spec, 1).unwrap();
        let zero = [c(0.0, 0.0); 2];
        let r = representativity_report(m, &ps, &zero).unwrap();
        assert!(r.verdict, "{:?}", r.residuals);
        let f = HoloMap::rotation_weighted(&Weight::pair(2, 3).unwrap(), 0.7);
        let d = diagram_residual(m, m, &f, &zero, &ps).unwrap();
        assert!(d.verdict, "{:?}", d.residuals);
        let (_, lin) = extract_linear(m, m, &f, &ps).unwrap();
        assert!(lin.verdict, "{:?}", lin.residuals);
    }

    #[test]
    fn e_half2_t_is_not_constant() {
        // regression values for seed 1, 10⁶ proposals, weighted cutoff 12;
        // the variation sits in the off-diagonal entry, which keeps a z₁ term
        let spec = DomainSpec::by_id("E_half2").unwrap();
        let m = build_model(&spec, &ModelConfig::default_for(&spec)).unwrap();
        let r = representativity_report(&m, &probes(&spec, 1).unwrap(), &[c(0.0, 0.0); 2]).unwrap();
        assert!((r.residual("t_variation") - 0.10695).abs() < 2e-3, "{:?}", r.residuals);
        assert!((r.residual("off_diagonal") - 0.10693).abs() < 2e-3, "{:?}", r.residuals);
        assert!(!r.verdict);
        let phi = HoloMap::zapalowski(c(1.0, 0.0)).unwrap();
        let (a, lin) = extract_linear(&m, &m, &phi, &probes(&spec, 1).unwrap()).unwrap();
        assert!(lin.residual("linearity") > 0.01);
        assert!(!lin.verdict);
        // the extracted matrix is close to the linear part diag(1, −1) of φ
        assert!(max_abs(&(a - CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)])))) < 0.05);
    }

    #[test]
    fn annulus_zero_regression() {
        // r = 0.05, w = 0.3: on the 200 interior points of [0.05, 1] mirrored
        // to the negative axis the smallest |K| is at z = −0.80149
        let k = ClosedForm::Annulus { inner: 0.05 };
        let (mut best_x, mut best) = (0.0, f64::INFINITY);
        for i in 1..=200 {
            let x = -(0.05 + 0.95 * i as f64 / 201.0);
            let v = k.eval(&[c(x, 0.0)], &[c(0.3, 0.0)]).unwrap().norm();
            if v < best {
                (best_x, best) = (x, v);
            }
        }
        assert!((best_x + 0.80149).abs() < 1e-4, "{best_x}");
        assert!((best - 2.3033e-4).abs() < 1e-7, "{best}");
    }

    #[test]
    fn minimality_residuals_shrink_with_samples() {
        let spec = DomainSpec::by_id("ball2").unwrap();
        let ps = probes(&spec, 1).unwrap();
        let zero = [c(0.0, 0.0); 2];
        let residual = |samples| {
            let config = ModelConfig {
                cutoff: Cutoff::TotalDegree { n: 6 },
                gram: GramChoice::Qmc,
                samples,
                ..ModelConfig::default_for(&spec)
            };
            let m = build_model(&spec, &config).unwrap();
            let rep = minimality_report(&m, &ps, &zero).unwrap();
            rep.residual("k_variation").max(rep.residual("volume_constant"))
        };
        let small = residual(100_000);
        let large = residual(1_000_000);
        assert!(large <= 2.0 * small, "{large} vs {small}");
    }

    #[test]
    fn grid_export_layout() {
        let spec = DomainSpec::by_id("ball2").unwrap();
        let csv = grid_csv(&ClosedForm::Ball2, &spec, GridQuantity::T, &GridSlice::default_for(&spec, 5)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,t,inside,re_t11,im_t11,re_t12,im_t12,re_t21,im_t21,re_t22,im_t22");
        assert_eq!(lines.len(), 26);
        let centre: Vec<&str> = lines[13].split(',').collect();
        assert_eq!(centre[2], "1");
        assert!((centre[3].parse::<f64>().unwrap() - 3.0).abs() < 1e-12);
        let corner: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(corner[2], "0");
        assert!(corner[3].is_empty());
        let disk = DomainSpec::by_id("disk").unwrap();
        let csv = grid_csv(&ClosedForm::Disk, &disk, GridQuantity::Kernel, &GridSlice::default_for(&disk, 3)).unwrap();
        let mid: Vec<&str> = csv.lines().nth(5).unwrap().split(',').collect();
        assert!((mid[3].parse::<f64>().unwrap() - 1.0 / PI).abs() < 1e-15);
    }
}
