//! Holomorphic maps with exact Jacobians.
//!
//! Every map we need is either a polynomial (weighted rotations, coordinate
//! swaps, linear maps, the nonlinear automorphism of the symmetrized
//! ellipsoid) or a disk Möbius transformation, which is special-cased.

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::kernel::BergmanKernel;
use crate::linalg::{CMat, C64};
use crate::poly::{Polynomial, Term};
use crate::sampling::SampleCloud;
use crate::weight::{MultiIndex, Weight};

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Polynomial { components: Vec<Polynomial>, partials: Vec<Vec<Polynomial>> },
    /// `z ↦ (z − a) / (1 − conj(a) z)` on the unit disk.
    Mobius { a: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoloMap {
    pub name: String,
    dim_in: usize,
    dim_out: usize,
    repr: Repr,
    inverse: Option<Box<HoloMap>>,
}

impl HoloMap {
    /// Polynomial map from component polynomials. All components must share
    /// the same number of variables.
    pub fn polynomial(name: impl Into<String>, components: Vec<Polynomial>) -> Result<Self> {
        let dim_in = components.first().map(Polynomial::nvars).ok_or_else(|| Error::InvalidMap("no components".into()))?;
        if components.iter().any(|p| p.nvars() != dim_in) {
            return Err(Error::InvalidMap("components disagree on the number of variables".into()));
        }
        let partials = components.iter().map(|p| (0..dim_in).map(|j| p.derivative(j)).collect()).collect();
        Ok(HoloMap {
            name: name.into(),
            dim_in,
            dim_out: components.len(),
            repr: Repr::Polynomial { components, partials },
            inverse: None,
        })
    }

    pub fn with_inverse(mut self, inverse: HoloMap) -> Result<Self> {
        if inverse.dim_in != self.dim_out || inverse.dim_out != self.dim_in {
            return Err(Error::InvalidMap("inverse has incompatible dimensions".into()));
        }
        self.inverse = Some(Box::new(inverse));
        Ok(self)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn inverse(&self) -> Option<&HoloMap> {
        self.inverse.as_deref()
    }

    pub fn components(&self) -> Option<&[Polynomial]> {
        match &self.repr {
            Repr::Polynomial { components, .. } => Some(components),
            Repr::Mobius { .. } => None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let comps = (0..n).map(|j| Polynomial::variable(n, j)).collect();
        let id = Self::polynomial("identity", comps).expect("valid");
        id.clone().with_inverse(id).expect("valid")
    }

    /// `z ↦ A z`. The inverse is attached when `A` is invertible.
    pub fn linear(name: impl Into<String>, a: &CMat) -> Result<Self> {
        let n = a.ncols();
        let build = |m: &CMat, name: String| {
            let comps = (0..m.nrows())
                .map(|i| Polynomial::from_terms(n, (0..n).map(|j| (MultiIndex::unit(n, j), m[(i, j)]))))
                .collect::<Result<Vec<_>>>()?;
            HoloMap::polynomial(name, comps)
        };
        let name = name.into();
        let map = build(a, name.clone())?;
        match a.clone().try_inverse() {
            Some(inv) if a.is_square() => map.with_inverse(build(&inv, format!("{name}^-1"))?),
            _ => Ok(map),
        }
    }

    /// Weighted rotation `f_θ(z) = (e^{i m₁ θ} z₁, …)`.
    pub fn rotation_weighted(weight: &Weight, theta: f64) -> Self {
        let n = weight.len();
        let build = |t: f64| {
            let comps = weight
                .entries()
                .iter()
                .enumerate()
                .map(|(j, &m)| {
                    Polynomial::from_terms(n, [(MultiIndex::unit(n, j), C64::from_polar(1.0, m as f64 * t))])
                        .expect("valid")
                })
                .collect();
            HoloMap::polynomial(format!("rotation{weight}[{t}]"), comps).expect("valid")
        };
        build(theta).with_inverse(build(-theta)).expect("valid")
    }

    /// `z ↦ e^{iθ} z` on ℂ.
    pub fn rotation(theta: f64) -> Self {
        Self::rotation_weighted(&Weight::new(vec![1]).expect("valid"), theta)
    }

    /// `(z₁, z₂) ↦ (z₂, z₁)`.
    pub fn swap() -> Self {
        let comps = vec![Polynomial::variable(2, 1), Polynomial::variable(2, 0)];
        let s = Self::polynomial("swap", comps).expect("valid");
        s.clone().with_inverse(s).expect("valid")
    }

    /// `z ↦ s z`.
    pub fn scale(n: usize, s: C64) -> Result<Self> {
        Self::linear(format!("scale[{s}]"), &CMat::from_diagonal_element(n, n, s))
    }

    /// `(z₁, z₂) ↦ (ζ z₁, ζ² (z₁²/4 − z₂))`, an origin-preserving automorphism
    /// of the symmetrized (1/2, 2)-ellipsoid, with its polynomial inverse.
    pub fn zapalowski(zeta: C64) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMap(format!("|ζ| = {} ≠ 1", zeta.norm())));
        }
        let build = |zeta: C64, name: &str| {
            let z2 = zeta * zeta;
            let first = Polynomial::from_terms(2, [(MultiIndex::new(vec![1, 0]), zeta)]).expect("valid");
            let second = Polynomial::from_terms(
                2,
                [(MultiIndex::new(vec![2, 0]), z2 * 0.25), (MultiIndex::new(vec![0, 1]), -z2)],
            )
            .expect("valid");
            HoloMap::polynomial(name.to_string(), vec![first, second]).expect("valid")
        };
        build(zeta, "zapalowski").with_inverse(build(zeta.conj(), "zapalowski^-1"))
    }

    /// Disk automorphism `z ↦ (z − a)/(1 − conj(a) z)`; its inverse is the
    /// same map with `−a`.
    pub fn mobius_disk(a: C64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::InvalidMap(format!("Möbius parameter |a| = {} ≥ 1", a.norm())));
        }
        let make = |a: C64| HoloMap {
            name: format!("mobius[{a}]"),
            dim_in: 1,
            dim_out: 1,
            repr: Repr::Mobius { a },
            inverse: None,
        };
        Ok(HoloMap { inverse: Some(Box::new(make(-a))), ..make(a) })
    }

    fn check(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: z.len() });
        }
        Ok(())
    }

    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        self.check(z)?;
        match &self.repr {
            Repr::Polynomial { components, .. } => Ok(components.iter().map(|p| p.eval(z)).collect()),
            Repr::Mobius { a } => {
                let den = C64::new(1.0, 0.0) - a.conj() * z[0];
                if den.norm() == 0.0 {
                    return Err(Error::InvalidMap("Möbius pole".into()));
                }
                Ok(vec![(z[0] - a) / den])
            }
        }
    }

    /// `J[i][j] = ∂φ_i/∂z_j`.
    pub fn jacobian(&self, z: &[C64]) -> Result<CMat> {
        self.check(z)?;
        match &self.repr {
            Repr::Polynomial { partials, .. } => {
                Ok(CMat::from_fn(self.dim_out, self.dim_in, |i, j| partials[i][j].eval(z)))
            }
            Repr::Mobius { a } => {
                let den = C64::new(1.0, 0.0) - a.conj() * z[0];
                Ok(CMat::from_element(1, 1, (1.0 - a.norm_sqr()) / (den * den)))
            }
        }
    }

    pub fn det_jacobian(&self, z: &[C64]) -> Result<C64> {
        let j = self.jacobian(z)?;
        if !j.is_square() {
            return Err(Error::InvalidMap("non-square Jacobian".into()));
        }
        Ok(j.determinant())
    }
}

/// `f ∘ g`, expanded exactly. Only polynomial maps can be composed.
pub fn compose(f: &HoloMap, g: &HoloMap) -> Result<HoloMap> {
    if f.dim_in != g.dim_out {
        return Err(Error::DimensionMismatch { expected: f.dim_in, got: g.dim_out });
    }
    let (Some(fc), Some(gc)) = (f.components(), g.components()) else {
        return Err(Error::InvalidMap("composition is only defined for polynomial maps".into()));
    };
    let comps = fc.iter().map(|p| p.compose(gc)).collect::<Result<Vec<_>>>()?;
    let out = HoloMap::polynomial(format!("{}∘{}", f.name, g.name), comps)?;
    match (f.inverse(), g.inverse()) {
        (Some(fi), Some(gi)) if fi.components().is_some() && gi.components().is_some() => {
            let inv = compose(gi, fi)?;
            out.with_inverse(inv)
        }
        _ => Ok(out),
    }
}

/// Fractions of cloud points that the map (and its inverse, when attached)
/// sends back into the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preservation {
    pub forward: f64,
    pub inverse: Option<f64>,
}

pub fn preserves_domain(map: &HoloMap, spec: &DomainSpec, cloud: &SampleCloud) -> Preservation {
    let fraction = |m: &HoloMap| {
        let hits = cloud
            .points()
            .filter(|z| m.eval(z).map(|w| spec.membership(&w).unwrap_or(false)).unwrap_or(false))
            .count();
        hits as f64 / cloud.len() as f64
    };
    Preservation { forward: fraction(map), inverse: map.inverse().map(fraction) }
}

/// Max relative deviation between `K_D(z, w)` and
/// `conj(det J(φ, w)) K_D'(φ(z), φ(w)) det J(φ, z)` over the pairs.
pub fn transformation_residual(
    kernel_d: &dyn BergmanKernel,
    kernel_target: &dyn BergmanKernel,
    map: &HoloMap,
    pairs: &[(Vec<C64>, Vec<C64>)],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (z, w) in pairs {
        let lhs = kernel_d.eval(z, w)?;
        let rhs = map.det_jacobian(w)?.conj() * kernel_target.eval(&map.eval(z)?, &map.eval(w)?)? * map.det_jacobian(z)?;
        worst = worst.max((lhs - rhs).norm() / lhs.norm());
    }
    Ok(worst)
}

/// Least-squares linear map `A` minimizing `Σ ‖φ(z) − A z‖²` over the points,
/// with the max residual `max ‖φ(z) − A z‖` (entrywise).
pub fn best_linear_fit<'a>(map: &HoloMap, points: impl IntoIterator<Item = &'a [C64]>) -> Result<(CMat, f64)> {
    let pts: Vec<&[C64]> = points.into_iter().collect();
    let (n, m) = (map.dim_in(), map.dim_out());
    let mut images = Vec::with_capacity(pts.len());
    for z in &pts {
        images.push(map.eval(z)?);
    }
    let zs = CMat::from_fn(pts.len(), n, |r, j| pts[r][j]);
    let fs = CMat::from_fn(pts.len(), m, |r, i| images[r][i]);
    let x = zs.svd(true, true).solve(&fs, 1e-14).map_err(|e| Error::InvalidMap(e.to_string()))?;
    let a = x.transpose();
    let mut worst = 0.0_f64;
    for (z, fz) in pts.iter().zip(&images) {
        worst = worst.max(crate::linalg::max_diff(fz, &crate::linalg::apply(&a, z)));
    }
    Ok((a, worst))
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mobius: Option<[f64; 2]>,
    #[serde(default)]
    components: Vec<Vec<Term>>,
    #[serde(default)]
    inverse: Option<Box<MapJson>>,
}

impl HoloMap {
    fn to_json(&self) -> MapJson {
        let (mobius, components) = match &self.repr {
            Repr::Polynomial { components, .. } => (None, components.iter().map(Polynomial::to_terms).collect()),
            Repr::Mobius { a } => (Some([a.re, a.im]), Vec::new()),
        };
        MapJson {
            name: self.name.clone(),
            mobius,
            components,
            inverse: self.inverse.as_ref().map(|i| Box::new(i.to_json())),
        }
    }

    fn from_json(raw: MapJson) -> Result<Self> {
        let mut map = if let Some([re, im]) = raw.mobius {
            let mut m = HoloMap::mobius_disk(C64::new(re, im))?;
            m.inverse = None;
            m
        } else {
            let nvars = raw
                .components
                .iter()
                .flatten()
                .map(|t| t.k.len())
                .next()
                .ok_or_else(|| Error::InvalidMap("map has no terms".into()))?;
            let comps = raw
                .components
                .iter()
                .map(|terms| Polynomial::from_serialized(nvars, terms))
                .collect::<Result<Vec<_>>>()?;
            HoloMap::polynomial(raw.name.clone(), comps)?
        };
        map.name = raw.name;
        if let Some(inv) = raw.inverse {
            map = map.with_inverse(HoloMap::from_json(*inv)?)?;
        }
        Ok(map)
    }
}

impl Serialize for HoloMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HoloMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        HoloMap::from_json(MapJson::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ClosedForm;
    use crate::linalg::{c, max_abs, max_diff};
    use crate::sampling::{probes, sample};
    use proptest::prelude::*;

    fn w(a: u32, b: u32) -> Weight {
        Weight::pair(a, b).unwrap()
    }

    #[test]
    fn weighted_rotation_jacobian() {
        let theta = 0.37;
        let f = HoloMap::rotation_weighted(&w(2, 3), theta);
        for z in [[c(0.1, 0.2), c(-0.3, 0.1)], [c(0.0, 0.0), c(0.5, 0.5)]] {
            let j = f.jacobian(&z).unwrap();
            let expected = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::from_polar(1.0, 2.0 * theta),
                C64::from_polar(1.0, 3.0 * theta),
            ]));
            assert!(max_abs(&(j - expected)) < 1e-15);
        }
    }

    #[test]
    fn mobius_derivative_at_origin() {
        let m = HoloMap::mobius_disk(c(0.3, 0.0)).unwrap();
        assert!((m.jacobian(&[c(0.0, 0.0)]).unwrap()[(0, 0)] - c(0.91, 0.0)).norm() < 1e-15);
        assert!((m.eval(&[c(0.0, 0.0)]).unwrap()[0] - c(-0.3, 0.0)).norm() < 1e-15);
        assert!(HoloMap::mobius_disk(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn zapalowski_values() {
        let phi = HoloMap::zapalowski(c(1.0, 0.0)).unwrap();
        let v = phi.eval(&[c(0.2, 0.0), c(0.1, 0.0)]).unwrap();
        assert!((v[0] - c(0.2, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(-0.09, 0.0)).norm() < 1e-15);
        assert_eq!(phi.eval(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(0.0, 0.0), c(0.0, 0.0)]);
        let phi_i = HoloMap::zapalowski(c(0.0, 1.0)).unwrap();
        assert!((phi_i.eval(&[c(0.2, 0.0), c(0.0, 0.0)]).unwrap()[0] - c(0.0, 0.2)).norm() < 1e-15);
        assert!(HoloMap::zapalowski(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn zapalowski_inverse_composes_to_identity() {
        for zeta in [c(1.0, 0.0), c(0.0, 1.0), C64::from_polar(1.0, 0.8)] {
            let phi = HoloMap::zapalowski(zeta).unwrap();
            let inv = phi.inverse().unwrap();
            let id = HoloMap::identity(2);
            for (a, b) in [compose(&phi, inv).unwrap(), compose(inv, &phi).unwrap()].iter().zip([&id, &id]) {
                for (p, q) in a.components().unwrap().iter().zip(b.components().unwrap()) {
                    assert!(p.max_coefficient_diff(q) < 1e-15, "ζ = {zeta}");
                }
            }
        }
        // the stored inverse is exactly φ with conj(ζ)
        let zeta = C64::from_polar(1.0, 0.8);
        let phi = HoloMap::zapalowski(zeta).unwrap();
        let other = HoloMap::zapalowski(zeta.conj()).unwrap();
        for (p, q) in phi.inverse().unwrap().components().unwrap().iter().zip(other.components().unwrap()) {
            assert_eq!(p, q);
        }
    }

    #[test]
    fn rotation_determinant_and_centrality() {
        for (m1, m2) in [(1, 1), (1, 2), (2, 3), (3, 3)] {
            let m = w(m1, m2);
            let f = HoloMap::rotation_weighted(&m, 0.9);
            let z = [c(0.1, 0.0), c(0.2, 0.1)];
            let det = f.det_jacobian(&z).unwrap();
            assert!((det - C64::from_polar(1.0, (m1 + m2) as f64 * 0.9)).norm() < 1e-14);
            let j = f.jacobian(&z).unwrap();
            let probe = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
            let commutes = max_abs(&(&j * &probe - &probe * &j)) < 1e-14;
            assert_eq!(commutes, crate::weight::center_commutes(&m).unwrap());
        }
    }

    #[test]
    fn preservation_fractions() {
        let e = DomainSpec::by_id("E_half2").unwrap();
        let cloud = sample(&e, 100_000, 1).unwrap();
        let p = preserves_domain(&HoloMap::zapalowski(c(1.0, 0.0)).unwrap(), &e, &cloud);
        assert_eq!(p.forward, 1.0);
        assert_eq!(p.inverse, Some(1.0));

        let d1f = DomainSpec::by_id("D1f").unwrap();
        let cloud = sample(&d1f, 100_000, 1).unwrap();
        let p = preserves_domain(&HoloMap::rotation_weighted(&w(2, 3), 1.1), &d1f, &cloud);
        assert_eq!(p.forward, 1.0);

        let disk = DomainSpec::by_id("disk").unwrap();
        let cloud = sample(&disk, 10_000, 1).unwrap();
        let p = preserves_domain(&HoloMap::scale(1, c(2.0, 0.0)).unwrap(), &disk, &cloud);
        assert!(p.forward < 1.0);
    }

    #[test]
    fn transformation_formula_on_disk_and_polydisk() {
        let disk = ClosedForm::Disk;
        let mob = HoloMap::mobius_disk(c(0.3, 0.0)).unwrap();
        let ps = probes(&DomainSpec::by_id("disk").unwrap(), 1).unwrap();
        let pairs: Vec<_> = (0..10).map(|i| (ps[i].clone(), ps[(i + 3) % ps.len()].clone())).collect();
        assert!(transformation_residual(&disk, &disk, &mob, &pairs).unwrap() < 1e-10);
        assert_eq!(transformation_residual(&disk, &disk, &HoloMap::identity(1), &pairs).unwrap(), 0.0);

        let poly = ClosedForm::Polydisk2;
        let ps = probes(&DomainSpec::by_id("polydisk2").unwrap(), 1).unwrap();
        let pairs: Vec<_> = (0..10).map(|i| (ps[i].clone(), ps[(i + 3) % ps.len()].clone())).collect();
        assert!(transformation_residual(&poly, &poly, &HoloMap::swap(), &pairs).unwrap() < 1e-10);
    }

    #[test]
    fn json_roundtrip() {
        for m in [HoloMap::zapalowski(C64::from_polar(1.0, 0.4)).unwrap(), HoloMap::mobius_disk(c(0.3, 0.1)).unwrap()] {
            let s = serde_json::to_string(&m).unwrap();
            let back: HoloMap = serde_json::from_str(&s).unwrap();
            let z = vec![c(0.1, 0.05); m.dim_in()];
            assert!(max_diff(&back.eval(&z).unwrap(), &m.eval(&z).unwrap()) == 0.0);
            assert!(back.inverse().is_some());
        }
        let v: serde_json::Value = serde_json::to_value(HoloMap::swap()).unwrap();
        assert!(v["components"][0][0]["k"].is_array());
        assert!(v["components"][0][0]["c"].is_array());
    }

    #[test]
    fn linear_fit_recovers_linear_maps_only() {
        let e = DomainSpec::by_id("E_half2").unwrap();
        let cloud = sample(&e, 10_000, 2).unwrap();
        let rot = HoloMap::rotation_weighted(&w(1, 2), 0.3);
        let (a, res) = best_linear_fit(&rot, cloud.points()).unwrap();
        assert!(res < 1e-12);
        assert!((a[(1, 1)] - C64::from_polar(1.0, 0.6)).norm() < 1e-12);
        let (_, res) = best_linear_fit(&HoloMap::zapalowski(c(1.0, 0.0)).unwrap(), cloud.points()).unwrap();
        assert!(res > 0.01);
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((0i32..3, 0i32..3), (-1.0f64..1.0, -1.0f64..1.0)), 1..5).prop_map(|terms| {
            Polynomial::from_terms(2, terms.into_iter().map(|((a, b), (re, im))| (MultiIndex::new(vec![a, b]), c(re, im))))
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn chain_rule(f1 in arb_poly(), f2 in arb_poly(), g1 in arb_poly(), g2 in arb_poly(),
                      x in -0.5f64..0.5, y in -0.5f64..0.5, u in -0.5f64..0.5, v in -0.5f64..0.5) {
            let f = HoloMap::polynomial("f", vec![f1, f2]).unwrap();
            let g = HoloMap::polynomial("g", vec![g1, g2]).unwrap();
            let fg = compose(&f, &g).unwrap();
            let z = [c(x, y), c(u, v)];
            let lhs = fg.jacobian(&z).unwrap();
            let rhs = f.jacobian(&g.eval(&z).unwrap()).unwrap() * g.jacobian(&z).unwrap();
            prop_assert!(max_abs(&(lhs - rhs)) < 1e-10);
        }
    }
}
