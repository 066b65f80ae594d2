use std::f64::consts::PI;

use super::{BergmanKernel, KernelJet, KernelSource};
use crate::domain::{DomainKind, DomainSpec, DEFAULT_ANNULUS_RADIUS};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

const SERIES_TOL: f64 = 1e-15;
const SERIES_MAX_TERMS: usize = 1_000_000;

/// Bergman kernels known in closed form (the annulus through its Laurent
/// series summed to convergence).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    Disk,
    Annulus { inner: f64 },
    Polydisk2,
    Ball2,
}

impl ClosedForm {
    pub fn from_spec(spec: &DomainSpec) -> Result<Self> {
        match spec.kind {
            DomainKind::Disk => Ok(ClosedForm::Disk),
            DomainKind::Annulus { inner } => Ok(ClosedForm::Annulus { inner }),
            DomainKind::Polydisk2 => Ok(ClosedForm::Polydisk2),
            DomainKind::Ball2 => Ok(ClosedForm::Ball2),
            _ => Err(Error::UnsupportedDomain(spec.id().to_string())),
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::from_spec(&DomainSpec::by_id(id)?)
    }
}

/// `(F, F', F'')` of the disk kernel as a function of `x = z conj(w)`.
fn disk_radial(x: C64) -> Result<[C64; 3]> {
    if x.norm() >= 1.0 {
        return Err(Error::NonConvergence);
    }
    let d = C64::new(1.0, 0.0) - x;
    Ok([1.0 / (PI * d * d), 2.0 / (PI * d.powi(3)), 6.0 / (PI * d.powi(4))])
}

/// `(F, F', F'')` of the ball kernel as a function of `s = ⟨z, w⟩`.
fn ball_radial(s: C64) -> Result<[C64; 3]> {
    if s.norm() >= 1.0 {
        return Err(Error::NonConvergence);
    }
    let d = C64::new(1.0, 0.0) - s;
    let p2 = PI * PI;
    Ok([2.0 / (p2 * d.powi(3)), 6.0 / (p2 * d.powi(4)), 24.0 / (p2 * d.powi(5))])
}

/// Laurent series `Σ_k (k+1) x^k / (π(1 − r^{2k+2}))` (with the `k = −1`
/// term `x^{-1} / (2π log(1/r))`) and its first two derivatives.
fn annulus_radial(x: C64, r: f64) -> Result<[C64; 3]> {
    let m = x.norm();
    if m >= 1.0 || m <= r * r {
        return Err(Error::NonConvergence);
    }
    let zero = C64::new(0.0, 0.0);
    let mut sum = [zero; 3];
    let accumulate = |k: f64, t: C64, sum: &mut [C64; 3]| -> f64 {
        let d1 = t * k / x;
        let d2 = t * (k * (k - 1.0)) / (x * x);
        sum[0] += t;
        sum[1] += d1;
        sum[2] += d2;
        t.norm().max(d1.norm()).max(d2.norm())
    };
    let small = |sum: &[C64; 3], size: f64| {
        let scale = sum.iter().fold(1.0_f64, |a, s| a.max(s.norm()));
        size < SERIES_TOL * scale
    };

    // k ≥ 0
    let mut xp = C64::new(1.0, 0.0);
    let mut converged = false;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let c = (kf + 1.0) / (PI * (1.0 - r.powf(2.0 * kf + 2.0)));
        let size = accumulate(kf, c * xp, &mut sum);
        if k > 2 && small(&sum, size) {
            converged = true;
            break;
        }
        xp *= x;
    }
    if !converged {
        return Err(Error::NonConvergence);
    }

    // k = −1
    accumulate(-1.0, 1.0 / (2.0 * PI * (1.0 / r).ln() * x), &mut sum);

    // k = −j, j ≥ 2: term = (j − 1) q / (π(1 − q)) · x^{-j}, q = r^{2j−2}
    let rho = C64::new(r * r, 0.0) / x;
    let mut rho_j = rho;
    converged = false;
    for j in 2..SERIES_MAX_TERMS {
        rho_j *= rho;
        let jf = j as f64;
        let q = r.powf(2.0 * jf - 2.0);
        let t = rho_j * ((jf - 1.0) / (PI * (1.0 - q) * r * r));
        let size = accumulate(-jf, t, &mut sum);
        if j > 3 && small(&sum, size) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence);
    }
    Ok(sum)
}

fn one_variable_jet(f: [C64; 3], z: C64, w: C64) -> KernelJet {
    let x = z * w.conj();
    KernelJet {
        value: f[0],
        dz: vec![f[1] * w.conj()],
        dwbar: vec![f[1] * z],
        mixed: CMat::from_element(1, 1, f[1] + f[2] * x),
    }
}

impl BergmanKernel for ClosedForm {
    fn dimension(&self) -> usize {
        match self {
            ClosedForm::Disk | ClosedForm::Annulus { .. } => 1,
            ClosedForm::Polydisk2 | ClosedForm::Ball2 => 2,
        }
    }

    fn volume(&self) -> f64 {
        match self {
            ClosedForm::Disk => PI,
            ClosedForm::Annulus { inner } => PI * (1.0 - inner * inner),
            ClosedForm::Polydisk2 => PI * PI,
            ClosedForm::Ball2 => PI * PI / 2.0,
        }
    }

    fn source(&self) -> KernelSource {
        KernelSource::ClosedForm
    }

    fn label(&self) -> String {
        match self {
            ClosedForm::Disk => "disk",
            ClosedForm::Annulus { .. } => "annulus",
            ClosedForm::Polydisk2 => "polydisk2",
            ClosedForm::Ball2 => "ball2",
        }
        .to_string()
    }

    fn jet(&self, z: &[C64], w: &[C64]) -> Result<KernelJet> {
        let n = self.dimension();
        for p in [z, w] {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
        }
        match *self {
            ClosedForm::Disk => Ok(one_variable_jet(disk_radial(z[0] * w[0].conj())?, z[0], w[0])),
            ClosedForm::Annulus { inner } => {
                Ok(one_variable_jet(annulus_radial(z[0] * w[0].conj(), inner)?, z[0], w[0]))
            }
            ClosedForm::Ball2 => {
                let s = z[0] * w[0].conj() + z[1] * w[1].conj();
                let [f, f1, f2] = ball_radial(s)?;
                Ok(KernelJet {
                    value: f,
                    dz: vec![f1 * w[0].conj(), f1 * w[1].conj()],
                    dwbar: vec![f1 * z[0], f1 * z[1]],
                    mixed: CMat::from_fn(2, 2, |i, j| {
                        let delta = if i == j { f1 } else { C64::new(0.0, 0.0) };
                        delta + f2 * z[i] * w[j].conj()
                    }),
                })
            }
            ClosedForm::Polydisk2 => {
                let a = disk_radial(z[0] * w[0].conj())?;
                let b = disk_radial(z[1] * w[1].conj())?;
                let f = [a, b];
                let dz: Vec<C64> = (0..2).map(|j| f[j][1] * w[j].conj() * f[1 - j][0]).collect();
                let dwbar: Vec<C64> = (0..2).map(|i| f[i][1] * z[i] * f[1 - i][0]).collect();
                let mixed = CMat::from_fn(2, 2, |i, j| {
                    if i == j {
                        (f[i][1] + f[i][2] * z[i] * w[i].conj()) * f[1 - i][0]
                    } else {
                        f[i][1] * z[i] * f[j][1] * w[j].conj()
                    }
                });
                Ok(KernelJet { value: f[0][0] * f[1][0], dz, dwbar, mixed })
            }
        }
    }
}

/// Closed-form kernel by domain id (`annulus` uses the catalog radius).
pub fn eval_kernel_closed(id: &str, z: &[C64], w: &[C64]) -> Result<C64> {
    let k = match id {
        "annulus" => ClosedForm::Annulus { inner: DEFAULT_ANNULUS_RADIUS },
        other => ClosedForm::from_id(other)?,
    };
    k.eval(z, w)
}
