//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values are computed here from closed forms rather than
//! taken from the library.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bergman_lab::geometry::{
    diagram_residual, extract_linear, minimality_report, representativity_report, t_matrix, unitarity_report,
};
use bergman_lab::holomap::{best_linear_fit, preserves_domain, transformation_residual, HoloMap};
use bergman_lab::kernel::{build_model, gram_qmc, monomial_basis, ClosedForm, Cutoff, GramChoice, ModelConfig};
use bergman_lab::sampling::{probes, sample};
use bergman_lab::weight::{linear_forced, surviving_indices, weighted_degree, CoefficientClass};
use bergman_lab::{BergmanKernel, DomainSpec, KernelModel, MultiIndex, Weight};
use num_complex::Complex64 as C;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn zero(n: usize) -> Vec<C> {
    vec![C::new(0.0, 0.0); n]
}

fn disk_oracle(z: C, w: C) -> C {
    let d = C::new(1.0, 0.0) - z * w.conj();
    1.0 / (PI * d * d)
}

fn exact_disk_model() -> KernelModel {
    let spec = DomainSpec::by_id("disk").unwrap();
    build_model(&spec, &ModelConfig::default_for(&spec)).unwrap()
}

/// 10⁶ QMC points, weighted cutoff 12, seed 1.
fn qmc_model(id: &str) -> (KernelModel, Duration) {
    let spec = DomainSpec::by_id(id).unwrap();
    let w = spec.weight.clone().unwrap();
    let config = ModelConfig {
        cutoff: Cutoff::WeightedDegree { weight: w, n: 12 },
        gram: GramChoice::Qmc,
        ..ModelConfig::default_for(&spec)
    };
    let start = Instant::now();
    let m = build_model(&spec, &config).unwrap();
    (m, start.elapsed())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let model = exact_disk_model();
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let z = C::from_polar(0.7 * ((k + 1) as f64 / 20.0).sqrt(), 0.9 * k as f64);
        let w = C::from_polar(0.7 * (1.0 - k as f64 / 40.0), -1.3 * k as f64);
        assert!((z * w.conj()).norm() <= 0.5);
        let exact = disk_oracle(z, w);
        worst = worst.max((model.eval(&[z], &[w]).unwrap() - exact).norm() / exact.norm());
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-6 && elapsed < Duration::from_secs(1),
        format!("max relative error {worst:.3e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let model = exact_disk_model();
    let ps = probes(&DomainSpec::by_id("disk").unwrap(), 1).unwrap();
    let (mut k_err, mut t_err) = (0.0_f64, 0.0_f64);
    for z in &ps {
        k_err = k_err.max((model.eval(z, &zero(1)).unwrap() - 1.0 / PI).norm());
        t_err = t_err.max((t_matrix(&model, z, &zero(1)).unwrap().entries[(0, 0)] - 2.0).norm());
    }
    outcome(
        ps.len() == 16 && k_err < 1e-8 && t_err < 1e-8,
        format!("{} probes, |K − 1/π| ≤ {k_err:.2e}, |T − 2| ≤ {t_err:.2e}", ps.len()),
    )
}

fn criterion_3(models: &[(&str, &KernelModel, Duration)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(id, model, elapsed) in models {
        let spec = DomainSpec::by_id(id).unwrap();
        let ps = probes(&spec, 1).unwrap();
        let rep = minimality_report(model, &ps, &zero(2)).unwrap();
        // use the exact volume when it is known
        let volume = match id {
            "G2" => PI * PI / 2.0,
            "E_half2" => PI * PI / 30.0,
            _ => model.volume_estimate,
        };
        let k00 = model.eval(&zero(2), &zero(2)).unwrap();
        let vol_res = (k00 * volume - 1.0).norm();
        let var = rep.residual("k_variation");
        let ok = var < 0.05 && vol_res < 0.05 && elapsed < Duration::from_secs(120);
        pass &= ok;
        parts.push(format!("{id}: variation {var:.2e}, |K(0,0)Vol − 1| {vol_res:.2e}, build {:.1} s", elapsed.as_secs_f64()));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_4(d1f: &KernelModel) -> Outcome {
    let ps = probes(&DomainSpec::by_id("D1f").unwrap(), 1).unwrap();
    let rep = representativity_report(d1f, &ps, &zero(2)).unwrap();
    let (tv, od) = (rep.residual("t_variation"), rep.residual("off_diagonal"));
    outcome(tv < 0.1 && od < 0.1, format!("D1f: T variation {tv:.2e}, off-diagonal {od:.2e}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for m2 in 1..=50u32 {
        for m1 in 1..m2 {
            let g = gcd(m1, m2);
            if m1 >= 2 && g != 1 {
                continue;
            }
            let w = Weight::pair(m1, m2).unwrap();
            // a non-linear equivariant monomial z₁^k exists in the second
            // component exactly when m₂ is a multiple of m₁
            let expected = m1 >= 2;
            assert_eq!(expected, m2 % m1 != 0);
            if linear_forced(&w, 64).unwrap() != expected {
                failures.push(format!("linear_forced({m1},{m2})"));
            }
            if m1 >= 2 && surviving_indices(&w, CoefficientClass::Kernel, 64).unwrap() != [MultiIndex::new(vec![0, 0])] {
                failures.push(format!("surviving({m1},{m2})"));
            }
            checked += 1;
        }
    }
    // the kernel class admits only the constant for (1, m₂) as well
    for m2 in 2..=50u32 {
        let w = Weight::pair(1, m2).unwrap();
        if surviving_indices(&w, CoefficientClass::Kernel, 64).unwrap() != [MultiIndex::new(vec![0, 0])] {
            failures.push(format!("surviving(1,{m2})"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(1),
        format!("{checked} weights, {} mismatches {:?}, {:.3} s", failures.len(), failures.iter().take(3).collect::<Vec<_>>(), elapsed.as_secs_f64()),
    )
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_6() -> Outcome {
    let k = ClosedForm::Disk;
    let mob = HoloMap::mobius_disk(C::new(0.3, 0.0)).unwrap();
    let ps = probes(&DomainSpec::by_id("disk").unwrap(), 1).unwrap();
    let u = unitarity_report(&k, &k, &mob, &zero(1)).unwrap().residual("unitarity");
    let d = diagram_residual(&k, &k, &mob, &zero(1), &ps).unwrap();
    let dr = d.residual("diagram");
    outcome(
        u < 1e-8 && dr < 1e-6 && d.provenance.skipped_probes == 0 && ps.len() == 16,
        format!("‖L*L − I‖ {u:.2e}, diagram {dr:.2e} at {} probes", ps.len()),
    )
}

fn criterion_7() -> Outcome {
    let mob = HoloMap::mobius_disk(C::new(0.3, 0.0)).unwrap();
    let ps = probes(&DomainSpec::by_id("disk").unwrap(), 1).unwrap();
    let pairs: Vec<_> = (0..10).map(|i| (ps[i].clone(), ps[(i + 5) % ps.len()].clone())).collect();
    // library residual, and an independent evaluation with the oracle kernel
    let lib = transformation_residual(&ClosedForm::Disk, &ClosedForm::Disk, &mob, &pairs).unwrap();
    let a = C::new(0.3, 0.0);
    let phi = |z: C| (z - a) / (1.0 - a.conj() * z);
    let dphi = |z: C| (1.0 - a.norm_sqr()) / ((1.0 - a.conj() * z) * (1.0 - a.conj() * z));
    let mut oracle = 0.0_f64;
    for (z, w) in &pairs {
        let (z, w) = (z[0], w[0]);
        let lhs = disk_oracle(z, w);
        let rhs = dphi(w).conj() * disk_oracle(phi(z), phi(w)) * dphi(z);
        oracle = oracle.max((lhs - rhs).norm() / lhs.norm());
    }
    outcome(lib < 1e-10 && oracle < 1e-10, format!("relative deviation {lib:.2e} (oracle {oracle:.2e}) at 10 pairs"))
}

fn criterion_8(d1f: &KernelModel) -> Outcome {
    let theta = 0.7;
    let spec = DomainSpec::by_id("D1f").unwrap();
    let f = HoloMap::rotation_weighted(spec.weight.as_ref().unwrap(), theta);
    let (_, rep) = extract_linear(d1f, d1f, &f, &probes(&spec, 1).unwrap()).unwrap();
    let q = rep.residual("linearity");
    let disk = exact_disk_model();
    let (a, rep) = extract_linear(&disk, &disk, &HoloMap::rotation(theta), &probes(&DomainSpec::by_id("disk").unwrap(), 1).unwrap()).unwrap();
    let e = rep.residual("linearity");
    let a_err = (a[(0, 0)] - C::from_polar(1.0, theta)).norm();
    outcome(q < 0.1 && e < 1e-8 && a_err < 1e-8, format!("D1f f_θ residual {q:.2e}; disk rotation residual {e:.2e}, |A − e^{{iθ}}| {a_err:.2e}"))
}

fn criterion_9() -> Outcome {
    let spec = DomainSpec::by_id("E_half2").unwrap();
    // enough proposals for 10⁵ accepted points at roughly one-third acceptance
    let cloud = sample(&spec, 400_000, 1).unwrap().head(100_000);
    assert_eq!(cloud.len(), 100_000);
    let phi = HoloMap::zapalowski(C::new(1.0, 0.0)).unwrap();
    let p = preserves_domain(&phi, &spec, &cloud);
    let origin = phi.eval(&zero(2)).unwrap();
    let (_, res) = best_linear_fit(&phi, cloud.points()).unwrap();
    outcome(
        p.forward == 1.0 && p.inverse == Some(1.0) && origin == zero(2) && res > 0.01,
        format!(
            "{} points: forward {:.6}, inverse {:.6}, φ(0) = 0, best linear fit residual {res:.3e}",
            cloud.len(),
            p.forward,
            p.inverse.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in bergman_lab::catalog().into_iter().filter(|s| s.weight.is_some()) {
        let w = spec.weight.clone().unwrap();
        let cutoff = if spec.dimension() == 1 { Cutoff::TotalDegree { n: 12 } } else { Cutoff::WeightedDegree { weight: w.clone(), n: 12 } };
        let basis = monomial_basis(spec.dimension(), cutoff, None).unwrap();
        let cloud = sample(&spec, 1_000_000, 1).unwrap();
        let g = gram_qmc(&basis, &cloud).unwrap();
        // sup over the cloud of |z^a| for each basis monomial
        let mut sup = vec![0.0_f64; basis.len()];
        for z in cloud.points() {
            for (s, k) in sup.iter_mut().zip(&basis.exponents) {
                let v: f64 = k.0.iter().zip(z).map(|(&e, x)| x.norm().powi(e)).product();
                *s = s.max(v);
            }
        }
        let noise = cloud.volume_estimate / (cloud.accepted as f64).sqrt();
        let mut worst = 0.0_f64;
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                let (da, db) = (weighted_degree(&basis.exponents[a], &w).unwrap(), weighted_degree(&basis.exponents[b], &w).unwrap());
                if da != db {
                    worst = worst.max(g.entries[(a, b)].norm() / (noise * sup[a] * sup[b]));
                }
            }
        }
        pass &= worst <= 5.0;
        parts.push(format!("{} {:.2}", spec.id(), worst));
    }
    outcome(pass, format!("max |G[a][b]| / noise scale: {}", parts.join(", ")))
}

fn criterion_11() -> Outcome {
    let r = 0.05;
    let k = ClosedForm::Annulus { inner: r };
    let w = [C::new(0.3, 0.0)];
    // 200 interior points of [0.05, 1]
    let grid: Vec<f64> = (1..=200).map(|i| r + (1.0 - r) * i as f64 / 201.0).collect();
    let min_on = |sign: f64| {
        grid.iter()
            .map(|&x| (sign * x, k.eval(&[C::new(sign * x, 0.0)], &w).unwrap().norm()))
            .fold((0.0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc })
    };
    let (x_neg, v_neg) = min_on(-1.0);
    let (x_pos, v_pos) = min_on(1.0);
    outcome(
        v_neg < 1e-3,
        format!("min |K(z, 0.3)| = {v_neg:.4e} at z = {x_neg:.5} on the negative radius; positive radius is zero-free (min {v_pos:.4} at z = {x_pos:.3})"),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 disk kernel", criterion_1()));
    results.push(("2 disk geometry", criterion_2()));
    let (d1f, t_d1f) = qmc_model("D1f");
    let (g2, t_g2) = qmc_model("G2");
    let (eh, t_eh) = qmc_model("E_half2");
    results.push(("3 minimality", criterion_3(&[("D1f", &d1f, t_d1f), ("G2", &g2, t_g2), ("E_half2", &eh, t_eh)])));
    results.push(("4 representativity", criterion_4(&d1f)));
    results.push(("5 weight arithmetic", criterion_5()));
    results.push(("6 unitarity and diagram", criterion_6()));
    results.push(("7 transformation formula", criterion_7()));
    results.push(("8 linearity extraction", criterion_8(&d1f)));
    results.push(("9 counterexample", criterion_9()));
    results.push(("10 block orthogonality", criterion_10()));
    results.push(("11 annulus kernel zero", criterion_11()));

    let ps = probes(&DomainSpec::by_id("E_half2").unwrap(), 1).unwrap();
    let rep = representativity_report(&eh, &ps, &zero(2)).unwrap();
    println!(
        "info   E_half2 representativity: T variation {:.3e}, off-diagonal {:.3e}",
        rep.residual("t_variation"),
        rep.residual("off_diagonal")
    );

    let phi = HoloMap::zapalowski(C::new(1.0, 0.0)).unwrap();
    let (_, lin) = extract_linear(&eh, &eh, &phi, &ps).unwrap();
    println!("info   E_half2 linearity extraction for the nonlinear automorphism: residual {:.3e}", lin.residual("linearity"));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
