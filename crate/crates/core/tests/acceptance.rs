//! One PASS/FAIL line per acceptance criterion. Failures are reported, never panicked on.

mod common;

use std::time::{Duration, Instant};

use common::*;
use stasis_core::catalog;
use stasis_core::expansion::{expand_integral, ExpansionConfig};
use stasis_core::model::{build_frame, PhaseModel, SingularAmplitude};
use stasis_core::oracle::{integrate_oscillatory, parts_total, phi_primitive};
use stasis_core::quadratic::curve_exponents;
use stasis_core::schrodinger::{
    critical_direction, fit_decay, region_scan, verify_curve_expansion, SchrodingerSetup,
};
use stasis_core::specfun::Side;

const ORACLE_TOL: f64 = 1e-12;

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn info(detail: String) {
    println!("       info: {detail}");
}

struct Case {
    phase: PhaseModel,
    mu1: f64,
    mu2: f64,
    amp: SingularAmplitude,
}

fn matrix() -> Vec<Case> {
    let mut out = Vec::new();
    for phase_name in ["linear", "linear-quadratic"] {
        for mu1 in [0.3, 0.5, 0.7] {
            for mu2 in [0.4, 0.6] {
                out.push(Case {
                    phase: catalog::phase(phase_name).expect("catalog phase"),
                    mu1,
                    mu2,
                    amp: catalog::amplitude("beta", Some(mu1), Some(mu2)).expect("catalog amplitude"),
                });
            }
        }
    }
    out
}

const QS: [f64; 3] = [0.3, 0.5, 0.7];

fn bessel(t: &mut Tally) {
    let phase = catalog::phase("linear").unwrap();
    let amp = catalog::amplitude("beta-bessel", None, None).unwrap();
    let mut worst_err: f64 = 0.0;
    let mut worst_time = Duration::ZERO;
    let mut ok = true;
    for w in [1.0f64, 10.0, 1e2, 1e3, 1e4] {
        let start = Instant::now();
        let got = integrate_oscillatory(&phase, &amp, w, ORACLE_TOL);
        let dt = start.elapsed();
        worst_time = worst_time.max(dt);
        match got {
            Ok(v) => {
                let err = (v.value - bessel_integral(w)).norm();
                worst_err = worst_err.max(err);
                ok &= err <= 1e-8 && dt <= Duration::from_secs(1);
            }
            Err(e) => {
                ok = false;
                info(format!("omega={w}: {e}"));
            }
        }
    }
    t.line(
        "1 Bessel closed form",
        ok,
        format!("max |I - pi e^(iw/2) J0(w/2)| = {worst_err:.2e} (tol 1e-8), slowest omega {worst_time:.2?} (limit 1 s)"),
    );
}

fn certified_bound(t: &mut Tally, cases: &[Case], grid: &[f64]) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    let mut total = 0;
    let mut errors = 0;
    for c in cases {
        for q in QS {
            for &w in grid {
                total += 1;
                let run = || -> stasis_core::Result<(f64, f64)> {
                    let e = expand_integral(&c.phase, &c.amp, q, &ExpansionConfig::default(), w)?;
                    let o = integrate_oscillatory(&c.phase, &c.amp, w, ORACLE_TOL)?;
                    Ok(((o.value - e.leading_sum()).norm(), e.certified_bound()))
                };
                match run() {
                    Ok((resid, bound)) => {
                        worst = worst.max(resid / bound);
                        if resid > bound {
                            violations += 1;
                        }
                    }
                    Err(_) => errors += 1,
                }
            }
        }
    }
    let dt = start.elapsed();
    t.line(
        "2 certified bound",
        violations == 0 && errors == 0 && dt <= Duration::from_secs(120),
        format!(
            "{} of {total} within bound, {errors} errors, worst residual/bound = {worst:.3}, {dt:.2?} (limit 2 min)",
            total - violations - errors
        ),
    );
}

fn primitive(t: &mut Tally) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_modulus: f64 = 0.0;
    let mut worst_signed: f64 = 0.0;
    let mut failures = Vec::new();
    let mut errors = 0;
    for rho in [1.0f64, 2.0, 3.0] {
        for mu in [0.25, 0.5, 0.75, 1.0] {
            for j in [1u8, 2] {
                for w in [1.0f64, 10.0, 100.0] {
                    let side = Side::from_index(j).unwrap();
                    let want = theta_formula(j, rho, mu) * w.powf(-mu / rho);
                    match phi_primitive(0.0, w, rho, mu, side, 1e-13) {
                        Ok(v) => {
                            let rel = (v - want).norm() / want.norm();
                            worst = worst.max(rel);
                            worst_modulus = worst_modulus.max((v.norm() - want.norm()).abs() / want.norm());
                            let sign = if j == 1 { -1.0 } else { 1.0 };
                            worst_signed = worst_signed.max((v - sign * want).norm() / want.norm());
                            if rel > 1e-8 {
                                failures.push(format!("(rho={rho},mu={mu},j={j},w={w})"));
                            }
                        }
                        Err(_) => errors += 1,
                    }
                }
            }
        }
    }
    let dt = start.elapsed();
    t.line(
        "3 primitive closed form",
        failures.is_empty() && errors == 0 && dt <= Duration::from_secs(30),
        format!(
            "{} of 72 points off by more than 1e-8 relative, {errors} errors, worst {worst:.2e}, {dt:.2?} (limit 30 s)",
            failures.len()
        ),
    );
    if !failures.is_empty() {
        let j1 = failures.iter().filter(|f| f.contains("j=1")).count();
        info(format!("{j1} of the failing points have j=1"));
    }
    info(format!("modulus agreement |phi| vs |Theta| w^(-mu/rho): worst {worst_modulus:.2e}"));
    info(format!("agreement with (-1)^j Theta w^(-mu/rho): worst {worst_signed:.2e}"));
}

fn power_law(t: &mut Tally, cases: &[Case], grid: &[f64]) {
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for c in cases {
        for q in QS {
            for &w in grid {
                let run = || -> stasis_core::Result<[f64; 2]> {
                    let a = expand_integral(&c.phase, &c.amp, q, &ExpansionConfig::default(), w)?;
                    let b = expand_integral(&c.phase, &c.amp, q, &ExpansionConfig::default(), 10.0 * w)?;
                    let mut out = [0.0; 2];
                    for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
                        let mu = if side == Side::Left { c.mu1 } else { c.mu2 };
                        let want = 10f64.powf(-mu / c.phase.rho(side));
                        let got = b.leading_value(side).norm() / a.leading_value(side).norm();
                        out[k] = (got - want).abs() / want;
                    }
                    Ok(out)
                };
                match run() {
                    Ok(r) => worst = worst.max(r[0]).max(r[1]),
                    Err(_) => errors += 1,
                }
            }
        }
    }
    t.line(
        "4 power-law exactness",
        worst <= 1e-12 && errors == 0,
        format!("worst relative deviation of |A(10w)|/|A(w)| from 10^(-mu/rho) = {worst:.2e} (tol 1e-12), {errors} errors"),
    );
}

fn exponent_ordering(t: &mut Tally) {
    let start = Instant::now();
    let mut checked = 0;
    let mut ordered = 0;
    let mut monotone = true;
    let mut smallest_final: f64 = 0.0;
    for a in 1..=10 {
        let mu = a as f64 / 11.0;
        let lo = (mu + 1.0) / 2.0;
        for b in 0..5 {
            let delta = lo + (1.0 - lo) * b as f64 / 5.0;
            let width = delta - 0.5;
            for c in 1..=10 {
                let eps = width * c as f64 / 11.0;
                checked += 1;
                if curve_exponents(mu, eps, delta).map(|e| e.ordering_holds()).unwrap_or(false) {
                    ordered += 1;
                }
            }
            let mut prev = f64::INFINITY;
            for k in 1..=12 {
                let eps = width * (1.0 - 0.5f64.powi(k));
                match curve_exponents(mu, eps, delta) {
                    Ok(e) => {
                        let g = e.min_gap();
                        monotone &= g > 0.0 && g < prev;
                        prev = g;
                    }
                    Err(_) => monotone = false,
                }
            }
            smallest_final = smallest_final.max(prev);
        }
    }
    let dt = start.elapsed();
    let gap_to_zero = smallest_final < 1e-3;
    t.line(
        "5 exponent ordering",
        ordered == checked && monotone && gap_to_zero && dt <= Duration::from_secs(1),
        format!(
            "{ordered} of {checked} grid points ordered, min-gap monotone = {monotone}, largest gap at eps = (delta-1/2)(1-2^-12) is {smallest_final:.2e}, {dt:.2?} (limit 1 s)"
        ),
    );
}

fn setup(mu: f64) -> SchrodingerSetup {
    SchrodingerSetup::new(catalog::amplitude("intro", Some(mu), None).unwrap()).unwrap()
}

fn curve_decay(t: &mut Tally) {
    let grid = log_grid(1e2, 1e6, 24);
    for (mu, eps, want) in [(0.75, 0.25, -0.4375), (0.5, 0.3, -0.35), (0.25, 0.1, -0.225)] {
        let start = Instant::now();
        let id = format!("6 curve decay mu={mu} eps={eps}");
        match verify_curve_expansion(&setup(mu), eps, &grid, 1e-10) {
            Ok(r) => {
                let dt = start.elapsed();
                let slope_ok = (r.fit.slope - want).abs() <= 0.05;
                let resid_ok = r.residual_fit.slope <= r.fit.slope - 0.03;
                t.line(
                    &id,
                    slope_ok && resid_ok && dt <= Duration::from_secs(180),
                    format!(
                        "slope {:.4} (want {want} +- 0.05), residual slope {:.4} (need <= {:.4}), delta {}, {dt:.2?} (limit 3 min)",
                        r.fit.slope,
                        r.residual_fit.slope,
                        r.fit.slope - 0.03,
                        r.delta
                    ),
                );
            }
            Err(e) => t.line(&id, false, format!("error: {e}")),
        }
    }
}

fn critical(t: &mut Tally) {
    let grid = log_grid(1e2, 1e6, 24);
    for mu in [0.25, 0.5, 0.75] {
        let start = Instant::now();
        let id = format!("7 critical direction mu={mu}");
        match critical_direction(&setup(mu), &grid, 1e-10) {
            Ok(r) => {
                let dt = start.elapsed();
                let want = -mu / 2.0;
                t.line(
                    &id,
                    (r.fit.slope - want).abs() <= 0.05 && dt <= Duration::from_secs(120),
                    format!("slope {:.4} (want {want} +- 0.05), {dt:.2?} (limit 2 min)", r.fit.slope),
                );
            }
            Err(e) => t.line(&id, false, format!("error: {e}")),
        }
    }
}

fn region(t: &mut Tally) {
    let start = Instant::now();
    match region_scan(&setup(0.75), 0.25, &log_grid(1e2, 1e6, 20), 10, 1e-10) {
        Ok(r) => {
            let dt = start.elapsed();
            t.line(
                "8 region estimate",
                r.region_constant <= 3.0 * r.curve_constant && dt <= Duration::from_secs(300),
                format!(
                    "sup over region {:.4}, on curve {:.4}, ratio {:.3} (limit 3), {dt:.2?} (limit 5 min)",
                    r.region_constant,
                    r.curve_constant,
                    r.ratio()
                ),
            );
        }
        Err(e) => t.line("8 region estimate", false, format!("error: {e}")),
    }
}

fn parts_agreement(t: &mut Tally, cases: &[Case], grid: &[f64]) {
    for q in QS {
        let start = Instant::now();
        let mut worst: f64 = 0.0;
        let mut errors = 0;
        for c in cases {
            let frames = match (
                build_frame(&c.phase, &c.amp, Side::Left, q),
                build_frame(&c.phase, &c.amp, Side::Right, q),
            ) {
                (Ok(a), Ok(b)) => [a, b],
                _ => {
                    errors += grid.len();
                    continue;
                }
            };
            for &w in grid {
                let o = integrate_oscillatory(&c.phase, &c.amp, w, ORACLE_TOL);
                let p = parts_total(&frames, w, ORACLE_TOL);
                match (o, p) {
                    (Ok(o), Ok(p)) => {
                        let tol = 1e-9f64.max(1e-8 * o.value.norm());
                        worst = worst.max((o.value - p.value).norm() / tol);
                    }
                    _ => errors += 1,
                }
            }
        }
        t.line(
            &format!("9 oracle cross-agreement q={q}"),
            worst <= 1.0 && errors == 0,
            format!(
                "worst |panel - parts| / max(1e-9, 1e-8|I|) = {worst:.2e}, {errors} errors, {:.2?}",
                start.elapsed()
            ),
        );
    }
}

/// The (μ, ε) decay matrix on 𝔊_ε, reported but not counted.
fn decay_matrix() {
    println!("decay matrix on the curve, t in [1e2, 1e6] (informational):");
    let grid = log_grid(1e2, 1e6, 24);
    for mu in [0.25, 0.5, 0.75] {
        for eps in [0.1, 0.25] {
            match verify_curve_expansion(&setup(mu), eps, &grid, 1e-10) {
                Ok(r) => {
                    let lead: Vec<(f64, f64)> = r.samples.iter().map(|s| (s.t, s.leading.norm())).collect();
                    let scaled: Vec<(f64, f64)> = r
                        .samples
                        .iter()
                        .map(|s| (s.t, s.u.norm() / (1.0 - s.t.powf(-eps))))
                        .collect();
                    let lead = fit_decay(&lead).map(|f| f.slope).unwrap_or(f64::NAN);
                    let scaled = fit_decay(&scaled).map(|f| f.slope).unwrap_or(f64::NAN);
                    let raw_ok = (r.fit.slope - r.predicted).abs() <= 0.05;
                    info(format!(
                        "mu={mu} eps={eps}: predicted {:.4}, |u| {:.4} [{}], leading term {lead:.4}, |u|/(1-t^-eps) {scaled:.4}",
                        r.predicted,
                        r.fit.slope,
                        if raw_ok { "PASS" } else { "FAIL" }
                    ));
                }
                Err(e) => info(format!("mu={mu} eps={eps}: error {e}")),
            }
        }
    }
}

fn main() {
    // accept and ignore libtest flags such as --nocapture
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let cases = matrix();
    let grid = log_grid(1.0, 1e4, 25);
    let mut t = Tally { failed: 0 };
    bessel(&mut t);
    certified_bound(&mut t, &cases, &grid);
    primitive(&mut t);
    power_law(&mut t, &cases, &grid);
    exponent_ordering(&mut t);
    curve_decay(&mut t);
    critical(&mut t);
    region(&mut t);
    parts_agreement(&mut t, &cases, &grid);
    decay_matrix();
    println!("acceptance: {} line(s) FAIL", t.failed);
}
