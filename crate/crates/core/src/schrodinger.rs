//! Free Schrödinger evolution of frequency-band data with one singular
//! frequency: u(t,x) = (1/2π) ∫ 𝓕u₀(p) e^{i(xp − tp²)} dp, the space-time
//! curve p₀ − p₁ = t^{−ε}, the region to its right, and decay-rate fits.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::SingularAmplitude;
use crate::oracle::{integrate_problem, OracleValue, OscProblem, DEFAULT_BUDGET};
use crate::quadratic::{curve_exponents, default_delta, CurveExponents};
use crate::specfun::gamma_pos;

#[derive(Debug, Clone)]
pub struct SchrodingerSetup {
    /// 𝓕u₀ on [p₁, p₂]
    pub amp: SingularAmplitude,
    pub p1: f64,
    pub p2: f64,
    pub mu: f64,
}

impl SchrodingerSetup {
    pub fn new(amp: SingularAmplitude) -> Result<SchrodingerSetup> {
        let mu = amp.mu1;
        if !(mu > 0.0 && mu < 1.0) {
            return Err(domain(format!("mu1 must lie in (0, 1), got {mu}")));
        }
        if amp.mu2 != 1.0 {
            return Err(domain(format!("the right endpoint must be regular (mu2 = 1), got {}", amp.mu2)));
        }
        let scale = amp.sup_norm_u.max(1e-300);
        let (p1, p2) = (amp.p1, amp.p2);
        let mut last = f64::INFINITY;
        for k in 2..=8 {
            let p = p2 - (p2 - p1) * 10f64.powi(-k);
            let v = amp.eval(p).norm();
            if v > last * (1.0 + 1e-9) + 1e-300 {
                return Err(domain("Fu0 must tend to 0 at p2"));
            }
            last = v;
        }
        if amp.eval(p2).norm() > 1e-12 * scale {
            return Err(domain("Fu0(p2) must vanish"));
        }
        Ok(SchrodingerSetup { amp, p1, p2, mu })
    }
}

/// p₀ = x/(2t)
pub fn stationary_point(t: f64, x: f64) -> f64 {
    x / (2.0 * t)
}

/// The point of 𝔊_ε at time t: x = 2p₁t + 2t^{1−ε}.
pub fn curve_point(setup: &SchrodingerSetup, eps: f64, t: f64) -> (f64, f64) {
    (t, 2.0 * setup.p1 * t + 2.0 * t.powf(1.0 - eps))
}

/// T_p = (2(p − p₁))^{−1/ε}
pub fn threshold_time(setup: &SchrodingerSetup, p: f64, eps: f64) -> Result<f64> {
    if !(p > setup.p1) {
        return Err(domain(format!("p = {p} must exceed p1 = {}", setup.p1)));
    }
    if !(eps > 0.0) {
        return Err(domain(format!("eps must be positive, got {eps}")));
    }
    Ok((2.0 * (p - setup.p1)).powf(-1.0 / eps))
}

pub fn region_contains(setup: &SchrodingerSetup, eps: f64, t: f64, x: f64) -> bool {
    let p0 = stationary_point(t, x);
    let t_end = (2.0 * (setup.p2 - setup.p1)).powf(-1.0 / eps);
    p0 - setup.p1 >= t.powf(-eps) && x < 2.0 * setup.p2 * t && t > t_end
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayCase {
    MuAboveHalf,
    MuHalf,
    MuBelowHalf,
}

fn decay_case(mu: f64) -> DecayCase {
    if (mu - 0.5).abs() <= 1e-12 {
        DecayCase::MuHalf
    } else if mu > 0.5 {
        DecayCase::MuAboveHalf
    } else {
        DecayCase::MuBelowHalf
    }
}

/// Decay exponent of u on the curve 𝔊_ε and in the region 𝔑_ε.
pub fn predicted_exponents(mu: f64, eps: f64) -> (f64, DecayCase) {
    let case = decay_case(mu);
    let e = match case {
        DecayCase::MuAboveHalf => -0.5 + eps * (1.0 - mu),
        DecayCase::MuHalf => -0.5 + eps / 2.0,
        DecayCase::MuBelowHalf => -mu + eps * mu,
    };
    (e, case)
}

/// H(t,u₀) and K_μ(t,u₀) on the curve, with their uniform bounds R_H, R_K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveCoefficients {
    pub h: Complex64,
    pub k: Complex64,
    pub r_h: f64,
    pub r_k: f64,
}

/// The phase of H is e^{itp₀²}, the value of the quadratic phase at its
/// stationary point.
pub fn curve_coefficients(setup: &SchrodingerSetup, eps: f64, t: f64) -> Result<CurveCoefficients> {
    let t_end = threshold_time(setup, setup.p2, eps)?;
    if !(t > t_end) {
        return Err(domain(format!("t = {t} must exceed T_p2 = {t_end}")));
    }
    let mu = setup.mu;
    let p1 = setup.p1;
    let p0 = p1 + t.powf(-eps);
    let sup = setup.amp.sup_norm_u;
    let h = 1.0 / (2.0 * PI.sqrt()) * Complex64::cis(-PI / 4.0 + t * p0 * p0) * (setup.amp.u_tilde)(p0);
    let psi_p1 = p0 * p0 - (p1 - p0) * (p1 - p0);
    let kc = gamma_pos(mu)? / (2f64.powf(mu + 1.0) * PI);
    let k = kc * Complex64::cis(PI * mu / 2.0 + t * psi_p1) * (setup.amp.u_tilde)(p1);
    Ok(CurveCoefficients {
        h,
        k,
        r_h: sup / (2.0 * PI.sqrt()),
        r_k: kc * sup,
    })
}

/// u(t, x) with its error estimate.
pub fn evaluate_solution_value(setup: &SchrodingerSetup, t: f64, x: f64, tol: f64) -> Result<OracleValue> {
    if !(t > 0.0 && t.is_finite() && x.is_finite()) {
        return Err(domain(format!("need t > 0 and finite x, got ({t}, {x})")));
    }
    if !(tol >= 1e-10 && tol.is_finite()) {
        return Err(domain(format!("tolerance must be at least 1e-10, got {tol}")));
    }
    let p0 = stationary_point(t, x);
    let amp = &setup.amp;
    let regular = |p: f64| (amp.u_tilde)(p);
    let psi = |p: f64| -(p - p0) * (p - p0) + p0 * p0;
    let dpsi = |p: f64| 2.0 * (p0 - p);
    let stationary = if p0 > setup.p1 + 1e-12 && p0 < setup.p2 - 1e-12 {
        vec![p0]
    } else {
        Vec::new()
    };
    let prob = OscProblem {
        lo: setup.p1,
        hi: setup.p2,
        left: Some((setup.p1, setup.mu - 1.0)),
        right: None,
        regular: &regular,
        phase: &psi,
        phase_prime: &dpsi,
        omega: t,
        stationary,
    };
    let v = integrate_problem(&prob, tol * 2.0 * PI, DEFAULT_BUDGET)?;
    Ok(OracleValue {
        value: v.value / (2.0 * PI),
        abs_error_estimate: v.abs_error_estimate / (2.0 * PI),
        ..v
    })
}

pub fn evaluate_solution(setup: &SchrodingerSetup, t: f64, x: f64, tol: f64) -> Result<Complex64> {
    evaluate_solution_value(setup, t, x, tol).map(|v| v.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub n_points: usize,
}

/// Least squares of log₁₀|u| on log₁₀ t.
pub fn fit_decay(samples: &[(f64, f64)]) -> Result<DecayFit> {
    let n = samples.len();
    if n < 8 {
        return Err(domain(format!("need at least 8 samples, got {n}")));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(domain("sample times must be strictly increasing"));
        }
    }
    if !(samples[0].0 > 0.0) {
        return Err(domain("sample times must be positive"));
    }
    if let Some(&(t, m)) = samples.iter().find(|s| !(s.1 > 0.0 && s.1.is_finite())) {
        return Err(domain(format!("magnitude at t = {t} must be positive and finite, got {m}")));
    }
    if (samples[n - 1].0 / samples[0].0).log10() < 2.0 - 1e-12 {
        return Err(domain("samples must span at least two decades"));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(t, m)| (t.log10(), m.log10())).collect();
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        slope,
        intercept,
        max_residual,
        n_points: n,
    })
}

/// n log-spaced points from lo to hi inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// δ used for the remainder exponents on 𝔊_ε: (μ+1)/2 when ε lies below
/// δ − 1/2, otherwise the midpoint of (ε + 1/2, 1).
pub fn curve_delta(mu: f64, eps: f64) -> Result<f64> {
    let d = default_delta(mu);
    if eps < d - 0.5 {
        return Ok(d);
    }
    if eps < 0.5 {
        return Ok(eps / 2.0 + 0.75);
    }
    Err(domain(format!("eps = {eps} must lie in (0, 1/2)")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub t: f64,
    pub x: f64,
    pub u: Complex64,
    pub leading: Complex64,
    pub residual: f64,
    pub coefficients: CurveCoefficients,
}

#[derive(Debug, Clone)]
pub struct CurveReport {
    pub mu: f64,
    pub eps: f64,
    pub delta: f64,
    pub case: DecayCase,
    pub predicted: f64,
    pub samples: Vec<CurveSample>,
    pub fit: DecayFit,
    pub residual_fit: DecayFit,
    pub exponents: CurveExponents,
    pub coefficients_bounded: bool,
    pub pass: bool,
}

fn check_grid(setup: &SchrodingerSetup, eps: f64, t_grid: &[f64]) -> Result<()> {
    let t_end = threshold_time(setup, setup.p2, eps)?;
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > t_end && t > 1.0)) {
        return Err(domain(format!("grid time {t} must exceed max(1, T_p2 = {t_end})")));
    }
    Ok(())
}

/// One point of 𝔊_ε: u, the case-appropriate leading term and the residual.
pub fn curve_sample(setup: &SchrodingerSetup, eps: f64, t: f64, tol: f64) -> Result<CurveSample> {
    let (_, x) = curve_point(setup, eps, t);
    let u = evaluate_solution(setup, t, x, tol)?;
    let c = curve_coefficients(setup, eps, t)?;
    let mu = setup.mu;
    let half = t.powf(-0.5 + eps * (1.0 - mu));
    let lead_mu = t.powf(-mu + eps * mu);
    let leading = match decay_case(mu) {
        DecayCase::MuAboveHalf => c.h * half,
        DecayCase::MuHalf => (c.h + c.k) * half,
        DecayCase::MuBelowHalf => c.k * lead_mu,
    };
    Ok(CurveSample {
        t,
        x,
        u,
        leading,
        residual: (u - leading).norm(),
        coefficients: c,
    })
}

/// Decay of u and of u minus its leading term along 𝔊_ε.
///
/// PASS when the fitted |u| slope is within 0.05 of the prediction and the
/// residual slope is steeper by at least 0.03.
pub fn verify_curve_expansion(setup: &SchrodingerSetup, eps: f64, t_grid: &[f64], tol: f64) -> Result<CurveReport> {
    curve_exponents(setup.mu, eps, curve_delta(setup.mu, eps)?)?;
    check_grid(setup, eps, t_grid)?;
    let samples = t_grid
        .iter()
        .map(|&t| curve_sample(setup, eps, t, tol))
        .collect::<Result<Vec<_>>>()?;
    curve_report(setup, eps, samples)
}

/// Assembles a [`CurveReport`] from precomputed samples in increasing t.
pub fn curve_report(setup: &SchrodingerSetup, eps: f64, samples: Vec<CurveSample>) -> Result<CurveReport> {
    let delta = curve_delta(setup.mu, eps)?;
    let exponents = curve_exponents(setup.mu, eps, delta)?;
    let (predicted, case) = predicted_exponents(setup.mu, eps);
    let fit = fit_decay(&samples.iter().map(|s| (s.t, s.u.norm())).collect::<Vec<_>>())?;
    let residual_fit = fit_decay(&samples.iter().map(|s| (s.t, s.residual)).collect::<Vec<_>>())?;
    let coefficients_bounded = samples.iter().all(|s| {
        let c = s.coefficients;
        c.h.norm() <= c.r_h * (1.0 + 1e-12) && c.k.norm() <= c.r_k * (1.0 + 1e-12)
    });
    let pass = (fit.slope - predicted).abs() <= 0.05 && residual_fit.slope <= fit.slope - 0.03;
    Ok(CurveReport {
        mu: setup.mu,
        eps,
        delta,
        case,
        predicted,
        samples,
        fit,
        residual_fit,
        exponents,
        coefficients_bounded,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct CriticalReport {
    pub mu: f64,
    pub predicted: f64,
    pub samples: Vec<(f64, Complex64)>,
    pub fit: DecayFit,
    pub pass: bool,
}

/// Decay along x = 2p₁t, where the stationary point sits on the singularity.
pub fn critical_direction(setup: &SchrodingerSetup, t_grid: &[f64], tol: f64) -> Result<CriticalReport> {
    let samples = t_grid
        .iter()
        .map(|&t| Ok((t, evaluate_solution(setup, t, 2.0 * setup.p1 * t, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    critical_report(setup, samples)
}

pub fn critical_report(setup: &SchrodingerSetup, samples: Vec<(f64, Complex64)>) -> Result<CriticalReport> {
    let predicted = -setup.mu / 2.0;
    let fit = fit_decay(&samples.iter().map(|s| (s.0, s.1.norm())).collect::<Vec<_>>())?;
    Ok(CriticalReport {
        mu: setup.mu,
        predicted,
        pass: (fit.slope - predicted).abs() <= 0.05,
        samples,
        fit,
    })
}

/// Point on ray k (θ = k/(n+1)) of 𝔑_ε at time t: p₀ = p₁ + g + θ(p₂ − p₁ − g), g = t^{−ε}.
pub fn region_point(setup: &SchrodingerSetup, eps: f64, t: f64, k: usize, n_rays: usize) -> (f64, f64) {
    let g = t.powf(-eps);
    let theta = k as f64 / (n_rays + 1) as f64;
    let p0 = setup.p1 + g + theta * (setup.p2 - setup.p1 - g);
    (t, 2.0 * t * p0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSample {
    pub t: f64,
    pub x: f64,
    /// 0 is the boundary curve.
    pub ray: usize,
    /// |u| t^{−e} with e the predicted exponent.
    pub scaled: f64,
}

#[derive(Debug, Clone)]
pub struct RegionReport {
    pub eps: f64,
    pub predicted: f64,
    pub curve_constant: f64,
    pub region_constant: f64,
    pub samples: Vec<RegionSample>,
    pub pass: bool,
}

impl RegionReport {
    pub fn ratio(&self) -> f64 {
        self.region_constant / self.curve_constant
    }
}

/// Samples 𝔑_ε on the given times and `n_rays` interior rays plus the boundary curve.
pub fn region_scan(setup: &SchrodingerSetup, eps: f64, t_grid: &[f64], n_rays: usize, tol: f64) -> Result<RegionReport> {
    check_grid(setup, eps, t_grid)?;
    let mut samples = Vec::with_capacity(t_grid.len() * (n_rays + 1));
    for &t in t_grid {
        for k in 0..=n_rays {
            let (_, x) = region_point(setup, eps, t, k, n_rays);
            let u = evaluate_solution(setup, t, x, tol)?;
            samples.push(region_sample(setup, eps, t, x, k, u));
        }
    }
    Ok(region_report(setup, eps, samples))
}

pub fn region_sample(setup: &SchrodingerSetup, eps: f64, t: f64, x: f64, ray: usize, u: Complex64) -> RegionSample {
    let (e, _) = predicted_exponents(setup.mu, eps);
    RegionSample {
        t,
        x,
        ray,
        scaled: u.norm() * t.powf(-e),
    }
}

pub fn region_report(setup: &SchrodingerSetup, eps: f64, samples: Vec<RegionSample>) -> RegionReport {
    let (predicted, _) = predicted_exponents(setup.mu, eps);
    let max = |on_curve: bool| {
        samples
            .iter()
            .filter(|s| (s.ray == 0) == on_curve)
            .map(|s| s.scaled)
            .fold(0.0, f64::max)
    };
    let curve_constant = max(true);
    let region_constant = max(false);
    RegionReport {
        eps,
        predicted,
        curve_constant,
        region_constant,
        pass: region_constant <= 3.0 * curve_constant,
        samples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupRow {
    pub eps: f64,
    pub predicted: f64,
    pub slope: f64,
    /// max over the grid of |u| t^{−e}
    pub constant: f64,
}

/// Empirical curve constants as ε grows towards 1/2; reported, never asserted.
pub fn blowup_scan(setup: &SchrodingerSetup, eps_list: &[f64], t_grid: &[f64], tol: f64) -> Result<Vec<BlowupRow>> {
    eps_list
        .iter()
        .map(|&eps| {
            check_grid(setup, eps, t_grid)?;
            let samples = t_grid
                .iter()
                .map(|&t| {
                    let (_, x) = curve_point(setup, eps, t);
                    Ok((t, evaluate_solution(setup, t, x, tol)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(blowup_row(setup, eps, &samples)?)
        })
        .collect()
}

pub fn blowup_row(setup: &SchrodingerSetup, eps: f64, samples: &[(f64, Complex64)]) -> Result<BlowupRow> {
    let (predicted, _) = predicted_exponents(setup.mu, eps);
    let fit = fit_decay(&samples.iter().map(|s| (s.0, s.1.norm())).collect::<Vec<_>>())?;
    let constant = samples
        .iter()
        .map(|s| s.1.norm() * s.0.powf(-predicted))
        .fold(0.0, f64::max);
    Ok(BlowupRow {
        eps,
        predicted,
        slope: fit.slope,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn intro(mu: f64) -> SchrodingerSetup {
        SchrodingerSetup::new(catalog::amplitude("intro", Some(mu), None).unwrap()).unwrap()
    }

    #[test]
    fn geometry() {
        assert_eq!(stationary_point(16.0, 16.0), 0.5);
        assert_eq!(stationary_point(1.0, 0.0), 0.0);
        assert_eq!(stationary_point(2.0, 6.0), 1.5);
        let s = intro(0.75);
        assert_eq!(curve_point(&s, 0.25, 16.0), (16.0, 16.0));
        assert!((threshold_time(&s, 0.5, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!((threshold_time(&s, 0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((threshold_time(&s, 2.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(threshold_time(&s, 0.0, 1.0).is_err());
        assert!(region_contains(&s, 0.25, 16.0, 16.0));
        assert!(!region_contains(&s, 0.25, 16.0, 40.0));
        assert!(!region_contains(&s, 0.25, 16.0, 4.0));
    }

    #[test]
    fn exponents() {
        assert_eq!(predicted_exponents(0.75, 0.25), (-0.4375, DecayCase::MuAboveHalf));
        let (e, c) = predicted_exponents(0.5, 0.3);
        assert!((e + 0.35).abs() < 1e-15 && c == DecayCase::MuHalf);
        let (e, c) = predicted_exponents(0.25, 0.1);
        assert!((e + 0.225).abs() < 1e-15 && c == DecayCase::MuBelowHalf);
    }

    #[test]
    fn intro_coefficients() {
        let s = intro(0.75);
        for t in [100.0, 1e4] {
            let c = curve_coefficients(&s, 0.25, t).unwrap();
            let want = (1.0 - t.powf(-0.25)) / (2.0 * PI.sqrt());
            assert!((c.h.norm() - want).abs() < 1e-15);
            let kw = gamma_pos(0.75).unwrap() / (2f64.powf(1.75) * PI) * Complex64::cis(PI * 0.375);
            assert!((c.k - kw).norm() < 1e-15);
        }
        assert!(curve_coefficients(&s, 0.25, 0.01).is_err());
    }

    #[test]
    fn small_time_limit() {
        let s = intro(0.75);
        let u = evaluate_solution(&s, 1e-9, 0.0, 1e-10).unwrap();
        assert!((u.re - 8.0 / (21.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn fit_exact_powers() {
        let ts = log_grid(1.0, 1e4, 16);
        let f = fit_decay(&ts.iter().map(|&t| (t, 3.0 * t.powf(-0.7))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.log10()).abs() < 1e-12);
        assert!(fit_decay(&[(1.0, 1.0); 4]).is_err());
    }

    #[test]
    fn setup_requires_vanishing_edge() {
        let a = catalog::amplitude("fresnel", Some(0.5), None).unwrap();
        assert!(SchrodingerSetup::new(a).is_err());
    }
}
