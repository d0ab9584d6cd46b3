//! Quadratic phase ψ(p) = −(p − p₀)² + c with a singular left endpoint:
//! closed-form leading coefficients, the eight explicit remainder power terms,
//! and the curve exponents obtained when p₀ = p₁ + ω^{−ε}.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::expansion::{ExpansionConfig, ExpansionResult, LeadingTerm, PowerTerm, TermOrigin};
use crate::model::{build_frame, PhaseModel, SingularAmplitude, SubstitutionFrame};
use crate::specfun::{gamma_pos, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPhase {
    pub p0: f64,
    pub c: f64,
    pub p1: f64,
    pub p2: f64,
}

impl QuadraticPhase {
    pub fn new(p0: f64, c: f64, p1: f64, p2: f64) -> Result<QuadraticPhase> {
        if !(p1.is_finite() && p2.is_finite() && p1 < p2 && p0.is_finite() && c.is_finite()) {
            return Err(domain("quadratic phase needs finite p1 < p2 and finite p0, c"));
        }
        Ok(QuadraticPhase { p0, c, p1, p2 })
    }

    pub fn psi(&self, p: f64) -> f64 {
        -(p - self.p0) * (p - self.p0) + self.c
    }

    pub fn psi_prime(&self, p: f64) -> f64 {
        2.0 * (self.p0 - p)
    }

    /// p₀ − p₁
    pub fn gap(&self) -> f64 {
        self.p0 - self.p1
    }

    fn check_split(&self) -> Result<()> {
        if !(self.p0 > self.p1 && self.p0 < self.p2) {
            return Err(domain(format!(
                "stationary point p0 = {} must lie in ({}, {})",
                self.p0, self.p1, self.p2
            )));
        }
        Ok(())
    }

    /// The phase restricted to [p₁, p₀], where p₀ is a stationary endpoint of order 1.
    pub fn left_model(&self) -> Result<PhaseModel> {
        self.check_split()?;
        let (p0, c) = (self.p0, self.c);
        PhaseModel::new(
            self.p1,
            self.p0,
            1.0,
            2.0,
            Arc::new(move |p| -(p - p0) * (p - p0) + c),
            Arc::new(move |p| 2.0 * (p0 - p)),
            Arc::new(|_| 2.0),
            Arc::new(|_| 0.0),
        )
    }
}

/// The amplitude restricted to [p₁, p₀].
pub fn left_amplitude(amp: &SingularAmplitude, qp: &QuadraticPhase) -> Result<SingularAmplitude> {
    qp.check_split()?;
    SingularAmplitude::new(
        amp.p1,
        qp.p0,
        amp.mu1,
        1.0,
        amp.u_tilde.clone(),
        amp.u_tilde_prime.clone(),
        amp.sup_norm_u,
        amp.sobolev_norm_u,
    )
}

/// Generic frames of I^{(1)} = ∫_{p₁}^{p₀} U e^{iωψ} for a cutting point q.
pub fn left_frames(amp: &SingularAmplitude, qp: &QuadraticPhase, q: f64) -> Result<[SubstitutionFrame; 2]> {
    let phase = qp.left_model()?;
    let a = left_amplitude(amp, qp)?;
    Ok([
        build_frame(&phase, &a, Side::Left, q)?,
        build_frame(&phase, &a, Side::Right, q)?,
    ])
}

fn check_amplitude(amp: &SingularAmplitude, qp: &QuadraticPhase) -> Result<()> {
    if (amp.p1 - qp.p1).abs() > 0.0 || (amp.p2 - qp.p2).abs() > 0.0 {
        return Err(domain("amplitude and quadratic phase live on different intervals"));
    }
    if !(amp.mu1 > 0.0 && amp.mu1 < 1.0) || amp.mu2 != 1.0 {
        return Err(domain("the quadratic expansion needs mu1 in (0, 1) and mu2 = 1"));
    }
    Ok(())
}

/// (K̃, H̃^{(1)}, H̃^{(2)}).
pub fn quadratic_coefficients(
    amp: &SingularAmplitude,
    qp: &QuadraticPhase,
    omega: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    check_amplitude(amp, qp)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(domain(format!("omega must be positive, got {omega}")));
    }
    let mu = amp.mu1;
    let k = gamma_pos(mu)? / 2f64.powf(mu)
        * Complex64::from_polar(1.0, PI * mu / 2.0 + omega * qp.psi(qp.p1))
        * (amp.u_tilde)(qp.p1);
    let h = PI.sqrt() / 2.0 * Complex64::from_polar(1.0, -PI / 4.0 + omega * qp.c) * (amp.u_tilde)(qp.p0);
    Ok((k, h, h))
}

/// δ = (μ+1)/2, the smallest admissible value.
pub fn default_delta(mu: f64) -> f64 {
    (mu + 1.0) / 2.0
}

fn check_delta(mu: f64, delta: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(domain(format!("mu must lie in (0, 1), got {mu}")));
    }
    let lo = default_delta(mu);
    if !(delta >= lo - 1e-15 && delta < 1.0) {
        return Err(domain(format!("delta = {delta} must lie in [{lo}, 1) for mu = {mu}")));
    }
    Ok(())
}

/// The six side-1 and two side-2 bound terms, with L_{γ,2} = `l_const`.
///
/// Terms are ordered as printed: side 1 (2−μ,1), (1−μ,1), (4−μ,2), (1+γ−μ,δ),
/// (γ−μ,δ), (3−μ,3/2); side 2 (2−μ,δ), (1−μ,δ). Side-1 terms from the p₁ end
/// carry `Side::Left`; everything attached to p₀ carries `Side::Right`.
pub fn quadratic_remainder_terms_with(amp: &SingularAmplitude, delta: f64, l_const: f64) -> Result<Vec<PowerTerm>> {
    let mu = amp.mu1;
    check_delta(mu, delta)?;
    if !(l_const > 0.0 && l_const.is_finite()) {
        return Err(domain(format!("L_const must be positive, got {l_const}")));
    }
    let gamma = 2.0 * delta - 1.0;
    let w = amp.sobolev_norm_u;
    let sup = amp.sup_norm_u;
    let r1 = 2f64.powf(1.0 - mu) / mu * w;
    let lterm = l_const / (1.0 - gamma) * 2f64.powf(gamma - mu) * w;
    let side2 = l_const / (1.0 - gamma) * (amp.p2 - amp.p1).powf(1.0 - gamma) * w;
    let term = |coeff: f64, gap: f64, om: f64, side: Side, origin: TermOrigin| PowerTerm {
        coeff,
        omega_exp: -om,
        gap_exp: -gap,
        side,
        origin,
        certified: origin != TermOrigin::R1Refined,
    };
    Ok(vec![
        term(r1 * 2.0 * (2.0 - mu), 2.0 - mu, 1.0, Side::Left, TermOrigin::R1),
        term(r1, 1.0 - mu, 1.0, Side::Left, TermOrigin::R1),
        term((1.0 - mu) / 2f64.powf(mu - 2.0) * sup, 4.0 - mu, 2.0, Side::Left, TermOrigin::R2),
        term(lterm * 2.0 * (1.0 - mu), 1.0 + gamma - mu, delta, Side::Right, TermOrigin::R1Refined),
        term(lterm, gamma - mu, delta, Side::Right, TermOrigin::R1Refined),
        term(PI.sqrt() / 2f64.powf(mu - 2.0) * sup, 3.0 - mu, 1.5, Side::Right, TermOrigin::R2),
        term(side2 * (1.0 - mu), 2.0 - mu, delta, Side::Right, TermOrigin::R1Refined),
        term(side2, 1.0 - mu, delta, Side::Right, TermOrigin::R1Refined),
    ])
}

/// [`quadratic_remainder_terms_with`] with L_{γ,2} = 1.
pub fn quadratic_remainder_terms(amp: &SingularAmplitude, delta: f64) -> Result<Vec<PowerTerm>> {
    quadratic_remainder_terms_with(amp, delta, 1.0)
}

/// Number of side-1 terms in [`quadratic_remainder_terms`].
pub const SIDE1_TERMS: usize = 6;

/// Decay exponents along p₀ = p₁ + ω^{−ε}.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveExponents {
    pub mu: f64,
    pub eps: f64,
    pub delta: f64,
    /// −μ + εμ
    pub lead_mu_exp: f64,
    /// −1/2 + ε(1−μ)
    pub lead_half_exp: f64,
    pub alpha: f64,
    pub beta: f64,
    /// ε·gap − ω exponent of each side-1 term.
    pub alpha_candidates: Vec<f64>,
    pub beta_candidates: Vec<f64>,
}

impl CurveExponents {
    pub fn min_lead(&self) -> f64 {
        self.lead_mu_exp.min(self.lead_half_exp)
    }

    /// Distance between the slowest leading rate and the slowest remainder
    /// rate, over both integrals; vanishes as ε → δ − 1/2.
    pub fn min_gap(&self) -> f64 {
        (self.min_lead() + self.alpha).min(self.lead_half_exp + self.beta)
    }

    pub fn ordering_holds(&self) -> bool {
        -self.alpha < self.min_lead() && -self.beta < self.lead_half_exp
    }
}

/// Exponent candidates (ε·gap_decay − ω_decay) of the printed terms.
fn candidates(mu: f64, eps: f64, delta: f64) -> (Vec<f64>, Vec<f64>) {
    let gamma = 2.0 * delta - 1.0;
    let side1 = [
        (2.0 - mu, 1.0),
        (1.0 - mu, 1.0),
        (4.0 - mu, 2.0),
        (1.0 + gamma - mu, delta),
        (gamma - mu, delta),
        (3.0 - mu, 1.5),
    ];
    let side2 = [(2.0 - mu, delta), (1.0 - mu, delta)];
    let f = |&(g, w): &(f64, f64)| eps * g - w;
    (side1.iter().map(f).collect(), side2.iter().map(f).collect())
}

pub fn curve_exponents(mu: f64, eps: f64, delta: f64) -> Result<CurveExponents> {
    check_delta(mu, delta)?;
    if !(eps > 0.0 && eps < delta - 0.5) {
        return Err(domain(format!(
            "eps = {eps} must lie in the open interval (0, delta - 1/2) = (0, {})",
            delta - 0.5
        )));
    }
    let (a, b) = candidates(mu, eps, delta);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CurveExponents {
        mu,
        eps,
        delta,
        lead_mu_exp: -mu + eps * mu,
        lead_half_exp: -0.5 + eps * (1.0 - mu),
        alpha: -max(&a),
        beta: -max(&b),
        alpha_candidates: a,
        beta_candidates: b,
    })
}

/// Leading terms and the eight bound terms at (p₀ − p₁, ω); the cutting point is the midpoint.
pub fn expand_quadratic(amp: &SingularAmplitude, qp: &QuadraticPhase, omega: f64, delta: f64) -> Result<ExpansionResult> {
    check_amplitude(amp, qp)?;
    qp.check_split()?;
    let scale = amp.sup_norm_u.max(1.0);
    if (amp.u_tilde)(qp.p2).norm() > 1e-14 * scale {
        return Err(domain("the quadratic expansion needs U(p2) = 0"));
    }
    let mu = amp.mu1;
    let gap = qp.gap();
    let (k, h1, h2) = quadratic_coefficients(amp, qp, omega)?;
    let terms = quadratic_remainder_terms(amp, delta)?;
    let leading = vec![
        LeadingTerm {
            side: Side::Left,
            coeff: k * gap.powf(-mu),
            omega_exp: -mu,
        },
        LeadingTerm {
            side: Side::Right,
            coeff: h1 * gap.powf(mu - 1.0),
            omega_exp: -0.5,
        },
        LeadingTerm {
            side: Side::Right,
            coeff: h2 * gap.powf(mu - 1.0),
            omega_exp: -0.5,
        },
    ];
    Ok(ExpansionResult {
        omega,
        gap,
        leading,
        bound_terms: terms,
        q_used: qp.p1 + gap / 2.0,
        config: ExpansionConfig {
            gamma: 2.0 * delta - 1.0,
            delta: Some(delta),
            l_const: 1.0,
        },
    })
}
