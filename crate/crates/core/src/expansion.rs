//! Leading endpoint terms A^{(j)}(ω) and certified remainder bounds.
//!
//! ```text
//! ∫ U e^{iωψ} = Σ_j A^{(j)}(ω) + R_1^{(j)}(ω, q) + R_2^{(j)}(ω, q)
//! A^{(j)}(ω) = e^{iωψ(p_j)} k_j(0) Θ^{(j)}(ρ_j, μ_j) ω^{−μ_j/ρ_j}
//! ```

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::{build_frame, PhaseModel, SingularAmplitude, SubstitutionFrame};
use crate::quad::{adaptive, gk15_real, AdaptiveSpec, JacobiRule, Panel, PanelEstimate, PanelKind};
use crate::specfun::{gamma_pos, theta, Side};

/// Parameters of the refined remainder estimate used when μ_j = 1 and ρ_j ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    pub gamma: f64,
    /// δ = (γ+1)/ρ_j. `None` derives it per side.
    pub delta: Option<f64>,
    /// L_{γ,ρ}. Not available in closed form; terms using it are non-certified.
    pub l_const: f64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            gamma: 0.5,
            delta: None,
            l_const: 1.0,
        }
    }
}

impl ExpansionConfig {
    /// Config whose δ equals `delta` on a side of order `rho`.
    pub fn for_delta(delta: f64, rho: f64) -> Result<ExpansionConfig> {
        let gamma = rho * delta - 1.0;
        let cfg = ExpansionConfig {
            gamma,
            delta: Some(delta),
            l_const: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(domain(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.l_const > 0.0 && self.l_const.is_finite()) {
            return Err(domain(format!("L_const must be positive, got {}", self.l_const)));
        }
        Ok(())
    }

    fn delta_for(&self, rho: f64) -> Result<f64> {
        let derived = (self.gamma + 1.0) / rho;
        if let Some(d) = self.delta {
            if (d - derived).abs() > 1e-12 {
                return Err(domain(format!(
                    "delta = {d} does not equal (gamma+1)/rho = {derived} for rho = {rho}"
                )));
            }
        }
        Ok(derived)
    }
}

/// Where a bound term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermOrigin {
    R1,
    R2,
    /// R_1 estimated through L_{γ,ρ}.
    R1Refined,
}

/// coeff · gap^{gap_exp} · ω^{omega_exp}
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: f64,
    pub omega_exp: f64,
    pub gap_exp: f64,
    pub side: Side,
    pub origin: TermOrigin,
    /// False when the coefficient involves L_{γ,ρ}.
    pub certified: bool,
}

impl PowerTerm {
    pub fn eval(&self, gap: f64, omega: f64) -> f64 {
        let g = if self.gap_exp == 0.0 { 1.0 } else { gap.powf(self.gap_exp) };
        self.coeff * g * omega.powf(self.omega_exp)
    }

    /// Decay exponent in ω, i.e. −omega_exp.
    pub fn omega_decay(&self) -> f64 {
        -self.omega_exp
    }

    /// Blow-up exponent in the gap, i.e. −gap_exp.
    pub fn gap_decay(&self) -> f64 {
        -self.gap_exp
    }
}

/// coeff · ω^{omega_exp}, with coeff evaluated at the result's ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingTerm {
    pub side: Side,
    pub coeff: Complex64,
    pub omega_exp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult {
    pub omega: f64,
    /// Value substituted for the gap p₀ − p₁ in bound terms (1 when unused).
    pub gap: f64,
    pub leading: Vec<LeadingTerm>,
    pub bound_terms: Vec<PowerTerm>,
    pub q_used: f64,
    pub config: ExpansionConfig,
}

impl ExpansionResult {
    pub fn leading_value(&self, side: Side) -> Complex64 {
        self.leading
            .iter()
            .filter(|t| t.side == side)
            .map(|t| t.coeff * self.omega.powf(t.omega_exp))
            .sum()
    }

    pub fn leading_sum(&self) -> Complex64 {
        self.leading.iter().map(|t| t.coeff * self.omega.powf(t.omega_exp)).sum()
    }

    pub fn total_bound(&self) -> f64 {
        self.bound_terms.iter().map(|t| t.eval(self.gap, self.omega)).sum()
    }

    pub fn certified_bound(&self) -> f64 {
        self.bound_terms
            .iter()
            .filter(|t| t.certified)
            .map(|t| t.eval(self.gap, self.omega))
            .sum()
    }

    pub fn non_certified_bound(&self) -> f64 {
        self.total_bound() - self.certified_bound()
    }

    /// Every bound term decays strictly faster in ω than the leading term of its side.
    pub fn rates_ordered(&self) -> bool {
        self.bound_terms.iter().all(|b| {
            self.leading
                .iter()
                .filter(|l| l.side == b.side)
                .all(|l| b.omega_exp < l.omega_exp)
        })
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(domain(format!("omega must be positive and finite, got {omega}")));
    }
    Ok(())
}

/// A^{(j)}(ω) = e^{iωψ(p_j)} k_j(0) Θ^{(j)} ω^{−μ_j/ρ_j}.
pub fn leading_term(frame: &SubstitutionFrame, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    Ok(leading_coefficient(frame, omega)? * omega.powf(-frame.mu / frame.rho))
}

fn leading_coefficient(frame: &SubstitutionFrame, omega: f64) -> Result<Complex64> {
    let th = theta(frame.side, frame.rho, frame.mu)?;
    Ok(Complex64::from_polar(1.0, omega * frame.psi_at_endpoint()) * frame.k_at_zero * th)
}

/// The ω-independent part of the R_1^{(j)} bound as a power term.
pub fn r1_term(frame: &SubstitutionFrame, config: &ExpansionConfig) -> Result<PowerTerm> {
    let rho = frame.rho;
    if frame.mu == 1.0 && rho >= 2.0 {
        config.validate()?;
        let delta = config.delta_for(rho)?;
        let integral = frame.weighted_k_prime_integral(-config.gamma)?;
        return Ok(PowerTerm {
            coeff: config.l_const * integral,
            omega_exp: -delta,
            gap_exp: 0.0,
            side: frame.side,
            origin: TermOrigin::R1Refined,
            certified: false,
        });
    }
    let integral = frame.weighted_k_prime_integral(frame.mu - 1.0)?;
    Ok(PowerTerm {
        coeff: gamma_pos(1.0 / rho)? / rho * integral,
        omega_exp: -1.0 / rho,
        gap_exp: 0.0,
        side: frame.side,
        origin: TermOrigin::R1,
        certified: true,
    })
}

/// Bound on |R_1^{(j)}(ω, q)|.
pub fn remainder_bound_r1(frame: &SubstitutionFrame, omega: f64, config: &ExpansionConfig) -> Result<f64> {
    check_omega(omega)?;
    Ok(r1_term(frame, config)?.eval(1.0, omega))
}

/// The ω-independent part of the R_2^{(j)} bound as a power term.
pub fn r2_term(frame: &SubstitutionFrame) -> Result<PowerTerm> {
    let rho = frame.rho;
    let mu = frame.mu;
    let u_q = frame.amplitude().eval(frame.q);
    let dphi = frame.phi_prime(frame.q).abs();
    let coeff = (rho - mu) / rho * gamma_pos(1.0 / rho)? * (u_q.norm() / dphi) * frame.s_end.powf(-rho);
    Ok(PowerTerm {
        coeff,
        omega_exp: -(1.0 + 1.0 / rho),
        gap_exp: 0.0,
        side: frame.side,
        origin: TermOrigin::R2,
        certified: true,
    })
}

/// Bound on |R_2^{(j)}(ω, q)|.
pub fn remainder_bound_r2(frame: &SubstitutionFrame, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(r2_term(frame)?.eval(1.0, omega))
}

/// Two-sided expansion with cutting point q.
pub fn expand_integral(
    phase: &PhaseModel,
    amp: &SingularAmplitude,
    q: f64,
    config: &ExpansionConfig,
    omega: f64,
) -> Result<ExpansionResult> {
    let frames = [
        build_frame(phase, amp, Side::Left, q)?,
        build_frame(phase, amp, Side::Right, q)?,
    ];
    expand_with_frames(&frames, config, omega)
}

/// Same as [`expand_integral`] for frames built once and reused across ω.
pub fn expand_with_frames(
    frames: &[SubstitutionFrame; 2],
    config: &ExpansionConfig,
    omega: f64,
) -> Result<ExpansionResult> {
    check_omega(omega)?;
    let mut leading = Vec::with_capacity(2);
    let mut bound_terms = Vec::with_capacity(4);
    for f in frames {
        leading.push(LeadingTerm {
            side: f.side,
            coeff: leading_coefficient(f, omega)?,
            omega_exp: -f.mu / f.rho,
        });
        bound_terms.push(r1_term(f, config)?);
        bound_terms.push(r2_term(f)?);
    }
    Ok(ExpansionResult {
        omega,
        gap: 1.0,
        leading,
        bound_terms,
        q_used: frames[0].q,
        config: *config,
    })
}

/// ∫_0^{r_end} r^a G(r)^{a/ρ} |dk/dr| dr with an algebraic-weight first panel
/// and breaks at sign changes of Re/Im dk/dr.
pub(crate) fn weighted_integral(frame: &SubstitutionFrame, a: f64) -> Result<f64> {
    if !(a > -1.0) {
        return Err(domain(format!("weight exponent must exceed -1, got {a}")));
    }
    let r_end = frame.r_end;
    let rho = frame.rho;
    let roots = sign_changes(frame);
    let first = roots.first().copied().unwrap_or(r_end).min(r_end / 8.0);
    let mut breaks = vec![first];
    for &r in &roots {
        if r > first * (1.0 + 1e-12) && r < r_end * (1.0 - 1e-12) {
            breaks.push(r);
        }
    }
    breaks.push(r_end);
    let mut init = vec![Panel {
        a: 0.0,
        b: first,
        kind: PanelKind::SingularLeft(a),
    }];
    let max_width = r_end / 8.0;
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        for k in 0..n {
            init.push(Panel {
                a: w[0] + (w[1] - w[0]) * k as f64 / n as f64,
                b: w[0] + (w[1] - w[0]) * (k + 1) as f64 / n as f64,
                kind: PanelKind::Regular,
            });
        }
    }
    let hi = JacobiRule::cached(24, a)?;
    let lo = JacobiRule::cached(12, a)?;
    let eval = |p: Panel| match p.kind {
        PanelKind::SingularLeft(_) => {
            let mut h = |x: f64| {
                let l = frame.local(p.a + x);
                l.g.powf(a / rho) * l.dk_dr.norm()
            };
            let v_hi = hi.integrate_real(p.b - p.a, &mut h);
            let v_lo = lo.integrate_real(p.b - p.a, &mut h);
            (
                PanelEstimate {
                    value: Complex64::new(v_hi, 0.0),
                    err: (v_hi - v_lo).abs(),
                    resabs: v_hi.abs(),
                },
                36,
            )
        }
        _ => {
            let mut f = |r: f64| {
                let l = frame.local(r);
                l.s.powf(a) * l.dk_dr.norm()
            };
            (gk15_real(&mut f, p.a, p.b), 15)
        }
    };
    let spec = AdaptiveSpec {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        budget: 2_000_000,
        what: "weighted |k'| integral",
    };
    let out = adaptive(&init, eval, spec)?;
    Ok(out.value.re)
}

/// Roots of Re dk/dr and Im dk/dr detected on a uniform 64-cell scan.
fn sign_changes(frame: &SubstitutionFrame) -> Vec<f64> {
    const CELLS: usize = 64;
    let r_end = frame.r_end;
    let pts: Vec<(f64, Complex64)> = (0..=CELLS)
        .map(|k| {
            let r = r_end * k as f64 / CELLS as f64;
            (r, frame.local(r).dk_dr)
        })
        .collect();
    let mut roots = Vec::new();
    for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
        for w in pts.windows(2) {
            let (fa, fb) = (part(w[0].1), part(w[1].1));
            if fa == 0.0 || fa * fb >= 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (w[0].0, w[1].0);
            let mut flo = fa;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = part(frame.local(mid).dk_dr);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * r_end {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * r_end);
    roots
}
