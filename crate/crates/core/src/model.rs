//! Amplitudes with algebraic endpoint singularities, phases with stationary
//! endpoints of real order, and the per-side substitution frames.
//!
//! A frame for side j works in the distance r from the endpoint p_j. With
//! W the regular factor of ψ' and V the regular factor of U seen from p_j,
//!
//! ```text
//! ψ(p_j ± r) − ψ(p_j) = ±r^ρ G(r),   G(r) = ∫_0^1 y^{ρ−1} W(r y) dy,
//! s = φ_j(p) = r G(r)^{1/ρ},        k_j(s) = ±ρ G(r)^{(ρ−μ)/ρ} V(r) / W(r),
//! ```
//!
//! so every quantity is a smooth function of r down to r = 0 and no 0/0
//! quotient is ever formed.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quad::{solve_monotone, JacobiRule};
use crate::specfun::Side;

pub type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexMap = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

const CHECK_GRID: usize = 1024;
const G_NODES: usize = 24;

/// U(p) = (p−p₁)^{μ₁−1} (p₂−p)^{μ₂−1} ũ(p) on [p₁, p₂].
#[derive(Clone)]
pub struct SingularAmplitude {
    pub p1: f64,
    pub p2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub u_tilde: ComplexMap,
    pub u_tilde_prime: ComplexMap,
    /// ‖ũ‖_∞
    pub sup_norm_u: f64,
    /// ‖ũ‖_{W^{1,∞}} = ‖ũ‖_∞ + ‖ũ'‖_∞
    pub sobolev_norm_u: f64,
}

impl fmt::Debug for SingularAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularAmplitude")
            .field("p1", &self.p1)
            .field("p2", &self.p2)
            .field("mu1", &self.mu1)
            .field("mu2", &self.mu2)
            .field("sup_norm_u", &self.sup_norm_u)
            .field("sobolev_norm_u", &self.sobolev_norm_u)
            .finish_non_exhaustive()
    }
}

impl SingularAmplitude {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p1: f64,
        p2: f64,
        mu1: f64,
        mu2: f64,
        u_tilde: ComplexMap,
        u_tilde_prime: ComplexMap,
        sup_norm_u: f64,
        sobolev_norm_u: f64,
    ) -> Result<SingularAmplitude> {
        if !(p1.is_finite() && p2.is_finite() && p1 < p2) {
            return Err(domain(format!("need finite p1 < p2, got [{p1}, {p2}]")));
        }
        for (name, mu) in [("mu1", mu1), ("mu2", mu2)] {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(domain(format!("{name} must lie in (0, 1], got {mu}")));
            }
        }
        if !(sup_norm_u >= 0.0 && sobolev_norm_u >= sup_norm_u && sobolev_norm_u.is_finite()) {
            return Err(domain("norms must satisfy 0 <= sup_norm_u <= sobolev_norm_u < inf"));
        }
        let mut grid_max: f64 = 0.0;
        for k in 0..CHECK_GRID {
            let p = p1 + (p2 - p1) * k as f64 / (CHECK_GRID - 1) as f64;
            let v = u_tilde(p);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(domain(format!("u_tilde is not finite at p = {p}")));
            }
            grid_max = grid_max.max(v.norm());
        }
        if grid_max > sup_norm_u * (1.0 + 1e-12) {
            return Err(domain(format!(
                "sup_norm_u = {sup_norm_u} is below the grid maximum {grid_max} of |u_tilde|"
            )));
        }
        // A vanishing amplitude is the trivial case and exempt from the endpoint test.
        if grid_max > 0.0 {
            for (name, mu, p) in [("p1", mu1, p1), ("p2", mu2, p2)] {
                if mu != 1.0 && u_tilde(p).norm() == 0.0 {
                    return Err(domain(format!("u_tilde must not vanish at the singular endpoint {name}")));
                }
            }
        }
        Ok(SingularAmplitude {
            p1,
            p2,
            mu1,
            mu2,
            u_tilde,
            u_tilde_prime,
            sup_norm_u,
            sobolev_norm_u,
        })
    }

    /// U(p)
    pub fn eval(&self, p: f64) -> Complex64 {
        let mut w = 1.0;
        if self.mu1 != 1.0 {
            w *= (p - self.p1).powf(self.mu1 - 1.0);
        }
        if self.mu2 != 1.0 {
            w *= (self.p2 - p).powf(self.mu2 - 1.0);
        }
        (self.u_tilde)(p) * w
    }

    pub fn mu(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.mu1,
            Side::Right => self.mu2,
        }
    }

    /// V_j(p): U(p) with the singular factor of endpoint j removed.
    pub fn regular_part(&self, side: Side, p: f64) -> Complex64 {
        let ut = (self.u_tilde)(p);
        match side {
            Side::Left => ut * pow_or_one(self.p2 - p, self.mu2 - 1.0),
            Side::Right => ut * pow_or_one(p - self.p1, self.mu1 - 1.0),
        }
    }

    /// c·U, with norms scaled by |c|.
    pub fn scaled(&self, c: Complex64) -> SingularAmplitude {
        let u = self.u_tilde.clone();
        let du = self.u_tilde_prime.clone();
        SingularAmplitude {
            u_tilde: Arc::new(move |p| c * u(p)),
            u_tilde_prime: Arc::new(move |p| c * du(p)),
            sup_norm_u: self.sup_norm_u * c.norm(),
            sobolev_norm_u: self.sobolev_norm_u * c.norm(),
            ..self.clone()
        }
    }
}

fn pow_or_one(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        x.powf(a)
    }
}

/// ψ on [p₁, p₂] with ψ'(p) = (p−p₁)^{ρ₁−1}(p₂−p)^{ρ₂−1} ψ̃(p), ψ̃ > 0.
#[derive(Clone)]
pub struct PhaseModel {
    pub p1: f64,
    pub p2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub psi: RealMap,
    pub psi_prime: RealMap,
    pub psi_tilde: RealMap,
    /// ψ̃', consumed by the analytic chain rule for k_j'.
    pub psi_tilde_prime: RealMap,
}

impl fmt::Debug for PhaseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseModel")
            .field("p1", &self.p1)
            .field("p2", &self.p2)
            .field("rho1", &self.rho1)
            .field("rho2", &self.rho2)
            .finish_non_exhaustive()
    }
}

impl PhaseModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p1: f64,
        p2: f64,
        rho1: f64,
        rho2: f64,
        psi: RealMap,
        psi_prime: RealMap,
        psi_tilde: RealMap,
        psi_tilde_prime: RealMap,
    ) -> Result<PhaseModel> {
        if !(p1.is_finite() && p2.is_finite() && p1 < p2) {
            return Err(domain(format!("need finite p1 < p2, got [{p1}, {p2}]")));
        }
        for (name, rho) in [("rho1", rho1), ("rho2", rho2)] {
            if !(rho.is_finite() && rho >= 1.0) {
                return Err(domain(format!("{name} must be finite and >= 1, got {rho}")));
            }
        }
        let model = PhaseModel {
            p1,
            p2,
            rho1,
            rho2,
            psi,
            psi_prime,
            psi_tilde,
            psi_tilde_prime,
        };
        for k in 0..CHECK_GRID {
            let p = p1 + (p2 - p1) * k as f64 / (CHECK_GRID - 1) as f64;
            let t = (model.psi_tilde)(p);
            if !(t > 0.0 && t.is_finite()) {
                return Err(domain(format!("psi_tilde must be positive, got {t} at p = {p}")));
            }
            if k == 0 || k == CHECK_GRID - 1 {
                continue;
            }
            let want = model.factored_derivative(p);
            let got = (model.psi_prime)(p);
            if (got - want).abs() > 1e-10 * want.abs().max(f64::MIN_POSITIVE) {
                return Err(domain(format!(
                    "psi_prime disagrees with (p-p1)^(rho1-1) (p2-p)^(rho2-1) psi_tilde at p = {p}: {got} vs {want}"
                )));
            }
        }
        Ok(model)
    }

    fn factored_derivative(&self, p: f64) -> f64 {
        pow_or_one(p - self.p1, self.rho1 - 1.0) * pow_or_one(self.p2 - p, self.rho2 - 1.0) * (self.psi_tilde)(p)
    }

    pub fn rho(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.rho1,
            Side::Right => self.rho2,
        }
    }

    pub fn endpoint(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.p1,
            Side::Right => self.p2,
        }
    }

    /// ψ + c
    pub fn shifted(&self, c: f64) -> PhaseModel {
        let psi = self.psi.clone();
        PhaseModel {
            psi: Arc::new(move |p| psi(p) + c),
            ..self.clone()
        }
    }
}

/// Side-local evaluation at distance r from the endpoint.
#[derive(Debug, Clone, Copy)]
pub struct LocalEval {
    pub r: f64,
    /// s = φ_j(p)
    pub s: f64,
    /// ds/dr > 0
    pub ds_dr: f64,
    /// G(r)
    pub g: f64,
    /// k_j(s)
    pub k: Complex64,
    /// d k_j / dr; k_j'(s) = dk_dr / ds_dr.
    pub dk_dr: Complex64,
}

/// One side of the split integral: φ_j, its inverse, s_j and k_j.
#[derive(Clone)]
pub struct SubstitutionFrame {
    pub side: Side,
    pub q: f64,
    /// s_j = φ_j(q)
    pub s_end: f64,
    /// |q − p_j|
    pub r_end: f64,
    pub k_at_zero: Complex64,
    pub rho: f64,
    pub mu: f64,
    phase: PhaseModel,
    amp: SingularAmplitude,
    rule: Arc<JacobiRule>,
    r1_integral: OnceLock<f64>,
}

impl fmt::Debug for SubstitutionFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubstitutionFrame")
            .field("side", &self.side)
            .field("q", &self.q)
            .field("s_end", &self.s_end)
            .field("r_end", &self.r_end)
            .field("k_at_zero", &self.k_at_zero)
            .field("rho", &self.rho)
            .field("mu", &self.mu)
            .finish_non_exhaustive()
    }
}

/// Builds the frame of side j with cutting point q.
pub fn build_frame(phase: &PhaseModel, amp: &SingularAmplitude, side: Side, q: f64) -> Result<SubstitutionFrame> {
    let len = phase.p2 - phase.p1;
    if (phase.p1 - amp.p1).abs() > 1e-14 * len || (phase.p2 - amp.p2).abs() > 1e-14 * len {
        return Err(domain("phase and amplitude live on different intervals"));
    }
    if !(q > phase.p1 && q < phase.p2) {
        return Err(domain(format!(
            "cutting point q = {q} must lie strictly inside ({}, {})",
            phase.p1, phase.p2
        )));
    }
    let rho = phase.rho(side);
    let rule = JacobiRule::cached(G_NODES, rho - 1.0)?;
    let r_end = match side {
        Side::Left => q - phase.p1,
        Side::Right => phase.p2 - q,
    };
    let mut frame = SubstitutionFrame {
        side,
        q,
        s_end: 0.0,
        r_end,
        k_at_zero: Complex64::new(0.0, 0.0),
        rho,
        mu: amp.mu(side),
        phase: phase.clone(),
        amp: amp.clone(),
        rule,
        r1_integral: OnceLock::new(),
    };
    frame.s_end = frame.big_phi(r_end);
    frame.k_at_zero = k_limit_at_zero(phase, amp, side)?;
    if !(frame.s_end > 0.0 && frame.s_end.is_finite()) {
        return Err(domain(format!("degenerate frame: s_end = {}", frame.s_end)));
    }
    Ok(frame)
}

/// k_j(0) = (−1)^{j+1} |d_j|^{μ_j} V_j(p_j) with d_j = (φ_j^{-1})'(0).
pub fn k_limit_at_zero(phase: &PhaseModel, amp: &SingularAmplitude, side: Side) -> Result<Complex64> {
    let rho = phase.rho(side);
    let mu = amp.mu(side);
    let len = phase.p2 - phase.p1;
    let pj = phase.endpoint(side);
    let other_rho = match side {
        Side::Left => phase.rho2,
        Side::Right => phase.rho1,
    };
    let w0 = pow_or_one(len, other_rho - 1.0) * (phase.psi_tilde)(pj);
    if !(w0 > 0.0) {
        return Err(domain("psi_tilde must be positive at the endpoint"));
    }
    let d_abs = (rho / w0).powf(1.0 / rho);
    Ok(side.sign() * d_abs.powf(mu) * amp.regular_part(side, pj))
}

impl SubstitutionFrame {
    pub fn sign(&self) -> f64 {
        self.side.sign()
    }

    pub fn phase(&self) -> &PhaseModel {
        &self.phase
    }

    pub fn amplitude(&self) -> &SingularAmplitude {
        &self.amp
    }

    /// ψ(p_j)
    pub fn psi_at_endpoint(&self) -> f64 {
        (self.phase.psi)(self.phase.endpoint(self.side))
    }

    fn len(&self) -> f64 {
        self.phase.p2 - self.phase.p1
    }

    fn point(&self, r: f64) -> f64 {
        match self.side {
            Side::Left => self.phase.p1 + r,
            Side::Right => self.phase.p2 - r,
        }
    }

    fn distance(&self, p: f64) -> f64 {
        match self.side {
            Side::Left => p - self.phase.p1,
            Side::Right => self.phase.p2 - p,
        }
    }

    fn other_rho(&self) -> f64 {
        match self.side {
            Side::Left => self.phase.rho2,
            Side::Right => self.phase.rho1,
        }
    }

    fn other_mu(&self) -> f64 {
        match self.side {
            Side::Left => self.amp.mu2,
            Side::Right => self.amp.mu1,
        }
    }

    /// (W(r), W'(r))
    fn w(&self, r: f64) -> (f64, f64) {
        let p = self.point(r);
        let e = self.other_rho() - 1.0;
        let gap = self.len() - r;
        let t = (self.phase.psi_tilde)(p);
        let tp = (self.phase.psi_tilde_prime)(p) * self.sign();
        if e == 0.0 {
            return (t, tp);
        }
        let ge = gap.powf(e);
        (ge * t, -e * ge / gap * t + ge * tp)
    }

    /// (V(r), V'(r))
    fn v(&self, r: f64) -> (Complex64, Complex64) {
        let p = self.point(r);
        let e = self.other_mu() - 1.0;
        let gap = self.len() - r;
        let u = (self.amp.u_tilde)(p);
        let up = (self.amp.u_tilde_prime)(p) * self.sign();
        if e == 0.0 {
            return (u, up);
        }
        let ge = gap.powf(e);
        (u * ge, u * (-e * ge / gap) + up * ge)
    }

    /// (G(r), G'(r))
    fn g(&self, r: f64) -> (f64, f64) {
        let mut g = 0.0;
        let mut gp = 0.0;
        for (y, wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let (w, wp) = self.w(r * y);
            g += wt * w;
            gp += wt * y * wp;
        }
        (g, gp)
    }

    /// Φ(r) = φ_j(p_j ± r)
    fn big_phi(&self, r: f64) -> f64 {
        let mut g = 0.0;
        for (y, wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
            g += wt * self.w(r * y).0;
        }
        r * g.powf(1.0 / self.rho)
    }

    /// (Φ(r), Φ'(r))
    pub(crate) fn big_phi_with_derivative(&self, r: f64) -> (f64, f64) {
        let mut g = 0.0;
        for (y, wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
            g += wt * self.w(r * y).0;
        }
        let w = self.w(r).0;
        let rho = self.rho;
        (r * g.powf(1.0 / rho), w * g.powf(-(rho - 1.0) / rho) / rho)
    }

    /// Full side-local evaluation at distance r ∈ [0, r_end].
    pub fn local(&self, r: f64) -> LocalEval {
        let rho = self.rho;
        let mu = self.mu;
        let (g, gp) = self.g(r);
        let (w, wp) = self.w(r);
        let (v, vp) = self.v(r);
        let e = (rho - mu) / rho;
        let ge = g.powf(e);
        let big_k = v * (rho * ge / w);
        let dk = (vp * (ge / w) + v * (e * ge / g * gp / w) - v * (ge * wp / (w * w))) * rho;
        LocalEval {
            r,
            s: r * g.powf(1.0 / rho),
            ds_dr: w * g.powf(-(rho - 1.0) / rho) / rho,
            g,
            k: big_k * self.sign(),
            dk_dr: dk * self.sign(),
        }
    }

    /// φ_j(p) for p in I_j.
    pub fn phi(&self, p: f64) -> f64 {
        self.big_phi(self.distance(p))
    }

    /// φ_j'(p)
    pub fn phi_prime(&self, p: f64) -> f64 {
        self.big_phi_with_derivative(self.distance(p)).1 * self.sign()
    }

    /// Distance r ∈ [0, r_end] with Φ(r) = s.
    pub fn r_of_s(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s <= self.s_end * (1.0 + 1e-14)) {
            return Err(domain(format!("s = {s} outside [0, {}]", self.s_end)));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let s = s.min(self.s_end);
        let xtol = 1e-14 * self.len();
        solve_monotone(|r| self.big_phi_with_derivative(r), s, 0.0, self.r_end, xtol, 200)
            .ok_or(Error::RootFinding { s, iterations: 200 })
    }

    /// φ_j^{-1}(s)
    pub fn phi_inv(&self, s: f64) -> Result<f64> {
        Ok(self.point(self.r_of_s(s)?))
    }

    /// k_j(s) on [0, s_end].
    pub fn k(&self, s: f64) -> Result<Complex64> {
        if s == 0.0 {
            return Ok(self.k_at_zero);
        }
        Ok(self.local(self.r_of_s(s)?).k)
    }

    /// k_j'(s) on [0, s_end].
    pub fn k_prime(&self, s: f64) -> Result<Complex64> {
        let l = self.local(self.r_of_s(s)?);
        Ok(l.dk_dr / l.ds_dr)
    }

    /// ∫_0^{s_j} s^{a} |k_j'(s)| ds, a > −1, computed in r as
    /// ∫_0^{r_end} r^a G(r)^{a/ρ} |dk/dr| dr.
    pub fn weighted_k_prime_integral(&self, a: f64) -> Result<f64> {
        if a == self.mu - 1.0 {
            if let Some(v) = self.r1_integral.get() {
                return Ok(*v);
            }
            let v = crate::expansion::weighted_integral(self, a)?;
            let _ = self.r1_integral.set(v);
            return Ok(v);
        }
        crate::expansion::weighted_integral(self, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_phase() -> PhaseModel {
        PhaseModel::new(
            0.0,
            1.0,
            1.0,
            1.0,
            Arc::new(|p| p),
            Arc::new(|_| 1.0),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        )
        .unwrap()
    }

    fn quadratic_phase(p0: f64) -> PhaseModel {
        PhaseModel::new(
            0.0,
            p0,
            1.0,
            2.0,
            Arc::new(move |p| -(p - p0) * (p - p0) + p0 * p0),
            Arc::new(move |p| 2.0 * (p0 - p)),
            Arc::new(|_| 2.0),
            Arc::new(|_| 0.0),
        )
        .unwrap()
    }

    fn unit_amp(p2: f64, mu1: f64, mu2: f64) -> SingularAmplitude {
        SingularAmplitude::new(
            0.0,
            p2,
            mu1,
            mu2,
            Arc::new(|_| Complex64::new(1.0, 0.0)),
            Arc::new(|_| Complex64::new(0.0, 0.0)),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn quadratic_frames() {
        let phase = quadratic_phase(0.5);
        let amp = unit_amp(0.5, 0.75, 1.0);
        let f2 = build_frame(&phase, &amp, Side::Right, 0.25).unwrap();
        assert!((f2.s_end - 0.25).abs() < 1e-15);
        for &p in &[0.3, 0.4, 0.49] {
            assert!((f2.phi(p) - (0.5 - p)).abs() < 1e-15);
        }
        let f1 = build_frame(&phase, &amp, Side::Left, 0.25).unwrap();
        assert!((f1.s_end - 0.1875).abs() < 1e-15);
        for &p in &[0.01, 0.1, 0.2] {
            assert!((f1.phi(p) - (p - p * p)).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_frame() {
        let phase = identity_phase();
        let amp = unit_amp(1.0, 0.5, 0.5);
        let f = build_frame(&phase, &amp, Side::Left, 0.5).unwrap();
        assert!((f.s_end - 0.5).abs() < 1e-15);
        assert!((f.phi(0.3) - 0.3).abs() < 1e-15);
        assert!((f.k_at_zero - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_cut() {
        let phase = identity_phase();
        let amp = unit_amp(1.0, 0.5, 0.5);
        assert!(build_frame(&phase, &amp, Side::Left, 0.0).is_err());
        assert!(build_frame(&phase, &amp, Side::Left, 1.0).is_err());
        assert!(build_frame(&phase, &amp, Side::Left, 1.5).is_err());
    }

    #[test]
    fn rejects_inconsistent_models() {
        let bad = PhaseModel::new(
            0.0,
            1.0,
            1.0,
            1.0,
            Arc::new(|p| p),
            Arc::new(|_| 2.0),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        );
        assert!(bad.is_err());
        let bad = SingularAmplitude::new(
            0.0,
            1.0,
            0.5,
            1.0,
            Arc::new(|p| Complex64::new(p, 0.0)),
            Arc::new(|_| Complex64::new(1.0, 0.0)),
            1.0,
            2.0,
        );
        assert!(bad.is_err(), "u_tilde vanishes at a singular endpoint");
        let bad = SingularAmplitude::new(
            0.0,
            1.0,
            1.0,
            1.0,
            Arc::new(|p| Complex64::new(2.0 * p, 0.0)),
            Arc::new(|_| Complex64::new(2.0, 0.0)),
            1.0,
            3.0,
        );
        assert!(bad.is_err(), "sup norm below grid maximum");
    }
}
