//! Experiment configs: TOML with a required `[amplitude]` table and optional `[phase]`, `[grid]` and `[tolerance]` tables.
//!
//! ```toml
//! kind = "sweep-omega"
//! output = "bessel_bound"
//!
//! [amplitude]
//! name = "beta-bessel"
//!
//! [phase]
//! name = "linear"
//!
//! [grid]
//! omega_min = 1.0
//! omega_max = 1e4
//! omega_points = 25
//! q = [0.3, 0.5, 0.7]
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use stasis_core::catalog;
use stasis_core::model::{PhaseModel, SingularAmplitude};
use stasis_core::quadratic::{curve_exponents, default_delta, QuadraticPhase};
use stasis_core::schrodinger::{log_grid, SchrodingerSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Expand,
    SweepOmega,
    SchrodingerCurve,
    SchrodingerRegion,
    CriticalDirection,
    BlowupScan,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Expand => "expand",
            Kind::SweepOmega => "sweep-omega",
            Kind::SchrodingerCurve => "schrodinger-curve",
            Kind::SchrodingerRegion => "schrodinger-region",
            Kind::CriticalDirection => "critical-direction",
            Kind::BlowupScan => "blowup-scan",
        }
    }

    fn is_integral(self) -> bool {
        matches!(self, Kind::Expand | Kind::SweepOmega)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    output: Option<String>,
    amplitude: RawAmplitude,
    #[serde(default)]
    phase: RawPhase,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    tolerance: RawTolerance,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmplitude {
    name: String,
    mu1: Option<f64>,
    mu2: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    name: Option<String>,
    p0: Option<f64>,
    c: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    omega: Option<Vec<f64>>,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    omega_points: Option<usize>,
    q: Option<Vec<f64>>,
    t: Option<Vec<f64>>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    t_points: Option<usize>,
    eps: Option<f64>,
    eps_list: Option<Vec<f64>>,
    delta: Option<f64>,
    rays: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerance {
    oracle: Option<f64>,
    slope: Option<f64>,
    residual_margin: Option<f64>,
}

#[derive(Clone)]
pub enum Phase {
    Generic(PhaseModel),
    /// ψ(p) = −(p − p₀)² + c; the cutting point is fixed at the midpoint of [p₁, p₀].
    Quadratic { qp: QuadraticPhase, delta: f64 },
}

#[derive(Clone)]
pub struct Config {
    pub kind: Kind,
    pub output: String,
    pub amplitude_name: String,
    pub amplitude: SingularAmplitude,
    pub phase: Option<Phase>,
    pub omega: Vec<f64>,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: Option<f64>,
    pub rays: usize,
    pub oracle_tol: f64,
    pub slope_tol: f64,
    pub residual_margin: f64,
}

impl Config {
    pub fn setup(&self) -> Result<SchrodingerSetup> {
        SchrodingerSetup::new(self.amplitude.clone()).map_err(|e| anyhow!("amplitude: {e}"))
    }
}

pub fn load(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results")
        .to_string();
    parse(&text, &stem).with_context(|| format!("invalid config {}", path.display()))
}

fn sorted_positive(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        bail!("{key}: grid must not be empty");
    }
    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        bail!("{key}: values must be positive and finite, got {x}");
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        bail!("{key}: values must be strictly increasing");
    }
    Ok(())
}

/// An explicit list `key`, or `key_min`/`key_max`/`key_points` expanded log-uniformly.
fn axis(
    key: &str,
    list: Option<Vec<f64>>,
    lo: Option<f64>,
    hi: Option<f64>,
    n: Option<usize>,
) -> Result<Option<Vec<f64>>> {
    let range = lo.is_some() || hi.is_some() || n.is_some();
    let grid = match (list, range) {
        (Some(_), true) => bail!("grid.{key}: give either a list or {key}_min/{key}_max/{key}_points, not both"),
        (Some(v), false) => v,
        (None, true) => {
            let lo = lo.ok_or_else(|| anyhow!("grid.{key}_min: missing"))?;
            let hi = hi.ok_or_else(|| anyhow!("grid.{key}_max: missing"))?;
            let n = n.ok_or_else(|| anyhow!("grid.{key}_points: missing"))?;
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                bail!("grid.{key}_min/{key}_max: need 0 < min < max, got {lo}, {hi}");
            }
            if n < 2 {
                bail!("grid.{key}_points: need at least 2 points, got {n}");
            }
            log_grid(lo, hi, n)
        }
        (None, false) => return Ok(None),
    };
    sorted_positive(&format!("grid.{key}"), &grid)?;
    Ok(Some(grid))
}

fn forbid<T>(kind: Kind, key: &str, v: &Option<T>) -> Result<()> {
    if v.is_some() {
        bail!("{key}: not used by kind {}", kind.name());
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{key}: must be positive and finite, got {v}");
    }
    Ok(v)
}

pub fn parse(text: &str, default_output: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| anyhow!("{}", e.message().trim()).context(location(&e, text)))?;
    let kind = raw.kind;
    let output = raw.output.unwrap_or_else(|| default_output.to_string());
    if output.is_empty() || output.contains(['/', '\\']) {
        bail!("output: must be a plain file stem, got '{output}'");
    }
    let amplitude = catalog::amplitude(&raw.amplitude.name, raw.amplitude.mu1, raw.amplitude.mu2)
        .map_err(|e| anyhow!("amplitude: {e}"))?;
    let g = raw.grid;
    let tol = raw.tolerance;
    let oracle_default = if kind.is_integral() { 1e-12 } else { 1e-10 };
    let oracle_tol = positive("tolerance.oracle", tol.oracle.unwrap_or(oracle_default))?;
    let slope_tol = positive("tolerance.slope", tol.slope.unwrap_or(0.05))?;
    let residual_margin = positive("tolerance.residual_margin", tol.residual_margin.unwrap_or(0.03))?;

    let omega = axis("omega", g.omega, g.omega_min, g.omega_max, g.omega_points)?;
    let t = axis("t", g.t, g.t_min, g.t_max, g.t_points)?;

    let mut cfg = Config {
        kind,
        output,
        amplitude_name: raw.amplitude.name,
        amplitude,
        phase: None,
        omega: Vec::new(),
        q: Vec::new(),
        t: Vec::new(),
        eps: Vec::new(),
        delta: None,
        rays: 0,
        oracle_tol,
        slope_tol,
        residual_margin,
    };

    if kind.is_integral() {
        for (key, v) in [("grid.t", t.is_some()), ("grid.eps", g.eps.is_some()), ("grid.eps_list", g.eps_list.is_some())] {
            if v {
                bail!("{key}: not used by kind {}", kind.name());
            }
        }
        forbid(kind, "grid.delta", &g.delta)?;
        forbid(kind, "grid.rays", &g.rays)?;
        cfg.omega = omega.ok_or_else(|| anyhow!("grid.omega: required for kind {}", kind.name()))?;
        let p = raw.phase;
        let quadratic = p.p0.is_some() || p.c.is_some() || p.delta.is_some();
        match (&p.name, quadratic) {
            (Some(_), true) => bail!("phase: give either name or p0/c, not both"),
            (None, false) => bail!("phase.name: required (or p0 and c for a quadratic phase)"),
            (Some(name), false) => {
                let model = catalog::phase(name).map_err(|e| anyhow!("phase.name: {e}"))?;
                let q = g.q.ok_or_else(|| anyhow!("grid.q: required for a catalog phase"))?;
                if q.is_empty() {
                    bail!("grid.q: grid must not be empty");
                }
                if let Some(x) = q.iter().find(|&&x| !(x > model.p1 && x < model.p2)) {
                    bail!("grid.q: cutting point {x} must lie in ({}, {})", model.p1, model.p2);
                }
                if q.windows(2).any(|w| w[1] <= w[0]) {
                    bail!("grid.q: values must be strictly increasing");
                }
                cfg.q = q;
                cfg.phase = Some(Phase::Generic(model));
            }
            (None, true) => {
                forbid(kind, "grid.q", &g.q).context("a quadratic phase cuts at the midpoint")?;
                let p0 = p.p0.ok_or_else(|| anyhow!("phase.p0: missing"))?;
                let c = p.c.ok_or_else(|| anyhow!("phase.c: missing"))?;
                let qp = QuadraticPhase::new(p0, c, cfg.amplitude.p1, cfg.amplitude.p2)
                    .map_err(|e| anyhow!("phase: {e}"))?;
                if !(p0 > qp.p1 && p0 < qp.p2) {
                    bail!("phase.p0: stationary point {p0} must lie in ({}, {})", qp.p1, qp.p2);
                }
                // the oracle reuses the Schrödinger integrand, which has the same requirements
                cfg.setup()?;
                let delta = p.delta.unwrap_or_else(|| default_delta(cfg.amplitude.mu1));
                stasis_core::quadratic::quadratic_remainder_terms(&cfg.amplitude, delta)
                    .map_err(|e| anyhow!("phase.delta: {e}"))?;
                cfg.phase = Some(Phase::Quadratic { qp, delta });
            }
        }
        return Ok(cfg);
    }

    let p = raw.phase;
    if p.name.is_some() || p.p0.is_some() || p.c.is_some() || p.delta.is_some() {
        bail!("phase: not used by kind {}; the phase is fixed by the equation", kind.name());
    }
    forbid(kind, "grid.omega", &omega)?;
    forbid(kind, "grid.q", &g.q)?;
    cfg.t = t.ok_or_else(|| anyhow!("grid.t: required for kind {}", kind.name()))?;
    if cfg.t.len() < 8 {
        bail!("grid.t: need at least 8 times for a decay fit, got {}", cfg.t.len());
    }
    if cfg.t[cfg.t.len() - 1] / cfg.t[0] < 100.0 * (1.0 - 1e-12) {
        bail!("grid.t: times must span at least two decades");
    }
    let setup = cfg.setup()?;
    let check_eps = |key: &str, eps: f64| -> Result<()> {
        if !(eps > 0.0 && eps < 0.5) {
            bail!("{key}: eps = {eps} must lie in the open interval (0, 1/2)");
        }
        Ok(())
    };
    match kind {
        Kind::SchrodingerCurve | Kind::SchrodingerRegion => {
            forbid(kind, "grid.eps_list", &g.eps_list)?;
            let eps = g.eps.ok_or_else(|| anyhow!("grid.eps: required for kind {}", kind.name()))?;
            if let Some(delta) = g.delta {
                curve_exponents(setup.mu, eps, delta).map_err(|e| anyhow!("grid.eps: {e}"))?;
            }
            check_eps("grid.eps", eps)?;
            cfg.eps = vec![eps];
            cfg.delta = g.delta;
            if kind == Kind::SchrodingerRegion {
                cfg.rays = g.rays.unwrap_or(10);
                if cfg.rays == 0 {
                    bail!("grid.rays: need at least one ray");
                }
            } else {
                forbid(kind, "grid.rays", &g.rays)?;
            }
        }
        Kind::CriticalDirection => {
            forbid(kind, "grid.eps", &g.eps)?;
            forbid(kind, "grid.eps_list", &g.eps_list)?;
            forbid(kind, "grid.delta", &g.delta)?;
            forbid(kind, "grid.rays", &g.rays)?;
        }
        Kind::BlowupScan => {
            forbid(kind, "grid.eps", &g.eps)?;
            forbid(kind, "grid.delta", &g.delta)?;
            forbid(kind, "grid.rays", &g.rays)?;
            let list = g.eps_list.ok_or_else(|| anyhow!("grid.eps_list: required for kind blowup-scan"))?;
            if list.is_empty() {
                bail!("grid.eps_list: grid must not be empty");
            }
            for &e in &list {
                check_eps("grid.eps_list", e)?;
            }
            if list.windows(2).any(|w| w[1] <= w[0]) {
                bail!("grid.eps_list: values must be strictly increasing");
            }
            cfg.eps = list;
        }
        Kind::Expand | Kind::SweepOmega => unreachable!(),
    }
    Ok(cfg)
}

fn location(e: &toml::de::Error, text: &str) -> String {
    match e.span() {
        Some(span) => {
            let start = span.start.min(text.len());
            let line = text[..start].matches('\n').count() + 1;
            let source = text.lines().nth(line - 1).unwrap_or("").trim();
            format!("line {line} `{source}`")
        }
        None => "config".to_string(),
    }
}
