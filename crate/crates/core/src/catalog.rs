//! Built-in amplitudes and phases on [0, 1], with exact norms.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::{ComplexMap, PhaseModel, SingularAmplitude};

struct AmplitudeEntry {
    name: &'static str,
    about: &'static str,
    /// Fixed (μ₁, μ₂); `None` means the exponent is a parameter.
    mu1: Option<f64>,
    mu2: Option<f64>,
    build: fn() -> (ComplexMap, ComplexMap, f64, f64),
}

fn one() -> (ComplexMap, ComplexMap, f64, f64) {
    (
        Arc::new(|_| Complex64::new(1.0, 0.0)),
        Arc::new(|_| Complex64::new(0.0, 0.0)),
        1.0,
        1.0,
    )
}

fn one_minus_p() -> (ComplexMap, ComplexMap, f64, f64) {
    (
        Arc::new(|p| Complex64::new(1.0 - p, 0.0)),
        Arc::new(|_| Complex64::new(-1.0, 0.0)),
        1.0,
        2.0,
    )
}

fn twisted() -> (ComplexMap, ComplexMap, f64, f64) {
    (
        Arc::new(|p| (1.0 + p / 2.0) * Complex64::cis(p)),
        Arc::new(|p| Complex64::new(0.5, 1.0 + p / 2.0) * Complex64::cis(p)),
        1.5,
        1.5 + 2.5f64.sqrt(),
    )
}

const AMPLITUDES: &[AmplitudeEntry] = &[
    AmplitudeEntry {
        name: "beta",
        about: "p^(mu1-1) (1-p)^(mu2-1)",
        mu1: None,
        mu2: None,
        build: one,
    },
    AmplitudeEntry {
        name: "beta-bessel",
        about: "p^(-1/2) (1-p)^(-1/2)",
        mu1: Some(0.5),
        mu2: Some(0.5),
        build: one,
    },
    AmplitudeEntry {
        name: "beta-cplx",
        about: "p^(mu1-1) (1-p)^(mu2-1) (1+p/2) e^(ip)",
        mu1: None,
        mu2: None,
        build: twisted,
    },
    AmplitudeEntry {
        name: "fresnel",
        about: "p^(mu-1)",
        mu1: None,
        mu2: Some(1.0),
        build: one,
    },
    AmplitudeEntry {
        name: "intro",
        about: "p^(mu-1) (1-p)",
        mu1: None,
        mu2: Some(1.0),
        build: one_minus_p,
    },
];

struct PhaseEntry {
    name: &'static str,
    about: &'static str,
    build: fn() -> Result<PhaseModel>,
}

fn linear() -> Result<PhaseModel> {
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
}

fn linear_quadratic() -> Result<PhaseModel> {
    PhaseModel::new(
        0.0,
        1.0,
        1.0,
        1.0,
        Arc::new(|p| p + p * p),
        Arc::new(|p| 1.0 + 2.0 * p),
        Arc::new(|p| 1.0 + 2.0 * p),
        Arc::new(|_| 2.0),
    )
}

fn quadratic() -> Result<PhaseModel> {
    PhaseModel::new(
        0.0,
        1.0,
        1.0,
        2.0,
        Arc::new(|p| 2.0 * p - p * p),
        Arc::new(|p| 2.0 * (1.0 - p)),
        Arc::new(|_| 2.0),
        Arc::new(|_| 0.0),
    )
}

fn square() -> Result<PhaseModel> {
    PhaseModel::new(
        0.0,
        1.0,
        2.0,
        1.0,
        Arc::new(|p| p * p),
        Arc::new(|p| 2.0 * p),
        Arc::new(|_| 2.0),
        Arc::new(|_| 0.0),
    )
}

fn cubic() -> Result<PhaseModel> {
    PhaseModel::new(
        0.0,
        1.0,
        1.0,
        3.0,
        Arc::new(|p| 1.0 - (1.0 - p).powi(3)),
        Arc::new(|p| 3.0 * (1.0 - p) * (1.0 - p)),
        Arc::new(|_| 3.0),
        Arc::new(|_| 0.0),
    )
}

fn smoothstep() -> Result<PhaseModel> {
    PhaseModel::new(
        0.0,
        1.0,
        2.0,
        2.0,
        Arc::new(|p| p * p * (3.0 - 2.0 * p)),
        Arc::new(|p| 6.0 * p * (1.0 - p)),
        Arc::new(|_| 6.0),
        Arc::new(|_| 0.0),
    )
}

const PHASES: &[PhaseEntry] = &[
    PhaseEntry {
        name: "cubic",
        about: "1-(1-p)^3, rho = (1, 3)",
        build: cubic,
    },
    PhaseEntry {
        name: "linear",
        about: "p, rho = (1, 1)",
        build: linear,
    },
    PhaseEntry {
        name: "linear-quadratic",
        about: "p+p^2, rho = (1, 1)",
        build: linear_quadratic,
    },
    PhaseEntry {
        name: "quadratic",
        about: "2p-p^2, rho = (1, 2)",
        build: quadratic,
    },
    PhaseEntry {
        name: "smoothstep",
        about: "3p^2-2p^3, rho = (2, 2)",
        build: smoothstep,
    },
    PhaseEntry {
        name: "square",
        about: "p^2, rho = (2, 1)",
        build: square,
    },
];

fn pick(name: &str, fixed: Option<f64>, given: Option<f64>, entry: &str) -> Result<f64> {
    match (fixed, given) {
        (Some(f), None) => Ok(f),
        (Some(f), Some(g)) if f == g => Ok(f),
        (Some(f), Some(g)) => Err(domain(format!("amplitude {entry} fixes {name} = {f}, got {g}"))),
        (None, Some(g)) => Ok(g),
        (None, None) => Err(domain(format!("amplitude {entry} needs {name}"))),
    }
}

/// Builds a catalog amplitude on [0, 1]; exponents fixed by the entry may be omitted.
pub fn amplitude(name: &str, mu1: Option<f64>, mu2: Option<f64>) -> Result<SingularAmplitude> {
    let entry = AMPLITUDES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| domain(format!("unknown amplitude '{name}'")))?;
    let m1 = pick("mu1", entry.mu1, mu1, name)?;
    let m2 = pick("mu2", entry.mu2, mu2, name)?;
    let (u, du, sup, sob) = (entry.build)();
    SingularAmplitude::new(0.0, 1.0, m1, m2, u, du, sup, sob)
}

pub fn phase(name: &str) -> Result<PhaseModel> {
    let entry = PHASES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| domain(format!("unknown phase '{name}'")))?;
    (entry.build)()
}

pub fn amplitude_names() -> Vec<&'static str> {
    AMPLITUDES.iter().map(|e| e.name).collect()
}

pub fn phase_names() -> Vec<&'static str> {
    PHASES.iter().map(|e| e.name).collect()
}

/// Sorted listing, one entry per line.
pub fn catalog_list() -> String {
    let mut out = String::from("amplitudes on [0, 1]:\n");
    for e in AMPLITUDES {
        out.push_str(&format!("  {:<18} {}\n", e.name, e.about));
    }
    out.push_str("phases on [0, 1]:\n");
    for e in PHASES {
        out.push_str(&format!("  {:<18} {}\n", e.name, e.about));
    }
    out
}
