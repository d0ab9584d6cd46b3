//! Gamma function on the positive reals, the endpoint constants Θ, and
//! principal-branch complex powers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Endpoint of the integration interval: `Left` is p₁ (j = 1), `Right` is p₂ (j = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn from_index(j: u8) -> Result<Side> {
        match j {
            1 => Ok(Side::Left),
            2 => Ok(Side::Right),
            _ => Err(domain(format!("side must be 1 or 2, got {j}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }

    /// (−1)^{j+1}
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos(1.0 - x));
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * sum
}

/// Γ(x) for x > 0.
pub fn gamma_pos(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(domain(format!("gamma_pos needs a finite positive argument, got {x}")));
    }
    let g = lanczos(x);
    if !g.is_finite() {
        return Err(domain(format!("gamma_pos overflows at {x}")));
    }
    Ok(g)
}

/// Θ^{(j)}(ρ, μ) = ((−1)^{j+1}/ρ) Γ(μ/ρ) e^{(−1)^{j+1} iπμ/(2ρ)}.
pub fn theta(side: Side, rho: f64, mu: f64) -> Result<Complex64> {
    check_rho_mu(rho, mu)?;
    let sigma = side.sign();
    let modulus = gamma_pos(mu / rho)? / rho;
    Ok(sigma * Complex64::from_polar(modulus, sigma * PI * mu / (2.0 * rho)))
}

pub(crate) fn check_rho_mu(rho: f64, mu: f64) -> Result<()> {
    if !(rho.is_finite() && rho >= 1.0) {
        return Err(domain(format!("rho must be finite and >= 1, got {rho}")));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(domain(format!("mu must lie in (0, 1], got {mu}")));
    }
    Ok(())
}

/// Principal-branch power z^a = exp(a (ln|z| + i arg z)).
pub fn power_principal(z: Complex64, a: f64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite() && a.is_finite()) {
        return Err(domain("power_principal needs finite arguments"));
    }
    if z.re == 0.0 && z.im == 0.0 {
        if a > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(domain(format!("0^{a} is undefined")));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(domain("power_principal: z lies on the branch cut"));
    }
    Ok(cpow(z, a))
}

/// Unchecked principal power for hot loops.
#[inline]
pub(crate) fn cpow(z: Complex64, a: f64) -> Complex64 {
    let ln_r = z.norm().ln();
    let arg = z.im.atan2(z.re);
    Complex64::from_polar((a * ln_r).exp(), a * arg)
}
