//! Reference functions written independently of the library code.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// J₀ by its power series; accurate to ~1e-14 absolute for x ≤ 8.
pub fn j0_series(x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// J₀ by the Hankel asymptotic series, truncated at its smallest term; for x ≥ 25.
pub fn j0_asymptotic(x: f64) -> f64 {
    // P and Q with a_k(0) = ((1)(9)(25)...((2k-1)^2)) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let m = (2 * k - 1) as f64;
            a *= -m * m / (k as f64 * 8.0 * x);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        if k % 2 == 0 {
            p += if (k / 2) % 2 == 0 { a.abs() } else { -a.abs() };
        } else {
            q += if (k / 2) % 2 == 0 { -a.abs() } else { a.abs() };
        }
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J₀ from (1/π)∫₀^π cos(x sin θ) dθ by the trapezoidal rule, which is
/// spectrally accurate for this periodic integrand.
pub fn j0_trapezoid(x: f64) -> f64 {
    let n = (x.abs() as usize + 40) * 2;
    let h = PI / n as f64;
    let mut s = 0.0;
    for k in 0..n {
        s += (x * (k as f64 * h).sin()).cos();
    }
    s * h / PI
}

pub fn j0(x: f64) -> f64 {
    if x <= 8.0 {
        j0_series(x)
    } else if x >= 25.0 {
        j0_asymptotic(x)
    } else {
        j0_trapezoid(x)
    }
}

/// ∫₀¹ p^{-1/2}(1-p)^{-1/2} e^{iωp} dp = π e^{iω/2} J₀(ω/2)
pub fn bessel_integral(omega: f64) -> Complex64 {
    PI * Complex64::cis(omega / 2.0) * j0(omega / 2.0)
}

/// ln Γ(x) by Stirling's series after shifting x above 15.
pub fn ln_gamma_stirling(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    while y < 15.0 {
        shift -= y.ln();
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    shift + (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series
}

pub fn gamma_stirling(x: f64) -> f64 {
    ln_gamma_stirling(x).exp()
}

/// ∫₀¹ p^{μ−1} e^{iωp} dp = Σ (iω)^k / (k!(k+μ)); cancellation limits it to ω ≲ 20.
pub fn fresnel_kummer(mu: f64, omega: f64) -> Complex64 {
    let mut z = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0 / mu, 0.0);
    for k in 1..400 {
        z *= Complex64::new(0.0, omega) / k as f64;
        let t = z / (k as f64 + mu);
        sum += t;
        if t.norm() < 1e-18 {
            break;
        }
    }
    sum
}

/// Θ^{(j)}(ρ, μ) from its defining formula with the Stirling gamma.
pub fn theta_formula(j: u8, rho: f64, mu: f64) -> Complex64 {
    let s = if j == 1 { 1.0 } else { -1.0 };
    s / rho * gamma_stirling(mu / rho) * Complex64::cis(s * PI * mu / (2.0 * rho))
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * k as f64 / (n - 1) as f64))
        .collect()
}

/// ∫_X^∞ u^{−ν} e^{iu} du by repeated integration by parts, truncated at the smallest term.
pub fn oscillatory_tail(nu: f64, x: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut term = i * Complex64::cis(x) * x.powf(-nu);
    let mut sum = term;
    let mut prev = term.norm();
    for k in 0..200 {
        let next = term * (-i) * ((nu + k as f64) / x);
        if next.norm() >= prev {
            break;
        }
        prev = next.norm();
        sum += next;
        term = next;
    }
    sum
}

/// ∫₀¹ p^{μ−1} e^{iωp} dp: the Kummer series for ω ≤ 20, otherwise
/// ω^{−μ}(Γ(μ)e^{iπμ/2} − ∫_ω^∞ u^{μ−1}e^{iu} du).
pub fn fresnel_integral(mu: f64, omega: f64) -> Complex64 {
    if omega <= 20.0 {
        fresnel_kummer(mu, omega)
    } else {
        omega.powf(-mu) * (gamma_stirling(mu) * Complex64::cis(PI * mu / 2.0) - oscillatory_tail(1.0 - mu, omega))
    }
}
