mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use stasis_core::catalog;
use stasis_core::model::build_frame;
use stasis_core::oracle::{
    integrate_by_parts_check, integrate_oscillatory, integrate_oscillatory_on, parts_decomposition, parts_total,
    phi_primitive, phi_primitive_value, ray_integrand, OracleMethod, DEFAULT_BUDGET,
};
use stasis_core::quadratic::{left_frames, QuadraticPhase};
use stasis_core::specfun::{theta, Side};
use stasis_core::Error;

#[test]
fn zero_frequency() {
    for ph in ["linear", "cubic", "smoothstep"] {
        let phase = catalog::phase(ph).unwrap();
        let amp = catalog::amplitude("fresnel", Some(0.5), None).unwrap();
        let v = integrate_oscillatory(&phase, &amp, 0.0, 1e-12).unwrap();
        assert!((v.value - 2.0).norm() < 1e-13);
        assert_eq!(v.method, OracleMethod::Panels);
    }
}

#[test]
fn bessel_values() {
    let phase = catalog::phase("linear").unwrap();
    let amp = catalog::amplitude("beta-bessel", None, None).unwrap();
    let v = integrate_oscillatory(&phase, &amp, 10.0, 1e-12).unwrap();
    let want = PI * -0.177_596_771_314_338_3 * Complex64::cis(5.0);
    assert!((v.value - want).norm() < 1e-13);
    for omega in [0.3, 3.0, 30.0, 300.0, 3e3, 3e4] {
        let v = integrate_oscillatory(&phase, &amp, omega, 1e-12).unwrap();
        assert!((v.value - common::bessel_integral(omega)).norm() < 1e-11, "omega={omega}");
        assert!(v.abs_error_estimate >= 0.0 && v.panel_count >= 1);
    }
}

#[test]
fn fresnel_values() {
    let phase = catalog::phase("linear").unwrap();
    for mu in [0.25, 0.5, 0.9] {
        let amp = catalog::amplitude("fresnel", Some(mu), None).unwrap();
        for omega in [2.0, 15.0, 25.0, 400.0, 1e4] {
            let v = integrate_oscillatory(&phase, &amp, omega, 1e-12).unwrap();
            let want = common::fresnel_integral(mu, omega);
            assert!((v.value - want).norm() < 1e-10, "mu={mu} omega={omega}: {} vs {want}", v.value);
        }
    }
}

#[test]
fn sub_interval_pieces_add_up() {
    let phase = catalog::phase("linear-quadratic").unwrap();
    let amp = catalog::amplitude("beta-cplx", Some(0.3), Some(0.6)).unwrap();
    let omega = 321.0;
    let full = integrate_oscillatory(&phase, &amp, omega, 1e-12).unwrap().value;
    let a = integrate_oscillatory_on(&phase, &amp, 0.0, 0.37, omega, 1e-12, DEFAULT_BUDGET).unwrap().value;
    let b = integrate_oscillatory_on(&phase, &amp, 0.37, 1.0, omega, 1e-12, DEFAULT_BUDGET).unwrap().value;
    assert!((full - a - b).norm() < 1e-11);
}

#[test]
fn domain_and_budget_errors() {
    let phase = catalog::phase("linear").unwrap();
    let amp = catalog::amplitude("beta-bessel", None, None).unwrap();
    assert!(matches!(integrate_oscillatory(&phase, &amp, 10.0, 1e-13), Err(Error::Domain(_))));
    assert!(matches!(integrate_oscillatory(&phase, &amp, -1.0, 1e-10), Err(Error::Domain(_))));
    let r = integrate_oscillatory_on(&phase, &amp, 0.0, 1.0, 1e6, 1e-10, 10_000);
    assert!(matches!(r, Err(Error::Budget { .. })), "{r:?}");
}

#[test]
fn primitive_at_origin_carries_side_sign() {
    // −∫_Λ z^{μ−1} e^{±iωz^ρ} dz equals (−1)^j Θ^{(j)} ω^{−μ/ρ}
    let v = phi_primitive(0.0, 4.0, 2.0, 1.0, Side::Left, 1e-13).unwrap();
    let magnitude = PI.sqrt() / 4.0;
    assert!((v + magnitude * Complex64::cis(PI / 4.0)).norm() < 1e-14);
    for rho in [1.0, 1.5, 2.0, 3.0] {
        for mu in [0.25, 0.5, 1.0] {
            for side in [Side::Left, Side::Right] {
                let omega = 7.0;
                let v = phi_primitive(0.0, omega, rho, mu, side, 1e-13).unwrap();
                let want = -side.sign() * theta(side, rho, mu).unwrap() * omega.powf(-mu / rho);
                assert!((v - want).norm() < 1e-12 * want.norm(), "rho={rho} mu={mu} {side:?}");
            }
        }
    }
}

#[test]
fn primitive_off_origin() {
    let v = phi_primitive_value(0.5, 10.0, 1.0, 0.5, Side::Left, 1e-12).unwrap();
    assert_eq!(v.method, OracleMethod::Ray);
    let majorant = 0.5f64.powf(-0.5) / 10.0;
    assert!(v.value.norm() <= majorant);
    let half = phi_primitive(0.5, 10.0, 1.0, 0.5, Side::Left, 5e-13).unwrap();
    assert!((v.value - half).norm() < 1e-11 * v.value.norm());
    // For ρ = 1 the ray can be rotated onto the real axis: φ(s) = −ω^{−μ} ∫_{ωs}^∞ v^{μ−1} e^{iv} dv.
    let (s, omega, mu) = (3.0, 10.0, 0.5);
    let v = phi_primitive(s, omega, 1.0, mu, Side::Left, 1e-13).unwrap();
    let want = -omega.powf(-mu) * common::oscillatory_tail(1.0 - mu, omega * s);
    assert!((v - want).norm() < 1e-12 * want.norm(), "{v} vs {want}");
}

#[test]
fn primitive_derivative() {
    // d/ds φ(s) = s^{μ−1} e^{±iωs^ρ}
    for side in [Side::Left, Side::Right] {
        let (omega, rho, mu, s) = (3.0, 2.0, 0.6, 0.7);
        let h = 1e-4;
        let d = (phi_primitive(s + h, omega, rho, mu, side, 1e-13).unwrap()
            - phi_primitive(s - h, omega, rho, mu, side, 1e-13).unwrap())
            / (2.0 * h);
        let want = s.powf(mu - 1.0) * Complex64::cis(side.sign() * omega * s.powf(rho));
        assert!((d - want).norm() < 1e-7, "{side:?}: {d} vs {want}");
    }
}

#[test]
fn parts_with_constant_k() {
    let phase = catalog::phase("linear").unwrap();
    let amp = catalog::amplitude("fresnel", Some(0.4), None).unwrap();
    let f = build_frame(&phase, &amp, Side::Left, 0.5).unwrap();
    let d = parts_decomposition(&f, 50.0, 1e-12).unwrap();
    assert!(d.interior.norm() < 1e-14);
    let direct = integrate_oscillatory_on(&phase, &amp, 0.0, 0.5, 50.0, 1e-12, DEFAULT_BUDGET).unwrap();
    assert!((d.side_value() - direct.value).norm() < 1e-11);
}

#[test]
fn parts_match_panels_per_side() {
    let phase = catalog::phase("linear").unwrap();
    let amp = catalog::amplitude("beta-bessel", None, None).unwrap();
    let f = build_frame(&phase, &amp, Side::Left, 0.5).unwrap();
    let j = integrate_by_parts_check(&f, 100.0, 1e-12).unwrap();
    assert_eq!(j.method, OracleMethod::PartsIdentity);
    let direct = integrate_oscillatory_on(&phase, &amp, 0.0, 0.5, 100.0, 1e-12, DEFAULT_BUDGET).unwrap();
    assert!((j.value - direct.value).norm() < 1e-9);

    let qp = QuadraticPhase::new(0.5, 0.25, 0.0, 1.0).unwrap();
    let amp = catalog::amplitude("intro", Some(0.75), None).unwrap();
    let frames = left_frames(&amp, &qp, 0.25).unwrap();
    let d = parts_decomposition(&frames[1], 1000.0, 1e-12).unwrap();
    let lphase = qp.left_model().unwrap();
    let lamp = frames[1].amplitude().clone();
    let direct = integrate_oscillatory_on(&lphase, &lamp, 0.25, 0.5, 1000.0, 1e-12, DEFAULT_BUDGET).unwrap();
    assert!((d.side_value() - direct.value).norm() < 1e-9);
}

#[test]
fn parts_total_is_cut_independent() {
    let phase = catalog::phase("cubic").unwrap();
    let amp = catalog::amplitude("beta-cplx", Some(0.5), Some(0.7)).unwrap();
    for omega in [3.0, 300.0] {
        let o = integrate_oscillatory(&phase, &amp, omega, 1e-12).unwrap().value;
        for q in [0.3, 0.5, 0.7] {
            let frames = [
                build_frame(&phase, &amp, Side::Left, q).unwrap(),
                build_frame(&phase, &amp, Side::Right, q).unwrap(),
            ];
            let p = parts_total(&frames, omega, 1e-12).unwrap().value;
            assert!((o - p).norm() <= 1e-9f64.max(1e-8 * o.norm()), "omega={omega} q={q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ray_majorant(s in 1e-3f64..2.0, t in 0.0f64..5.0, omega in 0.1f64..100.0, rho in 1.0f64..4.0, mu in 0.05f64..=1.0, j in 1u8..=2) {
        let side = Side::from_index(j).unwrap();
        let v = ray_integrand(s, t, omega, rho, mu, side).unwrap();
        let bound = s.powf(mu - 1.0) * (-omega * t.powf(rho)).exp();
        prop_assert!(v.norm() <= bound * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    }
}
