//! Special-function verification: frozen extended-precision targets, analytic
//! identities, monotonicity, and branch agreement.

mod common;

use common::oracle;
use kimura_spde::specfun::*;

/// Frozen targets produced by the exact-rational oracle in `common::oracle`.
/// Each constant is re-derived here before being asserted against the
/// implementation, so a stale constant fails loudly.
const I0_SCALED_AT_100: f64 = 0.039_944_379_299_096_68;
const I1_SCALED_AT_100: f64 = 0.039_744_153_025_130_25;
const F22_SCALED_50_K2: f64 = 0.324_132_045_628_787_3;

#[test]
fn frozen_targets_match_oracle() {
    assert!((oracle::bessel_i_scaled(0, 100, 1) - I0_SCALED_AT_100).abs() < 1e-16);
    assert!((oracle::bessel_i_scaled(1, 100, 1) - I1_SCALED_AT_100).abs() < 1e-16);
    let f22 = oracle::pfq_scaled(&[(3, 2), (1, 1)], &[(2, 1), (3, 1)], 50, 1, 2);
    assert!((f22 - F22_SCALED_50_K2).abs() < 1e-16, "oracle {f22}");
}

#[test]
fn bessel_scaled_large_argument() {
    // asymptotic target ~ (2 pi 100)^{-1/2} (1 + 1/800 + ...)
    let got = bessel_i_scaled(0.0, 100.0).unwrap();
    assert!(
        oracle::rel_gap(got, I0_SCALED_AT_100) < 1e-12,
        "got {got}, want {I0_SCALED_AT_100}"
    );
    let got1 = bessel_i_scaled(1.0, 100.0).unwrap();
    assert!(oracle::rel_gap(got1, I1_SCALED_AT_100) < 1e-12);
}

#[test]
fn bessel_series_branch_against_oracle() {
    for (num, den) in [(1i64, 2i64), (3, 1), (10, 1), (29, 1)] {
        let x = num as f64 / den as f64;
        for order in 0..2u32 {
            let got = bessel_i_scaled(order as f64, x).unwrap();
            let want = oracle::bessel_i_scaled(order, num, den);
            assert!(
                oracle::rel_gap(got, want) < 1e-12,
                "order {order}, x {x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn bessel_branches_agree_in_overlap_window() {
    // Window spanning a decade either side of the switch at 30.  The
    // asymptotic branch carries an irreducible e^{-2x} defect (exact for
    // half-integer orders), so the branch agreement is assessed at
    // rel_tol = 1e-9: e^{-2x} < 10 * rel_tol throughout [30/√10, 30·√10].
    let rel_tol = 1e-9;
    let ctl_series = SeriesControl {
        rel_tol,
        asymptotic_switch: 400.0,
        ..SeriesControl::bessel()
    };
    let ctl_asym = SeriesControl {
        rel_tol,
        asymptotic_switch: 9.0,
        ..SeriesControl::bessel()
    };
    let mut x = 30.0 / 10f64.sqrt();
    while x <= 30.0 * 10f64.sqrt() {
        for order in [0.0, 1.0, 0.5] {
            let series = bessel_i_scaled_ctl(order, x, &ctl_series).unwrap();
            let asym = bessel_i_scaled_ctl(order, x, &ctl_asym).unwrap();
            assert!(
                oracle::rel_gap(series, asym) < 10.0 * rel_tol,
                "order {order}, x {x}: series {series} vs asym {asym}"
            );
        }
        x *= 1.25;
    }
}

#[test]
fn bessel_positivity_and_order_monotonicity() {
    // log-spaced grid over [0, 1e6]
    let mut x = 1e-3;
    while x <= 1e6 {
        let i0 = bessel_i_scaled(0.0, x).unwrap();
        let i1 = bessel_i_scaled(1.0, x).unwrap();
        assert!(i0 > 0.0 && i0 <= 1.0, "i0({x}) = {i0}");
        assert!(i1 < i0, "i1({x}) = {i1} not below i0 = {i0}");
        x *= 2.1;
    }
    assert_eq!(bessel_i_scaled(0.0, 0.0).unwrap(), 1.0);
}

#[test]
fn bessel_prime_identity_residuals() {
    for &x in &[0.0, 1.0, 10.0] {
        let r = bessel_i_prime_identity_check(x, 1e-5).unwrap();
        assert!(r <= 1e-6, "x = {x}: residual {r}");
    }
}

#[test]
fn scaled_difference_helper_matches_oracle() {
    for (num, den) in [(1i64, 1i64), (10, 1), (25, 1), (40, 1), (200, 1)] {
        let got = bessel_i0_minus_i1_scaled(num as f64 / den as f64).unwrap();
        let want = oracle::bessel_i0_minus_i1_scaled(num, den);
        assert!(
            oracle::rel_gap(got, want) < 1e-11,
            "x = {num}/{den}: {got} vs {want}"
        );
    }
}

#[test]
fn f11_identity_to_1e10_across_range() {
    let ctl = SeriesControl::hypergeometric();
    let spec = HypergeometricSpec::f11(1.0, 2.0).unwrap();
    let mut x = 1e-8;
    while x <= 50.0 {
        let got = pfq(&spec, x, &ctl).unwrap();
        let want = x.exp_m1() / x;
        assert!(
            oracle::rel_gap(got, want) < 1e-10,
            "x = {x}: {got} vs {want}"
        );
        x *= 3.7;
    }
}

#[test]
fn incomplete_gamma_identity_small_integers() {
    // ₁F₁[1; a+1](z) = a e^z z^{-a} (Γ(a) - Γ(a, z)) for a = 1..=6
    let ctl = SeriesControl::hypergeometric();
    for a in 1..=6u32 {
        let af = a as f64;
        let spec = HypergeometricSpec::f11(1.0, af + 1.0).unwrap();
        let mut z = 0.05;
        while z <= 30.0 {
            let lhs = pfq(&spec, z, &ctl).unwrap();
            // Γ(a) - Γ(a, z) = γ(a, z), evaluated by the lower series so that
            // small z does not cancel 120 - 119.999... down to noise.
            let gamma_part = incomplete_gamma_lower(af, z).unwrap();
            let rhs = af * z.exp() * z.powf(-af) * gamma_part;
            assert!(
                oracle::rel_gap(lhs, rhs) < 1e-8,
                "a = {a}, z = {z}: {lhs} vs {rhs}"
            );
            z *= 1.9;
        }
    }
}

#[test]
fn f11_one_three_cross_value() {
    // ₁F₁[1;3](1) = 2(e - 2), also 2 e z^{-2} (Γ(2) - Γ(2, 1))
    let ctl = SeriesControl::hypergeometric();
    let spec = HypergeometricSpec::f11(1.0, 3.0).unwrap();
    let got = pfq(&spec, 1.0, &ctl).unwrap();
    let want = 2.0 * (std::f64::consts::E - 2.0);
    assert!(oracle::rel_gap(got, want) < 1e-13);
    let direct = oracle::pfq(&[(1, 1)], &[(3, 1)], 1, 1);
    assert!(oracle::rel_gap(got, direct) < 1e-14);
}

#[test]
fn f22_scaled_frozen_target() {
    let ctl = SeriesControl::hypergeometric();
    let spec = HypergeometricSpec::f22(1.5, 1.0, 2.0, 3.0).unwrap();
    let got = pfq_scaled(&spec, 50.0, 2.0, &ctl).unwrap();
    assert!(
        oracle::rel_gap(got, F22_SCALED_50_K2) < 1e-11,
        "got {got}, want {F22_SCALED_50_K2}"
    );
}

#[test]
fn f22_scaled_uniform_bound_over_four_decades() {
    // sup over x in [1, 1e4] is finite for k in {0, 1, 2}, and the tail of
    // the grid is non-increasing once the asymptotic regime is reached.
    let ctl = SeriesControl::hypergeometric();
    let spec = HypergeometricSpec::f22(1.5, 1.0, 2.0, 3.0).unwrap();
    for k in 0..=2u32 {
        let mut values = Vec::new();
        let mut x = 1.0;
        while x <= 1e4 {
            let v = pfq_scaled(&spec, x, k as f64, &ctl).unwrap();
            assert!(v.is_finite() && v >= 0.0, "k = {k}, x = {x}: {v}");
            values.push((x, v));
            x *= 1.6;
        }
        let sup = values.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
        assert!(sup.is_finite());
        // last decade non-increasing
        let tail: Vec<_> = values.iter().filter(|&&(x, _)| x >= 1e3).collect();
        for w in tail.windows(2) {
            assert!(
                w[1].1 <= w[0].1 * (1.0 + 1e-9),
                "k = {k}: {:?} -> {:?}",
                w[0],
                w[1]
            );
        }
    }
}

#[test]
fn trivial_values() {
    assert!((gamma_fn(5.0).unwrap() - 24.0).abs() < 1e-12);
    assert!((incomplete_gamma_upper(3.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(pochhammer(3.0, 2), 12.0);
    assert_eq!(erf(0.0), 0.0);
}
