//! Kernel-layer verification: closed forms against independent quadrature,
//! propagation identities, and randomized bound/property checks.

mod common;

use common::quad_oracle;
use kimura_spde::kernel::*;
use kimura_spde::quad::QuadratureSpec;
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-9,
        abs_tol: 1e-13,
        ..QuadratureSpec::default()
    }
}

#[test]
fn mass_against_independent_simpson() {
    // library quadrature engine is not used here: adaptive Simpson in
    // sqrt coordinates is the oracle
    for &(z, t) in &[(1.0, 1.0), (0.2, 0.7), (3.0, 0.1)] {
        let v_hi = default_w_cap(z, t).sqrt();
        let oracle = quad_oracle::simpson_adaptive(
            |v| {
                if v <= 0.0 {
                    0.0
                } else {
                    2.0 * v * q0(z, v * v, t).unwrap()
                }
            },
            0.0,
            v_hi,
            1e-12,
        );
        let closed = mass_q0(z, t).unwrap();
        assert!(
            ((oracle - closed) / closed).abs() < 1e-8,
            "({z},{t}): {oracle} vs {closed}"
        );
    }
}

#[test]
fn propagate_exponential_against_romberg() {
    // u0(w) = e^{-w}; target from Richardson-extrapolated trapezoids
    let (z, t) = (1.0, 0.5);
    let v_hi = default_w_cap(z, t).sqrt();
    let oracle = quad_oracle::romberg(
        |v| {
            if v <= 0.0 {
                0.0
            } else {
                let w = v * v;
                2.0 * v * q0(z, w, t).unwrap() * (-w).exp()
            }
        },
        0.0,
        v_hi,
        1e-12,
    );
    let got = propagate(KernelParams::driftless(), |w| (-w).exp(), 1.0, z, t, &spec())
        .unwrap()
        .value;
    assert!(((got - oracle) / oracle).abs() < 1e-8, "{got} vs {oracle}");
}

#[test]
fn two_step_propagation_is_semigroup() {
    // propagate u0 = 1 for time s, then propagate the result for time t,
    // equals single-step mass at s + t
    let (z, s, t) = (1.0, 0.5, 0.5);
    let q = spec();
    let step2 = propagate(
        KernelParams::driftless(),
        |w| mass_q0(w, s).unwrap(),
        1.0,
        z,
        t,
        &q,
    )
    .unwrap()
    .value;
    let direct = mass_q0(z, s + t).unwrap();
    assert!(
        ((step2 - direct) / direct).abs() < 1e-7,
        "{step2} vs {direct}"
    );
}

#[test]
fn energy_time_integral_matches_u_at_two() {
    // ∫_0^t ED(1, s) ds at t = 2 equals U(1/2)
    let got = energy_time_integral_quadrature(1.0, 2.0, &spec()).unwrap();
    let want = energy_u(0.5).unwrap();
    assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn z_energy_quadrature_cross_check() {
    // ∫ q_nu²(z, w, s) dz over the first argument vs the closed form
    let (w, s) = (1.0, 1.0);
    for nu in [0u8, 1] {
        let closed = z_energy_q_nu(nu, w, s).unwrap();
        let params = KernelParams { nu: nu as f64 - if nu == 1 { 1e-9 } else { 0.0 } };
        let _ = params;
        let oracle = quad_oracle::simpson_adaptive(
            |v| {
                if v <= 0.0 {
                    return 0.0;
                }
                let z = v * v;
                let q = if nu == 1 {
                    q1(z, w, s).unwrap()
                } else {
                    q0(z, w, s).unwrap()
                };
                2.0 * v * q * q
            },
            0.0,
            default_w_cap(w, s).sqrt() * 1.5,
            1e-11,
        );
        assert!(
            ((closed - oracle) / oracle).abs() < 1e-4,
            "nu = {nu}: {closed} vs {oracle}"
        );
    }
}

#[test]
fn duhamel_ratio_bound_on_sampled_grid() {
    // |q^V/q - 1| <= e^{t ||V||} - 1 with a non-constant potential
    let v = PotentialSpec::new(
        vec![0.25, 0.5, 1.0, 2.0, 4.0],
        vec![0.6, -1.0, 0.8, -0.4, 1.0],
    )
    .unwrap();
    assert_eq!(v.sup_norm(), 1.0);
    let q = spec();
    for &t in &[0.1, 0.2] {
        for &(z, w) in &[(0.5, 0.5), (1.0, 2.0), (2.5, 0.8)] {
            let series = duhamel_qv(KernelParams::driftless(), &v, z, w, t, 4, &q).unwrap();
            let base = series.per_term[0];
            let ratio = (series.value / base - 1.0).abs();
            let cap = (t * v.sup_norm()).exp_m1() + 1e-3;
            assert!(ratio <= cap, "(z={z}, w={w}, t={t}): {ratio} vs {cap}");
        }
    }
}

#[test]
fn duhamel_general_drift_constant_potential() {
    // same exponential factorization holds for fractional drift orders
    let params = KernelParams::new(0.5).unwrap();
    let c = -0.7;
    let v = PotentialSpec::constant(c);
    let (z, w, t) = (0.8, 1.1, 0.2);
    let series = duhamel_qv(params, &v, z, w, t, 3, &spec()).unwrap();
    let base = q_nu(params, z, w, t).unwrap();
    for k in 0..=3usize {
        let fact: f64 = (1..=k).product::<usize>() as f64;
        let want = (c * t).powi(k as i32) / fact * base;
        assert!(
            (series.per_term[k] - want).abs() <= 1e-4 * want.abs().max(base * 1e-6),
            "k = {k}: {} vs {want}",
            series.per_term[k]
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_positive_and_exchange(
        z in 1e-3..10.0f64,
        w in 1e-3..10.0f64,
        t in 1e-3..10.0f64,
    ) {
        let q = q0(z, w, t).unwrap();
        prop_assert!(q >= 0.0);
        let lhs = w * q;
        let rhs = z * q0(w, z, t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-300));
    }

    #[test]
    fn gaussian_bound_randomized(
        z in 1e-3..10.0f64,
        w in 1e-3..10.0f64,
        t in 1e-3..2.0f64,
    ) {
        let q = q0(z, w, t).unwrap();
        prop_assert!(q <= gaussian_bound(z, w, t) * (1.0 + 1e-12));
        if z * w >= t * t {
            prop_assert!(q <= gaussian_bound_refined(z, w, t) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mass_quadrature_matches_closed_form(
        z in 0.05..6.0f64,
        t in 0.05..3.0f64,
    ) {
        let quad = mass_q0_quadrature(z, t, &spec()).unwrap();
        let closed = mass_q0(z, t).unwrap();
        prop_assert!(((quad - closed) / closed).abs() < 1e-7);
    }
}

#[test]
fn positivity_randomized_dense() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let z = rng.gen_range(1e-6..10.0);
        let w = rng.gen_range(1e-6..10.0);
        let t = rng.gen_range(1e-6..10.0);
        let q = q0(z, w, t).unwrap();
        assert!(q >= 0.0 && q.is_finite(), "q0({z},{w},{t}) = {q}");
    }
}

#[test]
fn semigroup_identity_random_instances() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
    let q = spec();
    for _ in 0..20 {
        let z = rng.gen_range(0.1..4.0);
        let w = rng.gen_range(0.1..4.0);
        let s = rng.gen_range(0.05..1.0);
        let t = rng.gen_range(0.05..1.0);
        let composed = semigroup_compose(KernelParams::driftless(), z, w, s, t, &q).unwrap();
        let direct = q0(z, w, s + t).unwrap();
        assert!(
            ((composed - direct) / direct).abs() < 1e-6,
            "({z},{w},{s},{t}): {composed} vs {direct}"
        );
    }
}

#[test]
fn holder_kernel_constant_is_regression_frozen() {
    // the frozen constant must dominate a fresh scan
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
    let mut sup: f64 = 0.0;
    for _ in 0..4000 {
        let z1 = rng.gen_range(0.001..6.0);
        let z2 = rng.gen_range(0.001..6.0);
        let w = rng.gen_range(0.001..6.0);
        let s = rng.gen_range(0.005..2.0);
        if z1 == z2 {
            continue;
        }
        let d = d0(z1, z2, w, s).unwrap().abs();
        sup = sup.max(d * s.powf(1.5) / (z1 - z2).abs().sqrt());
    }
    assert!(sup <= KERNEL_HOLDER_M, "fresh scan {sup} vs frozen {KERNEL_HOLDER_M}");
}
