//! The deterministic layer: the degenerate-diffusion transition kernel
//! q_nu(z, w, t), its spatial derivative, the closed-form integrals it
//! satisfies, semigroup propagation of initial data, and the Duhamel series
//! for a bounded potential.
//!
//! The kernel of the drift-nu equation on the half line is
//!
//!   q_nu(z, w, t) = z^{(1-nu)/2} w^{(nu-1)/2} t^{-1}
//!                     e^{-(√z - √w)^2 / t} [e^{-x} I_{1-nu}(x)],
//!   x = 2 sqrt(z w) / t,
//!
//! which is the textbook form e^{-(z+w)/t} I_{1-nu}(2√(zw)/t) with the
//! exponential split so that neither factor overflows: the Gaussian factor
//! and the scaled Bessel value are each O(1) for every argument.

use crate::error::{Error, Result};
use crate::quad::{self, GaussRule, QuadratureSpec};
use crate::specfun::{
    bessel_i0_minus_i1_scaled, bessel_i_scaled, gamma_fn, pfq_scaled, HypergeometricSpec,
    SeriesControl,
};

mod duhamel;
pub use duhamel::{duhamel_qv, DuhamelSeries, PotentialSpec};

/// Drift order of the kernel family; the equation requires nu < 1.
#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub nu: f64,
}

impl KernelParams {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu < 1.0) || !nu.is_finite() {
            return Err(Error::domain(
                "KernelParams",
                format!("drift order nu = {nu} must be finite and < 1"),
            ));
        }
        Ok(KernelParams { nu })
    }

    pub fn driftless() -> Self {
        KernelParams { nu: 0.0 }
    }
}

fn check_positive(context: &'static str, pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(
                context,
                format!("{name} = {v} must be positive and finite"),
            ));
        }
    }
    Ok(())
}

// Below this value of x = 2 sqrt(zw)/t the Bessel factor is replaced by the
// first series term; the direct prefactor w^{(nu-1)/2} times I_{1-nu} -> 0
// is a 0 * inf product at w = 0 exactly, and the limit form is cheaper and
// exact to O(x^2).
const SMALL_X_CUTOVER: f64 = 1e-6;

/// Transition kernel q_nu(z, w, t) of the drift-nu equation; order 1 - nu.
pub fn q_nu(params: KernelParams, z: f64, w: f64, t: f64) -> Result<f64> {
    check_positive("q_nu", &[("z", z), ("w", w), ("t", t)])?;
    let nu = params.nu;
    let x = 2.0 * (z * w).sqrt() / t;
    if x < SMALL_X_CUTOVER {
        // I_{1-nu}(x) ~ (x/2)^{1-nu} / Γ(2-nu), which cancels the
        // w^{(nu-1)/2} prefactor: q_nu -> z^{1-nu} t^{nu-2} e^{-(z+w)/t} / Γ(2-nu).
        let g = gamma_fn(2.0 - nu)?;
        return Ok(z.powf(1.0 - nu) * t.powf(nu - 2.0) * (-(z + w) / t).exp() / g);
    }
    let scaled_bessel = bessel_i_scaled(1.0 - nu, x)?;
    let gauss = (-((z.sqrt() - w.sqrt()).powi(2)) / t).exp();
    Ok((z / w).powf(0.5 * (1.0 - nu)) / t * gauss * scaled_bessel)
}

/// Driftless kernel q_0.
pub fn q0(z: f64, w: f64, t: f64) -> Result<f64> {
    q_nu(KernelParams::driftless(), z, w, t)
}

/// Unit-drift kernel q_1 = e^{-(z+w)/t} I_0(2√(zw)/t) / t.
/// Not a member of the nu < 1 family itself; it appears in the spatial
/// derivative of q_0 and in closed-form cross-checks.
pub fn q1(z: f64, w: f64, t: f64) -> Result<f64> {
    check_positive("q1", &[("z", z), ("w", w), ("t", t)])?;
    let x = 2.0 * (z * w).sqrt() / t;
    let scaled_bessel = bessel_i_scaled(0.0, x)?;
    let gauss = (-((z.sqrt() - w.sqrt()).powi(2)) / t).exp();
    Ok(gauss * scaled_bessel / t)
}

/// Spatial derivative of the driftless kernel: d/dz q_0 = (q_1 - q_0) / t.
pub fn q0_dz(z: f64, w: f64, t: f64) -> Result<f64> {
    Ok((q1(z, w, t)? - q0(z, w, t)?) / t)
}

/// Kernel difference d_0(z1, z2, w, t) = q_0(z1, w, t) - q_0(z2, w, t).
pub fn d0(z1: f64, z2: f64, w: f64, t: f64) -> Result<f64> {
    Ok(q0(z1, w, t)? - q0(z2, w, t)?)
}

/// Total mass of the driftless kernel: ∫_0^∞ q_0(z, w, t) dw = 1 - e^{-z/t}.
pub fn mass_q0(z: f64, t: f64) -> Result<f64> {
    check_positive("mass_q0", &[("z", z), ("t", t)])?;
    Ok(-(-z / t).exp_m1())
}

/// Mass absorbed at the boundary by time t: 1 - ∫ q_0 dw = e^{-z/t}.
pub fn absorbed_mass(z: f64, t: f64) -> Result<f64> {
    check_positive("absorbed_mass", &[("z", z), ("t", t)])?;
    Ok((-z / t).exp())
}

/// Total mass of the unit-drift kernel: ∫_0^∞ q_1(z, w, t) dw = 1.
pub fn mass_q1(z: f64, t: f64) -> Result<f64> {
    check_positive("mass_q1", &[("z", z), ("t", t)])?;
    Ok(1.0)
}

/// Pointwise Gaussian bound q_0(z, w, t) <= (z/t^2) e^{-(√z-√w)^2/t}.
pub fn gaussian_bound(z: f64, w: f64, t: f64) -> f64 {
    z / (t * t) * (-((z.sqrt() - w.sqrt()).powi(2)) / t).exp()
}

/// Constant of the refined Gaussian bound, valid when z w >= t^2:
/// q_0 <= C z^{1/4} w^{-3/4} t^{-1/2} e^{-(√z-√w)^2/t} with C = (4π)^{-1/2}.
/// The supremum of sqrt(x/2) e^{-x} I_1(x) over x >= 2 is approached from
/// below as x -> ∞, so the asymptotic value is already a valid constant.
pub const GAUSSIAN_BOUND_REFINED_C: f64 = 0.282_094_791_773_878_2;

/// Refined Gaussian bound for the z w >= t^2 regime.
pub fn gaussian_bound_refined(z: f64, w: f64, t: f64) -> f64 {
    GAUSSIAN_BOUND_REFINED_C * z.powf(0.25) * w.powf(-0.75) / t.sqrt()
        * (-((z.sqrt() - w.sqrt()).powi(2)) / t).exp()
}

/// Spatial energy density ∫_0^∞ q_0^2(z, w, s) dw in closed form:
/// (z/s^2) [ e^{-y}(I_0(y) - I_1(y)) - e^{-2y} ], y = z/s.
pub fn energy_density_q0(z: f64, s: f64) -> Result<f64> {
    check_positive("energy_density_q0", &[("z", z), ("s", s)])?;
    let y = z / s;
    let diff = bessel_i0_minus_i1_scaled(y)?;
    Ok((z / (s * s)) * (diff - (-2.0 * y).exp()))
}

/// The same energy density through its confluent-hypergeometric form,
/// (z^2 / (2 s^3)) e^{-x} ₂F₂[3/2, 1; 2, 3](x) with x = 2 z / s.
/// Kept as an independent evaluation route for cross-checking.
pub fn energy_density_q0_hypergeometric(z: f64, s: f64) -> Result<f64> {
    check_positive("energy_density_q0_hypergeometric", &[("z", z), ("s", s)])?;
    let spec = HypergeometricSpec::f22(1.5, 1.0, 2.0, 3.0)?;
    let ctl = SeriesControl::hypergeometric();
    let x = 2.0 * z / s;
    Ok(z * z / (2.0 * s * s * s) * pfq_scaled(&spec, x, 0.0, &ctl)?)
}

/// U(x) = e^{-x} I_0(x) - e^{-2x}/2; the time-integrated energy
/// ∫_0^t ∫ q_0^2(z, w, s) dw ds equals U(z/t), and U <= 1/2 everywhere.
pub fn energy_u(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("energy_u", format!("x = {x} not in [0, inf)")));
    }
    Ok(bessel_i_scaled(0.0, x)? - 0.5 * (-2.0 * x).exp())
}

/// Refined energy-density constant: ∫ q_0^2(z, w, s) dw <= C z^{-1/2} s^{-1/2}
/// with C = sup_y y^{3/2} [e^{-y}(I_0 - I_1)(y) - e^{-2y}].  The supremum sits
/// at y ≈ 3.0233 with value 0.227049297331…, above the y -> ∞ limit
/// (2π)^{-1/2}/2 ≈ 0.19947; frozen from a high-precision scan of y in
/// [1e-2, 1e6] with the last digit rounded up.
pub const ENERGY_DENSITY_REFINED_C: f64 = 0.227_049_298;

/// ∫_0^∞ q_nu^2(z, w, s) dz over the *first* argument, nu in {0, 1}:
///   nu = 1: e^{-2w/s}/(2s) ₁F₁[1/2; 1](2w/s)   (from ₂F₂[1/2,1;1,1])
///   nu = 0: e^{-2w/s}/(4s) ₁F₁[3/2; 2](2w/s)   (from ₂F₂[3/2,3;2,3])
pub fn z_energy_q_nu(nu: u8, w: f64, s: f64) -> Result<f64> {
    check_positive("z_energy_q_nu", &[("w", w), ("s", s)])?;
    let x = 2.0 * w / s;
    let ctl = SeriesControl::hypergeometric();
    match nu {
        1 => {
            let spec = HypergeometricSpec::f22(0.5, 1.0, 1.0, 1.0)?;
            Ok(pfq_scaled(&spec, x, 0.0, &ctl)? / (2.0 * s))
        }
        0 => {
            let spec = HypergeometricSpec::f22(1.5, 3.0, 2.0, 3.0)?;
            Ok(pfq_scaled(&spec, x, 0.0, &ctl)? / (4.0 * s))
        }
        _ => Err(Error::domain(
            "z_energy_q_nu",
            format!("nu = {nu} not in {{0, 1}}"),
        )),
    }
}

/// Panel edges in v = sqrt(w) space around Gaussian peaks (center, sigma),
/// clipped to [0, v_hi].  The kernel integrands are near-Gaussian in sqrt
/// coordinates, so a handful of sigma-scaled panels seeds the adaptive pass
/// close to its final refinement.
pub(crate) fn peak_edges(centers: &[(f64, f64)], v_hi: f64) -> Vec<f64> {
    let mut edges = vec![0.0, v_hi];
    for &(c, sigma) in centers {
        for k in [
            -12.0, -8.0, -6.0, -4.0, -3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0,
            8.0, 12.0,
        ] {
            let v = c + k * sigma;
            if v > 0.0 && v < v_hi {
                edges.push(v);
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    edges
}

/// ∫_0^{w_cap} q_nu(z, w, t) f(w) dw by adaptive quadrature in v = sqrt(w).
pub fn integrate_against_kernel<F: FnMut(f64) -> f64>(
    params: KernelParams,
    z: f64,
    t: f64,
    w_cap: f64,
    mut f: F,
    quad_spec: &QuadratureSpec,
    extra_breakpoints: &[f64],
) -> Result<f64> {
    let v_hi = w_cap.sqrt();
    let sigma = (0.5 * t).sqrt();
    let mut edges = peak_edges(&[(z.sqrt(), sigma)], v_hi);
    edges.extend(
        extra_breakpoints
            .iter()
            .map(|&w| w.max(0.0).sqrt())
            .filter(|&v| v > 0.0 && v < v_hi),
    );
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let w = v * v;
        2.0 * v * q_nu(params, z, w, t).unwrap_or(0.0) * f(w)
    };
    quad::adaptive(
        integrand,
        0.0,
        v_hi,
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &edges,
    )
}

/// ∫_0^{w_cap} q_0^2(z, w, s) f(w) dw, adaptive in v = sqrt(w).
pub fn integrate_against_kernel_sq<F: FnMut(f64) -> f64>(
    z: f64,
    s: f64,
    w_cap: f64,
    mut f: F,
    quad_spec: &QuadratureSpec,
    extra_breakpoints: &[f64],
) -> Result<f64> {
    let v_hi = w_cap.sqrt();
    let sigma = 0.5 * s.sqrt();
    let mut edges = peak_edges(&[(z.sqrt(), sigma)], v_hi);
    edges.extend(
        extra_breakpoints
            .iter()
            .map(|&w| w.max(0.0).sqrt())
            .filter(|&v| v > 0.0 && v < v_hi),
    );
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let w = v * v;
        let q = q0(z, w, s).unwrap_or(0.0);
        2.0 * v * q * q * f(w)
    };
    quad::adaptive(
        integrand,
        0.0,
        v_hi,
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &edges,
    )
}

/// Default spatial truncation (√z + c √t)^2 with c = 8; the Gaussian bound
/// certifies the discarded tail analytically.
pub fn default_w_cap(z: f64, t: f64) -> f64 {
    let c = 8.0;
    (z.sqrt() + c * t.sqrt()).powi(2)
}

/// Analytic bound on ∫_{w_cap}^∞ q_nu(z, w, t) dw using
/// e^{-x} I_{1-nu}(x) <= 1 and monotonicity of the power prefactor.
pub fn tail_mass_bound(params: KernelParams, z: f64, t: f64, w_cap: f64) -> f64 {
    if w_cap <= z {
        return f64::INFINITY;
    }
    let c = (w_cap.sqrt() - z.sqrt()) / t.sqrt();
    let pref = (z / w_cap).powf(0.5 * (1.0 - params.nu)).min(1.0);
    // (2/t) ∫_{v_cap}^∞ v e^{-(v-√z)^2/t} dv in closed form
    let sqrt_pi_t = (std::f64::consts::PI * t).sqrt();
    let gauss_tail =
        (t / 2.0) * (-c * c).exp() + z.sqrt() * (sqrt_pi_t / 2.0) * (1.0 - crate::specfun::erf(c));
    pref * 2.0 / t * gauss_tail
}

/// Result of a truncated semigroup application.
#[derive(Debug, Clone, Copy)]
pub struct Propagated {
    pub value: f64,
    /// Analytic bound on the discarded spatial tail.
    pub tail_bound: f64,
}

/// Semigroup action (P_t u0)(z) = ∫_0^∞ q_nu(z, w, t) u0(w) dw, truncated at
/// the quadrature spec's z_max (or the default Gaussian-certified cap).
///
/// `u0_sup` must bound |u0| on the tail; the reported tail estimate scales
/// with it.  A tail bound exceeding rel_tol * |value| is an error carrying
/// both numbers.
pub fn propagate<F: FnMut(f64) -> f64>(
    params: KernelParams,
    u0: F,
    u0_sup: f64,
    z: f64,
    t: f64,
    quad_spec: &QuadratureSpec,
) -> Result<Propagated> {
    check_positive("propagate", &[("z", z), ("t", t)])?;
    quad_spec.validate()?;
    let w_cap = default_w_cap(z, t).min(quad_spec.z_max);
    let value = integrate_against_kernel(params, z, t, w_cap, u0, quad_spec, &[])?;
    let tail_bound = u0_sup * tail_mass_bound(params, z, t, w_cap);
    if !value.is_finite() {
        return Err(Error::NonFinite {
            context: "propagate",
            location: format!("z = {z}, t = {t}"),
        });
    }
    if tail_bound > quad_spec.rel_tol * value.abs().max(quad_spec.abs_tol) {
        return Err(Error::Truncation {
            value,
            tail: tail_bound,
        });
    }
    Ok(Propagated { value, tail_bound })
}

/// Chapman–Kolmogorov composition ∫ q_nu(z, x, s) q_nu(x, w, t) dx, with
/// panels seeded at both kernel peaks.
pub fn semigroup_compose(
    params: KernelParams,
    z: f64,
    w: f64,
    s: f64,
    t: f64,
    quad_spec: &QuadratureSpec,
) -> Result<f64> {
    check_positive(
        "semigroup_compose",
        &[("z", z), ("w", w), ("s", s), ("t", t)],
    )?;
    let x_cap = default_w_cap(z, s)
        .max(default_w_cap(w, t))
        .min(quad_spec.z_max);
    let v_hi = x_cap.sqrt();
    let edges = peak_edges(
        &[(z.sqrt(), (0.5 * s).sqrt()), (w.sqrt(), (0.5 * t).sqrt())],
        v_hi,
    );
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let x = v * v;
        let a = q_nu(params, z, x, s).unwrap_or(0.0);
        let b = q_nu(params, x, w, t).unwrap_or(0.0);
        2.0 * v * a * b
    };
    quad::adaptive(
        integrand,
        0.0,
        v_hi,
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &edges,
    )
}

/// Quadrature cross-check of the mass identity; returns the numerically
/// integrated ∫_0^{cap} q_0 dw (the closed form is `mass_q0`).
pub fn mass_q0_quadrature(z: f64, t: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    let w_cap = default_w_cap(z, t).min(quad_spec.z_max);
    integrate_against_kernel(
        KernelParams::driftless(),
        z,
        t,
        w_cap,
        |_| 1.0,
        quad_spec,
        &[],
    )
}

/// Quadrature cross-check of ∫ q_1 dw = 1.
pub fn mass_q1_quadrature(z: f64, t: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    let w_cap = default_w_cap(z, t).min(quad_spec.z_max);
    let v_hi = w_cap.sqrt();
    let edges = peak_edges(&[(z.sqrt(), (0.5 * t).sqrt())], v_hi);
    quad::adaptive(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            2.0 * v * q1(z, v * v, t).unwrap_or(0.0)
        },
        0.0,
        v_hi,
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &edges,
    )
}

/// Quadrature cross-check of the energy density ∫ q_0^2(z, w, s) dw.
pub fn energy_density_q0_quadrature(z: f64, s: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    let w_cap = default_w_cap(z, s).min(quad_spec.z_max);
    integrate_against_kernel_sq(z, s, w_cap, |_| 1.0, quad_spec, &[])
}

/// Time-integrated energy ∫_0^t ED(z, s) ds with the closed-form density;
/// the s^{-1/2} endpoint is removed by substituting s = σ^2.  Equals U(z/t).
pub fn energy_time_integral_quadrature(z: f64, t: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    quad::adaptive(
        |sigma| {
            if sigma <= 0.0 {
                return 0.0;
            }
            2.0 * sigma * energy_density_q0(z, sigma * sigma).unwrap_or(0.0)
        },
        0.0,
        t.sqrt(),
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &[],
    )
}

/// Full 2-d quadrature of ∫_0^t ∫_0^∞ q_0^2 dw ds without either closed
/// form; the independent route for the energy identity.
pub fn energy_double_quadrature(z: f64, t: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    quad::adaptive(
        |sigma| {
            if sigma <= 0.0 {
                return 0.0;
            }
            let s = sigma * sigma;
            2.0 * sigma * energy_density_q0_quadrature(z, s, quad_spec).unwrap_or(0.0)
        },
        0.0,
        t.sqrt(),
        quad_spec.abs_tol,
        quad_spec.rel_tol * 0.25,
        &[],
    )
}

/// Frozen Hölder constant for the kernel difference:
/// |d_0(z1, z2, w, s)| <= M |z1 - z2|^{1/2} s^{-3/2}.
///
/// Via Cauchy–Schwarz, M^2 = sup_x e^{-x} [ ₁F₁[1/2;1](x)/2 + ₁F₁[3/2;2](x)/4 ],
/// attained at x = 0 with value 3/4, so M = sqrt(3)/2.
pub const KERNEL_HOLDER_M: f64 = 0.866_025_403_784_438_6;

/// Gauss rule helper for callers assembling custom panel meshes.
pub fn gauss_rule(points: usize) -> GaussRule {
    GaussRule::legendre(points)
}
