//! Theoretical bounds on chaos levels and their tails, the fitted constants
//! they depend on, and the ledger pairing every computed quantity with its
//! bound and margin.
//!
//! Several bounds are existential in origin: the analysis guarantees a
//! finite constant without giving its value.  Those constants are fitted
//! once over dense reference grids, frozen here with their provenance, and
//! re-asserted as regression values by the test suite.

use super::{u0, ChaosTable, NoiseKind, TailBound};
use crate::error::{Error, Result};
use crate::kernel::ENERGY_DENSITY_REFINED_C;
use crate::quad::QuadratureSpec;
use crate::specfun::{erf, gamma_fn};

/// phi(x) = e^{x²} (1 + erf(x)) = Σ_n x^n / Γ(n/2 + 1); the closed form of
/// the refined series total.
pub fn refined_series_phi(x: f64) -> f64 {
    (x * x).exp() * (1.0 + erf(x))
}

/// Refined per-level bound for white noise with β >= 1/4:
/// M_n <= C^n π^{n/2} / Γ(n/2 + 1) · z^{-1/2} t^{n/2}.
pub fn refined_level_bound(n: usize, z: f64, t: f64) -> f64 {
    let c = ENERGY_DENSITY_REFINED_C;
    let half_n = 0.5 * n as f64;
    c.powi(n as i32) * std::f64::consts::PI.powf(half_n) / gamma_fn(half_n + 1.0).unwrap()
        * z.powf(-0.5)
        * t.powf(half_n)
}

/// Geometric per-level bound for white noise (any β >= 0): M_n <= 2^{-n}.
pub fn geometric_level_bound(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

/// Tail Σ_{m > n} of the tightest applicable white-noise bound.
pub fn white_tail(n: usize, z: f64, t: f64, beta: f64) -> TailBound {
    // The geometric tail is always valid (the degeneracy weight is <= 1).
    let geometric = 0.5f64.powi(n as i32);
    if beta >= 0.25 {
        let mut refined = 0.0;
        for m in (n + 1)..(n + 200) {
            let term = refined_level_bound(m, z, t);
            refined += term;
            if term < 1e-18 * refined.max(1e-300) {
                break;
            }
        }
        TailBound::Finite(geometric.min(refined))
    } else {
        TailBound::Finite(geometric)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Tree-structured colored level bound:
/// M_n <= (Γ_t F_ε / 2)^n [ 2 U(z/t) + Σ_{m=1}^n Σ_{k=0}^{m-1}
///        binom(m-1, k) (2 f(ε) t / F_ε)^{k+1} / (k+1)! ].
pub fn colored_tree_bound(
    n: usize,
    z: f64,
    t: f64,
    gamma_t: f64,
    f_eps: f64,
    f_at_eps: f64,
) -> f64 {
    let u = crate::kernel::energy_u(z / t).unwrap_or(0.5);
    let base = 0.5 * gamma_t * f_eps;
    let ratio = 2.0 * f_at_eps * t / f_eps;
    let mut tree = 0.0;
    for m in 1..=n {
        let mut factorial = 1.0; // (k+1)!
        let mut power = 1.0; // ratio^k
        for k in 0..m {
            factorial *= (k + 1) as f64;
            power = if k == 0 { ratio } else { power * ratio };
            tree += binomial(m - 1, k) * power / factorial;
        }
    }
    base.powi(n as i32) * (2.0 * u + tree)
}

/// Colored tail after level n, summing tree bounds; the smallness condition
/// is Γ_t F_ε < 2.
pub fn colored_tail(
    n: usize,
    z: f64,
    t: f64,
    gamma_t: f64,
    f_eps: f64,
    f_at_eps: f64,
) -> TailBound {
    if gamma_t * f_eps >= 2.0 {
        return TailBound::Unbounded(format!(
            "Gamma_t * F_eps = {:.3} >= 2; no summable bound at this t",
            gamma_t * f_eps
        ));
    }
    let mut tail = 0.0;
    for m in (n + 1)..(n + 400) {
        let term = colored_tree_bound(m, z, t, gamma_t, f_eps, f_at_eps);
        tail += term;
        if term < 1e-16 * tail.max(1e-300) {
            return TailBound::Finite(tail);
        }
    }
    TailBound::Finite(tail)
}

/// Closed-form total second-moment bound for colored noise:
/// u_0² + U(z/t) 2ΓF/(2-ΓF) + √2 Γ f(ε) t / (√2-√(ΓF)) · exp{2 f(ε) t √(ΓF) / (F(√2-√(ΓF)))}.
pub fn colored_total_bound(
    z: f64,
    t: f64,
    gamma_t: f64,
    f_eps: f64,
    f_at_eps: f64,
) -> Option<f64> {
    let gf = gamma_t * f_eps;
    if gf >= 2.0 {
        return None;
    }
    let u = crate::kernel::energy_u(z / t).unwrap_or(0.5);
    let sqrt2 = std::f64::consts::SQRT_2;
    let geo = u * 2.0 * gf / (2.0 - gf);
    let denom = sqrt2 - gf.sqrt();
    let expo = (2.0 * f_at_eps * t * gf.sqrt()) / (f_eps * denom);
    Some(u0(z, t).powi(2) + geo + sqrt2 * gamma_t * f_at_eps * t / denom * expo.exp())
}

/// Constants entering the explicit ratio bounds for a given degeneracy β.
///
/// K(z, τ; 2β) <= 4 C_k (t-τ)^{α-1} (ẑ ∨ t)^{2β-α} and
/// K̃(z, τ; β) <= 4 C_k̃ (ẑ ∨ (t-τ))^β with α = 2β ∧ 1/2.  Both constants
/// are existential; the values here were fitted over the reference grid
/// z ∈ [1e-4, 16] (log), τ/t ∈ {0.02..0.98}, t ∈ [0.01, 1] (log) and frozen
/// with a 10% guard.
#[derive(Debug, Clone)]
pub struct RatioConstants {
    pub beta: f64,
    pub alpha: f64,
    pub c_k: f64,
    pub c_k_tilde: f64,
    pub provenance: &'static str,
}

// Dense-scan suprema: beta 1/4 -> C_k 0.0862 / C_k̃ 0.3132, beta 1/2 ->
// C_k 0.0714 / C_k̃ 0.4052 (z in [3e-5, 40] log, τ/t in [0.005, 0.995],
// t in [0.005, 1.5] log; both normalized quantities decay toward the τ -> t
// and z -> 0 edges, so the suprema are interior).  Frozen with >= 12% guard.
const FROZEN_RATIO_CONSTANTS: &[RatioConstants] = &[
    RatioConstants {
        beta: 0.25,
        alpha: 0.5,
        c_k: 0.10,
        c_k_tilde: 0.36,
        provenance: "frozen fit, dense reference scan",
    },
    RatioConstants {
        beta: 0.5,
        alpha: 0.5,
        c_k: 0.082,
        c_k_tilde: 0.46,
        provenance: "frozen fit, dense reference scan",
    },
];

/// Frozen constants when available, otherwise a live fit on the reference
/// grid (deterministic, so still reproducible).
pub fn ratio_constants(beta: f64) -> RatioConstants {
    for c in FROZEN_RATIO_CONSTANTS {
        if (c.beta - beta).abs() < 1e-12 {
            return c.clone();
        }
    }
    let alpha = (2.0 * beta).min(0.5);
    RatioConstants {
        beta,
        alpha,
        c_k: fit_ratio_k_constant(beta),
        c_k_tilde: fit_ratio_k_tilde_constant(beta),
        provenance: "live fit on reference grid",
    }
}

impl RatioConstants {
    /// C_{α,β} = 4 C / α for the white-noise per-level ratio factor.
    pub fn c_alpha_beta(&self) -> f64 {
        4.0 * self.c_k / self.alpha
    }

    /// Colored variant uses the larger of the two route constants.
    pub fn c_alpha_beta_colored(&self) -> f64 {
        4.0 * self.c_k.max(self.c_k_tilde) / self.alpha
    }

    /// Per-level ratio bound E[(u_n/u_0)²] <= (C_{α,β} t^α)^n (ẑ ∨ t)^{2β-α}.
    pub fn white_level_bound(&self, n: usize, z: f64, t: f64) -> f64 {
        let zhat = z.min(1.0).max(t);
        (self.c_alpha_beta() * t.powf(self.alpha)).powi(n as i32)
            * zhat.powf(2.0 * self.beta - self.alpha)
    }

    pub fn white_tail(&self, n: usize, z: f64, t: f64) -> TailBound {
        let q = self.c_alpha_beta() * t.powf(self.alpha);
        if q >= 1.0 {
            return TailBound::Unbounded(format!(
                "C_alpha_beta t^alpha = {q:.3} >= 1 at t = {t}"
            ));
        }
        let zhat = z.min(1.0).max(t);
        TailBound::Finite(
            zhat.powf(2.0 * self.beta - self.alpha) * q.powi(n as i32 + 1) / (1.0 - q),
        )
    }

    pub fn colored_tail(
        &self,
        n: usize,
        z: f64,
        t: f64,
        gamma_t: f64,
        f_eps: f64,
        f_at_eps: f64,
    ) -> TailBound {
        let q = gamma_t * (f_eps + f_at_eps) * self.c_alpha_beta_colored() * t.powf(self.alpha);
        if q >= 1.0 {
            return TailBound::Unbounded(format!(
                "Gamma_t (F_eps + f(eps)) C_alpha_beta t^alpha = {q:.3} >= 1 at t = {t}"
            ));
        }
        let zhat = z.min(1.0).max(t);
        TailBound::Finite(
            zhat.powf(2.0 * self.beta - self.alpha) * q.powi(n as i32 + 1) / (1.0 - q),
        )
    }

    /// Explicit sup-over-z bound C_{t,β} = (1 ∨ t)^{2β-α} / (1 - C_{α,β} t^α)
    /// for t below the threshold.
    pub fn white_sup_bound(&self, t: f64) -> Option<f64> {
        let q = self.c_alpha_beta() * t.powf(self.alpha);
        if q >= 1.0 {
            None
        } else {
            Some(t.max(1.0).powf(2.0 * self.beta - self.alpha) / (1.0 - q))
        }
    }

    pub fn colored_sup_bound(&self, t: f64, gamma_t: f64, f_eps: f64, f_at_eps: f64) -> Option<f64> {
        let q = gamma_t * (f_eps + f_at_eps) * self.c_alpha_beta_colored() * t.powf(self.alpha);
        if q >= 1.0 {
            None
        } else {
            Some(t.max(1.0).powf(2.0 * self.beta - self.alpha) / (1.0 - q))
        }
    }

    /// Largest t with C_{α,β} t^α < 1.
    pub fn white_threshold(&self) -> f64 {
        self.c_alpha_beta().powf(-1.0 / self.alpha)
    }

    /// Largest grid-scale t with Γ_t (F_ε + f(ε)) C' t^α < 1, located by
    /// bisection against the supplied Γ evaluator.  Reported as the largest
    /// admissible t, with no claim of maximality beyond the scan.
    pub fn colored_threshold<G: Fn(f64) -> f64>(
        &self,
        gamma_of_t: G,
        f_eps: f64,
        f_at_eps: f64,
    ) -> f64 {
        let c = self.c_alpha_beta_colored();
        let crit = |t: f64| gamma_of_t(t) * (f_eps + f_at_eps) * c * t.powf(self.alpha) - 1.0;
        let mut lo = 1e-8;
        let mut hi = 1.0;
        if crit(hi) < 0.0 {
            return hi;
        }
        if crit(lo) > 0.0 {
            return 0.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if crit(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Reference-grid fit of the K-bound constant:
/// C = sup K(z, τ; 2β) (t-τ)^{1-α} / (4 (ẑ ∨ t)^{2β-α}).
pub fn fit_ratio_k_constant(beta: f64) -> f64 {
    let alpha = (2.0 * beta).min(0.5);
    let spec = QuadratureSpec {
        rel_tol: 1e-6,
        abs_tol: 1e-10,
        ..QuadratureSpec::default()
    };
    let mut sup: f64 = 0.0;
    let mut t = 0.01;
    while t <= 1.0 {
        let mut z = 1e-4;
        while z <= 16.0 {
            for frac in [0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98] {
                let tau = frac * t;
                if let Ok(k) = super::k_function(z, tau, t, 2.0 * beta, &spec) {
                    let zhat = z.min(1.0).max(t);
                    let norm =
                        k * (t - tau).powf(1.0 - alpha) / (4.0 * zhat.powf(2.0 * beta - alpha));
                    sup = sup.max(norm);
                }
            }
            z *= 3.1;
        }
        t *= 2.9;
    }
    sup
}

/// Reference-grid fit of the K̃-bound constant:
/// C̃ = sup K̃(z, τ; β) / (4 (ẑ ∨ (t-τ))^β).
pub fn fit_ratio_k_tilde_constant(beta: f64) -> f64 {
    let spec = QuadratureSpec {
        rel_tol: 1e-6,
        abs_tol: 1e-10,
        ..QuadratureSpec::default()
    };
    let mut sup: f64 = 0.0;
    let mut t = 0.01;
    while t <= 1.0 {
        let mut z = 1e-4;
        while z <= 16.0 {
            for frac in [0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98] {
                let tau = frac * t;
                if let Ok(k) = super::k_tilde(z, tau, t, beta, &spec) {
                    let zhat = z.min(1.0).max(t - tau);
                    sup = sup.max(k / (4.0 * zhat.powf(beta)));
                }
            }
            z *= 3.1;
        }
        t *= 2.9;
    }
    sup
}

/// Frozen constant of the Q_t Hölder bound for (β, λ) = (1/2, 0.4), fitted
/// over z1 ∈ [2^-12, 8] dyadic with pair ratios up to 8 and t up to 1.5
/// (dense-scan supremum 0.3895); frozen with a 40% guard.
pub const HOLDER_Q_M_BETA_HALF_LAMBDA_04: f64 = 0.55;

/// Q̃_t <= M t^{3/4} |Δz|^{1/4} with M = 16/3 (analytic, from the p = 1/4
/// interpolation of the uniform bound 2 and the unit kernel masses).
pub const HOLDER_QTILDE_M: f64 = 16.0 / 3.0;

/// Constant for the Q_t bound; frozen at the tested (β, λ), fitted live
/// elsewhere.
pub fn holder_q_constant(beta: f64, lambda: f64) -> f64 {
    if (beta - 0.5).abs() < 1e-12 && (lambda - 0.4).abs() < 1e-12 {
        return HOLDER_Q_M_BETA_HALF_LAMBDA_04;
    }
    fit_holder_q_constant(beta, lambda)
}

/// Reference fit of sup Q_t / (t^η |Δz|^{λ/2}).
pub fn fit_holder_q_constant(beta: f64, lambda: f64) -> f64 {
    let spec = QuadratureSpec {
        rel_tol: 1e-6,
        abs_tol: 1e-10,
        ..QuadratureSpec::default()
    };
    let eta = (2.0 * beta - 0.5).min(0.25) - 0.5 * lambda;
    let mut sup: f64 = 0.0;
    for &t in &[0.1, 0.25, 0.5, 1.0] {
        for k in 0..=10u32 {
            let z1 = 4.0 * 0.5f64.powi(k as i32);
            for &ratio in &[1.5, 2.0, 4.0] {
                let z2 = z1 * ratio;
                if let Ok(m) = super::holder_modulus(z1, z2, t, beta, lambda, &spec) {
                    let dz = (z2 - z1).abs();
                    sup = sup.max(m.q_t / (t.powf(eta) * dz.powf(0.5 * lambda)));
                }
            }
        }
    }
    sup
}

/// One computed-vs-bound record.
#[derive(Debug, Clone)]
pub struct LedgerRow {
    pub level: Option<usize>,
    pub z: f64,
    pub t: f64,
    pub value: f64,
    pub bound_name: String,
    pub bound: f64,
    pub margin: f64,
}

impl LedgerRow {
    pub fn new(level: Option<usize>, z: f64, t: f64, value: f64, name: &str, bound: f64) -> Self {
        LedgerRow {
            level,
            z,
            t,
            value,
            bound_name: name.to_string(),
            bound,
            margin: bound - value,
        }
    }
}

/// A constant with its origin; recorded so the ledger is self-describing.
#[derive(Debug, Clone)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, Default)]
pub struct BoundLedger {
    pub rows: Vec<LedgerRow>,
    pub constants: Vec<FittedConstant>,
}

impl BoundLedger {
    pub fn push_constant(&mut self, name: &str, value: f64, provenance: &str) {
        self.constants.push(FittedConstant {
            name: name.to_string(),
            value,
            provenance: provenance.to_string(),
        });
    }

    /// Worst (most negative) relative margin over all rows.
    pub fn worst_relative_margin(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.margin / r.bound.abs().max(1e-300))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_within(&self, rel_slack: f64) -> bool {
        self.rows
            .iter()
            .all(|r| r.margin >= -rel_slack * r.bound.abs().max(1e-300))
    }

    /// Columnar text table: n, z, t, value, bound_name, bound_value, margin.
    pub fn to_table_string(&self) -> String {
        let mut out = String::from("n,z,t,value,bound_name,bound_value,margin\n");
        for r in &self.rows {
            let n = r.level.map(|n| n.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{n},{},{},{},{},{},{}\n",
                super::fmt_sig(r.z),
                super::fmt_sig(r.t),
                super::fmt_sig(r.value),
                r.bound_name,
                super::fmt_sig(r.bound),
                super::fmt_sig(r.margin)
            ));
        }
        out
    }
}

/// Assembles the full bound ledger for a table: per-level bounds, total
/// bounds with tails, and (for β > 0) the ratio bounds, with every fitted
/// constant recorded alongside.
pub fn build_ledger(table: &ChaosTable) -> Result<BoundLedger> {
    let mut ledger = BoundLedger::default();
    ledger.push_constant(
        "energy_density_refined_C",
        ENERGY_DENSITY_REFINED_C,
        "frozen: sup_y y^{3/2}[e^{-y}(I0-I1)(y)-e^{-2y}], high-precision scan",
    );
    let n_levels = table.n_levels();
    for (iz, &z) in table.grid.z_nodes.iter().enumerate() {
        for (it, &t) in table.grid.t_nodes.iter().enumerate() {
            match &table.kind {
                NoiseKind::White => {
                    for n in 0..=n_levels {
                        let value = table.level(n, iz, it);
                        ledger.rows.push(LedgerRow::new(
                            Some(n),
                            z,
                            t,
                            value,
                            "white_geometric_2^-n",
                            geometric_level_bound(n),
                        ));
                        if table.beta >= 0.25 && n >= 1 {
                            ledger.rows.push(LedgerRow::new(
                                Some(n),
                                z,
                                t,
                                value,
                                "white_refined",
                                refined_level_bound(n, z, t),
                            ));
                        }
                    }
                    if table.beta == 0.0 {
                        let (value, tail) = table.second_moment(iz, it);
                        let total = value + tail.finite().unwrap_or(f64::INFINITY);
                        ledger.rows.push(LedgerRow::new(
                            None,
                            z,
                            t,
                            total,
                            "white_total_sup_2",
                            2.0,
                        ));
                    }
                }
                NoiseKind::Colored {
                    f_eps, f_at_eps, ..
                } => {
                    let g = table.colored_gamma(t);
                    for n in 1..=n_levels {
                        let value = table.level(n, iz, it);
                        ledger.rows.push(LedgerRow::new(
                            Some(n),
                            z,
                            t,
                            value,
                            "colored_tree",
                            colored_tree_bound(n, z, t, g, *f_eps, *f_at_eps),
                        ));
                    }
                    if let Some(total_bound) = colored_total_bound(z, t, g, *f_eps, *f_at_eps) {
                        let (value, tail) = table.second_moment(iz, it);
                        if let Some(tl) = tail.finite() {
                            ledger.rows.push(LedgerRow::new(
                                None,
                                z,
                                t,
                                value + tl,
                                "colored_total",
                                total_bound,
                            ));
                        }
                    }
                }
            }
            if table.beta > 0.0 {
                let consts = ratio_constants(table.beta);
                for n in 1..=n_levels {
                    let value = table.level(n, iz, it) / u0(z, t).powi(2);
                    let bound = match &table.kind {
                        NoiseKind::White => consts.white_level_bound(n, z, t),
                        NoiseKind::Colored {
                            f_eps, f_at_eps, ..
                        } => {
                            let g = table.colored_gamma(t);
                            let q = g * (f_eps + f_at_eps)
                                * consts.c_alpha_beta_colored()
                                * t.powf(consts.alpha);
                            let zhat = z.min(1.0).max(t);
                            q.powi(n as i32) * zhat.powf(2.0 * consts.beta - consts.alpha)
                        }
                    };
                    ledger.rows.push(LedgerRow::new(
                        Some(n),
                        z,
                        t,
                        value,
                        "ratio_level",
                        bound,
                    ));
                }
            }
        }
    }
    if table.beta > 0.0 {
        let consts = ratio_constants(table.beta);
        ledger.push_constant("ratio_C_k", consts.c_k, consts.provenance);
        ledger.push_constant("ratio_C_k_tilde", consts.c_k_tilde, consts.provenance);
        ledger.push_constant(
            "C_alpha_beta",
            consts.c_alpha_beta(),
            "4 C_k / alpha with alpha = 2 beta ∧ 1/2",
        );
    }
    Ok(ledger)
}

/// Lp bound outcome: a value with tail, or an explicit divergence report for
/// the regime where the non-refined route fails.
#[derive(Debug, Clone)]
pub enum LpBound {
    Value { value: f64, tail: f64 },
    DivergentNaiveBound { reason: String },
}

pub fn lp_bound(table: &ChaosTable, iz: usize, it: usize, p: f64) -> Result<LpBound> {
    if !(p >= 2.0) {
        return Err(Error::domain("lp_bound", format!("p = {p} must be >= 2")));
    }
    let z = table.grid.z_nodes[iz];
    let t = table.grid.t_nodes[it];
    if (p - 2.0).abs() < 1e-14 {
        // Orthogonality makes p = 2 exact: the norm is sqrt(Σ M_n).
        let (value, tail) = table.second_moment(iz, it);
        let tail = tail.finite().unwrap_or(f64::INFINITY);
        return Ok(LpBound::Value {
            value: value.sqrt(),
            tail: (value + tail).sqrt() - value.sqrt(),
        });
    }
    if table.beta < 0.25 && p >= 3.0 {
        return Ok(LpBound::DivergentNaiveBound {
            reason: format!(
                "beta = {} < 1/4: the geometric route gives Σ ((p-1)/2)^(n/2) which \
                 diverges for p = {p} >= 3; no refined bound applies",
                table.beta
            ),
        });
    }
    let mut value = 0.0;
    for n in 0..=table.n_levels() {
        value += (p - 1.0).powf(0.5 * n as f64) * table.level(n, iz, it).max(0.0).sqrt();
    }
    let tail = if table.beta >= 0.25 && table.is_white() {
        // Σ_{n>N} (C (p-1) √π √t)^{n/2} / sqrt(Γ(n/2+1)) z^{-1/4}
        let mut acc = 0.0;
        for n in (table.n_levels() + 1)..(table.n_levels() + 400) {
            let term = (p - 1.0).powf(0.5 * n as f64) * refined_level_bound(n, z, t).sqrt();
            acc += term;
            if term < 1e-16 * acc.max(1e-300) {
                break;
            }
        }
        acc
    } else {
        // geometric route, valid while sqrt((p-1)/2) < 1
        let q = ((p - 1.0) / 2.0).sqrt();
        if q >= 1.0 {
            return Ok(LpBound::DivergentNaiveBound {
                reason: format!("geometric ratio sqrt((p-1)/2) = {q:.3} >= 1"),
            });
        }
        q.powi(table.n_levels() as i32 + 1) / (1.0 - q)
    };
    Ok(LpBound::Value { value, tail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_matches_series() {
        // phi(x) = Σ x^n / Γ(n/2+1)
        for &x in &[0.1f64, 0.7, 1.9] {
            let mut series = 0.0;
            for n in 0..200i32 {
                series += x.powi(n) / gamma_fn(0.5 * n as f64 + 1.0).unwrap();
            }
            let got = refined_series_phi(x);
            assert!(((got - series) / series).abs() < 1e-12, "{got} vs {series}");
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 5), 1.0);
    }

    #[test]
    fn white_tail_uses_refined_when_sharper() {
        // large z: refined tail ~ z^{-1/2} beats 2^{-N}
        let tail_refined = white_tail(3, 100.0, 0.1, 0.25).finite().unwrap();
        let tail_geometric = white_tail(3, 100.0, 0.1, 0.0).finite().unwrap();
        assert!(tail_refined < tail_geometric);
    }

    #[test]
    fn colored_tail_flags_large_gamma_f() {
        match colored_tail(2, 1.0, 1.0, 3.0, 1.0, 1.0) {
            TailBound::Unbounded(_) => {}
            TailBound::Finite(v) => panic!("expected unbounded, got {v}"),
        }
    }

    #[test]
    fn ratio_constants_frozen_for_half() {
        let c = ratio_constants(0.5);
        assert_eq!(c.alpha, 0.5);
        assert!(c.provenance.contains("frozen"));
        assert!(c.white_threshold() > 0.0);
    }
}
