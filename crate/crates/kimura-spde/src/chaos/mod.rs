//! Wiener-chaos second-moment engine.
//!
//! The second moment of the mild solution decomposes over chaos levels,
//! E[u²(z,t)] = Σ_n M_n(z,t), where M_0 = u_0² is the squared deterministic
//! solution and each level satisfies the recursion
//!
//!   M_n(z,t) = ∫_0^t ∫_0^∞ ŵ^{2β} q_0²(z, w, t-τ) M_{n-1}(w, τ) dw dτ
//!
//! for space-time white noise (ŵ = w ∧ 1 is the degeneracy weight).  The
//! recursion is computed on a shared (w, τ) product grid with bilinear
//! interpolation between levels; the temporal endpoint behaves like
//! (t-τ)^{-1/2} and is handled by integrating in σ = sqrt(t-τ).
//!
//! Colored noise requires the full 4-point inner products G_n(z1,t1,z2,t2);
//! see [`colored`].  Every computed level can be checked against the
//! theoretical bound family collected in [`bounds`].

pub mod bounds;
mod colored;

pub use bounds::{BoundLedger, FittedConstant, LedgerRow, RatioConstants};
pub use colored::chaos_colored;

use crate::error::{Error, Result};
use crate::kernel;
use crate::noise::{f_eps, gamma_t, FieldGrid, NoiseModel};
use crate::quad::{self, QuadratureSpec};
use crate::table::{BilinearTable, Grid2};
use rayon::prelude::*;

/// Controls for a chaos-table build.
#[derive(Debug, Clone)]
pub struct ChaosConfig {
    /// Truncation depth N; levels 0..=N are computed.
    pub n_levels: usize,
    /// Evaluation grid in (z, t).
    pub grid: FieldGrid,
    pub quad: QuadratureSpec,
    /// Degeneracy exponent of the noise coefficient ẑ^β.
    pub beta: f64,
    /// Split radius for the colored-noise bound evaluation.
    pub eps: f64,
}

impl ChaosConfig {
    pub fn validate(&self, colored: bool) -> Result<()> {
        self.grid.validate()?;
        self.quad.validate()?;
        if self.n_levels == 0 || self.n_levels > if colored { 8 } else { 12 } {
            return Err(Error::domain(
                "ChaosConfig",
                format!(
                    "n_levels = {} outside 1..={} ({} recursion)",
                    self.n_levels,
                    if colored { 8 } else { 12 },
                    if colored { "4-point" } else { "white" }
                ),
            ));
        }
        if colored && (self.grid.n_z() > 8 || self.grid.n_t() > 8) {
            return Err(Error::domain(
                "ChaosConfig",
                "colored 4-point recursion is restricted to <= 8 nodes per axis",
            ));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::domain("ChaosConfig", "beta must be >= 0"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::domain("ChaosConfig", "eps must be > 0"));
        }
        Ok(())
    }
}

/// Analytic tail control for a truncated chaos sum.
#[derive(Debug, Clone)]
pub enum TailBound {
    Finite(f64),
    /// No applicable bound at these parameters; the reason names the
    /// violated smallness condition.
    Unbounded(String),
}

impl TailBound {
    pub fn finite(&self) -> Option<f64> {
        match self {
            TailBound::Finite(x) => Some(*x),
            TailBound::Unbounded(_) => None,
        }
    }
}

/// Noise classification a table was built under.  The colored variant keeps
/// the temporal kernel so Γ_t can be evaluated at each node's own t.
#[derive(Debug, Clone)]
pub enum NoiseKind {
    White,
    Colored {
        temporal: crate::noise::CovKernel,
        f_eps: f64,
        f_at_eps: f64,
    },
}

/// Per-level second-moment contributions on the evaluation grid.
#[derive(Debug, Clone)]
pub struct ChaosTable {
    pub grid: FieldGrid,
    pub beta: f64,
    pub eps: f64,
    pub kind: NoiseKind,
    /// levels[n] holds M_n(z_i, t_j) row-major over (z, t).
    pub levels: Vec<Grid2>,
    /// Colored case: 4-point inner products on the coarse grid.
    pub four_point: Option<colored::FourPointTable>,
    /// Reported relative tolerance of the tabulated values (quadrature plus
    /// interpolation, calibrated by the grid-refinement study).
    pub quad_tol: f64,
}

/// Deterministic solution u_0(z, t) = 1 - e^{-z/t} (unit initial data).
pub fn u0(z: f64, t: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return 1.0;
    }
    -(-z / t).exp_m1()
}

/// Internal recursion grid: the user axes plus a zero row and a geometric
/// extension of the spatial axis covering every kernel window that the
/// outermost user nodes can reach.
struct RecursionGrid {
    w_axis: Vec<f64>,
    tau_axis: Vec<f64>,
    /// index of user z node i in w_axis
    z_index: Vec<usize>,
    /// index of user t node j in tau_axis
    t_index: Vec<usize>,
}

fn build_recursion_grid(grid: &FieldGrid) -> RecursionGrid {
    let z_top = *grid.z_nodes.last().unwrap();
    let t_top = *grid.t_nodes.last().unwrap();
    let w_ext = kernel::default_w_cap(z_top, t_top);
    let mut w_axis = vec![0.0];
    w_axis.extend_from_slice(&grid.z_nodes);
    let mut w = z_top;
    while w < w_ext {
        w *= 1.18;
        w_axis.push(w.min(w_ext));
    }
    w_axis.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * w_ext);
    // Levels vanish like powers of τ at zero; sub-nodes below the first
    // output time keep the inter-level interpolation honest there.
    let t1 = grid.t_nodes[0];
    let mut tau_axis = vec![0.0, 0.125 * t1, 0.25 * t1, 0.5 * t1, 0.75 * t1];
    tau_axis.extend_from_slice(&grid.t_nodes);
    // The same applies to the spatial boundary layer below the first node.
    let z1 = grid.z_nodes[0];
    let mut w_refined = vec![0.0, 0.25 * z1, 0.5 * z1];
    w_refined.extend(w_axis.into_iter().skip(1));
    let w_axis = w_refined;
    let z_index = (0..grid.n_z()).map(|i| i + 3).collect();
    let t_index = (0..grid.n_t()).map(|j| j + 5).collect();
    RecursionGrid {
        w_axis,
        tau_axis,
        z_index,
        t_index,
    }
}

/// Previous chaos level as seen by the recursion: the base level is the
/// closed form u_0², evaluated exactly; higher levels interpolate their
/// tabulated values.
enum PrevLevel<'a> {
    Exact,
    Table(&'a BilinearTable),
}

impl PrevLevel<'_> {
    #[inline]
    fn eval(&self, w: f64, tau: f64) -> f64 {
        match self {
            PrevLevel::Exact => {
                let m = u0(w, tau);
                m * m
            }
            PrevLevel::Table(t) => t.eval(w, tau),
        }
    }
}

/// Spatial integral S(τ) = ∫ ŵ^{2β} q_0²(z, w, s) A(w, τ) dw with s = t - τ,
/// fixed panels in v = sqrt(w) seeded at the kernel window, the degeneracy
/// kink at w = 1, and the interpolation kinks of A inside the window.
fn spatial_level_integral(
    z: f64,
    s: f64,
    beta: f64,
    prev: &PrevLevel,
    tau: f64,
    rule: &quad::GaussRule,
    w_axis: &[f64],
) -> f64 {
    let w_cap = kernel::default_w_cap(z, s).min(w_axis.last().copied().unwrap_or(f64::MAX) * 4.0);
    let v_hi = w_cap.sqrt();
    let sigma_v = 0.5 * s.sqrt();
    let center = z.sqrt();
    let mut edges: Vec<f64> = vec![0.0, v_hi];
    for k in [
        -12.0, -8.0, -6.0, -4.0, -3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0,
        6.0, 8.0, 12.0,
    ] {
        let v = center + k * sigma_v;
        if v > 0.0 && v < v_hi {
            edges.push(v);
        }
    }
    if beta > 0.0 && v_hi > 1.0 {
        edges.push(1.0);
    }
    // Interpolation kinks of the tabulated level are not seeded: panels at
    // the sigma scale average over sub-panel kinks with an error well below
    // the table tolerance, and seeding them made the node cost quadratic.
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * v_hi);
    quad::panels(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let w = v * v;
            let q = kernel::q0(z, w, s).unwrap_or(0.0);
            let weight = if beta == 0.0 { 1.0 } else { w.min(1.0).powf(2.0 * beta) };
            2.0 * v * q * q * weight * prev.eval(w, tau)
        },
        &edges,
        rule,
    )
}

/// One recursion level at a single grid node: the τ integral in σ = sqrt(t-τ).
fn level_value_at(
    z: f64,
    t: f64,
    beta: f64,
    prev: &PrevLevel,
    rule: &quad::GaussRule,
    w_axis: &[f64],
    tau_axis: &[f64],
    grading_panels: usize,
) -> f64 {
    // σ = sqrt(t - τ) regularizes the (t - τ)^{-1/2} endpoint exactly; a
    // uniform σ mesh is the quadratically graded τ mesh.  Panels average
    // over the interpolation kinks of the level table; only when the τ axis
    // is coarse are the few mapped kinks worth seeding.
    let sig_max = t.sqrt();
    let mut edges: Vec<f64> = (0..=grading_panels)
        .map(|i| sig_max * i as f64 / grading_panels as f64)
        .collect();
    if tau_axis.len() <= 18 {
        for &tk in tau_axis {
            if tk > 0.0 && tk < t {
                edges.push((t - tk).sqrt());
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * sig_max);
    quad::panels(
        |sigma| {
            if sigma <= 0.0 || sigma >= sig_max {
                return 0.0;
            }
            let s = sigma * sigma;
            let tau = t - s;
            2.0 * sigma * spatial_level_integral(z, s, beta, prev, tau, rule, w_axis)
        },
        &edges,
        rule,
    )
}

/// Builds the white-noise chaos table: M_0 from the closed form, higher
/// levels by the degenerate-weight recursion on the shared grid.
pub fn chaos_white(config: &ChaosConfig) -> Result<ChaosTable> {
    config.validate(false)?;
    let rec = build_recursion_grid(&config.grid);
    let n_w = rec.w_axis.len();
    let n_tau = rec.tau_axis.len();
    let rule = quad::GaussRule::legendre(config.quad.base_points.clamp(4, 10));

    // Level 0: u_0² with the τ = 0 row at its limiting value 1 (w > 0).
    let mut level0 = Grid2::zeros(n_w, n_tau);
    for (i, &w) in rec.w_axis.iter().enumerate() {
        for (j, &tau) in rec.tau_axis.iter().enumerate() {
            let v = if w == 0.0 {
                0.0
            } else if tau == 0.0 {
                1.0
            } else {
                let m = u0(w, tau);
                m * m
            };
            level0.set(i, j, v);
        }
    }

    let mut internal_levels = vec![level0];
    for n in 1..=config.n_levels {
        // Level 1 integrates the closed form u_0² directly; interpolation
        // only enters from level 2 on.
        let prev_table;
        let prev = if n == 1 {
            PrevLevel::Exact
        } else {
            prev_table = BilinearTable::new(
                rec.w_axis.clone(),
                rec.tau_axis.clone(),
                internal_levels.last().unwrap().clone(),
            );
            PrevLevel::Table(&prev_table)
        };
        let nodes: Vec<(usize, usize)> = (0..n_w)
            .flat_map(|i| (0..n_tau).map(move |j| (i, j)))
            .collect();
        let values: Vec<f64> = nodes
            .par_iter()
            .map(|&(i, j)| {
                let w = rec.w_axis[i];
                let tau = rec.tau_axis[j];
                if w == 0.0 || tau == 0.0 {
                    0.0
                } else {
                    level_value_at(
                        w,
                        tau,
                        config.beta,
                        &prev,
                        &rule,
                        &rec.w_axis,
                        &rec.tau_axis,
                        16,
                    )
                }
            })
            .collect();
        let mut grid = Grid2::zeros(n_w, n_tau);
        for (&(i, j), &v) in nodes.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "chaos_white",
                    location: format!("level node (w = {}, t = {})", rec.w_axis[i], rec.tau_axis[j]),
                });
            }
            grid.set(i, j, v);
        }
        internal_levels.push(grid);
    }

    // Restrict to the user grid.
    let levels = internal_levels
        .iter()
        .map(|g| {
            let mut out = Grid2::zeros(config.grid.n_z(), config.grid.n_t());
            for (i, &wi) in rec.z_index.iter().enumerate() {
                for (j, &tj) in rec.t_index.iter().enumerate() {
                    out.set(i, j, g.at(wi, tj));
                }
            }
            out
        })
        .collect();

    Ok(ChaosTable {
        grid: config.grid.clone(),
        beta: config.beta,
        eps: config.eps,
        kind: NoiseKind::White,
        levels,
        four_point: None,
        quad_tol: chaos_tolerance(&config.grid, &config.quad),
    })
}

/// Reported relative tolerance for tabulated chaos values: quadrature target
/// plus the bilinear interpolation defect at the grid's resolution.  The
/// interpolation coefficient is calibrated once by the grid-refinement study
/// in the test suite.
fn chaos_tolerance(grid: &FieldGrid, quad: &QuadratureSpec) -> f64 {
    let t_top = *grid.t_nodes.last().unwrap();
    let rel_dt = grid.dt / t_top;
    10.0 * quad.rel_tol + 0.5 * rel_dt * rel_dt + 1e-4 * rel_dt
}

impl ChaosTable {
    pub fn n_levels(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn is_white(&self) -> bool {
        matches!(self.kind, NoiseKind::White)
    }

    /// M_n at a grid node.
    pub fn level(&self, n: usize, iz: usize, it: usize) -> f64 {
        self.levels[n].at(iz, it)
    }

    /// Σ_{n<=N} M_n plus the tightest applicable analytic tail.
    pub fn second_moment(&self, iz: usize, it: usize) -> (f64, TailBound) {
        let value: f64 = self.levels.iter().map(|g| g.at(iz, it)).sum();
        let z = self.grid.z_nodes[iz];
        let t = self.grid.t_nodes[it];
        let n = self.n_levels();
        let tail = match &self.kind {
            NoiseKind::White => bounds::white_tail(n, z, t, self.beta),
            NoiseKind::Colored {
                f_eps, f_at_eps, ..
            } => bounds::colored_tail(n, z, t, self.colored_gamma(t), *f_eps, *f_at_eps),
        };
        (value, tail)
    }

    /// Γ_t of the temporal kernel at this node's time (colored tables only).
    pub fn colored_gamma(&self, t: f64) -> f64 {
        match &self.kind {
            NoiseKind::Colored { temporal, .. } => {
                gamma_t(temporal, t).unwrap_or(f64::INFINITY)
            }
            NoiseKind::White => 0.0,
        }
    }

    /// E[(u/u_0)²] partial sum (including the deterministic level, which
    /// contributes exactly 1) with the explicit ratio-bound tail.
    pub fn ratio_moment(&self, iz: usize, it: usize) -> Result<(f64, TailBound)> {
        if !(self.beta > 0.0) {
            return Err(Error::domain(
                "ratio_moment",
                "requires beta > 0; the undamped boundary ratio diverges",
            ));
        }
        let z = self.grid.z_nodes[iz];
        let t = self.grid.t_nodes[it];
        let u0sq = u0(z, t).powi(2);
        let value: f64 = self.levels.iter().map(|g| g.at(iz, it)).sum::<f64>() / u0sq;
        let consts = bounds::ratio_constants(self.beta);
        let tail = match &self.kind {
            NoiseKind::White => consts.white_tail(self.n_levels(), z, t),
            NoiseKind::Colored {
                f_eps, f_at_eps, ..
            } => consts.colored_tail(
                self.n_levels(),
                z,
                t,
                self.colored_gamma(t),
                *f_eps,
                *f_at_eps,
            ),
        };
        Ok((value, tail))
    }

    /// L^p norm bound from the chaos levels; exact (orthogonality) at p = 2,
    /// hypercontractive triangle sum for p > 2.
    pub fn lp_bound(&self, iz: usize, it: usize, p: f64) -> Result<bounds::LpBound> {
        bounds::lp_bound(self, iz, it, p)
    }

    /// Columnar serialization: n, z, t, value with empty bound fields.
    pub fn to_table_string(&self) -> String {
        let mut out = String::from("n,z,t,value,bound_name,bound_value,margin\n");
        for (n, level) in self.levels.iter().enumerate() {
            for (i, &z) in self.grid.z_nodes.iter().enumerate() {
                for (j, &t) in self.grid.t_nodes.iter().enumerate() {
                    out.push_str(&format!(
                        "{n},{},{},{},,,\n",
                        fmt_sig(z),
                        fmt_sig(t),
                        fmt_sig(level.at(i, j))
                    ));
                }
            }
        }
        out
    }
}

/// 12 significant digits, the columnar-format convention.
pub(crate) fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Builds the parameter summary stored alongside colored tables.
pub(crate) fn colored_kind(model: &NoiseModel, eps: f64) -> Result<NoiseKind> {
    Ok(NoiseKind::Colored {
        temporal: model.temporal.clone(),
        f_eps: f_eps(&model.spatial, eps)?,
        f_at_eps: model.spatial.eval(eps)?,
    })
}

/// K(z, τ; 2β) = ∫ ŵ^{2β} q_0²(z, w, t-τ) u_0²(w, τ) dw / u_0²(z, t).
pub fn k_function(z: f64, tau: f64, t: f64, two_beta: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    if !(tau >= 0.0 && tau < t) || !(z > 0.0) || !(two_beta > 0.0) {
        return Err(Error::domain(
            "k_function",
            format!("requires z > 0, 0 <= tau < t, exponent > 0; got z={z}, tau={tau}, t={t}"),
        ));
    }
    let s = t - tau;
    let w_cap = kernel::default_w_cap(z, s);
    let num = kernel::integrate_against_kernel_sq(
        z,
        s,
        w_cap,
        |w| {
            let m = if tau == 0.0 { 1.0 } else { u0(w, tau) };
            w.min(1.0).powf(two_beta) * m * m
        },
        quad_spec,
        &[1.0],
    )?;
    Ok(num / u0(z, t).powi(2))
}

/// First-power analogue K̃(z, τ; β) = ∫ ŵ^β q_0(z, w, t-τ) u_0(w, τ) dw / u_0(z, t).
pub fn k_tilde(z: f64, tau: f64, t: f64, beta: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    if !(tau >= 0.0 && tau < t) || !(z > 0.0) || !(beta > 0.0) {
        return Err(Error::domain(
            "k_tilde",
            format!("requires z > 0, 0 <= tau < t, beta > 0; got z={z}, tau={tau}, t={t}"),
        ));
    }
    let s = t - tau;
    let w_cap = kernel::default_w_cap(z, s);
    let num = kernel::integrate_against_kernel(
        kernel::KernelParams::driftless(),
        z,
        s,
        w_cap,
        |w| {
            let m = if tau == 0.0 { 1.0 } else { u0(w, tau) };
            w.min(1.0).powf(beta) * m
        },
        quad_spec,
        &[1.0],
    )?;
    Ok(num / u0(z, t))
}

/// Lower bound on the undamped (β = 0) level-1 boundary ratio,
/// (z²/4t²) E_1(2z/t) / u_0²(z, t); grows without bound as z -> 0.
/// The negative control demonstrating why β > 0 is needed.
pub fn boundary_divergence_lower_bound(z: f64, t: f64) -> Result<f64> {
    if !(z > 0.0 && t > 0.0) {
        return Err(Error::domain(
            "boundary_divergence_lower_bound",
            "requires z, t > 0",
        ));
    }
    let e1 = crate::specfun::exp_integral_e1(2.0 * z / t)?;
    Ok(z * z / (4.0 * t * t) * e1 / u0(z, t).powi(2))
}

/// Hölder moduli of the kernel difference with the degeneracy weight.
#[derive(Debug, Clone, Copy)]
pub struct HolderModulus {
    pub q_t: f64,
    pub q_tilde_t: f64,
    pub q_bound: f64,
    pub q_tilde_bound: f64,
}

/// Q_t(z1, z2) = ∫_0^t ∫ ŵ^{2β} w^{-1/2} d_0²(z1, z2, w, t-τ) dw dτ and the
/// first-power modulus Q̃_t = ∫_0^t |∫ ŵ^{β-1/4} d_0 dw|² dτ, with their
/// fitted/analytic bounds.  Valid for β > 1/4 and 0 <= λ < (4β-1) ∧ 1/2.
pub fn holder_modulus(
    z1: f64,
    z2: f64,
    t: f64,
    beta: f64,
    lambda: f64,
    quad_spec: &QuadratureSpec,
) -> Result<HolderModulus> {
    if !(beta > 0.25) {
        return Err(Error::domain("holder_modulus", "requires beta > 1/4"));
    }
    let lambda_cap = (4.0 * beta - 1.0).min(0.5);
    if !(lambda >= 0.0 && lambda < lambda_cap) {
        return Err(Error::domain(
            "holder_modulus",
            format!("lambda = {lambda} outside [0, {lambda_cap})"),
        ));
    }
    if z1 == z2 {
        return Ok(HolderModulus {
            q_t: 0.0,
            q_tilde_t: 0.0,
            q_bound: 0.0,
            q_tilde_bound: 0.0,
        });
    }
    let dz = (z1 - z2).abs();
    let v_hi = kernel::default_w_cap(z1.max(z2), t).sqrt();

    // w^{-1/2} dw = 2 dv under w = v², so the spatial weight is regular in v.
    let q_t = quad::adaptive_sqrt_endpoint(
        |tau| {
            let s = t - tau;
            let mut edges = kernel_pair_edges(z1, z2, s, v_hi);
            edges.push(1.0);
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.dedup();
            quad::panels(
                |v| {
                    if v <= 0.0 {
                        return 0.0;
                    }
                    let w = v * v;
                    let d = kernel::d0(z1, z2, w, s).unwrap_or(0.0);
                    2.0 * w.min(1.0).powf(2.0 * beta) * d * d
                },
                &edges,
                &quad::GaussRule::legendre(7),
            )
        },
        0.0,
        t,
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &[],
    )?;

    let q_tilde_t = quad::adaptive(
        |tau| {
            let s = t - tau;
            if s <= 0.0 {
                return 0.0;
            }
            let edges = kernel_pair_edges(z1, z2, s, v_hi);
            let inner = quad::panels(
                |v| {
                    if v <= 0.0 {
                        return 0.0;
                    }
                    let w = v * v;
                    let d = kernel::d0(z1, z2, w, s).unwrap_or(0.0);
                    2.0 * v * w.min(1.0).powf(beta - 0.25) * d
                },
                &edges,
                &quad::GaussRule::legendre(7),
            );
            inner * inner
        },
        0.0,
        t,
        quad_spec.abs_tol,
        quad_spec.rel_tol,
        &[],
    )?;

    let eta = (2.0 * beta - 0.5).min(0.25) - 0.5 * lambda;
    let q_bound = bounds::holder_q_constant(beta, lambda) * t.powf(eta) * dz.powf(0.5 * lambda);
    let q_tilde_bound = bounds::HOLDER_QTILDE_M * t.powf(0.75) * dz.powf(0.25);
    Ok(HolderModulus {
        q_t,
        q_tilde_t,
        q_bound,
        q_tilde_bound,
    })
}

fn kernel_pair_edges(z1: f64, z2: f64, s: f64, v_hi: f64) -> Vec<f64> {
    let sigma = 0.5 * s.sqrt();
    let mut edges = vec![0.0, v_hi];
    for c in [z1.sqrt(), z2.sqrt()] {
        for k in [-8.0, -6.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0] {
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
