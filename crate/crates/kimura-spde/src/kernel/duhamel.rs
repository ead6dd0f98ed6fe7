//! Duhamel perturbation series for the kernel of the potential-perturbed
//! equation: q_nu^V = Σ_k q_{nu,k} with
//!
//!   q_{nu,k}(z, w, t) = ∫_0^t ∫_0^∞ q_nu(z, y, t-σ) V(y) q_{nu,k-1}(y, w, σ) dy dσ.
//!
//! The terms are computed through the ratio r_k(y, σ) = q_{nu,k}(y, w, σ) /
//! q_nu(y, w, σ), which is smooth and O((σ ||V||)^k / k!) — for constant V it
//! is exactly (cσ)^k/k!, independent of y.  Tabulating r instead of the
//! sharply peaked kernels keeps the interpolation error negligible; the
//! peaked factors q_nu(z, ·, t-σ) q_nu(·, w, σ) are evaluated exactly at
//! every quadrature node.

use super::{peak_edges, q_nu, KernelParams};
use crate::error::{Error, Result};
use crate::quad::{self, GaussRule, QuadratureSpec};
use crate::table::{BilinearTable, Grid2};

/// Bounded potential tabulated at finitely many nodes, interpolated
/// piecewise-linearly and clamped to the end values outside the node range.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    nodes: Vec<f64>,
    values: Vec<f64>,
    sup_norm: f64,
}

impl PotentialSpec {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::domain(
                "PotentialSpec",
                "nodes and values must be non-empty and of equal length",
            ));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) || nodes[0] <= 0.0 {
            return Err(Error::domain(
                "PotentialSpec",
                "nodes must be strictly increasing and positive",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("PotentialSpec", "non-finite sample"));
        }
        let sup_norm = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        Ok(PotentialSpec {
            nodes,
            values,
            sup_norm,
        })
    }

    pub fn constant(c: f64) -> Self {
        PotentialSpec {
            nodes: vec![1.0],
            values: vec![c],
            sup_norm: c.abs(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n == 1 || x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let idx = self.nodes.partition_point(|&z| z <= x) - 1;
        let frac = (x - self.nodes[idx]) / (self.nodes[idx + 1] - self.nodes[idx]);
        self.values[idx] * (1.0 - frac) + self.values[idx + 1] * frac
    }
}

/// Partial Duhamel sum and its per-order terms; `per_term[k]` is
/// q_{nu,k}(z, w, t), with k = 0 the unperturbed kernel.
#[derive(Debug, Clone)]
pub struct DuhamelSeries {
    pub value: f64,
    pub per_term: Vec<f64>,
}

const MAX_TERMS: usize = 5;

/// Ratio level r_k tabulated as g_k = r_k / tau^k.  r_k vanishes like tau^k
/// at tau = 0; dividing the power out leaves a slowly varying surface (for
/// constant potentials g_k is exactly constant), so bilinear interpolation
/// introduces no systematic bias into the next convolution.
struct RatioTable {
    order: i32,
    table: BilinearTable,
}

impl RatioTable {
    fn eval(&self, v: f64, tau: f64) -> f64 {
        self.table.eval(v, tau) * tau.powi(self.order)
    }
}

struct RatioGrid<'a> {
    params: KernelParams,
    potential: &'a PotentialSpec,
    w: f64,
    /// sqrt-space spatial axis shared by all ratio levels
    v_nodes: Vec<f64>,
    tau_nodes: Vec<f64>,
    rule: GaussRule,
}

impl<'a> RatioGrid<'a> {
    /// One convolution step: given r_{k-1} (None means the constant 1),
    /// produce the table of g_k = r_k / tau^k over the (v, tau) grid.
    fn step(&self, prev: Option<&RatioTable>, order: i32) -> Result<RatioTable> {
        let mut values = Grid2::zeros(self.v_nodes.len(), self.tau_nodes.len());
        for (i, &v) in self.v_nodes.iter().enumerate() {
            let x = v * v;
            for (j, &tau) in self.tau_nodes.iter().enumerate() {
                if x <= 0.0 || tau <= 0.0 {
                    continue;
                }
                let q = q_nu(self.params, x, self.w, tau)?;
                // Far from the bridge between z and w the kernel underflows;
                // anything multiplied by it later is zero regardless of the
                // ratio, so the table stores 0 there.
                let g = if q > 1e-280 {
                    self.term_at(prev, x, tau)? / q / tau.powi(order)
                } else {
                    0.0
                };
                values.set(i, j, g);
            }
        }
        // tau = 0 row: continue the first interior row so that the
        // reconstructed r = g tau^k stays accurate down to zero.
        for i in 0..self.v_nodes.len() {
            let first = values.at(i, 1);
            values.set(i, 0, first);
        }
        Ok(RatioTable {
            order,
            table: BilinearTable::new(self.v_nodes.clone(), self.tau_nodes.clone(), values),
        })
    }

    /// q_{nu,k}(x, w, tau) given r_{k-1}; fixed-panel quadrature in both
    /// variables (the sigma integrand is smooth at both endpoints because
    /// each concentrating kernel has unit limiting mass).
    fn term_at(&self, prev: Option<&RatioTable>, x: f64, tau: f64) -> Result<f64> {
        let n_sigma = 8;
        let mut total = 0.0;
        for p in 0..n_sigma {
            let a = tau * p as f64 / n_sigma as f64;
            let b = tau * (p + 1) as f64 / n_sigma as f64;
            total += self.rule.integrate(a, b, |sigma| {
                self.spatial_integral(prev, x, tau, sigma).unwrap_or(0.0)
            });
        }
        Ok(total)
    }

    fn spatial_integral(
        &self,
        prev: Option<&RatioTable>,
        x: f64,
        tau: f64,
        sigma: f64,
    ) -> Result<f64> {
        if sigma <= 0.0 || sigma >= tau {
            // Both limits are finite but the peaked factors degenerate;
            // the GL nodes never actually land on the endpoints.
            return Ok(0.0);
        }
        let s1 = tau - sigma;
        let v_hi = *self.v_nodes.last().unwrap();
        let mut edges = peak_edges(
            &[
                (x.sqrt(), (0.5 * s1).sqrt()),
                (self.w.sqrt(), (0.5 * sigma).sqrt()),
            ],
            v_hi,
        );
        edges.extend(
            self.potential
                .nodes()
                .iter()
                .map(|&z| z.sqrt())
                .filter(|&v| v > 0.0 && v < v_hi),
        );
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let value = quad::panels(
            |v| {
                if v <= 0.0 {
                    return 0.0;
                }
                let y = v * v;
                let outer = q_nu(self.params, x, y, s1).unwrap_or(0.0);
                let inner = q_nu(self.params, y, self.w, sigma).unwrap_or(0.0);
                let ratio = prev.map_or(1.0, |table| table.eval(v, sigma));
                2.0 * v * outer * self.potential.eval(y) * ratio * inner
            },
            &edges,
            &self.rule,
        );
        Ok(value)
    }
}

/// Duhamel series Σ_{k<=n_terms} q_{nu,k}(z, w, t) for a tabulated bounded
/// potential. Each term beyond the first costs one tabulated convolution
/// level; n_terms is capped at 5.
pub fn duhamel_qv(
    params: KernelParams,
    potential: &PotentialSpec,
    z: f64,
    w: f64,
    t: f64,
    n_terms: usize,
    quad_spec: &QuadratureSpec,
) -> Result<DuhamelSeries> {
    super::check_positive("duhamel_qv", &[("z", z), ("w", w), ("t", t)])?;
    quad_spec.validate()?;
    if n_terms == 0 || n_terms > MAX_TERMS {
        return Err(Error::domain(
            "duhamel_qv",
            format!("n_terms = {n_terms} outside 1..={MAX_TERMS}"),
        ));
    }
    let q_base = q_nu(params, z, w, t)?;
    let mut per_term = vec![q_base];

    if potential.sup_norm() == 0.0 {
        per_term.extend(std::iter::repeat(0.0).take(n_terms));
        return Ok(DuhamelSeries {
            value: q_base,
            per_term,
        });
    }

    let y_max = super::default_w_cap(z.max(w), t).min(quad_spec.z_max);
    let n_v = 32;
    let v_nodes: Vec<f64> = (0..=n_v)
        .map(|i| y_max.sqrt() * i as f64 / n_v as f64)
        .collect();
    let n_tau = 14;
    let tau_nodes: Vec<f64> = (0..=n_tau).map(|j| t * j as f64 / n_tau as f64).collect();
    let grid = RatioGrid {
        params,
        potential,
        w,
        v_nodes,
        tau_nodes,
        rule: GaussRule::legendre(quad_spec.base_points.clamp(4, 10)),
    };

    // r tables for orders 1 .. n_terms-1; order k's term at the query point
    // integrates against r_{k-1}.
    let mut tables: Vec<RatioTable> = Vec::new();
    for k in 1..=n_terms {
        let prev = if k == 1 { None } else { Some(&tables[k - 2]) };
        let term = grid.term_at(prev, z, t)?;
        if !term.is_finite() {
            return Err(Error::Accuracy {
                context: "duhamel_qv term",
                partial: term,
            });
        }
        per_term.push(term);
        if k < n_terms {
            tables.push(grid.step(prev, k as i32)?);
        }
    }
    Ok(DuhamelSeries {
        value: per_term.iter().sum(),
        per_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_spec() -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn zero_potential_reduces_to_kernel() {
        let v = PotentialSpec::constant(0.0);
        let s = duhamel_qv(
            KernelParams::driftless(),
            &v,
            1.0,
            2.0,
            0.3,
            3,
            &quad_spec(),
        )
        .unwrap();
        let q = q_nu(KernelParams::driftless(), 1.0, 2.0, 0.3).unwrap();
        assert_eq!(s.per_term[0], q);
        assert!(s.per_term[1..].iter().all(|&x| x == 0.0));
        assert_eq!(s.value, q);
    }

    #[test]
    fn constant_potential_terms_match_exponential() {
        // For V = c the exact solution is e^{ct} q_nu, term by term
        // q_{nu,k} = (ct)^k/k! q_nu.
        let c = 1.0;
        let v = PotentialSpec::constant(c);
        let (z, w, t) = (1.0, 1.5, 0.2);
        let s = duhamel_qv(KernelParams::driftless(), &v, z, w, t, 3, &quad_spec()).unwrap();
        let q = q_nu(KernelParams::driftless(), z, w, t).unwrap();
        for k in 0..=3usize {
            let want = (c * t).powi(k as i32) / (1..=k).product::<usize>() as f64 * q;
            let got = s.per_term[k];
            assert!(
                ((got - want) / want).abs() < 1e-4,
                "k = {k}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn per_term_bound_holds() {
        // |q_{nu,k}| <= t^k ||V||^k / k! q_nu, with quadrature slack
        let v = PotentialSpec::new(
            vec![0.25, 0.5, 1.0, 2.0, 4.0],
            vec![0.3, -0.8, 1.0, 0.2, -0.5],
        )
        .unwrap();
        let (z, w, t) = (0.8, 1.2, 0.25);
        let s = duhamel_qv(KernelParams::driftless(), &v, z, w, t, 3, &quad_spec()).unwrap();
        let q = q_nu(KernelParams::driftless(), z, w, t).unwrap();
        for k in 1..=3usize {
            let cap = t.powi(k as i32) * v.sup_norm().powi(k as i32)
                / (1..=k).product::<usize>() as f64
                * q;
            assert!(
                s.per_term[k].abs() <= cap * 1.001,
                "k = {k}: {} vs cap {cap}",
                s.per_term[k]
            );
        }
    }

    #[test]
    fn potential_eval_clamps() {
        let v = PotentialSpec::new(vec![1.0, 2.0], vec![3.0, 5.0]).unwrap();
        assert_eq!(v.eval(0.5), 3.0);
        assert_eq!(v.eval(2.5), 5.0);
        assert!((v.eval(1.5) - 4.0).abs() < 1e-15);
        assert_eq!(v.sup_norm(), 5.0);
    }
}
