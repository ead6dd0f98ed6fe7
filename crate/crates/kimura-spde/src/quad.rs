//! Panel-based quadrature: Gauss–Legendre rules, adaptive bisection with
//! user-supplied breakpoints, and graded meshes for integrable endpoint
//! singularities such as (t - s)^{-1/2}.

use crate::error::{Error, Result};

/// Controls for the quadrature used by the kernel and chaos layers.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Absolute cap on the spatial integration domain.
    pub z_max: f64,
    /// Gauss–Legendre points per panel.
    pub base_points: usize,
    /// Graded-mesh exponent toward a singular temporal endpoint.
    pub singularity_grading: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            z_max: 1e6,
            base_points: 7,
            singularity_grading: 2.0,
            abs_tol: 1e-12,
            rel_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_max > 0.0) {
            return Err(Error::domain("QuadratureSpec", "z_max must be positive"));
        }
        for (name, tol) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::domain(
                    "QuadratureSpec",
                    format!("{name} = {tol} outside (0, 1e-2]"),
                ));
            }
        }
        if !(1.0..=4.0).contains(&self.singularity_grading) {
            return Err(Error::domain(
                "QuadratureSpec",
                format!("grading exponent {} outside [1, 4]", self.singularity_grading),
            ));
        }
        if !(2..=20).contains(&self.base_points) {
            return Err(Error::domain(
                "QuadratureSpec",
                format!("base_points {} outside 2..=20", self.base_points),
            ));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-based initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // Evaluate P_n(x) and its derivative.
                let mut p0 = 1.0;
                let mut p1 = 0.0;
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
                }
                pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
                let dx = p0 / pp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

thread_local! {
    static GL7: GaussRule = GaussRule::legendre(7);
    static GL15: GaussRule = GaussRule::legendre(15);
}

fn gl_pair<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> (f64, f64) {
    let coarse = GL7.with(|r| r.integrate(a, b, &mut *f));
    let fine = GL15.with(|r| r.integrate(a, b, &mut *f));
    (fine, (fine - coarse).abs())
}

/// Adaptive integration of `f` over [a, b].
///
/// Panels are seeded from `breakpoints` (interior points only; values outside
/// (a, b) are ignored) and bisected until the embedded GL7/GL15 error
/// estimate meets `abs_tol + rel_tol * |integral|`.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("adaptive", format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut edges: Vec<f64> = vec![a, b];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup_by(|p, q| (*p - *q).abs() < 1e-300);

    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }
    let mut panels = Vec::with_capacity(edges.len() * 4);
    for w in edges.windows(2) {
        let (v, e) = gl_pair(w[0], w[1], &mut f);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }

    const MAX_PANELS: usize = 8000;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let target = abs_tol + rel_tol * total.abs();
        if err <= target {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Accuracy {
                context: "adaptive quadrature",
                partial: total,
            });
        }
        // Split the worst panel.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.err.partial_cmp(&q.err).unwrap())
            .unwrap();
        let Panel { a: pa, b: pb, .. } = panels[idx];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval exhausted at f64 resolution; accept what we have.
            let total: f64 = panels.iter().map(|p| p.value).sum();
            return Ok(total);
        }
        let (v1, e1) = gl_pair(pa, mid, &mut f);
        let (v2, e2) = gl_pair(mid, pb, &mut f);
        panels[idx] = Panel {
            a: pa,
            b: mid,
            value: v1,
            err: e1,
        };
        panels.push(Panel {
            a: mid,
            b: pb,
            value: v2,
            err: e2,
        });
    }
}

/// Panel edges for a mesh on [a, b] graded toward the endpoint `singular_end`
/// with exponent `grading`: edge_i = singular_end -/+ L (i/n)^grading.
pub fn graded_edges(a: f64, b: f64, n_panels: usize, grading: f64, toward_b: bool) -> Vec<f64> {
    let len = b - a;
    let mut edges = Vec::with_capacity(n_panels + 1);
    for i in 0..=n_panels {
        let u = (i as f64 / n_panels as f64).powf(grading);
        edges.push(if toward_b { b - len * u } else { a + len * u });
    }
    if toward_b {
        edges.reverse();
    }
    edges
}

/// Integrate over [a, b] with a mesh graded toward one endpoint, GL rule per
/// panel.  Intended for integrands with an integrable algebraic singularity
/// at the graded end; no error estimate is produced.
pub fn graded_mesh<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n_panels: usize,
    grading: f64,
    toward_b: bool,
    rule: &GaussRule,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let edges = graded_edges(a, b, n_panels, grading, toward_b);
    let mut acc = 0.0;
    for w in edges.windows(2) {
        acc += rule.integrate(w[0], w[1], &mut f);
    }
    acc
}

/// Union of graded temporal edges toward `b` and the supplied interior
/// breakpoints, deduplicated and sorted. Used where a piecewise definition
/// (interpolated tables) meets an endpoint singularity.
pub fn graded_edges_with_breakpoints(
    a: f64,
    b: f64,
    n_panels: usize,
    grading: f64,
    breakpoints: &[f64],
) -> Vec<f64> {
    let mut edges = graded_edges(a, b, n_panels, grading, true);
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup_by(|p, q| (*p - *q) < 1e-14 * (b - a).abs());
    edges
}

/// Integrate with explicit panel edges and a fixed GL rule per panel.
pub fn panels<F: FnMut(f64) -> f64>(mut f: F, edges: &[f64], rule: &GaussRule) -> f64 {
    let mut acc = 0.0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            acc += rule.integrate(w[0], w[1], &mut f);
        }
    }
    acc
}

/// Integrate f over [a, b] where f carries an integrable (b - x)^{-1/2}
/// factor, by substituting x = b - sigma^2:
///
///   ∫_a^b f(x) dx = ∫_0^{√(b-a)} f(b - σ²) 2σ dσ.
///
/// The substituted integrand is bounded at σ = 0, so a plain adaptive pass
/// reaches tight tolerances where a graded mesh of admissible exponent
/// stalls at the first panel. `breakpoints` are given in the original x
/// variable.
pub fn adaptive_sqrt_endpoint<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let sig_max = (b - a).sqrt();
    let mapped: Vec<f64> = breakpoints
        .iter()
        .filter(|&&x| x > a && x < b)
        .map(|&x| (b - x).sqrt())
        .collect();
    adaptive(
        |sigma| 2.0 * sigma * f(b - sigma * sigma),
        0.0,
        sig_max,
        abs_tol,
        rel_tol,
        &mapped,
    )
}
