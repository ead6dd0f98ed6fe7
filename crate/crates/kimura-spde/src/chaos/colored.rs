//! Colored-noise chaos recursion over 4-point inner products.
//!
//! For separable covariance f(x-y) γ(r-s) the chaos levels couple off the
//! diagonal, so the recursion tracks
//!
//!   G_n(z1,t1,z2,t2) = ∫∫ γ(r-s) ∫∫ f(x-y) x̂^β ŷ^β
//!       q_0(z1,x,t1-r) q_0(z2,y,t2-s) G_{n-1}(x,r,y,s) dx dy dr ds
//!
//! on a coarse target grid (≤ 8 nodes per axis), with the integral evaluated
//! by tensor-product midpoint quadrature on cell-averaged f and γ — the cell
//! averages are exact second differences, which is what keeps the riesz
//! kernel's integrable singularity finite on the diagonal cells.  The level
//! below is resampled once per level onto the quadrature cells, so the hot
//! loop is pure indexed arithmetic.

use super::{u0, ChaosConfig, ChaosTable};
use crate::error::{Error, Result};
use crate::kernel;
use crate::noise::NoiseModel;
use crate::table::Grid2;
use rayon::prelude::*;

/// 4-point inner products per level on the coarse grid, stored flattened as
/// [i1][j1][i2][j2] with the symmetry G(p, q) = G(q, p).
#[derive(Debug, Clone)]
pub struct FourPointTable {
    pub z_nodes: Vec<f64>,
    pub t_nodes: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
}

impl FourPointTable {
    fn idx(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> usize {
        let nz = self.z_nodes.len();
        let nt = self.t_nodes.len();
        ((i1 * nt + j1) * nz + i2) * nt + j2
    }

    pub fn level(&self, n: usize, i1: usize, j1: usize, i2: usize, j2: usize) -> f64 {
        self.levels[n][self.idx(i1, j1, i2, j2)]
    }
}

/// Multilinear interpolation over the 4-point table of one level, with zero
/// boundary rows at z = 0 and t = 0 (levels >= 1 vanish there).
struct Level4Interp<'a> {
    z_axis: Vec<f64>, // with leading 0
    t_axis: Vec<f64>, // with leading 0
    data: &'a [f64],
    nz: usize,
    nt: usize,
}

impl<'a> Level4Interp<'a> {
    fn new(table: &'a FourPointTable, n: usize) -> Self {
        let mut z_axis = vec![0.0];
        z_axis.extend_from_slice(&table.z_nodes);
        let mut t_axis = vec![0.0];
        t_axis.extend_from_slice(&table.t_nodes);
        Level4Interp {
            z_axis,
            t_axis,
            data: &table.levels[n],
            nz: table.z_nodes.len(),
            nt: table.t_nodes.len(),
        }
    }

    fn cell(axis: &[f64], x: f64) -> (usize, f64) {
        let n = axis.len();
        if x <= axis[0] {
            return (0, 0.0);
        }
        if x >= axis[n - 1] {
            return (n - 2, 1.0);
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if axis[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ((lo), (x - axis[lo]) / (axis[lo + 1] - axis[lo]))
    }

    /// Raw table value with the zero boundary: index 0 on any axis is 0.
    fn raw(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> f64 {
        if i1 == 0 || j1 == 0 || i2 == 0 || j2 == 0 {
            return 0.0;
        }
        let (i1, j1, i2, j2) = (i1 - 1, j1 - 1, i2 - 1, j2 - 1);
        self.data[((i1 * self.nt + j1) * self.nz + i2) * self.nt + j2]
    }

    fn eval(&self, x: f64, r: f64, y: f64, s: f64) -> f64 {
        let (i1, fx) = Self::cell(&self.z_axis, x);
        let (j1, fr) = Self::cell(&self.t_axis, r);
        let (i2, fy) = Self::cell(&self.z_axis, y);
        let (j2, fs) = Self::cell(&self.t_axis, s);
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            if wx == 0.0 {
                continue;
            }
            for (dj, wr) in [(0, 1.0 - fr), (1, fr)] {
                if wr == 0.0 {
                    continue;
                }
                for (dk, wy) in [(0, 1.0 - fy), (1, fy)] {
                    if wy == 0.0 {
                        continue;
                    }
                    for (dl, ws) in [(0, 1.0 - fs), (1, fs)] {
                        if ws == 0.0 {
                            continue;
                        }
                        acc += wx
                            * wr
                            * wy
                            * ws
                            * self.raw(i1 + di, j1 + dj, i2 + dk, j2 + dl);
                    }
                }
            }
        }
        acc
    }
}

/// Builds the colored chaos table: diagonal second moments M_n plus the full
/// 4-point inner products on the coarse grid.
pub fn chaos_colored(config: &ChaosConfig, model: &NoiseModel) -> Result<ChaosTable> {
    config.validate(true)?;
    model.validate()?;
    if model.is_white() {
        return Err(Error::domain(
            "chaos_colored",
            "white noise goes through chaos_white",
        ));
    }
    if (model.beta - config.beta).abs() > 1e-12 {
        return Err(Error::domain(
            "chaos_colored",
            "config.beta must match the noise model's beta",
        ));
    }
    let grid = &config.grid;
    let nz = grid.n_z();
    let nt = grid.n_t();
    let t_top = *grid.t_nodes.last().unwrap();
    let z_top = *grid.z_nodes.last().unwrap();

    // Quadrature cells: the temporal cell width divides every target t so
    // r-cells align with [0, t_j]; the spatial extent covers the kernel
    // windows of the outermost target.
    let n_qt_per_node = 3usize;
    let n_qt = nt * n_qt_per_node;
    let dt_q = t_top / n_qt as f64;
    let x_max = kernel::default_w_cap(z_top, t_top).min(config.quad.z_max);
    let n_qx = 28usize;
    let dx_q = x_max / n_qx as f64;
    let x_centers: Vec<f64> = (0..n_qx).map(|i| (i as f64 + 0.5) * dx_q).collect();
    let r_centers: Vec<f64> = (0..n_qt).map(|j| (j as f64 + 0.5) * dt_q).collect();

    // Cell-averaged covariances (already integrated over both cells).
    let mut f_bar = Grid2::zeros(n_qx, n_qx);
    for a in 0..n_qx {
        for b in 0..n_qx {
            let lag = (a as f64 - b as f64) * dx_q;
            f_bar.set(a, b, model.spatial.cell_covariance(lag, dx_q)?);
        }
    }
    let mut g_bar = Grid2::zeros(n_qt, n_qt);
    for a in 0..n_qt {
        for b in 0..n_qt {
            let lag = (a as f64 - b as f64) * dt_q;
            g_bar.set(a, b, model.temporal.cell_covariance(lag, dt_q)?);
        }
    }

    // Degeneracy weight at cell centers.
    let beta = config.beta;
    let x_weight: Vec<f64> = x_centers
        .iter()
        .map(|&x| if beta == 0.0 { 1.0 } else { x.min(1.0).powf(beta) })
        .collect();

    // Kernel factors K[target (i,j)][r-cell][x-cell] = q_0(z_i, x_c, t_j - r_c),
    // zero where r_c >= t_j.
    let kernel_factor: Vec<Vec<f64>> = (0..nz * nt)
        .into_par_iter()
        .map(|flat| {
            let i = flat / nt;
            let j = flat % nt;
            let z = grid.z_nodes[i];
            let t = grid.t_nodes[j];
            let mut k = vec![0.0; n_qt * n_qx];
            for (jr, &r) in r_centers.iter().enumerate() {
                if r >= t {
                    break;
                }
                for (ix, &x) in x_centers.iter().enumerate() {
                    k[jr * n_qx + ix] = kernel::q0(z, x, t - r).unwrap_or(0.0);
                }
            }
            k
        })
        .collect();

    let mut table = FourPointTable {
        z_nodes: grid.z_nodes.clone(),
        t_nodes: grid.t_nodes.clone(),
        levels: Vec::new(),
    };
    // Level 0 on the coarse grid: G_0 = u_0 ⊗ u_0.
    let mut g0 = vec![0.0; nz * nt * nz * nt];
    for i1 in 0..nz {
        for j1 in 0..nt {
            for i2 in 0..nz {
                for j2 in 0..nt {
                    let v = u0(grid.z_nodes[i1], grid.t_nodes[j1])
                        * u0(grid.z_nodes[i2], grid.t_nodes[j2]);
                    g0[((i1 * nt + j1) * nz + i2) * nt + j2] = v;
                }
            }
        }
    }
    table.levels.push(g0);

    for level in 1..=config.n_levels {
        // Resample the previous level onto the quadrature cells.
        let prev_resampled: Vec<f64> = if level == 1 {
            // G_0 in closed form; no interpolation error at the base.
            let mut res = vec![0.0; n_qx * n_qt * n_qx * n_qt];
            for (ix, &x) in x_centers.iter().enumerate() {
                for (jr, &r) in r_centers.iter().enumerate() {
                    let left = u0(x, r);
                    for (iy, &y) in x_centers.iter().enumerate() {
                        for (js, &s) in r_centers.iter().enumerate() {
                            res[((ix * n_qt + jr) * n_qx + iy) * n_qt + js] = left * u0(y, s);
                        }
                    }
                }
            }
            res
        } else {
            let interp = Level4Interp::new(&table, level - 1);
            (0..n_qx * n_qt * n_qx * n_qt)
                .into_par_iter()
                .map(|flat| {
                    let js = flat % n_qt;
                    let rest = flat / n_qt;
                    let iy = rest % n_qx;
                    let rest = rest / n_qx;
                    let jr = rest % n_qt;
                    let ix = rest / n_qt;
                    interp.eval(
                        x_centers[ix],
                        r_centers[jr],
                        x_centers[iy],
                        r_centers[js],
                    )
                })
                .collect()
        };

        // Targets over the symmetric half.
        let targets: Vec<(usize, usize, usize, usize)> = (0..nz * nt)
            .flat_map(|p| {
                (p..nz * nt).map(move |q| (p / nt, p % nt, q / nt, q % nt))
            })
            .collect();
        let values: Vec<f64> = targets
            .par_iter()
            .map(|&(i1, j1, i2, j2)| {
                let t1 = grid.t_nodes[j1];
                let t2 = grid.t_nodes[j2];
                let k1 = &kernel_factor[i1 * nt + j1];
                let k2 = &kernel_factor[i2 * nt + j2];
                let mut acc = 0.0;
                for (jr, &r) in r_centers.iter().enumerate() {
                    if r >= t1 {
                        break;
                    }
                    for (js, &s) in r_centers.iter().enumerate() {
                        if s >= t2 {
                            break;
                        }
                        let gw = g_bar.at(jr, js);
                        if gw == 0.0 {
                            continue;
                        }
                        let mut inner = 0.0;
                        for ix in 0..n_qx {
                            let kx = k1[jr * n_qx + ix] * x_weight[ix];
                            if kx == 0.0 {
                                continue;
                            }
                            let base = ((ix * n_qt + jr) * n_qx) * n_qt + js;
                            for iy in 0..n_qx {
                                inner += f_bar.at(ix, iy)
                                    * kx
                                    * k2[js * n_qx + iy]
                                    * x_weight[iy]
                                    * prev_resampled[base + iy * n_qt];
                            }
                        }
                        acc += gw * inner;
                    }
                }
                acc
            })
            .collect();
        let mut g_level = vec![0.0; nz * nt * nz * nt];
        for (&(i1, j1, i2, j2), &v) in targets.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "chaos_colored",
                    location: format!("level {level} target ({i1},{j1},{i2},{j2})"),
                });
            }
            g_level[((i1 * nt + j1) * nz + i2) * nt + j2] = v;
            g_level[((i2 * nt + j2) * nz + i1) * nt + j1] = v;
        }
        table.levels.push(g_level);
    }

    // Diagonal M_n(z_i, t_j) = G_n(z_i, t_j, z_i, t_j).
    let levels: Vec<Grid2> = (0..=config.n_levels)
        .map(|n| {
            let mut m = Grid2::zeros(nz, nt);
            for i in 0..nz {
                for j in 0..nt {
                    m.set(i, j, table.level(n, i, j, i, j));
                }
            }
            m
        })
        .collect();

    Ok(ChaosTable {
        grid: grid.clone(),
        beta,
        eps: config.eps,
        kind: super::colored_kind(model, config.eps)?,
        levels,
        four_point: Some(table),
        quad_tol: 0.05, // coarse tensor quadrature; bound checks carry the slack
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{CovKernel, FieldGrid};
    use crate::quad::QuadratureSpec;

    fn riesz_model(beta: f64) -> NoiseModel {
        NoiseModel::colored(
            CovKernel::Riesz { h: 0.5 },
            CovKernel::Riesz { h: 0.5 },
            beta,
        )
        .unwrap()
    }

    fn coarse_config(beta: f64) -> ChaosConfig {
        ChaosConfig {
            n_levels: 2,
            grid: FieldGrid::regular(2.0, 4, 0.2, 4).unwrap(),
            quad: QuadratureSpec::default(),
            beta,
            eps: 0.25,
        }
    }

    #[test]
    fn level_zero_is_product_of_deterministic_solutions() {
        let table = chaos_colored(&coarse_config(0.0), &riesz_model(0.0)).unwrap();
        let fp = table.four_point.as_ref().unwrap();
        let z = &table.grid.z_nodes;
        let t = &table.grid.t_nodes;
        let got = fp.level(0, 1, 2, 3, 0);
        let want = u0(z[1], t[2]) * u0(z[3], t[0]);
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn level_one_under_colored_bound() {
        // M_1 <= Γ_t (F_ε/2 + f(ε) t) for any ε > 0
        let model = riesz_model(0.0);
        let table = chaos_colored(&coarse_config(0.0), &model).unwrap();
        for &eps in &[0.1, 0.25, 1.0] {
            let f_eps = crate::noise::f_eps(&model.spatial, eps).unwrap();
            let f_at = model.spatial.eval(eps).unwrap();
            for (j, &t) in table.grid.t_nodes.iter().enumerate() {
                let gamma = crate::noise::gamma_t(&model.temporal, t).unwrap();
                let cap = gamma * (0.5 * f_eps + f_at * t);
                for i in 0..table.grid.n_z() {
                    let m1 = table.level(1, i, j);
                    assert!(
                        m1 <= cap * 1.05,
                        "eps = {eps}: M1({i},{j}) = {m1} vs {cap}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_oversized_grid() {
        let mut config = coarse_config(0.0);
        config.grid = FieldGrid::regular(2.0, 12, 0.2, 4).unwrap();
        assert!(chaos_colored(&config, &riesz_model(0.0)).is_err());
    }
}
