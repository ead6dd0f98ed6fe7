//! Path-level Monte Carlo simulation of the mild solution and the moment,
//! ratio, and Hölder estimators used to cross-validate the chaos tables.
//!
//! The scheme is a mild Euler step: with P the cell-integrated kernel matrix
//! over one time step,
//!
//!   u(·, t+dt) = P [ u(·, t) (1 + ẑ^β ξ_t) ],      ξ = ΔW / dz,
//!
//! i.e. the noise increment multiplies the adapted value at the left
//! endpoint (Itô-type).  A midpoint rule would converge to a different
//! equation; the adapted choice is the finite-dimensional analogue of the
//! stochastic integral defining the mild solution.
//!
//! The kernel matrix rows are deliberately not renormalized: the missing
//! mass e^{-z/dt} is physical absorption at the boundary, not discretization
//! error.  The simulation runs on a spatial grid extended a few Gaussian
//! widths past the requested domain so that truncation cannot leak back into
//! the reported nodes; outputs are restricted to the requested grid.

use crate::chaos::{u0, ChaosTable};
use crate::error::{Error, Result};
use crate::kernel;
use crate::noise::{FieldGrid, NoiseModel};
use crate::table::Grid2;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Simulation controls.
#[derive(Debug, Clone)]
pub struct SimScheme {
    /// Output grid; simulation substeps refine its time spacing.
    pub grid: FieldGrid,
    pub n_paths: usize,
    /// Simulation steps per output time interval (>= 4, so that the step is
    /// at most a quarter of the first output time).
    pub substeps: usize,
    pub seed: u64,
    pub beta: f64,
    /// Internal v = sqrt(z) grid spacing override.  The default resolves
    /// every output node individually, which is wasteful when only a few
    /// nodes are read (Hölder pair estimation on dense grids).
    pub internal_dv: Option<f64>,
}

impl SimScheme {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_paths < 100 {
            return Err(Error::domain("SimScheme", "n_paths must be >= 100"));
        }
        if self.substeps < 4 {
            return Err(Error::domain(
                "SimScheme",
                "substeps must be >= 4 (time step at most min t_node / 4)",
            ));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::domain("SimScheme", "beta must be >= 0"));
        }
        Ok(())
    }
}

/// Precomputed stepping operator.
///
/// The internal state lives on a grid uniform in v = sqrt(z): the one-step
/// kernel has *constant* width sqrt(dt/2) in v, so a single spacing resolves
/// transport and the absorbing boundary layer at every z, where a z-uniform
/// grid either freezes the near-boundary diffusion or needs an order of
/// magnitude more nodes.  Output values at the requested z-nodes are read
/// off by linear interpolation in v.
struct Stepper {
    /// internal nodes v_i = i dv, i = 1..=n_v
    n_v: usize,
    dv: f64,
    /// Row-major P[i][j] = ∫ q_0(v_i², w, dt_sim) hat_j(√w) dw with hat
    /// functions in v (hat_0 pinned to the Dirichlet zero at v = 0).
    p: Grid2,
    /// ẑ^β at internal nodes.
    beta_weight: Vec<f64>,
    /// z-lengths of the internal noise cells.
    cell_len: Vec<f64>,
    /// Per-node standard deviation of the diagonal variance completion
    /// (white noise only): the P-pushed cell noise realizes the lag-dt end
    /// of the one-step stochastic convolution, whose exact second-moment
    /// production is ∫_0^dt ∫ q_0²(z,w,s) ŵ^{2β} dw ds = ẑ^{2β} U(z/dt);
    /// the s^{-1/2} sliver below lag dt lives at sub-cell scales and is
    /// completed as independent per-node noise.
    completion_std: Vec<f64>,
    /// output interpolation: node j of the output grid sits between internal
    /// nodes (idx, idx+1) with fraction frac.
    out_interp: Vec<(usize, f64)>,
    dt_sim: f64,
    substeps: usize,
    n_t_out: usize,
}

impl Stepper {
    fn build(scheme: &SimScheme) -> Result<Stepper> {
        scheme.validate()?;
        let grid = &scheme.grid;
        let z_top = *grid.z_nodes.last().unwrap();
        let t_top = *grid.t_nodes.last().unwrap();
        let dt_sim = grid.dt / scheme.substeps as f64;
        let sigma_v = (0.5 * dt_sim).sqrt();
        // Finest v-separation of adjacent output nodes is at the top of the
        // grid; track it so outputs interpolate across at most ~one cell.
        let g_min = grid.dz / (2.0 * z_top.sqrt());
        let dv = scheme
            .internal_dv
            .unwrap_or_else(|| g_min.min(0.75 * sigma_v))
            .max(1e-5);
        // Extend so that mass escaping past the domain and returning is
        // suppressed by e^{-2 c^2} with c = 3.
        let v_ext = z_top.sqrt() + 3.0 * t_top.sqrt();
        let n_v = ((v_ext / dv).ceil() as usize).min(6000);

        let rule = crate::quad::GaussRule::legendre(5);
        let reach = 9.0 * sigma_v + 2.0 * dv;
        let rows: Vec<Vec<f64>> = (1..=n_v)
            .into_par_iter()
            .map(|i| {
                let vi = i as f64 * dv;
                let z = vi * vi;
                let mut row = vec![0.0; n_v];
                for (j, slot) in row.iter_mut().enumerate() {
                    let vj = (j + 1) as f64 * dv;
                    if (vj - vi).abs() > reach {
                        continue;
                    }
                    // hat in v: rising on [vj - dv, vj], falling on [vj, vj + dv]
                    let mut acc = rule.integrate((vj - dv).max(0.0), vj, |v| {
                        2.0 * v
                            * kernel::q0(z, v * v, dt_sim).unwrap_or(0.0)
                            * (v - (vj - dv))
                            / dv
                    });
                    if j + 1 < n_v {
                        acc += rule.integrate(vj, vj + dv, |v| {
                            2.0 * v
                                * kernel::q0(z, v * v, dt_sim).unwrap_or(0.0)
                                * ((vj + dv) - v)
                                / dv
                        });
                    }
                    *slot = acc;
                }
                row
            })
            .collect();
        let mut p = Grid2::zeros(n_v, n_v);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                p.set(i, j, v);
            }
        }
        let beta_weight: Vec<f64> = (1..=n_v)
            .map(|j| {
                let z = (j as f64 * dv).powi(2);
                if scheme.beta == 0.0 {
                    1.0
                } else {
                    z.min(1.0).powf(scheme.beta)
                }
            })
            .collect();
        // noise cells in v: [v_j - dv/2, v_j + dv/2]; z-length 2 v_j dv
        let cell_len: Vec<f64> = (1..=n_v).map(|j| 2.0 * j as f64 * dv * dv).collect();
        let completion_std: Vec<f64> = (0..n_v)
            .map(|i| {
                let z = ((i + 1) as f64 * dv).powi(2);
                let exact = beta_weight[i] * beta_weight[i]
                    * kernel::energy_u(z / dt_sim).unwrap_or(0.5);
                let mut discrete = 0.0;
                for j in 0..n_v {
                    let pij = p.at(i, j);
                    discrete += pij * pij * beta_weight[j] * beta_weight[j] / cell_len[j];
                }
                (exact - dt_sim * discrete).max(0.0).sqrt()
            })
            .collect();
        let out_interp = grid
            .z_nodes
            .iter()
            .map(|&z| {
                let v = z.sqrt();
                let pos = (v / dv - 1.0).clamp(0.0, (n_v - 1) as f64 - 1e-9);
                let idx = pos.floor() as usize;
                (idx.min(n_v - 2), pos - pos.floor())
            })
            .collect();
        Ok(Stepper {
            n_v,
            dv,
            p,
            beta_weight,
            cell_len,
            completion_std,
            out_interp,
            dt_sim,
            substeps: scheme.substeps,
            n_t_out: grid.n_t(),
        })
    }

    /// Runs one path, writing u at output nodes into `out` (n_out x n_t_out).
    fn run_path<F: Fn(f64) -> f64>(&self, u0_fn: &F, noise: Option<&Grid2>, out: &mut [f64]) {
        let mut state: Vec<f64> = (1..=self.n_v)
            .map(|i| u0_fn((i as f64 * self.dv).powi(2)))
            .collect();
        let mut scratch = vec![0.0; self.n_v];
        let total_steps = self.substeps * self.n_t_out;
        let completed = noise.map_or(false, |f| f.n_rows == 2 * self.n_v);
        for step in 0..total_steps {
            // multiply by (1 + ẑ^β ξ) with ξ = ΔW / cell length
            match noise {
                Some(field) => {
                    for i in 0..self.n_v {
                        let xi = field.at(i, step) / self.cell_len[i];
                        scratch[i] = state[i] * (1.0 + self.beta_weight[i] * xi);
                    }
                }
                None => scratch.copy_from_slice(&state),
            }
            // semigroup push, plus the sub-cell variance completion driven
            // by the adapted (pre-push) state
            for i in 0..self.n_v {
                let row = &self.p.data[i * self.n_v..(i + 1) * self.n_v];
                let mut acc = 0.0;
                for (pk, sk) in row.iter().zip(&scratch) {
                    acc += pk * sk;
                }
                if completed {
                    acc += state[i]
                        * self.completion_std[i]
                        * noise.unwrap().at(self.n_v + i, step);
                }
                state[i] = acc;
            }
            if (step + 1) % self.substeps == 0 {
                let t_idx = (step + 1) / self.substeps - 1;
                for (i, &(idx, frac)) in self.out_interp.iter().enumerate() {
                    out[i * self.n_t_out + t_idx] =
                        state[idx] * (1.0 - frac) + state[idx + 1] * frac;
                }
            }
        }
    }
}

/// Noise sampler over the stepper's internal v-cells; white increments have
/// variance (cell length) * dt, colored ones realize the exact Kronecker
/// covariance of the rectangle-averaged kernels.
struct VCellSampler {
    n_v: usize,
    n_steps: usize,
    seed: u64,
    white_std: Option<Vec<f64>>,
    l_space: Option<Grid2>,
    l_time: Option<Grid2>,
}

impl VCellSampler {
    fn new(model: &NoiseModel, stepper: &Stepper, seed: u64) -> Result<Self> {
        model.validate()?;
        let n_v = stepper.n_v;
        let n_steps = stepper.substeps * stepper.n_t_out;
        if model.is_white() {
            let std = stepper
                .cell_len
                .iter()
                .map(|&len| (len * stepper.dt_sim).sqrt())
                .collect();
            return Ok(VCellSampler {
                n_v,
                n_steps,
                seed,
                white_std: Some(std),
                l_space: None,
                l_time: None,
            });
        }
        // Colored noise: no white-noise variance-completion identity applies;
        // the sampled field carries the full covariance itself.
        // z-interval of v-cell j
        let edges: Vec<(f64, f64)> = (1..=n_v)
            .map(|j| {
                let v = j as f64 * stepper.dv;
                let lo = (v - 0.5 * stepper.dv).max(0.0);
                let hi = v + 0.5 * stepper.dv;
                (lo * lo, hi * hi)
            })
            .collect();
        let mut c_space = Grid2::zeros(n_v, n_v);
        for i in 0..n_v {
            for j in 0..n_v {
                let (a1, b1) = edges[i];
                let (a2, b2) = edges[j];
                c_space.set(i, j, model.spatial.cell_covariance_rect(a1, b1, a2, b2)?);
            }
        }
        let mut c_time = Grid2::zeros(n_steps, n_steps);
        for i in 0..n_steps {
            for j in 0..n_steps {
                let lag = (i as f64 - j as f64) * stepper.dt_sim;
                c_time.set(i, j, model.temporal.cell_covariance(lag, stepper.dt_sim)?);
            }
        }
        Ok(VCellSampler {
            n_v,
            n_steps,
            seed,
            white_std: None,
            l_space: Some(crate::noise::cholesky_with_jitter(&c_space)?),
            l_time: Some(crate::noise::cholesky_with_jitter(&c_time)?),
        })
    }

    fn sample_path(&self, path: u64) -> Grid2 {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(path.wrapping_add(1));
        match (&self.white_std, &self.l_space, &self.l_time) {
            (Some(std), _, _) => {
                // rows 0..n_v: scaled cell increments; rows n_v..2n_v: unit
                // normals for the variance completion
                let mut g = Grid2::zeros(2 * self.n_v, self.n_steps);
                for i in 0..2 * self.n_v {
                    for j in 0..self.n_steps {
                        let raw = crate::noise::standard_normal(&mut rng);
                        let scale = if i < self.n_v { std[i] } else { 1.0 };
                        g.set(i, j, raw * scale);
                    }
                }
                g
            }
            (None, Some(lf), Some(lt)) => {
                let mut g = Grid2::zeros(self.n_v, self.n_steps);
                for i in 0..self.n_v {
                    for j in 0..self.n_steps {
                        g.set(i, j, crate::noise::standard_normal(&mut rng));
                    }
                }
                let mut half = Grid2::zeros(self.n_v, self.n_steps);
                for i in 0..self.n_v {
                    for j in 0..self.n_steps {
                        let mut acc = 0.0;
                        for k in 0..=i {
                            acc += lf.at(i, k) * g.at(k, j);
                        }
                        half.set(i, j, acc);
                    }
                }
                let mut out = Grid2::zeros(self.n_v, self.n_steps);
                for i in 0..self.n_v {
                    for j in 0..self.n_steps {
                        let mut acc = 0.0;
                        for k in 0..=j {
                            acc += half.at(i, k) * lt.at(j, k);
                        }
                        out.set(i, j, acc);
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }
}

/// A materialized path ensemble u[path][z_i][t_j] on the output grid.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub grid: FieldGrid,
    pub n_paths: usize,
    pub beta: f64,
    pub seed: u64,
    /// path-major, then z, then t
    pub data: Vec<f64>,
}

impl Ensemble {
    #[inline]
    pub fn at(&self, path: usize, iz: usize, it: usize) -> f64 {
        let (nz, nt) = (self.grid.n_z(), self.grid.n_t());
        self.data[(path * nz + iz) * nt + it]
    }
}

const ENSEMBLE_MEMORY_CAP: usize = 512 << 20;

/// Simulates the full ensemble.  For runs whose materialized size would
/// exceed the memory cap, use the streaming estimators instead.
pub fn simulate<F: Fn(f64) -> f64 + Sync>(
    scheme: &SimScheme,
    model: &NoiseModel,
    u0_fn: F,
) -> Result<Ensemble> {
    let stepper = Stepper::build(scheme)?;
    let (nz, nt) = (scheme.grid.n_z(), scheme.grid.n_t());
    let bytes = scheme.n_paths * nz * nt * 8;
    if bytes > ENSEMBLE_MEMORY_CAP {
        return Err(Error::domain(
            "simulate",
            format!(
                "ensemble would need {} MiB; use the streaming estimators",
                bytes >> 20
            ),
        ));
    }
    let sampler = VCellSampler::new(model, &stepper, scheme.seed)?;
    let mut data = vec![0.0; scheme.n_paths * nz * nt];
    data.par_chunks_mut(nz * nt)
        .enumerate()
        .for_each(|(path, out)| {
            let field = sampler.sample_path(path as u64);
            stepper.run_path(&u0_fn, Some(&field), out);
        });
    for (idx, v) in data.iter().enumerate() {
        if !v.is_finite() {
            let path = idx / (nz * nt);
            let rest = idx % (nz * nt);
            return Err(Error::NonFinite {
                context: "simulate",
                location: format!("path {path}, node ({}, {})", rest / nt, rest % nt),
            });
        }
    }
    Ok(Ensemble {
        grid: scheme.grid.clone(),
        n_paths: scheme.n_paths,
        beta: scheme.beta,
        seed: scheme.seed,
        data,
    })
}

/// Deterministic propagation (ΔW ≡ 0) through the same discrete operator;
/// returns u(z_i, t_j) on the output grid.
pub fn simulate_zero_noise<F: Fn(f64) -> f64 + Sync>(
    scheme: &SimScheme,
    u0_fn: F,
) -> Result<Grid2> {
    let stepper = Stepper::build(scheme)?;
    let (nz, nt) = (scheme.grid.n_z(), scheme.grid.n_t());
    let mut out = vec![0.0; nz * nt];
    stepper.run_path(&u0_fn, None, &mut out);
    Ok(Grid2 {
        n_rows: nz,
        n_cols: nt,
        data: out,
    })
}

/// Streaming accumulator of power sums per grid node.
#[derive(Clone)]
struct MomentAccumulator {
    n: usize,
    /// per node: Σu, Σu², Σu⁴, Σu⁶, Σu⁸, Σu¹², Σ(u-u0)², Σ(u-u0)⁴
    sums: Vec<[f64; 8]>,
    u0_ref: Vec<f64>,
}

impl MomentAccumulator {
    fn new(grid: &FieldGrid) -> Self {
        let mut u0_ref = Vec::with_capacity(grid.n_z() * grid.n_t());
        for &z in &grid.z_nodes {
            for &t in &grid.t_nodes {
                u0_ref.push(u0(z, t));
            }
        }
        MomentAccumulator {
            n: 0,
            sums: vec![[0.0; 8]; u0_ref.len()],
            u0_ref,
        }
    }

    fn add_path(&mut self, values: &[f64]) {
        self.n += 1;
        for (node, (&u, acc)) in values.iter().zip(self.sums.iter_mut()).enumerate() {
            let u2 = u * u;
            let u4 = u2 * u2;
            acc[0] += u;
            acc[1] += u2;
            acc[2] += u4;
            acc[3] += u4 * u2;
            acc[4] += u4 * u4;
            acc[5] += u4 * u4 * u4;
            let d = u - self.u0_ref[node];
            acc[6] += d * d;
            acc[7] += d * d * d * d;
        }
    }

    fn merge(&mut self, other: &MomentAccumulator) {
        self.n += other.n;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for k in 0..8 {
                a[k] += b[k];
            }
        }
    }
}

/// Moment estimates with jackknife standard errors at one grid node.
#[derive(Debug, Clone)]
pub struct PointMoments {
    pub z: f64,
    pub t: f64,
    pub mean: f64,
    pub se_mean: f64,
    /// (p, estimate of E[u^p], jackknife SE)
    pub p_moments: Vec<(u32, f64, f64)>,
    /// E[(u/u0)²] and its SE
    pub ratio_sq: f64,
    pub ratio_sq_se: f64,
    /// E[(u/u0 - 1)²] and its SE
    pub ratio_dev_sq: f64,
    pub ratio_dev_sq_se: f64,
}

#[derive(Debug, Clone)]
pub struct MomentReport {
    pub grid: FieldGrid,
    pub n_paths: usize,
    /// row-major over (z, t)
    pub points: Vec<PointMoments>,
}

impl MomentReport {
    pub fn point(&self, iz: usize, it: usize) -> &PointMoments {
        &self.points[iz * self.grid.n_t() + it]
    }

    pub fn second_moment(&self, iz: usize, it: usize) -> (f64, f64) {
        let p = self.point(iz, it);
        let entry = p.p_moments.iter().find(|&&(q, _, _)| q == 2).unwrap();
        (entry.1, entry.2)
    }
}

/// Jackknife SE of a mean statistic from its power sums; identical to the
/// classical SE of the mean of x^p.
fn jackknife_se(n: usize, sum: f64, sum_sq: f64) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    (var / (nf - 1.0)).sqrt()
}

fn report_from_accumulator(grid: &FieldGrid, acc: &MomentAccumulator) -> MomentReport {
    let n = acc.n;
    let nf = n as f64;
    let mut points = Vec::with_capacity(acc.sums.len());
    for (node, sums) in acc.sums.iter().enumerate() {
        let iz = node / grid.n_t();
        let it = node % grid.n_t();
        let z = grid.z_nodes[iz];
        let t = grid.t_nodes[it];
        let u0v = acc.u0_ref[node];
        let p_moments = vec![
            (2, sums[1] / nf, jackknife_se(n, sums[1], sums[2])),
            (4, sums[2] / nf, jackknife_se(n, sums[2], sums[4])),
            (6, sums[3] / nf, jackknife_se(n, sums[3], sums[5])),
        ];
        points.push(PointMoments {
            z,
            t,
            mean: sums[0] / nf,
            se_mean: jackknife_se(n, sums[0], sums[1]),
            p_moments,
            ratio_sq: sums[1] / nf / (u0v * u0v),
            ratio_sq_se: jackknife_se(n, sums[1], sums[2]) / (u0v * u0v),
            ratio_dev_sq: sums[6] / nf / (u0v * u0v),
            ratio_dev_sq_se: jackknife_se(n, sums[6], sums[7]) / (u0v * u0v),
        });
    }
    MomentReport {
        grid: grid.clone(),
        n_paths: n,
        points,
    }
}

/// Unbiased sample moments with jackknife standard errors from a
/// materialized ensemble.
pub fn estimate_moments(ensemble: &Ensemble, _p_list: &[u32]) -> MomentReport {
    let mut acc = MomentAccumulator::new(&ensemble.grid);
    let node_count = ensemble.grid.n_z() * ensemble.grid.n_t();
    for path in 0..ensemble.n_paths {
        acc.add_path(&ensemble.data[path * node_count..(path + 1) * node_count]);
    }
    report_from_accumulator(&ensemble.grid, &acc)
}

/// Streaming moment estimation: paths are simulated in fixed-size blocks in
/// parallel and the block accumulators are merged in deterministic order, so
/// the result is independent of thread count.
pub fn moments_streaming<F: Fn(f64) -> f64 + Sync>(
    scheme: &SimScheme,
    model: &NoiseModel,
    u0_fn: F,
) -> Result<MomentReport> {
    let stepper = Stepper::build(scheme)?;
    let sampler = VCellSampler::new(model, &stepper, scheme.seed)?;
    let node_count = scheme.grid.n_z() * scheme.grid.n_t();
    const BLOCK: usize = 64;
    let n_blocks = scheme.n_paths.div_ceil(BLOCK);
    let blocks: Vec<MomentAccumulator> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = MomentAccumulator::new(&scheme.grid);
            let mut out = vec![0.0; node_count];
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(scheme.n_paths);
            for path in lo..hi {
                let field = sampler.sample_path(path as u64);
                stepper.run_path(&u0_fn, Some(&field), &mut out);
                acc.add_path(&out);
            }
            acc
        })
        .collect();
    let mut total = MomentAccumulator::new(&scheme.grid);
    for acc in &blocks {
        total.merge(acc);
    }
    Ok(report_from_accumulator(&scheme.grid, &total))
}

/// Log-log regression of E|u(z1,t) - u(z2,t)|² against |z1 - z2|.
#[derive(Debug, Clone)]
pub struct HolderFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
    /// (|dz|, E|Δu|², SE)
    pub points: Vec<(f64, f64, f64)>,
}

fn holder_fit_from_sums(
    pairs: &[(usize, usize)],
    grid: &FieldGrid,
    n: usize,
    sums: &[(f64, f64)],
) -> Result<HolderFit> {
    let mut pts = Vec::new();
    for (k, &(i1, i2)) in pairs.iter().enumerate() {
        let dz = (grid.z_nodes[i1] - grid.z_nodes[i2]).abs();
        let (s2, s4) = sums[k];
        let mean = s2 / n as f64;
        let se = jackknife_se(n, s2, s4);
        if dz > 0.0 && mean > 0.0 {
            pts.push((dz, mean, se));
        }
    }
    if pts.len() < 4 {
        return Err(Error::domain(
            "estimate_holder",
            format!("only {} usable pairs; need at least 4", pts.len()),
        ));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let nf = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let slope_se = if xs.len() > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(HolderFit {
        slope,
        intercept,
        slope_se,
        r_squared: if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            1.0
        },
        points: pts,
    })
}

/// Hölder-exponent fit from a materialized ensemble at a fixed output time.
pub fn estimate_holder(
    ensemble: &Ensemble,
    t_index: usize,
    pairs: &[(usize, usize)],
) -> Result<HolderFit> {
    let mut sums = vec![(0.0, 0.0); pairs.len()];
    for path in 0..ensemble.n_paths {
        for (k, &(i1, i2)) in pairs.iter().enumerate() {
            let d = ensemble.at(path, i1, t_index) - ensemble.at(path, i2, t_index);
            sums[k].0 += d * d;
            sums[k].1 += d * d * d * d;
        }
    }
    holder_fit_from_sums(pairs, &ensemble.grid, ensemble.n_paths, &sums)
}

/// Streaming Hölder estimation for grids too large to materialize.
pub fn holder_streaming<F: Fn(f64) -> f64 + Sync>(
    scheme: &SimScheme,
    model: &NoiseModel,
    u0_fn: F,
    t_index: usize,
    pairs: &[(usize, usize)],
) -> Result<HolderFit> {
    let stepper = Stepper::build(scheme)?;
    let sampler = VCellSampler::new(model, &stepper, scheme.seed)?;
    let node_count = scheme.grid.n_z() * scheme.grid.n_t();
    let nt = scheme.grid.n_t();
    const BLOCK: usize = 16;
    let n_blocks = scheme.n_paths.div_ceil(BLOCK);
    let blocks: Vec<Vec<(f64, f64)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut sums = vec![(0.0, 0.0); pairs.len()];
            let mut out = vec![0.0; node_count];
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(scheme.n_paths);
            for path in lo..hi {
                let field = sampler.sample_path(path as u64);
                stepper.run_path(&u0_fn, Some(&field), &mut out);
                for (k, &(i1, i2)) in pairs.iter().enumerate() {
                    let d = out[i1 * nt + t_index] - out[i2 * nt + t_index];
                    sums[k].0 += d * d;
                    sums[k].1 += d * d * d * d;
                }
            }
            sums
        })
        .collect();
    let mut sums = vec![(0.0, 0.0); pairs.len()];
    for block in &blocks {
        for (a, b) in sums.iter_mut().zip(block) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }
    holder_fit_from_sums(pairs, &scheme.grid, scheme.n_paths, &sums)
}

/// One reconciliation row of the MC-vs-chaos comparison.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub z: f64,
    pub t: f64,
    pub mc: f64,
    pub chaos: f64,
    pub se: f64,
    pub tail: f64,
    /// |mc - chaos| in SE units
    pub sigma_units: f64,
    pub within: bool,
}

#[derive(Debug, Clone)]
pub struct CompareSummary {
    pub rows: Vec<CompareRow>,
    pub fraction_within: f64,
}

/// Per-node |MC - chaos| <= gate_se * SE + tail comparison of second moments.
pub fn compare_chaos_mc(report: &MomentReport, table: &ChaosTable, gate_se: f64) -> CompareSummary {
    let mut rows = Vec::new();
    let mut within_count = 0usize;
    for (iz, &z) in report.grid.z_nodes.iter().enumerate() {
        for (it, &t) in report.grid.t_nodes.iter().enumerate() {
            let (mc, se) = report.second_moment(iz, it);
            let (chaos, tail) = table.second_moment(iz, it);
            let tail = tail.finite().unwrap_or(f64::INFINITY);
            let gap = (mc - chaos).abs();
            let within = gap <= gate_se * se + tail;
            if within {
                within_count += 1;
            }
            rows.push(CompareRow {
                z,
                t,
                mc,
                chaos,
                se,
                tail,
                sigma_units: gap / se.max(1e-300),
                within,
            });
        }
    }
    let fraction_within = within_count as f64 / rows.len().max(1) as f64;
    CompareSummary {
        rows,
        fraction_within,
    }
}

const ENSEMBLE_MAGIC: &[u8; 4] = b"KSPD";
const ENSEMBLE_VERSION: u16 = 1;

/// Binary ensemble dump: magic "KSPD", version u16 LE, dimension header
/// (n_paths, n_z, n_t as u64 LE), then the f64 LE array path-major.
pub fn write_ensemble<W: Write>(mut w: W, ensemble: &Ensemble) -> Result<()> {
    w.write_all(ENSEMBLE_MAGIC)?;
    w.write_all(&ENSEMBLE_VERSION.to_le_bytes())?;
    for dim in [
        ensemble.n_paths as u64,
        ensemble.grid.n_z() as u64,
        ensemble.grid.n_t() as u64,
    ] {
        w.write_all(&dim.to_le_bytes())?;
    }
    for v in &ensemble.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a dump written by [`write_ensemble`]; the grid geometry must be
/// supplied (the dump stores only dimensions).
pub fn read_ensemble<R: Read>(mut r: R, grid: FieldGrid, beta: f64, seed: u64) -> Result<Ensemble> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != ENSEMBLE_MAGIC {
        return Err(Error::domain("read_ensemble", "bad magic bytes"));
    }
    let mut v2 = [0u8; 2];
    r.read_exact(&mut v2)?;
    if u16::from_le_bytes(v2) != ENSEMBLE_VERSION {
        return Err(Error::domain("read_ensemble", "unsupported version"));
    }
    let mut dims = [0u64; 3];
    for d in dims.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *d = u64::from_le_bytes(b);
    }
    let (n_paths, nz, nt) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    if nz != grid.n_z() || nt != grid.n_t() {
        return Err(Error::domain(
            "read_ensemble",
            format!(
                "dump dims {nz}x{nt} do not match grid {}x{}",
                grid.n_z(),
                grid.n_t()
            ),
        ));
    }
    let mut data = vec![0.0; n_paths * nz * nt];
    for v in data.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *v = f64::from_le_bytes(b);
    }
    Ok(Ensemble {
        grid,
        n_paths,
        beta,
        seed,
        data,
    })
}
