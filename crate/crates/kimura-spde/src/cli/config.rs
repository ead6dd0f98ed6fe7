//! Flat key=value experiment configuration.
//!
//! The format is line-oriented `section.key = value` with `#` comments.
//! Parsing collects *all* violations — unknown keys, duplicates, type
//! errors, invariant breaches — rather than stopping at the first, and
//! every key has a documented default (see [`ExperimentConfig::default`]).

use crate::chaos::ChaosConfig;
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::montecarlo::SimScheme;
use crate::noise::{CovKernel, FieldGrid, NoiseModel};
use crate::quad::QuadratureSpec;
use std::collections::BTreeMap;

/// Experiment commands; the first positional CLI argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Identities,
    Chaos,
    Mc,
    Ratio,
    Holder,
    Bounds,
    All,
}

impl Command {
    pub fn parse(s: &str) -> Result<Command> {
        Ok(match s {
            "identities" => Command::Identities,
            "chaos" => Command::Chaos,
            "mc" => Command::Mc,
            "ratio" => Command::Ratio,
            "holder" => Command::Holder,
            "bounds" => Command::Bounds,
            "all" => Command::All,
            other => {
                return Err(Error::domain(
                    "Command",
                    format!(
                        "unknown command {other:?}; expected one of \
                         identities|chaos|mc|ratio|holder|bounds|all"
                    ),
                ))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Chaos => "chaos",
            Command::Mc => "mc",
            Command::Ratio => "ratio",
            Command::Holder => "holder",
            Command::Bounds => "bounds",
            Command::All => "all",
        }
    }
}

/// Fully resolved experiment configuration with documented defaults:
///
/// | key                  | default | meaning                               |
/// |----------------------|---------|---------------------------------------|
/// | kernel.nu            | 0.0     | drift order (< 1)                     |
/// | noise.kind           | white   | white / riesz / exponential (both axes) |
/// | noise.spatial.kind   | (noise.kind) | spatial kernel override          |
/// | noise.spatial.h      | 0.5     | riesz exponent                        |
/// | noise.spatial.scale  | 1.0     | exponential scale                     |
/// | noise.temporal.*     | (as spatial) | temporal kernel override         |
/// | noise.beta           | 0.0     | degeneracy exponent                   |
/// | grid.z_max           | 4.0     | spatial extent                        |
/// | grid.n_z             | 32      | spatial nodes                         |
/// | grid.t_max           | 0.5     | temporal extent                       |
/// | grid.n_t             | 32      | temporal nodes                        |
/// | chaos.levels         | 5       | truncation depth                      |
/// | chaos.eps            | 0.25    | colored split radius                  |
/// | quad.rel_tol         | 1e-6    | quadrature relative tolerance         |
/// | quad.abs_tol         | 1e-10   | quadrature absolute tolerance         |
/// | quad.base_points     | 7       | Gauss points per panel                |
/// | quad.grading         | 2.0     | graded-mesh exponent                  |
/// | quad.z_max           | 1e6     | spatial truncation cap                |
/// | mc.paths             | 1000    | Monte Carlo paths                     |
/// | mc.substeps          | 4       | simulation steps per output interval  |
/// | mc.gate_se           | 3.0     | reconciliation gate in SE units       |
/// | bound.slack          | 1e-3    | relative slack on asserted bounds     |
/// | ratio.z              | 4.0     | fixed z for the ratio decay check     |
/// | holder.k_min         | 3       | smallest dyadic pair exponent         |
/// | holder.k_max         | 10      | largest dyadic pair exponent          |
/// | holder.theta         | 0.1     | Hölder exponent the slope must beat   |
/// | seed                 | 42      | RNG seed                              |
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub nu: f64,
    pub noise: NoiseSpec,
    pub beta: f64,
    pub grid_z_max: f64,
    pub grid_n_z: usize,
    pub grid_t_max: f64,
    pub grid_n_t: usize,
    pub chaos_levels: usize,
    pub chaos_eps: f64,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    pub quad_base_points: usize,
    pub quad_grading: f64,
    pub quad_z_max: f64,
    pub mc_paths: usize,
    pub mc_substeps: usize,
    pub mc_gate_se: f64,
    pub bound_slack: f64,
    pub ratio_z: f64,
    pub holder_k_min: u32,
    pub holder_k_max: u32,
    pub holder_theta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    White,
    Riesz,
    Exponential,
}

#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub spatial_kind: KernelKind,
    pub spatial_h: f64,
    pub spatial_scale: f64,
    pub temporal_kind: KernelKind,
    pub temporal_h: f64,
    pub temporal_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            nu: 0.0,
            noise: NoiseSpec {
                spatial_kind: KernelKind::White,
                spatial_h: 0.5,
                spatial_scale: 1.0,
                temporal_kind: KernelKind::White,
                temporal_h: 0.5,
                temporal_scale: 1.0,
            },
            beta: 0.0,
            grid_z_max: 4.0,
            grid_n_z: 32,
            grid_t_max: 0.5,
            grid_n_t: 32,
            chaos_levels: 5,
            chaos_eps: 0.25,
            quad_rel_tol: 1e-6,
            quad_abs_tol: 1e-10,
            quad_base_points: 7,
            quad_grading: 2.0,
            quad_z_max: 1e6,
            mc_paths: 1000,
            mc_substeps: 4,
            mc_gate_se: 3.0,
            bound_slack: 1e-3,
            ratio_z: 4.0,
            holder_k_min: 3,
            holder_k_max: 10,
            holder_theta: 0.1,
            seed: 42,
        }
    }
}

fn parse_kind(v: &str) -> Option<KernelKind> {
    match v {
        "white" | "dirac-white" => Some(KernelKind::White),
        "riesz" => Some(KernelKind::Riesz),
        "exponential" => Some(KernelKind::Exponential),
        _ => None,
    }
}

/// Parses the flat key=value text; returns the config or a list of every
/// violation found (unknown keys, duplicates, type errors, invariants).
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut violations: Vec<String> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut values: BTreeMap<String, String> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {}: expected key = value", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(prev) = seen.get(&key) {
            violations.push(format!(
                "duplicate key {key:?} at lines {} and {}",
                prev + 1,
                lineno + 1
            ));
            continue;
        }
        seen.insert(key.clone(), lineno);
        values.insert(key, value);
    }

    let mut config = ExperimentConfig::default();
    // default the temporal kernel to the spatial setting unless overridden
    let mut temporal_explicit = false;

    for (key, value) in &values {
        let mut bad_type = |what: &str| {
            violations.push(format!("key {key}: expected {what}, got {value:?}"));
        };
        macro_rules! as_f64 {
            ($slot:expr) => {
                match value.parse::<f64>() {
                    Ok(x) => $slot = x,
                    Err(_) => bad_type("a real number"),
                }
            };
        }
        macro_rules! as_usize {
            ($slot:expr) => {
                match value.parse::<usize>() {
                    Ok(x) => $slot = x,
                    Err(_) => bad_type("a non-negative integer"),
                }
            };
        }
        match key.as_str() {
            "kernel.nu" => as_f64!(config.nu),
            "noise.kind" => match parse_kind(value) {
                Some(k) => {
                    config.noise.spatial_kind = k;
                    if !temporal_explicit {
                        config.noise.temporal_kind = k;
                    }
                }
                None => bad_type("white|riesz|exponential"),
            },
            "noise.spatial.kind" => match parse_kind(value) {
                Some(k) => config.noise.spatial_kind = k,
                None => bad_type("white|riesz|exponential"),
            },
            "noise.temporal.kind" => match parse_kind(value) {
                Some(k) => {
                    config.noise.temporal_kind = k;
                    temporal_explicit = true;
                }
                None => bad_type("white|riesz|exponential"),
            },
            "noise.spatial.h" => as_f64!(config.noise.spatial_h),
            "noise.temporal.h" => as_f64!(config.noise.temporal_h),
            "noise.spatial.scale" => as_f64!(config.noise.spatial_scale),
            "noise.temporal.scale" => as_f64!(config.noise.temporal_scale),
            "noise.beta" => as_f64!(config.beta),
            "grid.z_max" => as_f64!(config.grid_z_max),
            "grid.n_z" => as_usize!(config.grid_n_z),
            "grid.t_max" => as_f64!(config.grid_t_max),
            "grid.n_t" => as_usize!(config.grid_n_t),
            "chaos.levels" => as_usize!(config.chaos_levels),
            "chaos.eps" => as_f64!(config.chaos_eps),
            "quad.rel_tol" => as_f64!(config.quad_rel_tol),
            "quad.abs_tol" => as_f64!(config.quad_abs_tol),
            "quad.base_points" => as_usize!(config.quad_base_points),
            "quad.grading" => as_f64!(config.quad_grading),
            "quad.z_max" => as_f64!(config.quad_z_max),
            "mc.paths" => as_usize!(config.mc_paths),
            "mc.substeps" => as_usize!(config.mc_substeps),
            "mc.gate_se" => as_f64!(config.mc_gate_se),
            "bound.slack" => as_f64!(config.bound_slack),
            "ratio.z" => as_f64!(config.ratio_z),
            "holder.k_min" => match value.parse::<u32>() {
                Ok(x) => config.holder_k_min = x,
                Err(_) => bad_type("a non-negative integer"),
            },
            "holder.k_max" => match value.parse::<u32>() {
                Ok(x) => config.holder_k_max = x,
                Err(_) => bad_type("a non-negative integer"),
            },
            "holder.theta" => as_f64!(config.holder_theta),
            "seed" => match value.parse::<u64>() {
                Ok(x) => config.seed = x,
                Err(_) => bad_type("an unsigned 64-bit integer"),
            },
            _ => violations.push(format!("unknown key {key:?}")),
        }
    }

    // Invariants: validate each sub-config through its own module, mapping
    // failures back to key paths.
    if !(config.nu < 1.0) {
        violations.push(format!("kernel.nu: drift order {} must be < 1", config.nu));
    }
    if !(config.beta >= 0.0) {
        violations.push(format!("noise.beta: {} must be >= 0", config.beta));
    }
    match config.field_grid() {
        Err(e) => violations.push(format!("grid.*: {e}")),
        Ok(grid) => {
            if let Err(e) = grid.validate() {
                violations.push(format!("grid.*: {e}"));
            }
        }
    }
    if let Err(e) = config.quadrature_spec().validate() {
        violations.push(format!("quad.*: {e}"));
    }
    if config.noise.spatial_kind == KernelKind::Riesz
        && !(config.noise.spatial_h > 0.0 && config.noise.spatial_h < 1.0)
    {
        violations.push(format!(
            "noise.spatial.h: {} outside (0, 1)",
            config.noise.spatial_h
        ));
    }
    if config.noise.temporal_kind == KernelKind::Riesz
        && !(config.noise.temporal_h > 0.0 && config.noise.temporal_h < 1.0)
    {
        violations.push(format!(
            "noise.temporal.h: {} outside (0, 1)",
            config.noise.temporal_h
        ));
    }
    if !(config.chaos_eps > 0.0) {
        violations.push(format!("chaos.eps: {} must be > 0", config.chaos_eps));
    }
    if config.chaos_levels == 0 || config.chaos_levels > 12 {
        violations.push(format!(
            "chaos.levels: {} outside 1..=12",
            config.chaos_levels
        ));
    }
    if config.mc_substeps < 4 {
        violations.push(format!(
            "mc.substeps: {} must be >= 4 (step at most min t_node / 4)",
            config.mc_substeps
        ));
    }
    if !(config.bound_slack > 0.0 && config.bound_slack < 1.0) {
        violations.push(format!(
            "bound.slack: {} outside (0, 1)",
            config.bound_slack
        ));
    }
    if config.holder_k_min >= config.holder_k_max {
        violations.push(format!(
            "holder.k_min/k_max: need k_min < k_max, got {} >= {}",
            config.holder_k_min, config.holder_k_max
        ));
    }

    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config { violations })
    }
}

impl ExperimentConfig {
    pub fn kernel_params(&self) -> Result<KernelParams> {
        KernelParams::new(self.nu)
    }

    pub fn field_grid(&self) -> Result<FieldGrid> {
        FieldGrid::regular(self.grid_z_max, self.grid_n_z, self.grid_t_max, self.grid_n_t)
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            z_max: self.quad_z_max,
            base_points: self.quad_base_points,
            singularity_grading: self.quad_grading,
            abs_tol: self.quad_abs_tol,
            rel_tol: self.quad_rel_tol,
        }
    }

    fn build_kernel(kind: KernelKind, h: f64, scale: f64) -> CovKernel {
        match kind {
            KernelKind::White => CovKernel::DiracWhite,
            KernelKind::Riesz => CovKernel::Riesz { h },
            KernelKind::Exponential => CovKernel::Exponential { scale },
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let spatial = Self::build_kernel(
            self.noise.spatial_kind,
            self.noise.spatial_h,
            self.noise.spatial_scale,
        );
        let temporal = Self::build_kernel(
            self.noise.temporal_kind,
            self.noise.temporal_h,
            self.noise.temporal_scale,
        );
        NoiseModel::colored(spatial, temporal, self.beta)
    }

    pub fn is_white(&self) -> bool {
        self.noise.spatial_kind == KernelKind::White
            && self.noise.temporal_kind == KernelKind::White
    }

    pub fn chaos_config(&self) -> Result<ChaosConfig> {
        Ok(ChaosConfig {
            n_levels: self.chaos_levels,
            grid: self.field_grid()?,
            quad: self.quadrature_spec(),
            beta: self.beta,
            eps: self.chaos_eps,
        })
    }

    pub fn sim_scheme(&self) -> Result<SimScheme> {
        Ok(SimScheme {
            grid: self.field_grid()?,
            n_paths: self.mc_paths,
            substeps: self.mc_substeps,
            seed: self.seed,
            beta: self.beta,
            internal_dv: None,
        })
    }

    /// Canonical echo of every key, sorted; the manifest embeds this and a
    /// re-parse reproduces the configuration exactly.
    pub fn canonical_echo(&self) -> String {
        let kind_name = |k: KernelKind| match k {
            KernelKind::White => "white",
            KernelKind::Riesz => "riesz",
            KernelKind::Exponential => "exponential",
        };
        let mut lines = vec![
            format!("bound.slack = {}", self.bound_slack),
            format!("chaos.eps = {}", self.chaos_eps),
            format!("chaos.levels = {}", self.chaos_levels),
            format!("grid.n_t = {}", self.grid_n_t),
            format!("grid.n_z = {}", self.grid_n_z),
            format!("grid.t_max = {}", self.grid_t_max),
            format!("grid.z_max = {}", self.grid_z_max),
            format!("holder.k_max = {}", self.holder_k_max),
            format!("holder.k_min = {}", self.holder_k_min),
            format!("holder.theta = {}", self.holder_theta),
            format!("kernel.nu = {}", self.nu),
            format!("mc.gate_se = {}", self.mc_gate_se),
            format!("mc.paths = {}", self.mc_paths),
            format!("mc.substeps = {}", self.mc_substeps),
            format!("noise.beta = {}", self.beta),
            format!("noise.spatial.h = {}", self.noise.spatial_h),
            format!("noise.spatial.kind = {}", kind_name(self.noise.spatial_kind)),
            format!("noise.spatial.scale = {}", self.noise.spatial_scale),
            format!("noise.temporal.h = {}", self.noise.temporal_h),
            format!(
                "noise.temporal.kind = {}",
                kind_name(self.noise.temporal_kind)
            ),
            format!("noise.temporal.scale = {}", self.noise.temporal_scale),
            format!("quad.abs_tol = {}", self.quad_abs_tol),
            format!("quad.base_points = {}", self.quad_base_points),
            format!("quad.grading = {}", self.quad_grading),
            format!("quad.rel_tol = {}", self.quad_rel_tol),
            format!("quad.z_max = {}", self.quad_z_max),
            format!("ratio.z = {}", self.ratio_z),
            format!("seed = {}", self.seed),
        ];
        lines.sort();
        lines.join("\n")
    }
}
