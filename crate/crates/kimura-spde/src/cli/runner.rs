//! Command dispatch and artifact emission.
//!
//! Every command produces the same artifact set: `ledger.csv` (computed
//! value vs bound vs margin; the exit status is 0 iff all margins are
//! non-negative after folding the configured slack into the bound column),
//! `moments.csv`, `reconciliation.csv`, and a `run-manifest.txt` echoing
//! the full configuration.  For a fixed config and seed the CSVs are
//! byte-identical across runs; the manifest additionally carries wall
//! times and is not.

use super::config::{Command, ExperimentConfig};
use crate::chaos::{self, bounds, ChaosTable};
use crate::error::{Error, Result};
use crate::kernel;
use crate::montecarlo;
use crate::specfun;
use rand::{Rng, SeedableRng};
use std::fmt::Write as _;
use std::time::Instant;

/// One ledger line: the slack-folded bound is what the CSV carries, so the
/// pass/fail status is recomputable from the file alone (margin >= 0).
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub level: String,
    pub z: f64,
    pub t: f64,
    pub value: f64,
    pub bound_name: String,
    pub bound_with_slack: f64,
    pub margin: f64,
}

impl CsvRow {
    fn assert_le(
        level: Option<usize>,
        z: f64,
        t: f64,
        value: f64,
        name: &str,
        bound: f64,
        slack: f64,
    ) -> CsvRow {
        let slacked = bound + slack * bound.abs().max(1.0e-300);
        CsvRow {
            level: level.map(|n| n.to_string()).unwrap_or_default(),
            z,
            t,
            value,
            bound_name: name.to_string(),
            bound_with_slack: slacked,
            margin: slacked - value,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub ledger: Vec<CsvRow>,
    pub moments_csv: String,
    pub reconciliation_csv: String,
    pub manifest: String,
    pub exit_ok: bool,
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn ledger_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from("n,z,t,value,bound_name,bound_value,margin\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.level,
            fmt12(r.z),
            fmt12(r.t),
            fmt12(r.value),
            r.bound_name,
            fmt12(r.bound_with_slack),
            fmt12(r.margin)
        );
    }
    out
}

fn identities_rows(config: &ExperimentConfig, rows: &mut Vec<CsvRow>) -> Result<()> {
    let quad = config.quadrature_spec();
    let slack = config.bound_slack;
    let tol = 20.0 * config.quad_rel_tol;
    // closed-form vs quadrature residuals on a small log grid
    for &z in &[0.05, 0.5, 2.0, config.grid_z_max] {
        for &t in &[0.02, 0.2, config.grid_t_max] {
            let mass = kernel::mass_q0(z, t)?;
            let mass_quad = kernel::mass_q0_quadrature(z, t, &quad)?;
            rows.push(CsvRow::assert_le(
                None,
                z,
                t,
                ((mass_quad - mass) / mass).abs(),
                "identity_mass_q0",
                tol,
                slack,
            ));
            let one = kernel::mass_q1_quadrature(z, t, &quad)?;
            rows.push(CsvRow::assert_le(
                None,
                z,
                t,
                (one - 1.0).abs(),
                "identity_mass_q1",
                tol,
                slack,
            ));
            let u = kernel::energy_u(z / t)?;
            let u_quad = kernel::energy_time_integral_quadrature(z, t, &quad)?;
            rows.push(CsvRow::assert_le(
                None,
                z,
                t,
                ((u_quad - u) / u).abs(),
                "identity_energy_u",
                tol,
                slack,
            ));
            let ed = kernel::energy_density_q0(z, t)?;
            let ed_quad = kernel::energy_density_q0_quadrature(z, t, &quad)?;
            rows.push(CsvRow::assert_le(
                None,
                z,
                t,
                ((ed_quad - ed) / ed).abs(),
                "identity_energy_density",
                tol,
                slack,
            ));
        }
    }
    // semigroup composition on seeded random instances
    let params = config.kernel_params()?;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(config.seed);
    for _ in 0..5 {
        let z = rng.gen_range(0.2..3.0);
        let w = rng.gen_range(0.2..3.0);
        let s = rng.gen_range(0.05..0.5);
        let t = rng.gen_range(0.05..0.5);
        let two_step = kernel::semigroup_compose(params, z, w, s, t, &quad)?;
        let one_step = kernel::q_nu(params, z, w, s + t)?;
        rows.push(CsvRow::assert_le(
            None,
            z,
            w,
            ((two_step - one_step) / one_step).abs(),
            "identity_semigroup",
            tol,
            slack,
        ));
    }
    // special-function self-test
    for &x in &[0.0, 1.0, 10.0] {
        let r = specfun::bessel_i_prime_identity_check(x, 1e-5)?;
        rows.push(CsvRow::assert_le(
            None,
            x,
            0.0,
            r,
            "identity_bessel_prime",
            1e-6,
            slack,
        ));
    }
    Ok(())
}

fn build_table(config: &ExperimentConfig) -> Result<ChaosTable> {
    let chaos_config = config.chaos_config()?;
    if config.is_white() {
        chaos::chaos_white(&chaos_config)
    } else {
        chaos::chaos_colored(&chaos_config, &config.noise_model()?)
    }
}

fn chaos_rows(config: &ExperimentConfig, table: &ChaosTable, rows: &mut Vec<CsvRow>) -> Result<()> {
    let ledger = bounds::build_ledger(table)?;
    // computed chaos tolerance plus the configured slack gates the margins
    let slack = config.bound_slack + table.quad_tol;
    for r in &ledger.rows {
        rows.push(CsvRow::assert_le(
            r.level,
            r.z,
            r.t,
            r.value,
            &r.bound_name,
            r.bound,
            slack,
        ));
    }
    Ok(())
}

fn moments_csv_from_table(table: &ChaosTable) -> String {
    table.to_table_string()
}

fn mc_rows(
    config: &ExperimentConfig,
    table: &ChaosTable,
    rows: &mut Vec<CsvRow>,
) -> Result<(String, String)> {
    let scheme = config.sim_scheme()?;
    let model = config.noise_model()?;
    let report = montecarlo::moments_streaming(&scheme, &model, |_| 1.0)?;
    let summary = montecarlo::compare_chaos_mc(&report, table, config.mc_gate_se);
    rows.push(CsvRow::assert_le(
        None,
        0.0,
        0.0,
        1.0 - summary.fraction_within,
        "mc_chaos_outlier_fraction",
        0.05,
        config.bound_slack,
    ));
    let mut moments = String::from("n,z,t,value,bound_name,bound_value,margin\n");
    for p in &report.points {
        for &(q, value, se) in &p.p_moments {
            let _ = writeln!(
                moments,
                "{q},{},{},{},mc_se,{},",
                fmt12(p.z),
                fmt12(p.t),
                fmt12(value),
                fmt12(se)
            );
        }
    }
    let mut rec = String::from("z,t,mc,chaos,se,tail,sigma_units,within\n");
    for r in &summary.rows {
        let _ = writeln!(
            rec,
            "{},{},{},{},{},{},{},{}",
            fmt12(r.z),
            fmt12(r.t),
            fmt12(r.mc),
            fmt12(r.chaos),
            fmt12(r.se),
            fmt12(r.tail),
            fmt12(r.sigma_units),
            r.within
        );
    }
    Ok((moments, rec))
}

fn ratio_rows(config: &ExperimentConfig, table: &ChaosTable, rows: &mut Vec<CsvRow>) -> Result<()> {
    if !(config.beta > 0.0) {
        // The undamped case has no finite boundary ratio; record the
        // divergence control instead.
        let mut prev = 0.0;
        for &z in &[1e-2, 1e-4, 1e-6] {
            let r = chaos::boundary_divergence_lower_bound(z, 0.5)?;
            rows.push(CsvRow::assert_le(
                None,
                z,
                0.5,
                prev - r, // must increase as z decreases
                "divergence_control_monotone_growth",
                0.0,
                config.bound_slack,
            ));
            prev = r;
        }
        return Ok(());
    }
    let consts = bounds::ratio_constants(config.beta);
    let slack = config.bound_slack + table.quad_tol;
    for (it, &t) in table.grid.t_nodes.iter().enumerate() {
        let sup_bound = match &table.kind {
            chaos::NoiseKind::White => consts.white_sup_bound(t),
            chaos::NoiseKind::Colored {
                f_eps, f_at_eps, ..
            } => consts.colored_sup_bound(t, table.colored_gamma(t), *f_eps, *f_at_eps),
        };
        let Some(sup_bound) = sup_bound else {
            continue; // above the threshold T at this t
        };
        let mut sup_value: f64 = 0.0;
        let mut z_at = 0.0;
        for (iz, &z) in table.grid.z_nodes.iter().enumerate() {
            let (value, tail) = table.ratio_moment(iz, it)?;
            let total = value + tail.finite().unwrap_or(0.0);
            if total > sup_value {
                sup_value = total;
                z_at = z;
            }
        }
        rows.push(CsvRow::assert_le(
            None,
            z_at,
            t,
            sup_value,
            "ratio_sup_C_t_beta",
            sup_bound,
            slack,
        ));
    }
    // decay of E[(u/u0 - 1)^2] along decreasing t at the configured z
    let iz = table
        .grid
        .z_nodes
        .iter()
        .position(|&z| (z - config.ratio_z).abs() < 0.5 * table.grid.dz)
        .unwrap_or(table.grid.n_z() - 1);
    let mut prev: Option<f64> = None;
    for it in (0..table.grid.n_t()).rev() {
        let (value, _) = table.ratio_moment(iz, it)?;
        let minus_one = value - 1.0;
        if let Some(p) = prev {
            rows.push(CsvRow::assert_le(
                None,
                table.grid.z_nodes[iz],
                table.grid.t_nodes[it],
                minus_one - p,
                "ratio_decay_along_t",
                0.0,
                config.bound_slack,
            ));
        }
        prev = Some(minus_one);
    }
    Ok(())
}

fn holder_rows(config: &ExperimentConfig, rows: &mut Vec<CsvRow>) -> Result<()> {
    let slack = config.bound_slack;
    // kernel-level Hölder bound on seeded random samples
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(config.seed ^ 0x9e3779b97f4a7c15);
    let mut worst = f64::NEG_INFINITY;
    let mut at = (0.0, 0.0);
    for _ in 0..1000 {
        let z1 = rng.gen_range(0.001..5.0);
        let z2 = rng.gen_range(0.001..5.0);
        let w = rng.gen_range(0.001..5.0);
        let s = rng.gen_range(0.01..2.0);
        let d = kernel::d0(z1, z2, w, s)?.abs();
        let bound = kernel::KERNEL_HOLDER_M * (z1 - z2).abs().sqrt() * s.powf(-1.5);
        let rel = if bound > 0.0 { d / bound } else { 0.0 };
        if rel > worst {
            worst = rel;
            at = (z1, z2);
        }
    }
    rows.push(CsvRow::assert_le(
        None,
        at.0,
        at.1,
        worst,
        "kernel_holder_d0",
        1.0,
        slack,
    ));
    // modulus bounds at a representative pair set
    if config.beta > 0.25 {
        let quad = config.quadrature_spec();
        let lambda = 0.4_f64.min((4.0 * config.beta - 1.0).min(0.5) * 0.8);
        for k in [2u32, 4, 6] {
            let z1 = 2.0 * 0.5f64.powi(k as i32);
            let z2 = 2.0 * z1;
            let m = chaos::holder_modulus(z1, z2, config.grid_t_max, config.beta, lambda, &quad)?;
            rows.push(CsvRow::assert_le(
                None,
                z1,
                z2,
                m.q_t,
                "holder_Q_t",
                m.q_bound,
                slack,
            ));
            rows.push(CsvRow::assert_le(
                None,
                z1,
                z2,
                m.q_tilde_t,
                "holder_Qtilde_t",
                m.q_tilde_bound,
                slack,
            ));
        }
        // MC slope at the final time over dyadic pairs
        let grid = config.field_grid()?;
        let mut pairs = Vec::new();
        for k in config.holder_k_min..=config.holder_k_max {
            let za = 0.5f64.powi(k as i32);
            let zb = 0.5f64.powi(k as i32 - 1);
            let ia = grid.z_nodes.iter().position(|&z| (z - za).abs() < 0.25 * grid.dz);
            let ib = grid.z_nodes.iter().position(|&z| (z - zb).abs() < 0.25 * grid.dz);
            if let (Some(ia), Some(ib)) = (ia, ib) {
                if ia != ib {
                    pairs.push((ia, ib));
                }
            }
        }
        if pairs.len() >= 4 {
            let mut scheme = config.sim_scheme()?;
            // resolve the finest pair separation with ~3 internal cells
            let min_gap = pairs
                .iter()
                .map(|&(a, b)| (grid.z_nodes[b].sqrt() - grid.z_nodes[a].sqrt()).abs())
                .fold(f64::INFINITY, f64::min);
            if min_gap.is_finite() {
                scheme.internal_dv = Some((min_gap / 3.0).max(1e-4));
            }
            let model = config.noise_model()?;
            let fit = montecarlo::holder_streaming(
                &scheme,
                &model,
                |_| 1.0,
                grid.n_t() - 1,
                &pairs,
            )?;
            rows.push(CsvRow::assert_le(
                None,
                0.0,
                config.grid_t_max,
                2.0 * config.holder_theta - fit.slope,
                "holder_slope_at_least_2theta",
                0.0,
                slack,
            ));
        }
    }
    Ok(())
}

/// Executes a command, producing the artifact bundle.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<RunArtifacts> {
    let start = Instant::now();
    let mut rows: Vec<CsvRow> = Vec::new();
    let mut moments_csv = String::from("n,z,t,value,bound_name,bound_value,margin\n");
    let mut reconciliation_csv = String::from("z,t,mc,chaos,se,tail,sigma_units,within\n");
    let mut stage_times: Vec<(String, f64)> = Vec::new();

    let mut time_stage = |name: &str, t0: Instant| -> Instant {
        stage_times.push((name.to_string(), t0.elapsed().as_secs_f64()));
        Instant::now()
    };

    let mut t0 = Instant::now();
    let needs_table = matches!(
        command,
        Command::Chaos | Command::Mc | Command::Ratio | Command::Bounds | Command::All
    );
    let table = if needs_table {
        let table = build_table(config)?;
        t0 = time_stage("chaos_table", t0);
        Some(table)
    } else {
        None
    };

    match command {
        Command::Identities => {
            identities_rows(config, &mut rows)?;
            time_stage("identities", t0);
        }
        Command::Chaos | Command::Bounds => {
            let table = table.as_ref().unwrap();
            chaos_rows(config, table, &mut rows)?;
            moments_csv = moments_csv_from_table(table);
            time_stage("bounds", t0);
        }
        Command::Mc => {
            let table = table.as_ref().unwrap();
            let (m, r) = mc_rows(config, table, &mut rows)?;
            moments_csv = m;
            reconciliation_csv = r;
            time_stage("mc", t0);
        }
        Command::Ratio => {
            let table = table.as_ref().unwrap();
            ratio_rows(config, table, &mut rows)?;
            moments_csv = moments_csv_from_table(table);
            time_stage("ratio", t0);
        }
        Command::Holder => {
            holder_rows(config, &mut rows)?;
            time_stage("holder", t0);
        }
        Command::All => {
            let table = table.as_ref().unwrap();
            identities_rows(config, &mut rows)?;
            t0 = time_stage("identities", t0);
            chaos_rows(config, table, &mut rows)?;
            t0 = time_stage("bounds", t0);
            let (m, r) = mc_rows(config, table, &mut rows)?;
            moments_csv = m;
            reconciliation_csv = r;
            t0 = time_stage("mc", t0);
            ratio_rows(config, table, &mut rows)?;
            t0 = time_stage("ratio", t0);
            holder_rows(config, &mut rows)?;
            time_stage("holder", t0);
        }
    }

    let exit_ok = rows.iter().all(|r| r.margin >= 0.0);
    let mut manifest = String::new();
    let _ = writeln!(manifest, "command = {}", command.name());
    let _ = writeln!(manifest, "library = kimura-spde {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "seed = {}", config.seed);
    let _ = writeln!(manifest, "exit_ok = {exit_ok}");
    let _ = writeln!(manifest, "\n[config]");
    let _ = writeln!(manifest, "{}", config.canonical_echo());
    let _ = writeln!(manifest, "\n[wall_times_seconds]");
    for (name, secs) in &stage_times {
        let _ = writeln!(manifest, "{name} = {secs:.3}");
    }
    let _ = writeln!(manifest, "total = {:.3}", start.elapsed().as_secs_f64());

    Ok(RunArtifacts {
        ledger: rows,
        moments_csv,
        reconciliation_csv,
        manifest,
        exit_ok,
    })
}

/// Writes ledger.csv, moments.csv, reconciliation.csv, and run-manifest.txt
/// into `out_dir`.
pub fn write_artifacts(out_dir: &std::path::Path, artifacts: &RunArtifacts) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Io(format!("creating {}: {e}", out_dir.display())))?;
    std::fs::write(out_dir.join("ledger.csv"), ledger_csv(&artifacts.ledger))?;
    std::fs::write(out_dir.join("moments.csv"), &artifacts.moments_csv)?;
    std::fs::write(
        out_dir.join("reconciliation.csv"),
        &artifacts.reconciliation_csv,
    )?;
    std::fs::write(out_dir.join("run-manifest.txt"), &artifacts.manifest)?;
    Ok(())
}
