//! Chaos-table verification: grid-refinement consistency, bound dominance,
//! level-1 cross-validation, ratio behavior, and serialization shape.

mod common;

use kimura_spde::chaos::*;
use kimura_spde::noise::{CovKernel, FieldGrid, NoiseModel};
use kimura_spde::quad::QuadratureSpec;

fn quad() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-7,
        abs_tol: 1e-11,
        ..QuadratureSpec::default()
    }
}

fn config(n_z: usize, n_t: usize, levels: usize, beta: f64) -> ChaosConfig {
    ChaosConfig {
        n_levels: levels,
        grid: FieldGrid::regular(2.0, n_z, 0.4, n_t).unwrap(),
        quad: quad(),
        beta,
        eps: 0.25,
    }
}

#[test]
fn grid_refinement_consistency() {
    // halving dz and dt moves every M_n by less than 4x the reported
    // tolerance (compared at shared physical nodes)
    let coarse = chaos_white(&config(8, 4, 3, 0.0)).unwrap();
    let fine = chaos_white(&config(16, 8, 3, 0.0)).unwrap();
    let tol = coarse.quad_tol.max(fine.quad_tol);
    for n in 0..=3usize {
        for (ic, &zc) in coarse.grid.z_nodes.iter().enumerate() {
            for (jc, &tc) in coarse.grid.t_nodes.iter().enumerate() {
                let i_f = fine
                    .grid
                    .z_nodes
                    .iter()
                    .position(|&z| (z - zc).abs() < 1e-12)
                    .unwrap();
                let j_f = fine
                    .grid
                    .t_nodes
                    .iter()
                    .position(|&t| (t - tc).abs() < 1e-12)
                    .unwrap();
                let a = coarse.level(n, ic, jc);
                let b = fine.level(n, i_f, j_f);
                let scale = a.abs().max(b.abs()).max(1e-6);
                assert!(
                    (a - b).abs() <= 4.0 * tol * scale,
                    "n={n} ({zc},{tc}): {a} vs {b}, tol {tol}"
                );
            }
        }
    }
}

#[test]
fn refined_bound_dominates_for_quarter_beta() {
    let table = chaos_white(&config(10, 5, 5, 0.25)).unwrap();
    for n in 1..=5usize {
        for (i, &z) in table.grid.z_nodes.iter().enumerate() {
            for (j, &t) in table.grid.t_nodes.iter().enumerate() {
                let bound = bounds::refined_level_bound(n, z, t);
                let got = table.level(n, i, j);
                assert!(
                    got <= bound * (1.0 + 1e-3),
                    "n={n} ({z},{t}): {got} vs {bound}"
                );
            }
        }
    }
}

#[test]
fn refined_eventually_tighter_than_geometric_near_boundary() {
    // for beta >= 1/4 and z <= 1 the refined bound sequence eventually drops
    // below the geometric one
    let t: f64 = 0.4;
    for &z in &[0.25f64, 0.5, 1.0] {
        let mut crossed = false;
        for n in 1..=40 {
            if bounds::refined_level_bound(n, z, t) < bounds::geometric_level_bound(n) {
                crossed = true;
                break;
            }
        }
        assert!(crossed, "no crossover at z = {z}");
    }
}

#[test]
fn second_moment_tail_selection() {
    let table = chaos_white(&config(8, 4, 4, 0.25)).unwrap();
    let (value, tail) = table.second_moment(7, 3);
    assert!(value > 0.0);
    assert!(tail.finite().unwrap() > 0.0);
}

#[test]
fn ratio_moment_decreases_along_dyadic_times() {
    let config = ChaosConfig {
        n_levels: 5,
        grid: FieldGrid::regular(4.0, 8, 0.2, 8).unwrap(),
        quad: quad(),
        beta: 0.5,
        eps: 0.25,
    };
    let table = chaos_white(&config).unwrap();
    // fixed z = 4.0 (last node); t grid 0.025..0.2 includes the dyadic chain
    let iz = 7;
    let mut prev = f64::INFINITY;
    for &t_target in &[0.2, 0.1, 0.05, 0.025] {
        let it = table
            .grid
            .t_nodes
            .iter()
            .position(|&t| (t - t_target).abs() < 1e-12)
            .unwrap();
        let (value, _) = table.ratio_moment(iz, it).unwrap();
        let minus_one = value - 1.0;
        assert!(minus_one >= 0.0);
        assert!(
            minus_one <= prev * (1.0 + 1e-9),
            "t = {t_target}: {minus_one} vs prev {prev}"
        );
        prev = minus_one;
    }
}

#[test]
fn ratio_far_field_approaches_one_for_small_t() {
    let config = ChaosConfig {
        n_levels: 4,
        grid: FieldGrid::regular(8.0, 8, 0.05, 4).unwrap(),
        quad: quad(),
        beta: 0.5,
        eps: 0.25,
    };
    let table = chaos_white(&config).unwrap();
    let (value, tail) = table.ratio_moment(7, 0).unwrap();
    let tail = tail.finite().unwrap();
    assert!((value - 1.0).abs() + tail < 0.05, "value {value}, tail {tail}");
}

#[test]
fn white_sup_bound_has_positive_threshold() {
    let consts = bounds::ratio_constants(0.5);
    let t_star = consts.white_threshold();
    assert!(t_star > 0.2, "threshold {t_star}");
    assert!(consts.white_sup_bound(0.2).is_some());
}

#[test]
fn boundary_divergence_negative_control_values() {
    // quadrature oracle for the exponential integral factor
    let t = 0.5;
    for &z in &[1e-2, 1e-4, 1e-6] {
        let a = 2.0 * z / t;
        let oracle = common::quad_oracle::simpson_adaptive(
            |u: f64| (-u).exp() / u,
            a,
            40.0,
            1e-12,
        );
        let via_lib = kimura_spde::specfun::exp_integral_e1(a).unwrap();
        assert!(
            ((oracle - via_lib) / via_lib).abs() < 1e-8,
            "z = {z}: {oracle} vs {via_lib}"
        );
    }
    // monotone growth along the z sequence and the |ln z| rate
    let r2 = boundary_divergence_lower_bound(1e-2, t).unwrap();
    let r4 = boundary_divergence_lower_bound(1e-4, t).unwrap();
    let r6 = boundary_divergence_lower_bound(1e-6, t).unwrap();
    assert!(r2 < r4 && r4 < r6);
    // spacing consistent with (1/4) ln growth per two decades
    let step = 0.25 * (1e4f64 / 1e2).ln();
    assert!(((r4 - r2) - step).abs() < 0.05 * step);
    assert!(((r6 - r4) - step).abs() < 0.05 * step);
}

#[test]
fn holder_modulus_scaling_slope() {
    // log Q_t vs log |dz| slope at least lambda/2 minus fit slack
    let (beta, lambda, t) = (0.5, 0.4, 0.5);
    let q = quad();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 1..=6u32 {
        let dz = 0.5f64.powi(k as i32);
        let z1: f64 = 1.0;
        let z2 = z1 + dz;
        let m = holder_modulus(z1, z2, t, beta, lambda, &q).unwrap();
        assert!(m.q_t <= m.q_bound * (1.0 + 1e-6), "Q bound at dz = {dz}");
        assert!(
            m.q_tilde_t <= m.q_tilde_bound * (1.0 + 1e-6),
            "Qtilde bound at dz = {dz}"
        );
        xs.push(dz.ln());
        ys.push(m.q_t.ln());
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xbar).powi(2)).sum::<f64>();
    assert!(slope >= 0.5 * lambda - 0.05, "slope {slope}");
}

#[test]
fn colored_table_and_tree_bounds() {
    let model = NoiseModel::colored(
        CovKernel::Riesz { h: 0.5 },
        CovKernel::Riesz { h: 0.5 },
        0.0,
    )
    .unwrap();
    let config = ChaosConfig {
        n_levels: 3,
        grid: FieldGrid::regular(2.0, 4, 0.1, 4).unwrap(),
        quad: quad(),
        beta: 0.0,
        eps: 0.25,
    };
    let table = chaos_colored(&config, &model).unwrap();
    let ledger = bounds::build_ledger(&table).unwrap();
    // tree bounds hold with the coarse-quadrature slack
    for row in ledger.rows.iter().filter(|r| r.bound_name == "colored_tree") {
        assert!(
            row.margin >= -0.05 * row.bound.abs(),
            "{row:?}"
        );
    }
}

#[test]
fn lp_bound_routes() {
    let table = chaos_white(&config(8, 4, 4, 0.25)).unwrap();
    // p = 2 is the exact orthogonal norm
    match table.lp_bound(5, 3, 2.0).unwrap() {
        bounds::LpBound::Value { value, .. } => {
            let (m2, _) = table.second_moment(5, 3);
            assert!((value - m2.sqrt()).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    // p = 4 with beta = 1/4: refined per-level bounds and finite tail
    match table.lp_bound(5, 3, 4.0).unwrap() {
        bounds::LpBound::Value { value, tail } => {
            assert!(value.is_finite() && tail.is_finite());
            let z = table.grid.z_nodes[5];
            let t = table.grid.t_nodes[3];
            for n in 1..=table.n_levels() {
                let per_level = 3.0f64.powf(0.5 * n as f64) * table.level(n, 5, 3).sqrt();
                let cap = (3.0 * bounds::refined_level_bound(n, z, t)).sqrt()
                    * 3.0f64.powf(0.5 * n as f64 - 0.5 * n as f64);
                let _ = cap;
                let bound_n =
                    3.0f64.powf(0.5 * n as f64) * bounds::refined_level_bound(n, z, t).sqrt();
                assert!(per_level <= bound_n * (1.0 + 1e-3), "n = {n}");
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn lp_bound_divergence_reported_below_quarter() {
    let table = chaos_white(&config(6, 3, 2, 0.1)).unwrap();
    match table.lp_bound(3, 2, 4.0).unwrap() {
        bounds::LpBound::DivergentNaiveBound { reason } => {
            assert!(reason.contains("beta"), "{reason}");
        }
        other => panic!("expected divergence report, got {other:?}"),
    }
}

#[test]
fn phi_tail_finite_up_to_one() {
    for &t in &[0.1, 0.5, 1.0] {
        let x = kimura_spde::kernel::ENERGY_DENSITY_REFINED_C * (std::f64::consts::PI * t).sqrt();
        let phi = bounds::refined_series_phi(x);
        assert!(phi.is_finite() && phi >= 1.0);
    }
}

#[test]
fn table_serialization_shape() {
    let table = chaos_white(&config(3, 2, 1, 0.0)).unwrap();
    let text = table.to_table_string();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,z,t,value,bound_name,bound_value,margin");
    // 2 levels x 3 z x 2 t rows
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    // 12 significant digits in the value column
    let row = text.lines().nth(1).unwrap();
    let value_field = row.split(',').nth(3).unwrap();
    assert!(value_field.contains('e'));
    let mantissa = value_field.split('e').next().unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 12, "{value_field}");
}

#[test]
fn ledger_serialization_and_margins() {
    let table = chaos_white(&config(4, 3, 2, 0.0)).unwrap();
    let ledger = bounds::build_ledger(&table).unwrap();
    assert!(ledger.all_within(1e-3));
    let text = ledger.to_table_string();
    assert!(text.starts_with("n,z,t,value,bound_name,bound_value,margin\n"));
    assert!(text.contains("white_geometric_2^-n"));
    assert!(!ledger.constants.is_empty());
}
