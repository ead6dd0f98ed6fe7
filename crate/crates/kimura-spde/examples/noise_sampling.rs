//! Covariance kernels and discretized noise fields: radius integrals,
//! structural condition checks, and the realized covariance of a sampled
//! colored field against its Kronecker target.
//!
//!     cargo run --release --example noise_sampling

use kimura_spde::noise::*;

fn main() -> kimura_spde::Result<()> {
    let riesz = CovKernel::Riesz { h: 0.5 };
    let expk = CovKernel::Exponential { scale: 1.0 };

    println!("radius integrals F_eps = ∫_(-eps)^(eps) f:");
    for eps in [1e-4, 1e-2, 0.25, 1.0] {
        println!(
            "  eps = {eps:6}: riesz {:.6}, exponential {:.6}",
            f_eps(&riesz, eps)?,
            f_eps(&expk, eps)?
        );
    }

    println!("\nstructural conditions (symmetry, positivity, decay, vanishing F_eps):");
    for (name, kernel) in [("riesz h=1/2", &riesz), ("exponential", &expk)] {
        let report = check_conditions(kernel);
        println!("  {name}: all pass = {}", report.all_pass());
    }
    let increasing = CovKernel::Tabulated {
        xs: vec![0.0, 1.0, 2.0],
        values: vec![0.1, 0.5, 1.0],
    };
    println!(
        "  increasing tabulated counterexample: non_increasing = {:?}",
        check_conditions(&increasing).non_increasing
    );

    println!("\nsampled riesz x riesz field vs the exact cell-averaged covariance:");
    let grid = FieldGrid::regular(1.0, 4, 0.4, 4)?;
    let model = NoiseModel::colored(riesz.clone(), riesz.clone(), 0.0)?;
    let fields = sample_field(&model, &grid, 11, 40_000)?;
    for (a, b) in [((0, 0), (0, 0)), ((0, 0), (1, 0)), ((1, 2), (3, 1))] {
        let mut sum = 0.0;
        for f in &fields {
            sum += f.at(a.0, a.1) * f.at(b.0, b.1);
        }
        let got = sum / fields.len() as f64;
        let want = riesz.cell_covariance((a.0 as f64 - b.0 as f64) * grid.dz, grid.dz)?
            * riesz.cell_covariance((a.1 as f64 - b.1 as f64) * grid.dt, grid.dt)?;
        println!("  cov{a:?}x{b:?}: sampled {got:.3e}, target {want:.3e}");
    }
    Ok(())
}
