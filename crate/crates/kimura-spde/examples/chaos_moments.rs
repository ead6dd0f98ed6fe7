//! Wiener-chaos second-moment tables for space-time white noise, with the
//! geometric and refined bound ledgers.
//!
//!     cargo run --release --example chaos_moments

use kimura_spde::chaos::*;
use kimura_spde::noise::FieldGrid;
use kimura_spde::quad::QuadratureSpec;

fn main() -> kimura_spde::Result<()> {
    let config = ChaosConfig {
        n_levels: 5,
        grid: FieldGrid::regular(2.0, 8, 0.5, 6)?,
        quad: QuadratureSpec {
            rel_tol: 1e-7,
            abs_tol: 1e-11,
            ..QuadratureSpec::default()
        },
        beta: 0.0,
        eps: 0.25,
    };
    let table = chaos_white(&config)?;

    println!("chaos levels at (z, t) = (1.0, 0.5) with the 2^-n bound:");
    let iz = 3;
    let it = 5;
    for n in 0..=table.n_levels() {
        println!(
            "  M_{n} = {:.8e}   bound {:.3e}",
            table.level(n, iz, it),
            bounds::geometric_level_bound(n)
        );
    }
    let (value, tail) = table.second_moment(iz, it);
    println!(
        "  E[u²] = {value:.8} + tail <= {:.2e}  (sup bound 2)",
        tail.finite().unwrap()
    );

    println!("\nrefined bounds at beta = 1/4 (summable in L^p):");
    let refined = chaos_white(&ChaosConfig {
        beta: 0.25,
        ..config.clone()
    })?;
    for n in 1..=4usize {
        let z = refined.grid.z_nodes[iz];
        let t = refined.grid.t_nodes[it];
        println!(
            "  M_{n} = {:.6e}  refined bound {:.6e}",
            refined.level(n, iz, it),
            bounds::refined_level_bound(n, z, t)
        );
    }
    match refined.lp_bound(iz, it, 4.0)? {
        bounds::LpBound::Value { value, tail } => {
            println!("  ||u||_4 <= {value:.6} + tail {tail:.2e}");
        }
        bounds::LpBound::DivergentNaiveBound { reason } => println!("  {reason}"),
    }

    let ledger = bounds::build_ledger(&table)?;
    println!(
        "\nledger: {} rows, worst relative margin {:+.3e}",
        ledger.rows.len(),
        ledger.worst_relative_margin()
    );
    Ok(())
}
