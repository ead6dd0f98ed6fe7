//! Boundary behavior of the solution relative to the deterministic one:
//! the damped (beta > 0) ratio stays bounded and decays to 1 for small t,
//! while the undamped level-1 ratio diverges logarithmically at the
//! boundary.
//!
//!     cargo run --release --example ratio_boundary

use kimura_spde::chaos::*;
use kimura_spde::noise::FieldGrid;
use kimura_spde::quad::QuadratureSpec;

fn main() -> kimura_spde::Result<()> {
    let beta = 0.5;
    let config = ChaosConfig {
        n_levels: 6,
        grid: FieldGrid::regular(4.0, 8, 0.2, 8)?,
        quad: QuadratureSpec {
            rel_tol: 1e-7,
            abs_tol: 1e-11,
            ..QuadratureSpec::default()
        },
        beta,
        eps: 0.25,
    };
    let table = chaos_white(&config)?;
    let consts = bounds::ratio_constants(beta);
    println!(
        "white noise, beta = {beta}: C_alpha_beta = {:.3}, threshold T = {:.3}",
        consts.c_alpha_beta(),
        consts.white_threshold()
    );

    println!("\nE[(u/u0)^2] along the t grid at z = 4:");
    let iz = 7;
    for (it, &t) in table.grid.t_nodes.iter().enumerate() {
        let (value, tail) = table.ratio_moment(iz, it)?;
        let bound = consts.white_sup_bound(t);
        println!(
            "  t = {t:7.4}: {value:.6} (+tail {:.1e})   explicit bound {:?}",
            tail.finite().unwrap_or(f64::NAN),
            bound.map(|b| format!("{b:.3}"))
        );
    }

    println!("\nundamped (beta = 0) level-1 boundary divergence, t = 0.5:");
    for z in [1e-2, 1e-4, 1e-6] {
        println!(
            "  z = {z:6.0e}: lower bound {:.4}",
            boundary_divergence_lower_bound(z, 0.5)?
        );
    }

    println!("\nK and K-tilde against their fitted-constant bounds:");
    let quad = QuadratureSpec::default();
    let (z, tau, t) = (0.5, 0.2, 0.4);
    let k = k_function(z, tau, t, 2.0 * beta, &quad)?;
    let kt = k_tilde(z, tau, t, beta, &quad)?;
    let zhat = z.min(1.0);
    let alpha = consts.alpha;
    println!(
        "  K({z},{tau};2b) = {k:.5} <= {:.5}",
        4.0 * consts.c_k * (t - tau).powf(alpha - 1.0) * zhat.max(t).powf(2.0 * beta - alpha)
    );
    println!(
        "  K~({z},{tau};b) = {kt:.5} <= {:.5}",
        4.0 * consts.c_k_tilde * zhat.max(t - tau).powf(beta)
    );
    Ok(())
}
