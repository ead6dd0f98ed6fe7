//! Closed-form integrals of the transition kernel checked against live
//! quadrature: total mass, absorbed mass, energy density, and the
//! Chapman–Kolmogorov composition.
//!
//!     cargo run --release --example identities

use kimura_spde::kernel::*;
use kimura_spde::quad::QuadratureSpec;

fn main() -> kimura_spde::Result<()> {
    let quad = QuadratureSpec {
        rel_tol: 1e-9,
        abs_tol: 1e-13,
        ..QuadratureSpec::default()
    };

    println!("mass identity: ∫ q0(z, w, t) dw = 1 - e^(-z/t)");
    for (z, t) in [(0.5, 0.5), (1.0, 1.0), (4.0, 0.25)] {
        let closed = mass_q0(z, t)?;
        let numeric = mass_q0_quadrature(z, t, &quad)?;
        println!(
            "  z = {z:4}, t = {t:4}: closed {closed:.12}, quadrature {numeric:.12}, \
             absorbed {:.3e}",
            absorbed_mass(z, t)?
        );
    }

    println!("\nunit-drift mass: ∫ q1 dw = 1");
    for (z, t) in [(1.0, 1.0), (10.0, 0.1)] {
        println!(
            "  z = {z:4}, t = {t:4}: quadrature {:.12}",
            mass_q1_quadrature(z, t, &quad)?
        );
    }

    println!("\nenergy density two routes (Bessel closed form vs ₂F₂ series)");
    for (z, s) in [(1.0, 0.5), (2.0, 0.1)] {
        let bessel = energy_density_q0(z, s)?;
        let hyper = energy_density_q0_hypergeometric(z, s)?;
        println!("  z = {z}, s = {s}: {bessel:.12} vs {hyper:.12}");
    }

    println!("\ntime-integrated energy equals U(z/t), U <= 1/2");
    for (z, t) in [(1.0, 2.0), (0.2, 0.5)] {
        let closed = energy_u(z / t)?;
        let numeric = energy_time_integral_quadrature(z, t, &quad)?;
        println!("  z = {z}, t = {t}: U = {closed:.12}, quadrature {numeric:.12}");
    }

    println!("\nsemigroup: two-step composition vs one step");
    let params = KernelParams::driftless();
    for (z, w, s, t) in [(1.0, 2.0, 0.3, 0.4), (0.5, 0.5, 0.1, 0.7)] {
        let two = semigroup_compose(params, z, w, s, t, &quad)?;
        let one = q_nu(params, z, w, s + t)?;
        println!(
            "  ({z}, {w}) over {s}+{t}: {two:.12} vs {one:.12} (rel gap {:.1e})",
            ((two - one) / one).abs()
        );
    }
    Ok(())
}
