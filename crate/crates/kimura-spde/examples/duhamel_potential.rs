//! Duhamel perturbation series for a bounded potential: term-by-term
//! comparison with the exact exponential factorization for constant V, and
//! the uniform ratio bound |q^V/q - 1| <= e^{t ||V||} - 1.
//!
//!     cargo run --release --example duhamel_potential

use kimura_spde::kernel::*;
use kimura_spde::quad::QuadratureSpec;

fn main() -> kimura_spde::Result<()> {
    let quad = QuadratureSpec::default();
    let params = KernelParams::driftless();
    let (z, w, t) = (1.0, 1.5, 0.2);

    println!("constant potential V = 1: q_k should be t^k/k! q");
    let series = duhamel_qv(params, &PotentialSpec::constant(1.0), z, w, t, 3, &quad)?;
    let base = series.per_term[0];
    for (k, &term) in series.per_term.iter().enumerate() {
        let fact: f64 = (1..=k).product::<usize>() as f64;
        let exact = t.powi(k as i32) / fact * base;
        println!("  k = {k}: {term:.10e}  (exact {exact:.10e})");
    }
    println!("  sum {:.10e} vs e^t q = {:.10e}", series.value, t.exp() * base);

    println!("\ntabulated potential with ||V|| = 1 on a (z, w) sample:");
    let potential = PotentialSpec::new(
        vec![0.25, 0.5, 1.0, 2.0, 4.0],
        vec![0.6, -1.0, 0.8, -0.4, 1.0],
    )?;
    for t in [0.1, 0.2] {
        let cap = (t * potential.sup_norm()).exp_m1();
        let mut worst: f64 = 0.0;
        for (z, w) in [(0.5, 0.5), (1.0, 2.0), (2.5, 0.8), (0.3, 1.6)] {
            let s = duhamel_qv(params, &potential, z, w, t, 4, &quad)?;
            worst = worst.max((s.value / s.per_term[0] - 1.0).abs());
        }
        println!("  t = {t}: sup |q^V/q - 1| over sample = {worst:.5} <= e^t - 1 = {cap:.5}");
    }
    Ok(())
}
