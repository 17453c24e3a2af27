//! Resonant frequency of the constant-trace sinusoidal forcing.
//!
//! For rates `eps (a +- cos(omega t))` the tuning condition `E[N_T] = 1` is
//! scale-free in `eps`: writing `omega = mu * eps` it reduces to the single
//! positive root of the cubic `mu^3 - pi a mu^2 + 4 a^2 mu + 2 pi a (1 -
//! 2 a^2)`. The root grows asymptotically like `pi a`.
//!
//! ```bash
//! cargo run --example tune_constant_trace
//! ```

use periodic_telegraph::resonance::{constant_trace_values, tune_constant_trace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>6} {:>14} {:>12} {:>14} {:>12}",
        "a", "mu_opt", "residual", "mu_opt/(pi a)", "iterations"
    );
    for a in [1.5, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        let tuned = tune_constant_trace(a)?;
        println!(
            "{a:>6} {:>14.8} {:>12.2e} {:>14.8} {:>12}",
            tuned.argument,
            tuned.residual,
            tuned.argument / (std::f64::consts::PI * a),
            tuned.iterations
        );
    }

    // the tuning is eps-homogeneous: omega = mu_opt * eps gives unit mean
    // for every noise intensity
    let a = 2.0;
    let mu = tune_constant_trace(a)?.argument;
    println!("\na = {a}: mu_opt = {mu:.10}");
    println!("{:>6} {:>14} {:>20}", "eps", "omega", "E[N_T] (closed form)");
    for eps in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let omega = mu * eps;
        let v = constant_trace_values(eps, a, omega)?;
        println!("{eps:>6} {omega:>14.8} {:>20.15}", v.mean_up_crossings);
    }
    Ok(())
}
