//! Periodic stationary measure of a forced two-state chain.
//!
//! Builds the constant-trace spec `phi_-(t) = 2 + cos(2 pi t)`,
//! `phi_+(t) = 2 - cos(2 pi t)`, evaluates the closed-form periodic measure,
//! and compares it with the fixed point of the one-period ODE map computed by
//! the integrator — two fully independent routes to the same curve.
//!
//! ```bash
//! cargo run --example pspm_profile
//! ```

use periodic_telegraph::pspm::{ode_periodic_fixed_point, second_floquet_exponent, Pspm};
use periodic_telegraph::{RateSpec, DEFAULT_STEPS_PER_PERIOD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU)?;
    let pspm = Pspm::new(&spec)?;
    let t_per = spec.period();

    println!("spec: sin_constant_trace(eps=1, a=2, omega=2pi), period T = {t_per}");
    println!("mu_minus(0)          = {:.15}", pspm.mu_minus_zero());
    println!("second Floquet exp.  = {:.15}", second_floquet_exponent(&spec));
    println!("E_mu[N_T] per period = {:.15}", pspm.mean_up_crossings_per_period());
    println!();

    let offsets: Vec<f64> = (0..16).map(|i| t_per * i as f64 / 16.0).collect();
    let ode = ode_periodic_fixed_point(&spec, DEFAULT_STEPS_PER_PERIOD, &offsets)?;

    println!("{:>8} {:>20} {:>20} {:>12}", "t", "closed-form mu_-", "ODE fixed point", "gap");
    let mut sup = 0.0f64;
    for (t, state) in offsets.iter().zip(&ode) {
        let closed = pspm.at(*t).0;
        let gap = (closed - state.minus).abs();
        sup = sup.max(gap);
        println!("{t:8.4} {closed:20.15} {:20.15} {gap:12.3e}", state.minus);
    }
    println!("\nsup gap over the grid: {sup:.3e}");
    Ok(())
}
