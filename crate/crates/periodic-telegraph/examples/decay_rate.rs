//! Exponential convergence of an arbitrary start onto the periodic measure.
//!
//! Every initial distribution relaxes onto the periodic stationary measure at
//! the rate of the second Floquet exponent `lambda2 = -(1/T) int (phi_- +
//! phi_+)`. This example evolves `nu(0) = (1, 0)`, fits the decay slope of
//! `log ||nu(kT) - mu(kT)||`, and compares it with the analytic exponent and
//! with the closed-form coefficient `beta` of the decaying mode.
//!
//! ```bash
//! cargo run --example decay_rate
//! ```

use periodic_telegraph::pspm::{
    convergence_rate_estimate, evolve_distribution, second_floquet_exponent, DistributionState,
    Pspm,
};
use periodic_telegraph::RateSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = RateSpec::half_period(3.0, 5.0, 2.0)?;
    let lambda2 = second_floquet_exponent(&spec);
    let nu0 = DistributionState::new(0.0, 1.0, 0.0);

    println!("spec: half_period(phi0=3, phi1=5, T=2)");
    println!("analytic lambda2 = {lambda2}");

    let fit = convergence_rate_estimate(&spec, nu0, 10)?;
    println!("fitted slope     = {:.12}   (rel. gap {:.2e})", fit.slope,
        ((fit.slope - lambda2) / lambda2).abs());
    println!("mode coefficient beta = {:.12}", fit.beta);
    println!();

    // a short trajectory, printed at period ends
    let pspm = Pspm::new(&spec)?;
    let evo = evolve_distribution(&spec, nu0, 6.0 * spec.period(), 1024)?;
    println!("{:>6} {:>22} {:>14}", "t", "nu_minus", "||nu - mu||");
    for s in evo.states.iter().filter(|s| {
        let phase = s.t / spec.period();
        (phase - phase.round()).abs() < 1e-9
    }) {
        let (mu_m, mu_p) = pspm.at(s.t);
        let err = ((s.minus - mu_m).powi(2) + (s.plus - mu_p).powi(2)).sqrt();
        println!("{:6.1} {:22.15} {err:14.3e}", s.t, s.minus);
    }

    // starting exactly on the periodic solution leaves nothing to measure
    let on_pspm = DistributionState::new(0.0, pspm.mu_minus_zero(), 1.0 - pspm.mu_minus_zero());
    match convergence_rate_estimate(&spec, on_pspm, 10) {
        Err(e) => println!("\nstarting on the PSPM: {e}"),
        Ok(_) => unreachable!("beta = 0 is rejected"),
    }
    Ok(())
}
