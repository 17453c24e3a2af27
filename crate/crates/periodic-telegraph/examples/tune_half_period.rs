//! Resonant period of the Arrhenius half-period forcing.
//!
//! Rates switch between `phi0 = p e^{-V/eps}` and `phi1 = q e^{-v/eps}` at
//! mid-period. The stationary mean number of up-crossings per period is
//! strictly increasing in `T`, so exactly one period length produces one
//! up-crossing per period on average — the resonant tuning. For small noise
//! the tuned period behaves like `2 (V-v)/(q eps) e^{v/eps}`; the sweep shows
//! the ratio approaching 1 from below as `eps` shrinks.
//!
//! ```bash
//! cargo run --example tune_half_period
//! ```

use periodic_telegraph::resonance::{
    log_asymptotic_period, quality_measure, tune_half_period, BarrierParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let barriers = BarrierParams::new(1.0, 1.0, 2.0, 1.0, 0.1)?;

    // the mean-transitions curve around the resonance
    println!("mean up-crossings per period (eps = 0.1, V = 2, v = 1):");
    for t in [1.0e4, 1.0e5, 3.0e5, 3.6e5, 1.0e6, 1.0e7] {
        println!("  T = {t:>10.0}: E[N_T] = {:.6}", barriers.mean_for_period(t));
    }

    let tuned = tune_half_period(&barriers, None)?;
    println!(
        "\ntuned period T_opt = {:.4}  (residual {:.1e}, {} iterations)",
        tuned.argument, tuned.residual, tuned.iterations
    );
    let spec = barriers.with_period(tuned.argument)?.rate_spec()?;
    println!("quality measure of the tuned spec: {:.3e}", quality_measure(&spec)?);

    println!("\nsmall-noise asymptotic 2(V-v)/(q eps) e^(v/eps):");
    println!("{:>6} {:>16} {:>18} {:>10}", "eps", "T_opt", "asymptotic", "ratio");
    for eps in [0.1, 0.08, 0.06, 0.05] {
        let b = BarrierParams::new(1.0, 1.0, 2.0, 1.0, eps)?;
        let t = tune_half_period(&b, None)?.argument;
        let log_asym = log_asymptotic_period(&b);
        let ratio = (t.ln() - log_asym).exp();
        println!("{eps:>6} {t:>16.4e} {:>18.4e} {ratio:>10.6}", log_asym.exp());
    }
    Ok(())
}
