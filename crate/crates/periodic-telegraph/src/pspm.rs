//! The periodic stationary probability measure (PSPM).
//!
//! For rates `phi_minus, phi_plus` with period `T`, the distribution
//! `nu(t) = (P(X_t = -1), P(X_t = +1))` obeys `dnu/dt = Q_t nu`. There is a
//! unique `T`-periodic probability solution `mu(t)`, given in closed form by
//!
//! ```text
//! mu_minus(t) = mu_minus(0) e^{-S(t)} + int_0^t phi_plus(s) e^{S(s)-S(t)} ds,
//! mu_minus(0) = I(phi_plus) / I(phi_minus + phi_plus),
//! I(f)        = int_0^T f(t) e^{S(t)-S(T)} dt,
//! ```
//!
//! where `S(t) = int_0^t (phi_minus + phi_plus)`. Every other solution decays
//! onto `mu` at the rate of the second Floquet exponent
//! `lambda2 = -S(T)/T`.
//!
//! [`Pspm`] precomputes `S` as per-cell prefix integrals over a grid of 4096
//! cells per period (cells aligned with the rate breakpoints, remainder by a
//! single in-cell Gauss-Legendre panel), which makes each closed-form
//! evaluation a small, machine-accurate quadrature.

use crate::linalg::StateVec;
use crate::ode;
use crate::quad;
use crate::rates::{RateSelector, RateSpec};
use crate::{Error, Result, DEFAULT_STEPS_PER_PERIOD, RESOLUTION_WARNING_THRESHOLD};

const CUM_CELLS: usize = 4096;

/// Cumulative integral of the sum rate over one period.
#[derive(Debug)]
pub(crate) struct SumIntegral {
    spec: RateSpec,
    grid: Vec<f64>,
    prefix: Vec<f64>,
    total: f64,
}

impl SumIntegral {
    pub(crate) fn new(spec: &RateSpec) -> Self {
        let grid = ode::period_grid(spec, CUM_CELLS);
        let mut prefix = Vec::with_capacity(grid.len());
        prefix.push(0.0);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for w in grid.windows(2) {
            let v = quad::gl16(&|t| spec.eval(t).sum(), w[0], w[1]);
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            prefix.push(sum + comp);
        }
        let total = *prefix.last().expect("non-empty grid");
        Self { spec: spec.clone(), grid, prefix, total }
    }

    /// `S(t)` for `t` in `[0, T]`.
    pub(crate) fn at(&self, t: f64) -> f64 {
        debug_assert!((0.0..=self.spec.period() * (1.0 + 1e-15)).contains(&t));
        if t >= *self.grid.last().unwrap() {
            return self.total;
        }
        let j = self.grid.partition_point(|&g| g <= t).saturating_sub(1);
        self.prefix[j] + quad::gl16(&|u| self.spec.eval(u).sum(), self.grid[j], t)
    }

    pub(crate) fn total(&self) -> f64 {
        self.total
    }
}

/// `I(f) = int_0^T f(t) e^{S(t) - S(T)} dt` for the selected rate component.
pub fn tail_weighted_integral(spec: &RateSpec, sel: RateSelector) -> f64 {
    tail_integral(&SumIntegral::new(spec), sel)
}

fn tail_integral(cum: &SumIntegral, sel: RateSelector) -> f64 {
    let spec = &cum.spec;
    let s_total = cum.total();
    let f = |t: f64| spec.eval(t).select(sel) * (cum.at(t) - s_total).exp();
    quad::integrate_segmented(&f, 0.0, spec.period(), &spec.interior_cuts())
}

/// The periodic stationary probability measure of a rate spec.
#[derive(Debug)]
pub struct Pspm {
    cum: SumIntegral,
    mu_minus_zero: f64,
    i_plus: f64,
    i_sum: f64,
}

impl Pspm {
    /// Fails with [`Error::Degenerate`] only when `phi_plus` vanishes
    /// identically (the chain is then absorbed in `+1` and no strictly
    /// positive periodic measure exists).
    pub fn new(spec: &RateSpec) -> Result<Self> {
        let cum = SumIntegral::new(spec);
        let i_plus = tail_integral(&cum, RateSelector::Plus);
        let i_sum = tail_integral(&cum, RateSelector::Sum);
        if i_plus.is_nan() || i_plus <= 0.0 {
            return Err(Error::Degenerate(
                "phi_plus integrates to zero: no strictly positive periodic measure".into(),
            ));
        }
        let mu_minus_zero = i_plus / i_sum;
        Ok(Self { cum, mu_minus_zero, i_plus, i_sum })
    }

    pub fn spec(&self) -> &RateSpec {
        &self.cum.spec
    }

    /// `mu_minus(0) = I(phi_plus) / I(phi_minus + phi_plus)`.
    pub fn mu_minus_zero(&self) -> f64 {
        self.mu_minus_zero
    }

    pub fn tail_integral_plus(&self) -> f64 {
        self.i_plus
    }

    pub fn tail_integral_sum(&self) -> f64 {
        self.i_sum
    }

    pub fn tail_integral_minus(&self) -> f64 {
        tail_integral(&self.cum, RateSelector::Minus)
    }

    /// `(mu_minus(t), mu_plus(t))` by the closed form; `t` is reduced modulo
    /// the period.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let spec = self.spec();
        let r = t.rem_euclid(spec.period());
        let s_r = self.cum.at(r);
        let weighted = |u: f64| spec.eval(u).plus * (self.cum.at(u) - s_r).exp();
        let j = quad::integrate_segmented(&weighted, 0.0, r, &spec.interior_cuts());
        let mu_minus = self.mu_minus_zero * (-s_r).exp() + j;
        (mu_minus, 1.0 - mu_minus)
    }

    /// Stationary mean number of up-crossings per period,
    /// `int_0^T phi_minus(t) mu_minus(t) dt`.
    pub fn mean_up_crossings_per_period(&self) -> f64 {
        let spec = self.spec();
        let f = |t: f64| spec.eval(t).minus * self.at(t).0;
        quad::integrate_segmented(&f, 0.0, spec.period(), &spec.interior_cuts())
    }

    /// Cumulative sum-rate integral `S(t)` for `t` in `[0, T]`.
    pub fn sum_rate_integral(&self, t: f64) -> f64 {
        self.cum.at(t)
    }
}

/// Second Floquet exponent of the distribution flow,
/// `lambda2 = -(1/T) int_0^T (phi_minus + phi_plus)`.
pub fn second_floquet_exponent(spec: &RateSpec) -> f64 {
    -spec.integrate(RateSelector::Sum, 0.0, spec.period()) / spec.period()
}

/// The periodic fixed point of the integrator's one-period map, sampled at
/// the given offsets in `[0, T]` — the ODE-side counterpart of [`Pspm::at`],
/// sharing no code with the closed form.
pub fn ode_periodic_fixed_point(
    spec: &RateSpec,
    steps_per_period: usize,
    offsets: &[f64],
) -> Result<Vec<DistributionState>> {
    if steps_per_period < 16 {
        return Err(Error::InvalidArgument(format!(
            "steps_per_period must be >= 16, got {steps_per_period}"
        )));
    }
    let grid = ode::period_grid(spec, steps_per_period);
    let col_minus = ode::run_one_period(spec, 1.0, StateVec::new(1.0, 0.0), &grid);
    let col_plus = ode::run_one_period(spec, 1.0, StateVec::new(0.0, 1.0), &grid);
    // the map is column-stochastic; its fixed probability vector is
    // proportional to (m12, m21)
    let denom = col_plus.minus + col_minus.plus;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Degenerate("one-period map has no interior fixed point".into()));
    }
    let fixed = StateVec::new(col_plus.minus / denom, col_minus.plus / denom);
    let states = ode::run_one_period_at(spec, 1.0, fixed, steps_per_period, offsets);
    Ok(offsets
        .iter()
        .zip(states)
        .map(|(&t, y)| DistributionState::new(t, y.minus, y.plus))
        .collect())
}

/// A distribution (or signed Floquet-basis vector) at a time instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionState {
    pub t: f64,
    pub minus: f64,
    pub plus: f64,
}

impl DistributionState {
    pub fn new(t: f64, minus: f64, plus: f64) -> Self {
        Self { t, minus, plus }
    }

    pub fn vec(&self) -> StateVec {
        StateVec::new(self.minus, self.plus)
    }
}

/// Trajectory of the distribution ODE sampled at every integrator step.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub states: Vec<DistributionState>,
    /// Largest component shift of the final state under step halving.
    pub richardson_shift: f64,
}

impl Evolution {
    pub fn final_state(&self) -> DistributionState {
        *self.states.last().expect("trajectory contains the initial state")
    }

    /// True when the Richardson check moved the result by more than the
    /// resolution threshold; escalated by the CLI under `--strict`.
    pub fn resolution_warning(&self) -> bool {
        self.richardson_shift > RESOLUTION_WARNING_THRESHOLD
    }
}

/// Integrate `dnu/dt = Q_t nu` from `nu0.t = 0` with fixed-step RK4, sampling
/// at step boundaries. The component sum is conserved exactly by the scheme
/// (each stage has zero column sums), so probability inputs stay normalized
/// to rounding.
pub fn evolve_distribution(
    spec: &RateSpec,
    nu0: DistributionState,
    horizon: f64,
    steps_per_period: usize,
) -> Result<Evolution> {
    if steps_per_period < 16 {
        return Err(Error::InvalidArgument(format!(
            "steps_per_period must be >= 16, got {steps_per_period}"
        )));
    }
    if !crate::positive_finite(horizon) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    if !nu0.vec().is_finite() {
        return Err(Error::InvalidArgument("initial distribution has non-finite components".into()));
    }

    let y0 = nu0.vec();
    let mut states = vec![DistributionState::new(0.0, y0.minus, y0.plus)];
    let end = ode::run_horizon(spec, 1.0, y0, horizon, steps_per_period, |t, y| {
        states.push(DistributionState::new(t, y.minus, y.plus));
    });
    let coarse = ode::run_horizon(spec, 1.0, y0, horizon, (steps_per_period / 2).max(8), |_, _| {});
    let richardson_shift = (end.minus - coarse.minus)
        .abs()
        .max((end.plus - coarse.plus).abs());
    Ok(Evolution { states, richardson_shift })
}

/// Measured decay of an initial distribution onto the PSPM.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    /// Least-squares slope of `log ||nu(kT) - mu(kT)||` against `kT`;
    /// equals the second Floquet exponent.
    pub slope: f64,
    /// Coefficient of the decaying Floquet mode in the initial condition.
    pub beta: f64,
}

/// Fit the decay rate of `nu` towards the PSPM over `periods` periods.
///
/// `beta` comes from the closed form
/// `(nu_plus(0) - nu_minus(0))/2 + (I(phi_plus) - I(phi_minus)) / (2 I(phi_minus+phi_plus))`
/// (for probability inputs); when it vanishes the initial condition already
/// lies on the periodic solution and no decay rate is measurable.
pub fn convergence_rate_estimate(
    spec: &RateSpec,
    nu0: DistributionState,
    periods: usize,
) -> Result<DecayFit> {
    if periods < 5 {
        return Err(Error::InvalidArgument(format!("periods must be >= 5, got {periods}")));
    }
    let y0 = nu0.vec();
    if !y0.is_finite() || y0.minus < 0.0 || y0.plus < 0.0 || (y0.sum() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(
            "initial condition must be a probability distribution".into(),
        ));
    }

    let pspm = Pspm::new(spec)?;
    let alpha = y0.sum();
    let i_minus = pspm.tail_integral_minus();
    let beta = 0.5 * (y0.plus - y0.minus)
        + alpha * (pspm.tail_integral_plus() - i_minus) / (2.0 * pspm.tail_integral_sum());
    if beta.abs() < 1e-13 {
        return Err(Error::Degenerate(
            "beta = 0: initial condition already on the periodic solution".into(),
        ));
    }

    // The flow is linear, so evolving the difference nu - mu IS
    // nu(t) - mu(t); working at the scale of the difference keeps the fit
    // clean over many decades of decay.
    let mu0 = StateVec::new(pspm.mu_minus_zero(), 1.0 - pspm.mu_minus_zero());
    let d0 = y0 - mu0;
    let t_per = spec.period();
    let ends = ode::run_periods(spec, 1.0, d0, periods, DEFAULT_STEPS_PER_PERIOD);
    let mut xs = vec![0.0];
    let mut ys = vec![d0.norm().ln()];
    for (k, d) in ends.iter().enumerate() {
        let err = d.norm();
        if err > 0.0 {
            xs.push((k + 1) as f64 * t_per);
            ys.push(err.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Degenerate("decay reached zero too quickly to fit a slope".into()));
    }
    Ok(DecayFit { slope: least_squares_slope(&xs, &ys), beta })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn tail_integral_symbolic_oracles() {
        // int_0^1 2 e^{-2(1-t)} dt = 1 - e^{-2}
        let spec = RateSpec::constant(1.0, 1.0, 1.0).unwrap();
        let v = tail_weighted_integral(&spec, RateSelector::Sum);
        assert!(rel_close(v, 1.0 - (-2.0f64).exp(), 1e-13));

        // int_0^1 1 e^{-3(1-t)} dt = (1 - e^{-3})/3
        let spec = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        let v = tail_weighted_integral(&spec, RateSelector::Plus);
        assert!(rel_close(v, (1.0 - (-3.0f64).exp()) / 3.0, 1e-13));
    }

    #[test]
    fn tail_integral_sum_self_check() {
        // I(phi_minus + phi_plus) = 1 - e^{-S(T)} for every spec.
        for spec in [
            RateSpec::constant(2.0, 1.0, 1.0).unwrap(),
            RateSpec::half_period(3.0, 5.0, 2.0).unwrap(),
            RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap(),
            RateSpec::arrhenius_half(1.0, 1.0, 2.0, 1.0, 0.1, 1.0e5).unwrap(),
        ] {
            let i_sum = tail_weighted_integral(&spec, RateSelector::Sum);
            let s_total = spec.integrate(RateSelector::Sum, 0.0, spec.period());
            let closed = -(-s_total).exp_m1();
            assert!(rel_close(i_sum, closed, 1e-12), "I(sum)={i_sum} vs closed={closed}");
        }
    }

    #[test]
    fn constant_rates_give_homogeneous_stationary_value() {
        let spec = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        let pspm = Pspm::new(&spec).unwrap();
        for t in [0.0, 0.3, 0.77, 5.21] {
            let (m, p) = pspm.at(t);
            assert!(rel_close(m, 1.0 / 3.0, 1e-12));
            assert!(rel_close(p, 2.0 / 3.0, 1e-12));
        }
    }

    #[test]
    fn symmetric_half_period_gives_one_half() {
        let spec = RateSpec::half_period(0.7, 0.7, 2.0).unwrap();
        let pspm = Pspm::new(&spec).unwrap();
        for t in [0.0, 0.5, 1.0, 1.9] {
            assert!(rel_close(pspm.at(t).0, 0.5, 1e-12));
        }
    }

    #[test]
    fn sin_constant_trace_mu_zero_closed_form() {
        // mu_minus(0) = 1/2 - 2*a*eps^2/(4 a^2 eps^2 + omega^2)
        let spec = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap();
        let pspm = Pspm::new(&spec).unwrap();
        let omega2 = std::f64::consts::TAU * std::f64::consts::TAU;
        let expected = 0.5 - 4.0 / (16.0 + omega2);
        assert!(rel_close(pspm.mu_minus_zero(), expected, 1e-12));
        assert!(rel_close(pspm.at(0.0).0, expected, 1e-12));
    }

    #[test]
    fn pspm_is_periodic_and_strictly_inside() {
        for spec in [
            RateSpec::half_period(3.0, 5.0, 2.0).unwrap(),
            RateSpec::sin_constant_trace(0.5, 1.5, 2.0).unwrap(),
            RateSpec::tabulated(vec![1.0, 2.0, 0.5, 1.5], vec![0.2, 0.1, 2.0, 1.0], 3.0).unwrap(),
        ] {
            let pspm = Pspm::new(&spec).unwrap();
            let t_per = spec.period();
            let (m0, _) = pspm.at(0.0);
            let (mt, _) = pspm.at(t_per * (1.0 - 1e-14));
            assert!((m0 - mt).abs() < 1e-10);
            for i in 0..200 {
                let (m, p) = pspm.at(t_per * i as f64 / 200.0);
                assert!(m > 0.0 && m < 1.0, "mu_minus out of range: {m}");
                assert!((m + p - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pspm_strictly_positive_on_dense_grid() {
        for spec in [
            RateSpec::constant(2.0, 1.0, 1.0).unwrap(),
            RateSpec::arrhenius_half(1.0, 1.0, 2.0, 1.0, 0.1, 1.0e5).unwrap(),
            RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap(),
        ] {
            let pspm = Pspm::new(&spec).unwrap();
            let t_per = spec.period();
            for i in 0..10_000 {
                let m = pspm.at(t_per * i as f64 / 10_000.0).0;
                assert!(m > 0.0 && m < 1.0, "mu_minus out of (0,1): {m}");
            }
        }
    }

    #[test]
    fn second_floquet_exponent_examples() {
        let c = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        assert!(rel_close(second_floquet_exponent(&c), -3.0, 1e-13));
        let h = RateSpec::half_period(3.0, 5.0, 2.0).unwrap();
        assert!(rel_close(second_floquet_exponent(&h), -8.0, 1e-13));
        let s = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap();
        assert!(rel_close(second_floquet_exponent(&s), -4.0, 1e-12));
    }

    #[test]
    fn evolve_conserves_sum_and_matches_scalar_solution() {
        let spec = RateSpec::constant(1.0, 1.0, 1.0).unwrap();
        let evo = evolve_distribution(&spec, DistributionState::new(0.0, 1.0, 0.0), 3.0, 256)
            .unwrap();
        for s in &evo.states {
            assert!((s.minus + s.plus - 1.0).abs() < 1e-13);
            let exact = 0.5 + 0.5 * (-2.0 * s.t).exp();
            assert!((s.minus - exact).abs() < 1e-10, "t={} minus={}", s.t, s.minus);
        }
        assert!(!evo.resolution_warning());
    }

    #[test]
    fn evolve_from_pspm_is_a_fixed_point() {
        let spec = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap();
        let pspm = Pspm::new(&spec).unwrap();
        let mu0 = pspm.mu_minus_zero();
        let evo = evolve_distribution(
            &spec,
            DistributionState::new(0.0, mu0, 1.0 - mu0),
            spec.period(),
            DEFAULT_STEPS_PER_PERIOD,
        )
        .unwrap();
        let end = evo.final_state();
        assert!((end.minus - mu0).abs() < 1e-10);
    }

    #[test]
    fn floquet_basis_vector_decays_with_the_sum_rate_exponent() {
        // rho(t) = (-e^{-S(t)}, e^{-S(t)}) solves the distribution ODE.
        let spec = RateSpec::half_period(3.0, 5.0, 2.0).unwrap();
        let evo = evolve_distribution(&spec, DistributionState::new(0.0, -1.0, 1.0), 1.5, 8192)
            .unwrap();
        let s = spec.integrate(RateSelector::Sum, 0.0, 1.5);
        let end = evo.final_state();
        assert!(rel_close(end.plus, (-s).exp(), 1e-10));
        assert!(rel_close(end.minus, -(-s).exp(), 1e-10));
    }

    #[test]
    fn evolve_rejects_bad_arguments() {
        let spec = RateSpec::constant(1.0, 1.0, 1.0).unwrap();
        assert!(evolve_distribution(&spec, DistributionState::new(0.0, 1.0, 0.0), 1.0, 8).is_err());
        assert!(evolve_distribution(&spec, DistributionState::new(0.0, f64::NAN, 0.0), 1.0, 64)
            .is_err());
        assert!(evolve_distribution(&spec, DistributionState::new(0.0, 1.0, 0.0), -1.0, 64).is_err());
    }

    #[test]
    fn decay_slope_matches_second_floquet_exponent() {
        let spec = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        let fit = convergence_rate_estimate(&spec, DistributionState::new(0.0, 1.0, 0.0), 10)
            .unwrap();
        assert!(rel_close(fit.slope, -3.0, 1e-9), "slope={}", fit.slope);

        let spec = RateSpec::half_period(3.0, 5.0, 2.0).unwrap();
        let fit = convergence_rate_estimate(&spec, DistributionState::new(0.0, 0.0, 1.0), 10)
            .unwrap();
        assert!(rel_close(fit.slope, -8.0, 1e-9), "slope={}", fit.slope);
    }

    #[test]
    fn decay_from_pspm_is_degenerate() {
        let spec = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        let pspm = Pspm::new(&spec).unwrap();
        let nu0 = DistributionState::new(0.0, pspm.mu_minus_zero(), 1.0 - pspm.mu_minus_zero());
        match convergence_rate_estimate(&spec, nu0, 10) {
            Err(Error::Degenerate(_)) => {}
            other => panic!("expected degenerate, got {other:?}"),
        }
    }

    #[test]
    fn period_map_contracts_at_the_floquet_rate() {
        let spec = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap();
        let t_per = spec.period();
        let grid = ode::period_grid(&spec, DEFAULT_STEPS_PER_PERIOD);
        // distance between two probability rows contracts by e^{lambda2 T}
        let a = ode::run_one_period(&spec, 1.0, StateVec::new(1.0, 0.0), &grid);
        let b = ode::run_one_period(&spec, 1.0, StateVec::new(0.0, 1.0), &grid);
        let contraction = (a - b).norm() / StateVec::new(1.0, -1.0).norm();
        let expected = (second_floquet_exponent(&spec) * t_per).exp();
        assert!(rel_close(contraction, expected, 1e-8));
    }
}
