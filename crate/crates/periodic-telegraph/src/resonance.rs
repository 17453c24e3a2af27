//! Stochastic-resonance tuning for the two worked forcing families.
//!
//! A path "looks periodic" when it makes exactly one up-crossing per period
//! on stationary average, so the tuning target is `E_mu[N_T] = 1` and the
//! quality of an arbitrary spec is `|E_mu[N_T] - 1|`.
//!
//! Family A (`half_period`/`arrhenius_half` rates, levels
//! `phi0 = p e^{-V/eps}`, `phi1 = q e^{-v/eps}` with `v < V`):
//!
//! ```text
//! E_mu[N_T] = phi0 phi1 T / (phi0+phi1)
//!           + ((phi0-phi1)/(phi0+phi1))^2 tanh((phi0+phi1) T / 4)
//! ```
//!
//! is strictly increasing in `T`, so the tuned period is the unique root of
//! `E_mu[N_T] = 1`; for small `eps` it behaves like
//! `2 (V-v) / (q eps) * e^{v/eps}`. All arithmetic runs on `log phi0`,
//! `log phi1` so that noise intensities far below `eps ~ 0.01` neither
//! underflow nor overflow.
//!
//! Family B (`sin_constant_trace` rates `eps*(a +- cos(omega t))`): with
//! `omega = mu * eps` the tuning condition is `eps`-free and reduces to the
//! single positive root of the cubic
//! `P(mu) = mu^3 - pi a mu^2 + 4 a^2 mu + 2 pi a (1 - 2 a^2)`.

use serde::Serialize;

use crate::pspm::Pspm;
use crate::rates::RateSpec;
use crate::roots;
use crate::{Error, Result};

/// Arrhenius barrier parameters of the half-period family, without a period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierParams {
    pub p: f64,
    pub q: f64,
    /// The paper-facing `V` (barrier of the slow half).
    pub barrier_high: f64,
    /// The paper-facing `v < V`.
    pub barrier_low: f64,
    pub eps: f64,
}

impl BarrierParams {
    pub fn new(p: f64, q: f64, barrier_high: f64, barrier_low: f64, eps: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("eps", eps)] {
            if !crate::positive_finite(v) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !barrier_low.is_finite() || !barrier_high.is_finite() || barrier_low >= barrier_high {
            return Err(Error::InvalidArgument(format!(
                "barriers must satisfy v < V, got v={barrier_low}, V={barrier_high}"
            )));
        }
        Ok(Self { p, q, barrier_high, barrier_low, eps })
    }

    pub fn ln_phi0(&self) -> f64 {
        self.p.ln() - self.barrier_high / self.eps
    }

    pub fn ln_phi1(&self) -> f64 {
        self.q.ln() - self.barrier_low / self.eps
    }

    pub fn phi0(&self) -> f64 {
        self.ln_phi0().exp()
    }

    pub fn phi1(&self) -> f64 {
        self.ln_phi1().exp()
    }

    pub fn with_period(self, period: f64) -> Result<HalfPeriodParams> {
        if !crate::positive_finite(period) {
            return Err(Error::InvalidArgument(format!("period must be > 0, got {period}")));
        }
        Ok(HalfPeriodParams { barriers: self, period })
    }

    /// `E_mu[N_T]` as a function of the period, entirely in log space.
    pub fn mean_for_period(&self, period: f64) -> f64 {
        mean_from_logs(self.ln_phi0(), self.ln_phi1(), period)
    }
}

/// Barrier parameters plus a period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPeriodParams {
    pub barriers: BarrierParams,
    pub period: f64,
}

impl HalfPeriodParams {
    pub fn new(p: f64, q: f64, barrier_high: f64, barrier_low: f64, eps: f64, period: f64) -> Result<Self> {
        BarrierParams::new(p, q, barrier_high, barrier_low, eps)?.with_period(period)
    }

    /// The equivalent `arrhenius_half` rate spec.
    pub fn rate_spec(&self) -> Result<RateSpec> {
        RateSpec::arrhenius_half(
            self.barriers.p,
            self.barriers.q,
            self.barriers.barrier_high,
            self.barriers.barrier_low,
            self.barriers.eps,
            self.period,
        )
    }

    /// Closed-form `mu_minus(t)`:
    /// `((phi0-phi1)/sigma) e^{-sigma t} / (1 + e^{-sigma T/2}) + phi1/sigma`
    /// on the first half-period, extended by the symmetry
    /// `mu_minus(t + T/2) = 1 - mu_minus(t)`.
    pub fn pspm_minus(&self, t: f64) -> f64 {
        let t_per = self.period;
        let r = t.rem_euclid(t_per);
        let half = 0.5 * t_per;
        if r < half {
            self.first_half_mu(r)
        } else {
            1.0 - self.first_half_mu(r - half)
        }
    }

    fn first_half_mu(&self, t: f64) -> f64 {
        let phi0 = self.barriers.phi0();
        let phi1 = self.barriers.phi1();
        let sigma = phi0 + phi1;
        let decay = (-sigma * t).exp();
        let gate = 1.0 + (-sigma * 0.5 * self.period).exp();
        (phi0 - phi1) / sigma * decay / gate + phi1 / sigma
    }

    /// Closed-form stationary mean up-crossings per period.
    pub fn mean_up_crossings(&self) -> f64 {
        self.barriers.mean_for_period(self.period)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `sech^2`, stable for all arguments.
fn sech2(u: f64) -> f64 {
    let e = (-2.0 * u.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `E_mu[N_T] = e^{l0+l1-ls} T + tanh((l0-l1)/2)^2 tanh(sigma T/4)` with
/// `ls = logaddexp(l0, l1)`; `(phi0-phi1)/(phi0+phi1) = tanh((l0-l1)/2)`.
fn mean_from_logs(ln_phi0: f64, ln_phi1: f64, period: f64) -> f64 {
    let ln_sigma = log_add_exp(ln_phi0, ln_phi1);
    let term1 = (ln_phi0 + ln_phi1 - ln_sigma + period.ln()).exp();
    let contrast = ((ln_phi0 - ln_phi1) * 0.5).tanh();
    let u = (ln_sigma + period.ln() - (4.0f64).ln()).exp();
    term1 + contrast * contrast * u.tanh()
}

/// Derivative of [`mean_from_logs`] with respect to `log T`.
fn mean_dlog_t(ln_phi0: f64, ln_phi1: f64, period: f64) -> f64 {
    let ln_sigma = log_add_exp(ln_phi0, ln_phi1);
    let term1 = (ln_phi0 + ln_phi1 - ln_sigma + period.ln()).exp();
    let contrast = ((ln_phi0 - ln_phi1) * 0.5).tanh();
    let u = (ln_sigma + period.ln() - (4.0f64).ln()).exp();
    term1 + contrast * contrast * sech2(u) * u
}

/// Outcome of a tuning solve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TuningResult {
    /// The tuned quantity (`T_opt` for the half-period family, `mu_opt` for
    /// the constant-trace family).
    pub argument: f64,
    /// `|E_mu[N_T] - 1|` respectively `|P(mu_opt)|` at the returned argument.
    pub residual: f64,
    pub iterations: u32,
    /// Final solver bracket around the argument.
    pub bracket: (f64, f64),
}

/// Solve `E_mu[N_T] = 1` for the period. The mean is strictly increasing in
/// `T`, so the root is unique. An explicit `bracket` in period units may be
/// supplied; otherwise (or when it does not straddle the target) brackets
/// expand geometrically from the small-noise asymptotic, failing after 200
/// doublings.
pub fn tune_half_period(b: &BarrierParams, bracket: Option<(f64, f64)>) -> Result<TuningResult> {
    let l0 = b.ln_phi0();
    let l1 = b.ln_phi1();
    // solve in x = log T
    let g = |x: f64| mean_from_logs(l0, l1, x.exp()) - 1.0;
    let dg = |x: f64| mean_dlog_t(l0, l1, x.exp());

    let (lo, hi) = match bracket {
        Some((a, c)) if a > 0.0 && c > a && g(a.ln()) <= 0.0 && g(c.ln()) >= 0.0 => (a.ln(), c.ln()),
        _ => {
            let seed = log_asymptotic_period(b);
            let mut lo = seed;
            let mut hi = seed;
            let mut n = 0u32;
            while g(lo) > 0.0 {
                lo -= std::f64::consts::LN_2;
                n += 1;
                if n > 200 {
                    return Err(Error::BracketFailure(
                        "mean stayed above 1 after 200 period halvings".into(),
                    ));
                }
            }
            n = 0;
            while g(hi) < 0.0 {
                hi += std::f64::consts::LN_2;
                n += 1;
                if n > 200 {
                    return Err(Error::BracketFailure(
                        "mean stayed below 1 after 200 period doublings".into(),
                    ));
                }
            }
            (lo, hi)
        }
    };

    let solved = roots::solve_bracketed(g, Some(dg), lo, hi);
    Ok(TuningResult {
        argument: solved.x.exp(),
        residual: solved.residual,
        iterations: solved.iterations,
        bracket: (solved.bracket.0.exp(), solved.bracket.1.exp()),
    })
}

/// Small-noise asymptotic of the tuned period,
/// `T_opt ~ 2 (V-v) / (q eps) * e^{v/eps}`.
///
/// This is the constant produced by the tuning equation itself: substituting
/// `U = (phi0+phi1) T / 4` gives `U -> (V-v)/(2 eps)`, hence
/// `T = 4U/(phi0+phi1) ~ 2(V-v)/(q eps) e^{v/eps}`. May overflow to infinity
/// for extreme `eps`; use [`log_asymptotic_period`] then.
pub fn asymptotic_period(b: &BarrierParams) -> f64 {
    log_asymptotic_period(b).exp()
}

/// `log` of [`asymptotic_period`]; never overflows.
pub fn log_asymptotic_period(b: &BarrierParams) -> f64 {
    (2.0 * (b.barrier_high - b.barrier_low)).ln() - b.q.ln() - b.eps.ln()
        + b.barrier_low / b.eps
}

/// `|E_mu[N_T] - 1|` for an arbitrary rate spec, by quadrature against the
/// PSPM. Zero exactly at tuned parameters.
pub fn quality_measure(spec: &RateSpec) -> Result<f64> {
    Ok((Pspm::new(spec)?.mean_up_crossings_per_period() - 1.0).abs())
}

/// Closed-form values for the constant-trace family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantTraceValues {
    /// `mu_minus(0) = 1/2 - 2 a eps^2 / (4 a^2 eps^2 + omega^2)`.
    pub mu_minus_zero: f64,
    /// `E_mu[N_T] = eps a T / 2 - eps^3 a T / (4 eps^2 a^2 + omega^2)`,
    /// `T = 2 pi / omega`.
    pub mean_up_crossings: f64,
}

pub fn constant_trace_values(eps: f64, a: f64, omega: f64) -> Result<ConstantTraceValues> {
    if !crate::positive_finite(eps) || !crate::positive_finite(omega) || !a.is_finite() || a <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need eps > 0, a > 1, omega > 0; got eps={eps}, a={a}, omega={omega}"
        )));
    }
    let period = std::f64::consts::TAU / omega;
    let denom = 4.0 * a * a * eps * eps + omega * omega;
    Ok(ConstantTraceValues {
        mu_minus_zero: 0.5 - 2.0 * a * eps * eps / denom,
        mean_up_crossings: eps * a * period / 2.0 - eps.powi(3) * a * period / denom,
    })
}

/// The tuning cubic of the constant-trace family,
/// `P(mu) = mu^3 - pi a mu^2 + 4 a^2 mu + 2 pi a (1 - 2 a^2)`, evaluated by
/// Horner's scheme. With `omega = mu_root * eps` the stationary mean is 1 for
/// every `eps`.
pub fn constant_trace_cubic(mu: f64, a: f64) -> f64 {
    let pi_a = std::f64::consts::PI * a;
    ((mu - pi_a) * mu + 4.0 * a * a) * mu + 2.0 * pi_a * (1.0 - 2.0 * a * a)
}

fn constant_trace_cubic_deriv(mu: f64, a: f64) -> f64 {
    (3.0 * mu - 2.0 * std::f64::consts::PI * a) * mu + 4.0 * a * a
}

/// Find the single positive root of the tuning cubic. `P` is increasing
/// (its derivative has negative discriminant) and `P(0) < 0` for `a > 1`, so
/// a sign-scan bracket always exists.
pub fn tune_constant_trace(a: f64) -> Result<TuningResult> {
    if !a.is_finite() || a <= 1.0 {
        return Err(Error::InvalidArgument(format!("a must be > 1, got {a}")));
    }
    let f = |mu: f64| constant_trace_cubic(mu, a);
    let df = |mu: f64| constant_trace_cubic_deriv(mu, a);
    let mut hi = std::f64::consts::PI * a;
    let mut n = 0u32;
    while f(hi) < 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return Err(Error::BracketFailure("cubic stayed negative after 200 doublings".into()));
        }
    }
    let solved = roots::solve_bracketed(f, Some(df), 0.0, hi);
    Ok(TuningResult {
        argument: solved.x,
        residual: solved.residual,
        iterations: solved.iterations,
        bracket: solved.bracket,
    })
}
