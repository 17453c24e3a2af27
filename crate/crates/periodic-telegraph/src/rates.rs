//! `T`-periodic transition-rate pairs.
//!
//! A [`RateSpec`] holds the two exit rates `phi_minus` (leaving state `-1`)
//! and `phi_plus` (leaving `+1`) as one of five closed families, validated at
//! construction so that evaluation never fails:
//!
//! * `constant` — time-homogeneous rates.
//! * `half_period` — `phi_minus` equals `phi0` on `[0, T/2)` and `phi1` on
//!   `[T/2, T)`, with `phi_plus = phi0 + phi1 - phi_minus`.
//! * `arrhenius_half` — a `half_period` pair with levels
//!   `phi0 = p*exp(-V/eps)` and `phi1 = q*exp(-v/eps)`, `v < V`.
//! * `sin_constant_trace` — `phi_minus = eps*(a + cos(omega t))`,
//!   `phi_plus = eps*(a - cos(omega t))`, period forced to `2*pi/omega`; the
//!   sum of the rates is the constant `2*eps*a`.
//! * `tabulated` — uniform samples over `[0, T)` with piecewise-linear,
//!   periodic interpolation.
//!
//! Rates must satisfy `phi_minus(t) > 0` and `phi_plus(t) >= 0` everywhere.
//! Piecewise specs are right-continuous at their breakpoints. Evaluation
//! reduces the time argument modulo the period with `f64::rem_euclid`, which
//! is exact, so `eval(t + k*T)` returns bit-identical values whenever
//! `t + k*T` is itself exactly representable.
//!
//! The JSON document format accepted by the CLI maps onto the constructors,
//! e.g. `{"kind":"arrhenius_half","p":1,"q":1,"V":2,"v":1,"eps":0.1,"T":1000}`
//! or `{"kind":"sin_constant_trace","eps":1,"a":2,"omega":6.2831853}`.

use serde::{Deserialize, Serialize};

use crate::quad;
use crate::{Error, Result};

/// Rate pair at one time instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    /// Exit rate of state `-1`.
    pub minus: f64,
    /// Exit rate of state `+1`.
    pub plus: f64,
}

impl Rates {
    pub fn sum(self) -> f64 {
        self.minus + self.plus
    }

    pub fn select(self, sel: RateSelector) -> f64 {
        match sel {
            RateSelector::Minus => self.minus,
            RateSelector::Plus => self.plus,
            RateSelector::Sum => self.sum(),
        }
    }
}

/// Which scalar function of the rate pair an integral targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateSelector {
    Minus,
    Plus,
    Sum,
}

/// Suprema and discontinuity structure of a spec over one period.
#[derive(Clone, Debug, PartialEq)]
pub struct RateBounds {
    pub sup_minus: f64,
    pub sup_plus: f64,
    /// Every point of `[0, T)` where a rate (or, for `tabulated`, its slope)
    /// jumps; empty for smooth kinds. Sorted ascending.
    pub breakpoints: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Constant {
        minus: f64,
        plus: f64,
    },
    HalfPeriod {
        first: f64,
        second: f64,
    },
    ArrheniusHalf {
        p: f64,
        q: f64,
        barrier_high: f64,
        barrier_low: f64,
        eps: f64,
        first: f64,
        second: f64,
    },
    SinConstantTrace {
        eps: f64,
        a: f64,
        omega: f64,
    },
    Tabulated {
        minus: Vec<f64>,
        plus: Vec<f64>,
    },
}

/// A validated `T`-periodic pair of transition rates. Immutable after
/// construction; safe to share across threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDoc", into = "SpecDoc")]
pub struct RateSpec {
    period: f64,
    kind: Kind,
}

impl RateSpec {
    pub fn constant(phi_minus: f64, phi_plus: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        if !crate::positive_finite(phi_minus) {
            return Err(Error::InvalidSpec(format!(
                "constant: phi_minus must be > 0, got {phi_minus}"
            )));
        }
        if !phi_plus.is_finite() || phi_plus < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "constant: phi_plus must be >= 0, got {phi_plus}"
            )));
        }
        Ok(Self {
            period,
            kind: Kind::Constant { minus: phi_minus, plus: phi_plus },
        })
    }

    pub fn half_period(phi0: f64, phi1: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        for (name, v) in [("phi0", phi0), ("phi1", phi1)] {
            if !crate::positive_finite(v) {
                return Err(Error::InvalidSpec(format!("half_period: {name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            period,
            kind: Kind::HalfPeriod { first: phi0, second: phi1 },
        })
    }

    /// Half-period levels `phi0 = p*exp(-V/eps)`, `phi1 = q*exp(-v/eps)`.
    pub fn arrhenius_half(
        p: f64,
        q: f64,
        barrier_high: f64,
        barrier_low: f64,
        eps: f64,
        period: f64,
    ) -> Result<Self> {
        check_period(period)?;
        for (name, v) in [("p", p), ("q", q), ("eps", eps)] {
            if !crate::positive_finite(v) {
                return Err(Error::InvalidSpec(format!("arrhenius_half: {name} must be > 0, got {v}")));
            }
        }
        if !barrier_low.is_finite() || !barrier_high.is_finite() || barrier_low >= barrier_high {
            return Err(Error::InvalidSpec(format!(
                "arrhenius_half: barriers must satisfy v < V, got v={barrier_low}, V={barrier_high}"
            )));
        }
        let first = p * (-barrier_high / eps).exp();
        let second = q * (-barrier_low / eps).exp();
        if first <= 0.0 || second <= 0.0 || !first.is_finite() || !second.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "arrhenius_half: derived levels ({first:e}, {second:e}) leave (0, inf)"
            )));
        }
        Ok(Self {
            period,
            kind: Kind::ArrheniusHalf { p, q, barrier_high, barrier_low, eps, first, second },
        })
    }

    /// `phi_minus = eps*(a + cos(omega t))`, period `2*pi/omega`. `a > 1`
    /// keeps both rates strictly positive.
    pub fn sin_constant_trace(eps: f64, a: f64, omega: f64) -> Result<Self> {
        if !crate::positive_finite(eps) {
            return Err(Error::InvalidSpec(format!("sin_constant_trace: eps must be > 0, got {eps}")));
        }
        if !a.is_finite() || a <= 1.0 {
            return Err(Error::InvalidSpec(format!("sin_constant_trace: a must be > 1, got {a}")));
        }
        if !crate::positive_finite(omega) {
            return Err(Error::InvalidSpec(format!("sin_constant_trace: omega must be > 0, got {omega}")));
        }
        let period = std::f64::consts::TAU / omega;
        Ok(Self {
            period,
            kind: Kind::SinConstantTrace { eps, a, omega },
        })
    }

    /// Uniform samples of both rates over `[0, T)`, interpolated linearly and
    /// wrapped periodically. Negative samples are rejected, and `phi_minus`
    /// must be strictly positive at every node.
    pub fn tabulated(phi_minus: Vec<f64>, phi_plus: Vec<f64>, period: f64) -> Result<Self> {
        check_period(period)?;
        if phi_minus.len() != phi_plus.len() {
            return Err(Error::InvalidSpec(format!(
                "tabulated: sample counts differ ({} vs {})",
                phi_minus.len(),
                phi_plus.len()
            )));
        }
        if phi_minus.len() < 2 {
            return Err(Error::InvalidSpec("tabulated: need at least 2 samples".into()));
        }
        if phi_minus.iter().any(|v| !crate::positive_finite(*v)) {
            return Err(Error::InvalidSpec("tabulated: phi_minus samples must be > 0".into()));
        }
        if phi_plus.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidSpec("tabulated: phi_plus samples must be >= 0".into()));
        }
        Ok(Self {
            period,
            kind: Kind::Tabulated { minus: phi_minus, plus: phi_plus },
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Reduce `t >= 0` into `[0, T)`. `rem_euclid` on floats is exact.
    fn reduce(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "rates are defined for t >= 0");
        let r = t.rem_euclid(self.period);
        if r == self.period {
            0.0
        } else {
            r
        }
    }

    /// Rates at time `t` (right-continuous at breakpoints).
    pub fn eval(&self, t: f64) -> Rates {
        let r = self.reduce(t);
        self.eval_reduced(r)
    }

    fn eval_reduced(&self, r: f64) -> Rates {
        match &self.kind {
            Kind::Constant { minus, plus } => Rates { minus: *minus, plus: *plus },
            Kind::HalfPeriod { first, second }
            | Kind::ArrheniusHalf { first, second, .. } => {
                if r < 0.5 * self.period {
                    Rates { minus: *first, plus: *second }
                } else {
                    Rates { minus: *second, plus: *first }
                }
            }
            Kind::SinConstantTrace { eps, a, omega } => {
                let c = (omega * r).cos();
                Rates { minus: eps * (a + c), plus: eps * (a - c) }
            }
            Kind::Tabulated { minus, plus } => {
                let n = minus.len();
                let u = r / self.period * n as f64;
                let j = (u as usize).min(n - 1);
                let frac = u - j as f64;
                let k = if j + 1 == n { 0 } else { j + 1 };
                Rates {
                    minus: minus[j] + frac * (minus[k] - minus[j]),
                    plus: plus[j] + frac * (plus[k] - plus[j]),
                }
            }
        }
    }

    /// Left limits at `t`; differs from [`eval`](Self::eval) only at the jump
    /// points of piecewise-constant kinds. Used by the integrators so that a
    /// step ending on a breakpoint samples the piece it came from.
    pub(crate) fn eval_left(&self, t: f64) -> Rates {
        match &self.kind {
            Kind::HalfPeriod { first, second }
            | Kind::ArrheniusHalf { first, second, .. } => {
                let mut r = self.reduce(t);
                if r == 0.0 {
                    r = self.period; // limit from below the period boundary
                }
                if r <= 0.5 * self.period {
                    Rates { minus: *first, plus: *second }
                } else {
                    Rates { minus: *second, plus: *first }
                }
            }
            _ => self.eval(t), // continuous kinds
        }
    }

    /// `integral of the selected rate over [s, e]`, `0 <= s <= e`. Composite
    /// Gauss-Legendre whose panels never straddle a breakpoint; exact up to
    /// rounding for the piecewise-constant kinds.
    pub fn integrate(&self, sel: RateSelector, s: f64, e: f64) -> f64 {
        assert!(0.0 <= s && s <= e, "integrate: need 0 <= s <= e");
        if s == e {
            return 0.0;
        }
        let t_per = self.period;
        let span = e - s;
        let s0 = self.reduce(s);
        let mut full = (span / t_per).floor();
        let mut rem = span - full * t_per;
        if rem < 0.0 {
            full -= 1.0;
            rem += t_per;
        } else if rem >= t_per {
            full += 1.0;
            rem -= t_per;
        }
        let mut total = if full > 0.0 { full * self.integrate_within(sel, 0.0, t_per) } else { 0.0 };
        let end = s0 + rem;
        if end <= t_per {
            total += self.integrate_within(sel, s0, end);
        } else {
            total += self.integrate_within(sel, s0, t_per);
            total += self.integrate_within(sel, 0.0, end - t_per);
        }
        total
    }

    /// Integral of the selected rate over `[a, b]` with `0 <= a <= b <= T`.
    /// Gauss-Legendre nodes are strictly interior, so the closure never sees
    /// an endpoint where the one-sided limits disagree.
    pub(crate) fn integrate_within(&self, sel: RateSelector, a: f64, b: f64) -> f64 {
        let f = |t: f64| self.eval(t).select(sel);
        let cuts = self.interior_cuts();
        quad::integrate_segmented(&f, a, b, &cuts)
    }

    /// Suprema (exact for the closed-form kinds, node maximum for
    /// `tabulated`) and the breakpoint list.
    pub fn bounds(&self) -> RateBounds {
        match &self.kind {
            Kind::Constant { minus, plus } => RateBounds {
                sup_minus: *minus,
                sup_plus: *plus,
                breakpoints: Vec::new(),
            },
            Kind::HalfPeriod { first, second }
            | Kind::ArrheniusHalf { first, second, .. } => {
                let sup = first.max(*second);
                RateBounds {
                    sup_minus: sup,
                    sup_plus: sup,
                    breakpoints: vec![0.0, 0.5 * self.period],
                }
            }
            Kind::SinConstantTrace { eps, a, .. } => RateBounds {
                sup_minus: eps * (a + 1.0),
                sup_plus: eps * (a + 1.0),
                breakpoints: Vec::new(),
            },
            Kind::Tabulated { minus, plus } => {
                let max = |v: &[f64]| v.iter().cloned().fold(0.0f64, f64::max);
                let n = minus.len();
                RateBounds {
                    sup_minus: max(minus),
                    sup_plus: max(plus),
                    breakpoints: (0..n).map(|j| self.period * j as f64 / n as f64).collect(),
                }
            }
        }
    }

    /// Breakpoints strictly inside `(0, T)`; quadrature panels and integrator
    /// steps are aligned to these.
    pub(crate) fn interior_cuts(&self) -> Vec<f64> {
        self.bounds()
            .breakpoints
            .into_iter()
            .filter(|&c| c > 0.0 && c < self.period)
            .collect()
    }

    /// Constant-level pieces of the selected exit rate over one period, as
    /// `(start, end, level)` triples — `None` for kinds that are not
    /// piecewise constant. Drives the exact holding-time inversion.
    pub(crate) fn constant_pieces(&self, sel: RateSelector) -> Option<Vec<(f64, f64, f64)>> {
        let t_per = self.period;
        match &self.kind {
            Kind::Constant { minus, plus } => {
                let level = Rates { minus: *minus, plus: *plus }.select(sel);
                Some(vec![(0.0, t_per, level)])
            }
            Kind::HalfPeriod { first, second }
            | Kind::ArrheniusHalf { first, second, .. } => {
                let half = 0.5 * t_per;
                let (lo, hi) = match sel {
                    RateSelector::Minus => (*first, *second),
                    RateSelector::Plus => (*second, *first),
                    RateSelector::Sum => (first + second, first + second),
                };
                Some(vec![(0.0, half, lo), (half, t_per, hi)])
            }
            _ => None,
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if !crate::positive_finite(period) {
        return Err(Error::InvalidSpec(format!("period must be a positive real, got {period}")));
    }
    Ok(())
}

/// On-disk JSON form. Field names mirror the documented schema (`T`, `V`,
/// `v`), hence the renames.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpecDoc {
    Constant {
        phi_minus: f64,
        phi_plus: f64,
        #[serde(rename = "T")]
        period: f64,
    },
    HalfPeriod {
        phi0: f64,
        phi1: f64,
        #[serde(rename = "T")]
        period: f64,
    },
    ArrheniusHalf {
        p: f64,
        q: f64,
        #[serde(rename = "V")]
        barrier_high: f64,
        #[serde(rename = "v")]
        barrier_low: f64,
        eps: f64,
        #[serde(rename = "T")]
        period: f64,
    },
    SinConstantTrace {
        eps: f64,
        a: f64,
        omega: f64,
    },
    Tabulated {
        phi_minus: Vec<f64>,
        phi_plus: Vec<f64>,
        #[serde(rename = "T")]
        period: f64,
    },
}

impl TryFrom<SpecDoc> for RateSpec {
    type Error = Error;

    fn try_from(doc: SpecDoc) -> Result<Self> {
        match doc {
            SpecDoc::Constant { phi_minus, phi_plus, period } => {
                RateSpec::constant(phi_minus, phi_plus, period)
            }
            SpecDoc::HalfPeriod { phi0, phi1, period } => RateSpec::half_period(phi0, phi1, period),
            SpecDoc::ArrheniusHalf { p, q, barrier_high, barrier_low, eps, period } => {
                RateSpec::arrhenius_half(p, q, barrier_high, barrier_low, eps, period)
            }
            SpecDoc::SinConstantTrace { eps, a, omega } => {
                RateSpec::sin_constant_trace(eps, a, omega)
            }
            SpecDoc::Tabulated { phi_minus, phi_plus, period } => {
                RateSpec::tabulated(phi_minus, phi_plus, period)
            }
        }
    }
}

impl From<RateSpec> for SpecDoc {
    fn from(spec: RateSpec) -> Self {
        let period = spec.period;
        match spec.kind {
            Kind::Constant { minus, plus } => {
                SpecDoc::Constant { phi_minus: minus, phi_plus: plus, period }
            }
            Kind::HalfPeriod { first, second } => {
                SpecDoc::HalfPeriod { phi0: first, phi1: second, period }
            }
            Kind::ArrheniusHalf { p, q, barrier_high, barrier_low, eps, .. } => {
                SpecDoc::ArrheniusHalf { p, q, barrier_high, barrier_low, eps, period }
            }
            Kind::SinConstantTrace { eps, a, omega } => {
                SpecDoc::SinConstantTrace { eps, a, omega }
            }
            Kind::Tabulated { minus, plus } => {
                SpecDoc::Tabulated { phi_minus: minus, phi_plus: plus, period }
            }
        }
    }
}
