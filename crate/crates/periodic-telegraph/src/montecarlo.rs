//! Exact path simulation of the periodically forced chain.
//!
//! Holding times are drawn from the exact inhomogeneous-exponential law
//! `P(hold > tau | start at s) = exp(-int_s^{s+tau} phi(u) du)`:
//!
//! * piecewise-constant kinds (`constant`, `half_period`, `arrhenius_half`)
//!   invert the cumulative hazard in closed form, piece by piece, with a
//!   whole-period fast path;
//! * smooth kinds (`sin_constant_trace`, `tabulated`) use thinning against
//!   the rate supremum, which is exact in distribution.
//!
//! Every path owns a counter-derived random stream (`base_seed` and the path
//! index fix the stream), so ensembles are reproducible bit-for-bit no matter
//! how many worker threads run them, and aggregation walks paths in index
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pspm::Pspm;
use crate::rates::{RateSelector, RateSpec};
use crate::{Error, Result};

/// Hard cap on the expected number of jumps in one path.
pub const DEFAULT_JUMP_CAP: u64 = 100_000_000;

/// Chain state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    Minus,
    Plus,
}

impl State {
    pub fn flip(self) -> State {
        match self {
            State::Minus => State::Plus,
            State::Plus => State::Minus,
        }
    }

    /// The exit-rate selector for this state.
    fn exit_selector(self) -> RateSelector {
        match self {
            State::Minus => RateSelector::Minus,
            State::Plus => RateSelector::Plus,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            State::Minus => -1,
            State::Plus => 1,
        }
    }
}

/// One realized trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub seed: u64,
    pub initial_state: State,
    /// Strictly increasing jump times in `(0, horizon]`.
    pub jump_times: Vec<f64>,
    pub final_state: State,
    /// Number of `-1 -> +1` jumps up to the horizon.
    pub n_up: u64,
}

impl PathSample {
    /// Total time spent in state `-1`.
    pub fn occupation_minus(&self, horizon: f64) -> f64 {
        let mut occ = 0.0;
        let mut prev = 0.0;
        let mut s = self.initial_state;
        for &t in &self.jump_times {
            if s == State::Minus {
                occ += t - prev;
            }
            prev = t;
            s = s.flip();
        }
        if s == State::Minus {
            occ += horizon - prev;
        }
        occ
    }
}

/// Simulate one path. Deterministic in `(seed, initial_state, horizon, spec)`.
pub fn sample_path(spec: &RateSpec, seed: u64, initial_state: State, horizon: f64) -> Result<PathSample> {
    sample_path_with_cap(spec, seed, initial_state, horizon, DEFAULT_JUMP_CAP)
}

pub fn sample_path_with_cap(
    spec: &RateSpec,
    seed: u64,
    initial_state: State,
    horizon: f64,
    jump_cap: u64,
) -> Result<PathSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (jump_times, final_state, n_up) =
        simulate(spec, &mut rng, initial_state, horizon, jump_cap)?;
    Ok(PathSample { seed, initial_state, jump_times, final_state, n_up })
}

fn simulate(
    spec: &RateSpec,
    rng: &mut ChaCha8Rng,
    initial_state: State,
    horizon: f64,
    jump_cap: u64,
) -> Result<(Vec<f64>, State, u64)> {
    if !crate::positive_finite(horizon) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let bounds = spec.bounds();
    let expected_upper = horizon * bounds.sup_minus.max(bounds.sup_plus);
    if expected_upper > jump_cap as f64 {
        return Err(Error::ResourceExhausted(format!(
            "expected jump count ~{expected_upper:.3e} exceeds the cap of {jump_cap}"
        )));
    }

    let mut jumps = Vec::new();
    let mut state = initial_state;
    let mut n_up = 0u64;
    let mut t = 0.0f64;
    loop {
        let sel = state.exit_selector();
        let next = match spec.constant_pieces(sel) {
            Some(pieces) => {
                let budget = unit_exponential(rng);
                let tau = invert_hazard(&pieces, spec.period(), t, budget);
                t + tau
            }
            None => {
                let sup = match sel {
                    RateSelector::Minus => bounds.sup_minus,
                    _ => bounds.sup_plus,
                };
                next_jump_thinning(spec, sel, sup, t, horizon, rng)
                    .unwrap_or(f64::INFINITY)
            }
        };
        if next.is_nan() || next > horizon {
            break;
        }
        // guard against ties at floating-point resolution
        let next = if next > t { next } else { f64::from_bits(t.to_bits() + 1) };
        if next > horizon {
            break;
        }
        jumps.push(next);
        if state == State::Minus {
            n_up += 1;
        }
        state = state.flip();
        t = next;
        if jumps.len() as u64 > jump_cap {
            return Err(Error::ResourceExhausted(format!(
                "path exceeded the jump cap of {jump_cap}"
            )));
        }
    }
    Ok((jumps, state, n_up))
}

fn unit_exponential(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return -(-u).ln_1p();
        }
    }
}

/// Solve `int_start^{start+tau} rate = budget` for piecewise-constant rates
/// given as `(piece_start, piece_end, level)` over one period.
fn invert_hazard(pieces: &[(f64, f64, f64)], t_per: f64, start: f64, budget: f64) -> f64 {
    let per_period: f64 = pieces.iter().map(|&(a, b, lvl)| lvl * (b - a)).sum();
    let mut pos = start.rem_euclid(t_per);
    let mut remaining = budget;
    let mut elapsed = 0.0;
    loop {
        let idx = pieces
            .iter()
            .position(|&(a, b, _)| pos >= a && pos < b)
            .unwrap_or(pieces.len() - 1);
        let (_, end, lvl) = pieces[idx];
        let cap = lvl * (end - pos);
        if lvl > 0.0 && remaining <= cap {
            return elapsed + remaining / lvl;
        }
        remaining -= cap;
        elapsed += end - pos;
        pos = end;
        if pos >= t_per {
            pos = 0.0;
            if per_period <= 0.0 {
                return f64::INFINITY;
            }
            // skip whole periods, keeping one period of slack so that
            // floating-point rounding can never overshoot the budget
            let k = (remaining / per_period).floor() - 1.0;
            if k >= 1.0 {
                remaining -= k * per_period;
                elapsed += k * t_per;
            }
        }
    }
}

/// First accepted proposal of the thinning scheme, or `None` once proposals
/// pass the horizon (later acceptances could only be later still).
fn next_jump_thinning(
    spec: &RateSpec,
    sel: RateSelector,
    sup: f64,
    mut t: f64,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Option<f64> {
    loop {
        t += unit_exponential(rng) / sup;
        if t > horizon {
            return None;
        }
        let rate = spec.eval(t).select(sel);
        if rng.gen::<f64>() * sup < rate {
            return Some(t);
        }
    }
}

/// How ensemble paths pick their state at time zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Fixed(State),
    /// Draw from the PSPM at time 0; stationary ensembles estimate the
    /// per-period means without a transient bias.
    Stationary,
}

/// Ensemble parameters.
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub horizon: f64,
    /// Points at which to estimate the moment generating function.
    pub etas: Vec<f64>,
    pub base_seed: u64,
    pub initial: InitialCondition,
    pub jump_cap: u64,
}

impl EnsembleConfig {
    pub fn new(n_paths: usize, horizon: f64, base_seed: u64) -> Self {
        Self {
            n_paths,
            horizon,
            etas: Vec::new(),
            base_seed,
            initial: InitialCondition::Stationary,
            jump_cap: DEFAULT_JUMP_CAP,
        }
    }
}

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub eta: f64,
    pub value: f64,
    pub std_error: f64,
    /// `log(value) / horizon`, comparable to the Floquet exponents.
    pub log_rate: f64,
}

/// Ensemble summary statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_paths: usize,
    pub horizon: f64,
    /// Periods covered by the horizon.
    pub periods: f64,
    /// Up-crossings per unit time.
    pub mean_rate: Estimate,
    /// Up-crossings per period.
    pub per_period: Estimate,
    /// Fraction of time spent in state `-1`.
    pub occupancy_minus: Estimate,
    pub mgf: Vec<MgfEstimate>,
    /// Etas whose MGF estimate has relative standard error above 50%
    /// (heavy-tailed `eta^N` — expected for large eta and long horizons).
    pub high_variance_etas: Vec<f64>,
}

/// Per-path seed: a splitmix64 step keyed by the base seed and path index, so
/// path `i` owns the same stream regardless of scheduling.
pub fn path_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reproducible per-index access to the paths of an ensemble. Path `i` is a
/// pure function of `(spec, config, i)`.
pub struct EnsembleSampler<'a> {
    spec: &'a RateSpec,
    config: EnsembleConfig,
    stationary_mu0: Option<f64>,
}

impl<'a> EnsembleSampler<'a> {
    pub fn new(spec: &'a RateSpec, config: EnsembleConfig) -> Result<Self> {
        for &eta in &config.etas {
            if !crate::positive_finite(eta) {
                return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
            }
        }
        let stationary_mu0 = match config.initial {
            InitialCondition::Stationary => Some(Pspm::new(spec)?.mu_minus_zero()),
            InitialCondition::Fixed(_) => None,
        };
        Ok(Self { spec, config, stationary_mu0 })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn path(&self, index: u64) -> Result<PathSample> {
        let seed = path_seed(self.config.base_seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial = match self.config.initial {
            InitialCondition::Fixed(s) => s,
            InitialCondition::Stationary => {
                let u: f64 = rng.gen();
                if u < self.stationary_mu0.expect("precomputed for stationary starts") {
                    State::Minus
                } else {
                    State::Plus
                }
            }
        };
        let (jump_times, final_state, n_up) =
            simulate(self.spec, &mut rng, initial, self.config.horizon, self.config.jump_cap)?;
        Ok(PathSample { seed, initial_state: initial, jump_times, final_state, n_up })
    }
}

/// Run an ensemble and aggregate path statistics. Uses the current rayon
/// thread pool; results are identical for any worker count.
pub fn ensemble_stats(spec: &RateSpec, config: &EnsembleConfig) -> Result<EnsembleStats> {
    if config.n_paths < 100 {
        return Err(Error::InvalidArgument(format!(
            "n_paths must be >= 100, got {}",
            config.n_paths
        )));
    }
    let sampler = EnsembleSampler::new(spec, config.clone())?;

    let per_path: Vec<Result<(u64, f64)>> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let p = sampler.path(i)?;
            Ok((p.n_up, p.occupation_minus(config.horizon) / config.horizon))
        })
        .collect();

    let mut n_ups = Vec::with_capacity(config.n_paths);
    let mut occs = Vec::with_capacity(config.n_paths);
    for r in per_path {
        let (n_up, occ) = r?;
        n_ups.push(n_up as f64);
        occs.push(occ);
    }

    let n = config.n_paths as f64;
    let (up_mean, up_sd) = mean_sd(&n_ups);
    let (occ_mean, occ_sd) = mean_sd(&occs);
    let periods = config.horizon / spec.period();

    let mut mgf = Vec::with_capacity(config.etas.len());
    let mut high_variance = Vec::new();
    for &eta in &config.etas {
        let ln_eta = eta.ln();
        let values: Vec<f64> = n_ups.iter().map(|&k| (k * ln_eta).exp()).collect();
        let (m, sd) = mean_sd(&values);
        let se = sd / n.sqrt();
        if m != 0.0 && se / m.abs() > 0.5 {
            high_variance.push(eta);
        }
        mgf.push(MgfEstimate {
            eta,
            value: m,
            std_error: se,
            log_rate: m.ln() / config.horizon,
        });
    }

    Ok(EnsembleStats {
        n_paths: config.n_paths,
        horizon: config.horizon,
        periods,
        mean_rate: Estimate {
            value: up_mean / config.horizon,
            std_error: up_sd / n.sqrt() / config.horizon,
        },
        per_period: Estimate {
            value: up_mean / periods,
            std_error: up_sd / n.sqrt() / periods,
        },
        occupancy_minus: Estimate { value: occ_mean, std_error: occ_sd / n.sqrt() },
        mgf,
        high_variance_etas: high_variance,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
