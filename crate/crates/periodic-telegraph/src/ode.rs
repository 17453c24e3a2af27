//! Fixed-step RK4 for the two-component periodic linear systems.
//!
//! The generator `Q(eta, t)` is `[[-phi_minus, phi_plus], [eta*phi_minus,
//! -phi_plus]]`; `eta = 1` gives the distribution flow. Steps are laid out
//! once per period as the uniform grid joined with the spec's breakpoints, and
//! rate lookups use within-period offsets rather than absolute times, so the
//! one-period map is bit-identical every period and jump discontinuities are
//! only ever sampled from the correct side (right limit at a step start, left
//! limit at a step end).

use crate::linalg::{Mat2, StateVec};
use crate::rates::{RateSpec, Rates};

pub(crate) fn q_matrix(r: Rates, eta: f64) -> Mat2 {
    Mat2::new(-r.minus, r.plus, eta * r.minus, -r.plus)
}

/// Step offsets within `[0, T]`: the uniform subdivision plus every interior
/// breakpoint.
pub(crate) fn period_grid(spec: &RateSpec, steps_per_period: usize) -> Vec<f64> {
    let t_per = spec.period();
    let n = steps_per_period.max(1);
    let mut grid: Vec<f64> = (0..=n).map(|i| t_per * i as f64 / n as f64).collect();
    grid.extend(spec.interior_cuts());
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid offsets"));
    grid.dedup();
    grid
}

fn rk4_step(spec: &RateSpec, eta: f64, y: StateVec, o0: f64, o1: f64) -> StateVec {
    let h = o1 - o0;
    let k1 = q_matrix(spec.eval(o0), eta).mul_vec(y);
    let q_mid = q_matrix(spec.eval(o0 + 0.5 * h), eta);
    let k2 = q_mid.mul_vec(y + k1.scale(0.5 * h));
    let k3 = q_mid.mul_vec(y + k2.scale(0.5 * h));
    let k4 = q_matrix(spec.eval_left(o1), eta).mul_vec(y + k3.scale(h));
    y + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0)
}

/// Advance one full period, invoking `sample(offset_end, y)` after each step.
pub(crate) fn run_one_period_cb<S: FnMut(f64, StateVec)>(
    spec: &RateSpec,
    eta: f64,
    mut y: StateVec,
    grid: &[f64],
    mut sample: S,
) -> StateVec {
    for w in grid.windows(2) {
        y = rk4_step(spec, eta, y, w[0], w[1]);
        sample(w[1], y);
    }
    y
}

pub(crate) fn run_one_period(spec: &RateSpec, eta: f64, y: StateVec, grid: &[f64]) -> StateVec {
    run_one_period_cb(spec, eta, y, grid, |_, _| {})
}

/// Integrate one period and report the state at each requested offset
/// (offsets in `[0, T]`, any order). Sample points are inserted into the step
/// grid so they are hit exactly.
pub(crate) fn run_one_period_at(
    spec: &RateSpec,
    eta: f64,
    y0: StateVec,
    steps_per_period: usize,
    offsets: &[f64],
) -> Vec<StateVec> {
    let mut grid = period_grid(spec, steps_per_period);
    grid.extend(offsets.iter().copied().filter(|o| o.is_finite()));
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite offsets"));
    grid.dedup();
    let mut reached: Vec<(f64, StateVec)> = vec![(0.0, y0)];
    run_one_period_cb(spec, eta, y0, &grid, |off, y| reached.push((off, y)));
    offsets
        .iter()
        .map(|&o| {
            let idx = reached.partition_point(|&(g, _)| g < o);
            reached[idx.min(reached.len() - 1)].1
        })
        .collect()
}

/// Values at the ends of periods `1..=periods`.
pub(crate) fn run_periods(
    spec: &RateSpec,
    eta: f64,
    y0: StateVec,
    periods: usize,
    steps_per_period: usize,
) -> Vec<StateVec> {
    let grid = period_grid(spec, steps_per_period);
    let mut y = y0;
    (0..periods)
        .map(|_| {
            y = run_one_period(spec, eta, y, &grid);
            y
        })
        .collect()
}

/// Integrate to an arbitrary horizon, invoking `sample(t, y)` after every
/// step. The final partial period walks the same grid, clipped at the
/// remainder.
pub(crate) fn run_horizon<S: FnMut(f64, StateVec)>(
    spec: &RateSpec,
    eta: f64,
    y0: StateVec,
    horizon: f64,
    steps_per_period: usize,
    mut sample: S,
) -> StateVec {
    let t_per = spec.period();
    let grid = period_grid(spec, steps_per_period);
    let mut full = (horizon / t_per).floor();
    let mut rem = horizon - full * t_per;
    if rem < 0.0 {
        full -= 1.0;
        rem += t_per;
    } else if rem >= t_per {
        full += 1.0;
        rem -= t_per;
    }

    let mut y = y0;
    for p in 0..full as u64 {
        let base = p as f64 * t_per;
        y = run_one_period_cb(spec, eta, y, &grid, |off, v| sample(base + off, v));
    }
    if rem > 0.0 {
        let base = full * t_per;
        for w in grid.windows(2) {
            if w[0] >= rem {
                break;
            }
            let end = w[1].min(rem);
            y = rk4_step(spec, eta, y, w[0], end);
            sample(base + end, y);
            if end >= rem {
                break;
            }
        }
    }
    y
}
