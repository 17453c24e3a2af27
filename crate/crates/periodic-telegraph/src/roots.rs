//! Bracketed scalar root finding: bisection to near machine width, then a
//! guarded Newton polish when a derivative is available.

pub(crate) struct Solved {
    pub x: f64,
    pub residual: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

/// Solve `f(x) = 0` on `[lo, hi]` given `f(lo) <= 0 <= f(hi)`.
///
/// `f` need not be monotone overall, only sign-changing across the bracket;
/// the returned point is always inside the final bracket.
pub(crate) fn solve_bracketed<F, D>(f: F, df: Option<D>, mut lo: f64, mut hi: f64) -> Solved
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi);
    let mut iterations = 0u32;
    let mut best_x = 0.5 * (lo + hi);
    let mut best_f = f(best_x);

    for _ in 0..200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let fm = f(mid);
        if fm.abs() < best_f.abs() {
            best_x = mid;
            best_f = fm;
        }
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    if let Some(df) = df {
        let mut x = best_x;
        for _ in 0..8 {
            let fx = f(x);
            if fx.abs() < best_f.abs() {
                best_x = x;
                best_f = fx;
            }
            let d = df(x);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let next = x - fx / d;
            if !(next >= lo && next <= hi) {
                break;
            }
            iterations += 1;
            if next == x {
                break;
            }
            x = next;
        }
        let fx = f(x);
        if fx.abs() < best_f.abs() {
            best_x = x;
            best_f = fx;
        }
    }

    Solved {
        x: best_x,
        residual: best_f.abs(),
        iterations,
        // keep the reported bracket containing the returned point even when
        // the Newton polish landed a hair outside the bisection interval
        bracket: (lo.min(best_x), hi.max(best_x)),
    }
}
