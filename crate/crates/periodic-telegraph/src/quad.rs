//! Composite 16-point Gauss-Legendre quadrature.
//!
//! Panels never straddle an integrand breakpoint: callers pass the interior
//! cut points and each smooth segment is integrated with panel doubling until
//! two successive composites agree to `REL_TOL` relative.

pub(crate) const REL_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 14;

// Abscissae (positive half) and weights of the 16-point Gauss-Legendre rule
// on [-1, 1]. Literals carry guard digits beyond f64 so they round correctly.
#[allow(clippy::excessive_precision)]
const NODES: [f64; 8] = [
    0.095_012_509_837_637_440_19,
    0.281_603_550_779_258_913_23,
    0.458_016_777_657_227_386_34,
    0.617_876_244_402_643_748_45,
    0.755_404_408_355_003_033_90,
    0.865_631_202_387_831_743_88,
    0.944_575_023_073_232_576_08,
    0.989_400_934_991_649_932_60,
];
#[allow(clippy::excessive_precision)]
const WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_496_29,
    0.182_603_415_044_923_588_87,
    0.169_156_519_395_002_538_19,
    0.149_595_988_816_576_732_08,
    0.124_628_971_255_533_872_05,
    0.095_158_511_682_492_784_81,
    0.062_253_523_938_647_892_86,
    0.027_152_459_411_754_094_85,
];

/// One 16-point panel over `[a, b]`.
pub(crate) fn gl16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        let dx = half * NODES[i];
        acc += WEIGHTS[i] * (f(mid + dx) + f(mid - dx));
    }
    acc * half
}

fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    let mut comp = 0.0; // Neumaier compensation
    for i in 0..panels {
        let x0 = a + h * i as f64;
        let x1 = if i + 1 == panels { b } else { a + h * (i + 1) as f64 };
        let v = gl16(f, x0, x1);
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Integrate a smooth integrand, doubling the panel count until converged.
pub(crate) fn integrate_smooth<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut panels = 1;
    let mut prev = composite(f, a, b, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let cur = composite(f, a, b, panels);
        let scale = cur.abs().max(prev.abs()).max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= REL_TOL * scale {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Integrate over `[a, b]` split at the sorted cut points that fall strictly
/// inside the interval.
pub(crate) fn integrate_segmented<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cuts: &[f64]) -> f64 {
    debug_assert!(a <= b);
    let mut total = 0.0;
    let mut lo = a;
    for &c in cuts {
        if c > lo && c < b {
            total += integrate_smooth(f, lo, c);
            lo = c;
        }
    }
    total + integrate_smooth(f, lo, b)
}
