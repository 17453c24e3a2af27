//! Discrete-time approximation of the periodically forced chain.
//!
//! With `N` steps per period, step `j` uses the transition probabilities
//! `pi_j^- = (T/N) phi_minus(jT/N)` and `pi_j^+ = (T/N) phi_plus(jT/N)`. The
//! module computes
//!
//! * the survival products `A_k = prod_{j=k}^{N-1} alpha_j` with
//!   `alpha_j = 1 - (pi_j^+ + pi_j^-)`,
//! * the unique stationary measure `mu^N(-1, n)` of the period-extended
//!   chain,
//! * the mean number of up-crossings per period
//!   `sum_k pi_k^- mu^N(-1, k)`, and
//! * the monodromy product `M_{N-1} ... M_0` of the generating-function
//!   recursion, whose eigenvalues approximate the continuous Floquet
//!   multipliers as `N` grows.
//!
//! The matrix product is accumulated in double-double arithmetic so that even
//! `N = 2^20` factors introduce no visible drift (at `eta = 1` the top
//! eigenvalue stays 1 to machine precision), with a power-of-two rescale
//! guarding against overflow for extreme `eta`.

use crate::linalg::{self, Mat2};
use crate::rates::{RateSpec, Rates};
use crate::{Error, Result};

/// One period of the discretized chain.
#[derive(Clone, Debug)]
pub struct DiscreteChain {
    pi_minus: Vec<f64>,
    pi_plus: Vec<f64>,
    alpha: Vec<f64>,
}

impl DiscreteChain {
    /// Discretize a rate spec with `n` steps per period. Rejects resolutions
    /// with `n <= 2 T (sup phi_minus + sup phi_plus)`, which keeps every
    /// `alpha_j > 1/2` and the products numerically benign.
    pub fn from_spec(spec: &RateSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let b = spec.bounds();
        let min_n = 2.0 * spec.period() * (b.sup_minus + b.sup_plus);
        if (n as f64) <= min_n {
            return Err(Error::InvalidArgument(format!(
                "resolution {n} too coarse: need n > 2*T*(sup_minus + sup_plus) = {min_n:.3}"
            )));
        }
        let t_per = spec.period();
        let h = t_per / n as f64;
        let mut pi_minus = Vec::with_capacity(n);
        let mut pi_plus = Vec::with_capacity(n);
        for j in 0..n {
            let Rates { minus, plus } = spec.eval(t_per * j as f64 / n as f64);
            pi_minus.push(h * minus);
            pi_plus.push(h * plus);
        }
        Self::from_probabilities(pi_minus, pi_plus)
    }

    /// Build directly from per-step probabilities. Each entry must lie in
    /// `[0, 1)` with `pi_j^+ + pi_j^- <= 1`, and the chain must move
    /// (`sum pi^+ > 0`, `sum pi^- > 0`).
    pub fn from_probabilities(pi_minus: Vec<f64>, pi_plus: Vec<f64>) -> Result<Self> {
        if pi_minus.len() != pi_plus.len() || pi_minus.is_empty() {
            return Err(Error::InvalidArgument(
                "probability sequences must be non-empty and of equal length".into(),
            ));
        }
        let mut alpha = Vec::with_capacity(pi_minus.len());
        for (j, (&m, &p)) in pi_minus.iter().zip(&pi_plus).enumerate() {
            if !(0.0..1.0).contains(&m) || !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "step {j}: probabilities must lie in [0, 1), got ({m}, {p})"
                )));
            }
            let a = 1.0 - (m + p);
            if a < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "step {j}: pi^+ + pi^- = {} exceeds 1",
                    m + p
                )));
            }
            alpha.push(a);
        }
        if pi_plus.iter().sum::<f64>() <= 0.0 || pi_minus.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Degenerate("chain never moves in one direction".into()));
        }
        Ok(Self { pi_minus, pi_plus, alpha })
    }

    /// Steps per period.
    pub fn resolution(&self) -> usize {
        self.pi_minus.len()
    }

    pub fn pi_minus(&self) -> &[f64] {
        &self.pi_minus
    }

    pub fn pi_plus(&self) -> &[f64] {
        &self.pi_plus
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `A_k = prod_{j=k}^{N-1} alpha_j` for `k < N`, and 1 for `k >= N`.
    pub fn survival_product(&self, k: usize) -> f64 {
        self.alpha[k.min(self.resolution())..].iter().product()
    }

    /// Stationary probabilities `mu^N(-1, n)` for `n` in `[0, N)`.
    ///
    /// `mu^N(-1, 0)` comes from the wrap-around formula
    /// `sum_k pi_k^+ A_{k+1} / (1 - A_0)`; the remaining entries follow the
    /// one-step recursion `nu_{n+1} = alpha_n nu_n + pi_n^+`.
    pub fn stationary_minus(&self) -> Vec<f64> {
        let n = self.resolution();
        // suffix products A_{k}
        let mut suffix = vec![1.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = self.alpha[k] * suffix[k + 1];
        }
        let mut numer = Neumaier::default();
        for k in 0..n {
            numer.add(self.pi_plus[k] * suffix[k + 1]);
        }
        let mu0 = numer.value() / (1.0 - suffix[0]);

        let mut out = Vec::with_capacity(n);
        let mut nu = mu0;
        for j in 0..n {
            out.push(nu);
            nu = self.alpha[j] * nu + self.pi_plus[j];
        }
        out
    }

    /// Stationary mean number of up-crossings per period,
    /// `sum_k pi_k^- mu^N(-1, k)`.
    pub fn mean_transitions(&self) -> f64 {
        let mu = self.stationary_minus();
        let mut acc = Neumaier::default();
        for (pi, m) in self.pi_minus.iter().zip(&mu) {
            acc.add(pi * m);
        }
        acc.value()
    }

    /// Ordered product `M_{N-1} ... M_0` of the generating-function step
    /// matrices `M_j = [[1 - pi_j^-, pi_j^+], [eta pi_j^-, 1 - pi_j^+]]`.
    pub fn monodromy(&self, eta: f64) -> Result<DiscreteMonodromy> {
        if !crate::positive_finite(eta) {
            return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
        }
        let mut acc = DdMat2::identity();
        let mut exp2: i32 = 0;
        for j in 0..self.resolution() {
            let m = Mat2::new(
                1.0 - self.pi_minus[j],
                self.pi_plus[j],
                eta * self.pi_minus[j],
                1.0 - self.pi_plus[j],
            );
            acc = acc.left_mul(&m);
            if acc.max_abs() > RESCALE_LIMIT {
                acc = acc.scale_pow2(-RESCALE_SHIFT);
                exp2 += RESCALE_SHIFT;
            }
        }

        // log-determinant of the product, with the sign tracked separately
        let mut log_det = Neumaier::default();
        let mut negatives = 0u64;
        for j in 0..self.resolution() {
            let d = self.alpha[j] + (1.0 - eta) * self.pi_plus[j] * self.pi_minus[j];
            if d == 0.0 {
                log_det.add(f64::NEG_INFINITY);
            } else {
                if d < 0.0 {
                    negatives += 1;
                }
                log_det.add(d.abs().ln());
            }
        }
        let det_sign = if negatives.is_multiple_of(2) { 1.0 } else { -1.0 };
        let det_product = det_sign * log_det.value().exp();

        let matrix = acc.to_mat2();
        let eig = linalg::eigen_nonneg_offdiag(&matrix);
        let fold = (exp2 as f64).exp2();
        let lambda1 = eig.lambda1 * fold;
        // determinant of the accumulated product, kept in double-double so
        // that rounding the entries cannot erase it
        let det_scaled = acc.det().to_f64();
        let det_entries = det_scaled * fold * fold;
        // sign-stable route of the quadratic formula; falls back to the
        // discriminant route when the folded values leave the f64 range
        let lambda2 = if lambda1.is_finite() && det_product.is_finite() {
            det_product / lambda1
        } else {
            eig.lambda2 * fold
        };
        Ok(DiscreteMonodromy {
            eta,
            matrix,
            exp2,
            lambda1,
            lambda2,
            log_lambda1: eig.lambda1.ln() + exp2 as f64 * std::f64::consts::LN_2,
            det_product,
            det_entries,
        })
    }
}

const RESCALE_LIMIT: f64 = 1.0e60;
const RESCALE_SHIFT: i32 = 200;

/// Monodromy product of one period of the discrete chain.
#[derive(Clone, Copy, Debug)]
pub struct DiscreteMonodromy {
    pub eta: f64,
    /// Product matrix scaled by `2^{-exp2}`; `exp2` is zero unless the raw
    /// entries left the representable range.
    pub matrix: Mat2,
    pub exp2: i32,
    /// Leading eigenvalue with the scale folded back in (may overflow to
    /// infinity in extreme cases — `log_lambda1` never does).
    pub lambda1: f64,
    pub lambda2: f64,
    pub log_lambda1: f64,
    /// `prod_j det(M_j) = prod_j (alpha_j + (1-eta) pi_j^+ pi_j^-)`,
    /// accumulated in log space; equals `lambda1 * lambda2`.
    pub det_product: f64,
    /// Determinant computed directly from the accumulated product entries
    /// (in double-double, so it survives cancellation).
    pub det_entries: f64,
}

impl DiscreteMonodromy {
    /// Relative defect between the two independent determinant routes:
    /// entry arithmetic of the accumulated product versus the compensated
    /// product of the per-step determinants.
    pub fn det_residual(&self) -> f64 {
        (self.det_entries - self.det_product).abs() / self.det_product.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        self.comp += if self.sum.abs() >= v.abs() { (self.sum - t) + v } else { (v - t) + self.sum };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// ---- double-double helpers -------------------------------------------------

#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    Dd { hi: s, lo: e }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

fn dd_add(a: Dd, b: Dd) -> Dd {
    let s = two_sum(a.hi, b.hi);
    let lo = s.lo + a.lo + b.lo;
    let r = two_sum(s.hi, lo);
    Dd { hi: r.hi, lo: r.lo }
}

/// `a * b` for double-double `b` and plain `a`.
fn dd_mul_f64(a: f64, b: Dd) -> Dd {
    let p = two_prod(a, b.hi);
    let lo = p.lo + a * b.lo;
    let r = two_sum(p.hi, lo);
    Dd { hi: r.hi, lo: r.lo }
}

fn dd_mul(a: Dd, b: Dd) -> Dd {
    let p = two_prod(a.hi, b.hi);
    let lo = p.lo + a.hi * b.lo + a.lo * b.hi;
    let r = two_sum(p.hi, lo);
    Dd { hi: r.hi, lo: r.lo }
}

fn dd_neg(a: Dd) -> Dd {
    Dd { hi: -a.hi, lo: -a.lo }
}

#[derive(Clone, Copy)]
struct DdMat2 {
    e: [[Dd; 2]; 2],
}

impl DdMat2 {
    fn identity() -> Self {
        let mut e = [[Dd::ZERO; 2]; 2];
        e[0][0] = Dd::from(1.0);
        e[1][1] = Dd::from(1.0);
        DdMat2 { e }
    }

    /// `m * self` with plain-f64 `m`.
    fn left_mul(&self, m: &Mat2) -> DdMat2 {
        let rows = [[m.a, m.b], [m.c, m.d]];
        let mut out = [[Dd::ZERO; 2]; 2];
        for (row_out, row_in) in out.iter_mut().zip(&rows) {
            for (j, cell) in row_out.iter_mut().enumerate() {
                let p1 = dd_mul_f64(row_in[0], self.e[0][j]);
                let p2 = dd_mul_f64(row_in[1], self.e[1][j]);
                *cell = dd_add(p1, p2);
            }
        }
        DdMat2 { e: out }
    }

    fn max_abs(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|d| d.hi.abs())
            .fold(0.0, f64::max)
    }

    fn det(&self) -> Dd {
        dd_add(
            dd_mul(self.e[0][0], self.e[1][1]),
            dd_neg(dd_mul(self.e[0][1], self.e[1][0])),
        )
    }

    fn scale_pow2(&self, shift: i32) -> DdMat2 {
        let s = (shift as f64).exp2();
        let mut out = *self;
        for row in &mut out.e {
            for d in row {
                d.hi *= s;
                d.lo *= s;
            }
        }
        out
    }

    fn to_mat2(self) -> Mat2 {
        Mat2::new(
            self.e[0][0].to_f64(),
            self.e[0][1].to_f64(),
            self.e[1][0].to_f64(),
            self.e[1][1].to_f64(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn survival_products_by_hand() {
        // pi^- = pi^+ = 0.25 everywhere, N = 2: alpha = 0.5.
        let chain = DiscreteChain::from_probabilities(vec![0.25, 0.25], vec![0.25, 0.25]).unwrap();
        assert_eq!(chain.survival_product(0), 0.25);
        assert_eq!(chain.survival_product(1), 0.5);
        assert_eq!(chain.survival_product(2), 1.0);
        assert_eq!(chain.survival_product(7), 1.0);
    }

    #[test]
    fn survival_product_approaches_tail_exponential() {
        // A_{N/2} -> exp(-int_{T/2}^{T} (phi_-+phi_+)) = e^{-1} for constant(1,1).
        let spec = RateSpec::constant(1.0, 1.0, 1.0).unwrap();
        let chain = DiscreteChain::from_spec(&spec, 4096).unwrap();
        let a = chain.survival_product(2048);
        assert!((a - (-1.0f64).exp()).abs() < 3e-4, "A = {a}");
    }

    #[test]
    fn symmetric_chain_has_uniform_stationary_measure() {
        let chain = DiscreteChain::from_probabilities(vec![0.25; 8], vec![0.25; 8]).unwrap();
        for v in chain.stationary_minus() {
            assert!(rel_close(v, 0.5, 1e-14));
        }
        assert!(rel_close(chain.mean_transitions(), 8.0 * 0.25 * 0.5, 1e-14));
    }

    #[test]
    fn two_step_mean_transitions_by_hand() {
        let chain = DiscreteChain::from_probabilities(vec![0.25, 0.25], vec![0.25, 0.25]).unwrap();
        assert!(rel_close(chain.mean_transitions(), 0.25, 1e-15));
    }

    #[test]
    fn stationary_satisfies_recursion_and_wraps() {
        let spec = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap();
        let chain = DiscreteChain::from_spec(&spec, 512).unwrap();
        let mu = chain.stationary_minus();
        let n = chain.resolution();
        for j in 0..n {
            let next = chain.alpha()[j] * mu[j] + chain.pi_plus()[j];
            let target = if j + 1 == n { mu[0] } else { mu[j + 1] };
            assert!((next - target).abs() < 1e-12, "step {j}");
            assert!(mu[j] > 0.0 && mu[j] < 1.0);
        }
    }

    #[test]
    fn stationary_matches_explicit_survival_formula() {
        // mu(-1, n) = (A_0/A_n) mu_0 + sum_{k<n} pi_k^+ A_{k+1}/A_n
        let spec = RateSpec::half_period(0.8, 1.7, 2.0).unwrap();
        let chain = DiscreteChain::from_spec(&spec, 64).unwrap();
        let mu = chain.stationary_minus();
        for n in [1usize, 7, 31, 63] {
            let a_n = chain.survival_product(n);
            let mut v = chain.survival_product(0) / a_n * mu[0];
            for k in 0..n {
                v += chain.pi_plus()[k] * chain.survival_product(k + 1) / a_n;
            }
            assert!(rel_close(v, mu[n], 1e-12), "n={n}: {v} vs {}", mu[n]);
        }
    }

    #[test]
    fn stationary_converges_to_continuous_value() {
        let spec = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        for n in [256usize, 1024, 4096] {
            let chain = DiscreteChain::from_spec(&spec, n).unwrap();
            let mu = chain.stationary_minus();
            let err = mu.iter().map(|v| (v - 1.0 / 3.0).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n}: err={err}");
        }
    }

    #[test]
    fn monodromy_hand_example_with_alpha_zero() {
        // N=1, pi^- = pi^+ = 0.5, eta = 4: M = [[0.5, 0.5], [2, 0.5]].
        let chain = DiscreteChain::from_probabilities(vec![0.5], vec![0.5]).unwrap();
        let m = chain.monodromy(4.0).unwrap();
        assert_eq!(m.matrix, Mat2::new(0.5, 0.5, 2.0, 0.5));
        assert!(rel_close(m.lambda1, 1.5, 1e-15));
        assert!(rel_close(m.lambda2, -0.5, 1e-15));
        assert!(rel_close(m.det_product, -0.75, 1e-15));
        assert!(m.det_residual() < 1e-13);
    }

    #[test]
    fn eta_one_product_is_stochastic() {
        let spec = RateSpec::half_period(3.0, 5.0, 2.0).unwrap();
        for n in [50usize, 1000, 1 << 16] {
            let chain = DiscreteChain::from_spec(&spec, n).unwrap();
            let m = chain.monodromy(1.0).unwrap();
            assert!(
                (m.lambda1 - 1.0).abs() < 1e-13,
                "n={n}: lambda1 = {}",
                m.lambda1
            );
        }
    }

    #[test]
    fn long_product_without_drift() {
        let spec = RateSpec::sin_constant_trace(1.0, 2.0, std::f64::consts::TAU).unwrap();
        let chain = DiscreteChain::from_spec(&spec, 1 << 20).unwrap();
        let m = chain.monodromy(1.0).unwrap();
        assert!((m.lambda1 - 1.0).abs() < 1e-12, "lambda1 = {}", m.lambda1);
        assert!(m.det_residual() < 1e-12);
    }

    #[test]
    fn log_lambda_converges_to_continuous_exponent() {
        let spec = RateSpec::constant(1.0, 1.0, 1.0).unwrap();
        let n = 4096;
        let chain = DiscreteChain::from_spec(&spec, n).unwrap();
        let m = chain.monodromy(1.05).unwrap();
        // closed-form continuous exponent for constant rates:
        // lambda1 = -1 + sqrt(eta)
        let cont = (-1.0 + 1.05f64.sqrt()) * spec.period();
        assert!(
            (m.log_lambda1 - cont).abs() < 10.0 / n as f64,
            "{} vs {cont}",
            m.log_lambda1
        );
    }

    #[test]
    fn det_identity_and_ordering_on_random_tabulated_specs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..100 {
            let n_samples = rng.gen_range(3..12);
            let minus: Vec<f64> = (0..n_samples).map(|_| rng.gen_range(0.2..3.0)).collect();
            let plus: Vec<f64> = (0..n_samples).map(|_| rng.gen_range(0.0..3.0)).collect();
            let period = rng.gen_range(0.5..4.0);
            let spec = RateSpec::tabulated(minus, plus, period).unwrap();
            let chain = DiscreteChain::from_spec(&spec, 256).unwrap();
            for eta in [1.1, 2.0, 4.0] {
                let m = chain.monodromy(eta).unwrap();
                assert!(m.det_residual() < 1e-12, "case {case} eta {eta}");
                assert!(
                    m.lambda1 > 1.0 && 1.0 > m.lambda2,
                    "case {case} eta {eta}: {} {}",
                    m.lambda1,
                    m.lambda2
                );
            }
        }
    }

    #[test]
    fn rescaling_keeps_logs_exact_for_extreme_eta() {
        let n = 400;
        let chain =
            DiscreteChain::from_probabilities(vec![0.5; n], vec![0.25; n]).unwrap();
        let eta = 1.0e12;
        let m = chain.monodromy(eta).unwrap();
        assert!(m.exp2 > 0, "expected rescaling, exp2 = {}", m.exp2);
        assert!(m.log_lambda1.is_finite());
        // growth per step is close to the dominant eigenvalue of one factor;
        // crude bound: log lambda1 within [n*log(2), n*log(eta)]
        assert!(m.log_lambda1 > n as f64 * 2.0f64.ln());
        assert!(m.log_lambda1 < n as f64 * eta.ln());
    }

    #[test]
    fn arrhenius_stationary_matches_half_period_closed_form() {
        // oracle: the half-period closed-form PSPM, error O(1/N)
        let barriers =
            crate::resonance::BarrierParams::new(1.0, 1.0, 2.0, 1.0, 0.1).unwrap();
        let hp = barriers.with_period(1.0e5).unwrap();
        let spec = hp.rate_spec().unwrap();
        let sup_err = |n: usize| -> f64 {
            let chain = DiscreteChain::from_spec(&spec, n).unwrap();
            let t_per = spec.period();
            chain
                .stationary_minus()
                .iter()
                .enumerate()
                .map(|(j, v)| (v - hp.pspm_minus(t_per * j as f64 / n as f64)).abs())
                .fold(0.0, f64::max)
        };
        let coarse = sup_err(1 << 13);
        let fine = sup_err(1 << 14);
        assert!(fine < 1e-2, "error at N=2^14: {fine}");
        let ratio = coarse / fine;
        assert!((1.6..=2.4).contains(&ratio), "halving ratio {ratio}");
    }

    #[test]
    fn tuned_chain_has_unit_mean_transitions() {
        // oracle: the period tuner; the discrete mean approaches 1 as O(1/N)
        let barriers =
            crate::resonance::BarrierParams::new(1.0, 1.0, 2.0, 1.0, 0.1).unwrap();
        let tuned = crate::resonance::tune_half_period(&barriers, None).unwrap();
        let spec = barriers.with_period(tuned.argument).unwrap().rate_spec().unwrap();
        let err = |n: usize| -> f64 {
            (DiscreteChain::from_spec(&spec, n).unwrap().mean_transitions() - 1.0).abs()
        };
        let coarse = err(1 << 13);
        let fine = err(1 << 14);
        assert!(fine < 2e-2, "mean error at N=2^14: {fine}");
        let ratio = coarse / fine;
        assert!((1.7..=2.3).contains(&ratio), "halving ratio {ratio}");
    }

    #[test]
    fn construction_rejects_coarse_resolution_and_bad_probabilities() {
        let spec = RateSpec::constant(2.0, 1.0, 1.0).unwrap();
        assert!(DiscreteChain::from_spec(&spec, 6).is_err());
        assert!(DiscreteChain::from_spec(&spec, 7).is_ok());
        assert!(DiscreteChain::from_probabilities(vec![0.6], vec![0.6]).is_err());
        assert!(DiscreteChain::from_probabilities(vec![1.0], vec![0.0]).is_err());
        assert!(DiscreteChain::from_probabilities(vec![0.0], vec![0.0]).is_err());
    }
}
