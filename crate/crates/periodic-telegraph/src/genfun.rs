//! Moment generating function of the up-crossing count.
//!
//! `N_t` counts the jumps from `-1` to `+1` up to time `t`. Splitting
//! `E[eta^{N_t}]` by the current state gives the vector
//! `Psi(eta, t) = (psi_minus, psi_plus)` which solves the periodic linear ODE
//! `dPsi/dt = Q(eta, t) Psi` with
//!
//! ```text
//! Q(eta, t) = [ -phi_minus(t)      phi_plus(t) ]
//!             [ eta*phi_minus(t)  -phi_plus(t) ]
//! ```
//!
//! The one-period propagator (monodromy matrix) of this ODE has two real
//! positive eigenvalues — the Floquet multipliers `rho1 > rho2 > 0` — and the
//! large-time growth of the generating function is governed by
//! `lambda1 = log(rho1)/T`.
//!
//! Two exponent notions are reported side by side and deliberately NOT
//! identified with each other:
//!
//! * `lambda1` — the true monodromy exponent, from the ODE propagator;
//! * `mean_exponent` — the closed form
//!   `(log eta / T) * int_0^T phi_minus(t) mu_minus(t) dt`.
//!
//! They agree in value and slope at `eta = 1` (both vanish there, with equal
//! `eta`-derivative), but for constant rates the monodromy exponent is
//! `(-(phi_minus+phi_plus) + sqrt((phi_minus-phi_plus)^2 + 4*eta*phi_minus*phi_plus))/2`,
//! which departs from the closed form away from `eta = 1`. Nothing in this
//! module forces the two numbers together; the CLI prints their gap.

use crate::linalg::{self, Mat2, StateVec};
use crate::ode;
use crate::pspm::Pspm;
use crate::rates::{RateSelector, RateSpec};
use crate::{Error, Result, DEFAULT_STEPS_PER_PERIOD, RESOLUTION_WARNING_THRESHOLD};

/// The generator `Q(eta, t)` of the generating-function ODE. At `eta = 1` the
/// column sums vanish and it reduces to the distribution generator.
pub fn generator(spec: &RateSpec, eta: f64, t: f64) -> Mat2 {
    ode::q_matrix(spec.eval(t), eta)
}

/// One-period propagator of the generating-function ODE.
#[derive(Clone, Copy, Debug)]
pub struct OdeMonodromy {
    pub eta: f64,
    pub matrix: Mat2,
    pub steps_per_period: usize,
    /// Largest entry shift under step halving.
    pub richardson_shift: f64,
}

impl OdeMonodromy {
    pub fn resolution_warning(&self) -> bool {
        self.richardson_shift > RESOLUTION_WARNING_THRESHOLD
    }
}

/// Integrate the two basis columns over exactly one period. Entry `(a, b)` is
/// `E[eta^{N_T} 1_{X_T=a} | X_0=b]`; all four are strictly positive.
pub fn monodromy(spec: &RateSpec, eta: f64, steps_per_period: usize) -> Result<OdeMonodromy> {
    check_eta(eta)?;
    if steps_per_period < 16 {
        return Err(Error::InvalidArgument(format!(
            "steps_per_period must be >= 16, got {steps_per_period}"
        )));
    }
    let fine = propagator(spec, eta, steps_per_period);
    let coarse = propagator(spec, eta, (steps_per_period / 2).max(8));
    Ok(OdeMonodromy {
        eta,
        matrix: fine,
        steps_per_period,
        richardson_shift: fine.max_abs_diff(&coarse),
    })
}

fn propagator(spec: &RateSpec, eta: f64, steps_per_period: usize) -> Mat2 {
    let grid = ode::period_grid(spec, steps_per_period);
    let col_minus = ode::run_one_period(spec, eta, StateVec::new(1.0, 0.0), &grid);
    let col_plus = ode::run_one_period(spec, eta, StateVec::new(0.0, 1.0), &grid);
    Mat2::new(col_minus.minus, col_plus.minus, col_minus.plus, col_plus.plus)
}

/// Floquet multipliers/exponents of the generating-function ODE at one `eta`,
/// next to the closed-form mean exponent.
#[derive(Clone, Copy, Debug)]
pub struct FloquetSpectrum {
    pub eta: f64,
    /// Multipliers `rho1 > rho2 > 0` (eigenvalues of the monodromy matrix).
    pub rho: (f64, f64),
    /// Exponents `log(rho)/T` per unit time.
    pub lambda: (f64, f64),
    /// `(log eta / T) * int_0^T phi_minus mu_minus`.
    pub mean_exponent: f64,
    /// Relative defect of `rho1*rho2 = exp(-int_0^T (phi_minus+phi_plus))`.
    pub liouville_residual: f64,
    /// Carried over from the monodromy computation.
    pub richardson_shift: f64,
}

impl FloquetSpectrum {
    pub fn resolution_warning(&self) -> bool {
        self.richardson_shift > RESOLUTION_WARNING_THRESHOLD
    }

    /// Gap between the monodromy exponent and the closed-form mean exponent.
    pub fn exponent_gap(&self) -> f64 {
        self.lambda.0 - self.mean_exponent
    }
}

pub fn floquet_spectrum(spec: &RateSpec, eta: f64) -> Result<FloquetSpectrum> {
    floquet_spectrum_with(spec, eta, DEFAULT_STEPS_PER_PERIOD, None)
}

/// As [`floquet_spectrum`], reusing a prebuilt [`Pspm`] (worth it in sweeps:
/// the mean exponent integral does not depend on `eta`).
pub fn floquet_spectrum_with(
    spec: &RateSpec,
    eta: f64,
    steps_per_period: usize,
    pspm: Option<&Pspm>,
) -> Result<FloquetSpectrum> {
    let mono = monodromy(spec, eta, steps_per_period)?;
    let eig = linalg::eigen_nonneg_offdiag(&mono.matrix);
    let t_per = spec.period();
    let mean_flux = match pspm {
        Some(p) => p.mean_up_crossings_per_period(),
        None => Pspm::new(spec)?.mean_up_crossings_per_period(),
    };
    let s_total = spec.integrate(RateSelector::Sum, 0.0, t_per);
    let wronskian = (-s_total).exp();
    let product = eig.lambda1 * eig.lambda2;
    Ok(FloquetSpectrum {
        eta,
        rho: (eig.lambda1, eig.lambda2),
        lambda: (eig.lambda1.ln() / t_per, eig.lambda2.ln() / t_per),
        mean_exponent: eta.ln() / t_per * mean_flux,
        liouville_residual: (product - wronskian).abs() / wronskian,
        richardson_shift: mono.richardson_shift,
    })
}

/// Decomposition of an initial vector in the monodromy eigenbasis:
/// `Psi(kT) = r1 * rho1^k * u1 + r2 * rho2^k * u2`.
#[derive(Clone, Copy, Debug)]
pub struct FloquetSplit {
    pub coeff: (f64, f64),
    pub basis: (StateVec, StateVec),
    pub rho: (f64, f64),
}

impl FloquetSplit {
    /// Reconstruct `Psi(kT)` from the split.
    pub fn at_period(&self, k: u32) -> StateVec {
        let a = self.basis.0.scale(self.coeff.0 * self.rho.0.powi(k as i32));
        let b = self.basis.1.scale(self.coeff.1 * self.rho.1.powi(k as i32));
        a + b
    }
}

/// Generating-function vector evolved to time `t`, with its Floquet split.
#[derive(Clone, Copy, Debug)]
pub struct GenEvolution {
    pub t: f64,
    pub psi: StateVec,
    pub split: FloquetSplit,
}

/// Integrate `Psi` from `psi0` at time 0 to `t`, and project `psi0` onto the
/// monodromy eigenvectors. Fails with [`Error::IllConditioned`] when the
/// eigenvector matrix condition number exceeds `1e12` (the eigenvectors
/// collapse as `eta -> 0` for symmetric rates).
pub fn evolve_generating(
    spec: &RateSpec,
    eta: f64,
    psi0: StateVec,
    t: f64,
    steps_per_period: usize,
) -> Result<GenEvolution> {
    check_eta(eta)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    if !psi0.is_finite() {
        return Err(Error::InvalidArgument("psi0 has non-finite components".into()));
    }

    let psi = ode::run_horizon(spec, eta, psi0, t, steps_per_period, |_, _| {});
    let mono = monodromy(spec, eta, steps_per_period)?;
    let eig = linalg::eigen_nonneg_offdiag(&mono.matrix);
    let basis = Mat2::new(eig.vec1.minus, eig.vec2.minus, eig.vec1.plus, eig.vec2.plus);
    let kappa = linalg::condition_number(&basis);
    if kappa > 1e12 {
        return Err(Error::IllConditioned(kappa));
    }
    let det = basis.det();
    let r1 = (psi0.minus * basis.d - psi0.plus * basis.b) / det;
    let r2 = (psi0.plus * basis.a - psi0.minus * basis.c) / det;
    Ok(GenEvolution {
        t,
        psi,
        split: FloquetSplit {
            coeff: (r1, r2),
            basis: (eig.vec1, eig.vec2),
            rho: (eig.lambda1, eig.lambda2),
        },
    })
}

fn check_eta(eta: f64) -> Result<()> {
    if !crate::positive_finite(eta) {
        return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
    }
    Ok(())
}
