//! Closed-form moments of the CIR variance process and of integrated
//! variance.
//!
//! Two variants of the integrated-variance variance ship side by side:
//! [`VarianceFormulaMode::Printed`] evaluates the formula with the
//! `2 e^{kT} kT` long-run term and can go negative, while
//! [`VarianceFormulaMode::Corrected`] uses `2 e^{2kT} kT`, which is the
//! term an independent derivation through the covariance double integral
//! produces, and is nonnegative for every valid parameter set. Corrected
//! is the default everywhere; printed mode exists for regression against
//! previously published figures.

use crate::params::HestonParams;

/// Formula variant for [`integrated_variance_variance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceFormulaMode {
    /// Published form; evaluates to negative values for realistic inputs.
    Printed,
    /// Sign-corrected form; a genuine variance.
    #[default]
    Corrected,
}

/// `(1 - e^{-x}) / x`, exact through `expm1`, with the x = 0 limit.
#[inline]
pub(crate) fn one_minus_exp_over_x(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -f64::exp_m1(-x) / x
    }
}

/// `E[V_t] = theta + (v0 - theta) e^{-kappa t}`.
pub fn cir_mean(p: &HestonParams, t: f64) -> f64 {
    p.theta + (p.v0 - p.theta) * (-p.kappa * t).exp()
}

/// `Var[V_t]` of the CIR process.
pub fn cir_variance(p: &HestonParams, t: f64) -> f64 {
    let e1 = (-p.kappa * t).exp();
    let e2 = e1 * e1;
    let s2 = p.sigma * p.sigma;
    let v = p.theta * s2 / (2.0 * p.kappa) * (1.0 - e2)
        + (p.v0 - p.theta) * s2 / p.kappa * (e1 - e2);
    v.max(0.0)
}

/// `Cov(V_t, V_s)`; symmetric, zero whenever either time is zero.
pub fn cir_covariance(p: &HestonParams, t: f64, s: f64) -> f64 {
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    let s2 = p.sigma * p.sigma;
    // Each exponential decays: arguments are -|t-s|, -max, -(t+s).
    let e_gap = (-p.kappa * (hi - lo)).exp();
    let e_hi = (-p.kappa * hi).exp();
    let e_sum = (-p.kappa * (t + s)).exp();
    s2 * (p.theta * e_gap / (2.0 * p.kappa)
        + (p.v0 - p.theta) * e_hi / p.kappa
        + (p.theta - 2.0 * p.v0) * e_sum / (2.0 * p.kappa))
}

/// `E[V_t V_s] = E[V_t] E[V_s] + Cov(V_t, V_s)`.
pub fn cir_cross_moment(p: &HestonParams, t: f64, s: f64) -> f64 {
    cir_mean(p, t) * cir_mean(p, s) + cir_covariance(p, t, s)
}

/// `E[(1/T) int_0^T V_t dt] = theta + (v0 - theta)(1 - e^{-kappa T})/(kappa T)`.
pub fn integrated_variance_mean(p: &HestonParams, t: f64) -> f64 {
    p.theta + (p.v0 - p.theta) * one_minus_exp_over_x(p.kappa * t)
}

/// Corrected-mode bracket, written with decaying exponentials only:
/// `2x th - 5 th + 2 v0 + (4 th - 4x(v0 - th)) E + (th - 2 v0) E^2`,
/// `x = kappa T`, `E = e^{-x}`. The terms cancel to O(x^3) near zero, so
/// a series takes over below a small-x threshold.
fn corrected_bracket(theta: f64, v0: f64, x: f64) -> f64 {
    if x < 1e-2 {
        // R = (2/3) v0 x^3 + (th/6 - 2 v0/3) x^4 + (11 v0/30 - 2 th/15) x^5
        //   + (11 th - 26 v0)/180 x^6 + O(x^7)
        let x3 = x * x * x;
        x3 * (2.0 / 3.0 * v0
            + x * (theta / 6.0 - 2.0 / 3.0 * v0
                + x * (11.0 / 30.0 * v0 - 2.0 / 15.0 * theta
                    + x * (11.0 * theta - 26.0 * v0) / 180.0)))
    } else {
        let e = (-x).exp();
        2.0 * x * theta - 5.0 * theta + 2.0 * v0
            + (4.0 * theta - 4.0 * x * (v0 - theta)) * e
            + (theta - 2.0 * v0) * e * e
    }
}

/// `Var[(1/T) int_0^T V_t dt]` in the selected formula variant.
///
/// Both modes return 0 when `sigma = 0`. Corrected mode is clamped at
/// zero to absorb last-ulp rounding; it is nonnegative analytically.
pub fn integrated_variance_variance(p: &HestonParams, t: f64, mode: VarianceFormulaMode) -> f64 {
    let x = p.kappa * t;
    let bracket = match mode {
        VarianceFormulaMode::Corrected => corrected_bracket(p.theta, p.v0, x),
        // printed = corrected - 2 theta x (1 - e^{-x})
        VarianceFormulaMode::Printed => {
            corrected_bracket(p.theta, p.v0, x) + 2.0 * p.theta * x * f64::exp_m1(-x)
        }
    };
    let s2 = p.sigma * p.sigma;
    let var = s2 * bracket / (2.0 * p.kappa.powi(3) * t * t);
    match mode {
        VarianceFormulaMode::Corrected => var.max(0.0),
        VarianceFormulaMode::Printed => var,
    }
}
