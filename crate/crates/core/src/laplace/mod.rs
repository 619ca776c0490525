//! Laplace transforms of realized variance per model, the
//! square-root-expectation improper integral, the CIR terminal MGF, and
//! closed-form VIX futures.
//!
//! The pricing identity is
//! `E[sqrt(X)] = (1/(2 sqrt(pi))) \int_0^inf (1 - E[e^{-sX}]) / s^{3/2} ds`,
//! evaluated as three pieces: a two-term moment series on `[0, s0]` that
//! tames the `1/sqrt(s)` behavior of the integrand, the substitution
//! `s = x^2` on `[s0, 1]`, and `s = 1/t^2` on `[1, inf)`. Both
//! substitutions remove the endpoint singularities exactly, leaving
//! smooth bounded integrands for the adaptive rule.

mod quad;

pub use quad::QuadratureConfig;

use crate::error::PricingError;
use crate::params::{BatesParams, HestonParams, JumpParams, MertonParams, Model};
use crate::pricing::{Method, StrikeQuote, VixModel};

/// `E[e^{-s RV}]` as a function of `s >= 0`; values in (0, 1], equal to 1
/// at `s = 0`, nonincreasing.
pub struct LaplaceTransform {
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl LaplaceTransform {
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LaplaceTransform { eval: Box::new(eval) }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }
}

/// `log1p(x)/x` with the `x -> 0` limit.
#[inline]
fn ln1p_over_x(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        x.ln_1p() / x
    }
}

/// Log of the Heston realized-variance transform, `A(T,s) - B(T,s) v0`,
/// with `gamma(s) = sqrt(kappa^2 + 2 sigma^2 s / T)`.
///
/// Algebraically identical to the textbook form but assembled from
/// `expm1`/`log1p` pieces so that small `sigma`, small `s`, and very
/// large `s` all evaluate without cancellation or overflow.
fn heston_rv_log_laplace(p: &HestonParams, t: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let kappa = p.kappa;
    let eps = 2.0 * p.sigma * p.sigma * s / (t * kappa * kappa);
    let h = (1.0 + eps).sqrt();
    let gamma = kappa * h;
    let g = kappa * eps / (h + 1.0); // gamma - kappa, exact for small eps
    let em = -f64::exp_m1(-t * gamma); // 1 - e^{-T gamma}
    let x = -(g / (2.0 * gamma)) * em;
    let q = 2.0 * p.theta * s * em / (t * gamma * (h + 1.0)); // -(2 k th / s^2) x
    let a = -2.0 * p.theta * s / (h + 1.0) + q * ln1p_over_x(x);
    let b = 2.0 * s * em / (t * ((gamma + kappa) * em + 2.0 * gamma * (-t * gamma).exp()));
    a - b * p.v0
}

/// Jump contribution to the log-transform:
/// `lambda T (exp(-s a^2 / (T + 2 s b^2)) / sqrt(1 + 2 s b^2 / T) - 1)`.
fn jump_log_laplace(j: &JumpParams, t: f64, s: f64) -> f64 {
    if j.lambda == 0.0 || s == 0.0 {
        return 0.0;
    }
    let num = (-s * j.a * j.a / (t + 2.0 * s * j.b2)).exp();
    let den = (1.0 + 2.0 * s * j.b2 / t).sqrt();
    j.lambda * t * (num / den - 1.0)
}

pub fn laplace_rv_heston(p: &HestonParams, t: f64) -> LaplaceTransform {
    let p = *p;
    LaplaceTransform::new(move |s| heston_rv_log_laplace(&p, t, s).exp())
}

pub fn laplace_rv_merton(p: &MertonParams, t: f64) -> LaplaceTransform {
    let p = *p;
    LaplaceTransform::new(move |s| {
        (-s * p.sigma * p.sigma + jump_log_laplace(&p.jumps, t, s)).exp()
    })
}

pub fn laplace_rv_bates(p: &BatesParams, t: f64) -> LaplaceTransform {
    let p = *p;
    LaplaceTransform::new(move |s| {
        (heston_rv_log_laplace(&p.heston, t, s) + jump_log_laplace(&p.jumps, t, s)).exp()
    })
}

/// Result of an improper-integral evaluation.
#[derive(Debug, Clone, Copy)]
pub struct QuadQuote {
    pub value: f64,
    pub error_estimate: f64,
}

/// `E[sqrt(X)] = (1/(2 sqrt(pi))) \int_0^inf (1 - L(s))/s^{3/2} ds`.
///
/// The first moment (`-L'(0)`) and second moment (`L''(0)`) feeding the
/// small-`s` series come from finite differences of the transform.
pub fn sqrt_expectation(
    transform: &LaplaceTransform,
    cfg: &QuadratureConfig,
) -> Result<QuadQuote, PricingError> {
    cfg.validate()?;
    let l = |s: f64| transform.eval(s);
    if (l(0.0) - 1.0).abs() > 1e-9 {
        return Err(PricingError::InvalidInput("laplace transform must satisfy L(0) = 1"));
    }

    // First and second moments by finite differences at the origin. When
    // the transform decays fast enough that the pilot step eats a visible
    // fraction of it, rescale the step to the decay scale: small enough
    // to control curvature error, large enough to stay above fp noise.
    let mut h = 1e-7;
    let mut m1 = 2.0 * (1.0 - l(h)) / h - (1.0 - l(2.0 * h)) / (2.0 * h);
    if m1 * h > 1e-2 {
        h = 1e-3 / m1.max(1e-30);
        m1 = 2.0 * (1.0 - l(h)) / h - (1.0 - l(2.0 * h)) / (2.0 * h);
    }
    let h2 = 1e2 * h;
    let m2 = ((l(2.0 * h2) - 2.0 * l(h2)) + 1.0) / (h2 * h2);

    // Piece A: series on [0, s0]; s0 shrinks with the first moment so
    // the dropped third-moment term stays far below tolerance.
    let s0: f64 = 1e-6 / m1.abs().max(1.0);
    let piece_a = 2.0 * s0.sqrt() * m1 - m2 / 3.0 * s0.powf(1.5);
    // Dropped-term bound (third moment crudely majorized by m1 * m2)
    // plus finite-difference noise.
    let err_a = 0.4 * m1.abs() * m2.abs() * s0.powf(2.5) + 1e-13 * (1.0 + piece_a.abs());

    // Piece B: s = x^2 on [s0, 1] -> 2 (1 - L(x^2)) / x^2 on [sqrt(s0), 1].
    let piece_cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol,
        abs_tol: 0.5 * cfg.abs_tol,
        max_subdivisions: cfg.max_subdivisions,
    };
    let fb = |x: f64| 2.0 * (1.0 - l(x * x)) / (x * x);
    let est_b = quad::integrate(&fb, s0.sqrt(), 1.0, &piece_cfg);

    // Piece C: s = 1/t^2 on [1, inf) -> 2 (1 - L(1/t^2)) on (0, 1].
    let fc = |t: f64| 2.0 * (1.0 - l(1.0 / (t * t)));
    let est_c = quad::integrate(&fc, 0.0, 1.0, &piece_cfg);

    let scale = 0.5 / std::f64::consts::PI.sqrt();
    let value = scale * (piece_a + est_b.value + est_c.value);
    let error = scale * (err_a + est_b.error + est_c.error);

    let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
    if error > target.max(1e-10) {
        return Err(PricingError::QuadratureDidNotConverge {
            achieved: error,
            target,
        });
    }
    Ok(QuadQuote {
        value,
        error_estimate: error,
    })
}

/// Laplace-route fair volatility strike `E[sqrt(RV)]` for a model.
pub fn vol_strike_laplace(
    model: &Model,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<StrikeQuote, PricingError> {
    let transform = match model {
        Model::Heston(p) => laplace_rv_heston(p, t),
        Model::Merton(p) => laplace_rv_merton(p, t),
        Model::Bates(p) => laplace_rv_bates(p, t),
        Model::LevyHeston(..) => {
            return Err(PricingError::InvalidInput(
                "laplace volatility strike unavailable for levy-heston (realized variance has no second moment)",
            ))
        }
    };
    let q = sqrt_expectation(&transform, cfg)?;
    Ok(StrikeQuote {
        value: q.value,
        method: Method::Laplace,
        std_error: None,
    })
}

/// Moment generating function of the CIR terminal value,
/// `f(phi; T, v0) = exp(C + D v0)`; finite for
/// `phi < 2 kappa / (sigma^2 (1 - e^{-kappa T}))`.
pub fn cir_mgf(p: &HestonParams, t: f64, phi: f64) -> Result<f64, PricingError> {
    let em = -f64::exp_m1(-p.kappa * t); // 1 - e^{-kappa T}
    let s2 = p.sigma * p.sigma;
    if em > 0.0 {
        let limit = 2.0 * p.kappa / (s2 * em);
        if phi >= limit {
            return Err(PricingError::MgfDomain { phi, limit });
        }
    }
    let x = -(s2 * phi / (2.0 * p.kappa)) * em;
    let c = p.theta * phi * em * ln1p_over_x(x);
    let d = 2.0 * p.kappa * phi * (-p.kappa * t).exp() / (2.0 * p.kappa - s2 * phi * em);
    Ok((c + d * p.v0).exp())
}

/// Closed-form VIX future: the square-root expectation applied to the
/// Laplace transform of `VIX_T^2 = 100^2 (A V_T + B)` with
/// `A = (1 - e^{-k tau})/(k tau)` and `B = theta (1 - A) [+ 2 lambda (m - a)]`.
pub fn vix_future_closed_form(
    model: &VixModel,
    t: f64,
    tau: f64,
    cfg: &QuadratureConfig,
) -> Result<StrikeQuote, PricingError> {
    let p = *model.heston();
    let a = crate::moments::one_minus_exp_over_x(p.kappa * tau);
    let b = p.theta * (1.0 - a) + model.jump_shift();
    let transform = LaplaceTransform::new(move |s| {
        let phi = -1.0e4 * s * a;
        // phi <= 0 is always inside the MGF domain
        let f = cir_mgf(&p, t, phi).expect("nonpositive phi is in the MGF domain");
        (-1.0e4 * s * b).exp() * f
    });
    let q = sqrt_expectation(&transform, cfg)?;
    Ok(StrikeQuote {
        value: q.value,
        method: Method::Laplace,
        std_error: None,
    })
}
