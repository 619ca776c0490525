//! Fair variance strikes for all four models, convexity-correction
//! volatility strikes, and convexity-correction VIX futures.

use crate::error::PricingError;
use crate::moments::{
    cir_mean, cir_variance, integrated_variance_mean, integrated_variance_variance,
    one_minus_exp_over_x, VarianceFormulaMode,
};
use crate::params::{BatesParams, HestonParams, MertonParams, StableParams};

/// How a quote was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Convexity,
    Laplace,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Analytic => "analytic",
            Method::Convexity => "convexity",
            Method::Laplace => "laplace",
            Method::MonteCarlo => "monte_carlo",
        };
        f.write_str(s)
    }
}

/// A priced result. Variance strikes are in 1/year, volatility strikes in
/// 1/sqrt-year, VIX futures in index points. `std_error` is set only for
/// Monte Carlo quotes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrikeQuote {
    pub value: f64,
    pub method: Method,
    pub std_error: Option<f64>,
}

impl StrikeQuote {
    pub fn exact(value: f64, method: Method) -> Self {
        StrikeQuote {
            value,
            method,
            std_error: None,
        }
    }
}

/// `K*_var` under square-root variance dynamics: the time average of the
/// expected variance path.
pub fn variance_strike_heston(p: &HestonParams, t: f64) -> StrikeQuote {
    StrikeQuote::exact(integrated_variance_mean(p, t), Method::Analytic)
}

/// `K*_var = sigma^2 + lambda (a^2 + b^2)`; independent of maturity.
pub fn variance_strike_merton(p: &MertonParams, _t: f64) -> StrikeQuote {
    let value = p.sigma * p.sigma + p.jumps.lambda * p.jumps.log_jump_second_moment();
    StrikeQuote::exact(value, Method::Analytic)
}

/// Diffusive leg plus jump leg.
pub fn variance_strike_bates(p: &BatesParams, t: f64) -> StrikeQuote {
    let value = integrated_variance_mean(&p.heston, t)
        + p.jumps.lambda * p.jumps.log_jump_second_moment();
    StrikeQuote::exact(value, Method::Analytic)
}

/// Variance strike when the variance process is driven by an alpha-stable
/// Levy process with location `delta`:
/// `theta + (1 - e^{-kT})(k v0 - k theta + delta)/(k^2 T) - delta e^{-kT}/k`.
///
/// For `alpha <= 1` the driver has no mean, so a nonzero `delta` is
/// rejected. With `delta = 0` this reduces to the square-root-diffusion
/// strike.
pub fn variance_strike_levy_heston(
    p: &HestonParams,
    s: &StableParams,
    t: f64,
) -> Result<StrikeQuote, PricingError> {
    if s.alpha <= 1.0 && s.delta != 0.0 {
        return Err(PricingError::DeltaRequiresHeavyAlpha);
    }
    let k = p.kappa;
    let drift = k * p.v0 - k * p.theta + s.delta;
    let value = p.theta + one_minus_exp_over_x(k * t) * drift / k - s.delta * (-k * t).exp() / k;
    if value < 0.0 {
        return Err(PricingError::InvalidInput(
            "delta drags the expected variance below zero",
        ));
    }
    Ok(StrikeQuote::exact(value, Method::Analytic))
}

/// Second-order correction for the concavity of the square root:
/// `sqrt(mean) - (var + extra_jump_var) / (8 mean^{3/2})`.
///
/// A negative corrected value means the expansion is outside its validity
/// radius; it is clamped to zero and flagged through `clamped`.
pub fn vol_strike_convexity(
    mean: f64,
    var: f64,
    extra_jump_var: f64,
) -> Result<StrikeQuote, PricingError> {
    let (quote, _clamped) = vol_strike_convexity_flagged(mean, var, extra_jump_var)?;
    Ok(quote)
}

/// Same as [`vol_strike_convexity`], also reporting whether the value was
/// clamped at zero.
pub fn vol_strike_convexity_flagged(
    mean: f64,
    var: f64,
    extra_jump_var: f64,
) -> Result<(StrikeQuote, bool), PricingError> {
    if !(mean > 0.0) {
        return Err(PricingError::NonPositiveMean);
    }
    let raw = mean.sqrt() - (var + extra_jump_var) / (8.0 * mean.powf(1.5));
    let clamped = raw < 0.0;
    Ok((
        StrikeQuote::exact(raw.max(0.0), Method::Convexity),
        clamped,
    ))
}

/// Convexity-route volatility strike for each model at maturity `t`.
pub fn vol_strike_convexity_heston(
    p: &HestonParams,
    t: f64,
    mode: VarianceFormulaMode,
) -> Result<StrikeQuote, PricingError> {
    vol_strike_convexity(
        integrated_variance_mean(p, t),
        integrated_variance_variance(p, t, mode),
        0.0,
    )
}

pub fn vol_strike_convexity_merton(p: &MertonParams, t: f64) -> Result<StrikeQuote, PricingError> {
    let mean = variance_strike_merton(p, t).value;
    let jump_var = p.jumps.lambda * p.jumps.log_jump_fourth_moment() / t;
    vol_strike_convexity(mean, jump_var, 0.0)
}

pub fn vol_strike_convexity_bates(
    p: &BatesParams,
    t: f64,
    mode: VarianceFormulaMode,
) -> Result<StrikeQuote, PricingError> {
    let mean = variance_strike_bates(p, t).value;
    let diff_var = integrated_variance_variance(&p.heston, t, mode);
    let jump_var = p.jumps.lambda * p.jumps.log_jump_fourth_moment() / t;
    vol_strike_convexity(mean, diff_var, jump_var)
}

/// Variance dynamics a VIX quote can be written on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VixModel {
    Heston(HestonParams),
    Bates(BatesParams),
}

impl VixModel {
    pub fn heston(&self) -> &HestonParams {
        match self {
            VixModel::Heston(p) => p,
            VixModel::Bates(p) => &p.heston,
        }
    }

    /// Constant VIX^2 shift contributed by price jumps: `2 lambda (m - a)`
    /// in variance units (zero without jumps).
    pub fn jump_shift(&self) -> f64 {
        match self {
            VixModel::Heston(_) => 0.0,
            VixModel::Bates(p) => 2.0 * p.jumps.lambda * (p.jumps.m() - p.jumps.a),
        }
    }
}

/// Instantaneous VIX squared (index points squared) given the current
/// variance level:
/// `100^2 (theta + (v_t - theta)(1 - e^{-k tau})/(k tau) [+ 2 lambda (m - a)])`.
pub fn vix_squared(model: &VixModel, v_t: f64, tau: f64) -> f64 {
    let p = model.heston();
    let a = one_minus_exp_over_x(p.kappa * tau);
    1.0e4 * (p.theta + (v_t - p.theta) * a + model.jump_shift())
}

/// Convexity-correction VIX future:
/// `100 (sqrt(M) - (1 - e^{-k tau})^2 Var(V_T) / (8 k^2 tau^2 M^{3/2}))`
/// with `M = theta(1 - A) + A E[V_T] [+ 2 lambda (m - a)]` and
/// `A = (1 - e^{-k tau})/(k tau)`.
pub fn vix_future_convexity(model: &VixModel, t: f64, tau: f64) -> Result<StrikeQuote, PricingError> {
    let p = model.heston();
    let a = one_minus_exp_over_x(p.kappa * tau);
    let m = p.theta - p.theta * a + a * cir_mean(p, t) + model.jump_shift();
    if !(m > 0.0) {
        return Err(PricingError::NonPositiveVixMean);
    }
    let var_vt = cir_variance(p, t);
    let value = 100.0 * (m.sqrt() - a * a * var_vt / (8.0 * m.powf(1.5)));
    Ok(StrikeQuote {
        value: value.max(0.0),
        method: Method::Convexity,
        std_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::JumpParams;
    use proptest::prelude::*;

    fn table1_heston() -> HestonParams {
        HestonParams {
            r: -0.0018,
            kappa: 0.8519,
            theta: 0.1574,
            sigma: 0.2403,
            rho: -0.8740,
            v0: 0.0093,
        }
    }

    fn merton_121() -> MertonParams {
        MertonParams {
            r: -0.0044,
            sigma: 0.1,
            jumps: JumpParams {
                lambda: 0.0038,
                a: -0.0001,
                b2: 0.05,
            },
        }
    }

    fn bates_131() -> BatesParams {
        BatesParams {
            heston: HestonParams {
                r: -0.0044,
                kappa: 0.8269,
                theta: 0.1793,
                sigma: 0.2916,
                rho: -0.8734,
                v0: 0.0103,
            },
            jumps: JumpParams {
                lambda: 0.0038,
                a: -0.0001,
                b2: 0.05,
            },
        }
    }

    #[test]
    fn heston_variance_strike_table1() {
        let q = variance_strike_heston(&table1_heston(), 1.0);
        assert!((q.value - 0.0577).abs() < 1e-4, "{}", q.value);
        assert_eq!(q.method, Method::Analytic);
    }

    #[test]
    fn heston_variance_strike_stationary() {
        let p = HestonParams {
            v0: 0.04,
            theta: 0.04,
            ..table1_heston()
        };
        assert_eq!(variance_strike_heston(&p, 2.5).value, 0.04);
    }

    #[test]
    fn merton_variance_strike_121() {
        let q = variance_strike_merton(&merton_121(), 1.0);
        assert!((q.value - 0.0102).abs() < 1e-4, "{}", q.value);
        // independent of maturity
        assert_eq!(q.value, variance_strike_merton(&merton_121(), 7.0).value);
    }

    #[test]
    fn merton_no_jumps_reduces_to_sigma_squared() {
        let mut p = merton_121();
        p.jumps.lambda = 0.0;
        assert_eq!(variance_strike_merton(&p, 1.0).value, p.sigma * p.sigma);
    }

    #[test]
    fn bates_variance_strike_131() {
        let q = variance_strike_bates(&bates_131(), 1.0);
        assert!((q.value - 0.0645).abs() < 1e-4, "{}", q.value);
    }

    #[test]
    fn bates_without_jumps_is_heston() {
        let mut p = bates_131();
        p.jumps.lambda = 0.0;
        let b = variance_strike_bates(&p, 1.0).value;
        let h = variance_strike_heston(&p.heston, 1.0).value;
        assert_eq!(b, h);
    }

    #[test]
    fn levy_strike_delta_zero_matches_heston() {
        let s = StableParams {
            alpha: 2.0,
            sigma_s: 0.5,
            beta: 0.0,
            delta: 0.0,
        };
        for t in [0.25, 1.0, 3.0] {
            let l = variance_strike_levy_heston(&table1_heston(), &s, t).unwrap();
            let h = variance_strike_heston(&table1_heston(), t);
            assert!((l.value - h.value).abs() < 1e-15);
        }
    }

    #[test]
    fn levy_strike_144() {
        let s = StableParams {
            alpha: 1.5,
            sigma_s: 0.5,
            beta: 0.0,
            delta: 0.0,
        };
        let q = variance_strike_levy_heston(&table1_heston(), &s, 1.0).unwrap();
        assert!((q.value - 0.0577).abs() < 1e-4, "{}", q.value);
    }

    #[test]
    fn levy_strike_with_location_term() {
        // Independent evaluation of the closed form at alpha = 1.7, delta = 0.05.
        let s = StableParams {
            alpha: 1.7,
            sigma_s: 0.5,
            beta: 0.0,
            delta: 0.05,
        };
        let p = table1_heston();
        let q = variance_strike_levy_heston(&p, &s, 1.0).unwrap();
        let e = (-p.kappa).exp();
        let expect = p.theta
            + (1.0 - e) * (p.kappa * p.v0 - p.kappa * p.theta + s.delta) / (p.kappa * p.kappa)
            - s.delta * e / p.kappa;
        assert!((q.value - expect).abs() < 1e-14, "{} vs {expect}", q.value);
        assert!((q.value - 0.0721831754963919).abs() < 1e-12);
    }

    #[test]
    fn levy_strike_rejects_negative_expected_variance() {
        let s = StableParams {
            alpha: 1.7,
            sigma_s: 0.5,
            beta: 0.0,
            delta: -5.0,
        };
        assert!(variance_strike_levy_heston(&table1_heston(), &s, 1.0).is_err());
    }

    #[test]
    fn levy_strike_delta_needs_heavy_alpha() {
        let s = StableParams {
            alpha: 0.9,
            sigma_s: 0.5,
            beta: 0.0,
            delta: 0.01,
        };
        let err = variance_strike_levy_heston(&table1_heston(), &s, 1.0).unwrap_err();
        assert_eq!(err, PricingError::DeltaRequiresHeavyAlpha);
    }

    #[test]
    fn convexity_deterministic_rv() {
        let q = vol_strike_convexity(0.04, 0.0, 0.0).unwrap();
        assert_eq!(q.value, 0.2);
        assert_eq!(q.method, Method::Convexity);
    }

    #[test]
    fn convexity_requires_positive_mean() {
        assert_eq!(
            vol_strike_convexity(0.0, 0.1, 0.0).unwrap_err(),
            PricingError::NonPositiveMean
        );
    }

    #[test]
    fn convexity_clamps_runaway_correction() {
        let (q, clamped) = vol_strike_convexity_flagged(1e-4, 10.0, 0.0).unwrap();
        assert!(clamped);
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn merton_convexity_121() {
        let q = vol_strike_convexity_merton(&merton_121(), 1.0).unwrap();
        assert!((q.value - 0.097).abs() < 2e-3, "{}", q.value);
        assert!((q.value - 0.0974822).abs() < 1e-6, "{}", q.value);
    }

    #[test]
    fn heston_convexity_printed_published_value() {
        let q =
            vol_strike_convexity_heston(&table1_heston(), 1.0, VarianceFormulaMode::Printed)
                .unwrap();
        assert!((q.value - 0.3012).abs() < 2e-3, "{}", q.value);
    }

    #[test]
    fn bates_convexity_printed_published_value() {
        let q = vol_strike_convexity_bates(&bates_131(), 1.0, VarianceFormulaMode::Printed).unwrap();
        assert!((q.value - 0.3445).abs() < 2e-3, "{}", q.value);
    }

    #[test]
    fn corrected_mode_respects_jensen_bound() {
        let q =
            vol_strike_convexity_heston(&table1_heston(), 1.0, VarianceFormulaMode::Corrected)
                .unwrap();
        let kvar = variance_strike_heston(&table1_heston(), 1.0).value;
        assert!(q.value <= kvar.sqrt(), "{} > sqrt({kvar})", q.value);

        let qb =
            vol_strike_convexity_bates(&bates_131(), 1.0, VarianceFormulaMode::Corrected).unwrap();
        let kvarb = variance_strike_bates(&bates_131(), 1.0).value;
        assert!(qb.value <= kvarb.sqrt());
    }

    #[test]
    fn merton_convexity_close_to_diffusive_floor() {
        // RV >= sigma^2 a.s. bounds the true strike below by sigma; the
        // second-order approximation may dip slightly under it (the
        // published value does too) but never far.
        let p = merton_121();
        let q = vol_strike_convexity_merton(&p, 1.0).unwrap();
        assert!(q.value >= p.sigma * 0.95, "{}", q.value);
        assert!(q.value <= variance_strike_merton(&p, 1.0).value.sqrt());
    }

    #[test]
    fn vix_squared_at_long_run_level() {
        let m = VixModel::Heston(table1_heston());
        let v = vix_squared(&m, table1_heston().theta, 30.0 / 365.0);
        assert!((v - 1.0e4 * table1_heston().theta).abs() < 1e-9);
    }

    #[test]
    fn vix_squared_bates_reduces_to_heston() {
        let mut b = bates_131();
        b.jumps.lambda = 0.0;
        let mb = VixModel::Bates(b);
        let mh = VixModel::Heston(b.heston);
        assert_eq!(
            vix_squared(&mb, 0.02, 30.0 / 365.0),
            vix_squared(&mh, 0.02, 30.0 / 365.0)
        );
    }

    #[test]
    fn vix_future_at_inception_is_spot_vix() {
        let tau = 30.0 / 365.0;
        for model in [VixModel::Heston(table1_heston()), VixModel::Bates(bates_131())] {
            let f = vix_future_convexity(&model, 0.0, tau).unwrap();
            let spot = (vix_squared(&model, model.heston().v0, tau)).sqrt();
            assert!((f.value - spot).abs() < 1e-12, "{} vs {spot}", f.value);
        }
    }

    #[test]
    fn vix_future_sigma_to_zero_limit() {
        let p = HestonParams {
            sigma: 1e-9,
            ..table1_heston()
        };
        let model = VixModel::Heston(p);
        let tau = 30.0 / 365.0;
        let t = 0.5;
        let f = vix_future_convexity(&model, t, tau).unwrap();
        let a = one_minus_exp_over_x(p.kappa * tau);
        let m = p.theta - p.theta * a + a * cir_mean(&p, t);
        assert!((f.value - 100.0 * m.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn vix_future_bates_lambda_zero_equals_heston() {
        let mut b = bates_131();
        b.jumps.lambda = 0.0;
        let fb = vix_future_convexity(&VixModel::Bates(b), 33.0 / 365.0, 30.0 / 365.0).unwrap();
        let fh =
            vix_future_convexity(&VixModel::Heston(b.heston), 33.0 / 365.0, 30.0 / 365.0).unwrap();
        assert!((fb.value - fh.value).abs() < 1e-10);
    }

    proptest! {
        // Jensen bound for VIX futures: F(T) <= 100 sqrt(E[VIX_T^2] / 100^2).
        #[test]
        fn vix_future_jensen(kappa in 0.05f64..3.0, theta in 0.005f64..0.5,
                             sigma in 0.01f64..1.0, v0 in 0.0f64..0.5, t in 0.0f64..3.0) {
            let p = HestonParams { r: 0.0, kappa, theta, sigma, rho: -0.5, v0 };
            let model = VixModel::Heston(p);
            let tau = 30.0 / 365.0;
            if let Ok(f) = vix_future_convexity(&model, t, tau) {
                let a = one_minus_exp_over_x(kappa * tau);
                let second = theta - theta * a + a * cir_mean(&p, t);
                prop_assert!(f.value <= 100.0 * second.sqrt() + 1e-12);
            }
        }

        // Bates with lambda = 0 equals Heston for every pricing operation.
        #[test]
        fn bates_reduction(kappa in 0.05f64..3.0, theta in 0.005f64..0.5,
                           sigma in 0.01f64..1.0, v0 in 0.001f64..0.5, t in 0.05f64..3.0) {
            let h = HestonParams { r: 0.0, kappa, theta, sigma, rho: -0.5, v0 };
            let b = BatesParams { heston: h, jumps: JumpParams { lambda: 0.0, a: 0.1, b2: 0.05 } };
            prop_assert_eq!(variance_strike_bates(&b, t).value, variance_strike_heston(&h, t).value);
            let vb = vol_strike_convexity_bates(&b, t, VarianceFormulaMode::Corrected).unwrap().value;
            let vh = vol_strike_convexity_heston(&h, t, VarianceFormulaMode::Corrected).unwrap().value;
            prop_assert!((vb - vh).abs() < 1e-15);
        }
    }
}
