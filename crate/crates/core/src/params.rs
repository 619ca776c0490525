//! Model parameter sets, their validity rules, and derived quantities
//! shared by every pricing route.
//!
//! All types are plain `Copy` value types; once validated they can be
//! shared freely across threads.

use serde::Deserialize;
use std::fmt;
use std::path::Path;

use crate::error::ParamError;

/// Days-per-year convention used when converting calendar-day maturities.
pub const DAYS_PER_YEAR: f64 = 365.0;

/// Default VIX window: 30 calendar days.
pub const DEFAULT_TAU: f64 = 30.0 / 365.0;

/// Square-root (CIR) stochastic variance dynamics:
/// `dV = kappa (theta - V) dt + sigma sqrt(V) dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    /// Spot interest rate (1/year). May be negative.
    pub r: f64,
    /// Mean-reversion speed (1/year).
    pub kappa: f64,
    /// Long-run variance level (1/year).
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Correlation between price and variance Brownian motions.
    pub rho: f64,
    /// Initial instantaneous variance (1/year).
    pub v0: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(ParamError::Invalid("kappa must be > 0"));
        }
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(ParamError::Invalid("theta must be > 0"));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(ParamError::Invalid("sigma must be > 0"));
        }
        if !self.rho.is_finite() || !(-1.0..=1.0).contains(&self.rho) {
            return Err(ParamError::Invalid("rho out of range [-1, 1]"));
        }
        // v0 = 0 is the CIR boundary and stays priceable.
        if !self.v0.is_finite() || self.v0 < 0.0 {
            return Err(ParamError::Invalid("v0 must be >= 0"));
        }
        if !self.r.is_finite() {
            return Err(ParamError::Invalid("r must be finite"));
        }
        Ok(())
    }

    /// Feller condition `2 kappa theta >= sigma^2`. A violation is a
    /// warning, not an error: the variance process can then touch zero
    /// but every formula in this crate remains well-defined.
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.kappa * self.theta >= self.sigma * self.sigma
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.feller_satisfied() {
            w.push(format!(
                "Feller condition violated: 2*kappa*theta = {:.6} < sigma^2 = {:.6}",
                2.0 * self.kappa * self.theta,
                self.sigma * self.sigma
            ));
        }
        w
    }
}

/// Compound-Poisson jump leg: intensity `lambda`, log-jump sizes
/// `ln Y ~ N(a, b2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpParams {
    /// Jump intensity (1/year).
    pub lambda: f64,
    /// Mean of log jump size.
    pub a: f64,
    /// Variance of log jump size.
    pub b2: f64,
}

impl JumpParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(ParamError::Invalid("lambda must be >= 0"));
        }
        if !self.a.is_finite() {
            return Err(ParamError::Invalid("a must be finite"));
        }
        if !self.b2.is_finite() || self.b2 <= 0.0 {
            return Err(ParamError::Invalid("b2 must be > 0"));
        }
        Ok(())
    }

    /// Mean relative jump size `m = e^{a + b2/2} - 1`, always recomputed
    /// from `(a, b2)`.
    pub fn m(&self) -> f64 {
        (self.a + 0.5 * self.b2).exp_m1()
    }

    /// `E[(ln Y)^2] = a^2 + b2`.
    pub fn log_jump_second_moment(&self) -> f64 {
        self.a * self.a + self.b2
    }

    /// `E[(ln Y)^4] = a^4 + 6 a^2 b^2 + 3 b^4`.
    pub fn log_jump_fourth_moment(&self) -> f64 {
        let a2 = self.a * self.a;
        a2 * a2 + 6.0 * a2 * self.b2 + 3.0 * self.b2 * self.b2
    }
}

/// Constant-volatility jump-diffusion price dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertonParams {
    /// Spot interest rate (1/year).
    pub r: f64,
    /// Constant diffusive volatility (1/sqrt-year).
    pub sigma: f64,
    pub jumps: JumpParams,
}

impl MertonParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.r.is_finite() {
            return Err(ParamError::Invalid("r must be finite"));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(ParamError::Invalid("sigma must be > 0"));
        }
        self.jumps.validate()
    }
}

/// Stochastic volatility plus price jumps; the jump process is
/// independent of both Brownian motions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatesParams {
    pub heston: HestonParams,
    pub jumps: JumpParams,
}

impl BatesParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        self.heston.validate()?;
        self.jumps.validate()
    }
}

/// Alpha-stable distribution parameters in the dispersion convention:
/// characteristic function `exp(i delta u - sigma_s |u|^alpha)` in the
/// symmetric case, so `alpha = 2` corresponds to `Normal(delta, 2 sigma_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    /// Stability exponent in (0, 2].
    pub alpha: f64,
    /// Dispersion (scale^alpha), > 0.
    pub sigma_s: f64,
    /// Skewness in [-1, 1].
    pub beta: f64,
    /// Location.
    pub delta: f64,
}

impl StableParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha > 2.0 {
            return Err(ParamError::Invalid("alpha must be in (0, 2]"));
        }
        if !self.sigma_s.is_finite() || self.sigma_s <= 0.0 {
            return Err(ParamError::Invalid("sigma_s must be > 0"));
        }
        if !self.beta.is_finite() || !(-1.0..=1.0).contains(&self.beta) {
            return Err(ParamError::Invalid("beta out of range [-1, 1]"));
        }
        if !self.delta.is_finite() {
            return Err(ParamError::Invalid("delta must be finite"));
        }
        // Strict stability at alpha = 1 requires a symmetric law.
        if self.alpha == 1.0 && self.beta != 0.0 {
            return Err(ParamError::Invalid("alpha = 1 requires beta = 0"));
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.beta == 0.0 && self.delta == 0.0
    }
}

/// Contract terms: swap/future maturity and the VIX window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    /// Maturity in years.
    pub maturity_t: f64,
    /// VIX window in years; defaults to 30/365.
    pub tau: f64,
}

impl Default for Contract {
    fn default() -> Self {
        Contract {
            maturity_t: 1.0,
            tau: DEFAULT_TAU,
        }
    }
}

impl Contract {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.maturity_t.is_finite() || self.maturity_t <= 0.0 {
            return Err(ParamError::Invalid("maturity_T must be > 0"));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(ParamError::Invalid("tau must be > 0"));
        }
        Ok(())
    }
}

/// Which price dynamics a command or estimator runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelKind {
    Heston,
    Merton,
    Bates,
    LevyHeston,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Heston => "heston",
            ModelKind::Merton => "merton",
            ModelKind::Bates => "bates",
            ModelKind::LevyHeston => "levy-heston",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, ParamError> {
        match s.to_ascii_lowercase().as_str() {
            "heston" => Ok(ModelKind::Heston),
            "merton" => Ok(ModelKind::Merton),
            "bates" => Ok(ModelKind::Bates),
            "levy-heston" | "levy_heston" | "levy" => Ok(ModelKind::LevyHeston),
            _ => Err(ParamError::Invalid(
                "model must be one of heston|merton|bates|levy-heston",
            )),
        }
    }
}

/// A fully specified model: kind plus its parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Heston(HestonParams),
    Merton(MertonParams),
    Bates(BatesParams),
    LevyHeston(HestonParams, StableParams),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Heston(_) => ModelKind::Heston,
            Model::Merton(_) => ModelKind::Merton,
            Model::Bates(_) => ModelKind::Bates,
            Model::LevyHeston(..) => ModelKind::LevyHeston,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            Model::Heston(p) => p.validate(),
            Model::Merton(p) => p.validate(),
            Model::Bates(p) => p.validate(),
            Model::LevyHeston(p, s) => {
                p.validate()?;
                s.validate()
            }
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self {
            Model::Heston(p) | Model::LevyHeston(p, _) => p.warnings(),
            Model::Bates(p) => p.heston.warnings(),
            Model::Merton(_) => Vec::new(),
        }
    }
}

/// Flat key-value parameter file. Keys mirror the field names above;
/// unused keys for the selected model are ignored.
///
/// ```text
/// r = -0.0018
/// kappa = 0.8519
/// theta = 0.1574
/// sigma = 0.2403
/// rho = -0.8740
/// v0 = 0.0093
/// lambda = 0.0038
/// a = -0.0001
/// b2 = 0.05
/// alpha = 2.0
/// sigma_s = 0.5
/// beta = 0.0
/// delta = 0.0
/// ```
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub r: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
    pub v0: Option<f64>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub b2: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma_s: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
}

impl ParamFile {
    pub fn load(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ParamError::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    /// Overlay `other` on top of `self`: any key set in `other` wins.
    pub fn merged(mut self, other: &ParamFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(r, kappa, theta, sigma, rho, v0, lambda, a, b2, alpha, sigma_s, beta, delta);
        self
    }

    fn require(&self, field: Option<f64>, name: &'static str) -> Result<f64, ParamError> {
        field.ok_or(ParamError::Missing(name))
    }

    fn heston(&self) -> Result<HestonParams, ParamError> {
        Ok(HestonParams {
            r: self.r.unwrap_or(0.0),
            kappa: self.require(self.kappa, "kappa")?,
            theta: self.require(self.theta, "theta")?,
            sigma: self.require(self.sigma, "sigma")?,
            rho: self.rho.unwrap_or(0.0),
            v0: self.require(self.v0, "v0")?,
        })
    }

    fn jumps(&self) -> Result<JumpParams, ParamError> {
        Ok(JumpParams {
            lambda: self.require(self.lambda, "lambda")?,
            a: self.require(self.a, "a")?,
            b2: self.require(self.b2, "b2")?,
        })
    }

    fn stable(&self) -> Result<StableParams, ParamError> {
        Ok(StableParams {
            alpha: self.require(self.alpha, "alpha")?,
            sigma_s: self.sigma_s.unwrap_or(0.5),
            beta: self.beta.unwrap_or(0.0),
            delta: self.delta.unwrap_or(0.0),
        })
    }

    /// Assemble and validate the parameter set for `kind`.
    pub fn build(&self, kind: ModelKind) -> Result<Model, ParamError> {
        let model = match kind {
            ModelKind::Heston => Model::Heston(self.heston()?),
            ModelKind::Merton => Model::Merton(MertonParams {
                r: self.r.unwrap_or(0.0),
                sigma: self.require(self.sigma, "sigma")?,
                jumps: self.jumps()?,
            }),
            ModelKind::Bates => Model::Bates(BatesParams {
                heston: self.heston()?,
                jumps: self.jumps()?,
            }),
            ModelKind::LevyHeston => Model::LevyHeston(self.heston()?, self.stable()?),
        };
        model.validate()?;
        Ok(model)
    }
}

impl std::str::FromStr for ParamFile {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, ParamError> {
        toml::from_str(s).map_err(|e| ParamError::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn table1_heston() -> HestonParams {
        HestonParams {
            r: -0.0018,
            kappa: 0.8519,
            theta: 0.1574,
            sigma: 0.2403,
            rho: -0.8740,
            v0: 0.0093,
        }
    }

    #[test]
    fn table1_heston_is_valid() {
        table1_heston().validate().unwrap();
        assert!(table1_heston().feller_satisfied());
        assert!(table1_heston().warnings().is_empty());
    }

    #[test]
    fn rho_out_of_range_is_reported() {
        let p = HestonParams {
            rho: -1.2,
            ..table1_heston()
        };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("rho out of range"), "{err}");
    }

    #[test]
    fn first_violation_wins() {
        let p = HestonParams {
            kappa: -1.0,
            theta: -1.0,
            ..table1_heston()
        };
        assert!(p.validate().unwrap_err().to_string().contains("kappa"));
    }

    #[test]
    fn jump_mean_relative_size() {
        let j = JumpParams {
            lambda: 0.0038,
            a: -0.0001,
            b2: 0.05,
        };
        // e^{-0.0001 + 0.025} - 1
        assert!((j.m() - 0.025212).abs() < 1e-5, "m = {}", j.m());
    }

    #[test]
    fn v0_zero_is_allowed() {
        let p = HestonParams {
            v0: 0.0,
            ..table1_heston()
        };
        p.validate().unwrap();
    }

    #[test]
    fn feller_violation_is_warning_not_error() {
        let p = HestonParams {
            sigma: 1.0,
            ..table1_heston()
        };
        p.validate().unwrap();
        assert_eq!(p.warnings().len(), 1);
    }

    #[test]
    fn param_file_round_trip() {
        let text = "r = -0.0018\nkappa = 0.8519\ntheta = 0.1574\nsigma = 0.2403\nrho = -0.8740\nv0 = 0.0093\n";
        let pf: ParamFile = text.parse().unwrap();
        let model = pf.build(ModelKind::Heston).unwrap();
        assert_eq!(model, Model::Heston(table1_heston()));
    }

    #[test]
    fn param_file_missing_key() {
        let pf: ParamFile = "kappa = 1.0".parse().unwrap();
        let err = pf.build(ModelKind::Heston).unwrap_err();
        assert!(err.to_string().contains("theta"), "{err}");
    }

    #[test]
    fn param_file_rejects_unknown_keys() {
        assert!("kapa = 1.0".parse::<ParamFile>().is_err());
    }

    #[test]
    fn merge_prefers_overrides() {
        let base: ParamFile = "kappa = 1.0\ntheta = 0.04".parse().unwrap();
        let over: ParamFile = "kappa = 2.0".parse().unwrap();
        let merged = base.merged(&over);
        assert_eq!(merged.kappa, Some(2.0));
        assert_eq!(merged.theta, Some(0.04));
    }

    #[test]
    fn stable_alpha_one_requires_symmetry() {
        let s = StableParams {
            alpha: 1.0,
            sigma_s: 1.0,
            beta: 0.5,
            delta: 0.0,
        };
        assert!(s.validate().is_err());
    }

    proptest! {
        // m strictly increases in both a and b2; m = 0 iff a + b2/2 = 0.
        #[test]
        fn jump_mean_monotone(a in -1.0f64..1.0, b2 in 0.01f64..1.0, da in 1e-6f64..0.5, db in 1e-6f64..0.5) {
            let j = JumpParams { lambda: 1.0, a, b2 };
            let ja = JumpParams { lambda: 1.0, a: a + da, b2 };
            let jb = JumpParams { lambda: 1.0, a, b2: b2 + db };
            prop_assert!(ja.m() > j.m());
            prop_assert!(jb.m() > j.m());
        }

        #[test]
        fn jump_mean_zero_iff_exponent_zero(a in -1.0f64..1.0) {
            let j = JumpParams { lambda: 1.0, a, b2: -2.0 * a };
            if j.b2 > 0.0 {
                prop_assert!(j.m().abs() < 1e-15);
            }
            let k = JumpParams { lambda: 1.0, a, b2: 0.5 };
            if (a + 0.25).abs() > 1e-9 {
                prop_assert!(k.m() != 0.0);
            }
        }

        // validate is idempotent: a second validation of valid params passes.
        #[test]
        fn validate_idempotent(kappa in 0.01f64..5.0, theta in 0.001f64..1.0,
                               sigma in 0.01f64..2.0, rho in -1.0f64..1.0, v0 in 0.0f64..1.0) {
            let p = HestonParams { r: 0.0, kappa, theta, sigma, rho, v0 };
            p.validate().unwrap();
            p.validate().unwrap();
        }
    }
}
