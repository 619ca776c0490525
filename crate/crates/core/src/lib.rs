//! Pricing engine for variance swaps, volatility swaps, and VIX futures
//! under Heston, Merton jump-diffusion, Bates, and Levy-driven Heston
//! dynamics.
//!
//! Three routes produce each quote: closed-form/convexity-correction
//! formulas ([`pricing`]), Laplace-transform integration ([`laplace`]),
//! and a Monte Carlo oracle ([`mc`]) that adjudicates the other two.
//! [`calibrate`] fits Heston/Bates parameters to daily index returns by
//! Gibbs sampling, [`market`] loads price and futures CSVs, and
//! [`report`] computes the pricing-error battery and emits
//! tables/CSV/SVG.

// Validation guards are written `!(x > 0.0)` on purpose: the negation
// rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod error;
pub mod laplace;
pub mod market;
pub mod mc;
pub mod moments;
pub mod params;
pub mod pricing;
pub mod report;

pub use error::{CalibrationError, DataError, ParamError, PricingError};
pub use laplace::{LaplaceTransform, QuadratureConfig};
pub use mc::{McEstimate, Scheme, SimConfig};
pub use moments::VarianceFormulaMode;
pub use params::{
    BatesParams, Contract, HestonParams, JumpParams, MertonParams, Model, ModelKind, ParamFile,
    StableParams,
};
pub use pricing::{Method, StrikeQuote, VixModel};
