//! CIR variance-process transition sampling.
//!
//! The exact scheme draws `V_{t+dt} | V_t` from its noncentral
//! chi-square law: with `c = sigma^2 (1 - e^{-k dt})/(4k)`,
//! `d = 4 k theta / sigma^2` and `nc = V_t e^{-k dt} / c`,
//! `V_{t+dt} = c * chi'^2_d(nc)`. The Euler scheme applies full
//! truncation: `V^+` inside both drift and diffusion, state left
//! unclamped.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::params::HestonParams;

/// Discretization scheme for the variance path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    ExactCir,
    FullTruncationEuler,
}

impl std::str::FromStr for Scheme {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "exact_cir" | "exact-cir" => Ok(Scheme::ExactCir),
            "euler" | "full_truncation_euler" | "full-truncation-euler" => {
                Ok(Scheme::FullTruncationEuler)
            }
            _ => Err("scheme must be exact_cir or full_truncation_euler"),
        }
    }
}

/// Precomputed constants for exact transitions over a fixed step.
pub(crate) struct ExactStep {
    decay: f64,
    c: f64,
    dof: f64,
    // chi^2_{d-1} component, present when dof > 1
    gamma_rest: Option<Gamma<f64>>,
}

impl ExactStep {
    pub fn new(p: &HestonParams, dt: f64) -> Self {
        let decay = (-p.kappa * dt).exp();
        let c = p.sigma * p.sigma * (1.0 - decay) / (4.0 * p.kappa);
        let dof = 4.0 * p.kappa * p.theta / (p.sigma * p.sigma);
        let gamma_rest = if dof > 1.0 {
            Some(Gamma::new((dof - 1.0) / 2.0, 2.0).expect("valid gamma shape"))
        } else {
            None
        };
        ExactStep {
            decay,
            c,
            dof,
            gamma_rest,
        }
    }

    /// One exact transition from variance `v` over the configured step.
    pub fn advance<R: Rng>(&self, v: f64, rng: &mut R) -> f64 {
        let nc = v * self.decay / self.c;
        let chi2 = match &self.gamma_rest {
            Some(rest) => {
                let z: f64 = StandardNormal.sample(rng);
                let shifted = z + nc.sqrt();
                shifted * shifted + rest.sample(rng)
            }
            None => {
                // dof <= 1: chi'^2_d(nc) = chi^2_{d + 2N}, N ~ Poisson(nc/2).
                // Means below ~1e-10 carry no jump mass in f64 (and the
                // upstream Knuth sampler misbehaves once exp(-mean)
                // rounds to 1), so they draw zero.
                let mean = nc / 2.0;
                let n = if mean > 1e-10 {
                    Poisson::new(mean)
                        .expect("positive poisson mean")
                        .sample(rng)
                        .max(0.0)
                } else {
                    0.0
                };
                let shape = self.dof / 2.0 + n;
                Gamma::new(shape, 2.0).expect("valid gamma shape").sample(rng)
            }
        };
        self.c * chi2
    }
}

/// Exact transition of the CIR process over a single interval `dt`.
/// Degenerate `sigma = 0` collapses to the deterministic mean-reversion
/// solution.
pub fn exact_cir_transition<R: Rng>(p: &HestonParams, v: f64, dt: f64, rng: &mut R) -> f64 {
    if p.sigma == 0.0 || dt == 0.0 {
        return p.theta + (v - p.theta) * (-p.kappa * dt).exp();
    }
    ExactStep::new(p, dt).advance(v, rng)
}

/// One full-truncation Euler step; `v` may be negative coming in, the
/// positive part drives drift and diffusion.
#[inline]
pub fn euler_step<R: Rng>(p: &HestonParams, v: f64, dt: f64, rng: &mut R) -> f64 {
    let vp = v.max(0.0);
    if p.sigma == 0.0 {
        return v + p.kappa * (p.theta - vp) * dt;
    }
    let z: f64 = StandardNormal.sample(rng);
    v + p.kappa * (p.theta - vp) * dt + p.sigma * (vp * dt).sqrt() * z
}
