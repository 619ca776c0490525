//! Monte Carlo ground truth: path simulation for every model,
//! realized-variance estimators, strike and VIX estimators with
//! confidence intervals, and the alpha-stable sampler.
//!
//! Every estimator draws from counter-based per-path substreams keyed by
//! `(seed, path index)`, then reduces the ordered per-path results
//! sequentially. The outcome is bit-identical for a given `(seed,
//! SimConfig)` no matter how many workers run the map, and the
//! `parallel` feature can be disabled without changing any number.

mod cir;
mod stable;

pub use cir::{euler_step, exact_cir_transition, Scheme};
pub use stable::{sample_alpha_stable, stable_fractional_moment};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::error::PricingError;
use crate::params::{HestonParams, JumpParams, Model, StableParams};
use crate::pricing::{vix_squared, VixModel};

/// Simulation settings. `n_steps` is per year of horizon; the grid for a
/// maturity `T` has `max(1, ceil(n_steps * T))` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 100_000,
            n_steps: 1000,
            seed: 0,
            scheme: Scheme::ExactCir,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), PricingError> {
        if self.n_paths == 0 {
            return Err(PricingError::InvalidInput("n_paths must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(PricingError::InvalidInput("n_steps must be >= 1"));
        }
        Ok(())
    }

    fn steps_for(&self, t: f64) -> usize {
        ((self.n_steps as f64 * t).ceil() as usize).max(1)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error,
            n,
        }
    }

    /// Absolute distance to `target` in standard errors (infinite when
    /// the standard error is zero and the means differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Per-path substream: same key, same draws, independent across paths.
fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Ordered per-path map; parallel when the `parallel` feature is on.
fn map_paths<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n as u64).map(f).collect()
    }
}

/// Sequential reference map, always compiled; benches compare it against
/// the parallel path and tests assert the outputs are identical.
fn map_paths_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..n as u64).map(f).collect()
}

/// Variance paths on a uniform grid, row-major `(n_paths, n_times)`.
pub struct CirPaths {
    pub times: Vec<f64>,
    pub n_paths: usize,
    values: Vec<f64>,
}

impl CirPaths {
    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.times.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn terminal(&self) -> Vec<f64> {
        (0..self.n_paths)
            .map(|i| self.path(i)[self.times.len() - 1])
            .collect()
    }
}

/// Simulate variance paths of the square-root process on the grid
/// implied by `cfg`. Exact-scheme paths are nonnegative; Euler paths may
/// dip below zero between steps.
pub fn simulate_cir(p: &HestonParams, t: f64, cfg: &SimConfig) -> Result<CirPaths, PricingError> {
    cfg.validate()?;
    let steps = cfg.steps_for(t);
    let dt = t / steps as f64;
    let p = *p;
    let exact = match cfg.scheme {
        Scheme::ExactCir if p.sigma > 0.0 && t > 0.0 => Some(cir::ExactStep::new(&p, dt)),
        _ => None,
    };
    let scheme = cfg.scheme;
    let rows = map_paths(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut row = Vec::with_capacity(steps + 1);
        let mut v = p.v0;
        row.push(v);
        for _ in 0..steps {
            v = match (&exact, scheme) {
                (Some(step), _) => step.advance(v, &mut rng),
                (None, Scheme::ExactCir) => {
                    // degenerate sigma = 0: deterministic mean reversion
                    p.theta + (v - p.theta) * (-p.kappa * dt).exp()
                }
                (None, Scheme::FullTruncationEuler) => euler_step(&p, v, dt, &mut rng),
            };
            row.push(v);
        }
        row
    });
    let mut values = Vec::with_capacity(cfg.n_paths * (steps + 1));
    for row in rows {
        values.extend_from_slice(&row);
    }
    Ok(CirPaths {
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        n_paths: cfg.n_paths,
        values,
    })
}

/// Jump arrivals and log sizes on one path.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub times: Vec<f64>,
    pub log_sizes: Vec<f64>,
}

fn draw_jumps<R: Rng>(j: &JumpParams, t: f64, rng: &mut R) -> JumpPath {
    let mean = j.lambda * t;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive poisson mean").sample(rng) as usize
    } else {
        0
    };
    let size_dist = Normal::new(j.a, j.b2.sqrt()).expect("valid normal");
    let mut times: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..t)).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let log_sizes = (0..count).map(|_| size_dist.sample(rng)).collect();
    JumpPath { times, log_sizes }
}

/// Compound-Poisson jump records per path: counts `~ Poisson(lambda T)`,
/// log sizes `~ Normal(a, b2)`.
pub fn simulate_jumps(j: &JumpParams, t: f64, cfg: &SimConfig) -> Result<Vec<JumpPath>, PricingError> {
    cfg.validate()?;
    j.validate()?;
    let j = *j;
    Ok(map_paths(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        draw_jumps(&j, t, &mut rng)
    }))
}

/// Trapezoidal `(1/T) \int_0^T V^+ dt` over a uniform grid spanning `[0, T]`.
fn time_average(v_grid: &[f64], t: f64) -> f64 {
    debug_assert!(v_grid.len() >= 2);
    let dt = t / (v_grid.len() - 1) as f64;
    let mut acc = 0.0;
    for w in v_grid.windows(2) {
        acc += 0.5 * (w[0].max(0.0) + w[1].max(0.0)) * dt;
    }
    acc / t
}

/// One path's worth of inputs to [`realized_variance`].
pub struct PathRealization<'a> {
    /// Variance samples on a uniform grid over `[0, T]`; ignored for
    /// constant-volatility dynamics.
    pub v_grid: &'a [f64],
    pub jump_log_sizes: &'a [f64],
}

/// Realized variance of one path under the given model: time-averaged
/// variance plus `(1/T) sum (ln Y_i)^2` where the model has jumps;
/// `sigma^2` replaces the integral under constant volatility. Negative
/// Euler excursions contribute zero (full truncation).
pub fn realized_variance(model: &Model, path: &PathRealization, t: f64) -> f64 {
    let jump_leg =
        |sizes: &[f64]| sizes.iter().map(|x| x * x).sum::<f64>() / t;
    match model {
        Model::Heston(_) | Model::LevyHeston(..) => time_average(path.v_grid, t),
        Model::Merton(p) => p.sigma * p.sigma + jump_leg(path.jump_log_sizes),
        Model::Bates(_) => time_average(path.v_grid, t) + jump_leg(path.jump_log_sizes),
    }
}

fn rv_one_path(model: &Model, t: f64, steps: usize, exact: Option<&cir::ExactStep>, scheme: Scheme, rng: &mut ChaCha8Rng) -> f64 {
    let dt = t / steps as f64;
    match model {
        Model::Heston(p) | Model::Bates(crate::params::BatesParams { heston: p, .. }) => {
            let mut v = p.v0;
            let mut acc = 0.0;
            for _ in 0..steps {
                let next = match (exact, scheme) {
                    (Some(step), _) => step.advance(v, rng),
                    (None, Scheme::ExactCir) => p.theta + (v - p.theta) * (-p.kappa * dt).exp(),
                    (None, Scheme::FullTruncationEuler) => euler_step(p, v, dt, rng),
                };
                acc += 0.5 * (v.max(0.0) + next.max(0.0)) * dt;
                v = next;
            }
            let diffusive = acc / t;
            match model {
                Model::Bates(b) => {
                    let jumps = draw_jumps(&b.jumps, t, rng);
                    diffusive + jumps.log_sizes.iter().map(|x| x * x).sum::<f64>() / t
                }
                _ => diffusive,
            }
        }
        Model::Merton(p) => {
            let jumps = draw_jumps(&p.jumps, t, rng);
            p.sigma * p.sigma + jumps.log_sizes.iter().map(|x| x * x).sum::<f64>() / t
        }
        Model::LevyHeston(..) => unreachable!("levy paths go through simulate_levy_cir"),
    }
}

fn rv_samples_impl(model: &Model, t: f64, cfg: &SimConfig, sequential: bool) -> Vec<f64> {
    let steps = cfg.steps_for(t);
    let dt = t / steps as f64;
    let heston = match model {
        Model::Heston(p) => Some(*p),
        Model::Bates(b) => Some(b.heston),
        _ => None,
    };
    let exact = heston.and_then(|p| {
        (cfg.scheme == Scheme::ExactCir && p.sigma > 0.0).then(|| cir::ExactStep::new(&p, dt))
    });
    let model = *model;
    let scheme = cfg.scheme;
    let f = move |i: u64| {
        let mut rng = path_rng(cfg.seed, i);
        rv_one_path(&model, t, steps, exact.as_ref(), scheme, &mut rng)
    };
    if sequential {
        map_paths_seq(cfg.n_paths, f)
    } else {
        map_paths(cfg.n_paths, f)
    }
}

/// Per-path realized-variance samples, in path order. This is the raw
/// material behind [`estimate_strikes`], exposed for dumps and external
/// analysis.
pub fn rv_samples(model: &Model, t: f64, cfg: &SimConfig) -> Result<Vec<f64>, PricingError> {
    cfg.validate()?;
    if t <= 0.0 {
        return Err(PricingError::InvalidInput("maturity must be > 0"));
    }
    if matches!(model, Model::LevyHeston(..)) {
        return Err(PricingError::InvalidInput(
            "use simulate_levy_cir for levy-heston realized variance",
        ));
    }
    Ok(rv_samples_impl(model, t, cfg, false))
}

/// Fair-strike Monte Carlo estimates: `K_var` from the sample mean of
/// realized variance, `K_vol` from the sample mean of its square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrikePair {
    pub k_var: McEstimate,
    pub k_vol: McEstimate,
}

pub fn estimate_strikes(model: &Model, t: f64, cfg: &SimConfig) -> Result<StrikePair, PricingError> {
    estimate_strikes_impl(model, t, cfg, false)
}

/// Sequential twin of [`estimate_strikes`]; same numbers, one worker.
pub fn estimate_strikes_seq(model: &Model, t: f64, cfg: &SimConfig) -> Result<StrikePair, PricingError> {
    estimate_strikes_impl(model, t, cfg, true)
}

fn estimate_strikes_impl(
    model: &Model,
    t: f64,
    cfg: &SimConfig,
    sequential: bool,
) -> Result<StrikePair, PricingError> {
    cfg.validate()?;
    if t <= 0.0 {
        return Err(PricingError::InvalidInput("maturity must be > 0"));
    }
    if matches!(model, Model::LevyHeston(..)) {
        return Err(PricingError::InvalidInput(
            "use simulate_levy_cir for levy-heston strike estimates",
        ));
    }
    let rv = rv_samples_impl(model, t, cfg, sequential);
    let sqrt_rv: Vec<f64> = rv.iter().map(|x| x.sqrt()).collect();
    Ok(StrikePair {
        k_var: McEstimate::from_samples(&rv),
        k_vol: McEstimate::from_samples(&sqrt_rv),
    })
}

/// `F(T) = E[VIX_T]` by exact sampling of the terminal variance law; the
/// VIX level per draw comes from [`vix_squared`]. `T = 0` is
/// deterministic with zero standard error.
pub fn estimate_vix_future(
    model: &VixModel,
    t: f64,
    tau: f64,
    cfg: &SimConfig,
) -> Result<McEstimate, PricingError> {
    cfg.validate()?;
    let p = *model.heston();
    if t == 0.0 {
        let spot = vix_squared(model, p.v0, tau).sqrt();
        return Ok(McEstimate {
            mean: spot,
            std_error: 0.0,
            n: cfg.n_paths,
        });
    }
    let model = *model;
    let samples = map_paths(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let v_t = exact_cir_transition(&p, p.v0, t, &mut rng);
        vix_squared(&model, v_t, tau).sqrt()
    });
    Ok(McEstimate::from_samples(&samples))
}

/// Log-contract estimate of `VIX^2` (index points squared) at the quote
/// time, conditional on the current variance `v0`:
/// `-(2/tau) E[ln(S_{t+tau} / (S_t e^{r tau}))] * 100^2`.
///
/// Simulates the price and variance jointly (correlation `rho`) with
/// full-truncation Euler over the window; continuous dynamics only.
pub fn estimate_vix_log_contract(
    p: &HestonParams,
    _t: f64,
    tau: f64,
    cfg: &SimConfig,
) -> Result<McEstimate, PricingError> {
    cfg.validate()?;
    if tau <= 0.0 {
        return Err(PricingError::InvalidInput("tau must be > 0"));
    }
    let p = *p;
    let steps = cfg.steps_for(tau);
    let dt = tau / steps as f64;
    let rho_perp = (1.0 - p.rho * p.rho).sqrt();
    let samples = map_paths(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut v = p.v0;
        let mut log_excess = 0.0; // ln(S_{t+tau}/S_t) - r tau
        for _ in 0..steps {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let vp = v.max(0.0);
            log_excess += -0.5 * vp * dt + (vp * dt).sqrt() * z1;
            let zv = p.rho * z1 + rho_perp * z2;
            v = v + p.kappa * (p.theta - vp) * dt + p.sigma * (vp * dt).sqrt() * zv;
        }
        -2.0 / tau * log_excess * 1.0e4
    });
    Ok(McEstimate::from_samples(&samples))
}

/// Simulate a daily log-return series under Heston or Bates dynamics
/// (full-truncation Euler on `(ln S, V)`, one observation per step, jumps
/// compounded within the step at the model's annual intensity). Single
/// sequential stream, reproducible by seed; used to manufacture
/// calibration inputs.
pub fn simulate_daily_returns(
    model: &Model,
    n_obs: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<f64>, PricingError> {
    let (p, jumps) = match model {
        Model::Heston(p) => (*p, None),
        Model::Bates(b) => (b.heston, Some(b.jumps)),
        _ => {
            return Err(PricingError::InvalidInput(
                "return simulation supports heston and bates only",
            ))
        }
    };
    if !(dt > 0.0) {
        return Err(PricingError::InvalidInput("dt must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho_perp = (1.0 - p.rho * p.rho).sqrt();
    let mut v = p.v0;
    let mut out = Vec::with_capacity(n_obs);
    for _ in 0..n_obs {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let vp = v.max(0.0);
        let mut y = (p.r - 0.5 * vp) * dt + (vp * dt).sqrt() * z1;
        if let Some(j) = jumps {
            let draw = draw_jumps(&j, dt, &mut rng);
            y += draw.log_sizes.iter().sum::<f64>();
        }
        let zv = p.rho * z1 + rho_perp * z2;
        v = (v + p.kappa * (p.theta - vp) * dt + p.sigma * (vp * dt).sqrt() * zv).max(1e-8);
        out.push(y);
    }
    Ok(out)
}

/// Levy-driven variance simulation result.
#[derive(Debug, Clone)]
pub struct LevySim {
    pub k_var: McEstimate,
    pub v_terminal: Vec<f64>,
}

/// Full-truncation Euler for `dV = kappa (theta - V) dt + sigma sqrt(V) dL`
/// with a symmetric stable driver; increments scale as `(sigma_s dt)^{1/alpha}`.
///
/// Supported for the symmetric case with `alpha > 1`. At `alpha = 2` the
/// driver is Brownian up to scale and the strike estimate matches the
/// square-root-diffusion value; for `alpha < 2` the truncation inflicts a
/// small positive bias that shrinks with the step size.
pub fn simulate_levy_cir(
    p: &HestonParams,
    s: &StableParams,
    t: f64,
    cfg: &SimConfig,
) -> Result<LevySim, PricingError> {
    cfg.validate()?;
    s.validate()?;
    if s.alpha <= 1.0 {
        return Err(PricingError::InvalidInput("alpha <= 1 unsupported in simulation"));
    }
    if !s.is_symmetric() {
        return Err(PricingError::InvalidInput(
            "levy variance simulation requires the symmetric case (beta = delta = 0)",
        ));
    }
    if t <= 0.0 {
        return Err(PricingError::InvalidInput("maturity must be > 0"));
    }
    let p = *p;
    let alpha = s.alpha;
    let steps = cfg.steps_for(t);
    let dt = t / steps as f64;
    let inc_scale = (s.sigma_s * dt).powf(1.0 / alpha);
    let rows = map_paths(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut v = p.v0;
        let mut acc = 0.0;
        for _ in 0..steps {
            let vp = v.max(0.0);
            let next = if p.sigma == 0.0 {
                v + p.kappa * (p.theta - vp) * dt
            } else {
                let xi = stable::standard_stable(alpha, 0.0, &mut rng);
                v + p.kappa * (p.theta - vp) * dt + p.sigma * vp.sqrt() * inc_scale * xi
            };
            acc += 0.5 * (vp + next.max(0.0)) * dt;
            v = next;
        }
        (acc / t, v)
    });
    let rv: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let v_terminal = rows.iter().map(|r| r.1).collect();
    Ok(LevySim {
        k_var: McEstimate::from_samples(&rv),
        v_terminal,
    })
}
