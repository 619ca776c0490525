//! Bayesian calibration of Heston and Bates models from daily log
//! returns: Gibbs sampling for the parameters, single-site
//! Metropolis-Hastings for the latent variance path.
//!
//! The sampler works on the Euler discretization of `(ln S, V)` with one
//! observation per step. Writing `w_t = sqrt(V_{t-1} dt)`, the two
//! standardized residuals per observation are
//!
//! ```text
//! eps_t = (y_t - r dt + V_{t-1} dt / 2 - J_t Z_t) / w_t            ~ N(0, 1)
//! e_t   = (V_t - V_{t-1} - (alpha - kappa V_{t-1}) dt) / w_t       = psi eps_t + sqrt(Omega) eta_t
//! ```
//!
//! with `alpha = kappa theta`, `psi = rho sigma`, and
//! `Omega = sigma^2 (1 - rho^2)`. Every parameter block then has a
//! conjugate Normal / Normal-InverseGamma / Beta full conditional, and
//! the latent path moves one site at a time under a random-walk proposal
//! whose scale adapts during burn-in only.
//!
//! `sigma` and `rho` are recovered from the `(psi, Omega)` draws
//! (`sigma = sqrt(Omega + psi^2)`, `rho = psi / sigma`), so every
//! retained draw satisfies `Omega > 0`, `sigma > 0`, `rho` in (-1, 1),
//! `lambda` in (0, 1), and `b2 > 0` by construction. `theta` is reported
//! as the ratio of the posterior means of `alpha` and `kappa` (the drift
//! level over the mean-reversion speed), with a linearized standard
//! deviation; the per-draw ratio is heavy-tailed whenever the data only
//! weakly pins down `kappa`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::CalibrationError;
use crate::params::ModelKind;

/// Prior hyperparameters. Inverse-gamma entries are shape/scale
/// (density proportional to `x^{-shape-1} e^{-scale/x}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub r_mean: f64,
    pub r_sd: f64,
    pub kappa_mean: f64,
    pub kappa_sd: f64,
    pub theta_mean: f64,
    pub theta_sd: f64,
    /// `psi | Omega ~ N(0, Omega / psi_precision)`.
    pub psi_precision: f64,
    pub omega_shape: f64,
    pub omega_scale: f64,
    pub lambda_alpha: f64,
    pub lambda_beta: f64,
    pub a_mean: f64,
    pub a_sd: f64,
    pub b2_shape: f64,
    pub b2_scale: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            r_mean: 0.0,
            r_sd: 1.0,
            kappa_mean: 0.0,
            kappa_sd: 1.0,
            theta_mean: 0.0,
            theta_sd: 1.0,
            psi_precision: 2.0,
            omega_shape: 2.0,
            omega_scale: 1.0 / 200.0,
            lambda_alpha: 2.0,
            lambda_beta: 40.0,
            a_mean: 0.0,
            a_sd: 1.0,
            b2_shape: 5.0,
            b2_scale: 0.2,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let pos = [
            self.r_sd,
            self.kappa_sd,
            self.theta_sd,
            self.psi_precision,
            self.omega_shape,
            self.omega_scale,
            self.lambda_alpha,
            self.lambda_beta,
            self.a_sd,
            self.b2_shape,
            self.b2_scale,
        ];
        if pos.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(CalibrationError::InvalidConfig(
                "prior hyperparameters must be strictly positive",
            ));
        }
        Ok(())
    }
}

/// Chain layout. Defaults follow the full production protocol; tests use
/// smaller desk-scale settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub n_burn: usize,
    pub n_keep: usize,
    pub n_runs: usize,
    /// Years per observation.
    pub dt: f64,
    pub seed: u64,
    /// Divergence guard: any latent variance above this aborts the run.
    pub v_cap: f64,
    /// Draw every parameter from its prior and skip the data entirely;
    /// validates the samplers against known moments.
    pub prior_only: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_burn: 3000,
            n_keep: 8000,
            n_runs: 10,
            dt: 1.0 / 252.0,
            seed: 0,
            v_cap: 10.0,
            prior_only: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.n_keep == 0 || self.n_runs == 0 {
            return Err(CalibrationError::InvalidConfig(
                "n_keep and n_runs must be >= 1",
            ));
        }
        if !(self.dt > 0.0) {
            return Err(CalibrationError::InvalidConfig("dt must be > 0"));
        }
        if !(self.v_cap > 0.0) {
            return Err(CalibrationError::InvalidConfig("v_cap must be > 0"));
        }
        Ok(())
    }
}

/// Mean and standard deviation of one parameter's posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamStat {
    pub mean: f64,
    pub std_dev: f64,
}

/// Cross-run averaged posterior summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub kind: ModelKind,
    pub r: ParamStat,
    pub kappa: ParamStat,
    pub theta: ParamStat,
    pub sigma: ParamStat,
    pub rho: ParamStat,
    pub lambda: Option<ParamStat>,
    pub a: Option<ParamStat>,
    pub b2: Option<ParamStat>,
    /// Posterior mean/SD of the initial latent variance.
    pub v0: ParamStat,
    /// Posterior mean of the whole latent variance path (cross-run
    /// average); empty in prior-only mode.
    pub latent_mean: Vec<f64>,
    pub runs: usize,
    /// Post-burn-in Metropolis-Hastings acceptance rate for the latent
    /// path, averaged across runs. Zero in prior-only mode.
    pub mh_acceptance: f64,
}

impl PosteriorSummary {
    /// `parameter,mean,std_dev` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,mean,std_dev\n");
        let mut push = |name: &str, s: &ParamStat| {
            out.push_str(&format!("{name},{},{}\n", s.mean, s.std_dev));
        };
        push("r", &self.r);
        push("kappa", &self.kappa);
        push("theta", &self.theta);
        push("sigma", &self.sigma);
        push("rho", &self.rho);
        if let Some(l) = &self.lambda {
            push("lambda", l);
        }
        if let Some(a) = &self.a {
            push("a", a);
        }
        if let Some(b2) = &self.b2 {
            push("b2", b2);
        }
        push("v0", &self.v0);
        out
    }
}

/// Running first/second-moment accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Acc {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn var(&self) -> f64 {
        (self.sum_sq / self.n - self.mean() * self.mean()).max(0.0)
    }

    fn stat(&self) -> ParamStat {
        ParamStat {
            mean: self.mean(),
            std_dev: self.var().sqrt(),
        }
    }
}

#[inline]
fn std_normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Inverse-gamma draw in shape/scale form.
fn inv_gamma<R: Rng>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0 / scale).expect("valid gamma").sample(rng);
    1.0 / g
}

struct Chain<'d> {
    y: &'d [f64],
    dt: f64,
    kind: ModelKind,
    priors: PriorConfig,
    // state
    r: f64,
    alpha: f64, // kappa * theta
    kappa: f64,
    omega: f64,
    psi: f64,
    lambda: f64,
    a: f64,
    b2: f64,
    v: Vec<f64>,
    jump_on: Vec<bool>,
    jump_z: Vec<f64>,
    prop_scale: f64,
    accepted: usize,
    proposed: usize,
}

impl<'d> Chain<'d> {
    fn new(y: &'d [f64], dt: f64, kind: ModelKind, priors: PriorConfig, rng: &mut ChaCha8Rng) -> Self {
        let n = y.len();
        // Latent path initialized from raw squared returns: starting
        // rough lets the chain settle down to the posterior smoothness
        // instead of having to climb out of an over-smoothed state.
        let mut v = Vec::with_capacity(n + 1);
        for t in 0..=n {
            let i = t.min(n.saturating_sub(1));
            v.push((y[i] * y[i] / dt).clamp(1e-5, 2.0));
        }
        let omega0 = 0.02;
        Chain {
            y,
            dt,
            kind,
            priors,
            r: 0.1,
            alpha: 5.0 * 0.0225,
            kappa: 5.0,
            omega: omega0,
            psi: (omega0 / 2.0).sqrt() * std_normal(rng),
            lambda: Beta::new(priors.lambda_alpha, priors.lambda_beta)
                .expect("valid beta")
                .sample(rng),
            a: 0.0,
            b2: 0.1,
            v,
            jump_on: vec![false; n],
            jump_z: vec![0.0; n],
            prop_scale: 0.5,
            accepted: 0,
            proposed: 0,
        }
    }

    #[inline]
    fn jump_term(&self, t: usize) -> f64 {
        if self.kind == ModelKind::Bates && self.jump_on[t] {
            self.jump_z[t]
        } else {
            0.0
        }
    }

    /// Price residual numerator at observation t (before dividing by w).
    #[inline]
    fn price_num(&self, t: usize) -> f64 {
        self.y[t] - self.r * self.dt + self.v[t] * self.dt / 2.0 - self.jump_term(t)
    }

    /// Variance residual numerator at observation t.
    #[inline]
    fn var_num(&self, t: usize) -> f64 {
        self.v[t + 1] - self.v[t] - (self.alpha - self.kappa * self.v[t]) * self.dt
    }

    fn update_psi_omega(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.y.len() as f64;
        let mut s_ee = 0.0;
        let mut s_e1 = 0.0;
        let mut s_11 = 0.0;
        for t in 0..self.y.len() {
            let w2 = self.v[t] * self.dt;
            let eps = self.price_num(t) / w2.sqrt();
            let e = self.var_num(t) / w2.sqrt();
            s_ee += e * e;
            s_e1 += e * eps;
            s_11 += eps * eps;
        }
        let k_post = self.priors.psi_precision + s_11;
        let m_post = s_e1 / k_post;
        let a_post = self.priors.omega_shape + n / 2.0;
        let b_post = self.priors.omega_scale + 0.5 * (s_ee - k_post * m_post * m_post).max(0.0);
        self.omega = inv_gamma(a_post, b_post, rng);
        self.psi = m_post + (self.omega / k_post).sqrt() * std_normal(rng);
    }

    fn update_r(&mut self, rng: &mut ChaCha8Rng) {
        // The price residual couples into the variance equation through
        // psi, so the conditional precision carries (1 + psi^2/Omega).
        let fac = 1.0 + self.psi * self.psi / self.omega;
        let prior_prec = 1.0 / (self.priors.r_sd * self.priors.r_sd);
        let mut prec = prior_prec;
        let mut lin = self.priors.r_mean * prior_prec;
        for t in 0..self.y.len() {
            let w2 = self.v[t] * self.dt;
            let c = self.dt / w2.sqrt();
            let a_t = (self.y[t] + self.v[t] * self.dt / 2.0 - self.jump_term(t)) / w2.sqrt();
            let e = self.var_num(t) / w2.sqrt();
            prec += c * c * fac;
            lin += c * (a_t * fac - self.psi / self.omega * e);
        }
        self.r = lin / prec + (1.0 / prec).sqrt() * std_normal(rng);
    }

    fn update_drift(&mut self, rng: &mut ChaCha8Rng) {
        // Regression z_t = alpha x1 + kappa x2 + sqrt(Omega) eta with
        // x1 = dt/w, x2 = -V_{t-1} dt/w, z = dV/w - psi eps.
        let mut p11 = 1.0 / (self.priors.theta_sd * self.priors.theta_sd);
        let mut p12 = 0.0;
        let mut p22 = 1.0 / (self.priors.kappa_sd * self.priors.kappa_sd);
        let mut q1 = self.priors.theta_mean * p11;
        let mut q2 = self.priors.kappa_mean * p22;
        for t in 0..self.y.len() {
            let w2 = self.v[t] * self.dt;
            let w = w2.sqrt();
            let eps = self.price_num(t) / w;
            let z = (self.v[t + 1] - self.v[t]) / w - self.psi * eps;
            let x1 = self.dt / w;
            let x2 = -self.v[t] * self.dt / w;
            p11 += x1 * x1 / self.omega;
            p12 += x1 * x2 / self.omega;
            p22 += x2 * x2 / self.omega;
            q1 += x1 * z / self.omega;
            q2 += x2 * z / self.omega;
        }
        let det = p11 * p22 - p12 * p12;
        let mu1 = (p22 * q1 - p12 * q2) / det;
        let mu2 = (p11 * q2 - p12 * q1) / det;
        // covariance = inverse precision; its Cholesky factor
        let c11 = p22 / det;
        let c12 = -p12 / det;
        let c22 = p11 / det;
        let l11 = c11.sqrt();
        let l21 = c12 / l11;
        let l22 = (c22 - l21 * l21).max(0.0).sqrt();
        for _ in 0..200 {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            let alpha = mu1 + l11 * z1;
            let kappa = mu2 + l21 * z1 + l22 * z2;
            if alpha > 0.0 && kappa > 0.0 {
                self.alpha = alpha;
                self.kappa = kappa;
                return;
            }
        }
        // keep the previous values when the positive quadrant is missed
    }

    fn update_jumps(&mut self, rng: &mut ChaCha8Rng) {
        let fac = 1.0 + self.psi * self.psi / self.omega;
        for t in 0..self.y.len() {
            let w2 = self.v[t] * self.dt;
            let w = w2.sqrt();
            let e = self.var_num(t) / w;
            // Size draw: Gaussian conditional when the jump is on,
            // otherwise a prior draw keeps the imputation honest.
            if self.jump_on[t] {
                let q = self.y[t] - self.r * self.dt + self.v[t] * self.dt / 2.0;
                let prec = fac / w2 + 1.0 / self.b2;
                let lin = q * fac / w2 - self.psi / self.omega * e / w + self.a / self.b2;
                self.jump_z[t] =
                    lin / prec + (1.0 / prec).sqrt() * std_normal(rng);
            } else {
                self.jump_z[t] =
                    self.a + self.b2.sqrt() * std_normal(rng);
            }
            // Indicator flip from the two-point conditional, in log-odds
            // form so extreme residuals cannot underflow to 0/0.
            let ll = |jump: f64| {
                let eps = (self.y[t] - self.r * self.dt + self.v[t] * self.dt / 2.0 - jump) / w;
                let resid = e - self.psi * eps;
                -0.5 * eps * eps - resid * resid / (2.0 * self.omega)
            };
            let log_odds =
                ll(self.jump_z[t]) - ll(0.0) + (self.lambda / (1.0 - self.lambda)).ln();
            let p1 = 1.0 / (1.0 + (-log_odds).exp());
            self.jump_on[t] = rng.gen::<f64>() < p1;
        }
    }

    fn update_jump_params(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.y.len() as f64;
        let count = self.jump_on.iter().filter(|x| **x).count() as f64;
        self.lambda = Beta::new(
            self.priors.lambda_alpha + count,
            self.priors.lambda_beta + n - count,
        )
        .expect("valid beta")
        .sample(rng);

        // (a, b2) from all imputed sizes (prior draws on no-jump days).
        let sum: f64 = self.jump_z.iter().sum();
        let prior_prec = 1.0 / (self.priors.a_sd * self.priors.a_sd);
        let prec = n / self.b2 + prior_prec;
        let lin = sum / self.b2 + self.priors.a_mean * prior_prec;
        self.a = lin / prec + (1.0 / prec).sqrt() * std_normal(rng);
        let ssq: f64 = self.jump_z.iter().map(|z| (z - self.a) * (z - self.a)).sum();
        self.b2 = inv_gamma(
            self.priors.b2_shape + n / 2.0,
            self.priors.b2_scale + 0.5 * ssq,
            rng,
        );
    }

    /// Log-likelihood of the observation pair `(y_t, V_t -> V_{t+1})`
    /// with the given endpoint values.
    fn pair_loglik(&self, t: usize, v_left: f64, v_right: f64) -> f64 {
        let w2 = v_left * self.dt;
        let w = w2.sqrt();
        let eps = (self.y[t] - self.r * self.dt + v_left * self.dt / 2.0 - self.jump_term(t)) / w;
        let e = (v_right - v_left - (self.alpha - self.kappa * v_left) * self.dt) / w;
        let resid = e - self.psi * eps;
        -w2.ln() - 0.5 * eps * eps - resid * resid / (2.0 * self.omega)
    }

    fn update_variance_path(&mut self, rng: &mut ChaCha8Rng) {
        // Random walk on ln V: scale-free moves for a positive quantity,
        // with the V'/V Hastings correction in the acceptance ratio.
        let n = self.y.len();
        for t in 0..=n {
            let current = self.v[t];
            let proposal = current * (self.prop_scale * std_normal(rng)).exp();
            self.proposed += 1;
            if !(proposal > 1e-12) || proposal > 1e6 {
                continue;
            }
            let mut delta = (proposal / current).ln();
            if t < n {
                delta += self.pair_loglik(t, proposal, self.v[t + 1])
                    - self.pair_loglik(t, current, self.v[t + 1]);
            }
            if t > 0 {
                delta += self.pair_loglik(t - 1, self.v[t - 1], proposal)
                    - self.pair_loglik(t - 1, self.v[t - 1], current);
            }
            if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
                self.v[t] = proposal;
                self.accepted += 1;
            }
        }
    }

    fn adapt(&mut self) {
        if self.proposed == 0 {
            return;
        }
        let rate = self.accepted as f64 / self.proposed as f64;
        self.prop_scale = (self.prop_scale * (0.6 * (rate - 0.35)).exp()).clamp(1e-4, 4.0);
        self.accepted = 0;
        self.proposed = 0;
    }

    fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        self.update_psi_omega(rng);
        self.update_r(rng);
        self.update_drift(rng);
        if self.kind == ModelKind::Bates {
            self.update_jumps(rng);
            self.update_jump_params(rng);
        }
        self.update_variance_path(rng);
    }

    fn check_divergence(&self, cap: f64, step: usize) -> Result<(), CalibrationError> {
        for v in &self.v {
            if *v > cap {
                return Err(CalibrationError::ChainDivergence {
                    value: *v,
                    cap,
                    step,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct RunStats {
    r: Acc,
    alpha: Acc,
    kappa: Acc,
    theta_direct: Acc, // prior-only mode samples theta directly
    sigma: Acc,
    rho: Acc,
    lambda: Acc,
    a: Acc,
    b2: Acc,
    v0: Acc,
    alpha_kappa_cross: f64,
    acceptance: f64,
    latent_sum: Vec<f64>,
    /// Batch means of the rho draws; their spread estimates the Monte
    /// Carlo standard error of the posterior-mean estimate.
    rho_batches: Vec<f64>,
}

impl RunStats {
    /// Point estimate and linearized spread of `theta = alpha / kappa`.
    fn theta(&self) -> ParamStat {
        let am = self.alpha.mean();
        let km = self.kappa.mean();
        let mean = am / km;
        let cov = self.alpha_kappa_cross / self.alpha.n - am * km;
        let var = self.alpha.var() / (km * km) + am * am * self.kappa.var() / km.powi(4)
            - 2.0 * am * cov / km.powi(3);
        ParamStat {
            mean,
            std_dev: var.max(0.0).sqrt(),
        }
    }
}

fn run_one_chain(
    y: &[f64],
    kind: ModelKind,
    priors: &PriorConfig,
    chain_cfg: &ChainConfig,
    run_idx: u64,
) -> Result<RunStats, CalibrationError> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(chain_cfg.seed);
    rng.set_stream(run_idx);

    let mut stats = RunStats::default();

    if chain_cfg.prior_only {
        // Direct prior draws through the same samplers the Gibbs steps use.
        let normal = |m: f64, s: f64, rng: &mut ChaCha8Rng| {
            m + s * std_normal(rng)
        };
        let lam_dist = Beta::new(priors.lambda_alpha, priors.lambda_beta)
            .map_err(|_| CalibrationError::InvalidConfig("invalid beta prior"))?;
        for _ in 0..chain_cfg.n_keep {
            let r = normal(priors.r_mean, priors.r_sd, &mut rng);
            let kappa = normal(priors.kappa_mean, priors.kappa_sd, &mut rng);
            let theta = normal(priors.theta_mean, priors.theta_sd, &mut rng);
            let omega = inv_gamma(priors.omega_shape, priors.omega_scale, &mut rng);
            let psi = (omega / priors.psi_precision).sqrt()
                * std_normal(&mut rng);
            let sigma = (omega + psi * psi).sqrt();
            stats.r.push(r);
            stats.kappa.push(kappa);
            stats.theta_direct.push(theta);
            stats.alpha.push(kappa * theta);
            stats.alpha_kappa_cross += kappa * theta * kappa;
            stats.sigma.push(sigma);
            stats.rho.push(psi / sigma);
            stats.lambda.push(lam_dist.sample(&mut rng));
            stats.a.push(normal(priors.a_mean, priors.a_sd, &mut rng));
            stats
                .b2
                .push(inv_gamma(priors.b2_shape, priors.b2_scale, &mut rng));
            stats.v0.push(0.0);
        }
        return Ok(stats);
    }

    let mut chain = Chain::new(y, chain_cfg.dt, kind, *priors, &mut rng);
    for it in 0..chain_cfg.n_burn {
        chain.sweep(&mut rng);
        chain.check_divergence(chain_cfg.v_cap, it)?;
        if it % 50 == 49 {
            chain.adapt();
        }
    }
    chain.accepted = 0;
    chain.proposed = 0;
    stats.latent_sum = vec![0.0; chain.v.len()];
    let batch_size = (chain_cfg.n_keep / 20).max(1);
    let mut batch_acc = 0.0;
    for it in 0..chain_cfg.n_keep {
        chain.sweep(&mut rng);
        chain.check_divergence(chain_cfg.v_cap, chain_cfg.n_burn + it)?;
        let sigma = (chain.omega + chain.psi * chain.psi).sqrt();
        let rho = chain.psi / sigma;
        // every retained draw satisfies the parameterization constraints
        debug_assert!(chain.omega > 0.0 && sigma > 0.0);
        debug_assert!(rho > -1.0 && rho < 1.0);
        debug_assert!(chain.lambda > 0.0 && chain.lambda < 1.0);
        debug_assert!(chain.b2 > 0.0);
        debug_assert!(chain.alpha > 0.0 && chain.kappa > 0.0);
        stats.r.push(chain.r);
        stats.alpha.push(chain.alpha);
        stats.kappa.push(chain.kappa);
        stats.alpha_kappa_cross += chain.alpha * chain.kappa;
        stats.sigma.push(sigma);
        stats.rho.push(rho);
        batch_acc += rho;
        if (it + 1) % batch_size == 0 {
            stats.rho_batches.push(batch_acc / batch_size as f64);
            batch_acc = 0.0;
        }
        if kind == ModelKind::Bates {
            stats.lambda.push(chain.lambda);
            stats.a.push(chain.a);
            stats.b2.push(chain.b2);
        }
        stats.v0.push(chain.v[0]);
        for (acc, v) in stats.latent_sum.iter_mut().zip(&chain.v) {
            *acc += v;
        }
    }
    for acc in stats.latent_sum.iter_mut() {
        *acc /= chain_cfg.n_keep as f64;
    }
    stats.acceptance = if chain.proposed > 0 {
        chain.accepted as f64 / chain.proposed as f64
    } else {
        0.0
    };
    Ok(stats)
}

fn merge_stat<F: Fn(&RunStats) -> ParamStat>(runs: &[RunStats], get: F) -> ParamStat {
    let n = runs.len() as f64;
    ParamStat {
        mean: runs.iter().map(|r| get(r).mean).sum::<f64>() / n,
        std_dev: runs.iter().map(|r| get(r).std_dev).sum::<f64>() / n,
    }
}

/// Calibrate `kind` from a series of log returns.
///
/// Runs `n_runs` independent chains from the standard initial values
/// (`r = 0.1`, `kappa = 5`, `theta = 0.0225`, `Omega = 0.02`,
/// `psi ~ N(0, Omega/2)`, `lambda ~ Beta`, `a = 0`, `b2 = 0.1`),
/// averages posterior means across runs, and reports within-chain
/// standard deviations.
pub fn run_mcmc(
    returns: &[f64],
    kind: ModelKind,
    priors: &PriorConfig,
    chain: &ChainConfig,
) -> Result<PosteriorSummary, CalibrationError> {
    priors.validate()?;
    chain.validate()?;
    if !matches!(kind, ModelKind::Heston | ModelKind::Bates) {
        return Err(CalibrationError::InvalidConfig(
            "calibration supports heston and bates only",
        ));
    }
    if !chain.prior_only {
        const MIN_OBS: usize = 100;
        if returns.len() < MIN_OBS {
            return Err(CalibrationError::InsufficientData {
                min: MIN_OBS,
                got: returns.len(),
            });
        }
        if let Some(bad) = returns.iter().position(|x| !x.is_finite()) {
            return Err(CalibrationError::NonFiniteReturn(bad));
        }
    }

    let run_results: Vec<Result<RunStats, CalibrationError>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..chain.n_runs as u64)
                .into_par_iter()
                .map(|i| run_one_chain(returns, kind, priors, chain, i))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..chain.n_runs as u64)
                .map(|i| run_one_chain(returns, kind, priors, chain, i))
                .collect()
        }
    };
    let mut runs = Vec::with_capacity(chain.n_runs);
    for r in run_results {
        runs.push(r?);
    }

    let theta = if chain.prior_only {
        merge_stat(&runs, |r| r.theta_direct.stat())
    } else {
        merge_stat(&runs, |r| r.theta())
    };
    let latent_mean = if chain.prior_only || runs[0].latent_sum.is_empty() {
        Vec::new()
    } else {
        let len = runs[0].latent_sum.len();
        let mut avg = vec![0.0; len];
        for run in &runs {
            for (a, v) in avg.iter_mut().zip(&run.latent_sum) {
                *a += v;
            }
        }
        for a in avg.iter_mut() {
            *a /= runs.len() as f64;
        }
        avg
    };
    let is_bates = kind == ModelKind::Bates || chain.prior_only;
    Ok(PosteriorSummary {
        kind,
        r: merge_stat(&runs, |r| r.r.stat()),
        kappa: merge_stat(&runs, |r| r.kappa.stat()),
        theta,
        sigma: merge_stat(&runs, |r| r.sigma.stat()),
        rho: merge_stat(&runs, |r| r.rho.stat()),
        lambda: is_bates.then(|| merge_stat(&runs, |r| r.lambda.stat())),
        a: is_bates.then(|| merge_stat(&runs, |r| r.a.stat())),
        b2: is_bates.then(|| merge_stat(&runs, |r| r.b2.stat())),
        v0: merge_stat(&runs, |r| r.v0.stat()),
        latent_mean,
        runs: runs.len(),
        mh_acceptance: runs.iter().map(|r| r.acceptance).sum::<f64>() / runs.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::simulate_daily_returns;
    use crate::params::{HestonParams, Model};

    fn synthetic_heston() -> HestonParams {
        HestonParams {
            r: 0.05,
            kappa: 2.0,
            theta: 0.04,
            sigma: 0.3,
            rho: -0.7,
            v0: 0.04,
        }
    }

    fn desk_chain(seed: u64) -> ChainConfig {
        ChainConfig {
            n_burn: 500,
            n_keep: 1500,
            n_runs: 2,
            seed,
            ..ChainConfig::default()
        }
    }

    #[test]
    fn rejects_insufficient_data() {
        let err = run_mcmc(
            &[],
            ModelKind::Heston,
            &PriorConfig::default(),
            &desk_chain(1),
        )
        .unwrap_err();
        assert!(matches!(err, CalibrationError::InsufficientData { .. }));
    }

    #[test]
    fn rejects_non_finite_returns() {
        let mut y = vec![0.001; 200];
        y[57] = f64::NAN;
        let err = run_mcmc(
            &y,
            ModelKind::Heston,
            &PriorConfig::default(),
            &desk_chain(1),
        )
        .unwrap_err();
        assert_eq!(err, CalibrationError::NonFiniteReturn(57));
    }

    #[test]
    fn rejects_unsupported_kind() {
        let y = vec![0.001; 200];
        assert!(run_mcmc(
            &y,
            ModelKind::Merton,
            &PriorConfig::default(),
            &desk_chain(1)
        )
        .is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let y =
            simulate_daily_returns(&Model::Heston(synthetic_heston()), 150, 1.0 / 252.0, 5)
                .unwrap();
        let cfg = ChainConfig {
            n_burn: 30,
            n_keep: 50,
            n_runs: 2,
            seed: 9,
            ..ChainConfig::default()
        };
        let a = run_mcmc(&y, ModelKind::Heston, &PriorConfig::default(), &cfg).unwrap();
        let b = run_mcmc(&y, ModelKind::Heston, &PriorConfig::default(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn acceptance_rate_lands_in_band_after_burn_in() {
        let y =
            simulate_daily_returns(&Model::Heston(synthetic_heston()), 504, 1.0 / 252.0, 3)
                .unwrap();
        let summary = run_mcmc(
            &y,
            ModelKind::Heston,
            &PriorConfig::default(),
            &desk_chain(21),
        )
        .unwrap();
        assert!(
            (0.1..=0.7).contains(&summary.mh_acceptance),
            "acceptance = {}",
            summary.mh_acceptance
        );
    }

    #[test]
    fn constraint_preservation_reflected_in_summary() {
        let y =
            simulate_daily_returns(&Model::Heston(synthetic_heston()), 300, 1.0 / 252.0, 7)
                .unwrap();
        let s = run_mcmc(
            &y,
            ModelKind::Heston,
            &PriorConfig::default(),
            &desk_chain(2),
        )
        .unwrap();
        assert!(s.sigma.mean > 0.0);
        assert!(s.rho.mean > -1.0 && s.rho.mean < 1.0);
        assert!(s.kappa.mean > 0.0);
        assert!(s.theta.mean > 0.0);
        assert!(s.v0.mean > 0.0);
    }

    #[test]
    fn degenerate_proposal_scale_keeps_path() {
        // A zero-width proposal reproduces the current site, so every
        // move is an accept of the unchanged value and the path stays
        // put while the rest of the sampler keeps running.
        let y =
            simulate_daily_returns(&Model::Heston(synthetic_heston()), 120, 1.0 / 252.0, 11)
                .unwrap();
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut chain = Chain::new(&y, 1.0 / 252.0, ModelKind::Heston, PriorConfig::default(), &mut rng);
        chain.prop_scale = 0.0;
        let before = chain.v.clone();
        chain.update_variance_path(&mut rng);
        assert_eq!(chain.v, before);
        // and a short full run still reports finite summaries
        let cfg = ChainConfig {
            n_burn: 5,
            n_keep: 10,
            n_runs: 1,
            seed: 4,
            ..ChainConfig::default()
        };
        let s = run_mcmc(&y, ModelKind::Heston, &PriorConfig::default(), &cfg).unwrap();
        assert!(s.r.mean.is_finite());
    }

    #[test]
    fn divergence_guard_fires() {
        let y = vec![0.5; 200]; // absurd daily returns push latent variance up
        let cfg = ChainConfig {
            n_burn: 200,
            n_keep: 100,
            n_runs: 1,
            seed: 1,
            v_cap: 0.5,
            ..ChainConfig::default()
        };
        let res = run_mcmc(&y, ModelKind::Heston, &PriorConfig::default(), &cfg);
        assert!(matches!(res, Err(CalibrationError::ChainDivergence { .. })));
    }

    #[test]
    fn posterior_means_reproducible_across_seeds() {
        // Two independent chains on the same data agree within twice the
        // combined Monte Carlo standard error (batch-means estimate).
        let y =
            simulate_daily_returns(&Model::Heston(synthetic_heston()), 504, 1.0 / 252.0, 20)
                .unwrap();
        let cfg = ChainConfig {
            n_burn: 2000,
            n_keep: 6000,
            n_runs: 1,
            ..ChainConfig::default()
        };
        let mcse = |batches: &[f64]| {
            let m = batches.iter().sum::<f64>() / batches.len() as f64;
            let v = batches.iter().map(|b| (b - m) * (b - m)).sum::<f64>()
                / (batches.len() as f64 - 1.0);
            (v / batches.len() as f64).sqrt()
        };
        let a = run_one_chain(&y, ModelKind::Heston, &PriorConfig::default(), &cfg, 3).unwrap();
        let b = run_one_chain(&y, ModelKind::Heston, &PriorConfig::default(), &cfg, 9).unwrap();
        let se = (mcse(&a.rho_batches).powi(2) + mcse(&b.rho_batches).powi(2)).sqrt();
        let diff = (a.rho.mean() - b.rho.mean()).abs();
        // batch means still carry autocorrelation; allow 2x(2 se)
        assert!(diff <= 4.0 * se, "|drho| = {diff} vs mcse = {se}");
    }

    #[test]
    fn latent_path_tracks_squared_returns_when_vol_of_vol_vanishes() {
        // sigma -> 0 data: the filtered variance level must sit on the
        // observed mean of y^2/dt.
        let p = HestonParams {
            r: 0.02,
            kappa: 3.0,
            theta: 0.04,
            sigma: 1e-3,
            rho: 0.0,
            v0: 0.04,
        };
        let dt = 1.0 / 252.0;
        let y = simulate_daily_returns(&Model::Heston(p), 504, dt, 8).unwrap();
        let cfg = ChainConfig {
            n_burn: 1000,
            n_keep: 2000,
            n_runs: 2,
            seed: 5,
            ..ChainConfig::default()
        };
        let s = run_mcmc(&y, ModelKind::Heston, &PriorConfig::default(), &cfg).unwrap();
        let latent_avg = s.latent_mean.iter().sum::<f64>() / s.latent_mean.len() as f64;
        let realized = y.iter().map(|x| x * x / dt).sum::<f64>() / y.len() as f64;
        assert!(
            (latent_avg / realized - 1.0).abs() < 0.2,
            "latent avg {latent_avg} vs realized {realized}"
        );
    }

    #[test]
    fn csv_shape() {
        let cfg = ChainConfig {
            n_keep: 100,
            n_runs: 1,
            prior_only: true,
            ..ChainConfig::default()
        };
        let s = run_mcmc(&[], ModelKind::Bates, &PriorConfig::default(), &cfg).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("parameter,mean,std_dev\n"));
        assert_eq!(csv.trim_end().lines().count(), 1 + 9);
    }
}
