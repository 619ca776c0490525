//! Command-line front end: pricing, VIX quoting, simulation,
//! calibration, and report generation.
//!
//! Exit codes: 0 success, 1 user error (arguments, files, validation),
//! 2 numerical failure (quadrature or chain divergence).

// `!(x > 0.0)` guards reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use volstrike_core::calibrate::{run_mcmc, ChainConfig, PriorConfig};
use volstrike_core::error::{CalibrationError, PricingError};
use volstrike_core::laplace::{vix_future_closed_form, vol_strike_laplace, QuadratureConfig};
use volstrike_core::market::{load_futures, load_prices};
use volstrike_core::mc::{
    estimate_strikes, estimate_vix_future, estimate_vix_log_contract, rv_samples,
    simulate_levy_cir, Scheme, SimConfig,
};
use volstrike_core::moments::VarianceFormulaMode;
use volstrike_core::params::{Contract, Model, ModelKind, ParamFile, DAYS_PER_YEAR, DEFAULT_TAU};
use volstrike_core::pricing::{
    variance_strike_bates, variance_strike_heston, variance_strike_levy_heston,
    variance_strike_merton, vix_future_convexity, vol_strike_convexity_bates,
    vol_strike_convexity_heston, vol_strike_convexity_merton, VixModel,
};
use volstrike_core::report::{
    emit_report, MetricVariant, PricedQuote, ReportFormat,
};

#[derive(Parser)]
#[command(
    name = "volstrike",
    about = "Variance/volatility swap and VIX futures pricing under stochastic volatility and jump models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price variance and volatility swap strikes
    Price(PriceArgs),
    /// Quote VIX futures across maturities
    Vix(VixArgs),
    /// Run the Monte Carlo estimators directly
    Simulate(SimulateArgs),
    /// Calibrate Heston/Bates parameters from an index price CSV
    Calibrate(CalibrateArgs),
    /// Render a pricing-error report from a joined quote CSV
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model kind: heston | merton | bates | levy-heston
    #[arg(long)]
    model: ModelKind,
    /// Flat key-value parameter file (keys match parameter field names)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline parameter override, e.g. --set kappa=0.8519 (repeatable;
    /// wins over the file)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ModelArgs {
    fn build(&self) -> Result<Model, Failure> {
        let mut file = match &self.config {
            Some(path) => ParamFile::load(path).map_err(user)?,
            None => ParamFile::default(),
        };
        if !self.sets.is_empty() {
            let mut doc = String::new();
            for kv in &self.sets {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Failure::user(format!("--set expects KEY=VALUE, got {kv:?}")))?;
                let _ = writeln!(doc, "{} = {}", k.trim(), v.trim());
            }
            let overrides: ParamFile = doc.parse().map_err(user)?;
            file = file.merged(&overrides);
        }
        let model = file.build(self.model).map_err(user)?;
        for w in model.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(model)
    }
}

#[derive(Args, Clone)]
struct QuadArgs {
    /// Relative tolerance for the improper-integral quadrature
    #[arg(long, default_value_t = 1e-8)]
    quad_rel_tol: f64,
    /// Absolute tolerance for the improper-integral quadrature
    #[arg(long, default_value_t = 1e-12)]
    quad_abs_tol: f64,
}

impl QuadArgs {
    fn build(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.quad_rel_tol,
            abs_tol: self.quad_abs_tol,
            ..QuadratureConfig::default()
        }
    }
}

#[derive(Args, Clone)]
struct McArgs {
    /// Monte Carlo paths
    #[arg(long, default_value_t = 200_000)]
    paths: usize,
    /// Time steps per year of horizon
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Variance discretization: exact_cir | full_truncation_euler
    #[arg(long, default_value = "exact_cir")]
    scheme: String,
}

impl McArgs {
    fn build(&self) -> Result<SimConfig, Failure> {
        let scheme: Scheme = self.scheme.parse().map_err(Failure::user)?;
        Ok(SimConfig {
            n_paths: self.paths,
            n_steps: self.steps,
            seed: self.seed,
            scheme,
        })
    }
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Maturity in years
    #[arg(short = 'T', long = "maturity", default_value_t = 1.0)]
    maturity: f64,
    /// analytic | convexity | laplace | monte_carlo | all
    #[arg(long, default_value = "all")]
    method: String,
    /// Evaluate the published (sign-uncorrected) variance formula
    #[arg(long)]
    paper_mode: bool,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Also write the quotes as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VixArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Maturities in calendar days (comma separated or repeated)
    #[arg(short = 'T', long = "maturity-days", value_delimiter = ',', default_value = "5,33,68")]
    maturities: Vec<f64>,
    /// VIX window in calendar days
    #[arg(long, default_value_t = 30.0)]
    tau_days: f64,
    /// Join against a futures CSV and print the pricing-error report
    #[arg(long)]
    market: Option<PathBuf>,
    /// Use the published metric formulas in the report
    #[arg(long)]
    paper_mode: bool,
    /// Write the joined (label, maturity, market, model) rows as CSV
    #[arg(long)]
    join_out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Maturity in years (strikes) or days (vix; see --estimate)
    #[arg(short = 'T', long = "maturity", default_value_t = 1.0)]
    maturity: f64,
    /// strikes | vix | logcontract
    #[arg(long, default_value = "strikes")]
    estimate: String,
    /// VIX window in calendar days (vix/logcontract estimates)
    #[arg(long, default_value_t = 30.0)]
    tau_days: f64,
    #[command(flatten)]
    mc: McArgs,
    /// Dump per-path realized-variance samples as CSV (strikes estimate)
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// heston | bates
    #[arg(long)]
    model: ModelKind,
    /// Price history CSV (date,close)
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long, default_value_t = 3000)]
    burn: usize,
    #[arg(long, default_value_t = 8000)]
    keep: usize,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Years per observation
    #[arg(long, default_value_t = 1.0 / 252.0)]
    dt: f64,
    /// Draw from the priors only (sampler validation; needs no data)
    #[arg(long)]
    prior_only: bool,
    /// Divergence guard: abort when a latent variance exceeds this
    #[arg(long, default_value_t = 10.0)]
    v_cap: f64,
    /// Write the posterior summary as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Joined quotes CSV with header label,maturity_days,market,model
    #[arg(long = "in")]
    input: PathBuf,
    /// table | csv | svg
    #[arg(long, default_value = "table")]
    format: String,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the published metric formulas
    #[arg(long)]
    paper_mode: bool,
    /// Estimated-parameter count for the residual standard error
    #[arg(long, default_value_t = 5)]
    k: usize,
}

struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn user(msg: impl ToString) -> Self {
        Failure {
            code: 1,
            msg: msg.to_string(),
        }
    }
}

fn user(e: impl ToString) -> Failure {
    Failure::user(e)
}

fn numerical(e: impl ToString) -> Failure {
    Failure {
        code: 2,
        msg: e.to_string(),
    }
}

fn pricing_failure(e: PricingError) -> Failure {
    match e {
        PricingError::QuadratureDidNotConverge { .. } => numerical(e),
        other => user(other),
    }
}

fn calibration_failure(e: CalibrationError) -> Failure {
    match e {
        CalibrationError::ChainDivergence { .. } => numerical(e),
        other => user(other),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn main() {
    // clap's own exit code for usage errors is 2, which this tool
    // reserves for numerical failures; remap argument problems to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return;
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    let result = match cli.command {
        Command::Price(args) => cmd_price(args),
        Command::Vix(args) => cmd_vix(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Report(args) => cmd_report(args),
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.msg);
        std::process::exit(f.code);
    }
}

#[derive(Clone, Copy)]
struct QuoteRow {
    quantity: &'static str,
    method: &'static str,
    value: f64,
    std_error: Option<f64>,
}

fn print_rows(header: &str, rows: &[QuoteRow], out: Option<&Path>) -> Result<(), Failure> {
    println!("{header}");
    for r in rows {
        match r.std_error {
            Some(se) => println!("{:<16} {:<12} {:>12.8}  se={:.8}", r.quantity, r.method, r.value, se),
            None => println!("{:<16} {:<12} {:>12.8}", r.quantity, r.method, r.value),
        }
    }
    if let Some(path) = out {
        let mut csv = String::from("quantity,method,value,std_error\n");
        for r in rows {
            let se = r.std_error.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{},{},{},{}", r.quantity, r.method, r.value, se);
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

fn cmd_price(args: PriceArgs) -> Result<(), Failure> {
    let model = args.model.build()?;
    let contract = Contract {
        maturity_t: args.maturity,
        tau: DEFAULT_TAU,
    };
    contract.validate().map_err(user)?;
    let t = contract.maturity_t;
    let mode = if args.paper_mode {
        VarianceFormulaMode::Printed
    } else {
        VarianceFormulaMode::Corrected
    };
    let quad = args.quad.build();
    let mut rows: Vec<QuoteRow> = Vec::new();
    let method = args.method.as_str();
    let want = |m: &str| method == m || method == "all";
    if !["analytic", "convexity", "laplace", "monte_carlo", "all"].contains(&method) {
        return Err(Failure::user(
            "method must be analytic|convexity|laplace|monte_carlo|all",
        ));
    }

    if want("analytic") {
        let q = match &model {
            Model::Heston(p) => variance_strike_heston(p, t),
            Model::Merton(p) => variance_strike_merton(p, t),
            Model::Bates(p) => variance_strike_bates(p, t),
            Model::LevyHeston(p, s) => {
                variance_strike_levy_heston(p, s, t).map_err(pricing_failure)?
            }
        };
        rows.push(QuoteRow {
            quantity: "variance_strike",
            method: "analytic",
            value: q.value,
            std_error: None,
        });
    }
    let warn_clamped = |q: &volstrike_core::pricing::StrikeQuote| {
        if q.value == 0.0 {
            eprintln!("warning: convexity correction clamped at zero (outside its validity radius)");
        }
    };
    if want("convexity") {
        match &model {
            Model::Heston(p) => {
                let q = vol_strike_convexity_heston(p, t, mode).map_err(pricing_failure)?;
                warn_clamped(&q);
                rows.push(QuoteRow {
                    quantity: "vol_strike",
                    method: "convexity",
                    value: q.value,
                    std_error: None,
                });
            }
            Model::Merton(p) => {
                let q = vol_strike_convexity_merton(p, t).map_err(pricing_failure)?;
                warn_clamped(&q);
                rows.push(QuoteRow {
                    quantity: "vol_strike",
                    method: "convexity",
                    value: q.value,
                    std_error: None,
                });
            }
            Model::Bates(p) => {
                let q = vol_strike_convexity_bates(p, t, mode).map_err(pricing_failure)?;
                warn_clamped(&q);
                rows.push(QuoteRow {
                    quantity: "vol_strike",
                    method: "convexity",
                    value: q.value,
                    std_error: None,
                });
            }
            Model::LevyHeston(..) => {
                if method == "convexity" {
                    return Err(Failure::user(
                        "convexity route unavailable for levy-heston (no second moment)",
                    ));
                }
            }
        }
    }
    if want("laplace") && !matches!(model, Model::LevyHeston(..)) {
        let q = vol_strike_laplace(&model, t, &quad).map_err(pricing_failure)?;
        rows.push(QuoteRow {
            quantity: "vol_strike",
            method: "laplace",
            value: q.value,
            std_error: None,
        });
    } else if method == "laplace" && matches!(model, Model::LevyHeston(..)) {
        return Err(Failure::user(
            "laplace route unavailable for levy-heston (no second moment)",
        ));
    }
    if want("monte_carlo") {
        let cfg = args.mc.build()?;
        match &model {
            Model::LevyHeston(p, s) => {
                let sim = simulate_levy_cir(p, s, t, &cfg).map_err(pricing_failure)?;
                rows.push(QuoteRow {
                    quantity: "variance_strike",
                    method: "monte_carlo",
                    value: sim.k_var.mean,
                    std_error: Some(sim.k_var.std_error),
                });
            }
            _ => {
                let pair = estimate_strikes(&model, t, &cfg).map_err(pricing_failure)?;
                rows.push(QuoteRow {
                    quantity: "variance_strike",
                    method: "monte_carlo",
                    value: pair.k_var.mean,
                    std_error: Some(pair.k_var.std_error),
                });
                rows.push(QuoteRow {
                    quantity: "vol_strike",
                    method: "monte_carlo",
                    value: pair.k_vol.mean,
                    std_error: Some(pair.k_vol.std_error),
                });
            }
        }
    }
    let header = format!(
        "model={} T={} variance_formula={}",
        model.kind(),
        t,
        if args.paper_mode { "printed" } else { "corrected" }
    );
    print_rows(&header, &rows, args.out.as_deref())
}

fn vix_model_of(model: &Model) -> Result<VixModel, Failure> {
    match model {
        Model::Heston(p) => Ok(VixModel::Heston(*p)),
        Model::Bates(p) => Ok(VixModel::Bates(*p)),
        _ => Err(Failure::user("vix pricing supports heston and bates only")),
    }
}

fn cmd_vix(args: VixArgs) -> Result<(), Failure> {
    let model = args.model.build()?;
    let vix_model = vix_model_of(&model)?;
    let tau = args.tau_days / DAYS_PER_YEAR;
    Contract {
        maturity_t: 1.0,
        tau,
    }
    .validate()
    .map_err(user)?;
    let quad = args.quad.build();

    let futures = match &args.market {
        Some(path) => Some(load_futures(path).map_err(user)?),
        None => None,
    };
    let maturities_days: Vec<f64> = match &futures {
        Some(quotes) => quotes.iter().map(|q| q.days_to_expiry as f64).collect(),
        None => args.maturities.clone(),
    };
    if maturities_days.is_empty() {
        return Err(Failure::user("no maturities to quote"));
    }

    println!(
        "model={} tau_days={} metrics={}",
        model.kind(),
        args.tau_days,
        if args.paper_mode { "printed" } else { "standard" }
    );
    let mut per_maturity: Vec<(f64, f64, f64)> = Vec::new();
    for days in &maturities_days {
        if *days < 0.0 {
            return Err(Failure::user("maturity days must be >= 0"));
        }
        let t = days / DAYS_PER_YEAR;
        let convex = vix_future_convexity(&vix_model, t, tau).map_err(pricing_failure)?;
        let closed = vix_future_closed_form(&vix_model, t, tau, &quad).map_err(pricing_failure)?;
        println!(
            "T_days={:<6} convexity={:<10.4} laplace={:<10.4}",
            days, convex.value, closed.value
        );
        per_maturity.push((*days, convex.value, closed.value));
    }

    if let Some(futures) = &futures {
        let mut quotes: Vec<PricedQuote> = Vec::new();
        for (q, (_, convex, closed)) in futures.iter().zip(&per_maturity) {
            let label_base = model.kind().to_string();
            quotes.push(PricedQuote {
                label: format!("{label_base}_convexity"),
                maturity_days: q.days_to_expiry,
                market: q.settlement,
                model: *convex,
            });
            quotes.push(PricedQuote {
                label: format!("{label_base}_laplace"),
                maturity_days: q.days_to_expiry,
                market: q.settlement,
                model: *closed,
            });
        }
        let variant = if args.paper_mode {
            MetricVariant::Printed
        } else {
            MetricVariant::Standard
        };
        let k = param_count(model.kind());
        let mut table = Vec::new();
        emit_report(&quotes, k, variant, ReportFormat::Table, &mut table)
            .map_err(pricing_failure)?;
        println!("{}", String::from_utf8_lossy(&table));
        if let Some(join) = &args.join_out {
            let mut csv = String::from("label,maturity_days,market,model\n");
            for q in &quotes {
                let _ = writeln!(csv, "{},{},{},{}", q.label, q.maturity_days, q.market, q.model);
            }
            write_text(join, &csv)?;
        }
    }
    Ok(())
}

fn param_count(kind: ModelKind) -> usize {
    match kind {
        ModelKind::Heston => 5,
        ModelKind::Merton => 5,
        ModelKind::Bates => 8,
        ModelKind::LevyHeston => 7,
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let model = args.model.build()?;
    let cfg = args.mc.build()?;
    let tau = args.tau_days / DAYS_PER_YEAR;
    match args.estimate.as_str() {
        "strikes" => {
            let t = args.maturity;
            let rows = match &model {
                Model::LevyHeston(p, s) => {
                    let sim = simulate_levy_cir(p, s, t, &cfg).map_err(pricing_failure)?;
                    vec![QuoteRow {
                        quantity: "variance_strike",
                        method: "monte_carlo",
                        value: sim.k_var.mean,
                        std_error: Some(sim.k_var.std_error),
                    }]
                }
                _ => {
                    let pair = estimate_strikes(&model, t, &cfg).map_err(pricing_failure)?;
                    if let Some(path) = &args.dump {
                        let samples = rv_samples(&model, t, &cfg).map_err(pricing_failure)?;
                        let mut csv = String::from("path,realized_variance\n");
                        for (i, s) in samples.iter().enumerate() {
                            let _ = writeln!(csv, "{i},{s}");
                        }
                        write_text(path, &csv)?;
                    }
                    vec![
                        QuoteRow {
                            quantity: "variance_strike",
                            method: "monte_carlo",
                            value: pair.k_var.mean,
                            std_error: Some(pair.k_var.std_error),
                        },
                        QuoteRow {
                            quantity: "vol_strike",
                            method: "monte_carlo",
                            value: pair.k_vol.mean,
                            std_error: Some(pair.k_vol.std_error),
                        },
                    ]
                }
            };
            let header = format!(
                "model={} T={} paths={} steps={} seed={}",
                model.kind(),
                args.maturity,
                cfg.n_paths,
                cfg.n_steps,
                cfg.seed
            );
            print_rows(&header, &rows, None)
        }
        "vix" => {
            let vix_model = vix_model_of(&model)?;
            let t = args.maturity / DAYS_PER_YEAR;
            let est = estimate_vix_future(&vix_model, t, tau, &cfg).map_err(pricing_failure)?;
            println!(
                "model={} T_days={} paths={} seed={}",
                model.kind(),
                args.maturity,
                cfg.n_paths,
                cfg.seed
            );
            println!("vix_future       monte_carlo  {:>12.8}  se={:.8}", est.mean, est.std_error);
            Ok(())
        }
        "logcontract" => {
            let p = match &model {
                Model::Heston(p) => *p,
                _ => {
                    return Err(Failure::user(
                        "log-contract estimate supports the continuous model only",
                    ))
                }
            };
            let est = estimate_vix_log_contract(&p, 0.0, tau, &cfg).map_err(pricing_failure)?;
            println!(
                "model={} tau_days={} paths={} seed={}",
                model.kind(),
                args.tau_days,
                cfg.n_paths,
                cfg.seed
            );
            println!("vix_squared      log_contract {:>12.6}  se={:.6}", est.mean, est.std_error);
            Ok(())
        }
        other => Err(Failure::user(format!(
            "unknown estimate {other:?}: use strikes|vix|logcontract"
        ))),
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), Failure> {
    let returns = match (&args.prices, args.prior_only) {
        (Some(path), _) => load_prices(path).map_err(user)?.log_returns(),
        (None, true) => Vec::new(),
        (None, false) => return Err(Failure::user("--prices is required unless --prior-only")),
    };
    let chain = ChainConfig {
        n_burn: args.burn,
        n_keep: args.keep,
        n_runs: args.runs,
        dt: args.dt,
        seed: args.seed,
        prior_only: args.prior_only,
        v_cap: args.v_cap,
    };
    let summary = run_mcmc(&returns, args.model, &PriorConfig::default(), &chain)
        .map_err(calibration_failure)?;
    println!(
        "model={} observations={} runs={} burn={} keep={} mh_acceptance={:.3}",
        args.model,
        returns.len(),
        summary.runs,
        args.burn,
        args.keep,
        summary.mh_acceptance
    );
    print!("{}", summary.to_csv());
    if let Some(path) = &args.out {
        write_text(path, &summary.to_csv())?;
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let format: ReportFormat = args.format.parse().map_err(Failure::user)?;
    let variant = if args.paper_mode {
        MetricVariant::Printed
    } else {
        MetricVariant::Standard
    };
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| user(format!("{}: {e}", args.input.display())))?;
    let mut quotes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "label,maturity_days,market,model" {
                return Err(Failure::user(
                    "expected header label,maturity_days,market,model",
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Failure::user(format!("line {}: expected 4 columns", i + 1)));
        }
        let market: f64 = parts[2]
            .parse()
            .map_err(|_| Failure::user(format!("line {}: bad market price", i + 1)))?;
        if !(market > 0.0) {
            return Err(Failure::user(format!("line {}: market price must be > 0", i + 1)));
        }
        quotes.push(PricedQuote {
            label: parts[0].to_string(),
            maturity_days: parts[1]
                .parse()
                .map_err(|_| Failure::user(format!("line {}: bad maturity", i + 1)))?,
            market,
            model: parts[3]
                .parse()
                .map_err(|_| Failure::user(format!("line {}: bad model price", i + 1)))?,
        });
    }
    let mut out: Vec<u8> = Vec::new();
    if format == ReportFormat::Table {
        // machine formats stay pure; the table echoes the variant
        out.extend_from_slice(
            format!(
                "metrics={}\n",
                if args.paper_mode { "printed" } else { "standard" }
            )
            .as_bytes(),
        );
    }
    emit_report(&quotes, args.k, variant, format, &mut out).map_err(pricing_failure)?;
    match &args.out {
        Some(path) => write_text(path, &String::from_utf8_lossy(&out))?,
        None => print!("{}", String::from_utf8_lossy(&out)),
    }
    Ok(())
}
