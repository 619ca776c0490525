//! End-to-end tests against the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volstrike"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_table1(dir: &Path) -> String {
    let path = dir.join("table1.toml");
    std::fs::write(
        &path,
        "r = -0.0018\nkappa = 0.8519\ntheta = 0.1574\nsigma = 0.2403\nrho = -0.8740\nv0 = 0.0093\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

/// Pull `value` (and optional `se=`) off a quote line.
fn parse_quote(out: &str, quantity: &str, method: &str) -> (f64, Option<f64>) {
    for line in out.lines() {
        let mut parts = line.split_whitespace();
        if parts.next() == Some(quantity) && parts.next() == Some(method) {
            let value: f64 = parts.next().unwrap().parse().unwrap();
            let se = parts
                .next()
                .and_then(|s| s.strip_prefix("se="))
                .map(|s| s.parse().unwrap());
            return (value, se);
        }
    }
    panic!("no quote line for {quantity} {method} in:\n{out}");
}

#[test]
fn price_analytic_heston() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let out = run(&["price", "--model", "heston", "--config", &cfg, "-T", "1", "--method", "analytic"]);
    assert!(out.status.success());
    let (value, se) = parse_quote(&stdout(&out), "variance_strike", "analytic");
    assert!((value - 0.0577).abs() < 1e-4, "{value}");
    assert!(se.is_none());
}

#[test]
fn price_merton_convexity() {
    let out = run(&[
        "price", "--model", "merton",
        "--set", "r=-0.0044", "--set", "sigma=0.1",
        "--set", "lambda=0.0038", "--set", "a=-0.0001", "--set", "b2=0.05",
        "-T", "1", "--method", "convexity",
    ]);
    assert!(out.status.success());
    let (value, _) = parse_quote(&stdout(&out), "vol_strike", "convexity");
    assert!((value - 0.097).abs() < 2e-3, "{value}");
}

#[test]
fn price_all_methods_mc_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let out = run(&[
        "price", "--model", "heston", "--config", &cfg, "-T", "1",
        "--method", "all", "--seed", "7", "--paths", "20000", "--steps", "200",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let (kvar, _) = parse_quote(&text, "variance_strike", "analytic");
    let (mc, se) = parse_quote(&text, "variance_strike", "monte_carlo");
    let se = se.unwrap();
    assert!((mc - kvar).abs() < 3.0 * se, "mc {mc} +- {se} vs {kvar}");
    // all four method rows are present
    parse_quote(&text, "vol_strike", "convexity");
    parse_quote(&text, "vol_strike", "laplace");
    parse_quote(&text, "vol_strike", "monte_carlo");
}

#[test]
fn price_paper_mode_header_and_value() {
    let out = run(&[
        "price", "--model", "bates",
        "--set", "r=-0.0044", "--set", "kappa=0.8269", "--set", "theta=0.1793",
        "--set", "sigma=0.2916", "--set", "rho=-0.8734", "--set", "v0=0.0103",
        "--set", "lambda=0.0038", "--set", "a=-0.0001", "--set", "b2=0.05",
        "-T", "1", "--method", "convexity", "--paper-mode",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("variance_formula=printed"), "{text}");
    let (value, _) = parse_quote(&text, "vol_strike", "convexity");
    assert!((value - 0.3445).abs() < 2e-3, "{value}");
}

#[test]
fn price_levy_heston() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let out = run(&[
        "price", "--model", "levy-heston", "--config", &cfg,
        "--set", "alpha=2.0", "--set", "sigma_s=0.5",
        "-T", "1", "--method", "analytic",
    ]);
    assert!(out.status.success());
    let (value, _) = parse_quote(&stdout(&out), "variance_strike", "analytic");
    assert!((value - 0.0577).abs() < 1e-4, "{value}");
}

#[test]
fn vix_at_zero_maturity_routes_agree() {
    let out = run(&[
        "vix", "--model", "bates",
        "--set", "r=-0.0044", "--set", "kappa=0.8269", "--set", "theta=0.1793",
        "--set", "sigma=0.2916", "--set", "rho=-0.8734", "--set", "v0=0.0103",
        "--set", "lambda=0.0038", "--set", "a=-0.0001", "--set", "b2=0.05",
        "-T", "0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("T_days=0")).unwrap();
    let grab = |tag: &str| -> f64 {
        line.split_whitespace()
            .find_map(|tok| tok.strip_prefix(tag))
            .unwrap()
            .parse()
            .unwrap()
    };
    let convex = grab("convexity=");
    let laplace = grab("laplace=");
    assert!((convex - laplace).abs() < 1e-3, "{convex} vs {laplace}");
}

#[test]
fn vix_market_join_produces_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let futures = dir.path().join("futures.csv");
    std::fs::write(
        &futures,
        "quote_date,days_to_expiry,settlement,volume\n\
         2017-01-13,5,12.10,110184\n\
         2017-01-13,33,14.00,113493\n\
         2017-01-13,68,15.90,34580\n\
         2017-01-13,96,16.80,12146\n\
         2017-01-13,124,17.30,7351\n",
    )
    .unwrap();
    let join = dir.path().join("join.csv");
    let out = run(&[
        "vix", "--model", "heston", "--config", &cfg,
        "--market", futures.to_str().unwrap(),
        "--join-out", join.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for block in ["APE", "AAE", "ARPE", "RMSE", "RSE"] {
        assert!(text.contains(block), "missing {block}:\n{text}");
    }
    for bucket in ["all", "T<=30", "30<T<=90", "T>90"] {
        assert!(text.contains(bucket), "missing bucket {bucket}");
    }
    let joined = std::fs::read_to_string(&join).unwrap();
    assert!(joined.starts_with("label,maturity_days,market,model\n"));
    assert_eq!(joined.trim_end().lines().count(), 1 + 10); // 2 labels x 5 maturities
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let args = [
        "simulate", "--model", "heston", "--config", &cfg,
        "-T", "0.5", "--paths", "5000", "--steps", "100", "--seed", "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_dump_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let dump = dir.path().join("rv.csv");
    let out = run(&[
        "simulate", "--model", "heston", "--config", &cfg,
        "-T", "0.25", "--paths", "500", "--steps", "50", "--seed", "3",
        "--dump", dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("path,realized_variance\n"));
    assert_eq!(text.trim_end().lines().count(), 1 + 500);
}

#[test]
fn simulate_vix_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_table1(dir.path());
    let out = run(&[
        "simulate", "--model", "heston", "--config", &cfg,
        "-T", "33", "--estimate", "vix", "--paths", "50000", "--seed", "5",
    ]);
    assert!(out.status.success());
    let (value, se) = parse_quote(&stdout(&out), "vix_future", "monte_carlo");
    // closed-form value is about 15.59 at these parameters
    assert!((value - 15.59).abs() < 3.0 * se.unwrap() + 0.05, "{value}");
}

fn write_price_fixture(dir: &Path, n: usize) -> String {
    let path = dir.join("prices.csv");
    let mut text = String::from("date,close\n");
    for i in 0..n {
        let ls = (100.0f64).ln() + 0.0001 * i as f64 + 0.012 * (0.7 * i as f64).sin();
        let (y, m, d) = (2015 + i / 252, 1 + (i / 21) % 12, 1 + i % 21);
        text.push_str(&format!("{y:04}-{m:02}-{d:02},{}\n", ls.exp()));
    }
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn calibrate_writes_posterior_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prices = write_price_fixture(dir.path(), 150);
    let out_csv = dir.path().join("posterior.csv");
    let out = run(&[
        "calibrate", "--model", "heston", "--prices", &prices,
        "--burn", "100", "--keep", "200", "--runs", "1", "--seed", "2",
        "--out", out_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("parameter,mean,std_dev\n"));
    for row in ["r,", "kappa,", "theta,", "sigma,", "rho,", "v0,"] {
        assert!(text.contains(row), "missing {row} in {text}");
    }
}

#[test]
fn calibrate_prior_only_needs_no_data() {
    let out = run(&[
        "calibrate", "--model", "bates", "--prior-only",
        "--keep", "500", "--runs", "1", "--seed", "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("lambda,"));
}

#[test]
fn calibrate_divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let prices = write_price_fixture(dir.path(), 150);
    let out = run(&[
        "calibrate", "--model", "heston", "--prices", &prices,
        "--burn", "500", "--keep", "500", "--runs", "1",
        "--v-cap", "0.000001",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chain divergence"));
}

#[test]
fn report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("joined.csv");
    std::fs::write(
        &input,
        "label,maturity_days,market,model\n\
         heston_convexity,5,12.1,12.6\n\
         heston_convexity,33,14.0,15.6\n\
         heston_convexity,96,16.8,18.2\n\
         heston_laplace,5,12.1,12.6\n\
         heston_laplace,33,14.0,15.6\n\
         heston_laplace,96,16.8,17.9\n",
    )
    .unwrap();

    let table = run(&["report", "--in", input.to_str().unwrap(), "--format", "table"]);
    assert!(table.status.success());
    assert!(stdout(&table).contains("RMSE"));

    let csv = run(&["report", "--in", input.to_str().unwrap(), "--format", "csv"]);
    assert!(csv.status.success());
    assert!(stdout(&csv).starts_with("label,bucket,n,ape,aae,arpe,rmse,rse"));

    let svg_path = dir.path().join("chart.svg");
    let svg = run(&[
        "report", "--in", input.to_str().unwrap(),
        "--format", "svg", "--out", svg_path.to_str().unwrap(),
    ]);
    assert!(svg.status.success());
    let content = std::fs::read_to_string(&svg_path).unwrap();
    assert!(content.starts_with("<svg"));
    assert!(content.trim_end().ends_with("</svg>"));
    // market + 2 model series
    assert_eq!(content.matches("<polyline").count(), 3);
}

#[test]
fn user_errors_exit_1() {
    let out = run(&["price", "--model", "nosuch", "-T", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["price", "--model", "heston", "-T", "1"]); // missing params
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["report", "--in", "/definitely/missing.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_lists_all_subcommands() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["price", "vix", "simulate", "calibrate", "report"] {
        assert!(text.contains(sub), "missing {sub}");
    }
}
