//! Pricing-error battery, model-vs-market comparison tables bucketed by
//! maturity, and plot emission.
//!
//! Two formula variants ship. The printed variant keeps the published
//! battery verbatim (its ARPE carries no per-point market denominator
//! and its RMSE takes the square root of the mean absolute error); the
//! standard variant replaces those two with the conventional
//! `mean(|err|/market)` and `sqrt(mean(err^2))`. AAE, APE, and RSE are
//! identical in both.

use std::io::Write;

use crate::error::PricingError;

/// Which battery of formulas to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricVariant {
    Printed,
    #[default]
    Standard,
}

impl std::str::FromStr for MetricVariant {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "printed" => Ok(MetricVariant::Printed),
            "standard" => Ok(MetricVariant::Standard),
            _ => Err("variant must be printed or standard"),
        }
    }
}

/// One row of the error battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub ape: f64,
    pub aae: f64,
    pub arpe: f64,
    pub rmse: f64,
    pub rse: f64,
    pub n: usize,
}

/// Pricing-error battery over paired market/model prices.
///
/// * APE  = `sum|err| / (N * mean market price)`
/// * AAE  = `sum|err| / N`
/// * ARPE = printed: `AAE / N`; standard: `mean(|err| / market)`
/// * RMSE = printed: `sqrt(AAE)`; standard: `sqrt(mean(err^2))`
/// * RSE  = `sqrt(SSE / (n - k))`
pub fn compute_errors(
    market: &[f64],
    model: &[f64],
    k: usize,
    variant: MetricVariant,
) -> Result<ErrorMetrics, PricingError> {
    if market.len() != model.len() {
        return Err(PricingError::InvalidInput("length mismatch"));
    }
    let n = market.len();
    if n == 0 {
        return Err(PricingError::InvalidInput("price lists must be nonempty"));
    }
    if k >= n {
        return Err(PricingError::InvalidInput("k >= n"));
    }
    let nf = n as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut rel_sum = 0.0;
    let mut market_sum = 0.0;
    for (mk, md) in market.iter().zip(model) {
        let err = (mk - md).abs();
        abs_sum += err;
        sq_sum += err * err;
        rel_sum += err / mk;
        market_sum += mk;
    }
    let aae = abs_sum / nf;
    let ape = abs_sum / nf / (market_sum / nf);
    let (arpe, rmse) = match variant {
        MetricVariant::Printed => (aae / nf, aae.sqrt()),
        MetricVariant::Standard => (rel_sum / nf, (sq_sum / nf).sqrt()),
    };
    let rse = (sq_sum / (n - k) as f64).sqrt();
    Ok(ErrorMetrics {
        ape,
        aae,
        arpe,
        rmse,
        rse,
        n,
    })
}

/// Maturity buckets in calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaturityBucket {
    All,
    UpTo30,
    From30To90,
    Over90,
}

pub const BUCKETS: [MaturityBucket; 4] = [
    MaturityBucket::All,
    MaturityBucket::UpTo30,
    MaturityBucket::From30To90,
    MaturityBucket::Over90,
];

impl MaturityBucket {
    pub fn contains(&self, days: u32) -> bool {
        match self {
            MaturityBucket::All => true,
            MaturityBucket::UpTo30 => days <= 30,
            MaturityBucket::From30To90 => days > 30 && days <= 90,
            MaturityBucket::Over90 => days > 90,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MaturityBucket::All => "all",
            MaturityBucket::UpTo30 => "T<=30",
            MaturityBucket::From30To90 => "30<T<=90",
            MaturityBucket::Over90 => "T>90",
        }
    }
}

/// One market/model price pair tagged with its series label and maturity.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedQuote {
    /// Series label, conventionally `model_method`.
    pub label: String,
    pub maturity_days: u32,
    pub market: f64,
    pub model: f64,
}

/// Metrics for one (series, bucket) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub bucket: MaturityBucket,
    pub metrics: ErrorMetrics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
}

/// Group quotes by label, split into the four maturity buckets, and
/// evaluate the battery for every nonempty cell. The RSE degrees of
/// freedom are clamped to `n - 1` when a small bucket has fewer points
/// than parameters.
pub fn bucketed_report(
    quotes: &[PricedQuote],
    k: usize,
    variant: MetricVariant,
) -> Result<ErrorReport, PricingError> {
    if quotes.is_empty() {
        return Err(PricingError::InvalidInput("no quotes to report on"));
    }
    let mut labels: Vec<&str> = quotes.iter().map(|q| q.label.as_str()).collect();
    labels.dedup();
    let mut seen: Vec<&str> = Vec::new();
    for l in labels {
        if !seen.contains(&l) {
            seen.push(l);
        }
    }
    let mut rows = Vec::new();
    for label in seen {
        for bucket in BUCKETS {
            let (market, model): (Vec<f64>, Vec<f64>) = quotes
                .iter()
                .filter(|q| q.label == label && bucket.contains(q.maturity_days))
                .map(|q| (q.market, q.model))
                .unzip();
            if market.is_empty() {
                continue;
            }
            let k_eff = k.min(market.len() - 1);
            rows.push(ReportRow {
                label: label.to_string(),
                bucket,
                metrics: compute_errors(&market, &model, k_eff, variant)?,
            });
        }
    }
    Ok(ErrorReport { rows })
}

/// Emission format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    Svg,
}

impl std::str::FromStr for ReportFormat {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            _ => Err("format must be table, csv, or svg"),
        }
    }
}

/// Render the report in the requested format. Table and CSV carry the
/// metric rows; SVG charts price against maturity for the market series
/// and every model series.
pub fn emit_report<W: Write>(
    quotes: &[PricedQuote],
    k: usize,
    variant: MetricVariant,
    format: ReportFormat,
    mut w: W,
) -> Result<(), PricingError> {
    let text = match format {
        ReportFormat::Table => render_table(&bucketed_report(quotes, k, variant)?),
        ReportFormat::Csv => render_csv(&bucketed_report(quotes, k, variant)?),
        ReportFormat::Svg => render_svg(quotes)?,
    };
    w.write_all(text.as_bytes())
        .map_err(|_| PricingError::InvalidInput("failed to write report output"))
}

type MetricGetter = fn(&ErrorMetrics) -> f64;

/// Metric blocks down, buckets across, one row per series.
pub fn render_table(report: &ErrorReport) -> String {
    let metrics: [(&str, MetricGetter); 5] = [
        ("APE", |m| m.ape),
        ("AAE", |m| m.aae),
        ("ARPE", |m| m.arpe),
        ("RMSE", |m| m.rmse),
        ("RSE", |m| m.rse),
    ];
    let mut labels: Vec<&str> = Vec::new();
    for r in &report.rows {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(6).max(6);
    let mut out = String::new();
    for (name, get) in metrics {
        out.push_str(&format!("{name}\n"));
        out.push_str(&format!("  {:width$}", "series"));
        for b in BUCKETS {
            out.push_str(&format!(" {:>10}", b.label()));
        }
        out.push('\n');
        for label in &labels {
            out.push_str(&format!("  {label:width$}"));
            for b in BUCKETS {
                match report
                    .rows
                    .iter()
                    .find(|r| r.label == *label && r.bucket == b)
                {
                    Some(r) => out.push_str(&format!(" {:>10.4}", get(&r.metrics))),
                    None => out.push_str(&format!(" {:>10}", "-")),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn render_csv(report: &ErrorReport) -> String {
    let mut out = String::from("label,bucket,n,ape,aae,arpe,rmse,rse\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.label,
            r.bucket.label(),
            r.metrics.n,
            r.metrics.ape,
            r.metrics.aae,
            r.metrics.arpe,
            r.metrics.rmse,
            r.metrics.rse
        ));
    }
    out
}

/// Price-vs-maturity chart: the market series plus one polyline per
/// model series.
pub fn render_svg(quotes: &[PricedQuote]) -> Result<String, PricingError> {
    if quotes.is_empty() {
        return Err(PricingError::InvalidInput("no quotes to plot"));
    }
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const M: f64 = 50.0;

    let mut labels: Vec<&str> = Vec::new();
    for q in quotes {
        if !labels.contains(&q.label.as_str()) {
            labels.push(&q.label);
        }
    }
    let xs: Vec<f64> = quotes.iter().map(|q| q.maturity_days as f64).collect();
    let mut ys: Vec<f64> = quotes.iter().map(|q| q.market).collect();
    ys.extend(quotes.iter().map(|q| q.model));
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&ys);
    let sx = |x: f64| M + (x - x_lo) / (x_hi - x_lo).max(1e-12) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_lo) / (y_hi - y_lo).max(1e-12) * (H - 2.0 * M);

    let colors = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - M,
        W - M,
        H - M,
        H - M
    );

    // market series from the first label's rows (market prices repeat per label)
    let first = labels[0];
    let mut market_pts: Vec<(u32, f64)> = quotes
        .iter()
        .filter(|q| q.label == first)
        .map(|q| (q.maturity_days, q.market))
        .collect();
    market_pts.sort_by_key(|p| p.0);
    svg.push_str(&polyline(&market_pts, "black", &sx, &sy));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">market</text>\n",
        W - M - 60.0,
        M + 14.0
    ));

    for (i, label) in labels.iter().enumerate() {
        let mut pts: Vec<(u32, f64)> = quotes
            .iter()
            .filter(|q| q.label == *label)
            .map(|q| (q.maturity_days, q.model))
            .collect();
        pts.sort_by_key(|p| p.0);
        let color = colors[i % colors.len()];
        svg.push_str(&polyline(&pts, color, &sx, &sy));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            W - M - 60.0,
            M + 14.0 * (i as f64 + 2.0)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn polyline(
    pts: &[(u32, f64)],
    color: &str,
    sx: &dyn Fn(f64) -> f64,
    sy: &dyn Fn(f64) -> f64,
) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|(d, y)| format!("{:.2},{:.2}", sx(*d as f64), sy(*y)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}
