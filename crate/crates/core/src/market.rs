//! Ingestion of index price history and VIX futures quotes.
//!
//! CSV schemas (UTF-8, comma-separated, `.` decimal point):
//!
//! * prices:  `date,close` with ISO-8601 dates, strictly increasing
//! * futures: `quote_date,days_to_expiry,settlement,volume`
//!
//! Writing a loaded series back out reproduces the canonical form
//! byte-for-byte (modulo trailing whitespace).

use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::DataError;
use crate::params::DAYS_PER_YEAR;

/// Daily closes with derived log returns.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    /// ISO-8601 dates, strictly increasing.
    pub dates: Vec<String>,
    pub closes: Vec<f64>,
}

impl PriceSeries {
    /// `r_i = ln(close_i / close_{i-1})`, one fewer than the rows.
    pub fn log_returns(&self) -> Vec<f64> {
        self.closes
            .windows(2)
            .map(|w| (w[1] / w[0]).ln())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// One VIX futures market row.
#[derive(Debug, Clone, PartialEq)]
pub struct FuturesQuote {
    pub quote_date: String,
    pub days_to_expiry: u32,
    pub settlement: f64,
    pub volume: u64,
}

impl FuturesQuote {
    /// Calendar-day maturity converted to years (days/365).
    pub fn maturity_years(&self) -> f64 {
        self.days_to_expiry as f64 / DAYS_PER_YEAR
    }
}

/// Minimal ISO-8601 calendar-date check (`YYYY-MM-DD`); returns a
/// sortable key.
fn parse_iso_date(s: &str) -> Option<&str> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    if !digits(0..4) || !digits(5..7) || !digits(8..10) {
        return None;
    }
    let month: u32 = s[5..7].parse().ok()?;
    let day: u32 = s[8..10].parse().ok()?;
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    Some(s)
}

#[derive(Deserialize)]
struct PriceRow {
    date: String,
    close: f64,
}

/// Load `date,close` rows; errors carry the 1-based file line.
pub fn load_prices(path: &Path) -> Result<PriceSeries, DataError> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
    read_prices(file)
}

pub fn read_prices<R: std::io::Read>(reader: R) -> Result<PriceSeries, DataError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut dates: Vec<String> = Vec::new();
    let mut closes = Vec::new();
    for (i, row) in rdr.deserialize::<PriceRow>().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(|e| DataError::Parse {
            line,
            message: e.to_string(),
        })?;
        parse_iso_date(&row.date).ok_or_else(|| DataError::Invalid {
            line,
            message: format!("invalid ISO-8601 date {:?}", row.date),
        })?;
        if let Some(prev) = dates.last() {
            if row.date.as_str() <= prev.as_str() {
                return Err(DataError::OutOfOrder { line });
            }
        }
        if !(row.close > 0.0) || !row.close.is_finite() {
            return Err(DataError::Invalid {
                line,
                message: format!("close must be > 0, got {}", row.close),
            });
        }
        dates.push(row.date);
        closes.push(row.close);
    }
    Ok(PriceSeries { dates, closes })
}

/// Write the canonical `date,close` form.
pub fn write_prices<W: Write>(series: &PriceSeries, mut w: W) -> Result<(), DataError> {
    let io = |e: std::io::Error| DataError::Io(e.to_string());
    writeln!(w, "date,close").map_err(io)?;
    for (d, c) in series.dates.iter().zip(&series.closes) {
        writeln!(w, "{d},{c}").map_err(io)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct FuturesRow {
    quote_date: String,
    days_to_expiry: i64,
    settlement: f64,
    volume: i64,
}

/// Load futures quotes, sorted by days to expiry; duplicate expiries are
/// kept in file order.
pub fn load_futures(path: &Path) -> Result<Vec<FuturesQuote>, DataError> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
    read_futures(file)
}

pub fn read_futures<R: std::io::Read>(reader: R) -> Result<Vec<FuturesQuote>, DataError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut quotes = Vec::new();
    for (i, row) in rdr.deserialize::<FuturesRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| DataError::Parse {
            line,
            message: e.to_string(),
        })?;
        parse_iso_date(&row.quote_date).ok_or_else(|| DataError::Invalid {
            line,
            message: format!("invalid ISO-8601 date {:?}", row.quote_date),
        })?;
        if row.days_to_expiry < 0 {
            return Err(DataError::Invalid {
                line,
                message: "days_to_expiry must be >= 0".into(),
            });
        }
        if !(row.settlement > 0.0) || !row.settlement.is_finite() {
            return Err(DataError::Invalid {
                line,
                message: format!("settlement must be > 0, got {}", row.settlement),
            });
        }
        if row.volume < 0 {
            return Err(DataError::Invalid {
                line,
                message: "volume must be >= 0".into(),
            });
        }
        quotes.push(FuturesQuote {
            quote_date: row.quote_date,
            days_to_expiry: row.days_to_expiry as u32,
            settlement: row.settlement,
            volume: row.volume as u64,
        });
    }
    quotes.sort_by_key(|q| q.days_to_expiry); // stable sort keeps file order on ties
    Ok(quotes)
}

pub fn write_futures<W: Write>(quotes: &[FuturesQuote], mut w: W) -> Result<(), DataError> {
    let io = |e: std::io::Error| DataError::Io(e.to_string());
    writeln!(w, "quote_date,days_to_expiry,settlement,volume").map_err(io)?;
    for q in quotes {
        writeln!(w, "{},{},{},{}", q.quote_date, q.days_to_expiry, q.settlement, q.volume)
            .map_err(io)?;
    }
    Ok(())
}
