//! Station catalogs, precipitation series and the reduction of rain
//! observations to the `R₀.₀₁` input of the attenuation chain.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::geometry::{great_circle_km, GroundStation};
use crate::{Error, Result, HOURS_PER_AVERAGE_YEAR};

/// Separation below which two stations are likely to share weather.
pub const MIN_SEPARATION_KM: f64 = 2000.0;

const CATALOG_HEADER: [&str; 4] = ["name", "latitude_deg", "longitude_deg", "altitude_m"];
const SERIES_HEADER: [&str; 2] = ["timestamp", "rate_mm_per_hr"];

const CANDIDATE_AFRICA_CSV: &str = include_str!("../data/candidate_stations.csv");

// ---------------------------------------------------------------------------
// Station catalog
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub a: String,
    pub b: String,
    pub distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationCatalog {
    pub stations: Vec<GroundStation>,
}

impl StationCatalog {
    pub fn new(stations: Vec<GroundStation>) -> Result<Self> {
        if stations.is_empty() {
            return Err(Error::Validation("station catalog is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &stations {
            s.validate()?;
            if !seen.insert(s.name.as_str()) {
                return Err(Error::Validation(format!("duplicate station name `{}`", s.name)));
            }
        }
        Ok(StationCatalog { stations })
    }

    /// The six African gateway candidates, coordinates as published.
    pub fn candidate_africa() -> StationCatalog {
        parse_station_catalog(CANDIDATE_AFRICA_CSV).expect("bundled catalog is valid")
    }

    pub fn get(&self, name: &str) -> Option<&GroundStation> {
        self.stations.iter().find(|s| s.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.stations.iter().map(|s| s.name.as_str()).collect()
    }

    /// Every unordered pair with its great-circle distance, in catalog order.
    pub fn pairwise_separations(&self) -> Vec<Separation> {
        let mut out = Vec::new();
        for (i, a) in self.stations.iter().enumerate() {
            for b in &self.stations[i + 1..] {
                out.push(Separation {
                    a: a.name.clone(),
                    b: b.name.clone(),
                    distance_km: great_circle_km(a, b),
                });
            }
        }
        out
    }

    /// Pairs closer than [`MIN_SEPARATION_KM`].
    pub fn separation_warnings(&self) -> Vec<Separation> {
        self.pairwise_separations()
            .into_iter()
            .filter(|s| s.distance_km < MIN_SEPARATION_KM)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = CATALOG_HEADER.join(",");
        out.push('\n');
        for s in &self.stations {
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(&s.name),
                s.latitude_deg,
                s.longitude_deg,
                metres_text(s.altitude_km)
            ));
        }
        out
    }
}

/// Metres as decimal text, shifted from the shortest decimal form of `km`
/// so that [`km_from_metres`] recovers `km` exactly.
fn metres_text(km: f64) -> String {
    let sci = format!("{km:e}");
    let (mantissa, exp) = sci.split_once('e').expect("`{:e}` output has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 4;
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat(point.unsigned_abs() as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    let body = body.trim_start_matches('0');
    if body.is_empty() || body.starts_with('.') {
        format!("{sign}0{body}")
    } else {
        format!("{sign}{body}")
    }
}

/// Kilometres from metre text with one rounding, by lowering the decimal
/// exponent instead of dividing.
fn km_from_metres(text: &str) -> Option<f64> {
    let shifted = match text.find(['e', 'E']) {
        Some(i) => format!("{}e{}", &text[..i], text[i + 1..].parse::<i32>().ok()? - 3),
        None => format!("{text}e-3"),
    };
    shifted.parse().ok()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let got: Vec<&str> = header.iter().collect();
    if got.is_empty() || got == [""] {
        return Err(Error::Validation("input is empty".into()));
    }
    if got != expected {
        return Err(Error::parse(
            header.position().map_or(1, |p| p.line()),
            format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn number(field: &str, what: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("{what}: `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what}: `{field}` is not finite")));
    }
    Ok(v)
}

/// Parse a `name,latitude_deg,longitude_deg,altitude_m` catalog.
pub fn parse_station_catalog(text: &str) -> Result<StationCatalog> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &CATALOG_HEADER)?;
    let mut stations = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CATALOG_HEADER.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", CATALOG_HEADER.len(), record.len()),
            ));
        }
        let name = record[0].to_string();
        let lat = number(&record[1], "latitude_deg", line)?;
        let lon = number(&record[2], "longitude_deg", line)?;
        number(&record[3], "altitude_m", line)?;
        let alt_km = km_from_metres(&record[3])
            .ok_or_else(|| Error::parse(line, format!("altitude_m: `{}` is not a number", &record[3])))?;
        let station = GroundStation::new(name, lat, lon, alt_km).map_err(|e| match e {
            Error::Domain(m) | Error::Validation(m) => Error::parse(line, m),
            other => other,
        })?;
        stations.push(station);
    }
    StationCatalog::new(stations)
}

// ---------------------------------------------------------------------------
// Rain series
// ---------------------------------------------------------------------------

/// Declared or inferred sampling interval of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    Monthly,
    Daily,
    Hourly,
    SubHourly,
    Irregular,
}

impl Cadence {
    /// Infer from the median spacing between samples.
    pub fn infer(samples: &[RainSample]) -> Cadence {
        let mut gaps: Vec<i64> = samples
            .windows(2)
            .map(|w| (w[1].timestamp - w[0].timestamp).num_seconds())
            .collect();
        if gaps.is_empty() {
            return Cadence::Irregular;
        }
        gaps.sort_unstable();
        let median = gaps[gaps.len() / 2];
        const HOUR: i64 = 3600;
        match median {
            m if m >= 27 * 24 * HOUR => Cadence::Monthly,
            m if m >= 24 * HOUR => Cadence::Daily,
            m if m >= HOUR => Cadence::Hourly,
            _ => Cadence::SubHourly,
        }
    }

    /// Too coarse for an empirical 0.01% quantile.
    pub fn is_coarse(self) -> bool {
        matches!(self, Cadence::Monthly | Cadence::Daily)
    }
}

impl FromStr for Cadence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "monthly" => Ok(Cadence::Monthly),
            "daily" => Ok(Cadence::Daily),
            "hourly" => Ok(Cadence::Hourly),
            "sub_hourly" | "subhourly" | "30_minute" | "half_hourly" => Ok(Cadence::SubHourly),
            "irregular" => Ok(Cadence::Irregular),
            other => Err(Error::config("cadence", format!("unknown cadence `{other}`"))),
        }
    }
}

impl fmt::Display for Cadence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cadence::Monthly => "monthly",
            Cadence::Daily => "daily",
            Cadence::Hourly => "hourly",
            Cadence::SubHourly => "sub_hourly",
            Cadence::Irregular => "irregular",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainSample {
    pub timestamp: DateTime<Utc>,
    pub rate_mm_per_hr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainSeries {
    pub station_ref: String,
    pub samples: Vec<RainSample>,
    pub cadence: Cadence,
}

impl RainSeries {
    pub fn new(station_ref: impl Into<String>, samples: Vec<RainSample>, cadence: Option<Cadence>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("rain series has no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.rate_mm_per_hr.is_finite() && s.rate_mm_per_hr >= 0.0) {
                return Err(Error::Validation(format!(
                    "sample {i}: rate {} mm/h must be non-negative",
                    s.rate_mm_per_hr
                )));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::Validation(format!(
                "sample {}: timestamps must be strictly increasing",
                i + 1
            )));
        }
        let cadence = cadence.unwrap_or_else(|| Cadence::infer(&samples));
        Ok(RainSeries {
            station_ref: station_ref.into(),
            samples,
            cadence,
        })
    }

    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.rate_mm_per_hr)
    }

    pub fn to_csv(&self) -> String {
        let mut out = SERIES_HEADER.join(",");
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{}\n",
                s.timestamp.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
                s.rate_mm_per_hr
            ));
        }
        out
    }
}

/// Accepts RFC 3339, a naive `YYYY-MM-DDTHH:MM:SS` (taken as UTC) or a bare
/// date (midnight UTC), the last being what monthly exports usually carry.
fn parse_timestamp(field: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(field) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(field, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc())
}

/// Parse a `timestamp,rate_mm_per_hr` series.
pub fn parse_rain_series(text: &str, station_ref: &str) -> Result<RainSeries> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &SERIES_HEADER)?;
    let mut samples: Vec<RainSample> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != SERIES_HEADER.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", SERIES_HEADER.len(), record.len()),
            ));
        }
        let timestamp = parse_timestamp(&record[0])
            .ok_or_else(|| Error::parse(line, format!("`{}` is not an ISO-8601 timestamp", &record[0])))?;
        let rate = number(&record[1], "rate_mm_per_hr", line)?;
        if rate < 0.0 {
            return Err(Error::parse(line, format!("negative rain rate {rate}")));
        }
        if let Some(prev) = samples.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::parse(
                    line,
                    format!("timestamp {} does not follow {}", &record[0], prev.timestamp),
                ));
            }
        }
        samples.push(RainSample {
            timestamp,
            rate_mm_per_hr: rate,
        });
    }
    RainSeries::new(station_ref, samples, None)
}

// ---------------------------------------------------------------------------
// Reductions to R0.01
// ---------------------------------------------------------------------------

/// Arithmetic mean of the sample rates.
pub fn mean_rain_rate(series: &RainSeries) -> f64 {
    series.rates().sum::<f64>() / series.samples.len() as f64
}

/// Annual accumulation in mm from a mean rate in mm/h.
pub fn annual_accumulation(mean_rate_mm_per_hr: f64) -> Result<f64> {
    if !(mean_rate_mm_per_hr.is_finite() && mean_rate_mm_per_hr >= 0.0) {
        return Err(Error::domain(format!(
            "mean rate must be non-negative, got {mean_rate_mm_per_hr}"
        )));
    }
    Ok(mean_rate_mm_per_hr * HOURS_PER_AVERAGE_YEAR)
}

/// Chebil's conversion from annual accumulation (mm) to `R₀.₀₁` (mm/h).
pub fn chebil_r001(annual_accumulation_mm: f64) -> Result<f64> {
    if !(annual_accumulation_mm.is_finite() && annual_accumulation_mm >= 0.0) {
        return Err(Error::domain(format!(
            "annual accumulation must be non-negative, got {annual_accumulation_mm}"
        )));
    }
    Ok(12.2903 * annual_accumulation_mm.powf(0.2973))
}

/// Rate exceeded during `p_percent` of the samples.
///
/// Sorted descending, the value at 1-based rank `ceil(p/100·N)` clamped to
/// `[1, N]`.
pub fn empirical_exceedance_rate(series: &RainSeries, p_percent: f64) -> Result<f64> {
    if !(p_percent > 0.0 && p_percent < 100.0) {
        return Err(Error::domain(format!("percentage {p_percent} outside (0, 100)")));
    }
    let mut rates: Vec<f64> = series.rates().collect();
    rates.sort_by(|a, b| b.total_cmp(a));
    let n = rates.len();
    let rank = ((p_percent / 100.0 * n as f64).ceil() as usize).clamp(1, n);
    Ok(rates[rank - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Direct,
    ChebilAnnual,
    EmpiricalExceedance,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "direct" => Ok(Strategy::Direct),
            "chebil_annual" | "chebil" => Ok(Strategy::ChebilAnnual),
            "empirical_exceedance" | "empirical" => Ok(Strategy::EmpiricalExceedance),
            other => Err(Error::config(
                "strategy",
                format!("expected direct, chebil_annual or empirical_exceedance, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Direct => "direct",
            Strategy::ChebilAnnual => "chebil_annual",
            Strategy::EmpiricalExceedance => "empirical_exceedance",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    DirectR001(f64),
    Series(RainSeries),
}

/// Where a station's `R₀.₀₁` comes from, and how it is reduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainSource {
    /// Provenance tag such as `ITU`, `TRMM` or `GPM`.
    pub label: String,
    pub kind: SourceKind,
    pub strategy: Strategy,
}

impl RainSource {
    pub fn direct(label: impl Into<String>, r001_mm_per_hr: f64) -> Self {
        RainSource {
            label: label.into(),
            kind: SourceKind::DirectR001(r001_mm_per_hr),
            strategy: Strategy::Direct,
        }
    }

    /// A series source; `None` selects the Chebil annual conversion.
    pub fn series(label: impl Into<String>, series: RainSeries, strategy: Option<Strategy>) -> Self {
        RainSource {
            label: label.into(),
            kind: SourceKind::Series(series),
            strategy: strategy.unwrap_or(Strategy::ChebilAnnual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRainRate {
    pub r001_mm_per_hr: f64,
    pub strategy: Strategy,
    pub label: String,
    pub warnings: Vec<String>,
}

/// Reduce a source to `R₀.₀₁` according to its strategy.
pub fn resolve_r001(source: &RainSource) -> Result<ResolvedRainRate> {
    let mut warnings = Vec::new();
    let r001 = match (&source.kind, source.strategy) {
        (SourceKind::DirectR001(v), Strategy::Direct) => {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::domain(format!("R0.01 must be non-negative, got {v}")));
            }
            *v
        }
        (SourceKind::Series(series), Strategy::ChebilAnnual) => {
            chebil_r001(annual_accumulation(mean_rain_rate(series))?)?
        }
        (SourceKind::Series(series), Strategy::EmpiricalExceedance) => {
            if series.cadence.is_coarse() {
                warnings.push(format!(
                    "{}: empirical 0.01% quantile taken from a {} series of {} samples",
                    source.label,
                    series.cadence,
                    series.samples.len()
                ));
            }
            empirical_exceedance_rate(series, 0.01)?
        }
        (kind, strategy) => {
            let kind = match kind {
                SourceKind::DirectR001(_) => "direct_r001",
                SourceKind::Series(_) => "series",
            };
            return Err(Error::config(
                "strategy",
                format!("{}: strategy `{strategy}` cannot be used with a {kind} source", source.label),
            ));
        }
    };
    Ok(ResolvedRainRate {
        r001_mm_per_hr: r001,
        strategy: source.strategy,
        label: source.label.clone(),
        warnings,
    })
}
