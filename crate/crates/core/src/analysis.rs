//! Station sweeps, cross-source comparison, ranking and report emission.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::attenuation::{attenuation_curve, normalize_percentages, AttenuationCurve, Diagnostic};
use crate::geometry::{rain_height, rain_slant_path, GroundStation};
use crate::link_budget::{carrier_to_noise_anchor, CnrMode, LinkResult, TransmissionParams};
use crate::rain_data::{resolve_r001, RainSource, ResolvedRainRate, StationCatalog};
use crate::rain_physics::{Polarization, RegressionTable};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

/// What a rain source provides for one station.
#[derive(Debug, Clone, PartialEq)]
pub enum StationInput {
    Rain(RainSource),
    /// A published attenuation value replayed as-is at one percentage.
    Anchor { attenuation_db: f64, p_percent: f64 },
}

/// One labelled rain source covering some stations of a catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    pub label: String,
    pub inputs: BTreeMap<String, StationInput>,
}

impl SourceSet {
    pub fn new(label: impl Into<String>) -> Self {
        SourceSet {
            label: label.into(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn with_r001(mut self, station: &str, r001_mm_per_hr: f64) -> Self {
        let source = RainSource::direct(self.label.clone(), r001_mm_per_hr);
        self.inputs.insert(station.to_string(), StationInput::Rain(source));
        self
    }

    pub fn with_anchor(mut self, station: &str, attenuation_db: f64, p_percent: f64) -> Self {
        self.inputs.insert(
            station.to_string(),
            StationInput::Anchor {
                attenuation_db,
                p_percent,
            },
        );
        self
    }
}

/// Budget context shared by every evaluation in a run.
#[derive(Debug, Clone, Copy)]
pub struct Budget<'a> {
    pub params: &'a TransmissionParams,
    pub mode: CnrMode,
    pub polarization: Polarization,
    pub coefficients: &'a RegressionTable,
}

/// Chain output for one station and one rain source.
#[derive(Debug, Clone, PartialEq)]
pub struct StationEvaluation {
    pub station: String,
    pub source: String,
    /// Absent for anchored inputs.
    pub rain_rate: Option<ResolvedRainRate>,
    pub curve: AttenuationCurve,
    pub results: Vec<LinkResult>,
}

/// Resolve `R₀.₀₁` for a station and run the attenuation chain over `p_list`.
pub fn station_curve(
    station: &GroundStation,
    source: &RainSource,
    frequency_ghz: f64,
    elevation_deg: f64,
    polarization: Polarization,
    coefficients: &RegressionTable,
    p_list: &[f64],
) -> Result<(ResolvedRainRate, AttenuationCurve)> {
    let resolved = resolve_r001(source)?;
    let coeffs = coefficients.coefficients(frequency_ghz, polarization)?;
    let path = rain_slant_path(station, elevation_deg, rain_height(station))?;
    let curve = attenuation_curve(station, &path, &coeffs, resolved.r001_mm_per_hr, p_list)?;
    Ok((resolved, curve))
}

/// Run the attenuation chain and link budget for one station.
pub fn evaluate_station(
    station: &GroundStation,
    source_label: &str,
    input: &StationInput,
    budget: Budget<'_>,
    p_list: &[f64],
) -> Result<StationEvaluation> {
    let params = budget.params;
    match input {
        StationInput::Rain(source) => {
            let (resolved, curve) = station_curve(
                station,
                source,
                params.frequency_ghz,
                params.elevation_deg,
                budget.polarization,
                budget.coefficients,
                p_list,
            )?;
            let results = curve
                .points
                .iter()
                .map(|pt| {
                    LinkResult::evaluate(
                        &station.name,
                        source_label,
                        pt.p_percent,
                        params,
                        budget.mode,
                        pt.attenuation_db,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StationEvaluation {
                station: station.name.clone(),
                source: source_label.to_string(),
                rain_rate: Some(resolved),
                curve,
                results,
            })
        }
        StationInput::Anchor {
            attenuation_db,
            p_percent,
        } => {
            let (percentages, diagnostics) = normalize_percentages(p_list)?;
            if let Some(p) = percentages.iter().find(|p| *p != p_percent) {
                return Err(Error::config(
                    format!("sources.{source_label}.{}", station.name),
                    format!("anchored attenuation is only defined at p = {p_percent}%, requested {p}%"),
                ));
            }
            let cnr = carrier_to_noise_anchor(params, budget.mode, *attenuation_db)?;
            let result = LinkResult::new(
                &station.name,
                source_label,
                *p_percent,
                *attenuation_db,
                cnr,
                params.required_margin_db,
            );
            Ok(StationEvaluation {
                station: station.name.clone(),
                source: source_label.to_string(),
                rain_rate: None,
                curve: AttenuationCurve {
                    reference_a001_db: *attenuation_db,
                    points: vec![crate::attenuation::CurvePoint {
                        p_percent: *p_percent,
                        attenuation_db: *attenuation_db,
                    }],
                    diagnostics,
                },
                results: vec![result],
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Link results sorted by station, source and percentage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SweepTable {
    pub rows: Vec<LinkResult>,
}

impl SweepTable {
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.station_ref
                .cmp(&b.station_ref)
                .then_with(|| a.source_label.cmp(&b.source_label))
                .then_with(|| a.p_percent.total_cmp(&b.p_percent))
        });
    }

    /// Rows for one source at one percentage.
    pub fn select(&self, source_label: &str, p_percent: f64) -> Vec<LinkResult> {
        self.rows
            .iter()
            .filter(|r| r.source_label == source_label && r.p_percent == p_percent)
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub table: SweepTable,
    pub evaluations: Vec<StationEvaluation>,
}

impl SweepOutput {
    /// Diagnostics and warnings from every evaluation, prefixed with their
    /// station and source.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        for e in &self.evaluations {
            if let Some(r) = &e.rain_rate {
                notes.extend(r.warnings.iter().cloned());
            }
            notes.extend(
                e.curve
                    .diagnostics
                    .iter()
                    .map(|d: &Diagnostic| format!("{} [{}]: {d}", e.station, e.source)),
            );
        }
        notes
    }
}

/// Evaluate every (station, source, p) combination the sources cover.
pub fn availability_sweep(
    catalog: &StationCatalog,
    budget: Budget<'_>,
    sources: &[SourceSet],
    p_list: &[f64],
) -> Result<SweepOutput> {
    if catalog.stations.is_empty() {
        return Err(Error::Validation("station catalog is empty".into()));
    }
    normalize_percentages(p_list)?;
    budget.params.validate()?;

    let mut jobs = Vec::new();
    for set in sources {
        for (name, input) in &set.inputs {
            let station = catalog.get(name).ok_or_else(|| {
                Error::config(
                    format!("sources.{}.{name}", set.label),
                    format!("station not in catalog (known: {})", catalog.names().join(", ")),
                )
            })?;
            jobs.push((station, set.label.as_str(), input));
        }
    }
    if jobs.is_empty() {
        return Err(Error::Validation("no rain source covers any station".into()));
    }

    let mut evaluations = jobs
        .par_iter()
        .map(|(station, label, input)| evaluate_station(station, label, input, budget, p_list))
        .collect::<Result<Vec<_>>>()?;
    evaluations.sort_by(|a, b| a.station.cmp(&b.station).then_with(|| a.source.cmp(&b.source)));

    let mut table = SweepTable {
        rows: evaluations.iter().flat_map(|e| e.results.iter().cloned()).collect(),
    };
    table.sort();
    Ok(SweepOutput { table, evaluations })
}

// ---------------------------------------------------------------------------
// Comparison and ranking
// ---------------------------------------------------------------------------

/// How much `baseline` exceeds `estimate`, as a percentage of `baseline`.
pub fn overestimation_percentage(baseline_db: f64, estimate_db: f64) -> Result<f64> {
    if !(baseline_db > 0.0) {
        return Err(Error::UndefinedComparison(format!(
            "baseline attenuation must be positive, got {baseline_db} dB"
        )));
    }
    Ok((baseline_db - estimate_db) / baseline_db * 100.0)
}

/// Integer percentage for display, half away from zero.
pub fn display_percent(value: f64) -> i64 {
    value.round() as i64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(rename = "station")]
    pub station_ref: String,
    #[serde(rename = "baseline_attenuation_dB")]
    pub baseline_attenuation_db: f64,
    #[serde(rename = "estimate_attenuation_dB")]
    pub estimate_attenuation_db: f64,
    pub overestimation_percent: f64,
}

fn common_p(results: &[LinkResult], which: &str) -> Result<Option<f64>> {
    let mut ps = results.iter().map(|r| r.p_percent);
    let Some(first) = ps.next() else {
        return Ok(None);
    };
    if ps.any(|p| p != first) {
        return Err(Error::Validation(format!("{which} results mix several percentages")));
    }
    Ok(Some(first))
}

/// Per-station overestimation of `estimate` by `baseline`, in baseline order.
pub fn compare_sources(baseline: &[LinkResult], estimate: &[LinkResult]) -> Result<Vec<ComparisonRow>> {
    let pb = common_p(baseline, "baseline")?;
    let pe = common_p(estimate, "estimate")?;
    if pb.is_some() && pe.is_some() && pb != pe {
        return Err(Error::Validation(format!(
            "baseline is at p = {}% but estimate is at p = {}%",
            pb.unwrap_or_default(),
            pe.unwrap_or_default()
        )));
    }
    let by_station: BTreeMap<&str, &LinkResult> =
        estimate.iter().map(|r| (r.station_ref.as_str(), r)).collect();
    let base_names: BTreeSet<&str> = baseline.iter().map(|r| r.station_ref.as_str()).collect();
    let est_names: BTreeSet<&str> = by_station.keys().copied().collect();
    if base_names.len() != baseline.len() || est_names.len() != estimate.len() {
        return Err(Error::Validation("a station appears more than once".into()));
    }
    if base_names != est_names {
        let only_base: Vec<&str> = base_names.difference(&est_names).copied().collect();
        let only_est: Vec<&str> = est_names.difference(&base_names).copied().collect();
        return Err(Error::Validation(format!(
            "station sets differ: only in baseline [{}], only in estimate [{}]",
            only_base.join(", "),
            only_est.join(", ")
        )));
    }
    baseline
        .iter()
        .map(|b| {
            let e = by_station[b.station_ref.as_str()];
            Ok(ComparisonRow {
                station_ref: b.station_ref.clone(),
                baseline_attenuation_db: b.attenuation_db,
                estimate_attenuation_db: e.attenuation_db,
                overestimation_percent: overestimation_percentage(b.attenuation_db, e.attenuation_db)?,
            })
        })
        .collect()
}

/// Best first: descending available margin, ties by station name.
pub fn rank_stations(results: &[LinkResult]) -> Vec<LinkResult> {
    let mut ranked = results.to_vec();
    ranked.sort_by(|a, b| {
        b.available_margin_db
            .total_cmp(&a.available_margin_db)
            .then_with(|| a.station_ref.cmp(&b.station_ref))
    });
    ranked
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
    /// Column-aligned text for terminals; not meant to be parsed back.
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "table" | "aligned-table" => Ok(ReportFormat::Table),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Table => "table",
        })
    }
}

/// A flat record that can be written as CSV, JSON or an aligned table.
pub trait ReportRow: Serialize + DeserializeOwned {
    /// Column names; must match the serde field names.
    const HEADERS: &'static [&'static str];

    fn display_cells(&self) -> Vec<String>;
}

fn dp4(v: f64) -> String {
    format!("{v:.4}")
}

impl ReportRow for LinkResult {
    const HEADERS: &'static [&'static str] = &[
        "station",
        "source",
        "p_percent",
        "attenuation_dB",
        "cnr_dB",
        "required_margin_dB",
        "available_margin_dB",
        "closes",
    ];

    fn display_cells(&self) -> Vec<String> {
        vec![
            self.station_ref.clone(),
            self.source_label.clone(),
            self.p_percent.to_string(),
            dp4(self.attenuation_db),
            dp4(self.cnr_db),
            dp4(self.required_margin_db),
            dp4(self.available_margin_db),
            if self.closes { "yes" } else { "no" }.to_string(),
        ]
    }
}

impl ReportRow for ComparisonRow {
    const HEADERS: &'static [&'static str] = &[
        "station",
        "baseline_attenuation_dB",
        "estimate_attenuation_dB",
        "overestimation_percent",
    ];

    fn display_cells(&self) -> Vec<String> {
        vec![
            self.station_ref.clone(),
            dp4(self.baseline_attenuation_db),
            dp4(self.estimate_attenuation_db),
            format!("{}%", display_percent(self.overestimation_percent)),
        ]
    }
}

/// One point of an attenuation curve with its rain-rate provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub station: String,
    pub source: String,
    /// Empty for anchored inputs.
    pub strategy: String,
    pub r001_mm_per_hr: Option<f64>,
    pub p_percent: f64,
    #[serde(rename = "attenuation_dB")]
    pub attenuation_db: f64,
}

impl CurveRow {
    pub fn from_curve(
        station: &str,
        source: &str,
        rain_rate: Option<&ResolvedRainRate>,
        curve: &AttenuationCurve,
    ) -> Vec<CurveRow> {
        let (strategy, r001) = match rain_rate {
            Some(r) => (r.strategy.to_string(), Some(r.r001_mm_per_hr)),
            None => (String::new(), None),
        };
        curve
            .points
            .iter()
            .map(|pt| CurveRow {
                station: station.to_string(),
                source: source.to_string(),
                strategy: strategy.clone(),
                r001_mm_per_hr: r001,
                p_percent: pt.p_percent,
                attenuation_db: pt.attenuation_db,
            })
            .collect()
    }

    pub fn from_evaluation(e: &StationEvaluation) -> Vec<CurveRow> {
        CurveRow::from_curve(&e.station, &e.source, e.rain_rate.as_ref(), &e.curve)
    }
}

impl ReportRow for CurveRow {
    const HEADERS: &'static [&'static str] = &[
        "station",
        "source",
        "strategy",
        "r001_mm_per_hr",
        "p_percent",
        "attenuation_dB",
    ];

    fn display_cells(&self) -> Vec<String> {
        vec![
            self.station.clone(),
            self.source.clone(),
            self.strategy.clone(),
            self.r001_mm_per_hr.map(dp4).unwrap_or_default(),
            self.p_percent.to_string(),
            dp4(self.attenuation_db),
        ]
    }
}

/// Catalog listing row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRow {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_km: f64,
    pub rain_height_km: f64,
    pub nearest_station: String,
    pub nearest_km: Option<f64>,
}

impl StationRow {
    pub fn from_catalog(catalog: &StationCatalog) -> Vec<StationRow> {
        let separations = catalog.pairwise_separations();
        catalog
            .stations
            .iter()
            .map(|s| {
                let nearest = separations
                    .iter()
                    .filter_map(|sep| {
                        if sep.a == s.name {
                            Some((&sep.b, sep.distance_km))
                        } else if sep.b == s.name {
                            Some((&sep.a, sep.distance_km))
                        } else {
                            None
                        }
                    })
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                StationRow {
                    name: s.name.clone(),
                    latitude_deg: s.latitude_deg,
                    longitude_deg: s.longitude_deg,
                    altitude_km: s.altitude_km,
                    rain_height_km: rain_height(s),
                    nearest_station: nearest.map(|n| n.0.clone()).unwrap_or_default(),
                    nearest_km: nearest.map(|n| n.1),
                }
            })
            .collect()
    }
}

impl ReportRow for StationRow {
    const HEADERS: &'static [&'static str] = &[
        "name",
        "latitude_deg",
        "longitude_deg",
        "altitude_km",
        "rain_height_km",
        "nearest_station",
        "nearest_km",
    ];

    fn display_cells(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            format!("{:.6}", self.latitude_deg),
            format!("{:.6}", self.longitude_deg),
            format!("{:.3}", self.altitude_km),
            format!("{:.3}", self.rain_height_km),
            self.nearest_station.clone(),
            self.nearest_km.map(|d| format!("{d:.1}")).unwrap_or_default(),
        ]
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Validation(format!("CSV serialization failed: {e}"))
}

fn write_csv<T: Serialize>(headers: &[&str], rows: &[T]) -> Result<String> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    wtr.write_record(headers).map_err(csv_error)?;
    for row in rows {
        wtr.serialize(row).map_err(csv_error)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV writer emits UTF-8"))
}

fn aligned_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut out = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    };
    let mut out = line(&mut headers.iter().copied());
    out.push_str(&line(&mut widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str)));
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

/// Serialize rows in the requested format.
pub fn emit_report<T: ReportRow>(rows: &[T], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => write_csv(T::HEADERS, rows),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)
                .map_err(|e| Error::Validation(format!("JSON serialization failed: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Table => {
            let cells: Vec<Vec<String>> = rows.iter().map(ReportRow::display_cells).collect();
            Ok(aligned_table(T::HEADERS, &cells))
        }
    }
}

/// Parse a CSV or JSON report back into rows.
pub fn parse_report<T: ReportRow>(text: &str, format: ReportFormat) -> Result<Vec<T>> {
    match format {
        ReportFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            let headers = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
            if headers.iter().ne(T::HEADERS.iter().copied()) {
                return Err(Error::parse(1, "report header does not match the expected columns"));
            }
            rdr.deserialize()
                .map(|r| {
                    r.map_err(|e| {
                        let line = e.position().map_or(0, |p| p.line());
                        Error::parse(line, e.to_string())
                    })
                })
                .collect()
        }
        ReportFormat::Json => serde_json::from_str(text).map_err(|e| Error::parse(e.line() as u64, e.to_string())),
        ReportFormat::Table => Err(Error::Validation("aligned tables cannot be parsed back".into())),
    }
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotMetric {
    #[default]
    Attenuation,
    AvailableMargin,
}

impl PlotMetric {
    pub fn column(self) -> &'static str {
        match self {
            PlotMetric::Attenuation => "attenuation_dB",
            PlotMetric::AvailableMargin => "available_margin_dB",
        }
    }
}

/// One line on a plot: a station under one rain source.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotCurve {
    pub station: String,
    pub source: String,
    pub metric: PlotMetric,
    /// (p_percent, value)
    pub points: Vec<(f64, f64)>,
}

impl PlotCurve {
    /// Group a sweep table into curves, keeping the table's order.
    pub fn from_sweep(table: &SweepTable, metric: PlotMetric) -> Vec<PlotCurve> {
        let mut curves: Vec<PlotCurve> = Vec::new();
        for row in &table.rows {
            let value = match metric {
                PlotMetric::Attenuation => row.attenuation_db,
                PlotMetric::AvailableMargin => row.available_margin_db,
            };
            match curves.last_mut() {
                Some(c) if c.station == row.station_ref && c.source == row.source_label => {
                    c.points.push((row.p_percent, value));
                }
                _ => curves.push(PlotCurve {
                    station: row.station_ref.clone(),
                    source: row.source_label.clone(),
                    metric,
                    points: vec![(row.p_percent, value)],
                }),
            }
        }
        curves
    }
}

/// Long-format CSV: `station,source,p_percent,<metric column>`.
pub fn emit_plot_data(curves: &[PlotCurve]) -> Result<String> {
    let Some(first) = curves.first() else {
        return Err(Error::Validation("no curves to plot".into()));
    };
    if curves.iter().any(|c| c.metric != first.metric) {
        return Err(Error::Validation("curves mix attenuation and margin values".into()));
    }
    let rows: Vec<(&str, &str, f64, f64)> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |&(p, v)| (c.station.as_str(), c.source.as_str(), p, v)))
        .collect();
    write_csv(&["station", "source", "p_percent", first.metric.column()], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_budget::TransmissionParams;

    fn row(station: &str, a: f64, margin: f64) -> LinkResult {
        LinkResult::new(station, "X", 0.01, a, margin, 0.0)
    }

    fn budget(params: &TransmissionParams) -> Budget<'_> {
        Budget {
            params,
            mode: CnrMode::Calibrated { k_clear_db: 3.0665 },
            polarization: Polarization::Vertical,
            coefficients: RegressionTable::builtin(),
        }
    }

    #[test]
    fn overestimation_examples() {
        let v = overestimation_percentage(31.6560, -13.2802).unwrap();
        assert_eq!(display_percent(v), 142);
        assert_eq!(display_percent(overestimation_percentage(34.1808, 10.3059).unwrap()), 70);
        assert_eq!(overestimation_percentage(5.0, 5.0).unwrap(), 0.0);
        assert!(matches!(
            overestimation_percentage(0.0, 1.0),
            Err(Error::UndefinedComparison(_))
        ));
    }

    #[test]
    fn compare_requires_matching_stations() {
        let base = vec![row("A", 10.0, 0.0), row("B", 20.0, 0.0)];
        let same = compare_sources(&base, &base).unwrap();
        assert!(same.iter().all(|r| r.overestimation_percent == 0.0));
        let err = compare_sources(&base[..1], &base).unwrap_err();
        assert!(err.to_string().contains("only in estimate [B]"), "{err}");
    }

    #[test]
    fn ranking_and_ties() {
        let ranked = rank_stations(&[row("b", 0.0, 1.0), row("a", 0.0, 1.0), row("c", 0.0, 5.0)]);
        let names: Vec<&str> = ranked.iter().map(|r| r.station_ref.as_str()).collect();
        assert_eq!(names, ["c", "a", "b"]);
        assert_eq!(rank_stations(&[row("solo", 0.0, -3.0)]).len(), 1);
    }

    #[test]
    fn sweep_cardinality_and_order() {
        let cat = StationCatalog::candidate_africa();
        let params = TransmissionParams::ka_gateway_uplink();
        let mut itu = SourceSet::new("ITU");
        for name in cat.names() {
            itu = itu.with_r001(name, 30.0);
        }
        let p = [1.0, 0.5, 0.1, 0.01, 0.001];
        let out = availability_sweep(&cat, budget(&params), &[itu.clone()], &p).unwrap();
        assert_eq!(out.table.rows.len(), 30);
        let mut sorted = out.table.clone();
        sorted.sort();
        assert_eq!(sorted, out.table);

        let one = SourceSet::new("ITU").with_r001("Abuja", 30.0);
        let out = availability_sweep(&cat, budget(&params), &[one], &[0.01]).unwrap();
        assert_eq!(out.table.rows.len(), 1);

        let stray = SourceSet::new("ITU").with_r001("Nairobi", 30.0);
        assert!(matches!(
            availability_sweep(&cat, budget(&params), &[stray], &[0.01]),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn anchors_only_at_their_percentage() {
        let cat = StationCatalog::candidate_africa();
        let params = TransmissionParams::ka_gateway_uplink();
        let set = SourceSet::new("T3").with_anchor("Abuja", 34.1808, 0.01);
        let out = availability_sweep(&cat, budget(&params), std::slice::from_ref(&set), &[0.01]).unwrap();
        assert!((out.table.rows[0].cnr_db - (-31.1143)).abs() < 1e-9);
        assert!(availability_sweep(&cat, budget(&params), &[set], &[0.01, 0.1]).is_err());
    }

    #[test]
    fn report_formats() {
        let empty: Vec<LinkResult> = Vec::new();
        let csv = emit_report(&empty, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert_eq!(csv.trim_end(), LinkResult::HEADERS.join(","));

        let one = vec![row("Abuja", 34.1808, -31.1143)];
        let json: serde_json::Value = serde_json::from_str(&emit_report(&one, ReportFormat::Json).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 1);
        assert_eq!(json[0]["station"], "Abuja");

        let table = emit_report(&one, ReportFormat::Table).unwrap();
        assert!(table.contains("-31.1143"));
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn report_round_trips() {
        let rows = vec![
            LinkResult::new("Port Louis", "GPM", 0.001, 0.1 + 0.2, -1.0 / 3.0, 0.36),
            LinkResult::new("Praia, CV", "G\"PM", 1.0, 1e-300, 12345.678901234567, 0.0),
        ];
        for fmt in [ReportFormat::Csv, ReportFormat::Json] {
            let text = emit_report(&rows, fmt).unwrap();
            assert_eq!(parse_report::<LinkResult>(&text, fmt).unwrap(), rows);
        }
        let curves = vec![CurveRow {
            station: "A".into(),
            source: "ITU".into(),
            strategy: String::new(),
            r001_mm_per_hr: None,
            p_percent: 0.01,
            attenuation_db: 3.0,
        }];
        let text = emit_report(&curves, ReportFormat::Csv).unwrap();
        assert_eq!(parse_report::<CurveRow>(&text, ReportFormat::Csv).unwrap(), curves);
    }

    #[test]
    fn plot_data() {
        let cat = StationCatalog::candidate_africa();
        let params = TransmissionParams::ka_gateway_uplink();
        let a = SourceSet::new("ITU").with_r001("Cairo", 20.0);
        let b = SourceSet::new("GPM").with_r001("Cairo", 10.0);
        let p = [1.0, 0.5, 0.1, 0.01, 0.001];
        let out = availability_sweep(&cat, budget(&params), &[a, b], &p).unwrap();
        let curves = PlotCurve::from_sweep(&out.table, PlotMetric::Attenuation);
        assert_eq!(curves.len(), 2);
        let text = emit_plot_data(&curves[..1]).unwrap();
        assert_eq!(text.lines().count(), 1 + 5);
        let text = emit_plot_data(&curves).unwrap();
        let sources: BTreeSet<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(sources.into_iter().collect::<Vec<_>>(), ["GPM", "ITU"]);

        // Values match the report to full precision.
        let report = emit_report(&out.table.rows, ReportFormat::Csv).unwrap();
        let parsed: Vec<LinkResult> = parse_report(&report, ReportFormat::Csv).unwrap();
        let plotted: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        let reported: Vec<f64> = parsed.iter().map(|r| r.attenuation_db).collect();
        assert_eq!(plotted, reported);

        assert!(emit_plot_data(&[]).is_err());
    }
}
