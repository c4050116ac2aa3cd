//! JSON run configuration.
//!
//! ```json
//! {
//!   "frequency_GHz": 28.5, "bandwidth_Hz": 2.1e9, "eirp_dBW": 75.9,
//!   "elevation_deg": 20, "receiver_gain_dBi": 31.8,
//!   "system_temperature_K": 868.4, "required_margin_dB": 0.36,
//!   "satellite_altitude_km": 1200,
//!   "mode": "calibrated", "k_clear_dB": 3.0665,
//!   "catalog": "stations.csv",
//!   "p_list": [1, 0.5, 0.1, 0.01, 0.001],
//!   "sources": [
//!     { "label": "ITU", "stations": { "Cairo": { "kind": "direct_r001", "value": 22.0 } } },
//!     { "label": "GPM", "stations": { "Cairo": { "kind": "series", "path": "gpm/cairo.csv" } } }
//!   ]
//! }
//! ```
//!
//! Relative paths resolve against the scenario file's directory. Without
//! `catalog` the built-in six-station catalog is used.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{Budget, SourceSet, StationInput};
use crate::attenuation::REFERENCE_P_PERCENT;
use crate::link_budget::{CnrMode, TransmissionParams};
use crate::rain_data::{parse_rain_series, parse_station_catalog, Cadence, RainSeries, RainSource, StationCatalog, Strategy};
use crate::rain_physics::{Polarization, RegressionTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Physics,
    Calibrated,
}

fn default_link_p() -> f64 {
    REFERENCE_P_PERCENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub params: TransmissionParams,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(rename = "k_clear_dB", default)]
    pub k_clear_db: Option<f64>,
    #[serde(default)]
    pub polarization: Polarization,
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    /// Replacement regression table in the built-in text format.
    #[serde(default)]
    pub coefficients: Option<PathBuf>,
    #[serde(default)]
    pub p_list: Vec<f64>,
    #[serde(default = "default_link_p")]
    pub link_p_percent: f64,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub label: String,
    pub stations: BTreeMap<String, StationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StationSpec {
    DirectR001 {
        value: f64,
    },
    Series {
        path: PathBuf,
        #[serde(default)]
        strategy: Option<Strategy>,
        #[serde(default)]
        cadence: Option<Cadence>,
    },
    /// A tabulated attenuation replayed without running the chain.
    Attenuation {
        value: f64,
        #[serde(default = "default_link_p")]
        p_percent: f64,
    },
}

/// Pull the key name out of a serde message such as "missing field `x`".
fn field_from_message(msg: &str) -> String {
    msg.split('`').nth(1).unwrap_or("scenario").to_string()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        // `flatten` and `deny_unknown_fields` do not combine in serde, so
        // unknown top-level keys are caught by hand.
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line() as u64, e.to_string()))?;
        if let Some(obj) = value.as_object() {
            const KNOWN: &[&str] = &[
                "frequency_GHz",
                "bandwidth_Hz",
                "eirp_dBW",
                "elevation_deg",
                "receiver_gain_dBi",
                "system_temperature_K",
                "required_margin_dB",
                "satellite_altitude_km",
                "other_losses_dB",
                "antenna_diameter_m",
                "mode",
                "k_clear_dB",
                "polarization",
                "catalog",
                "coefficients",
                "p_list",
                "link_p_percent",
                "sources",
            ];
            if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
                return Err(Error::config(k.clone(), "unknown key"));
            }
        }
        let scenario: Scenario = serde_json::from_value(value).map_err(|e| {
            let msg = e.to_string();
            Error::config(field_from_message(&msg), msg)
        })?;
        scenario.check()?;
        Ok(scenario)
    }

    fn check(&self) -> Result<()> {
        self.params.validate()?;
        self.cnr_mode()?;
        let mut labels = std::collections::BTreeSet::new();
        for s in &self.sources {
            if s.label.trim().is_empty() {
                return Err(Error::config("sources.label", "empty source label"));
            }
            if !labels.insert(s.label.as_str()) {
                return Err(Error::config("sources.label", format!("duplicate label `{}`", s.label)));
            }
        }
        Ok(())
    }

    pub fn cnr_mode(&self) -> Result<CnrMode> {
        match (self.mode, self.k_clear_db) {
            (ModeName::Physics, None) => Ok(CnrMode::Physics),
            (ModeName::Physics, Some(_)) => Err(Error::config("k_clear_dB", "only used in calibrated mode")),
            (ModeName::Calibrated, Some(k)) if k.is_finite() => Ok(CnrMode::Calibrated { k_clear_db: k }),
            (ModeName::Calibrated, _) => Err(Error::config("k_clear_dB", "calibrated mode needs a finite value")),
        }
    }

    /// Read a scenario file and everything it points at.
    pub fn load(path: &Path) -> Result<LoadedScenario> {
        let text = read(path)?;
        let scenario = Scenario::from_json(&text).map_err(|e| e.in_file(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        scenario.resolve(base)
    }

    /// Load referenced files relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<LoadedScenario> {
        let catalog = match &self.catalog {
            Some(p) => {
                let p = base.join(p);
                parse_station_catalog(&read(&p)?).map_err(|e| e.in_file(&p))?
            }
            None => StationCatalog::candidate_africa(),
        };
        let coefficients = match &self.coefficients {
            Some(p) => Some(RegressionTable::from_path(&base.join(p))?),
            None => None,
        };
        let mut sources = Vec::with_capacity(self.sources.len());
        for spec in &self.sources {
            let mut set = SourceSet::new(spec.label.clone());
            for (station, st) in &spec.stations {
                if catalog.get(station).is_none() {
                    return Err(Error::config(
                        format!("sources.{}.{station}", spec.label),
                        "station not in catalog",
                    ));
                }
                let input = match st {
                    StationSpec::DirectR001 { value } => {
                        StationInput::Rain(RainSource::direct(spec.label.clone(), *value))
                    }
                    StationSpec::Series {
                        path,
                        strategy,
                        cadence,
                    } => {
                        let p = base.join(path);
                        let mut series = parse_rain_series(&read(&p)?, station).map_err(|e| e.in_file(&p))?;
                        if let Some(c) = cadence {
                            series = RainSeries::new(series.station_ref, series.samples, Some(*c))?;
                        }
                        StationInput::Rain(RainSource::series(spec.label.clone(), series, *strategy))
                    }
                    StationSpec::Attenuation { value, p_percent } => StationInput::Anchor {
                        attenuation_db: *value,
                        p_percent: *p_percent,
                    },
                };
                set.inputs.insert(station.clone(), input);
            }
            sources.push(set);
        }
        Ok(LoadedScenario {
            mode: self.cnr_mode()?,
            scenario: self.clone(),
            catalog,
            coefficients,
            sources,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A scenario with its catalog, series and coefficient files loaded.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub mode: CnrMode,
    pub catalog: StationCatalog,
    coefficients: Option<RegressionTable>,
    pub sources: Vec<SourceSet>,
}

impl LoadedScenario {
    pub fn params(&self) -> &TransmissionParams {
        &self.scenario.params
    }

    pub fn coefficients(&self) -> &RegressionTable {
        self.coefficients.as_ref().unwrap_or_else(|| RegressionTable::builtin())
    }

    pub fn budget(&self) -> Budget<'_> {
        Budget {
            params: &self.scenario.params,
            mode: self.mode,
            polarization: self.scenario.polarization,
            coefficients: self.coefficients(),
        }
    }

    pub fn source(&self, label: &str) -> Option<&SourceSet> {
        self.sources.iter().find(|s| s.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        "frequency_GHz": 28.5, "bandwidth_Hz": 2.1e9, "eirp_dBW": 75.9,
        "elevation_deg": 20, "receiver_gain_dBi": 31.8,
        "system_temperature_K": 868.4, "required_margin_dB": 0.36,
        "satellite_altitude_km": 1200, "antenna_diameter_m": 3.5"#;

    fn json(extra: &str) -> String {
        format!("{{{BASE}{extra}}}")
    }

    #[test]
    fn minimal_scenario() {
        let s = Scenario::from_json(&json("")).unwrap();
        assert_eq!(s.params, TransmissionParams::ka_gateway_uplink());
        assert_eq!(s.cnr_mode().unwrap(), CnrMode::Physics);
        assert_eq!(s.link_p_percent, 0.01);
        assert_eq!(s.polarization, Polarization::Vertical);
    }

    #[test]
    fn missing_and_unknown_fields_are_named() {
        let text = r#"{"frequency_GHz": 28.5}"#;
        match Scenario::from_json(text).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "bandwidth_Hz"),
            e => panic!("{e}"),
        }
        match Scenario::from_json(&json(r#", "frequency_Ghz": 1"#)).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "frequency_Ghz"),
            e => panic!("{e}"),
        }
        match Scenario::from_json(&json(r#", "mode": "calibrated""#)).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "k_clear_dB"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn resolves_sources_against_base_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("cairo.csv"),
            "timestamp,rate_mm_per_hr\n2001-01-01,0.1\n2001-02-01,0.2\n2001-03-01,0.3\n",
        )
        .unwrap();
        let text = json(
            r#", "mode": "calibrated", "k_clear_dB": 3.0665,
            "sources": [
              {"label": "GPM", "stations": {"Cairo": {"kind": "series", "path": "cairo.csv"}}},
              {"label": "T3", "stations": {"Cairo": {"kind": "attenuation", "value": 31.656}}}
            ]"#,
        );
        let path = dir.path().join("run.json");
        std::fs::write(&path, text).unwrap();
        let loaded = Scenario::load(&path).unwrap();
        assert_eq!(loaded.sources.len(), 2);
        match &loaded.source("GPM").unwrap().inputs["Cairo"] {
            StationInput::Rain(src) => assert_eq!(src.strategy, Strategy::ChebilAnnual),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            loaded.source("T3").unwrap().inputs["Cairo"],
            StationInput::Anchor { p_percent, .. } if p_percent == 0.01
        ));
    }

    #[test]
    fn unknown_station_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::from_json(&json(
            r#", "sources": [{"label": "X", "stations": {"Lagos": {"kind": "direct_r001", "value": 1}}}]"#,
        ))
        .unwrap();
        assert!(matches!(s.resolve(dir.path()), Err(Error::Config { .. })));

        let s = Scenario::from_json(&json(r#", "catalog": "nope.csv""#)).unwrap();
        assert!(matches!(s.resolve(dir.path()), Err(Error::Io { .. })));
    }
}
