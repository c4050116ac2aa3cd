use std::path::{Path, PathBuf};

use rainlink::analysis::ReportFormat;
use rainlink::attenuation::{normalize_percentages, Diagnostic, P_RANGE_PERCENT};
use rainlink::scenario::{LoadedScenario, StationSpec};

use crate::CliError;

/// One rain source as given on the command line or in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDescriptor {
    pub label: String,
    pub kind: &'static str,
    /// File path or literal value.
    pub target: String,
    pub strategy: Option<String>,
}

/// Everything a run reads, checked before any computation starts.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub scenario_path: Option<PathBuf>,
    pub catalog_path: Option<PathBuf>,
    pub source_descriptors: Vec<SourceDescriptor>,
    pub p_list: Vec<f64>,
    pub output_format: ReportFormat,
}

impl RunManifest {
    /// Outputs never depend on clocks or RNG state; only `--stamp` adds time.
    pub const SEEDLESS: bool = true;

    pub fn check_paths(&self) -> Result<(), CliError> {
        let series = self
            .source_descriptors
            .iter()
            .filter(|d| d.kind == "series")
            .map(|d| Path::new(&d.target));
        for path in self.scenario_path.iter().chain(&self.catalog_path).map(PathBuf::as_path).chain(series) {
            if !path.exists() {
                return Err(rainlink::Error::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
                }
                .into());
            }
        }
        Ok(())
    }

    /// Validate and de-duplicate the percentage list, returning the
    /// duplicate notices.
    pub fn normalize_p(&mut self) -> Result<Vec<Diagnostic>, CliError> {
        let (lo, hi) = P_RANGE_PERCENT;
        if let Some(p) = self.p_list.iter().find(|p| !(lo..=hi).contains(*p)) {
            return Err(CliError::Usage(format!("--p value {p} outside [{lo}, {hi}] percent")));
        }
        let (sorted, notes) = normalize_percentages(&self.p_list)?;
        self.p_list = sorted;
        Ok(notes)
    }

    pub fn add_scenario_sources(&mut self, loaded: &LoadedScenario, base: &Path) {
        for spec in &loaded.scenario.sources {
            for st in spec.stations.values() {
                let (kind, target, strategy) = match st {
                    StationSpec::DirectR001 { value } => ("direct_r001", value.to_string(), None),
                    StationSpec::Series { path, strategy, .. } => (
                        "series",
                        base.join(path).display().to_string(),
                        strategy.map(|s| s.to_string()),
                    ),
                    StationSpec::Attenuation { value, .. } => ("attenuation", value.to_string(), None),
                };
                self.source_descriptors.push(SourceDescriptor {
                    label: spec.label.clone(),
                    kind,
                    target,
                    strategy,
                });
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        serde_json::json!({
            "scenario_path": path(&self.scenario_path),
            "catalog_path": path(&self.catalog_path),
            "sources": self.source_descriptors.iter().map(|d| serde_json::json!({
                "label": d.label,
                "kind": d.kind,
                "target": d.target,
                "strategy": d.strategy,
            })).collect::<Vec<_>>(),
            "p_list": self.p_list,
            "format": self.output_format.to_string(),
            "seedless": Self::SEEDLESS,
        })
    }
}
