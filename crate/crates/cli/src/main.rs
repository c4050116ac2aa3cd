//! `rainlink` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 parse or validation,
//! 4 I/O, 5 domain or computation. A link that does not close is a result,
//! not a failure, and exits 0.

mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rainlink::analysis::{
    availability_sweep, compare_sources, emit_plot_data, emit_report, station_curve, CurveRow, PlotCurve,
    PlotMetric, ReportFormat, StationRow,
};
use rainlink::rain_data::{parse_rain_series, parse_station_catalog, Cadence, RainSource, RainSeries, StationCatalog, Strategy};
use rainlink::rain_physics::{Polarization, RegressionTable};
use rainlink::scenario::{LoadedScenario, Scenario};
use thiserror::Error;

use manifest::{RunManifest, SourceDescriptor};

const DEFAULT_P_LIST: [f64; 5] = [1.0, 0.5, 0.1, 0.01, 0.001];
const DEFAULT_FREQUENCY_GHZ: f64 = 28.5;
const DEFAULT_ELEVATION_DEG: f64 = 20.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rainlink::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use rainlink::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::Config { .. } | E::UnknownFormat(_) => 2,
                E::Parse { .. } | E::Validation(_) => 3,
                E::Io { .. } => 4,
                E::Domain(_) | E::UnsupportedRegime(_) | E::UndefinedComparison(_) => 5,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rainlink", version, about = "Rain attenuation and link margins for Earth-space links")]
struct Cli {
    /// Output format for the report on stdout.
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,

    /// Print run metadata (version, time, inputs) to stderr.
    #[arg(long, global = true)]
    stamp: bool,

    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: rainlink::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List catalog stations and warn about pairs closer than 2000 km.
    Stations {
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Attenuation curve for one station and one rain source.
    Attenuation(AttenuationArgs),
    /// Link budget for every station and source in a scenario.
    Linkbudget(ScenarioArgs),
    /// Link budget over several exceedance percentages.
    Sweep {
        #[command(flatten)]
        common: ScenarioArgs,
        /// Also write long-format plot data to this file.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::Attenuation)]
        plot_metric: MetricArg,
    },
    /// Overestimation of one source's attenuation by another's.
    Compare {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        baseline: String,
        #[arg(long)]
        estimate: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Attenuation,
    Margin,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Replaces the scenario's catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Exceedance percentages, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    freq_ghz: Option<f64>,
    #[arg(long)]
    elevation_deg: Option<f64>,
}

#[derive(Debug, Args)]
struct AttenuationArgs {
    #[arg(long)]
    station: String,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Read frequency, elevation, polarization and catalog from here.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    freq_ghz: Option<f64>,
    #[arg(long)]
    elevation_deg: Option<f64>,
    #[arg(long)]
    polarization: Option<Polarization>,
    /// R₀.₀₁ in mm/h.
    #[arg(long, conflicts_with = "series", required_unless_present = "series")]
    r001: Option<f64>,
    /// Rain-rate series CSV (timestamp,rate_mm_per_hr).
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, requires = "series")]
    strategy: Option<Strategy>,
    #[arg(long, requires = "series")]
    cadence: Option<Cadence>,
    #[arg(long, default_value = "cli")]
    label: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let format = cli.format;
    let (manifest, output) = match cli.command {
        Command::Stations { catalog } => cmd_stations(catalog, format)?,
        Command::Attenuation(args) => cmd_attenuation(args, format)?,
        Command::Linkbudget(args) => cmd_linkbudget(args, format)?,
        Command::Sweep {
            common,
            plot_data,
            plot_metric,
        } => cmd_sweep(common, plot_data, plot_metric, format)?,
        Command::Compare {
            common,
            baseline,
            estimate,
        } => cmd_compare(common, &baseline, &estimate, format)?,
    };
    if cli.stamp {
        let stamp = serde_json::json!({
            "tool": "rainlink",
            "version": env!("CARGO_PKG_VERSION"),
            "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "manifest": manifest.to_json(),
        });
        eprintln!("{stamp}");
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(output.as_bytes())
        .and_then(|()| stdout.flush())
        .map_err(|source| rainlink::Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    Ok(())
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| {
        rainlink::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn load_catalog(path: Option<&Path>) -> CliResult<StationCatalog> {
    match path {
        Some(p) => Ok(parse_station_catalog(&read(p)?).map_err(|e| e.in_file(p))?),
        None => Ok(StationCatalog::candidate_africa()),
    }
}

fn cmd_stations(catalog: Option<PathBuf>, format: ReportFormat) -> CliResult<(RunManifest, String)> {
    let manifest = RunManifest {
        catalog_path: catalog,
        output_format: format,
        ..Default::default()
    };
    manifest.check_paths()?;
    let catalog = load_catalog(manifest.catalog_path.as_deref())?;
    for sep in catalog.separation_warnings() {
        warn(format_args!(
            "{} and {} are {:.1} km apart, under the 2000 km minimum",
            sep.a, sep.b, sep.distance_km
        ));
    }
    let out = emit_report(&StationRow::from_catalog(&catalog), format)?;
    Ok((manifest, out))
}

fn cmd_attenuation(args: AttenuationArgs, format: ReportFormat) -> CliResult<(RunManifest, String)> {
    let descriptor = match (&args.r001, &args.series) {
        (Some(v), _) => SourceDescriptor {
            label: args.label.clone(),
            kind: "direct_r001",
            target: v.to_string(),
            strategy: None,
        },
        (None, Some(p)) => SourceDescriptor {
            label: args.label.clone(),
            kind: "series",
            target: p.display().to_string(),
            strategy: args.strategy.map(|s| s.to_string()),
        },
        (None, None) => return Err(CliError::Usage("one of --r001 or --series is required".into())),
    };
    let mut manifest = RunManifest {
        scenario_path: args.scenario.clone(),
        catalog_path: args.catalog.clone(),
        source_descriptors: vec![descriptor],
        p_list: if args.p.is_empty() { DEFAULT_P_LIST.to_vec() } else { args.p.clone() },
        output_format: format,
    };
    manifest.check_paths()?;
    for note in manifest.normalize_p()? {
        warn(note);
    }

    let scenario = match &args.scenario {
        Some(p) => Some(Scenario::load(p)?),
        None => None,
    };
    let catalog = match (&args.catalog, &scenario) {
        (Some(p), _) => load_catalog(Some(p))?,
        (None, Some(s)) => s.catalog.clone(),
        (None, None) => StationCatalog::candidate_africa(),
    };
    let station = catalog.get(&args.station).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown station `{}` (known: {})",
            args.station,
            catalog.names().join(", ")
        ))
    })?;
    let freq = args
        .freq_ghz
        .or(scenario.as_ref().map(|s| s.params().frequency_ghz))
        .unwrap_or(DEFAULT_FREQUENCY_GHZ);
    let elevation = args
        .elevation_deg
        .or(scenario.as_ref().map(|s| s.params().elevation_deg))
        .unwrap_or(DEFAULT_ELEVATION_DEG);
    let polarization = args
        .polarization
        .or(scenario.as_ref().map(|s| s.scenario.polarization))
        .unwrap_or_default();
    let coefficients = match &scenario {
        Some(s) => s.coefficients(),
        None => RegressionTable::builtin(),
    };

    let source = match (args.r001, &args.series) {
        (Some(v), _) => RainSource::direct(args.label.clone(), v),
        (None, Some(p)) => {
            let mut series = parse_rain_series(&read(p)?, &station.name).map_err(|e| e.in_file(p))?;
            if let Some(c) = args.cadence {
                series = RainSeries::new(series.station_ref, series.samples, Some(c))?;
            }
            RainSource::series(args.label.clone(), series, args.strategy)
        }
        (None, None) => unreachable!("checked above"),
    };

    let (resolved, curve) =
        station_curve(station, &source, freq, elevation, polarization, coefficients, &manifest.p_list)?;
    for w in &resolved.warnings {
        warn(w);
    }
    for d in &curve.diagnostics {
        warn(format_args!("{}: {d}", station.name));
    }
    let rows = CurveRow::from_curve(&station.name, &args.label, Some(&resolved), &curve);
    Ok((manifest, emit_report(&rows, format)?))
}

/// Load a scenario, apply command-line overrides and fill the manifest.
fn prepare(
    args: &ScenarioArgs,
    format: ReportFormat,
    default_p: impl FnOnce(&Scenario) -> Vec<f64>,
) -> CliResult<(RunManifest, LoadedScenario)> {
    let mut manifest = RunManifest {
        scenario_path: Some(args.scenario.clone()),
        catalog_path: args.catalog.clone(),
        output_format: format,
        ..Default::default()
    };
    manifest.check_paths()?;

    let text = read(&args.scenario)?;
    let mut scenario = Scenario::from_json(&text).map_err(|e| e.in_file(&args.scenario))?;
    if let Some(f) = args.freq_ghz {
        scenario.params.frequency_ghz = f;
    }
    if let Some(e) = args.elevation_deg {
        scenario.params.elevation_deg = e;
    }
    scenario.params.validate()?;
    if let Some(c) = &args.catalog {
        let abs = std::path::absolute(c).map_err(|source| rainlink::Error::Io {
            path: c.clone(),
            source,
        })?;
        scenario.catalog = Some(abs);
    }
    let base = args.scenario.parent().unwrap_or(Path::new(".")).to_path_buf();
    let loaded = scenario.resolve(&base)?;
    manifest.add_scenario_sources(&loaded, &base);
    manifest.check_paths()?;

    manifest.p_list = if args.p.is_empty() {
        default_p(&loaded.scenario)
    } else {
        args.p.clone()
    };
    for note in manifest.normalize_p()? {
        warn(note);
    }
    if loaded.sources.is_empty() {
        return Err(rainlink::Error::Config {
            field: "sources".into(),
            message: "scenario defines no rain sources".into(),
        }
        .into());
    }
    Ok((manifest, loaded))
}

fn run_sweep(manifest: &RunManifest, loaded: &LoadedScenario) -> CliResult<rainlink::analysis::SweepOutput> {
    let out = availability_sweep(&loaded.catalog, loaded.budget(), &loaded.sources, &manifest.p_list)?;
    for note in out.notes() {
        warn(note);
    }
    Ok(out)
}

fn cmd_linkbudget(args: ScenarioArgs, format: ReportFormat) -> CliResult<(RunManifest, String)> {
    let (manifest, loaded) = prepare(&args, format, |s| vec![s.link_p_percent])?;
    let out = run_sweep(&manifest, &loaded)?;
    Ok((manifest, emit_report(&out.table.rows, format)?))
}

fn cmd_sweep(
    args: ScenarioArgs,
    plot_data: Option<PathBuf>,
    metric: MetricArg,
    format: ReportFormat,
) -> CliResult<(RunManifest, String)> {
    let (manifest, loaded) = prepare(&args, format, |s| {
        if s.p_list.is_empty() {
            DEFAULT_P_LIST.to_vec()
        } else {
            s.p_list.clone()
        }
    })?;
    let out = run_sweep(&manifest, &loaded)?;
    if let Some(path) = plot_data {
        let metric = match metric {
            MetricArg::Attenuation => PlotMetric::Attenuation,
            MetricArg::Margin => PlotMetric::AvailableMargin,
        };
        let data = emit_plot_data(&PlotCurve::from_sweep(&out.table, metric))?;
        std::fs::write(&path, data).map_err(|source| rainlink::Error::Io { path, source })?;
    }
    Ok((manifest, emit_report(&out.table.rows, format)?))
}

fn cmd_compare(
    args: ScenarioArgs,
    baseline: &str,
    estimate: &str,
    format: ReportFormat,
) -> CliResult<(RunManifest, String)> {
    let (manifest, mut loaded) = prepare(&args, format, |s| vec![s.link_p_percent])?;
    if manifest.p_list.len() != 1 {
        return Err(CliError::Usage("compare takes a single --p value".into()));
    }
    let known: Vec<String> = loaded.sources.iter().map(|s| s.label.clone()).collect();
    for label in [baseline, estimate] {
        if !known.iter().any(|k| k == label) {
            return Err(CliError::Usage(format!(
                "unknown source label `{label}` (known: {})",
                known.join(", ")
            )));
        }
    }
    loaded.sources.retain(|s| s.label == baseline || s.label == estimate);
    let out = run_sweep(&manifest, &loaded)?;
    let p = manifest.p_list[0];
    let rows = compare_sources(&out.table.select(baseline, p), &out.table.select(estimate, p))?;
    Ok((manifest, emit_report(&rows, format)?))
}
