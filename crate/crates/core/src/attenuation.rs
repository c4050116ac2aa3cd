//! Rain attenuation prediction along an Earth-space path (ITU-R P.618-8).
//!
//! The chain runs once per station to obtain the attenuation exceeded for
//! 0.01% of an average year, `A₀.₀₁ = γ·L_E`, and then scales it to any
//! other percentage in `[0.001, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{GroundStation, PathGeometry};
use crate::rain_physics::{specific_attenuation, RainCoefficients, SpecificAttenuation};
use crate::{Error, Result};

/// Percentage range covered by the exceedance scaling.
pub const P_RANGE_PERCENT: (f64, f64) = (0.001, 1.0);

/// Reference exceedance percentage.
pub const REFERENCE_P_PERCENT: f64 = 0.01;

/// Something the chain noticed but did not treat as fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// The horizontal reduction factor exceeded 1 and was clamped.
    ReductionFactorClamped { raw: f64 },
    /// The station is at or above the rain height.
    DryPath { station: String },
    /// A percentage appeared more than once in the request.
    DuplicatePercent { p_percent: f64 },
    /// `A_p` rose between two ascending percentages.
    NonMonotone {
        p_low: f64,
        p_high: f64,
        attenuation_low_db: f64,
        attenuation_high_db: f64,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::ReductionFactorClamped { raw } => {
                write!(f, "horizontal reduction factor {raw:.6} clamped to 1")
            }
            Diagnostic::DryPath { station } => {
                write!(f, "{station}: station at or above rain height, no rain path")
            }
            Diagnostic::DuplicatePercent { p_percent } => {
                write!(f, "duplicate percentage {p_percent}% ignored")
            }
            Diagnostic::NonMonotone {
                p_low,
                p_high,
                attenuation_low_db,
                attenuation_high_db,
            } => write!(
                f,
                "attenuation rises from {attenuation_low_db:.4} dB at {p_low}% to {attenuation_high_db:.4} dB at {p_high}%"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionFactors {
    /// `r₀.₀₁`, in (0, 1].
    pub horizontal_r001: f64,
    /// `ν₀.₀₁`.
    pub vertical_v001: f64,
    /// `L_R`.
    pub adjusted_path_km: f64,
    /// `L_E = L_R·ν₀.₀₁`.
    pub effective_path_km: f64,
}

fn horizontal_reduction_unclamped(horizontal_km: f64, gamma: f64, frequency_ghz: f64) -> f64 {
    let rooted = 0.78 * (horizontal_km * gamma / frequency_ghz).sqrt();
    1.0 / (1.0 + rooted - 0.38 * (1.0 - (-2.0 * horizontal_km).exp()))
}

fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be non-negative, got {value}")))
    }
}

/// Horizontal reduction factor `r₀.₀₁`, clamped to at most 1.
pub fn horizontal_reduction_factor(horizontal_km: f64, gamma_db_per_km: f64, frequency_ghz: f64) -> Result<f64> {
    check_non_negative("horizontal projection", horizontal_km)?;
    check_non_negative("specific attenuation", gamma_db_per_km)?;
    if !(frequency_ghz >= 1.0) {
        return Err(Error::domain(format!("frequency must be at least 1 GHz, got {frequency_ghz}")));
    }
    Ok(horizontal_reduction_unclamped(horizontal_km, gamma_db_per_km, frequency_ghz).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalAdjustment {
    /// `L_R`.
    pub adjusted_path_km: f64,
    /// `ν₀.₀₁`.
    pub v001: f64,
}

/// Adjusted path length `L_R` and vertical adjustment factor `ν₀.₀₁`.
///
/// Elevation enters the exponential in degrees and the trigonometric terms
/// in radians.
pub fn vertical_adjustment(
    path: &PathGeometry,
    r001: f64,
    gamma_db_per_km: f64,
    frequency_ghz: f64,
    abs_latitude_deg: f64,
) -> Result<VerticalAdjustment> {
    check_non_negative("specific attenuation", gamma_db_per_km)?;
    if !(r001 > 0.0 && r001 <= 1.0) {
        return Err(Error::domain(format!("reduction factor {r001} outside (0, 1]")));
    }
    let theta_deg = path.elevation_deg;
    let (sin_t, cos_t) = theta_deg.to_radians().sin_cos();
    let column = path.rain_column_km();
    let reduced = path.horizontal_projection_km * r001;

    let adjusted = if reduced > 0.0 && (column / reduced).atan() > theta_deg.to_radians() {
        reduced / cos_t
    } else {
        column / sin_t
    };

    let chi = if abs_latitude_deg < 36.0 { 36.0 - abs_latitude_deg } else { 0.0 };
    let shaped = 31.0 * (1.0 - (-theta_deg / (1.0 + chi)).exp()) * (adjusted * gamma_db_per_km).sqrt()
        / (frequency_ghz * frequency_ghz);
    let v001 = 1.0 / (1.0 + sin_t.sqrt() * (shaped - 0.45));
    Ok(VerticalAdjustment {
        adjusted_path_km: adjusted,
        v001,
    })
}

/// `A₀.₀₁ = γ·L_E`.
pub fn reference_attenuation(gamma_db_per_km: f64, effective_path_km: f64) -> Result<f64> {
    check_non_negative("specific attenuation", gamma_db_per_km)?;
    check_non_negative("effective path length", effective_path_km)?;
    Ok(gamma_db_per_km * effective_path_km)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatitudeTerm {
    pub z: f64,
    pub absolute_latitude_deg: f64,
    pub elevation_deg: f64,
}

/// The latitude-dependent term of the exceedance scaling exponent.
pub fn latitude_term(absolute_latitude_deg: f64, elevation_deg: f64, p_percent: f64) -> LatitudeTerm {
    let lat = absolute_latitude_deg.abs();
    let z = if p_percent >= 1.0 || lat >= 36.0 {
        0.0
    } else if elevation_deg >= 25.0 {
        -0.005 * (lat - 36.0)
    } else {
        -0.005 * (lat - 36.0) + 1.8 - 4.25 * elevation_deg.to_radians().sin()
    };
    LatitudeTerm {
        z,
        absolute_latitude_deg: lat,
        elevation_deg,
    }
}

fn check_p(p_percent: f64) -> Result<()> {
    let (lo, hi) = P_RANGE_PERCENT;
    if (lo..=hi).contains(&p_percent) {
        Ok(())
    } else {
        Err(Error::domain(format!("percentage {p_percent} outside [{lo}, {hi}]")))
    }
}

/// Scale `A₀.₀₁` to the attenuation exceeded for `p_percent` of the year.
///
/// `p` is in percent units and the logarithms are natural.
pub fn scale_attenuation(a001_db: f64, p_percent: f64, z: f64, elevation_deg: f64) -> Result<f64> {
    check_non_negative("reference attenuation", a001_db)?;
    check_p(p_percent)?;
    if a001_db == 0.0 {
        return Ok(0.0);
    }
    if p_percent == REFERENCE_P_PERCENT {
        return Ok(a001_db);
    }
    let sin_e = elevation_deg.to_radians().sin();
    let exponent = 0.655 + 0.033 * p_percent.ln() - 0.045 * a001_db.ln() - z * sin_e * (1.0 - p_percent);
    Ok(a001_db * (p_percent / REFERENCE_P_PERCENT).powf(-exponent))
}

/// Everything the chain computes on the way to `A₀.₀₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePrediction {
    pub specific: SpecificAttenuation,
    pub factors: ReductionFactors,
    pub reference_a001_db: f64,
    pub diagnostics: Vec<Diagnostic>,
}

/// Run the chain up to `A₀.₀₁` for one station.
pub fn predict_reference(
    station: &GroundStation,
    path: &PathGeometry,
    coefficients: &RainCoefficients,
    r001_mm_per_hr: f64,
) -> Result<ReferencePrediction> {
    let specific = specific_attenuation(r001_mm_per_hr, coefficients)?;
    let gamma = specific.gamma_db_per_km;
    let f = coefficients.frequency_ghz;
    let mut diagnostics = Vec::new();

    if path.is_dry() {
        diagnostics.push(Diagnostic::DryPath {
            station: station.name.clone(),
        });
    }

    check_non_negative("horizontal projection", path.horizontal_projection_km)?;
    let raw = horizontal_reduction_unclamped(path.horizontal_projection_km, gamma, f);
    if raw > 1.0 {
        diagnostics.push(Diagnostic::ReductionFactorClamped { raw });
    }
    let r001 = horizontal_reduction_factor(path.horizontal_projection_km, gamma, f)?;
    let vertical = vertical_adjustment(path, r001, gamma, f, station.abs_latitude_deg())?;
    let effective = vertical.adjusted_path_km * vertical.v001;
    let reference = reference_attenuation(gamma, effective)?;

    Ok(ReferencePrediction {
        specific,
        factors: ReductionFactors {
            horizontal_r001: r001,
            vertical_v001: vertical.v001,
            adjusted_path_km: vertical.adjusted_path_km,
            effective_path_km: effective,
        },
        reference_a001_db: reference,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p_percent: f64,
    pub attenuation_db: f64,
}

/// Predicted attenuation against exceedance percentage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationCurve {
    pub reference_a001_db: f64,
    /// Sorted ascending in `p_percent`.
    pub points: Vec<CurvePoint>,
    pub diagnostics: Vec<Diagnostic>,
}

impl AttenuationCurve {
    pub fn at(&self, p_percent: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|pt| pt.p_percent == p_percent)
            .map(|pt| pt.attenuation_db)
    }

    /// True when no point rises above its lower-percentage neighbour.
    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].attenuation_db <= w[0].attenuation_db)
    }
}

/// Sort and de-duplicate a percentage list, validating each entry.
pub fn normalize_percentages(p_list: &[f64]) -> Result<(Vec<f64>, Vec<Diagnostic>)> {
    if p_list.is_empty() {
        return Err(Error::Validation("percentage list is empty".into()));
    }
    for &p in p_list {
        check_p(p)?;
    }
    let mut sorted = p_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut diagnostics = Vec::new();
    sorted.dedup_by(|a, b| {
        let dup = a == b;
        if dup {
            diagnostics.push(Diagnostic::DuplicatePercent { p_percent: *a });
        }
        dup
    });
    Ok((sorted, diagnostics))
}

/// Attenuation curve for one station over the requested percentages.
pub fn attenuation_curve(
    station: &GroundStation,
    path: &PathGeometry,
    coefficients: &RainCoefficients,
    r001_mm_per_hr: f64,
    p_list: &[f64],
) -> Result<AttenuationCurve> {
    let (percentages, mut diagnostics) = normalize_percentages(p_list)?;
    let reference = predict_reference(station, path, coefficients, r001_mm_per_hr)?;
    diagnostics.extend(reference.diagnostics);
    let a001 = reference.reference_a001_db;

    let points = percentages
        .iter()
        .map(|&p| {
            let z = latitude_term(station.abs_latitude_deg(), path.elevation_deg, p).z;
            scale_attenuation(a001, p, z, path.elevation_deg).map(|a| CurvePoint {
                p_percent: p,
                attenuation_db: a,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    diagnostics.extend(points.windows(2).filter(|w| w[1].attenuation_db > w[0].attenuation_db).map(|w| {
        Diagnostic::NonMonotone {
            p_low: w[0].p_percent,
            p_high: w[1].p_percent,
            attenuation_low_db: w[0].attenuation_db,
            attenuation_high_db: w[1].attenuation_db,
        }
    }));

    Ok(AttenuationCurve {
        reference_a001_db: a001,
        points,
        diagnostics,
    })
}
