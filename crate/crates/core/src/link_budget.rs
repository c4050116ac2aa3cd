//! Carrier-to-noise, link margin and unavailability time for an uplink.

use serde::{Deserialize, Serialize};

use crate::geometry::{free_space_path_loss, slant_range, EARTH_RADIUS_KM};
use crate::rain_physics::FREQUENCY_RANGE_GHZ;
use crate::{Error, Result, HOURS_PER_AVERAGE_YEAR};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Uplink transmission parameters.
///
/// Field names on the wire follow the unit-suffixed scenario schema
/// (`frequency_GHz`, `eirp_dBW`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionParams {
    #[serde(rename = "frequency_GHz")]
    pub frequency_ghz: f64,
    #[serde(rename = "bandwidth_Hz")]
    pub bandwidth_hz: f64,
    #[serde(rename = "eirp_dBW")]
    pub eirp_dbw: f64,
    pub elevation_deg: f64,
    #[serde(rename = "receiver_gain_dBi")]
    pub receiver_gain_dbi: f64,
    #[serde(rename = "system_temperature_K")]
    pub system_temperature_k: f64,
    #[serde(rename = "required_margin_dB")]
    pub required_margin_db: f64,
    pub satellite_altitude_km: f64,
    #[serde(rename = "other_losses_dB", default)]
    pub other_losses_db: f64,
    /// Transmit dish diameter; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antenna_diameter_m: Option<f64>,
}

impl TransmissionParams {
    /// Ka-band gateway uplink of a 1200 km LEO constellation.
    pub fn ka_gateway_uplink() -> Self {
        TransmissionParams {
            frequency_ghz: 28.5,
            bandwidth_hz: 2.1e9,
            eirp_dbw: 75.9,
            elevation_deg: 20.0,
            receiver_gain_dbi: 31.8,
            system_temperature_k: 868.4,
            required_margin_db: 0.36,
            satellite_altitude_km: 1200.0,
            other_losses_db: 0.0,
            antenna_diameter_m: Some(3.5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("frequency_GHz", self.frequency_ghz),
            ("bandwidth_Hz", self.bandwidth_hz),
            ("system_temperature_K", self.system_temperature_k),
            ("satellite_altitude_km", self.satellite_altitude_km),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("required_margin_dB", self.required_margin_db),
            ("other_losses_dB", self.other_losses_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(name, format!("must be non-negative, got {v}")));
            }
        }
        if !(self.elevation_deg > 0.0 && self.elevation_deg <= 90.0) {
            return Err(Error::config(
                "elevation_deg",
                format!("must lie in (0, 90], got {}", self.elevation_deg),
            ));
        }
        for (name, v) in [("eirp_dBW", self.eirp_dbw), ("receiver_gain_dBi", self.receiver_gain_dbi)] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be a finite number"));
            }
        }
        Ok(())
    }

    pub fn slant_range_km(&self) -> Result<f64> {
        slant_range(self.satellite_altitude_km, self.elevation_deg, EARTH_RADIUS_KM)
    }

    pub fn free_space_path_loss_db(&self) -> Result<f64> {
        free_space_path_loss(self.frequency_ghz, self.slant_range_km()?)
    }
}

/// How clear-sky carrier-to-noise is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CnrMode {
    /// `EIRP − FSPL − OT_Loss + G_r − 10·log10(kTB)`.
    Physics,
    /// A supplied clear-sky constant, for reproducing tabulated budgets
    /// whose loss breakdown is not published.
    Calibrated { k_clear_db: f64 },
}

/// Thermal noise power `10·log10(k·T·B)` in dBW.
pub fn noise_power(system_temperature_k: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(system_temperature_k.is_finite() && system_temperature_k > 0.0) {
        return Err(Error::domain(format!(
            "system temperature must be positive, got {system_temperature_k} K"
        )));
    }
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth_hz} Hz")));
    }
    Ok(10.0 * (BOLTZMANN * system_temperature_k * bandwidth_hz).log10())
}

/// Carrier-to-noise with no rain on the path.
pub fn clear_sky_cnr(params: &TransmissionParams, mode: CnrMode) -> Result<f64> {
    match mode {
        CnrMode::Calibrated { k_clear_db } => {
            if !k_clear_db.is_finite() {
                return Err(Error::config("k_clear_dB", "must be a finite number"));
            }
            Ok(k_clear_db)
        }
        CnrMode::Physics => {
            let fspl = params.free_space_path_loss_db()?;
            let noise = noise_power(params.system_temperature_k, params.bandwidth_hz)?;
            Ok(params.eirp_dbw - fspl - params.other_losses_db + params.receiver_gain_dbi - noise)
        }
    }
}

/// Carrier-to-noise in dB under `attenuation_db` of rain fade.
pub fn carrier_to_noise(params: &TransmissionParams, mode: CnrMode, attenuation_db: f64) -> Result<f64> {
    if !(attenuation_db.is_finite() && attenuation_db >= 0.0) {
        return Err(Error::domain(format!(
            "rain attenuation must be non-negative, got {attenuation_db} dB"
        )));
    }
    Ok(clear_sky_cnr(params, mode)? - attenuation_db)
}

/// Like [`carrier_to_noise`] but accepts any finite attenuation, including
/// negative values copied from published tables. Used only to replay such
/// tables; the prediction chain never produces negative attenuation.
pub fn carrier_to_noise_anchor(params: &TransmissionParams, mode: CnrMode, attenuation_db: f64) -> Result<f64> {
    if !attenuation_db.is_finite() {
        return Err(Error::domain("anchored attenuation must be finite"));
    }
    Ok(clear_sky_cnr(params, mode)? - attenuation_db)
}

pub fn available_margin(cnr_db: f64, required_margin_db: f64) -> f64 {
    cnr_db - required_margin_db
}

/// A link closes when its available margin is non-negative.
pub fn link_closes(available_margin_db: f64) -> bool {
    available_margin_db >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnavailabilityDuration {
    pub p_percent: f64,
    pub hours: f64,
}

impl UnavailabilityDuration {
    pub fn minutes(&self) -> f64 {
        self.hours * 60.0
    }

    pub fn days(&self) -> f64 {
        self.hours / 24.0
    }
}

/// Time per average year during which `p_percent` is exceeded.
pub fn unavailability_duration(p_percent: f64) -> Result<UnavailabilityDuration> {
    if !(p_percent > 0.0 && p_percent < 100.0) {
        return Err(Error::domain(format!("percentage {p_percent} outside (0, 100)")));
    }
    Ok(UnavailabilityDuration {
        p_percent,
        hours: p_percent / 100.0 * HOURS_PER_AVERAGE_YEAR,
    })
}

/// The same budget retuned to another carrier frequency.
pub fn band_scenario(params: &TransmissionParams, new_frequency_ghz: f64) -> Result<TransmissionParams> {
    let (lo, hi) = FREQUENCY_RANGE_GHZ;
    if !(lo..=hi).contains(&new_frequency_ghz) {
        return Err(Error::domain(format!(
            "frequency {new_frequency_ghz} GHz outside [{lo}, {hi}]"
        )));
    }
    Ok(TransmissionParams {
        frequency_ghz: new_frequency_ghz,
        ..params.clone()
    })
}

/// Budget outcome for one station, rain source and percentage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    #[serde(rename = "station")]
    pub station_ref: String,
    #[serde(rename = "source")]
    pub source_label: String,
    pub p_percent: f64,
    #[serde(rename = "attenuation_dB")]
    pub attenuation_db: f64,
    #[serde(rename = "cnr_dB")]
    pub cnr_db: f64,
    #[serde(rename = "required_margin_dB")]
    pub required_margin_db: f64,
    #[serde(rename = "available_margin_dB")]
    pub available_margin_db: f64,
    pub closes: bool,
}

impl LinkResult {
    pub fn new(
        station_ref: impl Into<String>,
        source_label: impl Into<String>,
        p_percent: f64,
        attenuation_db: f64,
        cnr_db: f64,
        required_margin_db: f64,
    ) -> Self {
        let margin = available_margin(cnr_db, required_margin_db);
        LinkResult {
            station_ref: station_ref.into(),
            source_label: source_label.into(),
            p_percent,
            attenuation_db,
            cnr_db,
            required_margin_db,
            available_margin_db: margin,
            closes: link_closes(margin),
        }
    }

    /// Evaluate a predicted attenuation through the budget.
    pub fn evaluate(
        station_ref: &str,
        source_label: &str,
        p_percent: f64,
        params: &TransmissionParams,
        mode: CnrMode,
        attenuation_db: f64,
    ) -> Result<Self> {
        let cnr = carrier_to_noise(params, mode, attenuation_db)?;
        Ok(LinkResult::new(
            station_ref,
            source_label,
            p_percent,
            attenuation_db,
            cnr,
            params.required_margin_db,
        ))
    }
}
