//! Station and slant-path geometry on a spherical Earth.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Equatorial Earth radius used for slant-range geometry.
pub const EARTH_RADIUS_KM: f64 = 6378.0;

/// Mean Earth radius used for great-circle separations between stations.
pub const MEAN_EARTH_RADIUS_KM: f64 = 6371.0;

/// Lowest elevation the prediction chain accepts.
pub const MIN_ELEVATION_DEG: f64 = 5.0;

/// A candidate gateway site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStation {
    pub name: String,
    /// Signed, north positive.
    pub latitude_deg: f64,
    /// Signed, east positive.
    pub longitude_deg: f64,
    /// Height above mean sea level.
    pub altitude_km: f64,
    /// Rain height supplied from isotherm data; replaces the latitude rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rain_height_override_km: Option<f64>,
}

impl GroundStation {
    pub fn new(
        name: impl Into<String>,
        latitude_deg: f64,
        longitude_deg: f64,
        altitude_km: f64,
    ) -> Result<Self> {
        let station = GroundStation {
            name: name.into(),
            latitude_deg,
            longitude_deg,
            altitude_km,
            rain_height_override_km: None,
        };
        station.validate()?;
        Ok(station)
    }

    pub fn with_rain_height(mut self, rain_height_km: f64) -> Result<Self> {
        if !(rain_height_km.is_finite() && rain_height_km >= 0.0) {
            return Err(Error::domain(format!(
                "rain height override must be a non-negative number, got {rain_height_km}"
            )));
        }
        self.rain_height_override_km = Some(rain_height_km);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("station name is empty".into()));
        }
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::domain(format!(
                "{}: latitude {} outside [-90, 90]",
                self.name, self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::domain(format!(
                "{}: longitude {} outside [-180, 180]",
                self.name, self.longitude_deg
            )));
        }
        if !(self.altitude_km.is_finite() && self.altitude_km >= 0.0) {
            return Err(Error::domain(format!(
                "{}: altitude {} km must be non-negative",
                self.name, self.altitude_km
            )));
        }
        Ok(())
    }

    pub fn abs_latitude_deg(&self) -> f64 {
        self.latitude_deg.abs()
    }
}

/// Slant geometry of the rain portion of an Earth-space path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGeometry {
    pub elevation_deg: f64,
    /// Station to satellite distance, when a satellite altitude is known.
    pub slant_range_km: Option<f64>,
    pub rain_height_km: f64,
    pub station_altitude_km: f64,
    /// `L_s`, length of the slant path below the rain height.
    pub slant_path_km: f64,
    /// `L_G`, horizontal projection of the slant path.
    pub horizontal_projection_km: f64,
}

impl PathGeometry {
    /// True when the station sits at or above the rain height; attenuation
    /// on such a path is identically zero.
    pub fn is_dry(&self) -> bool {
        self.slant_path_km == 0.0
    }

    /// Rain column height above the station, `h_R − h_s`.
    pub fn rain_column_km(&self) -> f64 {
        (self.rain_height_km - self.station_altitude_km).max(0.0)
    }

    pub fn with_slant_range(mut self, slant_range_km: f64) -> Self {
        self.slant_range_km = Some(slant_range_km);
        self
    }
}

/// Distance from a ground station at sea level to a satellite at
/// `satellite_altitude_km`, seen at `elevation_deg` above the horizon.
pub fn slant_range(satellite_altitude_km: f64, elevation_deg: f64, earth_radius_km: f64) -> Result<f64> {
    if !(satellite_altitude_km.is_finite() && satellite_altitude_km > 0.0) {
        return Err(Error::domain(format!(
            "satellite altitude must be positive, got {satellite_altitude_km} km"
        )));
    }
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::domain(format!(
            "elevation {elevation_deg}° outside [0, 90]"
        )));
    }
    if !(earth_radius_km.is_finite() && earth_radius_km > 0.0) {
        return Err(Error::domain(format!(
            "earth radius must be positive, got {earth_radius_km} km"
        )));
    }
    let (sin_e, cos_e) = elevation_deg.to_radians().sin_cos();
    let orbit = earth_radius_km + satellite_altitude_km;
    let horizontal = earth_radius_km * cos_e;
    Ok((orbit * orbit - horizontal * horizontal).sqrt() - earth_radius_km * sin_e)
}

/// Free-space path loss in dB for a frequency in GHz and distance in km.
pub fn free_space_path_loss(frequency_ghz: f64, distance_km: f64) -> Result<f64> {
    if !(frequency_ghz.is_finite() && frequency_ghz > 0.0) {
        return Err(Error::domain(format!(
            "frequency must be positive, got {frequency_ghz} GHz"
        )));
    }
    if !(distance_km.is_finite() && distance_km > 0.0) {
        return Err(Error::domain(format!(
            "distance must be positive, got {distance_km} km"
        )));
    }
    Ok(92.45 + 20.0 * frequency_ghz.log10() + 20.0 * distance_km.log10())
}

/// Rain height `h_R` for a station.
///
/// Uses the station override when present, otherwise the latitude rule:
/// 5 km up to 23° absolute latitude, then falling 0.075 km per degree and
/// floored at zero.
pub fn rain_height(station: &GroundStation) -> f64 {
    if let Some(h) = station.rain_height_override_km {
        return h;
    }
    let lat = station.abs_latitude_deg();
    if lat <= 23.0 {
        5.0
    } else {
        (5.0 - 0.075 * (lat - 23.0)).max(0.0)
    }
}

/// Slant path through the rain layer at a fixed elevation.
///
/// A station at or above the rain height gets a zero-length path rather than
/// an error; see [`PathGeometry::is_dry`].
pub fn rain_slant_path(
    station: &GroundStation,
    elevation_deg: f64,
    rain_height_km: f64,
) -> Result<PathGeometry> {
    if !(elevation_deg.is_finite() && elevation_deg <= 90.0) {
        return Err(Error::domain(format!(
            "elevation {elevation_deg}° outside (0, 90]"
        )));
    }
    if elevation_deg < MIN_ELEVATION_DEG {
        return Err(Error::UnsupportedRegime(format!(
            "elevation {elevation_deg}° is below {MIN_ELEVATION_DEG}°; the low-angle path branch is not implemented"
        )));
    }
    let column = rain_height_km - station.altitude_km;
    let (slant, horizontal) = if column > 0.0 {
        let (sin_e, cos_e) = elevation_deg.to_radians().sin_cos();
        let slant = column / sin_e;
        // cos(90°) is ~6e-17 in f64; a vertical path has no horizontal extent.
        let horizontal = if elevation_deg == 90.0 { 0.0 } else { slant * cos_e };
        (slant, horizontal)
    } else {
        (0.0, 0.0)
    };
    Ok(PathGeometry {
        elevation_deg,
        slant_range_km: None,
        rain_height_km,
        station_altitude_km: station.altitude_km,
        slant_path_km: slant,
        horizontal_projection_km: horizontal,
    })
}

/// Haversine separation between two stations.
pub fn great_circle_km(a: &GroundStation, b: &GroundStation) -> f64 {
    let (lat1, lat2) = (a.latitude_deg.to_radians(), b.latitude_deg.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.longitude_deg - a.longitude_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * MEAN_EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}
