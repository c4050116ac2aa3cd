//! Power-law coefficients for rain specific attenuation and the law itself.
//!
//! The regression constants live in `data/p838_regression.txt`, are embedded at
//! build time and can be replaced at run time with [`RegressionTable::from_path`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Valid frequency span of the regression, GHz.
pub const FREQUENCY_RANGE_GHZ: (f64, f64) = (1.0, 1000.0);

const BUILTIN_TABLE: &str = include_str!("../data/p838_regression.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Horizontal,
    #[default]
    Vertical,
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h" | "horizontal" => Ok(Polarization::Horizontal),
            "v" | "vertical" => Ok(Polarization::Vertical),
            other => Err(Error::config(
                "polarization",
                format!("expected horizontal or vertical, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::Horizontal => "horizontal",
            Polarization::Vertical => "vertical",
        })
    }
}

/// One log-Gaussian regression: `Σ a_j·exp(−((x − b_j)/c_j)²) + m·x + c0`
/// with `x = log10(f_GHz)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Regression {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub m: f64,
    pub c0: f64,
}

impl Regression {
    pub fn eval(&self, log10_f: f64) -> f64 {
        let gaussians: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .zip(&self.c)
            .map(|((a, b), c)| a * (-((log10_f - b) / c).powi(2)).exp())
            .sum();
        gaussians + self.m * log10_f + self.c0
    }
}

/// The four regressions for κ and α in both polarizations.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTable {
    pub kappa_h: Regression,
    pub kappa_v: Regression,
    pub alpha_h: Regression,
    pub alpha_v: Regression,
}

impl RegressionTable {
    /// The embedded P.838-3 constants.
    pub fn builtin() -> &'static RegressionTable {
        static TABLE: OnceLock<RegressionTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            RegressionTable::parse(BUILTIN_TABLE).expect("embedded regression table is well formed")
        })
    }

    pub fn from_path(path: &Path) -> Result<RegressionTable> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RegressionTable::parse(&text).map_err(|e| e.in_file(path))
    }

    /// Parse the `<set> <field> <values...>` text format.
    pub fn parse(text: &str) -> Result<RegressionTable> {
        let mut sets: [(Regression, [bool; 5]); 4] = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let set_name = tokens.next().unwrap_or_default();
            let field = tokens
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing field name"))?;
            let values = tokens
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("bad number `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let slot = match set_name {
                "kappa_h" => 0,
                "kappa_v" => 1,
                "alpha_h" => 2,
                "alpha_v" => 3,
                other => return Err(Error::parse(line_no, format!("unknown set `{other}`"))),
            };
            let (reg, seen) = &mut sets[slot];
            let field_idx = match field {
                "a" => 0,
                "b" => 1,
                "c" => 2,
                "m" => 3,
                "c0" => 4,
                other => return Err(Error::parse(line_no, format!("unknown field `{other}`"))),
            };
            if seen[field_idx] {
                return Err(Error::parse(line_no, format!("duplicate `{set_name} {field}`")));
            }
            seen[field_idx] = true;
            match field_idx {
                0 => reg.a = values,
                1 => reg.b = values,
                2 => reg.c = values,
                _ => {
                    let [v] = values[..] else {
                        return Err(Error::parse(line_no, format!("`{field}` takes exactly one value")));
                    };
                    if field_idx == 3 {
                        reg.m = v;
                    } else {
                        reg.c0 = v;
                    }
                }
            }
        }
        let names = ["kappa_h", "kappa_v", "alpha_h", "alpha_v"];
        for ((reg, seen), name) in sets.iter().zip(names) {
            if seen.iter().any(|s| !s) {
                return Err(Error::Validation(format!("regression `{name}` is incomplete")));
            }
            if reg.a.is_empty() || reg.a.len() != reg.b.len() || reg.a.len() != reg.c.len() {
                return Err(Error::Validation(format!(
                    "regression `{name}` has mismatched a/b/c lengths"
                )));
            }
            if reg.c.contains(&0.0) {
                return Err(Error::Validation(format!("regression `{name}` has a zero width")));
            }
        }
        let [(kappa_h, _), (kappa_v, _), (alpha_h, _), (alpha_v, _)] = sets;
        Ok(RegressionTable {
            kappa_h,
            kappa_v,
            alpha_h,
            alpha_v,
        })
    }

    pub fn coefficients(&self, frequency_ghz: f64, polarization: Polarization) -> Result<RainCoefficients> {
        let (lo, hi) = FREQUENCY_RANGE_GHZ;
        if !(lo..=hi).contains(&frequency_ghz) {
            return Err(Error::domain(format!(
                "frequency {frequency_ghz} GHz outside the regression range [{lo}, {hi}]"
            )));
        }
        let x = frequency_ghz.log10();
        let (k, a) = match polarization {
            Polarization::Horizontal => (&self.kappa_h, &self.alpha_h),
            Polarization::Vertical => (&self.kappa_v, &self.alpha_v),
        };
        Ok(RainCoefficients {
            frequency_ghz,
            polarization,
            kappa: 10f64.powf(k.eval(x)),
            alpha: a.eval(x),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainCoefficients {
    pub frequency_ghz: f64,
    pub polarization: Polarization,
    pub kappa: f64,
    pub alpha: f64,
}

impl RainCoefficients {
    /// Coefficients given directly, e.g. from a measurement campaign.
    pub fn explicit(frequency_ghz: f64, polarization: Polarization, kappa: f64, alpha: f64) -> Result<Self> {
        if !(kappa > 0.0 && alpha > 0.0) {
            return Err(Error::domain(format!(
                "power-law coefficients must be positive (kappa={kappa}, alpha={alpha})"
            )));
        }
        Ok(RainCoefficients {
            frequency_ghz,
            polarization,
            kappa,
            alpha,
        })
    }
}

/// κ and α at `frequency_ghz` from the embedded table.
pub fn regression_coefficients(frequency_ghz: f64, polarization: Polarization) -> Result<RainCoefficients> {
    RegressionTable::builtin().coefficients(frequency_ghz, polarization)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecificAttenuation {
    pub gamma_db_per_km: f64,
    pub rain_rate_mm_per_hr: f64,
}

/// `γ = κ·R^α` in dB/km.
pub fn specific_attenuation(rain_rate_mm_per_hr: f64, coefficients: &RainCoefficients) -> Result<SpecificAttenuation> {
    if !(rain_rate_mm_per_hr.is_finite() && rain_rate_mm_per_hr >= 0.0) {
        return Err(Error::domain(format!(
            "rain rate must be non-negative, got {rain_rate_mm_per_hr} mm/h"
        )));
    }
    let gamma = if rain_rate_mm_per_hr == 0.0 {
        0.0
    } else {
        coefficients.kappa * rain_rate_mm_per_hr.powf(coefficients.alpha)
    };
    Ok(SpecificAttenuation {
        gamma_db_per_km: gamma,
        rain_rate_mm_per_hr,
    })
}
