//! Rain attenuation prediction and uplink budgets for LEO gateway siting.
//!
//! The crate follows the ITU-R P.618-8 chain for Earth-space paths:
//!
//! 1. [`geometry`] builds the slant path through the rain layer.
//! 2. [`rain_physics`] evaluates the P.838-3 power-law coefficients and the
//!    specific attenuation `γ = κ·R^α`.
//! 3. [`attenuation`] reduces the slant path to an effective length, forms
//!    `A₀.₀₁ = γ·L_E` and scales it to other exceedance percentages.
//! 4. [`link_budget`] turns attenuation into carrier-to-noise and margin.
//! 5. [`analysis`] sweeps stations and percentages, compares rain sources and
//!    emits reports.
//!
//! [`rain_data`] ingests station catalogs and precipitation series and turns
//! them into the `R₀.₀₁` input, and [`scenario`] loads the JSON run
//! configuration used by the CLI.

pub mod analysis;
pub mod attenuation;
pub mod error;
pub mod geometry;
pub mod link_budget;
pub mod rain_data;
pub mod rain_physics;
pub mod scenario;

pub use error::{Error, Result};

/// Hours in an average (Julian) year.
pub const HOURS_PER_AVERAGE_YEAR: f64 = 8766.0;
