//! Time-space arithmetic.
//!
//! Positions are stored already converted to time units: a coordinate is the
//! time a signal needs to cover the corresponding distance at the scenario's
//! unit interaction speed. [`to_time_coordinates`] is the single entry point
//! for physical lengths; everything downstream works in time units only.
//!
//! The central quantity is the apparent time of a two-stage event (a source
//! processes, the signal travels, an observer processes): the length of the
//! vector from the event's origin to the observer's completion point,
//! `T_A = sqrt(T_t^2 + (2*T_p + T_t)^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2-D position whose coordinates are expressed in time units.
///
/// The `y` axis does not change any closed-form result by itself; it exists
/// so that components can be placed at equal distances without occupying the
/// same point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub x: f64,
    pub y: f64,
}

impl TimePoint {
    pub const ORIGIN: TimePoint = TimePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Euclidean distance to `other`, still in time units.
    pub fn distance_to(&self, other: &TimePoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        // sqrt of a sum of products is bit-stable across platforms,
        // unlike hypot.
        (dx * dx + dy * dy).sqrt()
    }
}

/// Dimensionless positive multiplier of the scenario's unit interaction speed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SpeedFactor(f64);

impl<'de> Deserialize<'de> for SpeedFactor {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let value = f64::deserialize(deserializer)?;
        SpeedFactor::new(value).map_err(serde::de::Error::custom)
    }
}

impl SpeedFactor {
    pub const UNIT: SpeedFactor = SpeedFactor(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!(
                "speed factor must be finite and positive, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// The decomposition of a two-stage event: physical processing time `t_p`,
/// transfer time `t_t`, their ratio `r = t_t / t_p` (defined only when
/// `t_p > 0`) and the resulting apparent time `t_a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApparentTime {
    pub t_p: f64,
    pub t_t: f64,
    pub r: Option<f64>,
    pub t_a: f64,
}

/// Converts a physical distance to a time coordinate.
///
/// Returns `distance / interaction_speed`.
pub fn to_time_coordinates(distance: f64, interaction_speed: f64) -> Result<f64> {
    if !(interaction_speed.is_finite() && interaction_speed > 0.0) {
        return Err(Error::Domain(format!(
            "interaction speed must be positive, got {interaction_speed}"
        )));
    }
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::Domain(format!(
            "distance must be non-negative, got {distance}"
        )));
    }
    Ok(distance / interaction_speed)
}

/// Transfer time between two positions (already in time units), divided by
/// the speed factor. Symmetric in its endpoints.
pub fn transfer_time(a: &TimePoint, b: &TimePoint, speed: SpeedFactor) -> f64 {
    a.distance_to(b) / speed.value()
}

/// Apparent time of a two-stage event with processing time `t_p` on both
/// stages and transfer time `t_t` between them:
/// `t_a = sqrt(t_t^2 + (2*t_p + t_t)^2)`.
///
/// An event with no processing and no transfer is not an event; both inputs
/// zero is rejected.
pub fn apparent_time(t_p: f64, t_t: f64) -> Result<ApparentTime> {
    if !(t_p.is_finite() && t_p >= 0.0) {
        return Err(Error::Domain(format!(
            "processing time must be non-negative, got {t_p}"
        )));
    }
    if !(t_t.is_finite() && t_t >= 0.0) {
        return Err(Error::Domain(format!(
            "transfer time must be non-negative, got {t_t}"
        )));
    }
    if t_p == 0.0 && t_t == 0.0 {
        return Err(Error::DegenerateApparentTime);
    }
    let along_time = 2.0 * t_p + t_t;
    let t_a = (t_t * t_t + along_time * along_time).sqrt();
    let r = if t_p > 0.0 { Some(t_t / t_p) } else { None };
    Ok(ApparentTime { t_p, t_t, r, t_a })
}

/// Apparent-time inflation as a function of the ratio `r = T_t / T_p` alone:
/// returns `T_A / T_p = sqrt(r^2 + (2 + r)^2)`.
pub fn apparent_time_ratio(r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Domain(format!(
            "ratio must be non-negative, got {r}"
        )));
    }
    Ok((r * r + (2.0 + r) * (2.0 + r)).sqrt())
}
