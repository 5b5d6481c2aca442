use std::fmt;

use serde::{Deserialize, Serialize};

use super::GraphError;

pub const MINUTES_PER_DAY: u16 = 1440;

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeo")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Deserialize)]
struct RawGeo {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawGeo> for GeoPoint {
    type Error = GraphError;

    fn try_from(raw: RawGeo) -> Result<Self, Self::Error> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GraphError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(GraphError::InvalidValue(format!(
                "coordinates out of range: ({lat}, {lon})"
            )));
        }
        Ok(GeoPoint { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];

    pub fn next(self) -> Weekday {
        Weekday::ALL[(self as usize + 1) % 7]
    }

    pub fn parse(text: &str) -> Option<Weekday> {
        let day = match text.to_ascii_lowercase().as_str() {
            "mon" | "monday" => Weekday::Mon,
            "tue" | "tuesday" => Weekday::Tue,
            "wed" | "wednesday" => Weekday::Wed,
            "thu" | "thursday" => Weekday::Thu,
            "fri" | "friday" => Weekday::Fri,
            "sat" | "saturday" => Weekday::Sat,
            "sun" | "sunday" => Weekday::Sun,
            _ => return None,
        };
        Some(day)
    }
}

impl fmt::Display for Weekday {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An opening interval within a single day, in minutes since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub day: Weekday,
    pub open_min: u16,
    pub close_min: u16,
}

impl Interval {
    pub fn new(day: Weekday, open_min: u16, close_min: u16) -> Result<Self, GraphError> {
        if open_min >= close_min || close_min > MINUTES_PER_DAY {
            return Err(GraphError::InvalidValue(format!(
                "bad interval {day} {open_min}-{close_min}"
            )));
        }
        Ok(Interval {
            day,
            open_min,
            close_min,
        })
    }

    /// True when the two intervals share a positive-length stretch of time.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.day == other.day
            && self.open_min.max(other.open_min) < self.close_min.min(other.close_min)
    }
}

/// Weekly opening hours. Intervals are kept sorted by (day, open) and never
/// overlap on the same day.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct HoursOfOperation {
    intervals: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for HoursOfOperation {
    type Error = GraphError;

    fn try_from(intervals: Vec<Interval>) -> Result<Self, Self::Error> {
        HoursOfOperation::new(intervals)
    }
}

impl From<HoursOfOperation> for Vec<Interval> {
    fn from(hours: HoursOfOperation) -> Self {
        hours.intervals
    }
}

impl HoursOfOperation {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self, GraphError> {
        for iv in &intervals {
            Interval::new(iv.day, iv.open_min, iv.close_min)?;
        }
        intervals.sort();
        for pair in intervals.windows(2) {
            if pair[0].overlaps(&pair[1]) {
                return Err(GraphError::InvalidValue(format!(
                    "overlapping intervals on {}: {}-{} and {}-{}",
                    pair[0].day, pair[0].open_min, pair[0].close_min, pair[1].open_min, pair[1].close_min
                )));
            }
        }
        Ok(HoursOfOperation { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn overlaps_any(&self, window: &[Interval]) -> bool {
        self.intervals
            .iter()
            .any(|iv| window.iter().any(|w| iv.overlaps(w)))
    }
}

/// Kind tag for property values, used by the ontology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Text,
    Number,
    Flag,
    TextList,
    Geo,
    Hours,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Text => "text",
            ValueKind::Number => "number",
            ValueKind::Flag => "flag",
            ValueKind::TextList => "text_list",
            ValueKind::Geo => "geo",
            ValueKind::Hours => "hours",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PropertyValue {
    Text(String),
    Number(f64),
    Flag(bool),
    TextList(Vec<String>),
    Geo(GeoPoint),
    Hours(HoursOfOperation),
}

impl PropertyValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            PropertyValue::Text(_) => ValueKind::Text,
            PropertyValue::Number(_) => ValueKind::Number,
            PropertyValue::Flag(_) => ValueKind::Flag,
            PropertyValue::TextList(_) => ValueKind::TextList,
            PropertyValue::Geo(_) => ValueKind::Geo,
            PropertyValue::Hours(_) => ValueKind::Hours,
        }
    }

    /// Checks the invariants that the type system does not already enforce.
    pub fn check(&self) -> Result<(), GraphError> {
        match self {
            PropertyValue::Number(n) if !n.is_finite() => {
                Err(GraphError::InvalidValue(format!("non-finite number {n}")))
            }
            PropertyValue::TextList(items) if items.iter().any(String::is_empty) => Err(
                GraphError::InvalidValue("text list contains an empty string".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_geo(&self) -> Option<GeoPoint> {
        match self {
            PropertyValue::Geo(g) => Some(*g),
            _ => None,
        }
    }

    pub fn as_text_list(&self) -> Option<&[String]> {
        match self {
            PropertyValue::TextList(items) => Some(items),
            _ => None,
        }
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Text(s.to_string())
    }
}

impl From<String> for PropertyValue {
    fn from(s: String) -> Self {
        PropertyValue::Text(s)
    }
}

impl From<f64> for PropertyValue {
    fn from(n: f64) -> Self {
        PropertyValue::Number(n)
    }
}

impl From<bool> for PropertyValue {
    fn from(b: bool) -> Self {
        PropertyValue::Flag(b)
    }
}

impl From<GeoPoint> for PropertyValue {
    fn from(g: GeoPoint) -> Self {
        PropertyValue::Geo(g)
    }
}

impl From<HoursOfOperation> for PropertyValue {
    fn from(h: HoursOfOperation) -> Self {
        PropertyValue::Hours(h)
    }
}
