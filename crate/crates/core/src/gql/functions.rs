//! Built-in scalar functions: geographic distance and opening-hours windows.

use crate::graph::{GeoPoint, Interval, Weekday, MINUTES_PER_DAY};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance in kilometers (haversine).
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat().to_radians(), b.lat().to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon() - a.lon()).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

const EVENING_START: u16 = 17 * 60;
const EVENING_END: u16 = 21 * 60;

fn whole_days(days: &[Weekday]) -> Vec<Interval> {
    days.iter()
        .map(|&day| Interval {
            day,
            open_min: 0,
            close_min: MINUTES_PER_DAY,
        })
        .collect()
}

/// Named windows, matched case-insensitively. WEEKEND is all of Saturday and
/// Sunday on the local clock; EVENING is 17:00-21:00 on every day.
pub fn named_window(name: &str) -> Option<Vec<Interval>> {
    let upper = name.trim().to_ascii_uppercase();
    let window = match upper.as_str() {
        "WEEKEND" => whole_days(&[Weekday::Sat, Weekday::Sun]),
        "WEEKDAY" | "WEEKDAYS" => whole_days(&Weekday::ALL[..5]),
        "EVENING" => Weekday::ALL
            .iter()
            .map(|&day| Interval {
                day,
                open_min: EVENING_START,
                close_min: EVENING_END,
            })
            .collect(),
        _ => whole_days(&[Weekday::parse(&upper)?]),
    };
    Some(window)
}

/// Parses a window: a named window or a comma-separated list of explicit
/// intervals such as `Sat 09:00-12:00, Sun 10:00-24:00`.
pub fn parse_window(text: &str) -> Option<Vec<Interval>> {
    if let Some(w) = named_window(text) {
        return Some(w);
    }
    text.split(',').map(parse_explicit_interval).collect()
}

fn parse_explicit_interval(part: &str) -> Option<Interval> {
    let (day, range) = part.trim().split_once(' ')?;
    let day = Weekday::parse(day)?;
    let (open, close) = range.trim().split_once('-')?;
    let minutes = |t: &str| -> Option<u16> {
        let (h, m) = t.trim().split_once(':')?;
        let (h, m): (u16, u16) = (h.parse().ok()?, m.parse().ok()?);
        if m > 59 || h > 24 || (h == 24 && m > 0) {
            return None;
        }
        Some(h * 60 + m)
    };
    Interval::new(day, minutes(open)?, minutes(close)?).ok()
}
