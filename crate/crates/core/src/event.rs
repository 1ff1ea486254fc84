//! Events, event windows and the per-event measurement functions.
//!
//! Timestamps are integer microseconds everywhere. They are mapped to the
//! unit interval only when a measurement or kernel needs it, through
//! [`canonical_time`], which divides by the full window length.

use crate::error::{Error, Result};

/// Sign of a brightness change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    /// `+1.0` or `-1.0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    /// Maps the common on-disk encodings to a polarity: `1` is positive,
    /// `0` and `-1` are negative.
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(Polarity::Positive),
            0 | -1 => Some(Polarity::Negative),
            _ => None,
        }
    }

    #[inline]
    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    /// Slice index in a tensor's polarity axis: positive first.
    #[inline]
    pub fn channel(self) -> usize {
        match self {
            Polarity::Positive => 0,
            Polarity::Negative => 1,
        }
    }
}

/// A single brightness-change record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    /// Pixel column.
    pub x: u16,
    /// Pixel row.
    pub y: u16,
    /// Timestamp in microseconds.
    pub t: u64,
    pub p: Polarity,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, p: Polarity) -> Self {
        Event { x, y, t, p }
    }
}

/// Time-sorted batch of events together with the sensor geometry and the
/// closed time interval `[t0, t1]` they were recorded in.
///
/// A window may hold events outside its spatial or temporal bounds; the
/// tensorizer either rejects or drops those depending on its bounds mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    events: Vec<Event>,
    t0: u64,
    t1: u64,
    width: usize,
    height: usize,
}

impl EventWindow {
    /// Builds a window, stably sorting the events by timestamp.
    pub fn new(
        mut events: Vec<Event>,
        t0: u64,
        t1: u64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        if t1 <= t0 {
            return Err(Error::DegenerateWindow { t0, t1 });
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry { width, height });
        }
        if !events.windows(2).all(|w| w[0].t <= w[1].t) {
            events.sort_by_key(|e| e.t);
        }
        Ok(EventWindow {
            events,
            t0,
            t1,
            width,
            height,
        })
    }

    /// Window spanning the first to the last event timestamp. A window whose
    /// events all share one timestamp is widened to one microsecond.
    pub fn spanning(events: Vec<Event>, width: usize, height: usize) -> Result<Self> {
        let t0 = events.iter().map(|e| e.t).min().ok_or(Error::EmptyStream)?;
        let last = events.iter().map(|e| e.t).max().unwrap_or(t0);
        EventWindow::new(events, t0, last.max(t0 + 1), width, height)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn t0(&self) -> u64 {
        self.t0
    }

    pub fn t1(&self) -> u64 {
        self.t1
    }

    pub fn duration(&self) -> u64 {
        self.t1 - self.t0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn contains_time(&self, t: u64) -> bool {
        self.t0 <= t && t <= self.t1
    }

    #[inline]
    pub fn contains_pixel(&self, e: &Event) -> bool {
        (e.x as usize) < self.width && (e.y as usize) < self.height
    }

    /// Normalized time of `t` within this window.
    #[inline]
    pub fn canonical_time(&self, t: u64) -> Result<f64> {
        canonical_time(t, self.t0, self.t1)
    }
}

/// Maps `t` in `[t0, t1]` to `(t - t0) / (t1 - t0)`.
#[inline]
pub fn canonical_time(t: u64, t0: u64, t1: u64) -> Result<f64> {
    if t1 <= t0 {
        return Err(Error::DegenerateWindow { t0, t1 });
    }
    if t < t0 || t > t1 {
        return Err(Error::OutOfWindow { t, t0, t1 });
    }
    Ok((t - t0) as f64 / (t1 - t0) as f64)
}

/// Scales a unit-interval time to bin coordinates `[0, bins - 1]`.
#[inline]
pub fn bin_coordinate(s: f64, bins: usize) -> f64 {
    debug_assert!(bins >= 1);
    if bins <= 1 {
        0.0
    } else {
        s * (bins - 1) as f64
    }
}

/// Scalar assigned to each event before kernel aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MeasurementKind {
    Polarity,
    Count,
    #[default]
    Timestamp,
}

impl MeasurementKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::Polarity => "polarity",
            MeasurementKind::Count => "count",
            MeasurementKind::Timestamp => "timestamp",
        }
    }
}

impl std::str::FromStr for MeasurementKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "polarity" => Ok(MeasurementKind::Polarity),
            "count" => Ok(MeasurementKind::Count),
            "timestamp" => Ok(MeasurementKind::Timestamp),
            other => Err(format!("unknown measurement '{other}'")),
        }
    }
}

/// Measurement of `e` under `kind`.
pub fn measure(e: &Event, kind: MeasurementKind, window: &EventWindow) -> Result<f64> {
    match kind {
        MeasurementKind::Polarity => Ok(e.p.sign()),
        MeasurementKind::Count => Ok(1.0),
        MeasurementKind::Timestamp => window.canonical_time(e.t),
    }
}
