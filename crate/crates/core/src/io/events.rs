//! Event stream codecs.
//!
//! * `Csv`: header `t,x,y,p`, one integer record per line, `p` in
//!   `{-1, 0, 1}` with `0` read as negative.
//! * `Evt1`: 25-byte little-endian header (`"EVT1"`, version `u8 = 1`,
//!   width `u16`, height `u16`, t0 `u64`, t1 `u64`) followed by 16-byte
//!   records `{t: u64, x: u16, y: u16, p: i8, pad: [u8; 3]}`.
//! * `AtisPacked`: 5 bytes per event: `x`, `y`, then a 23-bit microsecond
//!   timestamp in big-endian order whose top byte also carries the polarity
//!   in bit 7 (set = positive).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::event::{Event, EventWindow, Polarity};

pub const EVT1_MAGIC: &[u8; 4] = b"EVT1";
pub const EVT1_VERSION: u8 = 1;
pub const EVT1_HEADER_LEN: usize = 25;
pub const EVT1_RECORD_LEN: usize = 16;
pub const ATIS_RECORD_LEN: usize = 5;
/// Exclusive upper bound on AtisPacked timestamps.
pub const ATIS_MAX_T: u64 = 1 << 23;

const CSV_HEADER: &str = "t,x,y,p";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventFileFormat {
    Csv,
    Evt1,
    AtisPacked,
}

impl EventFileFormat {
    pub fn name(self) -> &'static str {
        match self {
            EventFileFormat::Csv => "csv",
            EventFileFormat::Evt1 => "evt1",
            EventFileFormat::AtisPacked => "atis",
        }
    }

    /// Whether files in this format record the sensor size.
    pub fn carries_geometry(self) -> bool {
        self == EventFileFormat::Evt1
    }
}

impl fmt::Display for EventFileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventFileFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(EventFileFormat::Csv),
            "evt1" => Ok(EventFileFormat::Evt1),
            "atis" => Ok(EventFileFormat::AtisPacked),
            other => Err(format!("unknown event format '{other}'")),
        }
    }
}

/// Decodes an event stream.
///
/// Without an explicit `sensor` size, Evt1 uses its header and the other
/// formats use the smallest sensor containing every event. Formats without a
/// time header span the first to the last timestamp.
pub fn read_events(
    bytes: &[u8],
    format: EventFileFormat,
    sensor: Option<(usize, usize)>,
) -> Result<EventWindow> {
    let (events, header) = match format {
        EventFileFormat::Csv => (parse_csv(bytes)?, None),
        EventFileFormat::AtisPacked => (parse_atis(bytes)?, None),
        EventFileFormat::Evt1 => {
            let (header, events) = parse_evt1(bytes)?;
            (events, Some(header))
        }
    };
    if events.is_empty() {
        return Err(Error::EmptyStream);
    }
    let (width, height) = sensor
        .or(header.map(|h| (h.width as usize, h.height as usize)))
        .unwrap_or_else(|| fitted_sensor(&events));
    match header {
        Some(h) => EventWindow::new(events, h.t0, h.t1, width, height),
        None => EventWindow::spanning(events, width, height),
    }
}

fn fitted_sensor(events: &[Event]) -> (usize, usize) {
    let w = events.iter().map(|e| e.x as usize + 1).max().unwrap_or(1);
    let h = events.iter().map(|e| e.y as usize + 1).max().unwrap_or(1);
    (w, h)
}

pub fn write_events(window: &EventWindow, format: EventFileFormat) -> Result<Vec<u8>> {
    if window.is_empty() {
        return Err(Error::EmptyStream);
    }
    match format {
        EventFileFormat::Csv => Ok(write_csv(window)),
        EventFileFormat::Evt1 => write_evt1(window),
        EventFileFormat::AtisPacked => write_atis(window),
    }
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    let mut offset = 0;
    for (lineno, raw) in bytes.split_inclusive(|&b| b == b'\n').enumerate() {
        let line_offset = offset;
        offset += raw.len();
        let line = std::str::from_utf8(raw)
            .map_err(|e| Error::parse(line_offset + e.valid_up_to(), "invalid UTF-8"))?
            .trim();
        if line.is_empty() || (lineno == 0 && line == CSV_HEADER) {
            continue;
        }
        events.push(parse_csv_record(line, line_offset)?);
    }
    Ok(events)
}

fn parse_csv_record(line: &str, offset: usize) -> Result<Event> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            offset,
            format!("expected 4 fields t,x,y,p, found {}", fields.len()),
        ));
    }
    let bad = |what: &str, v: &str| Error::parse(offset, format!("invalid {what} '{v}'"));
    let t: u64 = fields[0].parse().map_err(|_| bad("timestamp", fields[0]))?;
    let x: u16 = fields[1].parse().map_err(|_| bad("x", fields[1]))?;
    let y: u16 = fields[2].parse().map_err(|_| bad("y", fields[2]))?;
    let p = fields[3]
        .parse::<i64>()
        .ok()
        .and_then(Polarity::from_code)
        .ok_or_else(|| bad("polarity", fields[3]))?;
    Ok(Event::new(x, y, t, p))
}

fn write_csv(window: &EventWindow) -> Vec<u8> {
    use std::fmt::Write;
    let mut out = String::with_capacity(16 * window.len() + 8);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in window.events() {
        let _ = writeln!(out, "{},{},{},{}", e.t, e.x, e.y, e.p.as_i8());
    }
    out.into_bytes()
}

#[derive(Debug, Clone, Copy)]
struct Evt1Header {
    width: u16,
    height: u16,
    t0: u64,
    t1: u64,
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u64(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

fn parse_evt1(bytes: &[u8]) -> Result<(Evt1Header, Vec<Event>)> {
    if bytes.len() < EVT1_HEADER_LEN {
        if !bytes.starts_with(&EVT1_MAGIC[..bytes.len().min(4)]) {
            return Err(Error::parse(0, "missing EVT1 magic"));
        }
        return Err(Error::parse(bytes.len(), "header shorter than 25 bytes"));
    }
    if &bytes[..4] != EVT1_MAGIC {
        return Err(Error::parse(0, "missing EVT1 magic"));
    }
    if bytes[4] != EVT1_VERSION {
        return Err(Error::parse(
            4,
            format!("unsupported EVT1 version {}", bytes[4]),
        ));
    }
    let header = Evt1Header {
        width: le_u16(bytes, 5),
        height: le_u16(bytes, 7),
        t0: le_u64(bytes, 9),
        t1: le_u64(bytes, 17),
    };
    if header.width == 0 || header.height == 0 {
        return Err(Error::parse(5, "zero sensor size in header"));
    }
    if header.t1 <= header.t0 {
        return Err(Error::parse(9, "header window end not after start"));
    }

    let body = &bytes[EVT1_HEADER_LEN..];
    let trailing = body.len() % EVT1_RECORD_LEN;
    if trailing != 0 {
        return Err(Error::TruncatedRecord {
            offset: bytes.len() - trailing,
            trailing,
        });
    }
    let mut events = Vec::with_capacity(body.len() / EVT1_RECORD_LEN);
    for (i, rec) in body.chunks_exact(EVT1_RECORD_LEN).enumerate() {
        let offset = EVT1_HEADER_LEN + i * EVT1_RECORD_LEN;
        let p = Polarity::from_code(rec[12] as i8 as i64).ok_or_else(|| {
            Error::parse(offset + 12, format!("invalid polarity {}", rec[12] as i8))
        })?;
        events.push(Event::new(
            le_u16(rec, 8),
            le_u16(rec, 10),
            le_u64(rec, 0),
            p,
        ));
    }
    Ok((header, events))
}

fn write_evt1(window: &EventWindow) -> Result<Vec<u8>> {
    let dim = |v: usize, name: &str| {
        u16::try_from(v).map_err(|_| Error::RangeOverflow(format!("{name} {v} exceeds u16")))
    };
    let width = dim(window.width(), "width")?;
    let height = dim(window.height(), "height")?;
    let mut out = Vec::with_capacity(EVT1_HEADER_LEN + EVT1_RECORD_LEN * window.len());
    out.extend_from_slice(EVT1_MAGIC);
    out.push(EVT1_VERSION);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.extend_from_slice(&window.t0().to_le_bytes());
    out.extend_from_slice(&window.t1().to_le_bytes());
    for e in window.events() {
        out.extend_from_slice(&e.t.to_le_bytes());
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.push(e.p.as_i8() as u8);
        out.extend_from_slice(&[0; 3]);
    }
    Ok(out)
}

fn parse_atis(bytes: &[u8]) -> Result<Vec<Event>> {
    let trailing = bytes.len() % ATIS_RECORD_LEN;
    if trailing != 0 {
        return Err(Error::TruncatedRecord {
            offset: bytes.len() - trailing,
            trailing,
        });
    }
    Ok(bytes
        .chunks_exact(ATIS_RECORD_LEN)
        .map(|r| {
            let p = if r[2] & 0x80 != 0 {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            let t = ((r[2] & 0x7f) as u64) << 16 | (r[3] as u64) << 8 | r[4] as u64;
            Event::new(r[0] as u16, r[1] as u16, t, p)
        })
        .collect())
}

fn write_atis(window: &EventWindow) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(ATIS_RECORD_LEN * window.len());
    for (i, e) in window.events().iter().enumerate() {
        if e.x > 255 || e.y > 255 {
            return Err(Error::RangeOverflow(format!(
                "event {i} at ({}, {}) exceeds the 8-bit AtisPacked coordinates",
                e.x, e.y
            )));
        }
        if e.t >= ATIS_MAX_T {
            return Err(Error::RangeOverflow(format!(
                "event {i} timestamp {} exceeds the 23-bit AtisPacked counter",
                e.t
            )));
        }
        let pol = if e.p == Polarity::Positive { 0x80 } else { 0 };
        out.extend_from_slice(&[
            e.x as u8,
            e.y as u8,
            pol | (e.t >> 16) as u8,
            (e.t >> 8) as u8,
            e.t as u8,
        ]);
    }
    Ok(out)
}

/// Guesses the format of `bytes`. The EVT1 magic is decisive; otherwise the
/// stream must match exactly one of CSV (first line is the header or a
/// record) or AtisPacked (`.bin` name and a whole number of records).
pub fn detect_format(bytes: &[u8], filename: Option<&str>) -> Result<EventFileFormat> {
    if bytes.starts_with(EVT1_MAGIC) {
        return Ok(EventFileFormat::Evt1);
    }
    let first_line = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let looks_csv = std::str::from_utf8(first_line)
        .map(|l| {
            let l = l.trim();
            l == CSV_HEADER || parse_csv_record(l, 0).is_ok()
        })
        .unwrap_or(false);
    let is_bin = filename
        .map(|f| {
            std::path::Path::new(f)
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("bin"))
        })
        .unwrap_or(false);
    let looks_atis = is_bin && !bytes.is_empty() && bytes.len().is_multiple_of(ATIS_RECORD_LEN);

    match (looks_csv, looks_atis) {
        (true, false) => Ok(EventFileFormat::Csv),
        (false, true) => Ok(EventFileFormat::AtisPacked),
        (true, true) => Err(Error::UnknownFormat(
            "input parses as both CSV and AtisPacked".into(),
        )),
        (false, false) => Err(Error::UnknownFormat(match filename {
            Some(f) => format!("cannot identify the format of '{f}'"),
            None => "cannot identify the format of the input".into(),
        })),
    }
}
