//! Synthetic event streams.
//!
//! [`simulate_events`] turns an intensity-frame sequence into events with the
//! contrast-threshold model: a pixel fires each time its log intensity moves
//! by `C` from the level at its previous event. Log intensity is linear in
//! time between frames, so crossing times are closed-form.
//!
//! [`random_window`] draws uniform random events for benchmarks and tests.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::event::{Event, EventWindow, Polarity};

// Tolerance on threshold comparisons in log space; absorbs rounding from
// `ln` and from accumulating levels.
const LEVEL_EPS: f64 = 1e-9;

/// Intensity frames with their timestamps and the contrast threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    timestamps: Vec<u64>,
    width: usize,
    height: usize,
    frames: Vec<Vec<f64>>,
    contrast: f64,
}

impl FrameSequence {
    /// `frames` are row-major `height * width` intensity images.
    pub fn new(
        timestamps: Vec<u64>,
        width: usize,
        height: usize,
        frames: Vec<Vec<f64>>,
        contrast: f64,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidSequence(msg));
        if frames.len() < 2 {
            return invalid(format!("need at least 2 frames, got {}", frames.len()));
        }
        if timestamps.len() != frames.len() {
            return invalid(format!(
                "{} timestamps for {} frames",
                timestamps.len(),
                frames.len()
            ));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return invalid(format!(
                "timestamps not strictly increasing at frame {}",
                i + 1
            ));
        }
        if width == 0 || height == 0 {
            return invalid(format!("empty frame size {width}x{height}"));
        }
        if width > u16::MAX as usize + 1 || height > u16::MAX as usize + 1 {
            return invalid(format!(
                "frame size {width}x{height} exceeds 16-bit coordinates"
            ));
        }
        for (i, f) in frames.iter().enumerate() {
            if f.len() != width * height {
                return invalid(format!(
                    "frame {i} has {} pixels, expected {width}x{height}",
                    f.len()
                ));
            }
            if let Some(v) = f.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return invalid(format!("frame {i} has non-positive intensity {v}"));
            }
        }
        if !(contrast > 0.0 && contrast.is_finite()) {
            return invalid(format!("contrast must be positive, got {contrast}"));
        }
        Ok(FrameSequence {
            timestamps,
            width,
            height,
            frames,
            contrast,
        })
    }

    /// Loads 8-bit PGM (P5) frames. Intensity 0 is raised to 1 so its log is
    /// defined.
    pub fn from_pgm_files<P: AsRef<Path>>(
        paths: &[P],
        timestamps: Vec<u64>,
        contrast: f64,
    ) -> Result<Self> {
        let mut size = None;
        let mut frames = Vec::with_capacity(paths.len());
        for path in paths {
            let path = path.as_ref();
            let bytes = std::fs::read(path)?;
            let (w, h, pixels) = decode_pgm(&bytes)
                .map_err(|e| Error::InvalidSequence(format!("{}: {e}", path.display())))?;
            match size {
                None => size = Some((w, h)),
                Some(s) if s != (w, h) => {
                    return Err(Error::InvalidSequence(format!(
                        "{} is {w}x{h}, earlier frames are {}x{}",
                        path.display(),
                        s.0,
                        s.1
                    )))
                }
                Some(_) => {}
            }
            frames.push(pixels);
        }
        let (w, h) = size.unwrap_or((0, 0));
        FrameSequence::new(timestamps, w, h, frames, contrast)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }
}

fn decode_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<f64>), String> {
    if !bytes.starts_with(b"P5") {
        return Err("not a binary PGM (P5) image".into());
    }
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Pnm)
        .map_err(|e| e.to_string())?;
    if img.color() != image::ColorType::L8 {
        return Err(format!("expected 8-bit grayscale, got {:?}", img.color()));
    }
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    let pixels = gray
        .into_raw()
        .into_iter()
        .map(|v| v.max(1) as f64)
        .collect();
    Ok((w as usize, h as usize, pixels))
}

/// Parses one microsecond timestamp per line; blank lines are skipped.
pub fn parse_timestamps(text: &str) -> Result<Vec<u64>> {
    let mut offset = 0;
    let mut out = Vec::new();
    for line in text.split_inclusive('\n') {
        let value = line.trim();
        if !value.is_empty() {
            out.push(
                value
                    .parse()
                    .map_err(|_| Error::parse(offset, format!("invalid timestamp '{value}'")))?,
            );
        }
        offset += line.len();
    }
    Ok(out)
}

/// Runs the contrast-threshold model over every pixel.
///
/// Events are ordered by time, then row, column and polarity. The window
/// spans the first to the last frame timestamp.
#[allow(clippy::needless_range_loop)]
pub fn simulate_events(seq: &FrameSequence) -> EventWindow {
    let c = seq.contrast;
    let logs: Vec<Vec<f64>> = seq
        .frames
        .iter()
        .map(|f| f.iter().map(|v| v.ln()).collect())
        .collect();

    let mut events = Vec::new();
    for pixel in 0..seq.width * seq.height {
        let x = (pixel % seq.width) as u16;
        let y = (pixel / seq.width) as u16;
        let reference = logs[0][pixel];
        // Level of the last event is `reference + level * c`.
        let mut level: i64 = 0;
        for (k, span) in seq.timestamps.windows(2).enumerate() {
            let (ta, tb) = (span[0], span[1]);
            let (la, lb) = (logs[k][pixel], logs[k + 1][pixel]);
            let dt = (tb - ta) as f64;
            loop {
                let up = reference + (level + 1) as f64 * c;
                let down = reference + (level - 1) as f64 * c;
                let (target, p) = if lb >= up - LEVEL_EPS {
                    (up, Polarity::Positive)
                } else if lb <= down + LEVEL_EPS {
                    (down, Polarity::Negative)
                } else {
                    break;
                };
                let frac = if lb == la {
                    1.0
                } else {
                    ((target - la) / (lb - la)).clamp(0.0, 1.0)
                };
                // Nudge before flooring so exact crossings are not lost to rounding.
                let t = ta + ((frac * dt + 1e-6).floor() as u64).min(tb - ta);
                events.push(Event::new(x, y, t, p));
                level += if p == Polarity::Positive { 1 } else { -1 };
            }
        }
    }
    events.sort_by_key(|e| (e.t, e.y, e.x, e.p));

    let t0 = seq.timestamps[0];
    let t1 = *seq.timestamps.last().expect("at least two frames");
    EventWindow::new(events, t0, t1, seq.width, seq.height).expect("validated sequence")
}

/// `n` events with uniform pixels, polarities and timestamps in
/// `[0, duration_us]`, sorted by time.
pub fn random_window(
    n: usize,
    width: usize,
    height: usize,
    duration_us: u64,
    seed: u64,
) -> Result<EventWindow> {
    if width == 0 || height == 0 || width > 1 << 16 || height > 1 << 16 {
        return Err(Error::InvalidGeometry { width, height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = (0..n)
        .map(|_| {
            let p = if rng.random::<bool>() {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            Event::new(
                rng.random_range(0..width) as u16,
                rng.random_range(0..height) as u16,
                rng.random_range(0..=duration_us),
                p,
            )
        })
        .collect();
    EventWindow::new(events, 0, duration_us.max(1), width, height)
}
