//! Event stream and tensor file formats.

mod events;
pub mod npy;

pub use events::{
    detect_format, read_events, write_events, EventFileFormat, ATIS_MAX_T, ATIS_RECORD_LEN,
    EVT1_HEADER_LEN, EVT1_MAGIC, EVT1_RECORD_LEN,
};
pub use npy::{encode_npy, read_tensor_npy, write_tensor_npy};

use std::path::Path;

use crate::error::Result;
use crate::event::EventWindow;

/// Reads an event file, detecting its format when `format` is `None`.
pub fn read_event_file(
    path: impl AsRef<Path>,
    format: Option<EventFileFormat>,
    sensor: Option<(usize, usize)>,
) -> Result<(EventWindow, EventFileFormat)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let format = match format {
        Some(f) => f,
        None => detect_format(&bytes, path.file_name().and_then(|n| n.to_str()))?,
    };
    Ok((read_events(&bytes, format, sensor)?, format))
}
