use std::path::{Path, PathBuf};

use evtensor::synth::parse_timestamps;
use evtensor::{
    detect_format, drop_report, make_representation, read_events, simulate_events, write_events,
    write_tensor_npy, BoundsMode, Error, EventFileFormat, EventWindow, FrameSequence, Polarity,
};

use crate::args::FormatArg;
use crate::{CliError, ConvertArgs, InfoArgs, SynthArgs};

/// Reads an event file. When `need_sensor` is set, formats without a header
/// must be given `--width` and `--height`.
pub fn load_events(
    path: &Path,
    format: FormatArg,
    sensor: Option<(usize, usize)>,
    need_sensor: bool,
) -> Result<(EventWindow, EventFileFormat), CliError> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let format = match format.resolve() {
        Some(f) => f,
        None => detect_format(&bytes, path.file_name().and_then(|n| n.to_str()))?,
    };
    if need_sensor && sensor.is_none() && !format.carries_geometry() {
        return Err(CliError::usage(format!(
            "--width and --height are required for {format} input"
        )));
    }
    Ok((read_events(&bytes, format, sensor)?, format))
}

pub fn convert(a: &ConvertArgs) -> Result<(), CliError> {
    a.grid.check()?;
    let (window, _) = load_events(&a.input, a.format, a.grid.sensor(), true)?;
    let cfg = a.grid.grid_config(window.width(), window.height())?;
    let repr = a.grid.representation();
    let tensor = make_representation(&window, &cfg, repr)?;
    write_tensor_npy(&tensor, &a.output)?;

    if cfg.bounds_mode == BoundsMode::Lenient {
        let report = drop_report(&window, &cfg);
        println!(
            "dropped: {} of {} events ({} outside sensor, {} outside window)",
            report.dropped(),
            report.total,
            report.spatial,
            report.temporal
        );
    }
    let shape: Vec<String> = tensor.shape().iter().map(|d| d.to_string()).collect();
    println!(
        "wrote {} {} ({}) to {}",
        repr.name(),
        cfg.precision.name(),
        shape.join(", "),
        a.output.display()
    );
    Ok(())
}

pub fn info(a: &InfoArgs) -> Result<(), CliError> {
    let (window, format) = load_events(&a.input, a.format, None, false)?;
    let positive = window
        .events()
        .iter()
        .filter(|e| e.p == Polarity::Positive)
        .count();
    let negative = window.len() - positive;
    let pixels = window.width() * window.height();
    println!("format:     {format}");
    println!("events:     {} (+{positive}, -{negative})", window.len());
    println!("t0:         {} us", window.t0());
    println!("t1:         {} us", window.t1());
    println!("duration:   {} us", window.duration());
    println!("sensor:     {}x{}", window.width(), window.height());
    println!(
        "per pixel:  {:.6} events",
        window.len() as f64 / pixels as f64
    );
    Ok(())
}

fn expand_frames(patterns: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for pattern in patterns {
        let matches = glob::glob(pattern)
            .map_err(|e| CliError::usage(format!("invalid --frames pattern '{pattern}': {e}")))?;
        let mut found: Vec<PathBuf> = matches
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Io(e.to_string()))?;
        if found.is_empty() {
            return Err(Error::InvalidSequence(format!("no frames match '{pattern}'")).into());
        }
        found.sort();
        paths.extend(found);
    }
    Ok(paths)
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let format = match a.output.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => EventFileFormat::Csv,
        _ => EventFileFormat::Evt1,
    };
    let frames = expand_frames(&a.frames)?;
    let text = std::fs::read_to_string(&a.timestamps)
        .map_err(|e| Error::Io(format!("{}: {e}", a.timestamps.display())))?;
    let timestamps = parse_timestamps(&text)?;
    let seq = FrameSequence::from_pgm_files(&frames, timestamps, a.contrast)?;
    let window = simulate_events(&seq);
    let bytes = write_events(&window, format)?;
    std::fs::write(&a.output, bytes)
        .map_err(|e| Error::Io(format!("{}: {e}", a.output.display())))?;
    println!(
        "wrote {} events from {} frames to {} ({format})",
        window.len(),
        frames.len(),
        a.output.display()
    );
    Ok(())
}
