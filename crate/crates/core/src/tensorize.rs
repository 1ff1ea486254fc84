//! Event Spike Tensor construction, projections to the derived
//! representations, and the brute-force reference builder.
//!
//! The tensor has axes `[polarity, bin, row, column]` with positive polarity
//! first. Bin `n` sits at bin coordinate `n`, and each event at normalized
//! time `s` sits at `c = s * (B - 1)`. Cell `(p, n, y, x)` accumulates
//! `measure(e) * kernel(c - n)` over events of polarity `p` at `(x, y)`.
//!
//! [`build_est`] scatters each event into the few bins its kernel touches, so
//! the cost is `O(N * B)` at worst. [`build_est_reference`] visits every cell
//! and every event. Both accumulate in f64 in event order, so they agree bit
//! for bit.

use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::event::{bin_coordinate, canonical_time, Event, EventWindow, MeasurementKind};
use crate::kernels::{self, KernelSpec};
use crate::tensor::{Axis, Precision, Reducer, Tensor};

/// Default number of temporal bins.
pub const DEFAULT_BINS: usize = 9;

/// What to do with events outside the grid or the time window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundsMode {
    /// Fail with [`Error::OutOfBounds`].
    Strict,
    /// Skip and count them, see [`drop_report`].
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub bins: usize,
    pub measurement: MeasurementKind,
    pub kernel: KernelSpec,
    pub precision: Precision,
    pub bounds_mode: BoundsMode,
    /// Worker threads for [`build_est`]. Output does not depend on it.
    pub threads: usize,
}

impl GridConfig {
    /// Nine bins, timestamp measurement, trilinear kernel, f32, lenient.
    pub fn new(width: usize, height: usize) -> Self {
        GridConfig {
            width,
            height,
            bins: DEFAULT_BINS,
            measurement: MeasurementKind::Timestamp,
            kernel: KernelSpec::Trilinear,
            precision: Precision::Float32,
            bounds_mode: BoundsMode::Lenient,
            threads: 1,
        }
    }

    pub fn for_window(window: &EventWindow) -> Self {
        GridConfig::new(window.width(), window.height())
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    pub fn with_measurement(mut self, measurement: MeasurementKind) -> Self {
        self.measurement = measurement;
        self
    }

    pub fn with_kernel(mut self, kernel: KernelSpec) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_bounds_mode(mut self, bounds_mode: BoundsMode) -> Self {
        self.bounds_mode = bounds_mode;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidGeometry {
                width: self.width,
                height: self.height,
            });
        }
        if self.bins == 0 {
            return Err(Error::InvalidBins);
        }
        self.kernel.validate()
    }

    fn check_window(&self, window: &EventWindow) -> Result<()> {
        self.validate()?;
        if self.width != window.width() || self.height != window.height() {
            return Err(Error::GeometryMismatch {
                cfg_w: self.width,
                cfg_h: self.height,
                win_w: window.width(),
                win_h: window.height(),
            });
        }
        Ok(())
    }

    pub fn est_shape(&self) -> Vec<usize> {
        vec![2, self.bins, self.height, self.width]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepresentationKind {
    /// Full tensor, `[2, B, H, W]`.
    Est,
    /// Summed over polarity, `[B, H, W]`.
    VoxelGrid,
    /// Summed over bins, `[2, H, W]`.
    TwoChannelImage,
    /// Summed over polarity and bins, `[H, W]`.
    EventFrame,
    /// Latest normalized timestamp per pixel and polarity, `[2, H, W]`.
    Sae,
    /// Event counts per pixel and polarity, `[2, H, W]`.
    CountImage,
    /// Polarity slices stacked along the bin axis, `[2B, H, W]`.
    EstStacked,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 7] = [
        RepresentationKind::Est,
        RepresentationKind::VoxelGrid,
        RepresentationKind::TwoChannelImage,
        RepresentationKind::EventFrame,
        RepresentationKind::Sae,
        RepresentationKind::CountImage,
        RepresentationKind::EstStacked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RepresentationKind::Est => "est",
            RepresentationKind::VoxelGrid => "voxel",
            RepresentationKind::TwoChannelImage => "two-channel",
            RepresentationKind::EventFrame => "event-frame",
            RepresentationKind::Sae => "sae",
            RepresentationKind::CountImage => "count-image",
            RepresentationKind::EstStacked => "est-stacked",
        }
    }

    /// Whether the representation fixes its own measurement and kernel.
    pub fn fixes_measurement(self) -> bool {
        matches!(
            self,
            RepresentationKind::Sae | RepresentationKind::CountImage
        )
    }

    pub fn shape(self, cfg: &GridConfig) -> Vec<usize> {
        let (b, h, w) = (cfg.bins, cfg.height, cfg.width);
        match self {
            RepresentationKind::Est => vec![2, b, h, w],
            RepresentationKind::VoxelGrid => vec![b, h, w],
            RepresentationKind::TwoChannelImage
            | RepresentationKind::Sae
            | RepresentationKind::CountImage => vec![2, h, w],
            RepresentationKind::EventFrame => vec![h, w],
            RepresentationKind::EstStacked => vec![2 * b, h, w],
        }
    }
}

impl FromStr for RepresentationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        RepresentationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown representation '{s}'"))
    }
}

/// Counts of events the lenient tensorizer skips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DropReport {
    /// Outside `[0, W) x [0, H)`.
    pub spatial: usize,
    /// Inside the sensor but outside `[t0, t1]`.
    pub temporal: usize,
    /// All events in the window, kept or not.
    pub total: usize,
}

impl DropReport {
    pub fn dropped(&self) -> usize {
        self.spatial + self.temporal
    }
}

#[inline]
fn in_bounds(e: &Event, window: &EventWindow) -> bool {
    window.contains_pixel(e) && window.contains_time(e.t)
}

/// Counts the events the tensorizer drops in lenient mode.
pub fn drop_report(window: &EventWindow, _cfg: &GridConfig) -> DropReport {
    let mut report = DropReport {
        total: window.len(),
        ..DropReport::default()
    };
    for e in window.events() {
        if !window.contains_pixel(e) {
            report.spatial += 1;
        } else if !window.contains_time(e.t) {
            report.temporal += 1;
        }
    }
    report
}

fn check_bounds(window: &EventWindow, cfg: &GridConfig) -> Result<()> {
    if cfg.bounds_mode == BoundsMode::Lenient {
        return Ok(());
    }
    match window.events().iter().position(|e| !in_bounds(e, window)) {
        Some(index) => {
            let e = window.events()[index];
            Err(Error::OutOfBounds {
                index,
                x: e.x,
                y: e.y,
                t: e.t,
            })
        }
        None => Ok(()),
    }
}

/// Builds the `[2, B, H, W]` Event Spike Tensor.
pub fn build_est(window: &EventWindow, cfg: &GridConfig) -> Result<Tensor> {
    cfg.check_window(window)?;
    check_bounds(window, cfg)?;

    let (b, h, w) = (cfg.bins, cfg.height, cfg.width);
    let threads = cfg.threads.clamp(1, h);
    let accum = if threads == 1 {
        let mut accum = vec![0.0; 2 * b * h * w];
        scatter(window, cfg, 0..h, &mut accum);
        accum
    } else {
        build_threaded(window, cfg, threads)
    };
    Ok(Tensor::from_f64(
        vec![Axis::Polarity, Axis::Bin, Axis::Row, Axis::Column],
        cfg.est_shape(),
        accum,
        cfg.precision,
    ))
}

/// Each worker owns a band of rows and sees every event, so each cell still
/// accumulates in event order and the result matches the serial build.
fn build_threaded(window: &EventWindow, cfg: &GridConfig, threads: usize) -> Vec<f64> {
    let (b, h, w) = (cfg.bins, cfg.height, cfg.width);
    let band = h.div_ceil(threads);
    let bands: Vec<Range<usize>> = (0..h).step_by(band).map(|r| r..(r + band).min(h)).collect();

    let locals: Vec<(Range<usize>, Vec<f64>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = bands
            .into_iter()
            .map(|rows| {
                scope.spawn(move || {
                    let mut local = vec![0.0; 2 * b * rows.len() * w];
                    scatter(window, cfg, rows.clone(), &mut local);
                    (rows, local)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tensorizer worker panicked"))
            .collect()
    });

    let mut accum = vec![0.0; 2 * b * h * w];
    for (rows, local) in locals {
        let plane = rows.len() * w;
        for (slice, chunk) in local.chunks_exact(plane).enumerate() {
            let start = slice * h * w + rows.start * w;
            accum[start..start + plane].copy_from_slice(chunk);
        }
    }
    accum
}

/// Scatters in-bounds events with `y` in `rows` into `accum`, laid out as
/// `[2, B, rows.len(), W]`.
fn scatter(window: &EventWindow, cfg: &GridConfig, rows: Range<usize>, accum: &mut [f64]) {
    match &cfg.kernel {
        KernelSpec::Delta => scatter_with(window, cfg, rows, accum, kernels::eval_delta),
        KernelSpec::Trilinear => scatter_with(window, cfg, rows, accum, kernels::eval_trilinear),
        k => scatter_with(window, cfg, rows, accum, |u| k.eval(u)),
    }
}

#[inline(always)]
fn scatter_with<K: Fn(f64) -> f64>(
    window: &EventWindow,
    cfg: &GridConfig,
    rows: Range<usize>,
    accum: &mut [f64],
    kernel: K,
) {
    let (b, w) = (cfg.bins, cfg.width);
    let band = rows.len();
    let (t0, t1) = (window.t0(), window.t1());
    for e in window.events() {
        let y = e.y as usize;
        if !rows.contains(&y) || !in_bounds(e, window) {
            continue;
        }
        let s = canonical_time(e.t, t0, t1).expect("event checked in window");
        let f = match cfg.measurement {
            MeasurementKind::Polarity => e.p.sign(),
            MeasurementKind::Count => 1.0,
            MeasurementKind::Timestamp => s,
        };
        let c = bin_coordinate(s, b);
        let (lo, hi) = cfg.kernel.support(c, b);
        let base = e.p.channel() * b * band * w + (y - rows.start) * w + e.x as usize;
        for n in lo..hi {
            accum[base + n * band * w] += f * kernel(c - n as f64);
        }
    }
}

/// Direct evaluation of every tensor cell as a sum over all events.
/// `O(2 * B * H * W * N)`; meant for checking [`build_est`] on small inputs.
pub fn build_est_reference(window: &EventWindow, cfg: &GridConfig) -> Result<Tensor> {
    cfg.check_window(window)?;
    check_bounds(window, cfg)?;

    let (b, h, w) = (cfg.bins, cfg.height, cfg.width);
    let mut cells = Vec::with_capacity(2 * b * h * w);
    for channel in 0..2 {
        for n in 0..b {
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for e in window.events() {
                        if !in_bounds(e, window)
                            || e.p.channel() != channel
                            || e.x as usize != x
                            || e.y as usize != y
                        {
                            continue;
                        }
                        let f = crate::event::measure(e, cfg.measurement, window)?;
                        let s = window.canonical_time(e.t)?;
                        let u = bin_coordinate(s, b) - n as f64;
                        acc += f * cfg.kernel.eval(u);
                    }
                    cells.push(acc);
                }
            }
        }
    }
    Ok(Tensor::from_f64(
        vec![Axis::Polarity, Axis::Bin, Axis::Row, Axis::Column],
        cfg.est_shape(),
        cells,
        cfg.precision,
    ))
}

/// Per-pixel, per-polarity maximum normalized timestamp; zero where a pixel
/// saw no events. Same as a max-accumulated timestamp/delta tensor projected
/// with max over bins.
fn build_sae(window: &EventWindow, cfg: &GridConfig) -> Result<Tensor> {
    cfg.check_window(window)?;
    check_bounds(window, cfg)?;
    let (h, w) = (cfg.height, cfg.width);
    let mut surface = vec![0.0f64; 2 * h * w];
    for e in window.events() {
        if !in_bounds(e, window) {
            continue;
        }
        let s = window.canonical_time(e.t)?;
        let cell = &mut surface[e.p.channel() * h * w + e.y as usize * w + e.x as usize];
        *cell = cell.max(s);
    }
    Ok(Tensor::from_f64(
        vec![Axis::Polarity, Axis::Row, Axis::Column],
        vec![2, h, w],
        surface,
        cfg.precision,
    ))
}

/// Builds one of the named representations.
///
/// `Sae` and `CountImage` ignore `cfg.measurement` and `cfg.kernel`; SAE uses
/// timestamps, the count image uses counts with the delta kernel.
pub fn make_representation(
    window: &EventWindow,
    cfg: &GridConfig,
    kind: RepresentationKind,
) -> Result<Tensor> {
    use RepresentationKind::*;
    match kind {
        Est => build_est(window, cfg),
        VoxelGrid => build_est(window, cfg)?.project(Axis::Polarity, Reducer::Sum),
        TwoChannelImage => build_est(window, cfg)?.project(Axis::Bin, Reducer::Sum),
        EventFrame => build_est(window, cfg)?
            .project(Axis::Polarity, Reducer::Sum)?
            .project(Axis::Bin, Reducer::Sum),
        Sae => build_sae(window, cfg),
        CountImage => {
            let counting = cfg
                .clone()
                .with_measurement(MeasurementKind::Count)
                .with_kernel(KernelSpec::Delta);
            build_est(window, &counting)?.project(Axis::Bin, Reducer::Sum)
        }
        EstStacked => build_est(window, cfg)?.reshape(
            vec![Axis::Channel, Axis::Row, Axis::Column],
            vec![2 * cfg.bins, cfg.height, cfg.width],
        ),
    }
}
