//! Dense grid representations of event-camera streams.
//!
//! Events `(x, y, t, p)` are mapped to a four-axis Event Spike Tensor
//! `[polarity, bin, row, column]` by assigning each event a measurement
//! (polarity, count or normalized timestamp), spreading it over temporal bins
//! with an aggregation kernel, and sampling on a regular grid. Projections
//! over its axes give the voxel grid, two-channel image and event frame.
//!
//! ```
//! use evtensor::{Event, EventWindow, GridConfig, Polarity, RepresentationKind};
//!
//! let events = vec![
//!     Event::new(1, 0, 0, Polarity::Positive),
//!     Event::new(1, 0, 50, Polarity::Negative),
//! ];
//! let window = EventWindow::new(events, 0, 100, 2, 1).unwrap();
//! let cfg = GridConfig::for_window(&window).with_bins(3);
//! let voxels = evtensor::make_representation(&window, &cfg, RepresentationKind::VoxelGrid).unwrap();
//! assert_eq!(voxels.shape(), &[3, 1, 2]);
//! ```

pub mod error;
pub mod event;
pub mod io;
pub mod kernels;
pub mod synth;
pub mod tensor;
pub mod tensorize;

pub use error::{Error, Result};
pub use event::{
    bin_coordinate, canonical_time, measure, Event, EventWindow, MeasurementKind, Polarity,
};
pub use io::{
    detect_format, read_event_file, read_events, read_tensor_npy, write_events, write_tensor_npy,
    EventFileFormat,
};
pub use kernels::{
    build_lookup, eval_alpha, eval_delta, eval_exponential, eval_trilinear, load_mlp_weights,
    lookup_eval, KernelSpec, LookupTable, MlpWeights,
};
pub use synth::{random_window, simulate_events, FrameSequence};
pub use tensor::{project, Axis, Precision, Reducer, Tensor, TensorData};
pub use tensorize::{
    build_est, build_est_reference, drop_report, make_representation, BoundsMode, DropReport,
    GridConfig, RepresentationKind,
};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
