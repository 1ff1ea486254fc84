//! Shared inputs for the evtensor benchmarks.

use evtensor::{random_window, EventWindow};

/// Sensor geometry of the benchmark streams.
pub const SENSOR: (usize, usize) = (240, 180);

/// A seeded stream of `n` uniform events over one 100 ms sample.
pub fn sample_window(n: usize) -> EventWindow {
    random_window(n, SENSOR.0, SENSOR.1, 100_000, 0).expect("valid sensor")
}
