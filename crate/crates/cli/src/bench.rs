use std::time::Instant;

use evtensor::{make_representation, random_window};
use serde::Serialize;

use crate::args::ConfigEcho;
use crate::commands::load_events;
use crate::{BenchArgs, CliError};

/// Synthetic sensor geometry when `--width`/`--height` are not given.
pub const SYNTHETIC_SENSOR: (usize, usize) = (240, 180);
/// Default time span of a synthetic stream: one 100 ms sample.
pub const SYNTHETIC_DURATION_US: u64 = 100_000;
const WARMUP_RUNS: usize = 2;

/// Timings of repeated representation builds over one event window.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub events: usize,
    pub repeats: usize,
    pub times_s: Vec<f64>,
    pub throughput_evs: f64,
    pub config: ConfigEcho,
}

impl BenchReport {
    pub fn new(events: usize, times_s: Vec<f64>, config: ConfigEcho) -> Self {
        let throughput_evs = events as f64 / median(&times_s);
        BenchReport {
            events,
            repeats: times_s.len(),
            times_s,
            throughput_evs,
            config,
        }
    }

    pub fn median_s(&self) -> f64 {
        median(&self.times_s)
    }
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

pub fn run(a: &BenchArgs) -> Result<(), CliError> {
    a.grid.check()?;
    let window = match (&a.input, a.synthetic) {
        (Some(path), _) => load_events(path, a.format, a.grid.sensor(), true)?.0,
        (None, Some(n)) => {
            let (w, h) = a.grid.sensor().unwrap_or(SYNTHETIC_SENSOR);
            random_window(n, w, h, a.duration_us, a.seed)?
        }
        (None, None) => return Err(CliError::usage("one of --input or --synthetic is required")),
    };
    let cfg = a.grid.grid_config(window.width(), window.height())?;
    let repr = a.grid.representation();

    for _ in 0..WARMUP_RUNS {
        make_representation(&window, &cfg, repr)?;
    }
    let mut times = Vec::with_capacity(a.repeats as usize);
    for _ in 0..a.repeats {
        let start = Instant::now();
        let tensor = make_representation(&window, &cfg, repr)?;
        times.push(start.elapsed().as_secs_f64());
        drop(tensor);
    }

    let report = BenchReport::new(window.len(), times, ConfigEcho::new(&cfg, repr));
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        print_text(&report);
    }
    Ok(())
}

fn print_text(r: &BenchReport) {
    let c = &r.config;
    let rows = [
        ("events", r.events.to_string()),
        ("repeats", r.repeats.to_string()),
        ("median_s", format!("{:.6}", r.median_s())),
        (
            "min_s",
            format!(
                "{:.6}",
                r.times_s.iter().copied().fold(f64::INFINITY, f64::min)
            ),
        ),
        (
            "max_s",
            format!("{:.6}", r.times_s.iter().copied().fold(0.0, f64::max)),
        ),
        ("throughput_evs", format!("{:.0}", r.throughput_evs)),
        ("repr", c.repr.to_string()),
        ("sensor", format!("{}x{}", c.width, c.height)),
        ("bins", c.bins.to_string()),
        ("measurement", c.measurement.to_string()),
        ("kernel", c.kernel.clone()),
        ("precision", c.precision.to_string()),
        ("threads", c.threads.to_string()),
    ];
    for (name, value) in rows {
        println!("{name:<16}{value:>16}");
    }
}
