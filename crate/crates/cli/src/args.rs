use std::path::PathBuf;

use clap::{Args, ValueEnum};
use evtensor::kernels::{self, DEFAULT_LUT_RESOLUTION, DEFAULT_TAU};
use evtensor::{
    BoundsMode, EventFileFormat, GridConfig, KernelSpec, MeasurementKind, MlpWeights, Precision,
    RepresentationKind,
};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Auto,
    Csv,
    Evt1,
    Atis,
}

impl FormatArg {
    pub fn resolve(self) -> Option<EventFileFormat> {
        match self {
            FormatArg::Auto => None,
            FormatArg::Csv => Some(EventFileFormat::Csv),
            FormatArg::Evt1 => Some(EventFileFormat::Evt1),
            FormatArg::Atis => Some(EventFileFormat::AtisPacked),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReprArg {
    Est,
    Voxel,
    TwoChannel,
    EventFrame,
    Sae,
    CountImage,
    EstStacked,
}

impl From<ReprArg> for RepresentationKind {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Est => RepresentationKind::Est,
            ReprArg::Voxel => RepresentationKind::VoxelGrid,
            ReprArg::TwoChannel => RepresentationKind::TwoChannelImage,
            ReprArg::EventFrame => RepresentationKind::EventFrame,
            ReprArg::Sae => RepresentationKind::Sae,
            ReprArg::CountImage => RepresentationKind::CountImage,
            ReprArg::EstStacked => RepresentationKind::EstStacked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasurementArg {
    Polarity,
    Count,
    Timestamp,
}

impl From<MeasurementArg> for MeasurementKind {
    fn from(m: MeasurementArg) -> Self {
        match m {
            MeasurementArg::Polarity => MeasurementKind::Polarity,
            MeasurementArg::Count => MeasurementKind::Count,
            MeasurementArg::Timestamp => MeasurementKind::Timestamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Delta,
    Trilinear,
    Exponential,
    Alpha,
    Mlp,
    Lookup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F64,
}

/// Grid flags shared by `convert` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Representation to build.
    #[arg(long, value_enum, default_value = "est")]
    pub repr: ReprArg,

    /// Per-event measurement [default: timestamp].
    #[arg(long, value_enum)]
    pub measurement: Option<MeasurementArg>,

    /// Temporal aggregation kernel [default: trilinear].
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,

    /// Time constant in bins for the exponential and alpha kernels [default: 1.0].
    #[arg(long)]
    pub tau: Option<f64>,

    /// Number of temporal bins.
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u32).range(1..))]
    pub bins: u32,

    /// JSON weight file for the mlp and lookup kernels [default: bundled trilinear weights].
    #[arg(long)]
    pub weights: Option<PathBuf>,

    /// Samples in the lookup-table kernel [default: 1001].
    #[arg(long)]
    pub lut_resolution: Option<usize>,

    /// Output precision.
    #[arg(long, value_enum, default_value = "f32")]
    pub precision: PrecisionArg,

    /// Fail on events outside the sensor or the time window instead of dropping them.
    #[arg(long)]
    pub strict: bool,

    /// Worker threads; output is identical for any value.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,

    /// Sensor width in pixels.
    #[arg(long, requires = "height")]
    pub width: Option<usize>,

    /// Sensor height in pixels.
    #[arg(long, requires = "width")]
    pub height: Option<usize>,
}

/// Summary of a grid configuration, echoed by `bench`.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub repr: &'static str,
    pub width: usize,
    pub height: usize,
    pub bins: usize,
    pub measurement: &'static str,
    pub kernel: String,
    pub precision: &'static str,
    pub strict: bool,
    pub threads: usize,
}

impl ConfigEcho {
    pub fn new(cfg: &GridConfig, repr: RepresentationKind) -> Self {
        let (measurement, kernel) = match repr {
            RepresentationKind::Sae => ("timestamp", "delta".to_string()),
            RepresentationKind::CountImage => ("count", "delta".to_string()),
            _ => (cfg.measurement.name(), cfg.kernel.to_string()),
        };
        ConfigEcho {
            repr: repr.name(),
            width: cfg.width,
            height: cfg.height,
            bins: cfg.bins,
            measurement,
            kernel,
            precision: cfg.precision.name(),
            strict: cfg.bounds_mode == BoundsMode::Strict,
            threads: cfg.threads,
        }
    }
}

impl GridArgs {
    pub fn sensor(&self) -> Option<(usize, usize)> {
        self.width.zip(self.height)
    }

    pub fn representation(&self) -> RepresentationKind {
        self.repr.into()
    }

    /// Rejects flag combinations that contradict each other.
    pub fn check(&self) -> Result<(), CliError> {
        let kernel = self.kernel.unwrap_or(KernelArg::Trilinear);
        if self.tau.is_some() && !matches!(kernel, KernelArg::Exponential | KernelArg::Alpha) {
            return Err(CliError::usage(
                "--tau only applies to --kernel exponential or alpha",
            ));
        }
        if self.weights.is_some() && !matches!(kernel, KernelArg::Mlp | KernelArg::Lookup) {
            return Err(CliError::usage(
                "--weights only applies to --kernel mlp or lookup",
            ));
        }
        if self.lut_resolution.is_some() && kernel != KernelArg::Lookup {
            return Err(CliError::usage(
                "--lut-resolution only applies to --kernel lookup",
            ));
        }
        let fixed = match self.repr {
            ReprArg::Sae => Some((MeasurementArg::Timestamp, "sae")),
            ReprArg::CountImage => Some((MeasurementArg::Count, "count-image")),
            _ => None,
        };
        if let Some((measurement, name)) = fixed {
            if self.measurement.is_some_and(|m| m != measurement) {
                return Err(CliError::usage(
                    format!(
                        "--repr {name} always uses the {:?} measurement",
                        measurement
                    )
                    .to_lowercase(),
                ));
            }
            if self.kernel.is_some_and(|k| k != KernelArg::Delta) {
                return Err(CliError::usage(format!(
                    "--repr {name} always uses the delta kernel"
                )));
            }
            if self.tau.is_some() || self.weights.is_some() || self.lut_resolution.is_some() {
                return Err(CliError::usage(format!(
                    "--repr {name} takes no kernel parameters"
                )));
            }
        }
        Ok(())
    }

    fn kernel_spec(&self, bins: usize) -> Result<KernelSpec, CliError> {
        let tau = self.tau.unwrap_or(DEFAULT_TAU);
        let weights = || -> Result<MlpWeights, CliError> {
            match &self.weights {
                Some(path) => {
                    let bytes = std::fs::read(path).map_err(|e| {
                        CliError::Module(evtensor::Error::Io(format!("{}: {e}", path.display())))
                    })?;
                    Ok(MlpWeights::from_json(&bytes)?)
                }
                None => Ok(MlpWeights::trilinear_init()),
            }
        };
        Ok(match self.kernel.unwrap_or(KernelArg::Trilinear) {
            KernelArg::Delta => KernelSpec::Delta,
            KernelArg::Trilinear => KernelSpec::Trilinear,
            KernelArg::Exponential => KernelSpec::exponential(tau)?,
            KernelArg::Alpha => KernelSpec::alpha(tau)?,
            KernelArg::Mlp => KernelSpec::mlp(weights()?),
            KernelArg::Lookup => {
                let resolution = self.lut_resolution.unwrap_or(DEFAULT_LUT_RESOLUTION);
                let mlp = KernelSpec::mlp(weights()?);
                KernelSpec::lookup(kernels::default_lookup(&mlp, bins, resolution)?)
            }
        })
    }

    /// Builds the grid configuration for a `width` x `height` sensor.
    pub fn grid_config(&self, width: usize, height: usize) -> Result<GridConfig, CliError> {
        self.check()?;
        let bins = self.bins as usize;
        let precision = match self.precision {
            PrecisionArg::F32 => Precision::Float32,
            PrecisionArg::F64 => Precision::Float64,
        };
        let bounds = if self.strict {
            BoundsMode::Strict
        } else {
            BoundsMode::Lenient
        };
        let cfg = GridConfig::new(width, height)
            .with_bins(bins)
            .with_measurement(
                self.measurement
                    .map(MeasurementKind::from)
                    .unwrap_or_default(),
            )
            .with_kernel(self.kernel_spec(bins)?)
            .with_precision(precision)
            .with_bounds_mode(bounds)
            .with_threads(self.threads as usize);
        cfg.validate()?;
        Ok(cfg)
    }
}
