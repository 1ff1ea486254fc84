//! Temporal aggregation kernels.
//!
//! Every kernel is evaluated at the signed offset `u = c - n` between an
//! event's bin coordinate `c` and a bin index `n`, in bin units. Causal
//! kernels (exponential, alpha) use `-u` as their time argument and are zero
//! for `u > 0`, so an event only feeds bins at or after it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden layer width of the learned kernel.
pub const HIDDEN: usize = 30;

/// Negative slope of the learned kernel's activations.
pub const LEAK: f64 = 0.1;

/// Default time constant for the exponential and alpha kernels, in bins.
pub const DEFAULT_TAU: f64 = 1.0;

/// Default lookup table resolution.
pub const DEFAULT_LUT_RESOLUTION: usize = 1001;

const TRILINEAR_MLP_JSON: &str = include_str!("../fixtures/trilinear_mlp.json");

#[inline]
pub fn eval_trilinear(u: f64) -> f64 {
    (1.0 - u.abs()).max(0.0)
}

/// Nearest-bin kernel on the half-open interval `[-0.5, 0.5)`.
#[inline]
pub fn eval_delta(u: f64) -> f64 {
    if (-0.5..0.5).contains(&u) {
        1.0
    } else {
        0.0
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau))
    }
}

pub fn eval_exponential(u: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(exponential(u, tau))
}

pub fn eval_alpha(u: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(alpha(u, tau))
}

#[inline]
fn exponential(u: f64, tau: f64) -> f64 {
    if u <= 0.0 {
        (u / tau).exp() / tau
    } else {
        0.0
    }
}

#[inline]
fn alpha(u: f64, tau: f64) -> f64 {
    let s = -u;
    if s >= 0.0 {
        std::f64::consts::E * s / tau * (-s / tau).exp()
    } else {
        0.0
    }
}

/// Weights of the two-hidden-layer perceptron used as a learned kernel.
///
/// Layout is row-major: `w1` is 30x1, `w2` is 30x30 (output unit by input
/// unit), `w3` is 1x30.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpWeights {
    w1: [f64; HIDDEN],
    b1: [f64; HIDDEN],
    w2: Box<[[f64; HIDDEN]; HIDDEN]>,
    b2: [f64; HIDDEN],
    w3: [f64; HIDDEN],
    b3: f64,
}

#[inline]
fn lrelu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAK * x
    }
}

impl MlpWeights {
    pub fn new(
        w1: [f64; HIDDEN],
        b1: [f64; HIDDEN],
        w2: [[f64; HIDDEN]; HIDDEN],
        b2: [f64; HIDDEN],
        w3: [f64; HIDDEN],
        b3: f64,
    ) -> Result<Self> {
        let weights = MlpWeights {
            w1,
            b1,
            w2: Box::new(w2),
            b2,
            w3,
            b3,
        };
        weights.check_finite()?;
        Ok(weights)
    }

    /// All weights and biases zero.
    pub fn zeros() -> Self {
        MlpWeights {
            w1: [0.0; HIDDEN],
            b1: [0.0; HIDDEN],
            w2: Box::new([[0.0; HIDDEN]; HIDDEN]),
            b2: [0.0; HIDDEN],
            w3: [0.0; HIDDEN],
            b3: 0.0,
        }
    }

    /// The bundled weights that reproduce the trilinear kernel exactly. This
    /// is the default learned kernel when no weight file is given.
    pub fn trilinear_init() -> Self {
        Self::from_json(TRILINEAR_MLP_JSON.as_bytes()).expect("bundled weight file is valid")
    }

    fn check_finite(&self) -> Result<()> {
        let named: [(&str, &[f64]); 5] = [
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("w3", &self.w3),
            ("b3", std::slice::from_ref(&self.b3)),
        ];
        for (name, values) in named {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteWeight(format!(
                    "{name}[{i}] = {}",
                    values[i]
                )));
            }
        }
        for (r, row) in self.w2.iter().enumerate() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteWeight(format!("w2[{r}][{c}] = {}", row[c])));
            }
        }
        Ok(())
    }

    pub fn forward(&self, u: f64) -> f64 {
        let mut h1 = [0.0; HIDDEN];
        for (h, (w, b)) in h1.iter_mut().zip(self.w1.iter().zip(&self.b1)) {
            *h = lrelu(w * u + b);
        }
        let mut out = self.b3;
        for (row, (b, w_out)) in self.w2.iter().zip(self.b2.iter().zip(&self.w3)) {
            let mut acc = *b;
            for (w, h) in row.iter().zip(&h1) {
                acc += w * h;
            }
            out += w_out * lrelu(acc);
        }
        out
    }

    /// Parses and validates a JSON weight file.
    ///
    /// Bare `NaN`, `Infinity` and `-Infinity` tokens (as written by common
    /// JSON encoders) are accepted by the parser and then rejected as
    /// [`Error::NonFiniteWeight`].
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::parse(e.valid_up_to(), "weight file is not UTF-8"))?;
        let quoted = quote_nonfinite_tokens(text);
        let file: WeightFile = serde_json::from_str(&quoted).map_err(|e| {
            let offset = line_col_to_offset(&quoted, e.line(), e.column());
            Error::parse(offset, e.to_string())
        })?;
        file.into_weights()
    }

    pub fn to_json(&self) -> String {
        let file = WeightFile {
            leak: Some(Num::F(LEAK)),
            w1: self.w1.iter().map(|v| vec![Num::F(*v)]).collect(),
            b1: self.b1.iter().map(|v| Num::F(*v)).collect(),
            w2: self
                .w2
                .iter()
                .map(|row| row.iter().map(|v| Num::F(*v)).collect())
                .collect(),
            b2: self.b2.iter().map(|v| Num::F(*v)).collect(),
            w3: vec![self.w3.iter().map(|v| Num::F(*v)).collect()],
            b3: vec![Num::F(self.b3)],
        };
        serde_json::to_string(&file).expect("weights serialize")
    }
}

/// Pulls a weight file in from disk.
pub fn load_mlp_weights(bytes: &[u8]) -> Result<MlpWeights> {
    MlpWeights::from_json(bytes)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    F(f64),
    S(String),
}

impl Num {
    fn value(&self) -> Result<f64> {
        match self {
            Num::F(v) => Ok(*v),
            Num::S(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "Infinity" => Ok(f64::INFINITY),
                "-Infinity" => Ok(f64::NEG_INFINITY),
                other => Err(Error::parse(
                    0,
                    format!("expected a number, found string {other:?}"),
                )),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFile {
    #[serde(default)]
    leak: Option<Num>,
    w1: Vec<Vec<Num>>,
    b1: Vec<Num>,
    w2: Vec<Vec<Num>>,
    b2: Vec<Num>,
    w3: Vec<Vec<Num>>,
    b3: Vec<Num>,
}

fn vector<const N: usize>(name: &str, v: &[Num]) -> Result<[f64; N]> {
    if v.len() != N {
        return Err(Error::ShapeMismatch(format!(
            "{name} has length {}, expected {N}",
            v.len()
        )));
    }
    let mut out = [0.0; N];
    for (o, n) in out.iter_mut().zip(v) {
        *o = n.value()?;
    }
    Ok(out)
}

fn matrix<const R: usize, const C: usize>(name: &str, m: &[Vec<Num>]) -> Result<[[f64; C]; R]> {
    if m.len() != R {
        return Err(Error::ShapeMismatch(format!(
            "{name} has {} rows, expected {R}",
            m.len()
        )));
    }
    let mut out = [[0.0; C]; R];
    for (r, (o, row)) in out.iter_mut().zip(m).enumerate() {
        *o = vector::<C>(&format!("{name}[{r}]"), row)?;
    }
    Ok(out)
}

impl WeightFile {
    fn into_weights(self) -> Result<MlpWeights> {
        if let Some(leak) = &self.leak {
            let leak = leak.value()?;
            if leak != LEAK {
                return Err(Error::ShapeMismatch(format!(
                    "leak must be {LEAK}, found {leak}"
                )));
            }
        }
        let w1 = matrix::<HIDDEN, 1>("w1", &self.w1)?;
        let w3 = matrix::<1, HIDDEN>("w3", &self.w3)?;
        MlpWeights::new(
            w1.map(|r| r[0]),
            vector("b1", &self.b1)?,
            matrix("w2", &self.w2)?,
            vector("b2", &self.b2)?,
            w3[0],
            vector::<1>("b3", &self.b3)?[0],
        )
    }
}

/// Wraps bare non-finite literals that sit outside JSON strings in quotes.
fn quote_nonfinite_tokens(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(ch) = rest.chars().next() {
        if in_string {
            out.push(ch);
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            rest = &rest[ch.len_utf8()..];
            continue;
        }
        if ch == '"' {
            in_string = true;
        }
        let token = ["-Infinity", "Infinity", "NaN"]
            .into_iter()
            .find(|tok| rest.starts_with(tok));
        if let Some(tok) = token {
            out.push('"');
            out.push_str(tok);
            out.push('"');
            rest = &rest[tok.len()..];
        } else {
            out.push(ch);
            rest = &rest[ch.len_utf8()..];
        }
    }
    out
}

fn line_col_to_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    line_start + column.saturating_sub(1)
}

/// Uniformly sampled kernel with linear interpolation between samples and
/// zero outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    u_min: f64,
    u_max: f64,
    values: Vec<f64>,
    // (R - 1) / (u_max - u_min)
    scale: f64,
}

impl LookupTable {
    pub fn new(u_min: f64, u_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(u_min.is_finite() && u_max.is_finite() && u_max > u_min) {
            return Err(Error::InvalidRange { u_min, u_max });
        }
        if values.len() < 2 {
            return Err(Error::InvalidResolution(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteWeight(format!(
                "lookup value {i} = {}",
                values[i]
            )));
        }
        let scale = (values.len() - 1) as f64 / (u_max - u_min);
        Ok(LookupTable {
            u_min,
            u_max,
            values,
            scale,
        })
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Position of sample `i`.
    pub fn sample_point(&self, i: usize) -> f64 {
        sample_point(self.u_min, self.u_max, self.values.len(), i)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if !(self.u_min..=self.u_max).contains(&u) {
            return 0.0;
        }
        let pos = (u - self.u_min) * self.scale;
        let last = self.values.len() - 1;
        let i = (pos.floor() as usize).min(last - 1);
        let frac = (pos - i as f64).clamp(0.0, 1.0);
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

#[inline]
fn sample_point(u_min: f64, u_max: f64, resolution: usize, i: usize) -> f64 {
    u_min + i as f64 * (u_max - u_min) / (resolution - 1) as f64
}

/// Samples `kernel` at `resolution` evenly spaced offsets in `[u_min, u_max]`.
pub fn build_lookup(
    kernel: &KernelSpec,
    u_min: f64,
    u_max: f64,
    resolution: usize,
) -> Result<LookupTable> {
    if !(u_min.is_finite() && u_max.is_finite() && u_max > u_min) {
        return Err(Error::InvalidRange { u_min, u_max });
    }
    if resolution < 2 {
        return Err(Error::InvalidResolution(resolution));
    }
    if matches!(kernel, KernelSpec::Lookup(_)) {
        return Err(Error::InvalidKernel(
            "cannot build a lookup table from a lookup table".into(),
        ));
    }
    kernel.validate()?;
    let values = (0..resolution)
        .map(|i| kernel.eval(sample_point(u_min, u_max, resolution, i)))
        .collect();
    LookupTable::new(u_min, u_max, values)
}

/// Symmetric lookup range `[-k, k]` for a grid of `bins` temporal bins.
///
/// `k` is the smallest half-width covering every reachable offset
/// (`bins - 1`) for which the sample spacing divides one bin, so integer
/// offsets land on samples and kinks there are reproduced exactly. Falls
/// back to `bins - 1` when no such width exists.
pub fn default_lookup_half_width(bins: usize, resolution: usize) -> f64 {
    let reach = bins.saturating_sub(1).max(1);
    let intervals = resolution.saturating_sub(1);
    (reach..=intervals / 2)
        .find(|k| intervals.is_multiple_of(2 * k))
        .unwrap_or(reach) as f64
}

/// Builds the default lookup table for `kernel` on a `bins`-bin grid.
pub fn default_lookup(kernel: &KernelSpec, bins: usize, resolution: usize) -> Result<LookupTable> {
    let k = default_lookup_half_width(bins, resolution);
    build_lookup(kernel, -k, k, resolution)
}

pub fn lookup_eval(table: &LookupTable, u: f64) -> f64 {
    table.eval(u)
}

/// Aggregation kernel choice.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum KernelSpec {
    Delta,
    #[default]
    Trilinear,
    Exponential {
        tau: f64,
    },
    Alpha {
        tau: f64,
    },
    Mlp(Arc<MlpWeights>),
    Lookup(Arc<LookupTable>),
}

impl KernelSpec {
    pub fn exponential(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(KernelSpec::Exponential { tau })
    }

    pub fn alpha(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(KernelSpec::Alpha { tau })
    }

    pub fn mlp(weights: MlpWeights) -> Self {
        KernelSpec::Mlp(Arc::new(weights))
    }

    pub fn lookup(table: LookupTable) -> Self {
        KernelSpec::Lookup(Arc::new(table))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Exponential { tau } | KernelSpec::Alpha { tau } => check_tau(*tau),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Delta => "delta",
            KernelSpec::Trilinear => "trilinear",
            KernelSpec::Exponential { .. } => "exponential",
            KernelSpec::Alpha { .. } => "alpha",
            KernelSpec::Mlp(_) => "mlp",
            KernelSpec::Lookup(_) => "lookup",
        }
    }

    /// One of the closed-form kernels (not learned, not tabulated).
    pub fn is_handcrafted(&self) -> bool {
        matches!(
            self,
            KernelSpec::Delta
                | KernelSpec::Trilinear
                | KernelSpec::Exponential { .. }
                | KernelSpec::Alpha { .. }
        )
    }

    /// Kernel weight at offset `u`. Assumes the spec was validated.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            KernelSpec::Delta => eval_delta(u),
            KernelSpec::Trilinear => eval_trilinear(u),
            KernelSpec::Exponential { tau } => exponential(u, *tau),
            KernelSpec::Alpha { tau } => alpha(u, *tau),
            KernelSpec::Mlp(w) => w.forward(u),
            KernelSpec::Lookup(t) => t.eval(u),
        }
    }

    /// Bins `lo..hi` outside of which the kernel is zero for an event at bin
    /// coordinate `c`. Bounds carry a one-bin margin, so rounding in `c - n`
    /// can never exclude a bin the kernel would weight.
    #[inline]
    pub fn support(&self, c: f64, bins: usize) -> (usize, usize) {
        let clip = |lo: f64, hi: f64| -> (usize, usize) {
            let lo = lo.max(0.0).min(bins as f64) as usize;
            let hi = hi.max(0.0).min(bins as f64) as usize;
            (lo, hi.max(lo))
        };
        match self {
            KernelSpec::Delta => {
                let n = (c + 0.5).floor();
                clip(n - 1.0, n + 2.0)
            }
            KernelSpec::Trilinear => {
                let n = c.floor();
                clip(n - 1.0, n + 3.0)
            }
            KernelSpec::Exponential { .. } | KernelSpec::Alpha { .. } => {
                clip(c.floor() - 1.0, bins as f64)
            }
            KernelSpec::Lookup(t) => clip((c - t.u_max).floor() - 1.0, (c - t.u_min).ceil() + 2.0),
            KernelSpec::Mlp(_) => (0, bins),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Exponential { tau } | KernelSpec::Alpha { tau } => {
                write!(f, "{}(tau={tau})", self.name())
            }
            KernelSpec::Lookup(t) => write!(
                f,
                "lookup(range=[{}, {}], resolution={})",
                t.u_min,
                t.u_max,
                t.values.len()
            ),
            _ => f.write_str(self.name()),
        }
    }
}
