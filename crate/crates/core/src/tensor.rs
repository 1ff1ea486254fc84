//! Dense row-major tensors with named axes, and axis projections.

use std::fmt;

use crate::error::{Error, Result};

/// Named tensor axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Polarity,
    Bin,
    /// Polarity and bin flattened together, positive polarity first.
    Channel,
    Row,
    Column,
    /// Positional axis of a tensor read without axis names.
    Dim(usize),
}

impl Axis {
    pub fn name(self) -> String {
        match self {
            Axis::Polarity => "polarity".into(),
            Axis::Bin => "bin".into(),
            Axis::Channel => "channel".into(),
            Axis::Row => "row".into(),
            Axis::Column => "column".into(),
            Axis::Dim(i) => format!("dim{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    Float32,
    Float64,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::Float32 => "f32",
            Precision::Float64 => "f64",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reducer {
    Sum,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        match self {
            TensorData::F32(v) => v[i] as f64,
            TensorData::F64(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    axes: Vec<Axis>,
    shape: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(axes: Vec<Axis>, shape: Vec<usize>, data: TensorData) -> Result<Self> {
        if axes.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} axis names for a rank-{} shape",
                axes.len(),
                shape.len()
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { axes, shape, data })
    }

    /// Tensor with positional axis names.
    pub fn unnamed(shape: Vec<usize>, data: TensorData) -> Result<Self> {
        let axes = (0..shape.len()).map(Axis::Dim).collect();
        Tensor::new(axes, shape, data)
    }

    pub fn zeros(axes: Vec<Axis>, shape: Vec<usize>, precision: Precision) -> Self {
        let accum = vec![0.0; shape.iter().product()];
        Tensor::from_f64(axes, shape, accum, precision)
    }

    /// Rounds f64 accumulators to `precision`.
    pub(crate) fn from_f64(
        axes: Vec<Axis>,
        shape: Vec<usize>,
        values: Vec<f64>,
        precision: Precision,
    ) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        let data = match precision {
            Precision::Float64 => TensorData::F64(values),
            Precision::Float32 => TensorData::F32(values.into_iter().map(|v| v as f32).collect()),
        };
        Tensor { axes, shape, data }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn precision(&self) -> Precision {
        match self.data {
            TensorData::F32(_) => Precision::Float32,
            TensorData::F64(_) => Precision::Float64,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Value at a flat row-major index, widened to f64.
    #[inline]
    pub fn value(&self, flat: usize) -> f64 {
        self.data.get(flat)
    }

    /// Value at a multi-index.
    pub fn at(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.shape.len(), "index rank");
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.shape) {
            assert!(i < d, "index {index:?} out of shape {:?}", self.shape);
            flat = flat * d + i;
        }
        self.data.get(flat)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.data {
            TensorData::F32(v) => v.iter().map(|&x| x as f64).collect(),
            TensorData::F64(v) => v.clone(),
        }
    }

    pub fn sum(&self) -> f64 {
        (0..self.len()).map(|i| self.data.get(i)).sum()
    }

    pub fn axis_position(&self, axis: Axis) -> Result<usize> {
        self.axes.iter().position(|&a| a == axis).ok_or_else(|| {
            Error::UnknownAxis(format!("{} not in {}", axis.name(), self.axes_label()))
        })
    }

    fn axes_label(&self) -> String {
        let names: Vec<_> = self.axes.iter().map(|a| a.name()).collect();
        format!("[{}]", names.join(", "))
    }

    /// Same values under a new shape with the same element count.
    pub fn reshape(self, axes: Vec<Axis>, shape: Vec<usize>) -> Result<Self> {
        Tensor::new(axes, shape, self.data)
    }

    /// Reduces along `axis`, dropping it and keeping the remaining axes in
    /// order. Sums accumulate in f64 and round once to the tensor precision.
    pub fn project(&self, axis: Axis, reducer: Reducer) -> Result<Tensor> {
        let pos = self.axis_position(axis)?;
        let outer: usize = self.shape[..pos].iter().product();
        let len = self.shape[pos];
        let inner: usize = self.shape[pos + 1..].iter().product();

        let mut out = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * len * inner;
            for i in 0..inner {
                let mut acc = self.data.get(base + i);
                for k in 1..len {
                    let v = self.data.get(base + k * inner + i);
                    acc = match reducer {
                        Reducer::Sum => acc + v,
                        Reducer::Max => acc.max(v),
                    };
                }
                out.push(acc);
            }
        }

        let mut axes = self.axes.clone();
        let mut shape = self.shape.clone();
        axes.remove(pos);
        shape.remove(pos);
        Ok(Tensor::from_f64(axes, shape, out, self.precision()))
    }

    /// Largest absolute elementwise difference; `None` if shapes differ.
    pub fn max_abs_diff(&self, other: &Tensor) -> Option<f64> {
        if self.shape != other.shape {
            return None;
        }
        Some(
            (0..self.len())
                .map(|i| (self.data.get(i) - other.data.get(i)).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Free-function form of [`Tensor::project`].
pub fn project(t: &Tensor, axis: Axis, reducer: Reducer) -> Result<Tensor> {
    t.project(axis, reducer)
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Tensor{} {:?} {}",
            self.axes_label(),
            self.shape,
            self.precision().name()
        )
    }
}
