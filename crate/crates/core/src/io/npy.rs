//! NPY array files.
//!
//! The writer emits version 1.0 headers laid out exactly as numpy's own
//! writer does (same dict text, growth padding and 64-byte alignment), so
//! files are byte-identical to `numpy.save` output. The reader accepts
//! versions 1.0 and 2.0 with dtype `<f4` or `<f8` in C order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Tensor, TensorData};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;
// numpy leaves room for the first dimension to grow to this many digits.
const GROWTH_AXIS_MAX_DIGITS: usize = 21;

fn shape_repr(shape: &[usize]) -> String {
    match shape {
        [] => "()".into(),
        [n] => format!("({n},)"),
        _ => {
            let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
            format!("({})", dims.join(", "))
        }
    }
}

fn header_bytes(descr: &str, shape: &[usize]) -> Vec<u8> {
    let mut dict = format!(
        "{{'descr': '{descr}', 'fortran_order': False, 'shape': {}, }}",
        shape_repr(shape)
    );
    if let Some(first) = shape.first() {
        let digits = first.to_string().len();
        dict.push_str(&" ".repeat(GROWTH_AXIS_MAX_DIGITS.saturating_sub(digits)));
    }
    let hlen = dict.len() + 1;
    let pad = ALIGN - (MAGIC.len() + 2 + 2 + hlen) % ALIGN;

    let mut out = Vec::with_capacity(MAGIC.len() + 4 + hlen + pad);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&((hlen + pad) as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.resize(out.len() + pad, b' ');
    out.push(b'\n');
    out
}

/// Serializes `t` as NPY v1.0 bytes.
pub fn encode_npy(t: &Tensor) -> Vec<u8> {
    let (descr, width) = match t.data() {
        TensorData::F32(_) => ("<f4", 4),
        TensorData::F64(_) => ("<f8", 8),
    };
    let mut out = header_bytes(descr, t.shape());
    out.reserve(width * t.len());
    match t.data() {
        TensorData::F32(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::F64(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    out
}

pub fn write_tensor_npy(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_npy(t))?;
    Ok(())
}

/// Parses NPY bytes into a tensor with positional axes.
pub fn read_tensor_npy(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(Error::parse(0, "missing NPY magic"));
    }
    let (header_len, start) = match bytes[6] {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 if bytes.len() >= 12 => (
            u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize,
            12,
        ),
        v => {
            return Err(Error::parse(
                6,
                format!("unsupported NPY version {v}.{}", bytes[7]),
            ))
        }
    };
    let end = start + header_len;
    if bytes.len() < end {
        return Err(Error::parse(bytes.len(), "header extends past end of file"));
    }
    let dict = std::str::from_utf8(&bytes[start..end])
        .map_err(|e| Error::parse(start + e.valid_up_to(), "header is not text"))?;
    let header = HeaderDict::parse(dict, start)?;
    if header.fortran_order {
        return Err(Error::UnsupportedOrder);
    }

    let count: usize = header.shape.iter().product();
    let width = match header.descr.as_str() {
        "<f4" => 4,
        "<f8" => 8,
        other => return Err(Error::UnsupportedDtype(other.to_string())),
    };
    let payload = &bytes[end..];
    if payload.len() != count * width {
        return Err(Error::parse(
            end,
            format!(
                "payload has {} bytes, shape {:?} needs {}",
                payload.len(),
                header.shape,
                count * width
            ),
        ));
    }
    let data = if width == 4 {
        TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect(),
        )
    } else {
        TensorData::F64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        )
    };
    Tensor::unnamed(header.shape, data)
}

struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

impl HeaderDict {
    /// Parses the python dict literal. Only the three keys numpy writes are
    /// understood.
    fn parse(text: &str, base: usize) -> Result<Self> {
        let err = |msg: &str| Error::parse(base, format!("{msg} in header {:?}", text.trim_end()));
        let value_of = |key: &str| -> Result<&str> {
            let needle = format!("'{key}':");
            let at = text
                .find(&needle)
                .ok_or_else(|| err(&format!("missing '{key}'")))?;
            Ok(text[at + needle.len()..].trim_start())
        };

        let descr = value_of("descr")?;
        let quote = descr.chars().next().filter(|c| *c == '\'' || *c == '"');
        let descr = match quote {
            Some(q) => {
                let rest = &descr[1..];
                rest[..rest.find(q).ok_or_else(|| err("unterminated descr"))?].to_string()
            }
            None => return Err(err("descr is not a string")),
        };

        let order = value_of("fortran_order")?;
        let fortran_order = if order.starts_with("True") {
            true
        } else if order.starts_with("False") {
            false
        } else {
            return Err(err("fortran_order is not a bool"));
        };

        let shape = value_of("shape")?;
        if !shape.starts_with('(') {
            return Err(err("shape is not a tuple"));
        }
        let close = shape.find(')').ok_or_else(|| err("unterminated shape"))?;
        let shape = shape[1..close]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.trim_end_matches('L')
                    .parse::<usize>()
                    .map_err(|_| err("bad dimension"))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(HeaderDict {
            descr,
            fortran_order,
            shape,
        })
    }
}
