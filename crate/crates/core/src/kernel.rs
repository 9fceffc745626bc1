//! Transposed matrix-vector product used by the MLP.
//!
//! Both layers store their weights row-major with one row per *input*, so the
//! product needed at inference time is `out = Aᵀ · x`. The scalar path walks
//! one output at a time down a column; the vector path sweeps whole rows and
//! keeps `LANES` independent accumulators, which the compiler lowers to SIMD
//! on every target it knows. Per output entry both paths add terms in the same
//! order, so results agree to the bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LANES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Scalar,
    #[default]
    Vector,
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(Kernel::Scalar),
            "vector" => Ok(Kernel::Vector),
            other => Err(format!("unknown kernel {other:?} (expected scalar|vector)")),
        }
    }
}

/// Borrowed row-major matrix.
#[derive(Debug, Clone, Copy)]
pub struct MatRef<'a> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f32],
}

impl<'a> MatRef<'a> {
    pub fn new(rows: usize, cols: usize, data: &'a [f32]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Config(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }
}

impl Kernel {
    /// `Aᵀ · x`, allocating the result.
    pub fn matvec(self, a: MatRef<'_>, x: &[f32]) -> Result<Vec<f32>> {
        let mut out = vec![0.0; a.cols];
        self.matvec_into(a, x, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(self, a: MatRef<'_>, x: &[f32], out: &mut [f32]) -> Result<()> {
        if x.len() != a.rows || out.len() != a.cols || a.data.len() != a.rows * a.cols {
            return Err(Error::Config(format!(
                "matvec shape mismatch: {}x{} matrix, input {}, output {}",
                a.rows,
                a.cols,
                x.len(),
                out.len()
            )));
        }
        self.apply(a.data, a.cols, x, out);
        Ok(())
    }

    /// Unchecked inner routine; callers guarantee the shapes.
    #[inline]
    pub(crate) fn apply(self, a: &[f32], cols: usize, x: &[f32], out: &mut [f32]) {
        match self {
            Kernel::Scalar => matvec_scalar(a, cols, x, out),
            Kernel::Vector => matvec_lanes(a, cols, x, out),
        }
    }
}

fn matvec_scalar(a: &[f32], cols: usize, x: &[f32], out: &mut [f32]) {
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0f32;
        for (i, &xi) in x.iter().enumerate() {
            acc += xi * a[i * cols + j];
        }
        *o = acc;
    }
}

fn matvec_lanes(a: &[f32], cols: usize, x: &[f32], out: &mut [f32]) {
    let body = cols - cols % LANES;
    let (out_body, out_tail) = out.split_at_mut(body);

    for (chunk_idx, out_chunk) in out_body.chunks_exact_mut(LANES).enumerate() {
        let base = chunk_idx * LANES;
        let mut acc = [0.0f32; LANES];
        for (i, &xi) in x.iter().enumerate() {
            let row = &a[i * cols + base..i * cols + base + LANES];
            for l in 0..LANES {
                acc[l] += xi * row[l];
            }
        }
        out_chunk.copy_from_slice(&acc);
    }

    for (t, o) in out_tail.iter_mut().enumerate() {
        let j = body + t;
        let mut acc = 0.0f32;
        for (i, &xi) in x.iter().enumerate() {
            acc += xi * a[i * cols + j];
        }
        *o = acc;
    }
}
