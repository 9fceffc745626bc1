use std::fmt::Write as _;

use super::Plane;
use crate::error::{Error, Result};
use crate::grid::ChannelGrid;

/// Binary mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub height: usize,
    pub width: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::Config(format!(
                "mask {height}x{width} needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    /// Pixels strictly above 0.5.
    pub fn from_plane(plane: &Plane) -> Self {
        Self {
            height: plane.height,
            width: plane.width,
            data: plane.data.iter().map(|&v| v > 0.5).collect(),
        }
    }

    pub fn to_plane(&self) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Run-length text: `rle <H> <W>` then alternating run lengths on one
    /// line, starting with a (possibly empty) run of `false`.
    pub fn to_rle(&self) -> String {
        let mut out = format!("rle {} {}\n", self.height, self.width);
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &b in &self.data {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        for (i, r) in runs.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{r}").unwrap();
        }
        out.push('\n');
        out
    }

    pub fn from_rle(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("malformed rle: {m}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
        let (height, width) = match header.as_slice() {
            ["rle", h, w] => (
                h.parse::<usize>().map_err(|_| bad("height"))?,
                w.parse::<usize>().map_err(|_| bad("width"))?,
            ),
            _ => return Err(bad("header")),
        };
        let mut data = Vec::with_capacity(height * width);
        let mut value = false;
        for tok in lines.next().unwrap_or("").split_whitespace() {
            let run: usize = tok.parse().map_err(|_| bad("run length"))?;
            if data.len() + run > height * width {
                return Err(bad("runs exceed mask size"));
            }
            data.extend(std::iter::repeat_n(value, run));
            value = !value;
        }
        if data.len() != height * width {
            return Err(bad("runs do not cover mask"));
        }
        Ok(Self { height, width, data })
    }
}

/// Soft segmentation in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMask {
    pub soft: Plane,
}

impl SegMask {
    pub fn binary(&self) -> Mask {
        Mask::from_plane(&self.soft)
    }
}

/// Raw depth output plus a min-max normalized view.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub raw: Plane,
}

impl DepthMap {
    pub fn new(raw: Plane) -> Result<Self> {
        if raw.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("depth map contains non-finite values".into()));
        }
        Ok(Self { raw })
    }

    /// `(d - min) / (max - min)`; a flat map normalizes to zeros.
    pub fn normalized(&self) -> Plane {
        let (lo, hi) = self
            .raw
            .data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        let data = if span > 0.0 {
            self.raw.data.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
        } else {
            vec![0.0; self.raw.data.len()]
        };
        Plane {
            height: self.raw.height,
            width: self.raw.width,
            data,
        }
    }
}

fn logistic(v: f32) -> f32 {
    1.0 / (1.0 + (-v).exp())
}

fn output_plane(grid: &ChannelGrid) -> Plane {
    Plane {
        height: grid.height(),
        width: grid.width(),
        data: grid.output_plane(),
    }
}

/// Logistic squashing of the output channel.
pub fn extract_segmentation(grid: &ChannelGrid) -> SegMask {
    let mut soft = output_plane(grid);
    for v in &mut soft.data {
        *v = logistic(*v);
    }
    SegMask { soft }
}

pub fn extract_depth(grid: &ChannelGrid) -> DepthMap {
    DepthMap { raw: output_plane(grid) }
}
