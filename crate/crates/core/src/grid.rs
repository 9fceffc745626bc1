use crate::error::{Error, Result};

/// Number of leading channels holding the RGB input.
pub const RGB_CHANNELS: usize = 3;
/// Smallest usable channel count: RGB, one hidden channel, one output.
pub const MIN_CHANNELS: usize = RGB_CHANNELS + 2;

/// `H × W × C` float state, row-major with the channel index varying fastest.
///
/// Channels `0..3` hold the input image, channel `C-1` the output, and the
/// channels in between are hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ChannelGrid {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::from_vec(height, width, channels, vec![0.0; height * width * channels])
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels < MIN_CHANNELS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_CHANNELS} channels, got {channels}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::Config(format!("empty grid {height}x{width}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::Config(format!(
                "grid data has {} entries, expected {height}x{width}x{channels}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("non-finite grid value at flat index {i}")));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn cell_count(&self) -> usize {
        self.height * self.width
    }

    pub fn output_channel(&self) -> usize {
        self.channels - 1
    }

    /// Range of hidden channel indices (`3..C-1`).
    pub fn hidden_channels(&self) -> std::ops::Range<usize> {
        RGB_CHANNELS..self.channels - 1
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[self.index(y, x, c)]
    }

    /// Sets one entry. RGB writes are allowed here; the engine never does them.
    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f32) {
        let i = self.index(y, x, c);
        self.data[i] = value;
    }

    pub fn cell(&self, y: usize, x: usize) -> &[f32] {
        let start = self.index(y, x, 0);
        &self.data[start..start + self.channels]
    }

    /// One channel as a dense `H × W` plane.
    pub fn channel_plane(&self, c: usize) -> Vec<f32> {
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    pub fn output_plane(&self) -> Vec<f32> {
        self.channel_plane(self.output_channel())
    }
}
