//! Portable xorshift64* generator.
//!
//! The seed is expanded through one round of splitmix64 so that small or zero
//! seeds still give a non-zero, well-mixed state. All state arithmetic is
//! integer; floats are produced from the top 24 bits of each output, which
//! keeps the sequence bit-identical across platforms.

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const XORSHIFT_MULT: u64 = 0x2545_F491_4F6C_DD1D;

/// Stream ids used to derive independent generators from one user seed.
pub mod stream {
    pub const FIRE: u64 = 0;
    pub const NOISE: u64 = 1;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let state = splitmix64(seed);
        // xorshift has a fixed point at zero
        Self {
            state: if state == 0 { SPLITMIX_GAMMA } else { state },
        }
    }

    /// Generator for a named sub-stream of `seed` (see [`stream`]).
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        Self::new(seed ^ splitmix64(stream.wrapping_mul(SPLITMIX_GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(XORSHIFT_MULT)
    }

    /// Uniform float in `[0, 1)` with 24 bits of precision.
    pub fn next_f32(&mut self) -> f32 {
        (self.next_u64() >> 40) as f32 * (1.0 / (1u32 << 24) as f32)
    }
}
