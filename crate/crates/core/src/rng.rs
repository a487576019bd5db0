//! Seed handling. Every random stream is derived from a top-level seed and a
//! label, so independent computations never share generator state.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derive a child seed from a label and an index.
    pub fn derive(self, tag: &str, index: u64) -> RngSeed {
        let mut h = splitmix64(self.0 ^ fnv1a(tag.as_bytes()));
        h = splitmix64(h ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        RngSeed(h)
    }

    pub fn rng(self, tag: &str, index: u64) -> Stream {
        Stream(ChaCha8Rng::seed_from_u64(self.derive(tag, index).0))
    }
}

/// A labeled random stream.
pub struct Stream(ChaCha8Rng);

impl Stream {
    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    /// Uniform direction on the unit sphere `S^{d-1}`, written into `out`.
    pub fn unit_vector(&mut self, out: &mut [f64]) {
        loop {
            let mut norm2 = 0.0;
            for x in out.iter_mut() {
                *x = self.normal();
                norm2 += *x * *x;
            }
            if norm2 > 1e-300 {
                let inv = 1.0 / libm::sqrt(norm2);
                out.iter_mut().for_each(|x| *x *= inv);
                return;
            }
        }
    }

    /// Uniform point in the ball of radius `radius` centered at `center`.
    pub fn in_ball(&mut self, center: &[f64], radius: f64, out: &mut [f64]) {
        let d = center.len();
        self.unit_vector(out);
        let rho = radius * libm::pow(self.uniform_open0(), 1.0 / d as f64);
        for (x, c) in out.iter_mut().zip(center) {
            *x = c + rho * *x;
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
