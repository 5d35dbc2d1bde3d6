//! Counter-based deterministic randomness.
//!
//! Every draw is a pure hash of (seed, stream, index, draw), so noise fields
//! are reproducible bit-for-bit and independent of evaluation order or
//! threading.

use articugeo_core::linalg::Vec3;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stateless keyed RNG.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    #[inline]
    fn word(&self, stream: u64, index: u64, draw: u64) -> u64 {
        let a = splitmix64(self.seed ^ splitmix64(stream));
        let b = splitmix64(a ^ splitmix64(index));
        splitmix64(b ^ draw)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn uniform(&self, stream: u64, index: u64, draw: u64) -> f64 {
        (self.word(stream, index, draw) >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    #[inline]
    pub fn gaussian(&self, stream: u64, index: u64, draw: u64) -> f64 {
        let u1 = 1.0 - self.uniform(stream, index, 2 * draw); // (0, 1]
        let u2 = self.uniform(stream, index, 2 * draw + 1);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Deterministic unit vector orthogonal to `n` (|n| = 1).
    pub fn unit_perpendicular(&self, stream: u64, index: u64, n: Vec3<f64>) -> Vec3<f64> {
        for attempt in 0..8 {
            let g = Vec3::new(
                self.gaussian(stream, index, 10 + 3 * attempt),
                self.gaussian(stream, index, 11 + 3 * attempt),
                self.gaussian(stream, index, 12 + 3 * attempt),
            );
            let perp = g - n.scale(g.dot(n));
            if let Some(u) = perp.normalized(1e-12) {
                return u;
            }
        }
        // n cannot be parallel to both axes
        let fallback = if n.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        (fallback - n.scale(fallback.dot(n)))
            .normalized(1e-12)
            .expect("fallback perpendicular")
    }
}
