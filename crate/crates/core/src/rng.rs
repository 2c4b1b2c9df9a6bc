//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`], a
//! xoshiro256++ generator whose 256-bit state is filled from a 64-bit seed by
//! splitmix64 (the reference seeding procedure of xoshiro). Realization seeds
//! are derived from a master seed by [`derive_seed`]. Both steps, together with
//! the uniform and Box–Muller conversions below, are fixed bit-exactly so
//! that ensembles can be regenerated in any language:
//!
//! ```text
//! derive_seed(m, i):
//!     z = m + (i + 1) * 0x9E3779B97F4A7C15          (wrapping u64)
//!     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     return z ^ (z >> 31)
//!
//! uniform():   ((next_u64() >> 11) + 0.5) * 2^-53          in (0, 1)
//! complex_gaussian():
//!     u1 = uniform(); u2 = uniform()
//!     r = sqrt(-2 ln u1); t = 2 pi u2
//!     return (r cos t + i r sin t) / sqrt(2)
//! unit_phase(): t = 2 pi uniform(); return cos t + i sin t
//! ```

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Mixes a master seed and a realization index into an independent 64-bit seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct Stream {
    inner: Xoshiro256PlusPlus,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform variate on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard complex Gaussian: independent real and imaginary parts of variance 1/2.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = TAU * u2;
        Complex64::new(r * t.cos(), r * t.sin()) * FRAC_1_SQRT_2
    }

    /// Real standard normal (variance 1), one Box–Muller pair per call.
    pub fn normal(&mut self) -> f64 {
        self.complex_gaussian().re * std::f64::consts::SQRT_2
    }

    pub fn unit_phase(&mut self) -> Complex64 {
        let t = TAU * self.uniform();
        Complex64::new(t.cos(), t.sin())
    }

    /// Uniform point in the open disk of radius `r`.
    pub fn point_in_disk(&mut self, r: f64) -> Complex64 {
        let rho = r * self.uniform().sqrt();
        self.unit_phase() * rho
    }

    /// Poisson variate by inversion (adequate for the moderate means used here).
    pub fn poisson(&mut self, mean: f64) -> usize {
        if mean <= 0.0 {
            return 0;
        }
        if mean > 500.0 {
            let x = mean + mean.sqrt() * self.normal();
            return x.round().max(0.0) as usize;
        }
        // Multiply uniforms in log space to stay clear of underflow.
        let mut acc = 0.0;
        let mut k = 0;
        loop {
            acc += self.uniform().ln();
            if acc < -mean {
                return k;
            }
            k += 1;
        }
    }
}
