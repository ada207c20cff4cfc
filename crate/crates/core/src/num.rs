//! Float math shims, angle arithmetic and a seeded RNG.
//!
//! Transcendental functions route through `std` or `libm` depending on the
//! build, so the rest of the crate stays `no_std`-clean.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub use core::f64::consts::PI;

macro_rules! shim1 {
    ($name:ident) => {
        #[inline]
        pub fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            {
                x.$name()
            }
            #[cfg(not(feature = "std"))]
            {
                libm::$name(x)
            }
        }
    };
}

shim1!(sin);
shim1!(cos);
shim1!(tan);
shim1!(exp);
shim1!(sqrt);
shim1!(floor);
shim1!(round);

#[inline]
pub fn ln(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.ln()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::log(x)
    }
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        y.atan2(x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::atan2(y, x)
    }
}

#[inline]
pub fn log10(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.log10()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::log10(x)
    }
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * (PI / 180.0)
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad * (180.0 / PI)
}

#[inline]
pub fn sin_deg(deg: f64) -> f64 {
    sin(deg_to_rad(deg))
}

#[inline]
pub fn cos_deg(deg: f64) -> f64 {
    cos(deg_to_rad(deg))
}

#[inline]
pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * (PI / 30.0)
}

#[inline]
pub fn rad_s_to_rpm(w: f64) -> f64 {
    w * (30.0 / PI)
}

/// Wrap an angle in degrees onto `[0, 360)`.
#[inline]
pub fn wrap360(deg: f64) -> f64 {
    let w = deg - 360.0 * floor(deg / 360.0);
    // floor(x/360) can round such that w == 360.0 for inputs just below a
    // multiple of 360; fold that back onto the half-open interval.
    if w >= 360.0 {
        w - 360.0
    } else {
        w
    }
}

/// Minimal signed difference `a - b` on the 360-degree circle, in (-180, 180].
#[inline]
pub fn wrapped_diff_deg(a: f64, b: f64) -> f64 {
    let d = wrap360(a - b);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Deterministic random source used by every stochastic stage.
///
/// Wraps ChaCha8 seeded from a `u64`; Gaussian draws use Box-Muller with a
/// cached spare so the stream is identical across platforms.
pub struct Rng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Derive an independent stream, e.g. one per evaluation speed.
    pub fn fork(&self, stream: u64) -> Self {
        let mut inner = self.inner.clone();
        inner.set_stream(stream);
        Self { inner, spare: None }
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Standard normal draw (Box-Muller).
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] so ln never sees zero.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = sqrt(-2.0 * ln(u1));
        let th = 2.0 * PI * u2;
        self.spare = Some(r * sin(th));
        r * cos(th)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let n = items.len();
        for i in (1..n).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}
