//! Link parameters shared by the closed-form and simulated paths.
//!
//! User 1 is the near (strong channel) user carrying QPSK with energy
//! `eps1 = alpha * ps`; user 2 is the far user carrying BPSK with energy
//! `eps2 = (1 - alpha) * ps`. Bit 1 maps to the positive axis everywhere.

use crate::error::{Error, Result};

/// Power allocation between the two users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    alpha: f64,
    ps: f64,
}

impl PowerSplit {
    /// `alpha` is the near user's share of the total power `ps`.
    ///
    /// The closed interval `[0, 1]` is accepted so the single-user limits can
    /// be evaluated exactly; configurations coming from users are restricted
    /// to the open interval by the front end.
    pub fn new(alpha: f64, ps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !ps.is_finite() || ps < 0.0 {
            return Err(Error::Config(format!("total power must be finite and >= 0, got {ps}")));
        }
        Ok(Self { alpha, ps })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ps(&self) -> f64 {
        self.ps
    }

    /// Near-user symbol energy.
    pub fn eps1(&self) -> f64 {
        self.alpha * self.ps
    }

    /// Far-user symbol energy.
    pub fn eps2(&self) -> f64 {
        (1.0 - self.alpha) * self.ps
    }
}

/// Nakagami-m fading on one link: shape `m` and mean power `omega = E[|h|^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingProfile {
    m: f64,
    omega: f64,
}

impl FadingProfile {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !m.is_finite() || m < 0.5 {
            return Err(Error::Config(format!("Nakagami m must be >= 0.5, got {m}")));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::Config(format!("mean channel power must be > 0, got {omega}")));
        }
        Ok(Self { m, omega })
    }

    /// Mean power given in dB.
    pub fn with_omega_db(m: f64, omega_db: f64) -> Result<Self> {
        Self::new(m, db_to_linear(omega_db))
    }

    /// Rayleigh fading with unit mean power.
    pub fn rayleigh() -> Self {
        Self { m: 1.0, omega: 1.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Complete two-user link description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub split: PowerSplit,
    /// User 1 (near, SIC receiver).
    pub near: FadingProfile,
    /// User 2 (far, direct detection).
    pub far: FadingProfile,
    n0: f64,
}

impl LinkConfig {
    pub fn new(split: PowerSplit, near: FadingProfile, far: FadingProfile, n0: f64) -> Result<Self> {
        if !n0.is_finite() || n0 <= 0.0 {
            return Err(Error::Config(format!("noise power N0 must be > 0, got {n0}")));
        }
        Ok(Self {
            split,
            near,
            far,
            n0,
        })
    }

    /// Transmit SNR `ps / n0` in dB with `n0 = 1`.
    pub fn from_snr_db(alpha: f64, snr_db: f64, near: FadingProfile, far: FadingProfile) -> Result<Self> {
        Self::new(PowerSplit::new(alpha, db_to_linear(snr_db))?, near, far, 1.0)
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Transmit SNR `ps / n0` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.split.ps() / self.n0).log10()
    }
}

/// Mean SNR-like quantities and the matching `c = mean / (2 m)` coefficients.
///
/// `a`, `b` belong to the far user (its own channel); `c` through `g` to the
/// near user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerms {
    pub g_a: f64,
    pub g_b: f64,
    pub g_c: f64,
    pub g_d: f64,
    pub g_e: f64,
    pub g_f: f64,
    pub g_g: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c_c: f64,
    pub c_d: f64,
    pub c_e: f64,
    pub c_f: f64,
    pub c_g: f64,
}

/// The seven squared decision distances, normalised by `n0`, for unit
/// channel power: `(sqrt(2 eps2) +- sqrt(eps1))^2`, `eps1`,
/// `(2 sqrt(2 eps2) +- sqrt(eps1))^2`.
///
/// Returned as `[a/d, b/e, c, f, g]` — the far user's A/B share D/E's
/// geometry, only the channel differs.
pub(crate) fn unit_gain_terms(split: &PowerSplit, n0: f64) -> [f64; 5] {
    let (e1, e2) = (split.eps1(), split.eps2());
    if split.ps() == 0.0 {
        return [0.0; 5];
    }
    let cross = (2.0 * e2 * e1).sqrt();
    let plus = 2.0 * e2 + e1 + 2.0 * cross;
    let plus2 = 8.0 * e2 + e1 + 4.0 * cross;
    // The differences are written as (x^2 - y^2)^2 / (x + y)^2 to avoid
    // cancellation near alpha = 2/3 and alpha = 8/9. With one user silent
    // they coincide with the sums.
    let (minus, minus2) = if e1 == 0.0 || e2 == 0.0 {
        (plus, plus2)
    } else {
        let d = (2.0 - 3.0 * split.alpha()) * split.ps();
        let d2 = (8.0 - 9.0 * split.alpha()) * split.ps();
        (d * d / plus, d2 * d2 / plus2)
    };
    [plus / n0, minus / n0, e1 / n0, plus2 / n0, minus2 / n0]
}

/// Fading-averaged SNR terms for `cfg`.
pub fn gamma_terms(cfg: &LinkConfig) -> GammaTerms {
    let [plus, minus, own, plus2, minus2] = unit_gain_terms(&cfg.split, cfg.n0());
    let (w1, w2) = (cfg.near.omega(), cfg.far.omega());
    let (k1, k2) = (2.0 * cfg.near.m(), 2.0 * cfg.far.m());
    let g_a = plus * w2;
    let g_b = minus * w2;
    let g_c = own * w1;
    let g_d = plus * w1;
    let g_e = minus * w1;
    let g_f = plus2 * w1;
    let g_g = minus2 * w1;
    GammaTerms {
        g_a,
        g_b,
        g_c,
        g_d,
        g_e,
        g_f,
        g_g,
        c_a: g_a / k2,
        c_b: g_b / k2,
        c_c: g_c / k1,
        c_d: g_d / k1,
        c_e: g_e / k1,
        c_f: g_f / k1,
        c_g: g_g / k1,
    }
}

/// The three bits carried by one superposed symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolBits {
    /// Near-user bit on the real axis (`b_{1,2}`).
    pub near_re: bool,
    /// Near-user bit on the imaginary axis (`b_{1,1}`).
    pub near_im: bool,
    /// Far-user BPSK bit (`b_2`).
    pub far: bool,
}

impl SymbolBits {
    pub const fn new(near_re: bool, near_im: bool, far: bool) -> Self {
        Self { near_re, near_im, far }
    }

    /// Bits from the low three bits of `v`: bit 2 = `near_re`, bit 1 = `near_im`, bit 0 = `far`.
    pub const fn from_index(v: u8) -> Self {
        Self {
            near_re: v & 0b100 != 0,
            near_im: v & 0b010 != 0,
            far: v & 0b001 != 0,
        }
    }

    pub fn all() -> impl Iterator<Item = SymbolBits> {
        (0u8..8).map(Self::from_index)
    }
}

/// Complex baseband amplitude of the superposed transmit symbol.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuperposedPoint {
    pub re: f64,
    pub im: f64,
}

impl SuperposedPoint {
    pub fn energy(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

#[inline]
pub(crate) fn sign(bit: bool) -> f64 {
    if bit {
        1.0
    } else {
        -1.0
    }
}

/// Superposition mapper with the per-axis amplitudes precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constellation {
    /// `sqrt(eps1 / 2)`, the near user's per-axis QPSK amplitude.
    pub near_amp: f64,
    /// `sqrt(eps2)`, the far user's BPSK amplitude.
    pub far_amp: f64,
}

impl Constellation {
    pub fn new(split: &PowerSplit) -> Self {
        Self {
            near_amp: (split.eps1() / 2.0).sqrt(),
            far_amp: split.eps2().sqrt(),
        }
    }

    #[inline]
    pub fn point(&self, bits: SymbolBits) -> SuperposedPoint {
        SuperposedPoint {
            re: sign(bits.near_re) * self.near_amp + sign(bits.far) * self.far_amp,
            im: sign(bits.near_im) * self.near_amp,
        }
    }
}

/// Transmit symbol for one bit triple.
pub fn superposed_point(bits: SymbolBits, split: &PowerSplit) -> SuperposedPoint {
    Constellation::new(split).point(bits)
}
