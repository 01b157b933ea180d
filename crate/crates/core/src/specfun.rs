//! Special functions behind the closed-form BER expressions.
//!
//! `avg_ber_i` and `avg_ber_j` are the fading averages of `Q(sqrt(g))` when
//! `g` is Gamma distributed with shape `m` and mean `2 m c`. The first is a
//! finite binomial sum valid for integer `m`; the second goes through the
//! Gauss hypergeometric function and covers any `m >= 0.5`.

use crate::error::{Error, Result};
use std::f64::consts::{PI, SQRT_2};

/// Iteration cap shared by every hypergeometric series.
pub const MAX_SERIES_TERMS: usize = 100_000;

/// Relative tolerance on the estimated series remainder.
pub const SERIES_TOLERANCE: f64 = 1e-12;

// Above this |z| the raw series is replaced by its Euler transform.
const EULER_SWITCH: f64 = 0.5;

// Below this 1 - z the Euler series is too slow and the 1 - z connection
// formula is used instead (only when c - a - b is not an integer).
const CONNECTION_SWITCH: f64 = 1e-3;

#[inline]
fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Normal tail

// W. J. Cody's rational Chebyshev approximations to erf / erfc.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
#[allow(clippy::excessive_precision)] // Cody's published coefficients, verbatim.
const ERF_B: [f64; 4] = [
    23.601_290_952_344_12,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_6,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const ERF_SMALL: f64 = 0.468_75;
const ERFC_UNDERFLOW: f64 = 26.543;

// exp(-y^2) with y^2 split so the rounding error of the square does not
// get amplified by the exponential.
#[inline]
fn exp_neg_square(y: f64) -> f64 {
    let y_hi = (y * 16.0).trunc() / 16.0;
    (-y_hi * y_hi).exp() * (-(y - y_hi) * (y + y_hi)).exp()
}

fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_SMALL {
        let z = y * y;
        let num = (((ERF_A[4] * z + ERF_A[0]) * z + ERF_A[1]) * z + ERF_A[2]) * z + ERF_A[3];
        let den = (((z + ERF_B[0]) * z + ERF_B[1]) * z + ERF_B[2]) * z + ERF_B[3];
        return 1.0 - x * num / den;
    }
    let tail = if y >= ERFC_UNDERFLOW {
        0.0
    } else if y <= 4.0 {
        let mut num = ERFC_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * y;
            den = (den + ERFC_D[i]) * y;
        }
        (num + ERFC_C[7]) / (den + ERFC_D[7]) * exp_neg_square(y)
    } else {
        let z = 1.0 / (y * y);
        let mut num = ERFC_P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * z;
            den = (den + ERFC_Q[i]) * z;
        }
        let r = z * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
        (FRAC_1_SQRT_PI - r) / y * exp_neg_square(y)
    };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Gaussian tail probability `P(N(0,1) >= x)`.
pub fn q_func(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("q_func", format!("argument must be finite, got {x}")));
    }
    Ok(clamp_probability(0.5 * erfc(x / SQRT_2)))
}

// ---------------------------------------------------------------------------
// Gamma function

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// ln Gamma(x) for x >= 0.5.
fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + series.ln()
}

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("ln_gamma", format!("requires finite x > 0, got {x}")));
    }
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x), sin(pi x) > 0 here.
        Ok((PI / (PI * x).sin()).ln() - ln_gamma_lanczos(1.0 - x))
    } else {
        Ok(ln_gamma_lanczos(x))
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

// 1 / Gamma(x) on the whole real line, zero at the poles.
fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else if x >= 0.5 {
        (-ln_gamma_lanczos(x)).exp()
    } else {
        (PI * x).sin() / PI * ln_gamma_lanczos(1.0 - x).exp()
    }
}

fn gamma_signed(x: f64) -> f64 {
    1.0 / recip_gamma(x)
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric function

fn hyp_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    // Past this index none of the Pochhammer factors can change sign, so the
    // term ratios settle monotonically towards z.
    let settled = (-a).max(-b).max(-c).max(0.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let r = ratio.abs().max(z.abs());
        if kf >= settled && r < 1.0 && term.abs() * r / (1.0 - r) <= SERIES_TOLERANCE * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        func: "gauss_2f1",
        partial: sum,
        terms: MAX_SERIES_TERMS,
    })
}

fn hyp_euler(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    Ok((1.0 - z).powf(c - a - b) * hyp_series(c - a, c - b, c, z)?)
}

fn hyp_connection(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let s = c - a - b;
    let w = 1.0 - z;
    let gc = gamma_signed(c);
    let first = gc * gamma_signed(s) * recip_gamma(c - a) * recip_gamma(c - b);
    let second = gc * gamma_signed(-s) * recip_gamma(a) * recip_gamma(b);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * hyp_series(a, b, 1.0 - s, w)?;
    }
    if second != 0.0 {
        value += second * w.powf(s) * hyp_series(c - a, c - b, 1.0 + s, w)?;
    }
    Ok(value)
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for real `0 <= z < 1`.
///
/// The power series is summed directly for `z <= 0.5`. Above that the Euler
/// transformation `(1-z)^(c-a-b) 2F1(c-a, c-b; c; z)` is summed instead, and
/// very close to `z = 1` the `1 - z` connection formula takes over when
/// `c - a - b` is not an integer.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::domain("gauss_2f1", "arguments must be finite"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::domain("gauss_2f1", format!("c = {c} is a non-positive integer")));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::domain("gauss_2f1", format!("requires 0 <= z < 1, got {z}")));
    }
    if z <= EULER_SWITCH {
        return hyp_series(a, b, c, z);
    }
    let s = c - a - b;
    if 1.0 - z < CONNECTION_SWITCH && (s - s.round()).abs() > 1e-3 {
        return hyp_connection(a, b, c, z);
    }
    hyp_euler(a, b, c, z)
}

// ---------------------------------------------------------------------------
// Fading-averaged error functions

/// `sqrt(c / (1 + c))`.
pub fn mu(c: f64) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::domain("mu", format!("requires finite c > 0, got {c}")));
    }
    Ok((c / (1.0 + c)).sqrt())
}

fn check_c(func: &'static str, c: f64) -> Result<()> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::domain(func, format!("requires finite c > 0, got {c}")));
    }
    Ok(())
}

/// Fading average for integer Nakagami shape:
/// `I(c) = 1/2 [1 - mu(c) sum_{k<m} C(2k,k) ((1 - mu^2)/4)^k]`.
///
/// For `c >= 1/9` the complementary tail `1/2 mu sum_{k>=m} ...` is summed
/// instead, which is the same quantity without the cancellation in `1 - ...`.
pub fn avg_ber_i(c: f64, m: f64) -> Result<f64> {
    check_c("avg_ber_i", c)?;
    if !m.is_finite() || m < 1.0 || m.fract() != 0.0 {
        return Err(Error::domain(
            "avg_ber_i",
            format!("m = {m} is not a positive integer; use avg_ber_j"),
        ));
    }
    let mu = mu(c)?;
    // x = 1 - mu^2; term_k = C(2k,k) (x/4)^k, term_{k+1}/term_k = (2k+1)/(2k+2) x.
    let x = 1.0 / (1.0 + c);
    let m = m as u64;
    let mut term = 1.0;
    if x > 0.9 {
        let mut sum = 0.0;
        for k in 0..m {
            sum += term;
            term *= (2 * k + 1) as f64 / (2 * k + 2) as f64 * x;
        }
        return Ok(clamp_probability(0.5 * (1.0 - mu * sum)));
    }
    for k in 0..m {
        term *= (2 * k + 1) as f64 / (2 * k + 2) as f64 * x;
    }
    let mut sum = 0.0;
    let mut k = m;
    loop {
        sum += term;
        if term == 0.0 || term * x / (1.0 - x) <= 1e-17 * sum {
            break;
        }
        term *= (2 * k + 1) as f64 / (2 * k + 2) as f64 * x;
        k += 1;
    }
    Ok(clamp_probability(0.5 * mu * sum))
}

/// Fading average for any Nakagami shape `m >= 0.5`:
/// `J(c) = Gamma(m+1/2) sqrt(c/pi) / (2 Gamma(m+1) (1+c)^(m+1/2)) 2F1(1, m+1/2; m+1; 1/(1+c))`.
pub fn avg_ber_j(c: f64, m: f64) -> Result<f64> {
    check_c("avg_ber_j", c)?;
    if !m.is_finite() || m < 0.5 {
        return Err(Error::domain("avg_ber_j", format!("requires m >= 0.5, got {m}")));
    }
    let ln_prefactor = ln_gamma(m + 0.5)? - ln_gamma(m + 1.0)? - std::f64::consts::LN_2
        + 0.5 * (c / PI).ln()
        - (m + 0.5) * c.ln_1p();
    let hyp = gauss_2f1(1.0, m + 0.5, m + 1.0, 1.0 / (1.0 + c))?;
    Ok(clamp_probability(ln_prefactor.exp() * hyp))
}

/// Fading average of `Q(sqrt(g))`, choosing `avg_ber_i` for integer `m`
/// and `avg_ber_j` otherwise. `c = 0` is the zero-SNR limit and returns 1/2.
pub fn avg_ber(c: f64, m: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.5);
    }
    if m >= 1.0 && m.fract() == 0.0 {
        avg_ber_i(c, m)
    } else {
        avg_ber_j(c, m)
    }
}
