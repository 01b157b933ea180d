//! Reference computations for tests.
//!
//! Everything here is deliberately independent of `noma-core`: the normal
//! tail comes from `libm::erfc` or from direct integration of the Gaussian
//! density, Gamma normalisation from `libm::lgamma`, and integrals from an
//! adaptive Gauss-Kronrod rule.

// 15-point Kronrod abscissae / weights and the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    // Below ~50 ulp of the panel value the error estimate is pure roundoff.
    if err <= tol || err <= 1e-14 * val.abs() || depth == 0 {
        return val;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    adaptive(&f, a, b, tol, 30)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper normal tail by integrating the density over `[x, x + 40]`.
pub fn q_by_quadrature(x: f64) -> f64 {
    integrate(normal_pdf, x, x + 40.0, 1e-17)
}

/// Upper normal tail from `libm::erfc`.
pub fn q_libm(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `E[f(g)]` for `g ~ Gamma(shape, scale)`.
///
/// Substitutes `g = scale * u^2` so the integrand stays bounded for
/// `shape >= 0.5`, then integrates unit-width panels until the tail is
/// negligible.
pub fn gamma_expectation<F: Fn(f64) -> f64>(f: F, shape: f64, scale: f64) -> f64 {
    let ln_norm = (2.0f64).ln() - libm::lgamma(shape);
    let integrand = |u: f64| {
        if u == 0.0 {
            return if shape == 0.5 { 2.0 / std::f64::consts::PI.sqrt() * f(0.0) } else { 0.0 };
        }
        let ln_w = ln_norm + (2.0 * shape - 1.0) * u.ln() - u * u;
        f(scale * u * u) * ln_w.exp()
    };
    let peak = shape.sqrt();
    let mut total = 0.0;
    let mut lo = 0.0;
    loop {
        let hi = lo + 0.5;
        let piece = integrate(integrand, lo, hi, 1e-19);
        total += piece;
        lo = hi;
        if lo > peak + 2.0 && piece.abs() <= 1e-22 * total.abs().max(1e-300) {
            break;
        }
        if lo > peak + 60.0 {
            break;
        }
    }
    total
}

/// Fading-averaged `Q(sqrt(g))` with `g ~ Gamma(shape = m, mean = 2 m c)`.
pub fn avg_q_by_quadrature(c: f64, m: f64) -> f64 {
    gamma_expectation(|g| q_libm(g.sqrt()), m, 2.0 * c)
}

/// `ln Gamma(x)` from `libm`.
pub fn ln_gamma_ref(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Directly summed Gauss hypergeometric series, no transformations.
pub fn hyp2f1_direct(a: f64, b: f64, c: f64, z: f64, tol: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..10_000_000u64 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if term.abs() < tol * sum.abs() && k > 2.0 {
            break;
        }
    }
    sum
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
