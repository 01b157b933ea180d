//! Closed-form bit error rates for both users.
//!
//! The instantaneous forms take the per-realisation SNR terms
//! `gamma_a .. gamma_g` (see [`crate::linkmodel::GammaTerms`] for their
//! definitions without the channel average); the averaged forms replace
//! every `Q(sqrt(gamma_i))` by its Nakagami average `F(c_i)`, where `F` is
//! [`avg_ber_i`](crate::specfun::avg_ber_i) for integer `m` and
//! [`avg_ber_j`](crate::specfun::avg_ber_j) otherwise.
//!
//! The expressions assume `sqrt(2 eps2) > sqrt(eps1)`, i.e. `alpha < 2/3`:
//! beyond that point the far symbol no longer dominates the real axis and
//! the decision regions they are built on change.

use crate::error::{Error, Result};
use crate::linkmodel::{gamma_terms, LinkConfig};
use crate::specfun::{avg_ber, q_func};
use std::fmt;
use std::str::FromStr;

/// Per-user BER pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPair {
    /// User 1.
    pub near: f64,
    /// User 2.
    pub far: f64,
}

/// Which sign to use between the two far-user averages.
///
/// Averaging `1/2 [Q(sqrt(gamma_a)) + Q(sqrt(gamma_b))]` term by term gives
/// a plus sign; the printed closed form carries a minus. Both are kept so the
/// Monte Carlo comparison can say which one the simulation supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum SignVariant {
    /// `1/2 [F(c_a) - F(c_b)]`.
    PaperMinus,
    /// `1/2 [F(c_a) + F(c_b)]`.
    #[default]
    DerivedPlus,
}

impl SignVariant {
    pub const ALL: [SignVariant; 2] = [SignVariant::DerivedPlus, SignVariant::PaperMinus];

    pub fn as_str(&self) -> &'static str {
        match self {
            SignVariant::PaperMinus => "paper-minus",
            SignVariant::DerivedPlus => "derived-plus",
        }
    }

    pub fn other(&self) -> SignVariant {
        match self {
            SignVariant::PaperMinus => SignVariant::DerivedPlus,
            SignVariant::DerivedPlus => SignVariant::PaperMinus,
        }
    }
}

impl fmt::Display for SignVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-minus" => Ok(SignVariant::PaperMinus),
            "derived-plus" => Ok(SignVariant::DerivedPlus),
            other => Err(Error::Config(format!(
                "unknown sign variant {other:?} (expected paper-minus or derived-plus)"
            ))),
        }
    }
}

fn q_sqrt(func: &'static str, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain {
            func,
            detail: format!("SNR terms must be >= 0, got {gamma}"),
        });
    }
    q_func(gamma.sqrt())
}

/// Far-user BER for one channel realisation: `1/2 [Q(sqrt(gamma_a)) + Q(sqrt(gamma_b))]`.
pub fn far_ber_instant(gamma_a: f64, gamma_b: f64) -> Result<f64> {
    const F: &str = "far_ber_instant";
    Ok(0.5 * (q_sqrt(F, gamma_a)? + q_sqrt(F, gamma_b)?))
}

/// Near-user BER given the SIC stage detected the far symbol correctly.
///
/// `1/4 [Q_c (4 - Q_d - Q_e) - Q_d]` with `Q_i = Q(sqrt(gamma_i))`.
pub fn near_ber_correct_instant(gc: f64, gd: f64, ge: f64) -> Result<f64> {
    const F: &str = "near_ber_correct_instant";
    let (qc, qd, qe) = (q_sqrt(F, gc)?, q_sqrt(F, gd)?, q_sqrt(F, ge)?);
    Ok(0.25 * (qc * (4.0 - qd - qe) - qd))
}

/// Near-user BER given the SIC stage got the far symbol wrong.
///
/// `1/4 [Q_c (Q_d + Q_e) + Q_e + Q_f - Q_g]`.
pub fn near_ber_error_instant(gc: f64, gd: f64, ge: f64, gf: f64, gg: f64) -> Result<f64> {
    const F: &str = "near_ber_error_instant";
    let (qc, qd, qe) = (q_sqrt(F, gc)?, q_sqrt(F, gd)?, q_sqrt(F, ge)?);
    let (qf, qg) = (q_sqrt(F, gf)?, q_sqrt(F, gg)?);
    Ok(0.25 * (qc * (qd + qe) + qe + qf - qg))
}

/// Near-user BER with the product terms cancelled:
/// `Q_c + 1/4 [-Q_d + Q_e + Q_f - Q_g]`.
pub fn near_ber_reduced_instant(gc: f64, gd: f64, ge: f64, gf: f64, gg: f64) -> Result<f64> {
    const F: &str = "near_ber_reduced_instant";
    let (qc, qd, qe) = (q_sqrt(F, gc)?, q_sqrt(F, gd)?, q_sqrt(F, ge)?);
    let (qf, qg) = (q_sqrt(F, gf)?, q_sqrt(F, gg)?);
    Ok(qc + 0.25 * (-qd + qe + qf - qg))
}

/// Near-user BER for one channel realisation: the sum of the SIC-correct
/// and SIC-error conditionals.
pub fn near_ber_instant(gc: f64, gd: f64, ge: f64, gf: f64, gg: f64) -> Result<f64> {
    let sum = near_ber_correct_instant(gc, gd, ge)? + near_ber_error_instant(gc, gd, ge, gf, gg)?;
    debug_assert!({
        let reduced = near_ber_reduced_instant(gc, gd, ge, gf, gg)?;
        (sum - reduced).abs() <= 1e-12
    });
    Ok(sum)
}

/// Fading-averaged far-user BER before clamping to `[0, 1]`.
///
/// Since `c_a >= c_b`, `F(c_a) <= F(c_b)` and the minus variant is never
/// positive.
pub fn far_ber_avg_unclamped(cfg: &LinkConfig, variant: SignVariant) -> Result<f64> {
    let t = gamma_terms(cfg);
    let m = cfg.far.m();
    let (fa, fb) = (avg_ber(t.c_a, m)?, avg_ber(t.c_b, m)?);
    Ok(match variant {
        SignVariant::DerivedPlus => 0.5 * (fa + fb),
        SignVariant::PaperMinus => 0.5 * (fa - fb),
    })
}

/// Fading-averaged far-user BER.
pub fn far_ber_avg(cfg: &LinkConfig, variant: SignVariant) -> Result<f64> {
    Ok(far_ber_avg_unclamped(cfg, variant)?.clamp(0.0, 1.0))
}

/// Fading-averaged near-user BER:
/// `F(c_c) + 1/4 [-F(c_d) + F(c_e) + F(c_f) - F(c_g)]`.
pub fn near_ber_avg(cfg: &LinkConfig) -> Result<f64> {
    let t = gamma_terms(cfg);
    let m = cfg.near.m();
    let f = |c| avg_ber(c, m);
    let v = f(t.c_c)? + 0.25 * (-f(t.c_d)? + f(t.c_e)? + f(t.c_f)? - f(t.c_g)?);
    Ok(v.clamp(0.0, 1.0))
}

/// Both averaged BERs.
pub fn ber_pair_avg(cfg: &LinkConfig, variant: SignVariant) -> Result<BerPair> {
    Ok(BerPair {
        near: near_ber_avg(cfg)?,
        far: far_ber_avg(cfg, variant)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkmodel::{unit_gain_terms, FadingProfile, PowerSplit};
    use crate::specfun::avg_ber_i;
    use noma_testkit as oracle;
    use proptest::prelude::*;

    fn link(alpha: f64, snr_db: f64, m1: f64, m2: f64) -> LinkConfig {
        LinkConfig::from_snr_db(
            alpha,
            snr_db,
            FadingProfile::new(m1, 1.0).unwrap(),
            FadingProfile::new(m2, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn far_instant_examples() {
        assert_eq!(far_ber_instant(0.0, 0.0).unwrap(), 0.5);
        let g = 3.7;
        assert!((far_ber_instant(g, g).unwrap() - q_func(g.sqrt()).unwrap()).abs() < 1e-16);
        // Q(sqrt 5.8284) = 0.0078..., Q(sqrt 0.1716) = 0.3393..., from the
        // quadrature oracle.
        let want = 0.5 * (oracle::q_by_quadrature(5.8284f64.sqrt()) + oracle::q_by_quadrature(0.1716f64.sqrt()));
        let got = far_ber_instant(5.8284, 0.1716).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.173_615_798_474_038_3).abs() < 1e-14);
        assert!(far_ber_instant(-1.0, 0.0).is_err());
    }

    #[test]
    fn near_instant_zero_snr() {
        assert_eq!(near_ber_correct_instant(0.0, 0.0, 0.0).unwrap(), 0.25);
        assert_eq!(near_ber_error_instant(0.0, 0.0, 0.0, 0.0, 0.0).unwrap(), 0.25);
        assert_eq!(near_ber_instant(0.0, 0.0, 0.0, 0.0, 0.0).unwrap(), 0.5);
        assert!(near_ber_error_instant(0.0, -1.0, 0.0, 0.0, 0.0).is_err());
        assert!(near_ber_correct_instant(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn near_instant_high_snr() {
        let big = 1e4;
        assert_eq!(near_ber_error_instant(big, big, big, big, big).unwrap(), 0.0);
        // With Q_c -> 0 the SIC-correct branch alone dips below zero.
        let v = near_ber_correct_instant(1e4, 0.5, 0.1).unwrap();
        assert!(v < 0.0);
        let split = PowerSplit::new(0.3, 100.0).unwrap();
        let [plus, minus, own, plus2, minus2] = unit_gain_terms(&split, 1.0);
        for &h2 in &[1e-4, 0.01, 0.3, 1.0, 5.0, 100.0] {
            let total = near_ber_instant(own * h2, plus * h2, minus * h2, plus2 * h2, minus2 * h2).unwrap();
            assert!((0.0..=0.5).contains(&total), "h2={h2}: {total}");
        }
    }

    #[test]
    fn near_instant_single_user_collapse() {
        // eps2 = 0: gamma_d = gamma_e = gamma_c, gamma_f = gamma_g.
        let split = PowerSplit::new(1.0, 12.0).unwrap();
        let [plus, minus, own, plus2, minus2] = unit_gain_terms(&split, 1.0);
        assert_eq!(plus, own);
        assert_eq!(minus, own);
        assert_eq!(plus2, minus2);
        let v = near_ber_instant(own, plus, minus, plus2, minus2).unwrap();
        assert!((v - q_func(own.sqrt()).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn far_avg_variants() {
        let cfg = link(0.3, 20.0, 2.0, 1.0);
        let plus = far_ber_avg_unclamped(&cfg, SignVariant::DerivedPlus).unwrap();
        let minus = far_ber_avg_unclamped(&cfg, SignVariant::PaperMinus).unwrap();
        let t = gamma_terms(&cfg);
        let fb = avg_ber(t.c_b, 1.0).unwrap();
        assert!(minus < plus);
        assert!((plus - minus - fb).abs() < 1e-15);
        assert!(minus < 0.0);
        assert_eq!(far_ber_avg(&cfg, SignVariant::PaperMinus).unwrap(), 0.0);
        assert_eq!(far_ber_avg(&cfg, SignVariant::DerivedPlus).unwrap(), plus);
    }

    #[test]
    fn far_avg_bpsk_collapse() {
        let near = FadingProfile::rayleigh();
        for &m2 in &[1.0, 0.5, 2.5] {
            let far = FadingProfile::new(m2, 1.0).unwrap();
            let ps = 20.0;
            let cfg = LinkConfig::new(PowerSplit::new(0.0, ps).unwrap(), near, far, 1.0).unwrap();
            let t = gamma_terms(&cfg);
            assert_eq!(t.c_a, t.c_b);
            let v = far_ber_avg(&cfg, SignVariant::DerivedPlus).unwrap();
            // BPSK over Nakagami: mean gamma = 2 ps / n0, c = gamma / (2 m).
            assert_eq!(v, avg_ber(2.0 * ps / (2.0 * m2), m2).unwrap());
        }
    }

    #[test]
    fn zero_snr_is_guessing() {
        for &(m1, m2) in &[(1.0, 1.0), (2.0, 0.5), (1.5, 3.0)] {
            let cfg = LinkConfig::new(
                PowerSplit::new(0.3, 0.0).unwrap(),
                FadingProfile::new(m1, 1.0).unwrap(),
                FadingProfile::new(m2, 1.0).unwrap(),
                1.0,
            )
            .unwrap();
            assert_eq!(near_ber_avg(&cfg).unwrap(), 0.5);
            assert_eq!(far_ber_avg(&cfg, SignVariant::DerivedPlus).unwrap(), 0.5);
        }
    }

    #[test]
    fn near_avg_single_user_collapse() {
        let cfg = LinkConfig::new(
            PowerSplit::new(1.0, 50.0).unwrap(),
            FadingProfile::new(2.0, 1.0).unwrap(),
            FadingProfile::rayleigh(),
            1.0,
        )
        .unwrap();
        let t = gamma_terms(&cfg);
        let want = avg_ber_i(t.c_c, 2.0).unwrap();
        assert!((near_ber_avg(&cfg).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn near_avg_matches_gamma_quadrature() {
        for &(alpha, snr, m1) in &[(0.3, 20.0, 2.0), (0.2, 10.0, 1.0), (0.4, 15.0, 1.5), (0.3, 5.0, 0.5)] {
            let cfg = link(alpha, snr, m1, 1.0);
            let [plus, minus, own, plus2, minus2] = unit_gain_terms(&cfg.split, cfg.n0());
            let omega = cfg.near.omega();
            let want = oracle::gamma_expectation(
                |h2| near_ber_reduced_instant(own * h2, plus * h2, minus * h2, plus2 * h2, minus2 * h2).unwrap(),
                m1,
                omega / m1,
            );
            let got = near_ber_avg(&cfg).unwrap();
            assert!((got / want - 1.0).abs() <= 1e-5, "{alpha} {snr} {m1}: {got} vs {want}");
        }
    }

    #[test]
    fn far_avg_matches_gamma_quadrature() {
        for &(alpha, snr, m2) in &[(0.3, 20.0, 2.0), (0.1, 0.0, 0.5), (0.45, 25.0, 3.0)] {
            let cfg = link(alpha, snr, 1.0, m2);
            let [plus, minus, ..] = unit_gain_terms(&cfg.split, cfg.n0());
            let want = oracle::gamma_expectation(
                |h2| far_ber_instant(plus * h2, minus * h2).unwrap(),
                m2,
                cfg.far.omega() / m2,
            );
            let got = far_ber_avg(&cfg, SignVariant::DerivedPlus).unwrap();
            assert!((got / want - 1.0).abs() <= 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn averages_decrease_with_snr_and_stay_bounded() {
        for &(m1, m2) in &[(1.0, 1.0), (2.0, 0.5), (3.0, 1.5), (4.0, 2.0)] {
            for &alpha in &[0.05, 0.2, 0.3, 0.45] {
                let mut prev = (0.5, 0.5);
                for i in 0..=40 {
                    let cfg = link(alpha, -10.0 + i as f64, m1, m2);
                    let far = far_ber_avg(&cfg, SignVariant::DerivedPlus).unwrap();
                    let near = near_ber_avg(&cfg).unwrap();
                    assert!((0.0..=0.5).contains(&far) && (0.0..=0.5).contains(&near));
                    assert!(far < prev.1 && near < prev.0, "alpha={alpha} i={i}");
                    prev = (near, far);
                }
            }
        }
    }

    #[test]
    fn diversity_order_over_last_decade() {
        let snr: Vec<f64> = (0..=10).map(|k| 30.0 + f64::from(k)).collect();
        let x: Vec<f64> = snr.iter().map(|s| s / 10.0).collect();
        for m in [1.0, 2.0, 3.0] {
            let curve: Vec<(f64, f64)> = snr
                .iter()
                .map(|&s| {
                    let cfg = link(0.3, s, m, m);
                    (near_ber_avg(&cfg).unwrap(), far_ber_avg(&cfg, SignVariant::DerivedPlus).unwrap())
                })
                .collect();
            let near: Vec<f64> = curve.iter().map(|p| p.0.log10()).collect();
            let far: Vec<f64> = curve.iter().map(|p| p.1.log10()).collect();
            for (user, y) in [("near", near), ("far", far)] {
                let slope = oracle::ls_slope(&x, &y);
                assert!((slope + m).abs() <= 0.3, "{user} m={m}: slope {slope}");
            }
        }
    }

    #[test]
    fn sign_variant_parsing() {
        assert_eq!("paper-minus".parse::<SignVariant>().unwrap(), SignVariant::PaperMinus);
        assert_eq!("derived-plus".parse::<SignVariant>().unwrap(), SignVariant::DerivedPlus);
        assert!("plus".parse::<SignVariant>().is_err());
        assert_eq!(SignVariant::default(), SignVariant::DerivedPlus);
    }

    proptest! {
        #[test]
        fn conditional_sum_equals_reduced_form(
            gc in 0.0f64..200.0, gd in 0.0f64..200.0, ge in 0.0f64..200.0,
            gf in 0.0f64..800.0, gg in 0.0f64..800.0,
        ) {
            let sum = near_ber_correct_instant(gc, gd, ge).unwrap()
                + near_ber_error_instant(gc, gd, ge, gf, gg).unwrap();
            let reduced = near_ber_reduced_instant(gc, gd, ge, gf, gg).unwrap();
            prop_assert!((sum - reduced).abs() <= 1e-12);
        }
    }
}
