//! Simulation-side physical layer.
//!
//! Channels are real non-negative Nakagami-m amplitudes (coherent detection
//! with perfect phase compensation), one draw per symbol. Noise is complex
//! Gaussian with `N0 / 2` per component. Decisions on a threshold tie go to
//! bit 1.

use crate::linkmodel::{sign, Constellation, FadingProfile, LinkConfig, PowerSplit, SuperposedPoint, SymbolBits};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Channel amplitudes for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// Near-user amplitude `|h1|`.
    pub h1: f64,
    /// Far-user amplitude `|h2|`.
    pub h2: f64,
}

/// Received complex baseband sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Received {
    pub re: f64,
    pub im: f64,
}

/// Nakagami-m amplitude sampler: `sqrt(G)` with `G ~ Gamma(m, omega / m)`.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiSampler {
    power: Gamma<f64>,
}

impl NakagamiSampler {
    pub fn new(profile: &FadingProfile) -> Self {
        let power = Gamma::new(profile.m(), profile.omega() / profile.m())
            .expect("FadingProfile guarantees m >= 0.5 and omega > 0");
        Self { power }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.power.sample(rng).sqrt()
    }
}

/// Draws one Nakagami-m amplitude.
pub fn sample_nakagami<R: Rng + ?Sized>(profile: &FadingProfile, rng: &mut R) -> f64 {
    NakagamiSampler::new(profile).sample(rng)
}

/// Superposed transmit symbol.
pub fn transmit(bits: SymbolBits, split: &PowerSplit) -> SuperposedPoint {
    crate::linkmodel::superposed_point(bits, split)
}

/// `h * point + n`, with independent `N(0, n0 / 2)` real and imaginary noise.
#[inline]
pub fn add_awgn<R: Rng + ?Sized>(point: SuperposedPoint, h: f64, n0: f64, rng: &mut R) -> Received {
    debug_assert!(n0 > 0.0);
    let sigma = (0.5 * n0).sqrt();
    let nr: f64 = rng.sample(StandardNormal);
    let ni: f64 = rng.sample(StandardNormal);
    Received {
        re: h * point.re + sigma * nr,
        im: h * point.im + sigma * ni,
    }
}

/// Far-user ML decision: the sign of the real part.
#[inline]
pub fn far_detect(y: Received) -> bool {
    y.re >= 0.0
}

/// Bits recovered by the near user's SIC receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SicDecision {
    /// First-stage decision on the far user's bit.
    pub far: bool,
    pub near_re: bool,
    pub near_im: bool,
}

impl SicDecision {
    pub fn near_bits(&self) -> (bool, bool) {
        (self.near_re, self.near_im)
    }
}

#[inline]
fn sic_with_amplitude(y: Received, h: f64, far_amp: f64) -> SicDecision {
    let far = far_detect(y);
    let re = y.re - h * sign(far) * far_amp;
    SicDecision {
        far,
        near_re: re >= 0.0,
        near_im: y.im >= 0.0,
    }
}

/// Two-stage SIC: detect the far bit, subtract `h * (+-sqrt(eps2))` from the
/// real part, then slice both axes for the near user's QPSK bits.
pub fn sic_receive(y: Received, h: f64, split: &PowerSplit) -> SicDecision {
    sic_with_amplitude(y, h, split.eps2().sqrt())
}

/// Error counts from one symbol trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    /// 0 or 1.
    pub far_bit_errors: u8,
    /// 0, 1 or 2.
    pub near_bit_errors: u8,
    /// The near user's first SIC stage got the far bit wrong.
    pub sic_was_wrong: bool,
}

/// Per-link state for running trials of one configuration.
#[derive(Debug, Clone, Copy)]
pub struct TrialSimulator {
    constellation: Constellation,
    near: NakagamiSampler,
    far: NakagamiSampler,
    n0: f64,
}

impl TrialSimulator {
    pub fn new(cfg: &LinkConfig) -> Self {
        Self {
            constellation: Constellation::new(&cfg.split),
            near: NakagamiSampler::new(&cfg.near),
            far: NakagamiSampler::new(&cfg.far),
            n0: cfg.n0(),
        }
    }

    pub fn draw_channels<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let h1 = self.near.sample(rng);
        let h2 = self.far.sample(rng);
        ChannelRealization { h1, h2 }
    }

    /// One superposed symbol through both links.
    #[inline]
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let ch = self.draw_channels(rng);
        let bits = SymbolBits::from_index(rng.random::<u8>());
        let x = self.constellation.point(bits);

        let y2 = add_awgn(x, ch.h2, self.n0, rng);
        let far_bit_errors = u8::from(far_detect(y2) != bits.far);

        let y1 = add_awgn(x, ch.h1, self.n0, rng);
        let d = sic_with_amplitude(y1, ch.h1, self.constellation.far_amp);
        let near_bit_errors = u8::from(d.near_re != bits.near_re) + u8::from(d.near_im != bits.near_im);

        TrialOutcome {
            far_bit_errors,
            near_bit_errors,
            sic_was_wrong: d.far != bits.far,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn noiseless(bits: SymbolBits, h: f64, split: &PowerSplit) -> Received {
        let p = transmit(bits, split);
        Received { re: h * p.re, im: h * p.im }
    }

    #[test]
    fn nakagami_power_moments() {
        let n = 1_000_000;
        for &(m, omega) in &[(2.0, 3.0), (1.0, 1.0), (0.5, 1.0)] {
            let profile = FadingProfile::new(m, omega).unwrap();
            let s = NakagamiSampler::new(&profile);
            let mut r = rng(7);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..n {
                let g = s.sample(&mut r).powi(2);
                sum += g;
                sum_sq += g * g;
            }
            let mean = sum / n as f64;
            let var = sum_sq / n as f64 - mean * mean;
            // Mean of Gamma power: 5 sigma band, sigma = omega / sqrt(m n).
            let band = 5.0 * omega / (m * n as f64).sqrt();
            assert!((mean - omega).abs() < band, "m={m}: mean {mean}");
            assert!((var / (omega * omega / m) - 1.0).abs() < 0.03, "m={m}: var {var}");
        }
    }

    #[test]
    fn nakagami_half_is_folded_normal() {
        // m = 1/2, omega = 1: amplitude ~ |N(0,1)|, so P(amp <= 1) = 1 - 2 Q(1).
        let s = NakagamiSampler::new(&FadingProfile::new(0.5, 1.0).unwrap());
        let mut r = rng(11);
        let n = 400_000;
        let hits = (0..n).filter(|_| s.sample(&mut r) <= 1.0).count();
        let p = hits as f64 / n as f64;
        let want = 1.0 - 2.0 * 0.158_655_253_931_457;
        assert!((p - want).abs() < 5.0 * (want * (1.0 - want) / n as f64).sqrt(), "{p}");
        assert!((sample_nakagami(&FadingProfile::rayleigh(), &mut r)) >= 0.0);
    }

    #[test]
    fn awgn_variance_and_noiseless_limit() {
        let mut r = rng(3);
        let n = 1_000_000;
        let n0 = 0.8;
        let (mut sr, mut si) = (0.0, 0.0);
        for _ in 0..n {
            let y = add_awgn(SuperposedPoint::default(), 2.0, n0, &mut r);
            sr += y.re * y.re;
            si += y.im * y.im;
        }
        for v in [sr / n as f64, si / n as f64] {
            assert!((v / (n0 / 2.0) - 1.0).abs() < 0.01, "{v}");
        }
        let p = SuperposedPoint { re: 1.5, im: -0.5 };
        let y = add_awgn(p, 0.7, 1e-300, &mut r);
        assert!((y.re - 0.7 * 1.5).abs() < 1e-140 && (y.im - 0.7 * -0.5).abs() < 1e-140);
    }

    #[test]
    fn awgn_reproducible() {
        let p = SuperposedPoint { re: 1.0, im: 1.0 };
        let a: Vec<_> = {
            let mut r = rng(42);
            (0..100).map(|_| add_awgn(p, 1.0, 1.0, &mut r)).collect()
        };
        let mut r = rng(42);
        for y in a {
            assert_eq!(y, add_awgn(p, 1.0, 1.0, &mut r));
        }
    }

    #[test]
    fn far_detect_threshold() {
        assert!(far_detect(Received { re: 0.3, im: 0.0 }));
        assert!(far_detect(Received { re: 0.0, im: -4.0 }));
        assert!(!far_detect(Received { re: -10.0, im: 99.0 }));
    }

    #[test]
    fn sic_noiseless_examples() {
        let split = PowerSplit::new(0.3, 10.0).unwrap();
        let d = sic_receive(noiseless(SymbolBits::new(true, false, true), 0.9, &split), 0.9, &split);
        assert_eq!(d, SicDecision { far: true, near_re: true, near_im: false });
        let d = sic_receive(noiseless(SymbolBits::new(false, true, false), 1.7, &split), 1.7, &split);
        assert_eq!(d, SicDecision { far: false, near_re: false, near_im: true });
    }

    #[test]
    fn sic_error_propagation() {
        // True far bit 0, but Re(y) lands just above 0: the subtraction then
        // pushes the near user's real component down by 2 h sqrt(eps2).
        let split = PowerSplit::new(0.3, 10.0).unwrap();
        let h = 1.0;
        let y = Received { re: 1e-9, im: 1.0 };
        let d = sic_receive(y, h, &split);
        assert!(d.far);
        assert!(!d.near_re);
        assert!((y.re - h * split.eps2().sqrt()) < -2.0);
    }

    #[test]
    fn degenerate_zero_channel() {
        let split = PowerSplit::new(0.3, 10.0).unwrap();
        let d = sic_receive(Received::default(), 0.0, &split);
        assert_eq!(d, SicDecision { far: true, near_re: true, near_im: true });
    }

    #[test]
    fn trial_outcome_bounds() {
        let cfg = LinkConfig::from_snr_db(0.3, 0.0, FadingProfile::rayleigh(), FadingProfile::rayleigh()).unwrap();
        let sim = TrialSimulator::new(&cfg);
        let mut r = rng(9);
        for _ in 0..10_000 {
            let t = sim.trial(&mut r);
            assert!(t.far_bit_errors <= 1 && t.near_bit_errors <= 2);
        }
    }

    proptest! {
        #[test]
        fn noiseless_round_trip(idx in 0u8..8, h in 1e-3f64..10.0, alpha in 0.01f64..0.66, ps in 1e-2f64..1e3) {
            let split = PowerSplit::new(alpha, ps).unwrap();
            let bits = SymbolBits::from_index(idx);
            let y = noiseless(bits, h, &split);
            let d = sic_receive(y, h, &split);
            prop_assert_eq!(d.far, bits.far);
            prop_assert_eq!(far_detect(y), bits.far);
            prop_assert_eq!(d.near_bits(), (bits.near_re, bits.near_im));
        }
    }
}
