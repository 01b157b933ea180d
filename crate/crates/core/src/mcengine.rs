//! Monte Carlo BER estimation.
//!
//! # Reproducibility
//!
//! Trials are grouped into fixed-size batches. Batch `k` of a point draws
//! from its own `ChaCha8Rng` seeded with `derive_seed(point_seed, k)`, so the
//! random stream of a batch depends only on the point seed and the batch
//! index. Batches run in parallel in waves, but their tallies are folded in
//! index order and the stopping rule is checked after every batch. The
//! result is therefore identical for any worker count, given the same
//! `(seed, batch_trials)`.
//!
//! Within a sweep, point `i` uses `derive_seed(master_seed, i)`.

use crate::analytic::{far_ber_avg, near_ber_avg, SignVariant};
use crate::error::{Error, Result};
use crate::linkmodel::{FadingProfile, LinkConfig};
use crate::phy::TrialSimulator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Trials per batch unless overridden.
pub const DEFAULT_BATCH_TRIALS: u64 = 4096;

/// Derives an independent child seed from `(parent, index)`.
///
/// Two rounds of the splitmix64 finaliser over `parent` and
/// `index * golden-ratio`, which decorrelates neighbouring indices and
/// neighbouring parents.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(parent) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// When to stop a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    /// Stop once both users have at least this many bit errors.
    pub min_bit_errors: u64,
    /// Hard cap on trials (symbols).
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_bit_errors: 200, max_trials: 10_000_000 }
    }
}

/// Error counts for one user.
///
/// Each trial contributes `X_t` errors out of `bits_per_trial` bits. The
/// standard error is computed from the per-trial variance of `X_t`, which is
/// correct even when the bits within a trial are correlated (the near
/// user's two QPSK bits share a channel draw and a SIC decision).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BerEstimate {
    pub trials: u64,
    pub bits_per_trial: u32,
    pub bit_errors: u64,
    /// `sum_t X_t^2`.
    pub error_sq_sum: u64,
}

impl BerEstimate {
    pub fn bits(&self) -> u64 {
        self.trials * u64::from(self.bits_per_trial)
    }

    pub fn ber(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.bit_errors as f64 / self.bits() as f64
    }

    /// Standard error of [`Self::ber`] from the per-trial error variance.
    pub fn stderr(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        let n = self.trials as f64;
        let mean = self.bit_errors as f64 / n;
        let var = (self.error_sq_sum as f64 / n - mean * mean).max(0.0);
        (var / n).sqrt() / f64::from(self.bits_per_trial)
    }

    /// `sqrt(p (1 - p) / bits)`, which treats every bit as independent.
    pub fn binomial_stderr(&self) -> f64 {
        let p = self.ber();
        (p * (1.0 - p) / self.bits() as f64).sqrt()
    }
}

/// Monte Carlo result for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointEstimate {
    pub far: BerEstimate,
    pub near: BerEstimate,
    /// Near-user bit errors in trials where SIC decoded the far bit correctly.
    pub near_errors_sic_correct: u64,
    /// Near-user bit errors in trials where SIC got the far bit wrong.
    pub near_errors_sic_wrong: u64,
    pub sic_wrong_trials: u64,
}

impl PointEstimate {
    pub fn trials(&self) -> u64 {
        self.far.trials
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    trials: u64,
    far_errors: u64,
    near_errors: u64,
    near_error_sq: u64,
    near_errors_sic_wrong: u64,
    sic_wrong_trials: u64,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.far_errors += o.far_errors;
        self.near_errors += o.near_errors;
        self.near_error_sq += o.near_error_sq;
        self.near_errors_sic_wrong += o.near_errors_sic_wrong;
        self.sic_wrong_trials += o.sic_wrong_trials;
    }

    fn done(&self, stop: &StopRule) -> bool {
        self.trials >= stop.max_trials
            || (self.far_errors >= stop.min_bit_errors && self.near_errors >= stop.min_bit_errors)
    }

    fn into_estimate(self) -> PointEstimate {
        PointEstimate {
            far: BerEstimate {
                trials: self.trials,
                bits_per_trial: 1,
                bit_errors: self.far_errors,
                error_sq_sum: self.far_errors,
            },
            near: BerEstimate {
                trials: self.trials,
                bits_per_trial: 2,
                bit_errors: self.near_errors,
                error_sq_sum: self.near_error_sq,
            },
            near_errors_sic_correct: self.near_errors - self.near_errors_sic_wrong,
            near_errors_sic_wrong: self.near_errors_sic_wrong,
            sic_wrong_trials: self.sic_wrong_trials,
        }
    }
}

fn run_batch(sim: &TrialSimulator, seed: u64, trials: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally { trials, ..Tally::default() };
    for _ in 0..trials {
        let o = sim.trial(&mut rng);
        let near = u64::from(o.near_bit_errors);
        t.far_errors += u64::from(o.far_bit_errors);
        t.near_errors += near;
        t.near_error_sq += near * near;
        if o.sic_was_wrong {
            t.sic_wrong_trials += 1;
            t.near_errors_sic_wrong += near;
        }
    }
    t
}

/// Batched, optionally parallel Monte Carlo runner.
pub struct Engine {
    batch_trials: u64,
    pool: Option<rayon::ThreadPool>,
    workers: usize,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("batch_trials", &self.batch_trials)
            .field("workers", &self.workers)
            .finish()
    }
}

impl Engine {
    /// `workers == 0` means one worker per available CPU.
    pub fn new(workers: usize) -> Result<Self> {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { batch_trials: DEFAULT_BATCH_TRIALS, pool, workers })
    }

    /// Overrides the batch size. Results depend on it, so it is part of the
    /// reproducibility key.
    pub fn with_batch_trials(mut self, batch_trials: u64) -> Result<Self> {
        if batch_trials == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        self.batch_trials = batch_trials;
        Ok(self)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn batch_trials(&self) -> u64 {
        self.batch_trials
    }

    /// Runs trials for one configuration until `stop` is met.
    pub fn run_point(&self, cfg: &LinkConfig, stop: &StopRule, seed: u64) -> Result<PointEstimate> {
        if stop.max_trials == 0 {
            return Err(Error::Config("max_trials must be positive".into()));
        }
        let sim = TrialSimulator::new(cfg);
        let n_batches = stop.max_trials.div_ceil(self.batch_trials);
        let batch_len = |k: u64| self.batch_trials.min(stop.max_trials - k * self.batch_trials);
        let wave = (self.workers as u64 * 2).max(1);

        let mut acc = Tally::default();
        let mut k = 0;
        while k < n_batches {
            let hi = (k + wave).min(n_batches);
            let tallies: Vec<Tally> = match &self.pool {
                Some(pool) => pool.install(|| {
                    (k..hi)
                        .into_par_iter()
                        .map(|b| run_batch(&sim, derive_seed(seed, b), batch_len(b)))
                        .collect()
                }),
                None => (k..hi).map(|b| run_batch(&sim, derive_seed(seed, b), batch_len(b))).collect(),
            };
            for t in &tallies {
                acc.add(t);
                if acc.done(stop) {
                    return Ok(acc.into_estimate());
                }
            }
            k = hi;
        }
        Ok(acc.into_estimate())
    }

    /// Monte Carlo plus analytic values for point `i` of a sweep.
    pub fn run_sweep_point(&self, spec: &SweepSpec, i: usize) -> Result<CurvePoint> {
        let cfg = spec.link_config(i)?;
        let analytic = AnalyticPoint::compute(&cfg)?;
        let mc = self.run_point(&cfg, &spec.stop, spec.point_seed(i))?;
        Ok(CurvePoint { axis_value: spec.points[i], analytic, mc })
    }

    pub fn run_sweep(&self, spec: &SweepSpec) -> Result<Vec<CurvePoint>> {
        spec.validate()?;
        (0..spec.points.len()).map(|i| self.run_sweep_point(spec, i)).collect()
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Transmit SNR `Ps / N0` in dB.
    SnrDb,
    /// Far-user power fraction.
    Alpha,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Alpha => "alpha",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr_db" => Ok(SweepAxis::SnrDb),
            "alpha" => Ok(SweepAxis::Alpha),
            other => Err(Error::Config(format!("unknown sweep axis {other:?} (expected snr_db or alpha)"))),
        }
    }
}

/// Fixed link parameters; the swept one is overridden per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTemplate {
    pub alpha: f64,
    pub snr_db: f64,
    pub near: FadingProfile,
    pub far: FadingProfile,
}

/// A one-dimensional sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    /// Strictly increasing, non-empty.
    pub points: Vec<f64>,
    pub template: LinkTemplate,
    pub stop: StopRule,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Config("sweep has no points".into()));
        }
        if self.points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep points must be finite".into()));
        }
        if self.points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep points must be strictly increasing".into()));
        }
        for i in 0..self.points.len() {
            self.link_config(i)?;
        }
        Ok(())
    }

    pub fn link_config(&self, i: usize) -> Result<LinkConfig> {
        let v = *self
            .points
            .get(i)
            .ok_or_else(|| Error::Config(format!("sweep point {i} out of range")))?;
        let t = &self.template;
        let (alpha, snr_db) = match self.axis {
            SweepAxis::SnrDb => (t.alpha, v),
            SweepAxis::Alpha => (v, t.snr_db),
        };
        LinkConfig::from_snr_db(alpha, snr_db, t.near, t.far).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn point_seed(&self, i: usize) -> u64 {
        derive_seed(self.master_seed, i as u64)
    }

    /// Closed-form values at every point.
    pub fn analytic_curve(&self) -> Result<Vec<(f64, AnalyticPoint)>> {
        self.validate()?;
        (0..self.points.len())
            .map(|i| Ok((self.points[i], AnalyticPoint::compute(&self.link_config(i)?)?)))
            .collect()
    }
}

/// Closed-form BERs at one point, with the far user under both sign variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub near: f64,
    pub far_derived_plus: f64,
    pub far_paper_minus: f64,
}

impl AnalyticPoint {
    pub fn compute(cfg: &LinkConfig) -> Result<Self> {
        Ok(Self {
            near: near_ber_avg(cfg)?,
            far_derived_plus: far_ber_avg(cfg, SignVariant::DerivedPlus)?,
            far_paper_minus: far_ber_avg(cfg, SignVariant::PaperMinus)?,
        })
    }

    pub fn far(&self, variant: SignVariant) -> f64 {
        match variant {
            SignVariant::DerivedPlus => self.far_derived_plus,
            SignVariant::PaperMinus => self.far_paper_minus,
        }
    }
}

/// One sweep point: axis value, closed forms and Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub axis_value: f64,
    pub analytic: AnalyticPoint,
    pub mc: PointEstimate,
}
