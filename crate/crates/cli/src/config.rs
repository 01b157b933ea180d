//! Scenario configuration: JSON schema, layering and validation.
//!
//! A scenario is resolved from up to four layers, later layers winning key by
//! key: built-in defaults, the preset's base values, the `--config` JSON
//! file, then command-line flags. A preset may also define several curves;
//! each curve's own values (for example `m_near` in `fig1a`) are applied last
//! because they are what defines the preset.
//!
//! # JSON keys
//!
//! All keys are optional; unknown keys are rejected.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `alpha` | near-user power fraction, in (0, 1) | 0.3 |
//! | `snr_db` | transmit SNR `Ps/N0` in dB (fixed value for `alpha` sweeps) | 20 |
//! | `m_near`, `m_far` | Nakagami m of user 1 / user 2, >= 0.5 | 1 |
//! | `omega_near_db`, `omega_far_db` | mean channel power in dB | 0 |
//! | `axis` | `"snr_db"` or `"alpha"` | `"snr_db"` |
//! | `points` | strictly increasing list of axis values | 0:2:30 dB, or 0.05:0.05:0.45 |
//! | `sign_variant` | `"derived-plus"` or `"paper-minus"` | `"derived-plus"` |
//! | `min_bit_errors` | per-user error target per point | 200 |
//! | `max_trials` | trial cap per point | 10000000 |
//! | `seed` | master seed | 1 |
//! | `workers` | worker threads, 0 = all CPUs | 0 |
//! | `batch_trials` | trials per seeded batch | 4096 |
//! | `min_analytic_ber` | compare only checks points at or above this | 1e-6 |
//! | `out` | output file, or directory for multi-curve presets | stdout |

use crate::presets::{self, Preset};
use crate::CliError;
use noma_core::mcengine::DEFAULT_BATCH_TRIALS;
use noma_core::{FadingProfile, LinkTemplate, SignVariant, StopRule, SweepAxis, SweepSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One configuration layer. Every field is optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub alpha: Option<f64>,
    pub snr_db: Option<f64>,
    pub m_near: Option<f64>,
    pub m_far: Option<f64>,
    pub omega_near_db: Option<f64>,
    pub omega_far_db: Option<f64>,
    pub axis: Option<String>,
    pub points: Option<Vec<f64>>,
    pub sign_variant: Option<String>,
    pub min_bit_errors: Option<u64>,
    pub max_trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub batch_trials: Option<u64>,
    pub min_analytic_ber: Option<f64>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ConfigLayer {
    /// Values set in `top` replace those in `self`.
    pub fn overlay(&mut self, top: &ConfigLayer) {
        overlay!(
            self, top, alpha, snr_db, m_near, m_far, omega_near_db, omega_far_db, axis, points, sign_variant,
            min_bit_errors, max_trials, seed, workers, batch_trials, min_analytic_ber, out
        );
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config schema: {e}")))
    }

    fn from_json_named(text: &str, name: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("{}: config schema: {e}", name.display())))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_named(&text, path)
    }
}

pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_SNR_DB: f64 = 20.0;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MIN_ANALYTIC_BER: f64 = 1e-6;

/// `0:2:30` dB.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=15).map(|k| f64::from(2 * k)).collect()
}

/// `0.05:0.05:0.45`, each value the correctly rounded `k / 20`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=9).map(|k| f64::from(k) / 20.0).collect()
}

/// A named curve within a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    /// Empty for single-curve scenarios.
    pub label: String,
    pub sweep: SweepSpec,
}

/// Fully resolved and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Preset name, or `"scenario"`.
    pub name: String,
    pub curves: Vec<CurveSpec>,
    pub sign_variant: SignVariant,
    pub min_analytic_ber: f64,
    pub workers: usize,
    pub batch_trials: u64,
    pub out: Option<PathBuf>,
    /// Non-fatal notes for the error stream.
    pub warnings: Vec<String>,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

fn check_alpha(alpha: f64, warnings: &mut Vec<String>) -> Result<(), CliError> {
    check(alpha.is_finite() && alpha > 0.0 && alpha < 1.0, || format!("alpha: must be in (0, 1), got {alpha}"))?;
    if alpha >= 2.0 / 3.0 {
        warnings.push(format!(
            "alpha = {alpha} >= 0.5: the near user gets most of the power, against the paper's premise; \
             for alpha >= 2/3 the closed forms no longer describe the SIC receiver (simulation is unaffected)"
        ));
    } else if alpha >= 0.5 {
        warnings.push(format!(
            "alpha = {alpha} >= 0.5: the near user gets most of the power, against the paper's premise"
        ));
    }
    Ok(())
}

fn resolve_curve(label: String, l: &ConfigLayer, warnings: &mut Vec<String>) -> Result<CurveSpec, CliError> {
    let axis: SweepAxis = match &l.axis {
        Some(s) => s.parse().map_err(|e: noma_core::Error| CliError::Config(format!("axis: {e}")))?,
        None => SweepAxis::SnrDb,
    };
    let alpha = l.alpha.unwrap_or(DEFAULT_ALPHA);
    let snr_db = l.snr_db.unwrap_or(DEFAULT_SNR_DB);
    check(snr_db.is_finite(), || format!("snr_db: must be finite, got {snr_db}"))?;
    let m_near = l.m_near.unwrap_or(1.0);
    let m_far = l.m_far.unwrap_or(1.0);
    let omega_near_db = l.omega_near_db.unwrap_or(0.0);
    let omega_far_db = l.omega_far_db.unwrap_or(0.0);
    let near = FadingProfile::with_omega_db(m_near, omega_near_db)
        .map_err(|e| CliError::Config(format!("m_near/omega_near_db: {e}")))?;
    let far = FadingProfile::with_omega_db(m_far, omega_far_db)
        .map_err(|e| CliError::Config(format!("m_far/omega_far_db: {e}")))?;

    let points = match &l.points {
        Some(p) => p.clone(),
        None => match axis {
            SweepAxis::SnrDb => default_snr_grid(),
            SweepAxis::Alpha => default_alpha_grid(),
        },
    };
    check(!points.is_empty(), || "points: sweep list is empty".into())?;
    match axis {
        SweepAxis::SnrDb => {
            check_alpha(alpha, warnings)?;
            for &p in &points {
                check(p.is_finite(), || format!("points: SNR values must be finite, got {p}"))?;
            }
        }
        SweepAxis::Alpha => {
            let mut w = Vec::new();
            for &p in &points {
                check_alpha(p, &mut w).map_err(|_| CliError::Config(format!("points: alpha must be in (0, 1), got {p}")))?;
            }
            warnings.extend(w.into_iter().take(1));
        }
    }
    check(points.windows(2).all(|w| w[0] < w[1]), || "points: must be strictly increasing".into())?;

    let stop = StopRule {
        min_bit_errors: l.min_bit_errors.unwrap_or(StopRule::default().min_bit_errors),
        max_trials: l.max_trials.unwrap_or(StopRule::default().max_trials),
    };
    check(stop.max_trials >= 1, || "max_trials: must be at least 1".into())?;
    if stop.min_bit_errors < 100 {
        warnings.push(format!(
            "min_bit_errors = {} is below the recommended 100; standard errors will be rough",
            stop.min_bit_errors
        ));
    }

    let sweep = SweepSpec {
        axis,
        points,
        template: LinkTemplate { alpha, snr_db, near, far },
        stop,
        master_seed: l.seed.unwrap_or(DEFAULT_SEED),
    };
    sweep.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(CurveSpec { label, sweep })
}

impl ScenarioConfig {
    /// Resolves the layers described in the module documentation.
    pub fn resolve(preset: Option<&str>, file: Option<&ConfigLayer>, flags: &ConfigLayer) -> Result<Self, CliError> {
        let preset: Option<Preset> = preset.map(presets::preset).transpose()?;
        let mut base = ConfigLayer::default();
        if let Some(p) = &preset {
            base.overlay(&p.base);
        }
        if let Some(f) = file {
            base.overlay(f);
        }
        base.overlay(flags);

        let mut warnings = Vec::new();
        let curve_layers: Vec<(String, ConfigLayer)> = match &preset {
            Some(p) => p.curves.clone(),
            None => vec![(String::new(), ConfigLayer::default())],
        };
        let mut curves = Vec::with_capacity(curve_layers.len());
        for (label, overrides) in curve_layers {
            let mut layer = base.clone();
            layer.overlay(&overrides);
            let mut w = Vec::new();
            let curve = resolve_curve(label.clone(), &layer, &mut w).map_err(|e| match (&e, label.is_empty()) {
                (CliError::Config(m), false) => CliError::Config(format!("curve {label}: {m}")),
                _ => e,
            })?;
            for msg in w {
                if !warnings.contains(&msg) {
                    warnings.push(msg);
                }
            }
            curves.push(curve);
        }

        let sign_variant = match &base.sign_variant {
            Some(s) => s.parse().map_err(|e: noma_core::Error| CliError::Config(format!("sign_variant: {e}")))?,
            None => SignVariant::default(),
        };
        let min_analytic_ber = base.min_analytic_ber.unwrap_or(DEFAULT_MIN_ANALYTIC_BER);
        check(min_analytic_ber.is_finite() && (0.0..=0.5).contains(&min_analytic_ber), || {
            format!("min_analytic_ber: must be in [0, 0.5], got {min_analytic_ber}")
        })?;
        let batch_trials = base.batch_trials.unwrap_or(DEFAULT_BATCH_TRIALS);
        check(batch_trials >= 1, || "batch_trials: must be at least 1".into())?;

        Ok(ScenarioConfig {
            name: preset.map_or_else(|| "scenario".to_string(), |p| p.name.to_string()),
            curves,
            sign_variant,
            min_analytic_ber,
            workers: base.workers.unwrap_or(0),
            batch_trials,
            out: base.out,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(default_snr_grid().len(), 16);
        assert_eq!(default_snr_grid()[15], 30.0);
        let a = default_alpha_grid();
        assert_eq!(a.len(), 9);
        assert_eq!(a[0], 0.05);
        assert_eq!(a[2], 0.15);
        assert_eq!(a[8], 0.45);
    }

    #[test]
    fn unknown_key_rejected() {
        let e = ConfigLayer::from_json(r#"{"alpha": 0.3, "snr": 3}"#).unwrap_err();
        assert!(e.to_string().contains("unknown field `snr`"), "{e}");
        assert!(ConfigLayer::from_json(r#"{"alpha": "x"}"#).is_err());
    }

    #[test]
    fn flags_override_file_override_preset() {
        let file = ConfigLayer::from_json(r#"{"seed": 5, "min_bit_errors": 300, "alpha": 0.2}"#).unwrap();
        let flags = ConfigLayer { seed: Some(9), ..Default::default() };
        let s = ScenarioConfig::resolve(Some("fig2"), Some(&file), &flags).unwrap();
        assert_eq!(s.curves.len(), 4);
        let c = &s.curves[1].sweep;
        assert_eq!(c.master_seed, 9);
        assert_eq!(c.stop.min_bit_errors, 300);
        assert_eq!(c.axis, SweepAxis::Alpha);
        assert_eq!(c.template.snr_db, 20.0);
        assert_eq!(c.template.near.m(), 2.0);
    }

    #[test]
    fn validation_errors() {
        let bad = |json: &str| {
            let l = ConfigLayer::from_json(json).unwrap();
            ScenarioConfig::resolve(None, Some(&l), &ConfigLayer::default()).unwrap_err()
        };
        assert!(bad(r#"{"points": []}"#).to_string().contains("empty"));
        assert!(bad(r#"{"points": [3, 1]}"#).to_string().contains("increasing"));
        assert!(bad(r#"{"alpha": 1.0}"#).to_string().contains("alpha"));
        assert!(bad(r#"{"axis": "alpha", "points": [0.1, 1.2]}"#).to_string().contains("alpha"));
        assert!(bad(r#"{"m_far": 0.3}"#).to_string().contains("m_far"));
        assert!(bad(r#"{"axis": "ebn0"}"#).to_string().contains("axis"));
        assert!(bad(r#"{"sign_variant": "minus"}"#).to_string().contains("sign_variant"));
        assert!(bad(r#"{"max_trials": 0}"#).to_string().contains("max_trials"));
    }

    #[test]
    fn alpha_warning() {
        let l = ConfigLayer { alpha: Some(0.7), ..Default::default() };
        let s = ScenarioConfig::resolve(None, None, &l).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains(">= 0.5"));
        let s = ScenarioConfig::resolve(None, None, &ConfigLayer::default()).unwrap();
        assert!(s.warnings.is_empty());
    }
}
