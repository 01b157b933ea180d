//! Built-in scenarios reproducing the paper's §IV parameter sets.
//!
//! Common to all: `Omega_1 = Omega_2 = 0 dB`. The SNR presets use
//! `alpha = 0.3` and the default 0:2:30 dB grid. Only one user's m is named
//! in each Fig. 1 caption, so the other user's m is set equal to it in every
//! curve.

use crate::config::ConfigLayer;
use crate::CliError;

/// A named scenario: shared base values plus one override layer per curve.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub base: ConfigLayer,
    /// `(label, overrides)`; the label becomes part of the output file name.
    pub curves: Vec<(String, ConfigLayer)>,
}

/// Preset names accepted by `--preset`.
pub const NAMES: [&str; 5] = ["fig1a", "fig1b", "fig2", "validate", "smoke"];

fn curve(m_near: f64, m_far: f64) -> (String, ConfigLayer) {
    (
        format!("m1-{m_near}_m2-{m_far}"),
        ConfigLayer { m_near: Some(m_near), m_far: Some(m_far), ..Default::default() },
    )
}

fn paper_base() -> ConfigLayer {
    ConfigLayer {
        alpha: Some(0.3),
        omega_near_db: Some(0.0),
        omega_far_db: Some(0.0),
        axis: Some("snr_db".into()),
        ..Default::default()
    }
}

pub fn preset(name: &str) -> Result<Preset, CliError> {
    let p = match name {
        "fig1a" => Preset {
            name: "fig1a",
            description: "Fig. 1, near-user diversity: m1 in {1,2,3,4} (m2 = m1), alpha = 0.3, SNR 0:2:30 dB",
            base: paper_base(),
            curves: [1.0, 2.0, 3.0, 4.0].iter().map(|&m| curve(m, m)).collect(),
        },
        "fig1b" => Preset {
            name: "fig1b",
            description: "Fig. 1, far-user diversity: m2 in {0.5,1,1.5,2} (m1 = m2), alpha = 0.3, SNR 0:2:30 dB",
            base: paper_base(),
            curves: [0.5, 1.0, 1.5, 2.0].iter().map(|&m| curve(m, m)).collect(),
        },
        "fig2" => Preset {
            name: "fig2",
            description: "Fig. 2, power split: alpha 0.05:0.05:0.45 at SNR 20 dB, m1 in {1,2,3,4} (m2 = m1)",
            base: ConfigLayer {
                snr_db: Some(20.0),
                axis: Some("alpha".into()),
                ..paper_base()
            },
            curves: [1.0, 2.0, 3.0, 4.0].iter().map(|&m| curve(m, m)).collect(),
        },
        "validate" => Preset {
            name: "validate",
            description: "Agreement grid: m1 in {1,3} x m2 in {0.5,2}, SNR {0,5,10,15,20} dB, alpha = 0.3; \
                          checks points with analytic BER >= 1e-5",
            base: ConfigLayer {
                points: Some(vec![0.0, 5.0, 10.0, 15.0, 20.0]),
                min_analytic_ber: Some(1e-5),
                ..paper_base()
            },
            curves: [(1.0, 0.5), (1.0, 2.0), (3.0, 0.5), (3.0, 2.0)]
                .iter()
                .map(|&(a, b)| curve(a, b))
                .collect(),
        },
        "smoke" => Preset {
            name: "smoke",
            description: "Quick single-curve check: Rayleigh both users, alpha = 0.3, SNR {0,10} dB, 100 errors",
            base: ConfigLayer {
                points: Some(vec![0.0, 10.0]),
                min_bit_errors: Some(100),
                ..paper_base()
            },
            curves: vec![(String::new(), ConfigLayer::default())],
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset {other:?} (available: {})",
                NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_resolve() {
        for name in NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            assert!(!p.curves.is_empty());
        }
        assert!(preset("fig3").is_err());
    }

    #[test]
    fn fig1_labels() {
        let labels: Vec<_> = preset("fig1b").unwrap().curves.into_iter().map(|c| c.0).collect();
        assert_eq!(labels, ["m1-0.5_m2-0.5", "m1-1_m2-1", "m1-1.5_m2-1.5", "m1-2_m2-2"]);
    }
}
