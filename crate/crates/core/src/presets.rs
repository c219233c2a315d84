//! Named reference configurations with the expected band of their headline number.

use serde::Serialize;

use crate::analysis::ExperimentConfig;
use crate::measurement::{OperatorModel, Symmetry};

/// Runs per preset by default and with `full`.
pub const REDUCED_N_EXP: usize = 200;
pub const FULL_N_EXP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetKind {
    Simulate,
    Compare,
}

/// Expected value of a preset's headline number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Band {
    /// Loss `L` within `center +- tol`.
    Loss { center: f64, tol: f64 },
    /// Standard-over-fuzzy loss ratio in `[lo, hi]`.
    Ratio { lo: f64, hi: f64 },
    /// No numeric band; the output is a family of curves.
    Shape,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Band::Loss { center, tol } => (x - center).abs() <= tol,
            Band::Ratio { lo, hi } => (lo..=hi).contains(&x),
            Band::Shape => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub band: Band,
    pub config: ExperimentConfig,
}

pub const PRESET_NAMES: [&str; 9] = [
    "fig2-0nm",
    "fig2-10nm",
    "fig2-20nm",
    "fig2-40nm",
    "fig3-cube-ideal",
    "fig4-oct-ideal",
    "fig5-cube-20nm",
    "fig6-oct-20nm",
    "fig7-model-compare",
];

fn config(symmetry: Symmetry, delta_lambda_nm: f64) -> ExperimentConfig {
    ExperimentConfig {
        symmetry,
        delta_lambda_nm,
        n_tot: 1_000_000,
        n_exp: REDUCED_N_EXP,
        reconstruction_model: OperatorModel::Fuzzy,
        data_model: OperatorModel::Fuzzy,
        ..ExperimentConfig::default()
    }
}

/// Looks up a preset; `full` selects [`FULL_N_EXP`] runs.
pub fn preset(name: &str, full: bool) -> Option<Preset> {
    use Symmetry::{Cube, Octahedron};
    let (kind, band, mut config) = match name {
        "fig2-0nm" => (PresetKind::Simulate, Band::Shape, config(Octahedron, 0.0)),
        "fig2-10nm" => (PresetKind::Simulate, Band::Shape, config(Octahedron, 10.0)),
        "fig2-20nm" => (PresetKind::Simulate, Band::Shape, config(Octahedron, 20.0)),
        "fig2-40nm" => (PresetKind::Simulate, Band::Shape, config(Octahedron, 40.0)),
        "fig3-cube-ideal" => (
            PresetKind::Simulate,
            Band::Loss { center: 3.267, tol: 0.03 },
            ExperimentConfig {
                reconstruction_model: OperatorModel::Standard,
                data_model: OperatorModel::Standard,
                ..config(Cube, 0.0)
            },
        ),
        "fig4-oct-ideal" => (
            PresetKind::Simulate,
            Band::Loss { center: 3.216, tol: 0.03 },
            ExperimentConfig {
                reconstruction_model: OperatorModel::Standard,
                data_model: OperatorModel::Standard,
                ..config(Octahedron, 0.0)
            },
        ),
        "fig5-cube-20nm" => (PresetKind::Simulate, Band::Loss { center: 4.458, tol: 0.06 }, config(Cube, 20.0)),
        "fig6-oct-20nm" => (PresetKind::Simulate, Band::Loss { center: 4.420, tol: 0.05 }, config(Octahedron, 20.0)),
        "fig7-model-compare" => (PresetKind::Compare, Band::Ratio { lo: 300.0, hi: 1500.0 }, config(Octahedron, 20.0)),
        _ => return None,
    };
    if full {
        config.n_exp = FULL_N_EXP;
    }
    let name = PRESET_NAMES.iter().find(|&&n| n == name).copied()?;
    Some(Preset { name, kind, band, config })
}
