//! Parameter sets and pump lists of the published figures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::LaserParams;

/// What a figure preset computes for each of its curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    /// One no-fluctuation optical spectrum per pump.
    NofluctSpectra,
    /// A and S combination spectra at a single pump.
    QuadratureSpectra,
    /// Steady-state sweeps, one curve per parameter set.
    SteadySweep,
    /// Linewidth sweep with its asymptotes, then the photon-number split.
    Linewidth,
    /// Full spectrum with its no-fluctuation companion, one curve per pump.
    FullSpectra,
    /// Intensity-noise spectrum, one curve per pump.
    RfSpectra,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigurePreset {
    pub id: &'static str,
    pub title: &'static str,
    pub kind: FigureKind,
    /// One parameter set per curve family; pump is overwritten per curve.
    pub params: &'static [LaserParams],
    pub pumps: Pumps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pumps {
    List(&'static [f64]),
    /// `count` values log-spaced on `[start, stop]`.
    Log { start: f64, stop: f64, count: usize },
}

impl Pumps {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Pumps::List(v) => v.to_vec(),
            Pumps::Log { start, stop, count } => crate::config::PumpSpec::Log { start, stop, count }.values(),
        }
    }
}

const fn nanolaser(gamma_perp: f64) -> LaserParams {
    LaserParams {
        kappa: 50.0,
        gamma_perp,
        omega_rabi: 34.0,
        f: 0.5,
        n0: 100.0,
        pump: 1.0,
    }
}

pub const SUPERRADIANT: LaserParams = nanolaser(50.0);
pub const NON_SUPERRADIANT: LaserParams = nanolaser(1500.0);

const SPLIT_PUMPS: &[f64] = &[2.0, 4.0, 8.0, 10.0, 16.0];
const HIGH_PUMPS: &[f64] = &[2.0, 8.0, 16.0, 28.0, 40.0];
const WEAK_PUMPS: &[f64] = &[0.16, 0.48, 0.8, 1.12, 2.0];
const SWEEP: Pumps = Pumps::Log {
    start: 0.01,
    stop: 100.0,
    count: 81,
};

pub const PRESETS: &[FigurePreset] = &[
    FigurePreset {
        id: "fig2a",
        title: "no-fluctuation optical spectra, single peak (gamma_perp = 700)",
        kind: FigureKind::NofluctSpectra,
        params: &[nanolaser(700.0)],
        pumps: Pumps::List(SPLIT_PUMPS),
    },
    FigurePreset {
        id: "fig2b",
        title: "no-fluctuation optical spectra, split below Pc (gamma_perp = 50)",
        kind: FigureKind::NofluctSpectra,
        params: &[SUPERRADIANT],
        pumps: Pumps::List(SPLIT_PUMPS),
    },
    FigurePreset {
        id: "fig3",
        title: "A and S combination spectra at P = 40 (gamma_perp = 700)",
        kind: FigureKind::QuadratureSpectra,
        params: &[nanolaser(700.0)],
        pumps: Pumps::List(&[40.0]),
    },
    FigurePreset {
        id: "fig4",
        title: "photon number and inversion versus pump (gamma_perp = 50 and 1500)",
        kind: FigureKind::SteadySweep,
        params: &[SUPERRADIANT, NON_SUPERRADIANT],
        pumps: SWEEP,
    },
    FigurePreset {
        id: "fig5",
        title: "linewidth and S/A photon numbers versus pump (gamma_perp = 50)",
        kind: FigureKind::Linewidth,
        params: &[SUPERRADIANT],
        pumps: SWEEP,
    },
    FigurePreset {
        id: "fig6",
        title: "linewidth and S/A photon numbers versus pump (gamma_perp = 1500)",
        kind: FigureKind::Linewidth,
        params: &[NON_SUPERRADIANT],
        pumps: SWEEP,
    },
    FigurePreset {
        id: "fig7a",
        title: "full optical spectra with and without population fluctuations (gamma_perp = 50)",
        kind: FigureKind::FullSpectra,
        params: &[SUPERRADIANT],
        pumps: Pumps::List(HIGH_PUMPS),
    },
    FigurePreset {
        id: "fig7b",
        title: "full optical spectra with and without population fluctuations (gamma_perp = 500)",
        kind: FigureKind::FullSpectra,
        params: &[nanolaser(500.0)],
        pumps: Pumps::List(HIGH_PUMPS),
    },
    FigurePreset {
        id: "fig8a",
        title: "weak-pump full optical spectra (gamma_perp = 50)",
        kind: FigureKind::FullSpectra,
        params: &[SUPERRADIANT],
        pumps: Pumps::List(WEAK_PUMPS),
    },
    FigurePreset {
        id: "fig8b",
        title: "weak-pump full optical spectra (gamma_perp = 500)",
        kind: FigureKind::FullSpectra,
        params: &[nanolaser(500.0)],
        pumps: Pumps::List(WEAK_PUMPS),
    },
    FigurePreset {
        id: "fig9a",
        title: "intensity-noise spectra (gamma_perp = 50)",
        kind: FigureKind::RfSpectra,
        params: &[SUPERRADIANT],
        pumps: Pumps::List(HIGH_PUMPS),
    },
    FigurePreset {
        id: "fig9b",
        title: "intensity-noise spectra (gamma_perp = 500)",
        kind: FigureKind::RfSpectra,
        params: &[nanolaser(500.0)],
        pumps: Pumps::List(HIGH_PUMPS),
    },
];

pub fn ids() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.id).collect()
}

pub fn find(id: &str) -> Result<&'static FigurePreset> {
    let key = id.trim().to_ascii_lowercase();
    let key = if key.starts_with("fig") { key } else { format!("fig{key}") };
    PRESETS.iter().find(|p| p.id == key).ok_or_else(|| {
        Error::Config(format!(
            "unknown figure id `{id}`; valid ids: {}",
            ids().join(", ")
        ))
    })
}

impl FigurePreset {
    /// Parameters of the first curve family at the given pump.
    pub fn params_at(&self, pump: f64) -> LaserParams {
        self.params[0].with_pump(pump)
    }

    /// Number of data files `cmd_figure` writes for this preset.
    pub fn curve_count(&self) -> usize {
        match self.kind {
            FigureKind::NofluctSpectra | FigureKind::FullSpectra | FigureKind::RfSpectra => {
                self.pumps.values().len()
            }
            FigureKind::QuadratureSpectra => 2,
            FigureKind::SteadySweep => self.params.len(),
            FigureKind::Linewidth => 2,
        }
    }
}
