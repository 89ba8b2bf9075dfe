//! Sampled spectra, frequency grids and the density trait shared by all
//! analytic spectra.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{peak_finder, Feature, Peak, SpectralIntegral};
use crate::params::LaserParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    /// Population fluctuations neglected.
    Nofluct,
    #[serde(rename = "A", alias = "a")]
    A,
    #[serde(rename = "S", alias = "s")]
    S,
    /// Cross term between the S and A combinations.
    #[serde(rename = "AS", alias = "as")]
    AS,
    Full,
    Rf,
}

impl SpectrumKind {
    pub const ALL: [SpectrumKind; 6] = [
        SpectrumKind::Nofluct,
        SpectrumKind::A,
        SpectrumKind::S,
        SpectrumKind::AS,
        SpectrumKind::Full,
        SpectrumKind::Rf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Nofluct => "nofluct",
            SpectrumKind::A => "A",
            SpectrumKind::S => "S",
            SpectrumKind::AS => "AS",
            SpectrumKind::Full => "full",
            SpectrumKind::Rf => "rf",
        }
    }

    /// Kinds whose density is non-negative by construction.
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, SpectrumKind::AS | SpectrumKind::Full)
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectrumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SpectrumKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown spectrum kind `{s}` (expected one of nofluct, A, S, AS, full, rf)"
                ))
            })
    }
}

/// An even spectral density `S(ω)` with a known large-ω behaviour.
pub trait SpectralDensity: Sync {
    fn kind(&self) -> SpectrumKind;

    fn density(&self, omega: f64) -> f64;

    /// `lim ω²·S(ω)`.
    fn tail_coefficient(&self) -> f64;

    /// Characteristic frequency scale of the spectrum (`2κ+γ⊥+ω_ro`).
    fn scale(&self) -> f64;

    /// Peak positions and widths used to seed quadrature panels.
    fn features(&self) -> Vec<Feature> {
        Vec::new()
    }

    /// Integration window `W = 200·scale`.
    fn window(&self) -> f64 {
        200.0 * self.scale()
    }

    /// `(1/2π)∫S dω` with the analytic tail beyond the window.
    fn integrated(&self) -> Result<f64> {
        self.integrated_with(SpectralIntegral::new(self.window()))
    }

    /// As [`SpectralDensity::integrated`] with caller-chosen quadrature settings;
    /// the tail, symmetry and features are filled in here.
    fn integrated_with(&self, q: SpectralIntegral) -> Result<f64> {
        q.tail(self.tail_coefficient())
            .even(true)
            .features(self.features())
            .integrate(|w| self.density(w))
    }

    fn sample(&self, grid: &[f64]) -> Vec<f64> {
        grid.par_iter().map(|&w| self.density(w)).collect()
    }
}

/// Quadrature features from the eigenvalues of a linear drift matrix: each
/// complex pole `λ` gives a resonance at `|Im λ|` of half width `|Re λ|`.
pub fn features_from_eigenvalues(eigs: &[Complex64]) -> Vec<Feature> {
    eigs.iter()
        .map(|e| Feature {
            center: e.im.abs(),
            width: e.re.abs().max(1e-300),
        })
        .collect()
}

/// Eigenvalues of a small real matrix given row-major.
pub fn eigenvalues<const D: usize>(rows: [[f64; D]; D]) -> Vec<Complex64> {
    let m = DMatrix::from_fn(D, D, |i, j| rows[i][j]);
    m.complex_eigenvalues().iter().copied().collect()
}

/// How to lay out a symmetric frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridSpec {
    /// Composite grid scaled to the laser parameters.
    Auto { n_log: usize, n_lin: usize },
    Linear { max: f64, points: usize },
    /// Log-spaced on `[min, join]`, linear on `[join, max]`, mirrored, plus 0.
    Composite {
        min: f64,
        join: f64,
        max: f64,
        n_log: usize,
        n_lin: usize,
    },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto {
            n_log: 200,
            n_lin: 2000,
        }
    }
}

/// Smallest width resolved by the automatic grid.
pub const AUTO_GRID_MIN: f64 = 1e-4;

impl GridSpec {
    /// Outer edge of the automatic grid: `4·max(γ⊥, 2κ, 2ω_ro)`.
    pub fn auto_extent(p: &LaserParams, omega_ro: f64) -> f64 {
        4.0 * p.gamma_perp.max(2.0 * p.kappa).max(2.0 * omega_ro)
    }

    pub fn build(&self, p: &LaserParams, omega_ro: f64) -> Result<Vec<f64>> {
        match *self {
            GridSpec::Auto { n_log, n_lin } => {
                let max = Self::auto_extent(p, omega_ro);
                composite(AUTO_GRID_MIN, max / n_lin.max(1) as f64, max, n_log, n_lin)
            }
            GridSpec::Linear { max, points } => {
                if !(max > 0.0) || points < 2 {
                    return Err(Error::Config(format!(
                        "linear grid needs max > 0 and at least 2 points (got {max}, {points})"
                    )));
                }
                let h = max / (points - 1) as f64;
                let half: Vec<f64> = (1..points).map(|i| i as f64 * h).collect();
                Ok(mirror(&half))
            }
            GridSpec::Composite {
                min,
                join,
                max,
                n_log,
                n_lin,
            } => composite(min, join, max, n_log, n_lin),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `auto`, `auto:NLOG:NLIN`, `linear:MAX:POINTS` or
    /// `composite:MIN:JOIN:MAX:NLOG:NLIN`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("invalid grid spec `{s}`"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let int = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["auto"] => Ok(GridSpec::default()),
            ["auto", a, b] => Ok(GridSpec::Auto {
                n_log: int(a)?,
                n_lin: int(b)?,
            }),
            ["linear", m, n] => Ok(GridSpec::Linear {
                max: num(m)?,
                points: int(n)?,
            }),
            ["composite", a, b, c, d, e] => Ok(GridSpec::Composite {
                min: num(a)?,
                join: num(b)?,
                max: num(c)?,
                n_log: int(d)?,
                n_lin: int(e)?,
            }),
            _ => Err(bad()),
        }
    }
}

fn composite(min: f64, join: f64, max: f64, n_log: usize, n_lin: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && min < join && join < max) || n_log < 2 || n_lin < 1 {
        return Err(Error::Config(format!(
            "composite grid needs 0 < min < join < max and enough points \
             (got {min}, {join}, {max}, {n_log}, {n_lin})"
        )));
    }
    let mut half = Vec::with_capacity(n_log + n_lin);
    let ratio = (join / min).ln();
    for i in 0..n_log {
        half.push(min * (ratio * i as f64 / (n_log - 1) as f64).exp());
    }
    let h = (max - join) / n_lin as f64;
    for i in 1..=n_lin {
        half.push(join + i as f64 * h);
    }
    Ok(mirror(&half))
}

/// `[-x_k, …, -x_1, 0, x_1, …, x_k]` from strictly increasing positive `x`.
fn mirror(half: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = half.iter().rev().map(|x| -x).collect();
    g.push(0.0);
    g.extend_from_slice(half);
    g
}

/// Parameter and state echo attached to every sampled spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub params: LaserParams,
    pub inversion: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_ro: Option<f64>,
    /// Most negative sampled value, for kinds that may dip below zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_negativity: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub kind: SpectrumKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn from_density<D: SpectralDensity + ?Sized>(
        density: &D,
        grid: Vec<f64>,
        mut meta: SpectrumMeta,
    ) -> Self {
        let values = density.sample(&grid);
        if !density.kind().is_nonnegative() {
            let min = values.iter().copied().fold(0.0, f64::min);
            meta.max_negativity = Some(-min);
        }
        Spectrum {
            kind: density.kind(),
            grid,
            values,
            meta,
        }
    }

    pub fn peaks(&self) -> Vec<Peak> {
        peak_finder(&self.grid, &self.values)
    }

    /// Value at ω = 0, if the grid contains it.
    pub fn at_zero(&self) -> Option<f64> {
        self.grid
            .iter()
            .position(|&w| w == 0.0)
            .map(|i| self.values[i])
    }
}
