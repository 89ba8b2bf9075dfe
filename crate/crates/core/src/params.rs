//! Laser parameters in physical and working units, and the closed-form
//! quantities derived from them.
//!
//! Working units: every rate and frequency is measured in units of the
//! population relaxation rate γ∥, which is therefore 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
const HBAR: f64 = 1.054_571_817e-34;

/// Cavity mode volume, either absolute or in units of the cubed material
/// wavelength `(λ0/n_r)³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeVolume {
    CubicMeters(f64),
    WavelengthCubed(f64),
}

/// Device description in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalInputs {
    /// Vacuum wavelength in metres.
    pub lambda0: f64,
    pub n_r: f64,
    pub mode_volume: ModeVolume,
    /// Transition dipole moment in C·m.
    pub dipole: f64,
    pub q_factor: f64,
    /// Population relaxation rate γ∥ in s⁻¹.
    pub gamma_par: f64,
    /// Transition width γ⊥ in s⁻¹.
    pub gamma_perp: f64,
    pub n0: u64,
    pub f: f64,
    pub pump: f64,
}

impl PhysicalInputs {
    pub fn validate(&self) -> Result<()> {
        positive("lambda0", self.lambda0)?;
        positive("n_r", self.n_r)?;
        match self.mode_volume {
            ModeVolume::CubicMeters(v) | ModeVolume::WavelengthCubed(v) => positive("mode_volume", v)?,
        }
        positive("dipole", self.dipole)?;
        positive("q_factor", self.q_factor)?;
        positive("gamma_par", self.gamma_par)?;
        positive("gamma_perp", self.gamma_perp)?;
        if self.n0 < 1 {
            return Err(Error::validation("n0", "at least one emitter is required"));
        }
        coupling_factor(self.f)?;
        pump(self.pump)
    }

    /// Angular transition frequency ω0 = 2πc/λ0 in rad/s.
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.lambda0
    }

    pub fn volume_m3(&self) -> f64 {
        match self.mode_volume {
            ModeVolume::CubicMeters(v) => v,
            ModeVolume::WavelengthCubed(k) => k * (self.lambda0 / self.n_r).powi(3),
        }
    }
}

/// Dimensionless working parameters (γ∥ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserParams {
    /// Field half-decay rate κ.
    pub kappa: f64,
    pub gamma_perp: f64,
    /// Vacuum Rabi frequency Ω0.
    pub omega_rabi: f64,
    /// Mean squared coupling factor.
    pub f: f64,
    /// Emitter count.
    pub n0: f64,
    /// Dimensionless pump rate P.
    pub pump: f64,
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        positive("kappa", self.kappa)?;
        positive("gamma_perp", self.gamma_perp)?;
        positive("omega_rabi", self.omega_rabi)?;
        coupling_factor(self.f)?;
        if !(self.n0 >= 1.0) || !self.n0.is_finite() {
            return Err(Error::validation("n0", format!("must be >= 1, got {}", self.n0)));
        }
        pump(self.pump)
    }

    pub fn with_pump(self, pump: f64) -> Self {
        Self { pump, ..self }
    }

    /// Ω0/(2κ+γ⊥); the model assumes this is small.
    pub fn coupling_ratio(&self) -> f64 {
        self.omega_rabi / (2.0 * self.kappa + self.gamma_perp)
    }

    /// True when the weak-coupling assumption Ω0 ≪ 2κ+γ⊥ is clearly broken.
    pub fn weak_coupling_violated(&self) -> bool {
        self.coupling_ratio() >= 1.0
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {v}")))
    }
}

fn coupling_factor(f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(Error::validation("f", format!("must lie in (0, 1], got {f}")))
    }
}

fn pump(p: f64) -> Result<()> {
    if p >= 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("pump", format!("must be non-negative and finite, got {p}")))
    }
}

/// Converts SI inputs into working units.
pub fn normalize(inputs: &PhysicalInputs) -> Result<LaserParams> {
    inputs.validate()?;
    let omega0 = inputs.omega0();
    let g = inputs.gamma_par;
    let rabi = inputs.dipole / inputs.n_r
        * (omega0 / (VACUUM_PERMITTIVITY * HBAR * inputs.volume_m3())).sqrt();
    let p = LaserParams {
        kappa: omega0 / (2.0 * inputs.q_factor) / g,
        gamma_perp: inputs.gamma_perp / g,
        omega_rabi: rabi / g,
        f: inputs.f,
        n0: inputs.n0 as f64,
        pump: inputs.pump,
    };
    p.validate()?;
    Ok(p)
}

/// Closed-form quantities that depend only on the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Threshold inversion κγ⊥/(2Ω0²f).
    pub nth: f64,
    /// Semiclassical pump threshold (N0+Nth)/(N0−Nth); infinite if N0 ≤ Nth.
    pub pth: f64,
    /// Inversion below which the emitters split the cavity line.
    pub nc: f64,
    /// β̃ = 4Ω0²f/γ⊥.
    pub beta_tilde: f64,
    /// β̃_c = β̃/(1+2κ/γ⊥).
    pub beta_tilde_c: f64,
    /// Conventional β = β̃/(1+β̃).
    pub beta_conv: f64,
    /// 2κγ⊥/(2κ+γ⊥).
    pub gamma_c: f64,
    /// γ_P = P+1.
    pub gamma_p: f64,
}

impl DerivedParams {
    /// Whether the semiclassical model can lase at any pump.
    pub fn can_lase(&self, p: &LaserParams) -> bool {
        p.n0 > self.nth
    }
}

pub fn derive(p: &LaserParams) -> DerivedParams {
    let k2 = 2.0 * p.kappa;
    let g = p.gamma_perp;
    let om2f = p.omega_rabi * p.omega_rabi * p.f;
    let nth = p.kappa * g / (2.0 * om2f);
    let pth = if p.n0 > nth {
        (p.n0 + nth) / (p.n0 - nth)
    } else {
        f64::INFINITY
    };
    let beta_tilde = 4.0 * om2f / g;
    DerivedParams {
        nth,
        pth,
        nc: 0.5 * (k2 / g + g / k2) * nth,
        beta_tilde,
        beta_tilde_c: beta_tilde / (1.0 + k2 / g),
        beta_conv: beta_tilde / (1.0 + beta_tilde),
        gamma_c: k2 * g / (k2 + g),
        gamma_p: p.pump + 1.0,
    }
}
