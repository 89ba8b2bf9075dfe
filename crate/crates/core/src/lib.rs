//! Steady states, optical spectra, linewidths and intensity-noise spectra of
//! single-mode two-level nanolasers from linearized quantum Langevin
//! equations, with a Monte-Carlo integrator of the same linear system as an
//! independent check on the analytic spectra.
//!
//! All rates and frequencies are in units of the population relaxation rate.

pub mod commands;
pub mod config;
pub mod error;
pub mod fluct;
pub mod mcsim;
pub mod noise;
pub mod nofluct;
pub mod numerics;
pub mod output;
pub mod params;
pub mod presets;
pub mod semiclassical;
pub mod spectrum;

pub use error::{Error, Result};
pub use params::{derive, normalize, DerivedParams, LaserParams, ModeVolume, PhysicalInputs};
