//! Diffusion coefficients `2D_{αβ}` of the Langevin forces, shared by the
//! analytic spectra and the Monte-Carlo integrator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedParams, LaserParams};

/// Every field holds a full `2D` correlation strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// `2D_{aa⁺} = 2κ`.
    pub d_aa_plus: f64,
    /// `2D_{v⁺v} = fγ⊥Ne`, the form used when population fluctuations are neglected.
    pub d_vpv_nofluct: f64,
    /// `2D_{v⁺v} = f[γ⊥Ne + (P·Ng − Ne)]`.
    pub d_vpv_full: f64,
    /// `2D_{vv⁺} = f[γ⊥Ng − (P·Ng − Ne)]`; may be negative.
    pub d_vv_plus: f64,
    pub d_a_a: f64,
    pub d_a_s: f64,
    pub d_v_a: f64,
    pub d_v_s: f64,
    /// `2D_{NeNe} = P·Ng + Ne`.
    pub d_ne_ne: f64,
    /// Cross coefficient between polarization and population noise.
    pub cross_v_ne: f64,
}

pub fn noise_model(p: &LaserParams, _d: &DerivedParams, ne: f64) -> Result<NoiseModel> {
    if !(0.0..=p.n0).contains(&ne) {
        return Err(Error::validation(
            "ne",
            format!("excited population {ne} outside [0, {}]", p.n0),
        ));
    }
    let ng = p.n0 - ne;
    let net_pump = p.pump * ng - ne;
    let d_vpv_full = p.f * (p.gamma_perp * ne + net_pump);
    let d_vv_plus = p.f * (p.gamma_perp * ng - net_pump);
    let d_aa_plus = 2.0 * p.kappa;
    let (d_a_a, d_a_s, _) = combine(0.0, d_aa_plus, 0.0, 0.0);
    let (d_v_a, d_v_s, _) = combine(0.0, d_vv_plus, d_vpv_full, 0.0);
    Ok(NoiseModel {
        d_aa_plus,
        d_vpv_nofluct: p.f * p.gamma_perp * ne,
        d_vpv_full,
        d_vv_plus,
        d_a_a,
        d_a_s,
        d_v_a,
        d_v_s,
        d_ne_ne: p.pump * ng + ne,
        cross_v_ne: 0.0,
    })
}

/// Diffusion coefficients of the quadrature combinations
/// `F_S = (F e^{−iπ/4} + F⁺ e^{iπ/4})/2` and `F_A = (F e^{iπ/4} + F⁺ e^{−iπ/4})/2`
/// from the four operator coefficients `2D_{αα}, 2D_{αα⁺}, 2D_{α⁺α}, 2D_{α⁺α⁺}`.
///
/// Returns `(2D_AA, 2D_SS, 2D_SA)`; the cross term is complex in general.
pub fn combine(d_11: f64, d_12: f64, d_21: f64, d_22: f64) -> (f64, f64, Complex64) {
    let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let ec = e.conj();
    // 2D_{XY} = Σ c_X,i c_Y,j 2D_ij over the operator pairs (F, F⁺)
    let coeff_s = [0.5 * ec, 0.5 * e];
    let coeff_a = [0.5 * e, 0.5 * ec];
    let d = [[d_11, d_12], [d_21, d_22]];
    let pair = |x: &[Complex64; 2], y: &[Complex64; 2]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += x[i] * y[j] * d[i][j];
            }
        }
        acc
    };
    (
        pair(&coeff_a, &coeff_a).re,
        pair(&coeff_s, &coeff_s).re,
        pair(&coeff_s, &coeff_a),
    )
}
