//! Noise-free stationary solution: threshold and photon number.

use serde::{Deserialize, Serialize};

use crate::params::{DerivedParams, LaserParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalState {
    pub n: f64,
    pub inversion: f64,
    pub lasing: bool,
    /// False when N0 ≤ Nth, so no pump can reach threshold.
    pub lasing_possible: bool,
}

/// Photon number from the energy balance `2κn + Ne = P·Ng` at inversion `n_inv`.
pub fn photons_from_energy_balance(p: &LaserParams, n_inv: f64) -> f64 {
    (p.pump * (p.n0 - n_inv) - p.n0 - n_inv) / (4.0 * p.kappa)
}

/// Pump-balance inversion in the absence of stimulated emission.
pub fn spontaneous_inversion(p: &LaserParams) -> f64 {
    p.n0 * (p.pump - 1.0) / (p.pump + 1.0)
}

pub fn semiclassical_state(p: &LaserParams, d: &DerivedParams) -> SemiclassicalState {
    let lasing_possible = d.can_lase(p);
    let lasing = lasing_possible && p.pump > d.pth;
    if lasing {
        SemiclassicalState {
            n: (p.n0 + d.nth) * (p.pump / d.pth - 1.0) / (4.0 * p.kappa),
            inversion: d.nth,
            lasing,
            lasing_possible,
        }
    } else {
        SemiclassicalState {
            n: 0.0,
            inversion: spontaneous_inversion(p),
            lasing,
            lasing_possible,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
    use proptest::prelude::*;

    fn preset(gamma_perp: f64, pump: f64) -> LaserParams {
        LaserParams {
            kappa: 50.0,
            gamma_perp,
            omega_rabi: 34.0,
            f: 0.5,
            n0: 100.0,
            pump,
        }
    }

    fn energy_residual(p: &LaserParams, s: &SemiclassicalState) -> f64 {
        let ne = 0.5 * (s.inversion + p.n0);
        let ng = p.n0 - ne;
        let lhs = 2.0 * p.kappa * s.n + ne;
        let rhs = p.pump * ng;
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
    }

    #[test]
    fn zero_photons_at_threshold() {
        let p = preset(50.0, 1.0);
        let d = derive(&p);
        let s = semiclassical_state(&p.with_pump(d.pth), &d);
        assert_eq!(s.n, 0.0);
    }

    #[test]
    fn photon_number_above_threshold() {
        // oracle: energy balance solved by hand at N = Nth
        let p = preset(50.0, 2.0);
        let d = derive(&p);
        let s = semiclassical_state(&p, &d);
        assert!(s.lasing);
        let ne = 0.5 * (d.nth + 100.0);
        let expected = (2.0 * (100.0 - ne) - ne) / 100.0;
        assert!((s.n - expected).abs() < 1e-12);
        assert!((s.n - 0.4676).abs() < 1e-3);
    }

    #[test]
    fn slope_at_high_pump() {
        let p = preset(50.0, 1e6);
        let d = derive(&p);
        let s1 = semiclassical_state(&p, &d);
        let s2 = semiclassical_state(&p.with_pump(1e6 + 1.0), &d);
        let slope = (100.0 - d.nth) / (4.0 * 50.0);
        assert!((s2.n - s1.n - slope).abs() < 1e-6 * slope);
    }

    #[test]
    fn no_lasing_with_too_few_emitters() {
        let p = LaserParams { n0: 10.0, ..preset(700.0, 1e3) };
        let s = semiclassical_state(&p, &derive(&p));
        assert!(!s.lasing && !s.lasing_possible);
        assert_eq!(s.n, 0.0);
    }

    proptest! {
        #[test]
        fn energy_conserved(gamma_perp in 1.0f64..2000.0, pump in 0.0f64..100.0) {
            let p = preset(gamma_perp, pump);
            let d = derive(&p);
            let s = semiclassical_state(&p, &d);
            prop_assert!(s.n >= 0.0);
            prop_assert!(energy_residual(&p, &s) <= 1e-12);
        }

        #[test]
        fn continuous_at_threshold(gamma_perp in 1.0f64..1000.0) {
            let p = preset(gamma_perp, 1.0);
            let d = derive(&p);
            let eps = 1e-9 * d.pth;
            let lo = semiclassical_state(&p.with_pump(d.pth - eps), &d);
            let hi = semiclassical_state(&p.with_pump(d.pth + eps), &d);
            prop_assert!((hi.n - lo.n).abs() < 1e-6);
            prop_assert!((hi.inversion - lo.inversion).abs() < 1e-6 * p.n0);
        }
    }
}
