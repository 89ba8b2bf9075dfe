//! Stationary state, optical spectrum and linewidth with population
//! fluctuations neglected (`N̂ ≈ N`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{try_find_root, Feature};
use crate::params::{DerivedParams, LaserParams};
use crate::semiclassical::photons_from_energy_balance;
use crate::spectrum::{GridSpec, SpectralDensity, Spectrum, SpectrumKind, SpectrumMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoFluctState {
    pub inversion: f64,
    pub ne: f64,
    pub ng: f64,
    pub n: f64,
    pub two_peak: bool,
    /// Pump at which the spectrum stops being split, when such a pump exists.
    pub pc: Option<f64>,
    /// The literal quadratic branch fell outside `[−N0, Nth)` and the other
    /// root was taken.
    pub branch_swapped: bool,
}

/// A quadratic `A·x² − B·x + C = 0` in `x = N/Nth`.
#[derive(Debug, Clone, Copy)]
pub struct InversionQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl InversionQuadratic {
    /// Energy balance with the no-fluctuation photon number:
    /// `(P+1)x² − [(P−1)a + P + 1 + β̃_c]x + a(P − 1 − β̃_c) = 0`, `a = N0/Nth`.
    pub fn below_threshold(p: &LaserParams, d: &DerivedParams) -> Self {
        let a = p.n0 / d.nth;
        let pp = p.pump;
        Self {
            a: pp + 1.0,
            b: (pp - 1.0) * a + pp + 1.0 + d.beta_tilde_c,
            c: a * (pp - 1.0 - d.beta_tilde_c),
        }
    }

    /// High-pump variant whose spontaneous source is `β̃_c(N0+Nth)/2`:
    /// `(P+1)x² − [(P−1)a + P + 1]x + (P−1)a − β̃_c(a+1)/2 = 0`.
    pub fn high_pump(p: &LaserParams, d: &DerivedParams) -> Self {
        let a = p.n0 / d.nth;
        let pp = p.pump;
        Self {
            a: pp + 1.0,
            b: (pp - 1.0) * a + pp + 1.0,
            c: (pp - 1.0) * a - 0.5 * d.beta_tilde_c * (a + 1.0),
        }
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// `(B − √Q)/(2A)`, evaluated without cancellation.
    pub fn lower_root(&self) -> f64 {
        let sq = self.discriminant().max(0.0).sqrt();
        if self.b > 0.0 {
            2.0 * self.c / (self.b + sq)
        } else {
            (self.b - sq) / (2.0 * self.a)
        }
    }

    /// `(B + √Q)/(2A)`, evaluated without cancellation.
    pub fn upper_root(&self) -> f64 {
        let sq = self.discriminant().max(0.0).sqrt();
        if self.b > 0.0 {
            (self.b + sq) / (2.0 * self.a)
        } else {
            2.0 * self.c / (self.b - sq)
        }
    }

    pub fn residual(&self, x: f64) -> f64 {
        self.a * x * x - self.b * x + self.c
    }
}

fn admissible(p: &LaserParams, d: &DerivedParams, inv: f64, closed: bool) -> bool {
    let upper = if closed { inv <= d.nth * (1.0 + 1e-12) } else { inv < d.nth };
    inv >= -p.n0 * (1.0 + 1e-12) && upper
}

/// Selects the lower root of the quadratic, falling back to the other one if
/// the lower root leaves `[−N0, Nth)`. With `closed` the threshold inversion
/// itself is admissible.
fn pick_root(
    p: &LaserParams,
    d: &DerivedParams,
    q: &InversionQuadratic,
    closed: bool,
) -> Result<(f64, bool)> {
    let lo = q.lower_root() * d.nth;
    if admissible(p, d, lo, closed) {
        return Ok((lo.clamp(-p.n0, d.nth), false));
    }
    let hi = q.upper_root() * d.nth;
    if admissible(p, d, hi, closed) {
        return Ok((hi.clamp(-p.n0, d.nth), true));
    }
    Err(Error::NoRoot(format!(
        "neither root of the inversion quadratic ({lo}, {hi}) lies in [{}, {})",
        -p.n0, d.nth
    )))
}

pub fn solve_n_nofluct(p: &LaserParams, d: &DerivedParams) -> Result<NoFluctState> {
    let q = InversionQuadratic::below_threshold(p, d);
    let (inv, branch_swapped) = pick_root(p, d, &q, false)?;
    let ne = 0.5 * (inv + p.n0);
    let ng = p.n0 - ne;
    // n = (M_b + √Q_b)/(4β̃) with M_b = (P−1)a − P − 1 − β̃_c
    let a = p.n0 / d.nth;
    let mb = (p.pump - 1.0) * a - p.pump - 1.0 - d.beta_tilde_c;
    let qb = mb * mb + 8.0 * p.pump * d.beta_tilde_c * a;
    let sq = qb.sqrt();
    let n = if branch_swapped {
        photon_number_nofluct(p, d, inv)?
    } else if mb >= 0.0 {
        (mb + sq) / (4.0 * d.beta_tilde)
    } else {
        8.0 * p.pump * d.beta_tilde_c * a / ((sq - mb) * 4.0 * d.beta_tilde)
    };
    Ok(NoFluctState {
        inversion: inv,
        ne,
        ng,
        n,
        two_peak: is_split(p, d, inv),
        pc: solve_pc(p, d).ok(),
        branch_swapped,
    })
}

/// Whether the no-fluctuation spectrum at this inversion has two maxima.
pub fn is_split(p: &LaserParams, d: &DerivedParams, inversion: f64) -> bool {
    d.nc < p.n0 && inversion < -d.nc
}

fn check_below_threshold(d: &DerivedParams, inversion: f64) -> Result<()> {
    if inversion < d.nth {
        Ok(())
    } else {
        Err(Error::Pole(format!(
            "no stationary spectrum at or above threshold (N = {inversion}, Nth = {})",
            d.nth
        )))
    }
}

/// `n = γ⊥Ne/((2κ+γ⊥)(Nth−N))`.
pub fn photon_number_nofluct(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<f64> {
    check_below_threshold(d, inversion)?;
    let ne = 0.5 * (inversion + p.n0);
    Ok(p.gamma_perp * ne / ((2.0 * p.kappa + p.gamma_perp) * (d.nth - inversion)))
}

/// The common denominator `[(1−N/Nth)κγ⊥/2 − ω²]² + ω²(κ+γ⊥/2)²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FieldResonance {
    pub stiffness: f64,
    pub damping: f64,
}

impl FieldResonance {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Self {
        Self {
            stiffness: (1.0 - inversion / d.nth) * p.kappa * p.gamma_perp / 2.0,
            damping: p.kappa + p.gamma_perp / 2.0,
        }
    }

    pub fn denominator(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let s = self.stiffness - w2;
        s * s + w2 * self.damping * self.damping
    }

    /// Roots of `s² + damping·s + stiffness`.
    pub fn features(&self) -> Vec<Feature> {
        let disc = self.damping * self.damping - 4.0 * self.stiffness;
        if disc >= 0.0 {
            let r = disc.sqrt();
            vec![
                Feature { center: 0.0, width: 0.5 * (self.damping - r).abs().max(1e-300) },
                Feature { center: 0.0, width: 0.5 * (self.damping + r) },
            ]
        } else {
            vec![Feature {
                center: 0.5 * (-disc).sqrt(),
                width: 0.5 * self.damping,
            }]
        }
    }
}

/// Optical spectrum with population fluctuations neglected.
#[derive(Debug, Clone, Copy)]
pub struct NoFluctDensity {
    numerator: f64,
    res: FieldResonance,
    scale: f64,
}

impl NoFluctDensity {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<Self> {
        check_below_threshold(d, inversion)?;
        let ne = 0.5 * (inversion + p.n0);
        Ok(Self {
            numerator: p.kappa * p.gamma_perp * p.gamma_perp / 2.0 * ne / d.nth,
            res: FieldResonance::new(p, d, inversion),
            scale: 2.0 * p.kappa + p.gamma_perp,
        })
    }
}

impl SpectralDensity for NoFluctDensity {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::Nofluct
    }
    fn density(&self, omega: f64) -> f64 {
        self.numerator / self.res.denominator(omega)
    }
    fn tail_coefficient(&self) -> f64 {
        0.0
    }
    fn scale(&self) -> f64 {
        self.scale
    }
    fn features(&self) -> Vec<Feature> {
        self.res.features()
    }
}

pub fn spectrum_nofluct(
    p: &LaserParams,
    d: &DerivedParams,
    inversion: f64,
    grid: &GridSpec,
) -> Result<Spectrum> {
    let dens = NoFluctDensity::new(p, d, inversion)?;
    let meta = SpectrumMeta {
        params: *p,
        inversion,
        photon_number: Some(photon_number_nofluct(p, d, inversion)?),
        omega_ro: None,
        max_negativity: None,
        warnings: Vec::new(),
    };
    Ok(Spectrum::from_density(&dens, grid.build(p, 0.0)?, meta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinewidthMethod {
    Exact,
    FirstOrder,
    PowerFormLow,
    PowerFormHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinewidthResult {
    pub gamma_las: f64,
    /// `r = 4κγ⊥(1−N/Nth)/(2κ+γ⊥)²`; the spectrum splits for `r > 1`.
    pub r: f64,
    pub method: LinewidthMethod,
}

pub fn linewidth_r(p: &LaserParams, d: &DerivedParams, inversion: f64) -> f64 {
    let s = 2.0 * p.kappa + p.gamma_perp;
    4.0 * p.kappa * p.gamma_perp / (s * s) * (1.0 - inversion / d.nth)
}

/// Closed-form FWHM of the no-fluctuation spectrum as a function of `r`.
pub fn exact_fwhm(p: &LaserParams, r: f64) -> f64 {
    let s = 2.0 * p.kappa + p.gamma_perp;
    let rm = r - 1.0;
    // r − 1 + √((r−1)² + r²) rewritten to avoid cancellation for small r
    let brace = if rm < 0.0 {
        r * r / ((rm * rm + r * r).sqrt() - rm)
    } else {
        rm + (rm * rm + r * r).sqrt()
    };
    s / std::f64::consts::SQRT_2 * brace.sqrt()
}

/// Generic power-law linewidth `γ_c²·N_sp/(2κn)`.
pub fn power_form(p: &LaserParams, d: &DerivedParams, n_sp: f64, n: f64) -> f64 {
    d.gamma_c * d.gamma_c * n_sp / (2.0 * p.kappa * n)
}

/// `N_sp = (N0+Nth)/(2Nth)`.
pub fn high_pump_nsp(p: &LaserParams, d: &DerivedParams) -> f64 {
    (p.n0 + d.nth) / (2.0 * d.nth)
}

pub fn linewidth_nofluct(
    p: &LaserParams,
    d: &DerivedParams,
    inversion: f64,
    method: LinewidthMethod,
) -> Result<LinewidthResult> {
    check_below_threshold(d, inversion)?;
    let r = linewidth_r(p, d, inversion);
    let gamma_las = match method {
        LinewidthMethod::Exact => {
            if r > 1.0 {
                return Err(Error::SplitSpectrum(format!(
                    "r = {r} > 1 at N = {inversion} (N < −Nc = {})",
                    -d.nc
                )));
            }
            exact_fwhm(p, r)
        }
        LinewidthMethod::FirstOrder => d.gamma_c * (1.0 - inversion / d.nth),
        LinewidthMethod::PowerFormLow | LinewidthMethod::PowerFormHigh => {
            let n = photon_number_nofluct(p, d, inversion)?;
            if !(n > 0.0) {
                return Err(Error::Pole("linewidth power form undefined at n = 0".into()));
            }
            if method == LinewidthMethod::PowerFormLow {
                let ne = 0.5 * (inversion + p.n0);
                power_form(p, d, ne / d.nth, n)
            } else {
                0.5 * power_form(p, d, high_pump_nsp(p, d), n)
            }
        }
    };
    Ok(LinewidthResult {
        gamma_las,
        r,
        method,
    })
}

/// Pump at which the no-fluctuation inversion reaches `−Nc`.
pub fn solve_pc(p: &LaserParams, d: &DerivedParams) -> Result<f64> {
    if d.nc >= p.n0 {
        return Err(Error::NoSplitting { n_c: d.nc, n0: p.n0 });
    }
    let inv_at = |pump: f64| -> Result<f64> {
        let q = p.with_pump(pump);
        Ok(solve_n_nofluct_inner(&q, d)? + d.nc)
    };
    // N(P) rises monotonically from −N0 at P = 0; grow the bracket until it crosses −Nc
    let mut hi = 1.0;
    while inv_at(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoRoot("inversion never reaches −Nc".into()));
        }
    }
    try_find_root(inv_at, (0.0, hi), 1e-13 * hi)
}

fn solve_n_nofluct_inner(p: &LaserParams, d: &DerivedParams) -> Result<f64> {
    pick_root(p, d, &InversionQuadratic::below_threshold(p, d), false).map(|(x, _)| x)
}

/// `1 − 4κn/(γ⊥(Nth+N0))·(2n + 1/(1+2κ/γ⊥))`: how far the field commutator
/// deviates from 1 with the full polarization diffusion coefficient.
pub fn commutator_defect(p: &LaserParams, d: &DerivedParams, n: f64) -> f64 {
    1.0 - 4.0 * p.kappa * n / (p.gamma_perp * (d.nth + p.n0))
        * (2.0 * n + 1.0 / (1.0 + 2.0 * p.kappa / p.gamma_perp))
}

/// Inversion and photon number from the high-pump quadratic.
pub fn highpump_closed_form(p: &LaserParams, d: &DerivedParams) -> Result<(f64, f64)> {
    let (inv, _) = pick_root(p, d, &InversionQuadratic::high_pump(p, d), true)?;
    Ok((inv, photons_from_energy_balance(p, inv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{find_root, fwhm};
    use crate::params::derive;
    use crate::semiclassical::semiclassical_state;
    use proptest::prelude::*;

    fn preset(gamma_perp: f64, pump: f64) -> (LaserParams, DerivedParams) {
        let p = LaserParams {
            kappa: 50.0,
            gamma_perp,
            omega_rabi: 34.0,
            f: 0.5,
            n0: 100.0,
            pump,
        };
        (p, derive(&p))
    }

    fn energy_rel(p: &LaserParams, inv: f64, n: f64) -> f64 {
        let ne = 0.5 * (inv + p.n0);
        let lhs = 2.0 * p.kappa * n + ne;
        let rhs = p.pump * (p.n0 - ne);
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
    }

    #[test]
    fn unpumped_inversion_is_minus_n0() {
        let (p, d) = preset(50.0, 0.0);
        let s = solve_n_nofluct(&p, &d).unwrap();
        assert_eq!(s.inversion, -100.0);
        assert_eq!(s.n, 0.0);
        assert_eq!(photon_number_nofluct(&p, &d, -100.0).unwrap(), 0.0);
    }

    #[test]
    fn inversion_matches_bisection_oracle() {
        let (p, d) = preset(50.0, 4.0);
        let s = solve_n_nofluct(&p, &d).unwrap();
        // independent oracle: bracket the energy balance written with the
        // closed-form photon number, on (−N0, Nth)
        let g = |inv: f64| {
            let ne = 0.5 * (inv + 100.0);
            let n = 50.0 * ne / (150.0 * (d.nth - inv));
            2.0 * 50.0 * n + ne - 4.0 * (100.0 - ne)
        };
        let mut lo = -100.0;
        let mut hi = d.nth - 1e-12;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 { lo = mid } else { hi = mid }
        }
        assert!((s.inversion - lo).abs() < 1e-9, "{} vs {lo}", s.inversion);
        let q = InversionQuadratic::below_threshold(&p, &d);
        assert!(q.residual(s.inversion / d.nth).abs() * d.nth <= 1e-10 * 100.0);
    }

    #[test]
    fn photon_number_matches_quadrature() {
        for (g, pump) in [(50.0, 0.1), (50.0, 4.0), (700.0, 16.0), (1500.0, 2.0)] {
            let (p, d) = preset(g, pump);
            let s = solve_n_nofluct(&p, &d).unwrap();
            let dens = NoFluctDensity::new(&p, &d, s.inversion).unwrap();
            let q = dens.integrated().unwrap();
            assert!((q - s.n).abs() <= 1e-6 * s.n, "{g} {pump}: {q} vs {}", s.n);
        }
    }

    #[test]
    fn pole_at_threshold() {
        let (p, d) = preset(50.0, 4.0);
        assert!(matches!(NoFluctDensity::new(&p, &d, d.nth), Err(Error::Pole(_))));
        assert!(matches!(photon_number_nofluct(&p, &d, d.nth + 1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn splitting_pump_for_superradiant_preset() {
        let (p, d) = preset(50.0, 1.0);
        let pc = solve_pc(&p, &d).unwrap();
        assert!((pc - 7.4).abs() < 0.4, "{pc}");
        let inv = solve_n_nofluct(&p.with_pump(pc), &d).unwrap().inversion;
        assert!((inv + d.nc).abs() <= 1e-8 * 100.0);
    }

    #[test]
    fn no_splitting_for_broad_transition() {
        let (p, d) = preset(700.0, 1.0);
        assert!(matches!(solve_pc(&p, &d), Err(Error::NoSplitting { .. })));
    }

    #[test]
    fn peak_count_follows_splitting() {
        for (g, pump, expected) in [
            (50.0, 2.0, true),
            (50.0, 4.0, true),
            (50.0, 8.0, false),
            (50.0, 10.0, false),
            (50.0, 16.0, false),
            (700.0, 2.0, false),
            (700.0, 16.0, false),
        ] {
            let (p, d) = preset(g, pump);
            let s = solve_n_nofluct(&p, &d).unwrap();
            assert_eq!(s.two_peak, expected, "{g} {pump}");
            let spec = spectrum_nofluct(&p, &d, s.inversion, &GridSpec::default()).unwrap();
            let peaks = spec.peaks();
            assert_eq!(peaks.len(), 1);
            assert_eq!(peaks[0].omega > 0.0, expected, "{g} {pump}: {peaks:?}");
        }
    }

    #[test]
    fn exact_linewidth_matches_numeric_fwhm() {
        for (g, pump) in [(50.0, 10.0), (50.0, 16.0), (700.0, 2.0), (1500.0, 40.0)] {
            let (p, d) = preset(g, pump);
            let s = solve_n_nofluct(&p, &d).unwrap();
            let lw = linewidth_nofluct(&p, &d, s.inversion, LinewidthMethod::Exact).unwrap();
            let dens = NoFluctDensity::new(&p, &d, s.inversion).unwrap();
            let numeric = fwhm(|w| dens.density(w), lw.gamma_las).unwrap();
            assert!((numeric - lw.gamma_las).abs() <= 1e-6 * lw.gamma_las, "{g} {pump}");
        }
    }

    #[test]
    fn exact_linewidth_rejects_split_spectrum() {
        let (p, d) = preset(50.0, 2.0);
        let s = solve_n_nofluct(&p, &d).unwrap();
        assert!(matches!(
            linewidth_nofluct(&p, &d, s.inversion, LinewidthMethod::Exact),
            Err(Error::SplitSpectrum(_))
        ));
    }

    #[test]
    fn linewidth_vanishes_at_threshold_inversion() {
        let (p, _) = preset(50.0, 1.0);
        assert_eq!(exact_fwhm(&p, 0.0), 0.0);
    }

    #[test]
    fn first_order_is_small_r_limit() {
        let (p, d) = preset(700.0, 1.0);
        for eps in [1e-3, 1e-5, 1e-7] {
            let inv = d.nth * (1.0 - eps);
            let e = linewidth_nofluct(&p, &d, inv, LinewidthMethod::Exact).unwrap();
            let f = linewidth_nofluct(&p, &d, inv, LinewidthMethod::FirstOrder).unwrap();
            assert!((e.gamma_las / f.gamma_las - 1.0).abs() < 10.0 * e.r, "{eps}");
        }
    }

    #[test]
    fn power_form_low_equals_first_order() {
        // with the no-fluctuation photon number the two coincide identically
        let (p, d) = preset(50.0, 0.2);
        let s = solve_n_nofluct(&p, &d).unwrap();
        let a = linewidth_nofluct(&p, &d, s.inversion, LinewidthMethod::PowerFormLow).unwrap();
        let b = linewidth_nofluct(&p, &d, s.inversion, LinewidthMethod::FirstOrder).unwrap();
        assert!((a.gamma_las - b.gamma_las).abs() <= 1e-12 * b.gamma_las);
    }

    #[test]
    fn power_form_high_is_half_of_low() {
        let (p, d) = preset(50.0, 30.0);
        for (nsp, n) in [(1.0, 3.0), (24.1, 0.7)] {
            assert_eq!(0.5 * power_form(&p, &d, nsp, n) * 2.0, power_form(&p, &d, nsp, n));
        }
    }

    #[test]
    fn commutator_defect_values() {
        let (p, d) = preset(50.0, 2.0);
        assert_eq!(commutator_defect(&p, &d, 0.0), 1.0);
        let n = solve_n_nofluct(&p, &d).unwrap().n;
        let expected = 1.0 - 200.0 * n / (50.0 * (d.nth + 100.0)) * (2.0 * n + 1.0 / 3.0);
        assert!((commutator_defect(&p, &d, n) - expected).abs() < 1e-14);
        let mut prev = 1.0;
        for k in 1..50 {
            let v = commutator_defect(&p, &d, k as f64 * 0.1);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn high_pump_quadratic_reduces_to_semiclassical() {
        let p = LaserParams { kappa: 50.0, gamma_perp: 50.0, omega_rabi: 34.0, f: 0.5, n0: 100.0, pump: 20.0 };
        let mut d = derive(&p);
        d.beta_tilde_c = 0.0;
        let (inv, n) = highpump_closed_form(&p, &d).unwrap();
        let sc = semiclassical_state(&p, &d);
        assert!(sc.lasing);
        assert!((inv - sc.inversion).abs() < 1e-9 * d.nth);
        assert!((n - sc.n).abs() < 1e-9 * sc.n);
        let q = InversionQuadratic::high_pump(&p, &derive(&p));
        let (inv, _) = highpump_closed_form(&p, &derive(&p)).unwrap();
        assert!(q.residual(inv / d.nth).abs() * d.nth <= 1e-10 * 100.0);
    }

    #[test]
    fn pc_via_root_finder_oracle() {
        let (p, d) = preset(50.0, 1.0);
        let pc = solve_pc(&p, &d).unwrap();
        let alt = find_root(|pp| solve_n_nofluct_inner(&p.with_pump(pp), &d).unwrap() + d.nc, (1.0, 20.0), 1e-12).unwrap();
        assert!((pc - alt).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn energy_conserved_and_admissible(gamma_perp in 5.0f64..2000.0, pump in 0.0f64..60.0) {
            let (p, d) = preset(gamma_perp, pump);
            let s = solve_n_nofluct(&p, &d).unwrap();
            prop_assert!(s.inversion >= -p.n0 && s.inversion < d.nth);
            prop_assert!(s.n >= 0.0);
            prop_assert!(!s.branch_swapped);
            if s.n > 0.0 {
                prop_assert!(energy_rel(&p, s.inversion, s.n) <= 1e-9);
                let closed = photon_number_nofluct(&p, &d, s.inversion).unwrap();
                prop_assert!((closed - s.n).abs() <= 1e-8 * s.n);
            }
        }

        #[test]
        fn vanishing_coupling_gives_semiclassical_inversion(gamma_perp in 5.0f64..2000.0, pump in 0.0f64..60.0) {
            let (p, mut d) = preset(gamma_perp, pump);
            // the crossover at threshold is smoothed over a width ~√β̃_c
            prop_assume!((pump - d.pth).abs() > 1e-2 * d.pth);
            d.beta_tilde_c = 1e-8;
            let inv = solve_n_nofluct_inner(&p, &d).unwrap();
            let sc = semiclassical_state(&p, &d);
            prop_assert!((inv - sc.inversion).abs() <= 1e-6 * p.n0, "{} vs {}", inv, sc.inversion);
        }

        #[test]
        fn splitting_predicate_matches_peak_count(gamma_perp in 20.0f64..150.0, pump in 0.0f64..12.0) {
            let (p, d) = preset(gamma_perp, pump);
            let s = solve_n_nofluct(&p, &d).unwrap();
            // skip a thin band around the boundary where the split is below grid resolution
            let margin = (s.inversion + d.nc).abs() / d.nc;
            prop_assume!(margin > 0.02);
            let spec = spectrum_nofluct(&p, &d, s.inversion, &GridSpec::default()).unwrap();
            let off_centre = spec.peaks().iter().any(|pk| pk.omega > 0.0);
            prop_assert_eq!(off_centre, is_split(&p, &d, s.inversion));
        }

        #[test]
        fn spectrum_is_even_and_nonnegative(gamma_perp in 5.0f64..2000.0, pump in 0.0f64..60.0, w in 0.0f64..1e4) {
            let (p, d) = preset(gamma_perp, pump);
            let s = solve_n_nofluct(&p, &d).unwrap();
            let dens = NoFluctDensity::new(&p, &d, s.inversion).unwrap();
            prop_assert_eq!(dens.density(w), dens.density(-w));
            prop_assert!(dens.density(w) >= 0.0);
        }
    }
}
