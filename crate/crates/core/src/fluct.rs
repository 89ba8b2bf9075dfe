//! Spectra and stationary state with population fluctuations: the A and S
//! quadrature combinations, the self-consistent balance equation for the
//! inversion, the full lasing spectrum, the high-pump linewidth and the RF
//! intensity-noise spectrum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nofluct::{
    high_pump_nsp, highpump_closed_form, linewidth_r, power_form, solve_n_nofluct, FieldResonance,
    LinewidthMethod, LinewidthResult, NoFluctDensity,
};
use crate::numerics::{try_find_root, Feature, SpectralIntegral};
use crate::params::{DerivedParams, LaserParams};
use crate::semiclassical::photons_from_energy_balance;
use crate::spectrum::{
    eigenvalues, features_from_eigenvalues, GridSpec, SpectralDensity, Spectrum, SpectrumKind,
    SpectrumMeta,
};

/// Relative quadrature tolerance used for `n_S` inside the balance equation.
pub const BALANCE_QUAD_TOL: f64 = 1e-11;

/// Number of intervals in the coarse scan of the balance residual.
pub const SCAN_INTERVALS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Led,
    Intermediate,
    Lasing,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Led => "LED",
            Region::Intermediate => "intermediate",
            Region::Lasing => "lasing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub pump: f64,
    pub inversion: f64,
    pub ne: f64,
    pub ng: f64,
    /// Photon number from the energy balance at the solved inversion.
    pub n: f64,
    pub n_s: f64,
    pub n_a: f64,
    pub omega_ro: f64,
    pub region: Region,
    /// Balance residual `n_S + n_A − ½ − n` at the solution.
    pub residual: f64,
    /// Inversion with population fluctuations neglected.
    pub nofluct_inversion: f64,
    /// Inversion from the high-pump closed form, when it has an admissible root.
    pub highpump_inversion: Option<f64>,
}

impl SteadyState {
    /// Relative mismatch of `n = n_S + n_A − ½`.
    pub fn photon_sum_error(&self) -> f64 {
        let sum = self.n_s + self.n_a - 0.5;
        (sum - self.n).abs() / self.n.abs().max(1.0)
    }

    /// Relative mismatch of `2κn + Ne = P·Ng`.
    pub fn energy_error(&self, p: &LaserParams) -> f64 {
        let lhs = 2.0 * p.kappa * self.n + self.ne;
        let rhs = self.pump * self.ng;
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
    }
}

fn check_domain(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<()> {
    if inversion >= d.nth {
        return Err(Error::Pole(format!(
            "no stationary spectrum at or above threshold (N = {inversion}, Nth = {})",
            d.nth
        )));
    }
    if inversion < -p.n0 {
        return Err(Error::validation(
            "inversion",
            format!("{inversion} is below −N0 = {}", -p.n0),
        ));
    }
    Ok(())
}

/// Spectrum of the anti-symmetric (phase) combination.
#[derive(Debug, Clone, Copy)]
pub struct ADensity {
    kappa: f64,
    static_part: f64,
    res: FieldResonance,
    scale: f64,
}

impl ADensity {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<Self> {
        check_domain(p, d, inversion)?;
        Ok(Self {
            kappa: p.kappa,
            static_part: (1.0 + p.n0 / d.nth) * p.gamma_perp * p.gamma_perp / 4.0,
            res: FieldResonance::new(p, d, inversion),
            scale: 2.0 * p.kappa + p.gamma_perp,
        })
    }
}

impl SpectralDensity for ADensity {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::A
    }
    fn density(&self, omega: f64) -> f64 {
        0.5 * self.kappa * (self.static_part + omega * omega) / self.res.denominator(omega)
    }
    fn tail_coefficient(&self) -> f64 {
        0.5 * self.kappa
    }
    fn scale(&self) -> f64 {
        self.scale
    }
    fn features(&self) -> Vec<Feature> {
        self.res.features()
    }
}

/// `n_A = γ⊥/(4(2κ+γ⊥))·[(N0+Nth)/(Nth−N) + 2κ/γ⊥]`.
pub fn na_total(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<f64> {
    check_domain(p, d, inversion)?;
    let k2 = 2.0 * p.kappa;
    Ok(p.gamma_perp / (4.0 * (k2 + p.gamma_perp))
        * ((p.n0 + d.nth) / (d.nth - inversion) + k2 / p.gamma_perp))
}

/// Drift matrix of the linearized S subsystem `(a_S, v_S, δN_e)`.
pub fn s_drift_matrix(p: &LaserParams, inversion: f64, n: f64) -> [[f64; 3]; 3] {
    let sn = n.max(0.0).sqrt();
    let om = p.omega_rabi;
    [
        [-p.kappa, om, 0.0],
        [om * p.f * inversion, -0.5 * p.gamma_perp, 2.0 * om * p.f * sn],
        [-2.0 * p.kappa * sn, -2.0 * om * sn, -(p.pump + 1.0)],
    ]
}

/// Drift matrix of the linearized A subsystem `(a_A, v_A)`.
pub fn a_drift_matrix(p: &LaserParams, inversion: f64) -> [[f64; 2]; 2] {
    [
        [-p.kappa, p.omega_rabi],
        [p.omega_rabi * p.f * inversion, -0.5 * p.gamma_perp],
    ]
}

/// Largest real part among the eigenvalues of the S drift matrix.
pub fn s_growth_rate(p: &LaserParams, inversion: f64, n: f64) -> f64 {
    eigenvalues(s_drift_matrix(p, inversion, n))
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectrum of the symmetric (amplitude) combination, coupled to population
/// fluctuations through the relaxation-oscillation frequency.
#[derive(Debug, Clone)]
pub struct SDensity {
    kappa: f64,
    gamma_perp: f64,
    gamma_p: f64,
    wro2: f64,
    res: FieldResonance,
    pop_static: f64,
    pump_noise: f64,
    features: Vec<Feature>,
    scale: f64,
}

impl SDensity {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64, n: f64) -> Result<Self> {
        check_domain(p, d, inversion)?;
        if !(n >= 0.0) {
            return Err(Error::validation("n", format!("photon number must be >= 0, got {n}")));
        }
        let ne = 0.5 * (inversion + p.n0);
        let ng = p.n0 - ne;
        let wro2 = 4.0 * p.omega_rabi * p.omega_rabi * p.f * n;
        let kg = p.kappa * p.gamma_perp;
        Ok(Self {
            kappa: p.kappa,
            gamma_perp: p.gamma_perp,
            gamma_p: p.pump + 1.0,
            wro2,
            res: FieldResonance::new(p, d, inversion),
            pop_static: kg * p.gamma_perp * p.n0 / (4.0 * d.nth),
            pump_noise: wro2 * kg * (p.pump * ng + ne) / d.nth,
            features: features_from_eigenvalues(&eigenvalues(s_drift_matrix(p, inversion, n))),
            scale: 2.0 * p.kappa + p.gamma_perp + wro2.sqrt(),
        })
    }

    pub fn omega_ro(&self) -> f64 {
        self.wro2.sqrt()
    }
}

impl SpectralDensity for SDensity {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::S
    }
    fn density(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let gp = self.gamma_p;
        let hg = 0.5 * self.gamma_perp;
        let a = self.wro2 - w2 + gp * hg;
        let num = self.kappa * (a * a + w2 * (hg + gp) * (hg + gp))
            + self.pop_static * (w2 + gp * gp)
            + self.pump_noise;
        let iw = Complex64::new(0.0, omega);
        let field = Complex64::new(self.res.stiffness - w2, -omega * self.res.damping);
        let den = (iw - gp) * field + self.wro2 * (iw - 2.0 * self.kappa);
        num / (2.0 * den.norm_sqr())
    }
    fn tail_coefficient(&self) -> f64 {
        0.5 * self.kappa
    }
    fn scale(&self) -> f64 {
        self.scale
    }
    fn features(&self) -> Vec<Feature> {
        self.features.clone()
    }
}

/// Cross term `n_AS = n_nofluct − 2n_A`; may be negative.
#[derive(Debug, Clone, Copy)]
pub struct ASDensity {
    nofluct: NoFluctDensity,
    a: ADensity,
}

impl ASDensity {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<Self> {
        Ok(Self {
            nofluct: NoFluctDensity::new(p, d, inversion)?,
            a: ADensity::new(p, d, inversion)?,
        })
    }
}

impl SpectralDensity for ASDensity {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::AS
    }
    fn density(&self, omega: f64) -> f64 {
        self.nofluct.density(omega) - 2.0 * self.a.density(omega)
    }
    fn tail_coefficient(&self) -> f64 {
        -2.0 * self.a.tail_coefficient()
    }
    fn scale(&self) -> f64 {
        self.a.scale()
    }
    fn features(&self) -> Vec<Feature> {
        self.a.features()
    }
}

/// Full lasing spectrum `n_S + n_A + n_AS = n_S + n_nofluct − n_A`.
#[derive(Debug, Clone)]
pub struct FullDensity {
    s: SDensity,
    nofluct: NoFluctDensity,
    a: ADensity,
}

impl FullDensity {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64, n: f64) -> Result<Self> {
        Ok(Self {
            s: SDensity::new(p, d, inversion, n)?,
            nofluct: NoFluctDensity::new(p, d, inversion)?,
            a: ADensity::new(p, d, inversion)?,
        })
    }
}

impl SpectralDensity for FullDensity {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::Full
    }
    fn density(&self, omega: f64) -> f64 {
        // the A and S tails cancel; combine them before adding the narrow part
        (self.s.density(omega) - self.a.density(omega)) + self.nofluct.density(omega)
    }
    fn tail_coefficient(&self) -> f64 {
        0.0
    }
    fn scale(&self) -> f64 {
        self.s.scale()
    }
    fn features(&self) -> Vec<Feature> {
        let mut f = self.s.features();
        f.extend(self.a.features());
        f
    }
}

/// Photon-number (intensity) fluctuation spectrum `4n·n_S(ω)`.
#[derive(Debug, Clone)]
pub struct RfDensity {
    s: SDensity,
    n: f64,
}

impl RfDensity {
    pub fn new(p: &LaserParams, d: &DerivedParams, inversion: f64, n: f64) -> Result<Self> {
        Ok(Self {
            s: SDensity::new(p, d, inversion, n)?,
            n,
        })
    }
}

impl SpectralDensity for RfDensity {
    fn kind(&self) -> SpectrumKind {
        SpectrumKind::Rf
    }
    fn density(&self, omega: f64) -> f64 {
        4.0 * self.n * self.s.density(omega)
    }
    fn tail_coefficient(&self) -> f64 {
        4.0 * self.n * self.s.tail_coefficient()
    }
    fn scale(&self) -> f64 {
        self.s.scale()
    }
    fn features(&self) -> Vec<Feature> {
        self.s.features()
    }
}

/// Photon number implied by the energy balance at inversion `N`, clamped at 0.
pub fn balance_photons(p: &LaserParams, inversion: f64) -> f64 {
    photons_from_energy_balance(p, inversion).max(0.0)
}

/// `n_S(N) + n_A(N) − ½ − n(N)` with `n(N)` from the energy balance.
///
/// Returns [`Error::Unstable`] where the S subsystem has a growing mode and
/// its stationary spectrum does not exist.
pub fn balance_residual(inversion: f64, p: &LaserParams, d: &DerivedParams) -> Result<f64> {
    check_domain(p, d, inversion)?;
    let n = balance_photons(p, inversion);
    let growth = s_growth_rate(p, inversion, n);
    if growth >= 0.0 {
        return Err(Error::Unstable {
            inversion,
            growth_rate: growth,
        });
    }
    let s = SDensity::new(p, d, inversion, n)?;
    let n_s = s.integrated_with(SpectralIntegral::new(s.window()).rel_tol(BALANCE_QUAD_TOL))?;
    Ok(n_s + na_total(p, d, inversion)? - 0.5 - n)
}

/// Residual with unstable points mapped to `+∞` (the residual grows without
/// bound towards the instability, as towards the threshold pole).
fn scan_value(inversion: f64, p: &LaserParams, d: &DerivedParams) -> Result<f64> {
    match balance_residual(inversion, p, d) {
        Err(Error::Unstable { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

fn unpumped_state(p: &LaserParams, d: &DerivedParams) -> SteadyState {
    SteadyState {
        pump: p.pump,
        inversion: -p.n0,
        ne: 0.0,
        ng: p.n0,
        n: 0.0,
        n_s: 0.25,
        n_a: 0.25,
        omega_ro: 0.0,
        region: Region::Led,
        residual: 0.0,
        nofluct_inversion: -p.n0,
        highpump_inversion: highpump_closed_form(p, d).ok().map(|x| x.0),
    }
}

/// Solves the balance equation for the inversion by a coarse scan over
/// `(−N0, Nth)` followed by Brent refinement, and fills in the state.
pub fn solve_steady(p: &LaserParams, d: &DerivedParams) -> Result<SteadyState> {
    p.validate()?;
    if p.pump == 0.0 {
        return Ok(unpumped_state(p, d));
    }
    let eps = 1e-9 * p.n0;
    let lo = -p.n0 + eps;
    let hi = d.nth - eps;
    let grid: Vec<f64> = (0..=SCAN_INTERVALS)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN_INTERVALS as f64)
        .collect();
    let values = grid
        .par_iter()
        .map(|&x| scan_value(x, p, d))
        .collect::<Result<Vec<f64>>>()?;
    let changes: Vec<usize> = (0..SCAN_INTERVALS)
        .filter(|&i| (values[i] < 0.0) != (values[i + 1] < 0.0))
        .collect();
    if changes.len() != 1 {
        let diagnostic = grid
            .iter()
            .zip(&values)
            .step_by(32)
            .map(|(x, v)| format!("N={x:.6}: {v:.6e}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(if changes.is_empty() {
            Error::NoRoot(format!("balance residual never changes sign: {diagnostic}"))
        } else {
            Error::MultipleRoots {
                count: changes.len(),
                diagnostic,
            }
        });
    }
    let i = changes[0];
    let (mut a, mut b) = (grid[i], grid[i + 1]);
    // pull an unstable upper end back to a finite positive residual
    let mut fb = values[i + 1];
    while fb.is_infinite() {
        let mid = 0.5 * (a + b);
        let fm = scan_value(mid, p, d)?;
        if fm < 0.0 {
            a = mid;
        } else {
            b = mid;
            fb = fm;
        }
        if b - a < 1e-15 * p.n0 {
            return Err(Error::Convergence(
                "balance root sits on the stability boundary".into(),
            ));
        }
    }
    let inversion = try_find_root(|x| balance_residual(x, p, d), (a, b), 1e-14 * p.n0)?;
    state_at(p, d, inversion)
}

/// Fills in a steady state at a given inversion.
fn state_at(p: &LaserParams, d: &DerivedParams, inversion: f64) -> Result<SteadyState> {
    let n = balance_photons(p, inversion);
    let s = SDensity::new(p, d, inversion, n)?;
    let n_s = s.integrated_with(SpectralIntegral::new(s.window()).rel_tol(BALANCE_QUAD_TOL))?;
    let n_a = na_total(p, d, inversion)?;
    let ne = 0.5 * (inversion + p.n0);
    let mut st = SteadyState {
        pump: p.pump,
        inversion,
        ne,
        ng: p.n0 - ne,
        n,
        n_s,
        n_a,
        omega_ro: s.omega_ro(),
        region: Region::Intermediate,
        residual: n_s + n_a - 0.5 - n,
        nofluct_inversion: solve_n_nofluct(p, d)?.inversion,
        highpump_inversion: highpump_closed_form(p, d).ok().map(|x| x.0),
    };
    st.region = classify_region(p, d, &st);
    Ok(st)
}

/// Solves a pump sweep in parallel; results keep the order of `pumps`.
pub fn solve_sweep(p: &LaserParams, pumps: &[f64]) -> Vec<Result<SteadyState>> {
    pumps
        .par_iter()
        .map(|&pump| {
            let q = p.with_pump(pump);
            solve_steady(&q, &crate::params::derive(&q))
        })
        .collect()
}

/// Relative distance to an asymptote below which a state is attributed to it.
pub const REGION_TOLERANCE: f64 = 0.05;

/// Per-state region from the distance to the two asymptotic inversions.
/// When both asymptotes are close, the state is LED below the semiclassical
/// threshold and lasing above it.
pub fn classify_region(_p: &LaserParams, d: &DerivedParams, st: &SteadyState) -> Region {
    let tol = REGION_TOLERANCE * st.inversion.abs();
    let led = (st.inversion - st.nofluct_inversion).abs() <= tol;
    let lasing = st
        .highpump_inversion
        .is_some_and(|h| (st.inversion - h).abs() <= tol);
    match (led, lasing) {
        (true, true) => {
            if st.pump < d.pth {
                Region::Led
            } else {
                Region::Lasing
            }
        }
        (true, false) => Region::Led,
        (false, true) => Region::Lasing,
        (false, false) => Region::Intermediate,
    }
}

/// Regions along a sweep sorted by increasing pump: the leading run of LED
/// states stays LED, the trailing run of lasing states stays lasing, and
/// everything in between is intermediate.
pub fn classify_sweep(states: &[SteadyState]) -> Vec<Region> {
    let n = states.len();
    let led_end = states
        .iter()
        .position(|s| s.region != Region::Led)
        .unwrap_or(n);
    let lasing_start = states
        .iter()
        .rposition(|s| s.region != Region::Lasing)
        .map_or(0, |i| i + 1)
        .max(led_end);
    (0..n)
        .map(|i| {
            if i < led_end {
                Region::Led
            } else if i >= lasing_start {
                Region::Lasing
            } else {
                Region::Intermediate
            }
        })
        .collect()
}

/// High-pump power-form linewidth `½γ_c²N_sp/(2κn)` with `N_sp = (N0+Nth)/2Nth`.
pub fn linewidth_high(p: &LaserParams, d: &DerivedParams, st: &SteadyState) -> Result<LinewidthResult> {
    if !(st.n > 0.0) {
        return Err(Error::Pole("linewidth undefined at n = 0".into()));
    }
    Ok(LinewidthResult {
        gamma_las: 0.5 * power_form(p, d, high_pump_nsp(p, d), st.n),
        r: linewidth_r(p, d, st.inversion),
        method: LinewidthMethod::PowerFormHigh,
    })
}

fn meta(p: &LaserParams, inversion: f64, n: Option<f64>, omega_ro: Option<f64>) -> SpectrumMeta {
    SpectrumMeta {
        params: *p,
        inversion,
        photon_number: n,
        omega_ro,
        max_negativity: None,
        warnings: Vec::new(),
    }
}

pub fn na_spectrum(p: &LaserParams, d: &DerivedParams, inversion: f64, grid: &GridSpec) -> Result<Spectrum> {
    let dens = ADensity::new(p, d, inversion)?;
    let m = meta(p, inversion, Some(na_total(p, d, inversion)?), None);
    Ok(Spectrum::from_density(&dens, grid.build(p, 0.0)?, m))
}

pub fn ns_spectrum(
    p: &LaserParams,
    d: &DerivedParams,
    inversion: f64,
    n: f64,
    grid: &GridSpec,
) -> Result<Spectrum> {
    let dens = SDensity::new(p, d, inversion, n)?;
    let wro = dens.omega_ro();
    let m = meta(p, inversion, Some(n), Some(wro));
    Ok(Spectrum::from_density(&dens, grid.build(p, wro)?, m))
}

pub fn nas_spectrum(p: &LaserParams, d: &DerivedParams, inversion: f64, grid: &GridSpec) -> Result<Spectrum> {
    let dens = ASDensity::new(p, d, inversion)?;
    Ok(Spectrum::from_density(&dens, grid.build(p, 0.0)?, meta(p, inversion, None, None)))
}

/// Full lasing spectrum at a solved state. The metadata records how far
/// `(1/2π)∫` of the spectrum is from the state's photon number.
pub fn full_spectrum(p: &LaserParams, d: &DerivedParams, st: &SteadyState, grid: &GridSpec) -> Result<Spectrum> {
    let dens = FullDensity::new(p, d, st.inversion, st.n)?;
    let mut m = meta(p, st.inversion, Some(st.n), Some(st.omega_ro));
    let total = dens.integrated()?;
    m.warnings.push(format!(
        "integrated spectrum {total:.10e} vs photon number {:.10e}",
        st.n
    ));
    Ok(Spectrum::from_density(&dens, grid.build(p, st.omega_ro)?, m))
}

pub fn rf_spectrum(p: &LaserParams, d: &DerivedParams, st: &SteadyState, grid: &GridSpec) -> Result<Spectrum> {
    let dens = RfDensity::new(p, d, st.inversion, st.n)?;
    let mut m = meta(p, st.inversion, Some(st.n), Some(st.omega_ro));
    if st.region != Region::Lasing {
        m.warnings.push(format!(
            "intensity-noise spectrum outside the lasing region ({})",
            st.region.name()
        ));
    }
    Ok(Spectrum::from_density(&dens, grid.build(p, st.omega_ro)?, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
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

    #[test]
    fn na_total_at_full_ground_state_is_quarter() {
        for g in [50.0, 500.0, 1500.0] {
            let (p, d) = preset(g, 1.0);
            assert!((na_total(&p, &d, -100.0).unwrap() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn na_total_diverges_at_threshold() {
        let (p, d) = preset(50.0, 1.0);
        let a = na_total(&p, &d, d.nth - 1e-3).unwrap();
        let b = na_total(&p, &d, d.nth - 1e-6).unwrap();
        assert!((b / a - 1e3).abs() < 2.0);
        assert!(matches!(na_total(&p, &d, d.nth), Err(Error::Pole(_))));
    }

    #[test]
    fn na_quadrature_matches_closed_form() {
        for (g, inv) in [(50.0, 1.0), (700.0, 20.0), (1500.0, -50.0), (50.0, -99.0)] {
            let (p, d) = preset(g, 16.0);
            let q = ADensity::new(&p, &d, inv).unwrap().integrated().unwrap();
            let c = na_total(&p, &d, inv).unwrap();
            assert!((q - c).abs() <= 1e-6 * c, "{g} {inv}: {q} vs {c}");
        }
    }

    #[test]
    fn s_spectrum_matches_linear_response() {
        // oracle: |(iω − J)⁻¹ row 0|² weighted by the white-noise strengths
        use nalgebra::{Matrix3, Vector3};
        let (p, d) = preset(50.0, 16.0);
        let (inv, n) = (-1.1, 7.6);
        let s = SDensity::new(&p, &d, inv, n).unwrap();
        let j = s_drift_matrix(&p, inv, n);
        let ne = 0.5 * (inv + 100.0);
        let noise = Vector3::new(25.0, 0.5 * 50.0 * 100.0 / 4.0, 16.0 * (100.0 - ne) + ne);
        for w in [0.0, 3.0, 40.0, 111.0, 1e3] {
            let m = Matrix3::from_fn(|r, c| {
                let diag = if r == c { Complex64::new(0.0, -w) } else { Complex64::new(0.0, 0.0) };
                diag - Complex64::new(j[r][c], 0.0)
            });
            let inv_m = m.try_inverse().unwrap();
            let expected: f64 = (0..3).map(|k| inv_m[(0, k)].norm_sqr() * noise[k]).sum();
            let got = s.density(w);
            assert!((got - expected).abs() <= 1e-10 * expected, "{w}: {got} vs {expected}");
        }
    }

    #[test]
    fn a_drift_reproduces_a_spectrum() {
        use nalgebra::Matrix2;
        let (p, d) = preset(50.0, 4.0);
        let inv = -20.0;
        let a = ADensity::new(&p, &d, inv).unwrap();
        let j = a_drift_matrix(&p, inv);
        for w in [0.0, 7.0, 90.0] {
            let m = Matrix2::from_fn(|r, c| {
                let diag = if r == c { Complex64::new(0.0, -w) } else { Complex64::new(0.0, 0.0) };
                diag - Complex64::new(j[r][c], 0.0)
            });
            let inv_m = m.try_inverse().unwrap();
            let expected = inv_m[(0, 0)].norm_sqr() * 25.0 + inv_m[(0, 1)].norm_sqr() * 0.5 * 50.0 * 100.0 / 4.0;
            assert!((a.density(w) - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn cross_term_integral_is_linear() {
        let (p, d) = preset(50.0, 4.0);
        let inv = -30.0;
        let cross = ASDensity::new(&p, &d, inv).unwrap().integrated().unwrap();
        let nof = crate::nofluct::photon_number_nofluct(&p, &d, inv).unwrap();
        let na = na_total(&p, &d, inv).unwrap();
        assert!((cross - (nof - 2.0 * na)).abs() < 1e-8);
    }

    #[test]
    fn cross_term_tail() {
        let (p, d) = preset(50.0, 4.0);
        let w = 1e3 * 150.0;
        let v = ASDensity::new(&p, &d, -30.0).unwrap().density(w) * w * w;
        assert!((v + 50.0).abs() < 1e-3 * 50.0);
    }

    #[test]
    fn tails_cancel_in_full_spectrum() {
        let (p, d) = preset(50.0, 40.0);
        let st = solve_steady(&p, &d).unwrap();
        let w = 1e3 * (2.0 * p.kappa + p.gamma_perp);
        let a = ADensity::new(&p, &d, st.inversion).unwrap().density(w) * w * w;
        let full = FullDensity::new(&p, &d, st.inversion, st.n).unwrap().density(w) * w * w;
        assert!((a - 25.0).abs() < 0.25);
        assert!(full.abs() <= 0.05 * 25.0);
    }

    #[test]
    fn zero_pump_limit() {
        let (p, d) = preset(50.0, 1e-4);
        let st = solve_steady(&p, &d).unwrap();
        assert!((st.n_s - 0.25).abs() < 1e-3);
        assert!((st.n_a - 0.25).abs() < 1e-3);
        assert!((st.inversion + 100.0).abs() < 0.1);
        assert!(st.n >= 0.0);
        assert_eq!(st.region, Region::Led);
    }

    #[test]
    fn unpumped_row() {
        let (p, d) = preset(50.0, 0.0);
        let st = solve_steady(&p, &d).unwrap();
        assert_eq!(st.inversion, -100.0);
        assert_eq!(st.n, 0.0);
    }

    #[test]
    fn residual_negative_at_ground_state_and_large_near_threshold() {
        let (p, d) = preset(50.0, 3.0);
        assert!(balance_residual(-100.0, &p, &d).unwrap() < 0.0);
        match balance_residual(d.nth - 1e-9, &p, &d) {
            Ok(v) => assert!(v > 1e6),
            Err(Error::Unstable { .. }) => {}
            Err(e) => panic!("{e}"),
        }
        assert!(balance_residual(d.nth, &p, &d).is_err());
        assert!(balance_residual(-100.5, &p, &d).is_err());
    }

    #[test]
    fn self_consistency_at_solution() {
        for (g, pump) in [(50.0, 0.1), (50.0, 10.0), (50.0, 40.0), (1500.0, 4.0)] {
            let (p, d) = preset(g, pump);
            let st = solve_steady(&p, &d).unwrap();
            assert!(st.residual.abs() <= 1e-8 * st.n.max(1.0), "{g} {pump}: {}", st.residual);
            assert!(st.photon_sum_error() <= 1e-8);
            assert!(st.energy_error(&p) <= 1e-8);
            assert!(st.n_s >= 0.25 - 1e-9 && st.n_a >= 0.25 - 1e-9);
            assert!((st.omega_ro.powi(2) - 4.0 * 34.0 * 34.0 * 0.5 * st.n).abs() < 1e-9 * st.n.max(1.0));
        }
    }

    #[test]
    fn high_pump_state_near_closed_form() {
        let (p, d) = preset(50.0, 40.0);
        let st = solve_steady(&p, &d).unwrap();
        let (hp, _) = highpump_closed_form(&p, &d).unwrap();
        assert!((st.inversion - hp).abs() <= 0.05 * hp.abs());
        assert_eq!(st.region, Region::Lasing);
    }

    #[test]
    fn rf_is_linear_in_s() {
        let (p, d) = preset(50.0, 40.0);
        let st = solve_steady(&p, &d).unwrap();
        let rf = RfDensity::new(&p, &d, st.inversion, st.n).unwrap();
        let s = SDensity::new(&p, &d, st.inversion, st.n).unwrap();
        for w in [0.0, 50.0, 210.0] {
            assert_eq!(rf.density(w), 4.0 * st.n * s.density(w));
        }
    }

    #[test]
    fn sweep_regions_are_ordered() {
        let (p, _) = preset(50.0, 1.0);
        let pumps = [1e-3, 0.1, 1.0, 4.0, 10.0, 20.0, 30.0, 40.0, 60.0];
        let states: Vec<SteadyState> = solve_sweep(&p, &pumps).into_iter().map(|r| r.unwrap()).collect();
        let regions = classify_sweep(&states);
        assert_eq!(regions[0], Region::Led);
        assert_eq!(*regions.last().unwrap(), Region::Lasing);
        assert!(regions.contains(&Region::Intermediate));
        let rank = |r: &Region| *r as u8;
        assert!(regions.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn s_reduces_to_a_without_relaxation_oscillations(
            kappa in 1.0f64..200.0,
            gamma_perp in 1.0f64..2000.0,
            omega_rabi in 1.0f64..100.0,
            f in 0.05f64..=1.0,
            n0 in 1.0f64..1000.0,
            pump in 0.0f64..100.0,
            frac in 0.0f64..1.0,
        ) {
            let p = LaserParams { kappa, gamma_perp, omega_rabi, f, n0, pump };
            let d = derive(&p);
            let inv = -n0 + frac * (d.nth.min(n0) + n0) * 0.999;
            let s = SDensity::new(&p, &d, inv, 0.0).unwrap();
            let a = ADensity::new(&p, &d, inv).unwrap();
            let grid = GridSpec::default().build(&p, 0.0).unwrap();
            for &w in &grid {
                let (x, y) = (s.density(w), a.density(w));
                prop_assert!((x - y).abs() <= 1e-10 * y, "ω={}: {} vs {}", w, x, y);
            }
        }

        #[test]
        fn spectra_are_even(gamma_perp in 5.0f64..2000.0, frac in 0.0f64..0.99, n in 0.0f64..50.0, w in 0.0f64..5e3) {
            let (p, d) = preset(gamma_perp, 10.0);
            let inv = -100.0 + frac * (d.nth + 100.0);
            let dens: Vec<Box<dyn SpectralDensity>> = vec![
                Box::new(ADensity::new(&p, &d, inv).unwrap()),
                Box::new(SDensity::new(&p, &d, inv, n).unwrap()),
                Box::new(ASDensity::new(&p, &d, inv).unwrap()),
                Box::new(FullDensity::new(&p, &d, inv, n).unwrap()),
            ];
            for s in &dens {
                prop_assert_eq!(s.density(w), s.density(-w));
            }
        }
    }
}
