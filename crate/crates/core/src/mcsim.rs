//! Monte-Carlo integration of the linearized Langevin systems as real
//! stochastic differential equations, with Welch spectral estimates that
//! share the normalization of the analytic spectra.
//!
//! PSD convention: `S(ω) = ∫⟨x(t)x(0)⟩e^{iωt}dt`, two-sided, so that
//! `(1/2π)∫S dω` is the variance and white noise of strength `2D` has `S = 2D`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluct::{a_drift_matrix, s_drift_matrix, SteadyState};
use crate::noise::noise_model;
use crate::params::{DerivedParams, LaserParams};
use crate::spectrum::SpectralDensity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Rect,
}

impl Window {
    fn weights(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|i| {
                    let s = (std::f64::consts::PI * i as f64 / len as f64).sin();
                    s * s
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Exact-in-distribution update from the matrix exponential.
    Exact,
    EulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCConfig {
    pub dt: f64,
    /// Samples per Welch segment.
    pub segment_len: usize,
    /// Total number of Welch segments, spread over the chains.
    pub segments: usize,
    /// Discarded time at the start of each chain.
    pub burn_in: f64,
    pub seed: u64,
    pub window: Window,
    pub integrator: Integrator,
    /// Independent trajectories run in parallel.
    pub chains: usize,
}

impl MCConfig {
    /// Total simulated time over all chains, burn-in included.
    pub fn duration(&self) -> f64 {
        self.segments as f64 * self.segment_len as f64 * self.dt + self.chains as f64 * self.burn_in
    }

    pub fn segment_time(&self) -> f64 {
        self.segment_len as f64 * self.dt
    }

    /// Defaults sized for a validation run against analytic spectra.
    pub fn for_system(sys: &LinearSystem, seed: u64) -> Self {
        let dt = sys.dt_guard();
        Self {
            dt,
            segment_len: 1 << 15,
            segments: 480,
            burn_in: 20.0 / sys.slowest_rate().max(1e-6),
            seed,
            window: Window::Hann,
            integrator: Integrator::Exact,
            chains: 8,
        }
    }

    pub fn validate(&self, sys: &LinearSystem) -> Result<()> {
        let guard = sys.dt_guard();
        if !(self.dt > 0.0) || self.dt > guard * (1.0 + 1e-12) {
            return Err(Error::MonteCarlo(format!(
                "dt = {} exceeds the step guard {guard:e}",
                self.dt
            )));
        }
        if self.segment_len < 2 || self.segments < 2 || self.chains == 0 {
            return Err(Error::MonteCarlo(
                "need segment_len >= 2, segments >= 2 and at least one chain".into(),
            ));
        }
        if self.segments % self.chains != 0 {
            return Err(Error::MonteCarlo(format!(
                "segments ({}) must be a multiple of chains ({})",
                self.segments, self.chains
            )));
        }
        let need = 100.0 * (1.0 / sys.slowest_rate()).max(self.segment_time());
        if self.duration() < need {
            return Err(Error::MonteCarlo(format!(
                "duration {} is shorter than 100 correlation times or segment lengths ({need})",
                self.duration()
            )));
        }
        if !(self.burn_in >= 0.0) {
            return Err(Error::MonteCarlo("burn_in must be >= 0".into()));
        }
        Ok(())
    }
}

/// `dx = J·x dt + dW` with independent white noises of strength `2D_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub names: Vec<String>,
    pub drift: DMatrix<f64>,
    /// Diagonal `2D_i`.
    pub diffusion: Vec<f64>,
    /// The fastest rate entering the step guard.
    pub rate_scale: f64,
}

impl LinearSystem {
    pub fn new(names: &[&str], drift: DMatrix<f64>, diffusion: Vec<f64>, rate_scale: f64) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            drift,
            diffusion,
            rate_scale,
        }
    }

    /// Phase combination `(a_A, v_A)`.
    pub fn a_subsystem(p: &LaserParams, d: &DerivedParams, st: &SteadyState) -> Result<Self> {
        check_state(d, st)?;
        let m = noise_model(p, d, st.ne)?;
        let j = a_drift_matrix(p, st.inversion);
        Ok(Self::new(
            &["a_A", "v_A"],
            DMatrix::from_fn(2, 2, |r, c| j[r][c]),
            vec![m.d_a_a, m.d_v_a],
            rate_scale(p, st),
        ))
    }

    /// Amplitude combination with population fluctuations `(a_S, v_S, δN_e)`.
    pub fn s_subsystem(p: &LaserParams, d: &DerivedParams, st: &SteadyState) -> Result<Self> {
        check_state(d, st)?;
        let m = noise_model(p, d, st.ne)?;
        let j = s_drift_matrix(p, st.inversion, st.n);
        Ok(Self::new(
            &["a_S", "v_S", "dN_e"],
            DMatrix::from_fn(3, 3, |r, c| j[r][c]),
            vec![m.d_a_s, m.d_v_s, m.d_ne_ne],
            rate_scale(p, st),
        ))
    }

    /// Ornstein-Uhlenbeck process `dx = −λx dt + dW`, `⟨dW²⟩ = 2D dt`.
    pub fn ornstein_uhlenbeck(lambda: f64, two_d: f64) -> Self {
        Self::new(&["x"], DMatrix::from_element(1, 1, -lambda), vec![two_d], lambda)
    }

    pub fn dim(&self) -> usize {
        self.diffusion.len()
    }

    /// `dt ≤ 0.05/(2κ+γ⊥+γ_P+ω_ro)` for the laser systems.
    pub fn dt_guard(&self) -> f64 {
        0.05 / self.rate_scale
    }

    fn eigenvalues(&self) -> Vec<Complex64> {
        self.drift.complex_eigenvalues().iter().copied().collect()
    }

    /// Smallest decay rate `min |Re λ|`.
    pub fn slowest_rate(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|e| -e.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_stable(&self) -> bool {
        self.eigenvalues().iter().all(|e| e.re < 0.0)
    }

    /// Stationary covariance from `JΣ + ΣJᵀ + B = 0`.
    pub fn stationary_covariance(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let eye = DMatrix::<f64>::identity(n, n);
        let j = &self.drift;
        let k = eye.kronecker(j) + j.kronecker(&eye);
        let mut b = DVector::zeros(n * n);
        for i in 0..n {
            b[i * n + i] = -self.diffusion[i];
        }
        let sol = k
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::MonteCarlo("singular Lyapunov system".into()))?;
        Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
    }

    /// One-step map `x' = Φx + Lz` with `z` standard normal.
    fn discretize(&self, dt: f64, integrator: Integrator) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dim();
        match integrator {
            Integrator::EulerMaruyama => {
                let phi = DMatrix::identity(n, n) + &self.drift * dt;
                let l = DMatrix::from_fn(n, n, |r, c| {
                    if r == c {
                        (self.diffusion[r].max(0.0) * dt).sqrt()
                    } else {
                        0.0
                    }
                });
                (phi, l)
            }
            Integrator::Exact => {
                // block exponential of [[−J, B], [0, Jᵀ]]·dt gives Φ and the
                // step covariance Q = ∫₀^dt e^{Js} B e^{Jᵀs} ds
                let mut m = DMatrix::zeros(2 * n, 2 * n);
                for r in 0..n {
                    for c in 0..n {
                        m[(r, c)] = -self.drift[(r, c)] * dt;
                        m[(n + r, n + c)] = self.drift[(c, r)] * dt;
                    }
                    m[(r, n + r)] = self.diffusion[r] * dt;
                }
                let e = m.exp();
                let phi = e.view((n, n), (n, n)).transpose();
                let q = &phi * e.view((0, n), (n, n));
                let q = 0.5 * (&q + q.transpose());
                let eig = SymmetricEigen::new(q);
                let mut l = eig.eigenvectors.clone();
                for c in 0..n {
                    let s = eig.eigenvalues[c].max(0.0).sqrt();
                    for r in 0..n {
                        l[(r, c)] *= s;
                    }
                }
                (phi, l)
            }
        }
    }
}

fn check_state(d: &DerivedParams, st: &SteadyState) -> Result<()> {
    if st.inversion >= d.nth {
        return Err(Error::Pole(format!(
            "linear drift is unstable at N = {} >= Nth = {}",
            st.inversion, d.nth
        )));
    }
    Ok(())
}

fn rate_scale(p: &LaserParams, st: &SteadyState) -> f64 {
    2.0 * p.kappa + p.gamma_perp + (p.pump + 1.0) + st.omega_ro
}

/// Two-sided PSD estimate on a symmetric angular-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSDEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub segments: usize,
    /// Time average of `x²` and its standard error from segment scatter.
    pub variance: f64,
    pub variance_stderr: f64,
}

impl PSDEstimate {
    /// `(1/2π)∫S dω` as a grid sum.
    pub fn integrated(&self) -> f64 {
        let dw = self.grid[1] - self.grid[0];
        self.values.iter().sum::<f64>() * dw / (2.0 * std::f64::consts::PI)
    }
}

/// Per-segment accumulator of periodograms and mean squares.
struct WelchAccumulator {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    norm: f64,
    dt: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    ms_sum: f64,
    ms_sum_sq: f64,
    count: usize,
    buf: Vec<Complex64>,
}

impl WelchAccumulator {
    fn new(len: usize, dt: f64, window: Window) -> Self {
        let w = window.weights(len);
        let norm = w.iter().map(|x| x * x).sum();
        Self {
            fft: FftPlanner::new().plan_fft_forward(len),
            window: w,
            norm,
            dt,
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            ms_sum: 0.0,
            ms_sum_sq: 0.0,
            count: 0,
            buf: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    fn push(&mut self, segment: &[f64]) {
        let mut ms = 0.0;
        for ((b, &x), &w) in self.buf.iter_mut().zip(segment).zip(&self.window) {
            *b = Complex64::new(x * w, 0.0);
            ms += x * x;
        }
        ms /= segment.len() as f64;
        self.fft.process(&mut self.buf);
        let scale = self.dt / self.norm;
        for (k, b) in self.buf.iter().enumerate() {
            let s = b.norm_sqr() * scale;
            self.sum[k] += s;
            self.sum_sq[k] += s * s;
        }
        self.ms_sum += ms;
        self.ms_sum_sq += ms * ms;
        self.count += 1;
    }

    fn merge(&mut self, other: &WelchAccumulator) {
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
        self.ms_sum += other.ms_sum;
        self.ms_sum_sq += other.ms_sum_sq;
        self.count += other.count;
    }

    fn finish(&self) -> PSDEstimate {
        let len = self.sum.len();
        let k = self.count as f64;
        let mean_sd = |s: f64, s2: f64| {
            let m = s / k;
            let var = ((s2 / k - m * m) * k / (k - 1.0)).max(0.0);
            (m, (var / k).sqrt())
        };
        let dw = 2.0 * std::f64::consts::PI / (len as f64 * self.dt);
        let half = (len - 1) / 2;
        let mut grid = Vec::with_capacity(2 * half + 1);
        let mut values = Vec::with_capacity(2 * half + 1);
        let mut stderr = Vec::with_capacity(2 * half + 1);
        for j in -(half as i64)..=(half as i64) {
            let bin = j.rem_euclid(len as i64) as usize;
            let (m, e) = mean_sd(self.sum[bin], self.sum_sq[bin]);
            grid.push(j as f64 * dw);
            values.push(m);
            stderr.push(e);
        }
        let (variance, variance_stderr) = mean_sd(self.ms_sum, self.ms_sum_sq);
        PSDEstimate {
            grid,
            values,
            stderr,
            segments: self.count,
            variance,
            variance_stderr,
        }
    }
}

/// Welch estimate from a sampled trajectory using non-overlapping segments
/// of `cfg.segment_len` samples at spacing `cfg.dt`.
pub fn welch_psd(trajectory: &[f64], cfg: &MCConfig) -> Result<PSDEstimate> {
    let len = cfg.segment_len;
    let count = if len == 0 { 0 } else { trajectory.len() / len };
    if len < 2 || count < 2 {
        return Err(Error::MonteCarlo(format!(
            "{} samples cannot fill two segments of {len}",
            trajectory.len()
        )));
    }
    let mut acc = WelchAccumulator::new(len, cfg.dt, cfg.window);
    for seg in trajectory.chunks_exact(len).take(count) {
        acc.push(seg);
    }
    Ok(acc.finish())
}

/// Magnitude-squared coherence `|⟨XY*⟩|²/(⟨|X|²⟩⟨|Y|²⟩)` per bin, on the same
/// grid as [`welch_psd`].
pub fn welch_coherence(x: &[f64], y: &[f64], cfg: &MCConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let len = cfg.segment_len;
    let count = x.len().min(y.len()) / len.max(1);
    if len < 2 || count < 2 {
        return Err(Error::MonteCarlo("not enough samples for coherence".into()));
    }
    let fft = FftPlanner::new().plan_fft_forward(len);
    let w = cfg.window.weights(len);
    let mut sxy = vec![Complex64::new(0.0, 0.0); len];
    let mut sxx = vec![0.0; len];
    let mut syy = vec![0.0; len];
    let mut bx = vec![Complex64::new(0.0, 0.0); len];
    let mut by = bx.clone();
    for s in 0..count {
        for i in 0..len {
            bx[i] = Complex64::new(x[s * len + i] * w[i], 0.0);
            by[i] = Complex64::new(y[s * len + i] * w[i], 0.0);
        }
        fft.process(&mut bx);
        fft.process(&mut by);
        for k in 0..len {
            sxy[k] += bx[k] * by[k].conj();
            sxx[k] += bx[k].norm_sqr();
            syy[k] += by[k].norm_sqr();
        }
    }
    let dw = 2.0 * std::f64::consts::PI / (len as f64 * cfg.dt);
    let half = (len - 1) / 2;
    let mut grid = Vec::new();
    let mut coh = Vec::new();
    for j in -(half as i64)..=(half as i64) {
        let k = j.rem_euclid(len as i64) as usize;
        grid.push(j as f64 * dw);
        coh.push(sxy[k].norm_sqr() / (sxx[k] * syy[k]));
    }
    Ok((grid, coh))
}

/// Gaussian noise source with one ChaCha stream per (chain, channel).
struct NoiseSource {
    streams: Vec<ChaCha8Rng>,
}

impl NoiseSource {
    fn new(seed: u64, chain: usize, channels: usize) -> Self {
        let streams = (0..channels)
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((chain as u64) << 16) | c as u64);
                rng
            })
            .collect();
        Self { streams }
    }

    fn fill(&mut self, z: &mut [f64]) {
        for (zi, rng) in z.iter_mut().zip(&mut self.streams) {
            *zi = StandardNormal.sample(rng);
        }
    }
}

/// Sequential stepper for one chain.
struct Stepper {
    n: usize,
    phi: Vec<f64>,
    l: Vec<f64>,
    x: Vec<f64>,
    next: Vec<f64>,
    z: Vec<f64>,
    noise: NoiseSource,
}

impl Stepper {
    fn new(sys: &LinearSystem, cfg: &MCConfig, chain: usize) -> Self {
        let n = sys.dim();
        let (phi, l) = sys.discretize(cfg.dt, cfg.integrator);
        let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| m[(r, c)]).collect()
        };
        Self {
            n,
            phi: row_major(&phi),
            l: row_major(&l),
            x: vec![0.0; n],
            next: vec![0.0; n],
            z: vec![0.0; n],
            noise: NoiseSource::new(cfg.seed, chain, n),
        }
    }

    #[inline]
    fn step(&mut self) {
        let n = self.n;
        self.noise.fill(&mut self.z);
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += self.phi[r * n + c] * self.x[c] + self.l[r * n + c] * self.z[c];
            }
            self.next[r] = acc;
        }
        std::mem::swap(&mut self.x, &mut self.next);
    }
}

fn burn_in_steps(cfg: &MCConfig) -> usize {
    (cfg.burn_in / cfg.dt).ceil() as usize
}

/// Runs all chains and returns one PSD per observed component, in the order
/// of `observe`.
pub fn simulate_psd(sys: &LinearSystem, cfg: &MCConfig, observe: &[usize]) -> Result<Vec<PSDEstimate>> {
    cfg.validate(sys)?;
    if !sys.is_stable() {
        return Err(Error::MonteCarlo("drift matrix has a non-decaying mode".into()));
    }
    if let Some(&bad) = observe.iter().find(|&&i| i >= sys.dim()) {
        return Err(Error::MonteCarlo(format!("component {bad} out of range")));
    }
    let per_chain = cfg.segments / cfg.chains;
    let accs: Vec<Vec<WelchAccumulator>> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| {
            let mut st = Stepper::new(sys, cfg, chain);
            for _ in 0..burn_in_steps(cfg) {
                st.step();
            }
            let mut accs: Vec<WelchAccumulator> = observe
                .iter()
                .map(|_| WelchAccumulator::new(cfg.segment_len, cfg.dt, cfg.window))
                .collect();
            let mut bufs = vec![vec![0.0; cfg.segment_len]; observe.len()];
            for _ in 0..per_chain {
                for i in 0..cfg.segment_len {
                    st.step();
                    for (b, &comp) in bufs.iter_mut().zip(observe) {
                        b[i] = st.x[comp];
                    }
                }
                for (acc, b) in accs.iter_mut().zip(&bufs) {
                    acc.push(b);
                }
            }
            accs
        })
        .collect();
    let mut iter = accs.into_iter();
    let mut total = iter.next().expect("at least one chain");
    for chain in iter {
        for (t, c) in total.iter_mut().zip(&chain) {
            t.merge(c);
        }
    }
    Ok(total.iter().map(WelchAccumulator::finish).collect())
}

/// PSD of the field quadrature `a_A`.
pub fn simulate_a(p: &LaserParams, d: &DerivedParams, st: &SteadyState, cfg: &MCConfig) -> Result<PSDEstimate> {
    let sys = LinearSystem::a_subsystem(p, d, st)?;
    Ok(simulate_psd(&sys, cfg, &[0])?.remove(0))
}

/// PSDs of the field quadrature `a_S` and of the population deviation `δN_e`.
pub fn simulate_s(
    p: &LaserParams,
    d: &DerivedParams,
    st: &SteadyState,
    cfg: &MCConfig,
) -> Result<(PSDEstimate, PSDEstimate)> {
    let sys = LinearSystem::s_subsystem(p, d, st)?;
    let mut v = simulate_psd(&sys, cfg, &[0, 2])?;
    let pop = v.remove(1);
    Ok((v.remove(0), pop))
}

/// A single chain's samples after burn-in, every step recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub dt: f64,
    pub t0: f64,
    /// Row-major `samples × dim`.
    pub data: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.data.iter().skip(i).step_by(self.dim()).copied().collect()
    }

    /// Binary dump of little-endian f64 rows `(t, x_1, …)` plus a JSON sidecar
    /// at `<path>.json` describing the layout.
    pub fn write(&self, path: &Path, seed: u64) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, row) in self.data.chunks_exact(self.dim()).enumerate() {
            out.write_all(&(self.t0 + (k + 1) as f64 * self.dt).to_le_bytes())?;
            for x in row {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        out.flush()?;
        let mut columns = vec!["t".to_string()];
        columns.extend(self.names.iter().cloned());
        let sidecar = serde_json::json!({
            "dtype": "f64le",
            "order": "row-major",
            "columns": columns,
            "rows": self.len(),
            "dt": self.dt,
            "seed": seed,
        });
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        std::fs::write(side, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

/// Records `samples` steps of chain 0 after its burn-in.
pub fn record_trajectory(sys: &LinearSystem, cfg: &MCConfig, samples: usize) -> Result<Trajectory> {
    if !(cfg.dt > 0.0) || cfg.dt > sys.dt_guard() * (1.0 + 1e-12) {
        return Err(Error::MonteCarlo(format!("dt = {} exceeds the step guard", cfg.dt)));
    }
    let mut st = Stepper::new(sys, cfg, 0);
    let burn = burn_in_steps(cfg);
    for _ in 0..burn {
        st.step();
    }
    let mut data = Vec::with_capacity(samples * sys.dim());
    for _ in 0..samples {
        st.step();
        data.extend_from_slice(&st.x);
    }
    Ok(Trajectory {
        names: sys.names.clone(),
        dt: cfg.dt,
        t0: burn as f64 * cfg.dt,
        data,
    })
}

/// Agreement between a Monte-Carlo PSD and an analytic density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// RMS of the relative deviation over in-band bins.
    pub rms_relative: f64,
    /// Fraction of in-band bins with `|z| < 3`.
    pub within_3_sigma: f64,
    pub in_band_bins: usize,
    pub omega: Vec<f64>,
    pub analytic: Vec<f64>,
    pub estimate: Vec<f64>,
    pub z: Vec<f64>,
}

/// Compares on bins `ω ≥ 0` where the analytic value exceeds `band` times its
/// maximum over the grid.
pub fn compare_psd<D: SpectralDensity + ?Sized>(est: &PSDEstimate, density: &D, band: f64) -> Comparison {
    compare_with(est, |w| density.density(w), band)
}

pub fn compare_with<F: Fn(f64) -> f64>(est: &PSDEstimate, analytic: F, band: f64) -> Comparison {
    let exact: Vec<f64> = est.grid.iter().map(|&w| analytic(w)).collect();
    let peak = exact.iter().copied().fold(0.0, f64::max);
    let mut c = Comparison {
        rms_relative: 0.0,
        within_3_sigma: 0.0,
        in_band_bins: 0,
        omega: Vec::new(),
        analytic: Vec::new(),
        estimate: Vec::new(),
        z: Vec::new(),
    };
    let mut sq = 0.0;
    let mut ok = 0usize;
    for (i, &w) in est.grid.iter().enumerate() {
        if w < 0.0 || exact[i] <= band * peak {
            continue;
        }
        let rel = (est.values[i] - exact[i]) / exact[i];
        let z = (est.values[i] - exact[i]) / est.stderr[i].max(1e-300);
        sq += rel * rel;
        if z.abs() < 3.0 {
            ok += 1;
        }
        c.omega.push(w);
        c.analytic.push(exact[i]);
        c.estimate.push(est.values[i]);
        c.z.push(z);
    }
    c.in_band_bins = c.omega.len();
    if c.in_band_bins > 0 {
        c.rms_relative = (sq / c.in_band_bins as f64).sqrt();
        c.within_3_sigma = ok as f64 / c.in_band_bins as f64;
    }
    c
}
