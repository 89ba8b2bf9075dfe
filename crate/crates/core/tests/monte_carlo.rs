use srlaser::fluct::{solve_steady, ADensity, SDensity, SteadyState};
use srlaser::mcsim::{
    compare_psd, compare_with, record_trajectory, simulate_a, simulate_psd, simulate_s, welch_coherence, Integrator,
    LinearSystem, MCConfig, PSDEstimate,
};
use srlaser::presets::SUPERRADIANT;
use srlaser::{derive, DerivedParams, LaserParams};

const BAND: f64 = 0.01;

fn state(pump: f64) -> (LaserParams, DerivedParams, SteadyState) {
    let p = SUPERRADIANT.with_pump(pump);
    let d = derive(&p);
    let st = solve_steady(&p, &d).unwrap();
    (p, d, st)
}

fn within_3_sigma(x: f64, target: f64, se: f64) -> bool {
    (x - target).abs() <= 3.0 * se
}

#[test]
fn a_combination_matches_analytic_spectrum() {
    let (p, d, st) = state(16.0);
    let sys = LinearSystem::a_subsystem(&p, &d, &st).unwrap();
    let est = simulate_a(&p, &d, &st, &MCConfig::for_system(&sys, 21)).unwrap();
    let c = compare_psd(&est, &ADensity::new(&p, &d, st.inversion).unwrap(), BAND);
    assert!(c.rms_relative < 0.10, "rms {}", c.rms_relative);
    assert!(c.within_3_sigma >= 0.95, "z {}", c.within_3_sigma);
    assert!(within_3_sigma(est.variance, st.n_a, est.variance_stderr), "{} vs {}", est.variance, st.n_a);
    assert!(est.values.iter().all(|&v| v >= 0.0));
}

#[test]
fn s_combination_reproduces_sidebands() {
    let (p, d, st) = state(16.0);
    let sys = LinearSystem::s_subsystem(&p, &d, &st).unwrap();
    let (est, pop) = simulate_s(&p, &d, &st, &MCConfig::for_system(&sys, 22)).unwrap();
    let c = compare_psd(&est, &SDensity::new(&p, &d, st.inversion, st.n).unwrap(), BAND);
    assert!(c.rms_relative < 0.10, "rms {}", c.rms_relative);
    assert!(c.within_3_sigma >= 0.95, "z {}", c.within_3_sigma);
    assert!(within_3_sigma(est.variance, st.n_s, est.variance_stderr), "{} vs {}", est.variance, st.n_s);

    // population fluctuations: PSD integral against the sample variance and the Lyapunov value
    let lyap = sys.stationary_covariance().unwrap()[(2, 2)];
    assert!(within_3_sigma(pop.variance, lyap, pop.variance_stderr), "{} vs {lyap}", pop.variance);
    assert!((pop.integrated() - pop.variance).abs() <= 3.0 * pop.variance_stderr);
}

#[test]
fn s_combination_without_photons_degenerates_to_a() {
    let (p, d, mut st) = state(4.0);
    st.n = 0.0;
    let sys = LinearSystem::s_subsystem(&p, &d, &st).unwrap();
    let est = simulate_psd(&sys, &MCConfig::for_system(&sys, 23), &[0]).unwrap().remove(0);
    let c = compare_psd(&est, &ADensity::new(&p, &d, st.inversion).unwrap(), BAND);
    assert!(c.rms_relative < 0.10, "rms {}", c.rms_relative);
    assert!(c.within_3_sigma >= 0.95, "z {}", c.within_3_sigma);
}

#[test]
fn ornstein_uhlenbeck_oracle() {
    let (lambda, two_d) = (7.0, 2.5);
    let sys = LinearSystem::ornstein_uhlenbeck(lambda, two_d);
    for integrator in [Integrator::Exact, Integrator::EulerMaruyama] {
        let base = MCConfig::for_system(&sys, 24);
        let cfg = MCConfig {
            dt: base.dt / 10.0,
            segment_len: 1 << 14,
            segments: 640,
            integrator,
            ..base
        };
        let est = simulate_psd(&sys, &cfg, &[0]).unwrap().remove(0);
        let c = compare_with(&est, |w| two_d / (lambda * lambda + w * w), BAND);
        assert!(c.rms_relative < 0.05, "{integrator:?}: rms {}", c.rms_relative);
    }
}

#[test]
fn identical_seeds_are_bitwise_identical() {
    let (p, d, st) = state(16.0);
    let sys = LinearSystem::s_subsystem(&p, &d, &st).unwrap();
    let cfg = MCConfig {
        segment_len: 1 << 12,
        segments: 64,
        ..MCConfig::for_system(&sys, 5)
    };
    let a = simulate_s(&p, &d, &st, &cfg).unwrap();
    let b = simulate_s(&p, &d, &st, &cfg).unwrap();
    assert_eq!(a, b);
    let other = simulate_s(&p, &d, &st, &MCConfig { seed: 6, ..cfg }).unwrap();
    assert_ne!(a.0.values, other.0.values);
}

/// Bins of two estimates that share a frequency.
fn common_bins(a: &PSDEstimate, b: &PSDEstimate) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut j = 0;
    for (i, &w) in a.grid.iter().enumerate() {
        while j < b.grid.len() && b.grid[j] < w - 1e-9 * w.abs().max(1.0) {
            j += 1;
        }
        if j < b.grid.len() && (b.grid[j] - w).abs() <= 1e-9 * w.abs().max(1.0) {
            out.push((i, j));
        }
    }
    out
}

#[test]
fn halving_dt_stays_within_statistical_error() {
    let (p, d, st) = state(16.0);
    let sys = LinearSystem::a_subsystem(&p, &d, &st).unwrap();
    let coarse = MCConfig::for_system(&sys, 31);
    let fine = MCConfig {
        dt: coarse.dt / 2.0,
        segment_len: coarse.segment_len * 2,
        seed: 32,
        ..coarse
    };
    let a = simulate_a(&p, &d, &st, &coarse).unwrap();
    let b = simulate_a(&p, &d, &st, &fine).unwrap();
    let peak = a.values.iter().copied().fold(0.0, f64::max);
    let bins: Vec<(usize, usize)> = common_bins(&a, &b)
        .into_iter()
        .filter(|&(i, _)| a.grid[i] >= 0.0 && a.values[i] > BAND * peak)
        .collect();
    assert!(bins.len() > 100);
    let mut diff = 0.0;
    let mut var = 0.0;
    let mut ok = 0;
    for &(i, j) in &bins {
        let delta = a.values[i] - b.values[j];
        let se2 = a.stderr[i].powi(2) + b.stderr[j].powi(2);
        diff += delta;
        var += se2;
        if delta.abs() < 3.0 * se2.sqrt() {
            ok += 1;
        }
    }
    assert!(diff.abs() < 3.0 * var.sqrt(), "band sum {diff} vs {}", var.sqrt());
    assert!(ok as f64 >= 0.95 * bins.len() as f64, "{ok}/{}", bins.len());
}

#[test]
fn independently_seeded_combinations_are_incoherent() {
    let (p, d, st) = state(16.0);
    let sys_a = LinearSystem::a_subsystem(&p, &d, &st).unwrap();
    let sys_s = LinearSystem::s_subsystem(&p, &d, &st).unwrap();
    let segments = 256;
    let cfg = MCConfig {
        segment_len: 1 << 12,
        segments,
        chains: 1,
        ..MCConfig::for_system(&sys_a, 41)
    };
    let samples = segments * cfg.segment_len;
    let a = record_trajectory(&sys_a, &cfg, samples).unwrap().component(0);
    let s = record_trajectory(&sys_s, &MCConfig { seed: 42, ..cfg }, samples).unwrap().component(0);
    let (_, coh) = welch_coherence(&a, &s, &cfg).unwrap();
    // for independent Gaussian signals the coherence over K segments is Beta(1, K−1)
    let threshold = 1.0 - 0.0027f64.powf(1.0 / (segments as f64 - 1.0));
    let above = coh.iter().filter(|&&c| c > threshold).count() as f64 / coh.len() as f64;
    assert!(above < 0.01, "fraction above threshold {above}");
    let mean = coh.iter().sum::<f64>() / coh.len() as f64;
    assert!((mean - 1.0 / segments as f64).abs() < 0.2 / segments as f64, "mean coherence {mean}");
}
