//! The operations behind the command-line subcommands. Each returns output
//! documents; writing them is left to the caller.

use serde_json::{json, Value};

use crate::config::{McOptions, RunConfig};
use crate::error::{Error, Result};
use crate::fluct::{
    balance_photons, classify_sweep, linewidth_high, solve_steady, solve_sweep, ADensity, ASDensity,
    FullDensity, Region, RfDensity, SDensity, SteadyState,
};
use crate::mcsim::{compare_psd, simulate_a, simulate_s, Comparison, LinearSystem, MCConfig, PSDEstimate};
use crate::nofluct::{
    exact_fwhm, linewidth_nofluct, linewidth_r, solve_n_nofluct, solve_pc, LinewidthMethod, NoFluctDensity,
};
use crate::output::{Cell, Document};
use crate::params::{derive, DerivedParams, LaserParams};
use crate::presets::{FigureKind, FigurePreset};
use crate::semiclassical::semiclassical_state;
use crate::spectrum::{GridSpec, SpectralDensity, Spectrum, SpectrumKind};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "SRLASER_THREADS";

/// Default seed of Monte-Carlo runs.
pub const DEFAULT_SEED: u64 = 1;

/// Fraction of the analytic peak above which Monte-Carlo bins are compared.
pub const MC_BAND: f64 = 0.01;

/// Sizes the global worker pool from [`THREADS_ENV`]; unset means the
/// available parallelism. Returns the thread count in use.
pub fn configure_threads() -> Result<usize> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`")))?;
            if n == 0 {
                return Err(Error::Config(format!("{THREADS_ENV} must be at least 1")));
            }
            Some(n)
        }
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = requested {
        builder = builder.num_threads(n);
    }
    // a pool that already exists is kept
    let _ = builder.build_global();
    Ok(rayon::current_num_threads())
}

fn header(command: &str, cfg: &RunConfig, extra: Value) -> Result<Value> {
    let mut v = json!({ "command": command, "config": cfg.resolved()? });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    Ok(v)
}

fn single_pump(cfg: &RunConfig, pump: f64) -> RunConfig {
    RunConfig {
        pumps: Some(vec![pump]),
        ..cfg.clone()
    }
}

/// Derived-parameter report, one quantity per row.
pub fn cmd_derive(cfg: &RunConfig) -> Result<Document> {
    let p = cfg.params()?;
    let d = derive(&p);
    let pc = solve_pc(&p, &d).ok();
    let mut warnings = Vec::new();
    if p.weak_coupling_violated() {
        warnings.push(format!(
            "Omega0/(2kappa+gamma_perp) = {:.3} is not small",
            p.coupling_ratio()
        ));
    }
    let mut doc = Document::new(
        "derive",
        header("derive", cfg, json!({ "warnings": warnings }))?,
        &["quantity", "value"],
    );
    let rows: [(&str, f64); 16] = [
        ("kappa", p.kappa),
        ("gamma_perp", p.gamma_perp),
        ("omega_rabi", p.omega_rabi),
        ("f", p.f),
        ("n0", p.n0),
        ("pump", p.pump),
        ("nth", d.nth),
        ("pth", d.pth),
        ("nc", d.nc),
        ("beta_tilde", d.beta_tilde),
        ("beta_tilde_c", d.beta_tilde_c),
        ("beta_conv", d.beta_conv),
        ("gamma_c", d.gamma_c),
        ("gamma_p", d.gamma_p),
        ("pc", pc.unwrap_or(f64::NAN)),
        ("coupling_ratio", p.coupling_ratio()),
    ];
    for (k, v) in rows {
        doc.push(vec![k.into(), v.into()]);
    }
    Ok(doc)
}

fn is_increasing(pumps: &[f64]) -> bool {
    pumps.windows(2).all(|w| w[1] > w[0])
}

/// Solves every pump and assigns regions; an increasing sweep is classified
/// as a whole.
pub fn steady_sweep(p: &LaserParams, pumps: &[f64]) -> Result<Vec<SteadyState>> {
    let mut states = solve_sweep(p, pumps).into_iter().collect::<Result<Vec<_>>>()?;
    if pumps.len() > 1 && is_increasing(pumps) {
        let regions = classify_sweep(&states);
        for (st, r) in states.iter_mut().zip(regions) {
            st.region = r;
        }
    }
    Ok(states)
}

pub const STEADY_COLUMNS: [&str; 13] = [
    "P",
    "N",
    "Ne",
    "n",
    "nS",
    "nA",
    "omega_ro",
    "region",
    "N_nofluct",
    "N_highpump",
    "n_nofluct",
    "n_semiclassical",
    "residual",
];

fn steady_table(name: &str, meta: Value, p: &LaserParams, pumps: &[f64]) -> Result<Document> {
    let states = steady_sweep(p, pumps)?;
    let mut doc = Document::new(name, meta, &STEADY_COLUMNS);
    for st in &states {
        let q = p.with_pump(st.pump);
        let d = derive(&q);
        doc.push(vec![
            st.pump.into(),
            st.inversion.into(),
            st.ne.into(),
            st.n.into(),
            st.n_s.into(),
            st.n_a.into(),
            st.omega_ro.into(),
            st.region.name().into(),
            st.nofluct_inversion.into(),
            st.highpump_inversion.into(),
            solve_n_nofluct(&q, &d)?.n.into(),
            semiclassical_state(&q, &d).n.into(),
            st.residual.into(),
        ]);
    }
    Ok(doc)
}

fn nofluct_table(name: &str, meta: Value, p: &LaserParams, pumps: &[f64]) -> Result<Document> {
    let mut doc = Document::new(name, meta, &["P", "N", "Ne", "n", "two_peak"]);
    for &pump in pumps {
        let q = p.with_pump(pump);
        let s = solve_n_nofluct(&q, &derive(&q))?;
        let split = if s.two_peak { "yes" } else { "no" };
        doc.push(vec![pump.into(), s.inversion.into(), s.ne.into(), s.n.into(), split.into()]);
    }
    Ok(doc)
}

/// Steady-state table over the configured pumps. With `no_popfluct` the
/// no-fluctuation solution is tabulated instead.
pub fn cmd_steady(cfg: &RunConfig) -> Result<Document> {
    let p = cfg.params()?;
    let pumps = cfg.pump_values()?;
    let meta = header("steady", cfg, json!({}))?;
    if cfg.no_popfluct {
        nofluct_table("steady", meta, &p, &pumps)
    } else {
        steady_table("steady", meta, &p, &pumps)
    }
}

/// Inversions and photon number a spectrum is evaluated at.
#[derive(Debug, Clone, Copy)]
struct Operating {
    inversion: f64,
    n: f64,
    omega_ro: f64,
    nofluct_inversion: f64,
    state: Option<SteadyState>,
}

fn operating_point(p: &LaserParams, d: &DerivedParams, kinds: &[SpectrumKind], fixed: Option<f64>) -> Result<Operating> {
    if let Some(inv) = fixed {
        let n = balance_photons(p, inv);
        let omega_ro = SDensity::new(p, d, inv, n)?.omega_ro();
        return Ok(Operating {
            inversion: inv,
            n,
            omega_ro,
            nofluct_inversion: inv,
            state: None,
        });
    }
    let nf = solve_n_nofluct(p, d)?;
    if kinds.iter().all(|&k| k == SpectrumKind::Nofluct) {
        return Ok(Operating {
            inversion: nf.inversion,
            n: nf.n,
            omega_ro: 0.0,
            nofluct_inversion: nf.inversion,
            state: None,
        });
    }
    let st = solve_steady(p, d)?;
    Ok(Operating {
        inversion: st.inversion,
        n: st.n,
        omega_ro: st.omega_ro,
        nofluct_inversion: nf.inversion,
        state: Some(st),
    })
}

fn density(kind: SpectrumKind, p: &LaserParams, d: &DerivedParams, op: &Operating) -> Result<Box<dyn SpectralDensity>> {
    let (inv, n) = (op.inversion, op.n);
    Ok(match kind {
        SpectrumKind::Nofluct => Box::new(NoFluctDensity::new(p, d, op.nofluct_inversion)?),
        SpectrumKind::A => Box::new(ADensity::new(p, d, inv)?),
        SpectrumKind::S => Box::new(SDensity::new(p, d, inv, n)?),
        SpectrumKind::AS => Box::new(ASDensity::new(p, d, inv)?),
        SpectrumKind::Full => Box::new(FullDensity::new(p, d, inv, n)?),
        SpectrumKind::Rf => Box::new(RfDensity::new(p, d, inv, n)?),
    })
}

/// Samples several spectrum kinds on one shared grid.
pub fn spectrum_document(
    name: &str,
    meta: Value,
    p: &LaserParams,
    kinds: &[SpectrumKind],
    grid: &GridSpec,
    fixed_inversion: Option<f64>,
) -> Result<Document> {
    let d = derive(p);
    let op = operating_point(p, &d, kinds, fixed_inversion)?;
    let omega = grid.build(p, op.omega_ro)?;
    let mut columns = vec!["omega"];
    let mut series = Vec::with_capacity(kinds.len());
    let mut negativity = serde_json::Map::new();
    let mut warnings = Vec::new();
    for &kind in kinds {
        let dens = density(kind, p, &d, &op)?;
        let s = Spectrum::from_density(dens.as_ref(), omega.clone(), crate::spectrum::SpectrumMeta {
            params: *p,
            inversion: op.inversion,
            photon_number: Some(op.n),
            omega_ro: Some(op.omega_ro),
            max_negativity: None,
            warnings: Vec::new(),
        });
        if let Some(m) = s.meta.max_negativity {
            negativity.insert(kind.name().into(), json!(m));
        }
        if kind == SpectrumKind::Rf {
            if let Some(st) = op.state.filter(|st| st.region != Region::Lasing) {
                warnings.push(format!(
                    "intensity-noise spectrum outside the lasing region ({})",
                    st.region.name()
                ));
            }
        }
        columns.push(kind.name());
        series.push(s.values);
    }
    let mut extra = json!({
        "pump": p.pump,
        "inversion": op.inversion,
        "photon_number": op.n,
        "omega_ro": op.omega_ro,
        "nofluct_inversion": op.nofluct_inversion,
        "max_negativity": negativity,
        "warnings": warnings,
    });
    if let Some(st) = op.state {
        extra["nS"] = json!(st.n_s);
        extra["nA"] = json!(st.n_a);
        extra["region"] = json!(st.region.name());
    }
    let mut meta = meta;
    if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
        m.extend(e);
    }
    let mut doc = Document::new(name, meta, &columns);
    for (i, &w) in omega.iter().enumerate() {
        let mut row = Vec::with_capacity(columns.len());
        row.push(Cell::Num(w));
        row.extend(series.iter().map(|s| Cell::Num(s[i])));
        doc.push(row);
    }
    Ok(doc)
}

fn spectrum_kinds(cfg: &RunConfig, default: &[SpectrumKind]) -> Vec<SpectrumKind> {
    let mut kinds = if cfg.kinds.is_empty() {
        default.to_vec()
    } else {
        cfg.kinds.clone()
    };
    if cfg.no_popfluct && !kinds.contains(&SpectrumKind::Nofluct) {
        kinds.push(SpectrumKind::Nofluct);
    }
    kinds
}

fn spectra_over_pumps(command: &str, cfg: &RunConfig, kinds: &[SpectrumKind]) -> Result<Vec<Document>> {
    let p = cfg.params()?;
    let grid = cfg.grid();
    cfg.pump_values()?
        .into_iter()
        .enumerate()
        .map(|(k, pump)| {
            let meta = header(command, &single_pump(cfg, pump), json!({}))?;
            spectrum_document(
                &format!("{command}_{}", k + 1),
                meta,
                &p.with_pump(pump),
                kinds,
                &grid,
                cfg.inversion,
            )
        })
        .collect()
}

/// One spectrum document per pump with the requested kinds as columns
/// (default: the full spectrum). `no_popfluct` adds the no-fluctuation
/// spectrum at the same pump.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Vec<Document>> {
    let kinds = spectrum_kinds(cfg, &[SpectrumKind::Full]);
    spectra_over_pumps("spectrum", cfg, &kinds)
}

/// Intensity-noise spectrum with the S-combination spectrum it is built from.
pub fn cmd_rf(cfg: &RunConfig) -> Result<Vec<Document>> {
    spectra_over_pumps("rf", cfg, &[SpectrumKind::Rf, SpectrumKind::S])
}

pub const LINEWIDTH_COLUMNS: [&str; 10] = [
    "P",
    "N",
    "n",
    "region",
    "r",
    "gamma_las",
    "gamma_low",
    "gamma_high",
    "N_nofluct",
    "gamma_nofluct",
];

fn exact_or_nan(p: &LaserParams, d: &DerivedParams, inversion: f64) -> f64 {
    let r = linewidth_r(p, d, inversion);
    if r > 1.0 {
        f64::NAN
    } else {
        exact_fwhm(p, r)
    }
}

fn linewidth_table(name: &str, meta: Value, p: &LaserParams, pumps: &[f64]) -> Result<Document> {
    let states = steady_sweep(p, pumps)?;
    let mut doc = Document::new(name, meta, &LINEWIDTH_COLUMNS);
    for st in &states {
        let q = p.with_pump(st.pump);
        let d = derive(&q);
        let low = linewidth_nofluct(&q, &d, st.nofluct_inversion, LinewidthMethod::PowerFormLow)
            .map(|l| l.gamma_las)
            .ok();
        let high = linewidth_high(&q, &d, st).map(|l| l.gamma_las).ok();
        doc.push(vec![
            st.pump.into(),
            st.inversion.into(),
            st.n.into(),
            st.region.name().into(),
            linewidth_r(&q, &d, st.inversion).into(),
            exact_or_nan(&q, &d, st.inversion).into(),
            low.into(),
            high.into(),
            st.nofluct_inversion.into(),
            exact_or_nan(&q, &d, st.nofluct_inversion).into(),
        ]);
    }
    Ok(doc)
}

/// Linewidth versus pump: the exact FWHM at the solved inversion with the
/// low-pump and high-pump power-form asymptotes. Split spectra have no FWHM
/// and are reported as NaN.
pub fn cmd_linewidth(cfg: &RunConfig) -> Result<Document> {
    let p = cfg.params()?;
    let meta = header("linewidth", cfg, json!({}))?;
    linewidth_table("linewidth", meta, &p, &cfg.pump_values()?)
}

fn mc_config(sys: &LinearSystem, seed: u64, o: &McOptions) -> MCConfig {
    let base = MCConfig::for_system(sys, seed);
    MCConfig {
        dt: o.dt.unwrap_or(base.dt),
        segment_len: o.segment_len.unwrap_or(base.segment_len),
        segments: o.segments.unwrap_or(base.segments),
        chains: o.chains.unwrap_or(base.chains),
        burn_in: o.burn_in.unwrap_or(base.burn_in),
        window: o.window.unwrap_or(base.window),
        integrator: o.integrator.unwrap_or(base.integrator),
        seed,
    }
}

fn comparison_document(name: &str, meta: Value, est: &PSDEstimate, c: &Comparison, total: f64, mc: &MCConfig) -> Document {
    let mut meta = meta;
    if let Value::Object(m) = &mut meta {
        m.insert("mc_config".into(), json!(mc));
        m.insert("rms_relative".into(), json!(c.rms_relative));
        m.insert("within_3_sigma".into(), json!(c.within_3_sigma));
        m.insert("in_band_bins".into(), json!(c.in_band_bins));
        m.insert("variance".into(), json!(est.variance));
        m.insert("variance_stderr".into(), json!(est.variance_stderr));
        m.insert("analytic_total".into(), json!(total));
    }
    let mut doc = Document::new(name, meta, &["omega", "analytic", "estimate", "z"]);
    for i in 0..c.omega.len() {
        doc.push(vec![c.omega[i].into(), c.analytic[i].into(), c.estimate[i].into(), c.z[i].into()]);
    }
    doc
}

/// Monte-Carlo spectra of the A and S field combinations against their
/// analytic densities, two documents per pump with per-bin z-scores.
pub fn cmd_mc_validate(cfg: &RunConfig) -> Result<Vec<Document>> {
    let p0 = cfg.params()?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let opts = cfg.mc.unwrap_or_default();
    let mut docs = Vec::new();
    for pump in cfg.pump_values()? {
        let p = p0.with_pump(pump);
        let d = derive(&p);
        let st = solve_steady(&p, &d)?;
        if st.n_a.is_nan() || pump == 0.0 {
            return Err(Error::MonteCarlo("Monte-Carlo validation needs a pumped state".into()));
        }
        let sub = single_pump(cfg, pump);
        let sys_a = LinearSystem::a_subsystem(&p, &d, &st)?;
        let cfg_a = mc_config(&sys_a, seed, &opts);
        let est_a = simulate_a(&p, &d, &st, &cfg_a)?;
        let cmp_a = compare_psd(&est_a, &ADensity::new(&p, &d, st.inversion)?, MC_BAND);
        let meta = header("mc-validate", &sub, json!({ "component": "A", "pump": pump }))?;
        docs.push(comparison_document(&format!("mc_A_{}", docs.len() / 2 + 1), meta, &est_a, &cmp_a, st.n_a, &cfg_a));

        let sys_s = LinearSystem::s_subsystem(&p, &d, &st)?;
        let cfg_s = mc_config(&sys_s, seed, &opts);
        let (est_s, pop) = simulate_s(&p, &d, &st, &cfg_s)?;
        let cmp_s = compare_psd(&est_s, &SDensity::new(&p, &d, st.inversion, st.n)?, MC_BAND);
        let meta = header(
            "mc-validate",
            &sub,
            json!({
                "component": "S",
                "pump": pump,
                "population_variance": pop.variance,
                "population_variance_stderr": pop.variance_stderr,
            }),
        )?;
        docs.push(comparison_document(&format!("mc_S_{}", docs.len() / 2 + 1), meta, &est_s, &cmp_s, st.n_s, &cfg_s));
    }
    Ok(docs)
}

fn figure_meta(preset: &FigurePreset, command: &str, cfg: &RunConfig, curve: usize) -> Result<Value> {
    header(
        command,
        cfg,
        json!({ "figure": preset.id, "title": preset.title, "curve": curve }),
    )
}

fn curve_name(preset: &FigurePreset, k: usize) -> String {
    format!("{}_curve{k}", preset.id)
}

/// Runs a figure preset end to end. Documents are named
/// `fig<id>_curve<k>` with `k` from 1.
pub fn cmd_figure(preset: &FigurePreset, grid: GridSpec) -> Result<Vec<Document>> {
    let pumps = preset.pumps.values();
    let base = |p: LaserParams, pumps: Vec<f64>, kinds: Vec<SpectrumKind>| RunConfig {
        dimensionless: Some(p),
        pumps: Some(pumps),
        kinds,
        grid: Some(grid),
        ..RunConfig::default()
    };
    let spectra = |kinds: &[SpectrumKind], command: &str| -> Result<Vec<Document>> {
        pumps
            .iter()
            .enumerate()
            .map(|(i, &pump)| {
                let p = preset.params_at(pump);
                let cfg = base(p, vec![pump], kinds.to_vec());
                let meta = figure_meta(preset, command, &cfg, i + 1)?;
                spectrum_document(&curve_name(preset, i + 1), meta, &p, kinds, &grid, None)
            })
            .collect()
    };
    match preset.kind {
        FigureKind::NofluctSpectra => {
            let mut docs = spectra(&[SpectrumKind::Nofluct], "spectrum")?;
            for (doc, &pump) in docs.iter_mut().zip(&pumps) {
                let p = preset.params_at(pump);
                let d = derive(&p);
                let s = solve_n_nofluct(&p, &d)?;
                doc.meta["two_peak"] = json!(s.two_peak);
                doc.meta["pc"] = json!(s.pc);
                doc.meta["nc"] = json!(d.nc);
            }
            Ok(docs)
        }
        FigureKind::QuadratureSpectra => {
            let pump = pumps[0];
            let p = preset.params_at(pump);
            [SpectrumKind::A, SpectrumKind::S]
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let cfg = base(p, vec![pump], vec![k]);
                    let meta = figure_meta(preset, "spectrum", &cfg, i + 1)?;
                    spectrum_document(&curve_name(preset, i + 1), meta, &p, &[k], &grid, None)
                })
                .collect()
        }
        FigureKind::SteadySweep => preset
            .params
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let cfg = base(p, pumps.clone(), Vec::new());
                let meta = figure_meta(preset, "steady", &cfg, i + 1)?;
                steady_table(&curve_name(preset, i + 1), meta, &p, &pumps)
            })
            .collect(),
        FigureKind::Linewidth => {
            let p = preset.params[0];
            let cfg = base(p, pumps.clone(), Vec::new());
            Ok(vec![
                linewidth_table(&curve_name(preset, 1), figure_meta(preset, "linewidth", &cfg, 1)?, &p, &pumps)?,
                steady_table(&curve_name(preset, 2), figure_meta(preset, "steady", &cfg, 2)?, &p, &pumps)?,
            ])
        }
        FigureKind::FullSpectra => spectra(&[SpectrumKind::Full, SpectrumKind::Nofluct], "spectrum"),
        FigureKind::RfSpectra => spectra(&[SpectrumKind::Rf], "rf"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{find, SUPERRADIANT};

    fn cfg(p: LaserParams, pumps: &[f64]) -> RunConfig {
        RunConfig {
            dimensionless: Some(p),
            pumps: Some(pumps.to_vec()),
            ..RunConfig::default()
        }
    }

    #[test]
    fn derive_report_carries_nc_and_pc() {
        let doc = cmd_derive(&cfg(SUPERRADIANT, &[1.0])).unwrap();
        let names = doc.text_column("quantity").unwrap();
        let values = doc.column("value").unwrap();
        let get = |k: &str| values[names.iter().position(|n| n == k).unwrap()];
        assert!((get("nc") - 2.7).abs() < 0.03);
        assert!((get("pc") - 7.4).abs() < 0.4);
    }

    #[test]
    fn steady_zero_pump_row() {
        let doc = cmd_steady(&cfg(SUPERRADIANT, &[0.0, 1.0])).unwrap();
        assert_eq!(doc.column("N").unwrap()[0], -100.0);
        assert_eq!(doc.column("n").unwrap()[0], 0.0);
    }

    #[test]
    fn no_popfluct_steady_table() {
        let mut c = cfg(SUPERRADIANT, &[2.0, 16.0]);
        c.no_popfluct = true;
        let doc = cmd_steady(&c).unwrap();
        assert_eq!(doc.text_column("two_peak").unwrap(), vec!["yes", "no"]);
    }

    #[test]
    fn fixed_inversion_above_threshold_is_a_pole() {
        let mut c = cfg(SUPERRADIANT, &[4.0]);
        c.kinds = vec![SpectrumKind::A];
        let d = derive(&SUPERRADIANT);
        c.inversion = Some(d.nth + 1.0);
        let err = cmd_spectrum(&c).unwrap_err();
        assert!(matches!(err, Error::Pole(_)), "{err}");
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn spectrum_companion_column() {
        let mut c = cfg(SUPERRADIANT, &[16.0]);
        c.no_popfluct = true;
        c.grid = Some(GridSpec::Linear { max: 400.0, points: 101 });
        let docs = cmd_spectrum(&c).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].columns, vec!["omega", "full", "nofluct"]);
        assert_eq!(docs[0].rows.len(), 201);
    }

    #[test]
    fn figure_two_b_has_five_curves() {
        let preset = find("fig2b").unwrap();
        let docs = cmd_figure(preset, GridSpec::default()).unwrap();
        assert_eq!(docs.len(), preset.curve_count());
        assert_eq!(docs[0].name, "fig2b_curve1");
        assert_eq!(docs[0].meta["two_peak"], json!(true));
        assert_eq!(docs[4].meta["two_peak"], json!(false));
    }
}
