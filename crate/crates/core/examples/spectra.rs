//! Optical spectra at one pump: no-fluctuation, quadrature components and full.

use srlaser::fluct::{full_spectrum, na_spectrum, ns_spectrum, solve_steady};
use srlaser::nofluct::spectrum_nofluct;
use srlaser::numerics::RESOLVED_PROMINENCE;
use srlaser::presets::SUPERRADIANT;
use srlaser::spectrum::{GridSpec, Spectrum};
use srlaser::derive;

fn summary(label: &str, s: &Spectrum) {
    let peaks: Vec<String> = s
        .peaks()
        .iter()
        .filter(|p| p.is_resolved(RESOLVED_PROMINENCE))
        .map(|p| format!("{:.2}", p.omega))
        .collect();
    println!("{label:>8}: S(0) = {:.4e}, peaks at omega = [{}]", s.at_zero().unwrap_or(f64::NAN), peaks.join(", "));
}

fn main() -> srlaser::Result<()> {
    let p = SUPERRADIANT.with_pump(16.0);
    let d = derive(&p);
    let st = solve_steady(&p, &d)?;
    let grid = GridSpec::default();
    println!("P = {}, N = {:.4}, n = {:.4}, omega_ro = {:.3}", p.pump, st.inversion, st.n, st.omega_ro);

    summary("nofluct", &spectrum_nofluct(&p, &d, st.nofluct_inversion, &grid)?);
    summary("A", &na_spectrum(&p, &d, st.inversion, &grid)?);
    summary("S", &ns_spectrum(&p, &d, st.inversion, st.n, &grid)?);
    let full = full_spectrum(&p, &d, &st, &grid)?;
    summary("full", &full);
    for w in &full.meta.warnings {
        println!("  {w}");
    }
    Ok(())
}
