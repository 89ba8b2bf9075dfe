//! Stochastic check of the A and S spectra against the analytic densities.

use srlaser::fluct::{solve_steady, ADensity, SDensity};
use srlaser::mcsim::{compare_psd, simulate_a, simulate_s, LinearSystem, MCConfig};
use srlaser::presets::SUPERRADIANT;
use srlaser::derive;

fn main() -> srlaser::Result<()> {
    let p = SUPERRADIANT.with_pump(16.0);
    let d = derive(&p);
    let st = solve_steady(&p, &d)?;

    let sys = LinearSystem::a_subsystem(&p, &d, &st)?;
    let cfg = MCConfig { segments: 256, ..MCConfig::for_system(&sys, 7) };
    let a = simulate_a(&p, &d, &st, &cfg)?;
    let ca = compare_psd(&a, &ADensity::new(&p, &d, st.inversion)?, 0.01);
    println!("A: rms {:.3}, |z|<3 in {:.1}% of {} bins", ca.rms_relative, 100.0 * ca.within_3_sigma, ca.in_band_bins);
    println!("   variance {:.4} +- {:.4} vs nA = {:.4}", a.variance, a.variance_stderr, st.n_a);

    let sys = LinearSystem::s_subsystem(&p, &d, &st)?;
    let cfg = MCConfig { segments: 256, ..MCConfig::for_system(&sys, 8) };
    let (s, pop) = simulate_s(&p, &d, &st, &cfg)?;
    let cs = compare_psd(&s, &SDensity::new(&p, &d, st.inversion, st.n)?, 0.01);
    println!("S: rms {:.3}, |z|<3 in {:.1}% of {} bins", cs.rms_relative, 100.0 * cs.within_3_sigma, cs.in_band_bins);
    println!("   variance {:.4} +- {:.4} vs nS = {:.4}", s.variance, s.variance_stderr, st.n_s);
    println!("population variance {:.4} +- {:.4}", pop.variance, pop.variance_stderr);
    Ok(())
}
