//! Intensity-noise spectrum and its relaxation-oscillation peak.

use srlaser::fluct::{rf_spectrum, solve_steady};
use srlaser::presets::{NON_SUPERRADIANT, SUPERRADIANT};
use srlaser::spectrum::GridSpec;
use srlaser::derive;

fn main() -> srlaser::Result<()> {
    let grid = GridSpec::Linear { max: 600.0, points: 1201 };
    for base in [SUPERRADIANT, NON_SUPERRADIANT] {
        let p = base.with_pump(40.0);
        let d = derive(&p);
        let st = solve_steady(&p, &d)?;
        let rf = rf_spectrum(&p, &d, &st, &grid)?;
        let (i, max) = rf
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        println!(
            "gamma_perp = {:>6}: max {:.4e} at |omega| = {:.2}, omega_ro = {:.2}",
            p.gamma_perp,
            max,
            rf.grid[i].abs(),
            st.omega_ro
        );
    }
    Ok(())
}
