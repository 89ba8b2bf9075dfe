//! Steady states along a log pump sweep, with and without population noise.

use srlaser::commands::steady_sweep;
use srlaser::nofluct::solve_n_nofluct;
use srlaser::presets::SUPERRADIANT;
use srlaser::semiclassical::semiclassical_state;
use srlaser::derive;

fn main() -> srlaser::Result<()> {
    let pumps: Vec<f64> = (0..=16).map(|i| 10f64.powf(-2.0 + i as f64 / 4.0)).collect();
    println!("{:>10} {:>10} {:>12} {:>12} {:>12}  region", "P", "N", "n", "n_nofluct", "n_semicl");
    for st in steady_sweep(&SUPERRADIANT, &pumps)? {
        let p = SUPERRADIANT.with_pump(st.pump);
        let d = derive(&p);
        let nf = solve_n_nofluct(&p, &d)?;
        let sc = semiclassical_state(&p, &d);
        println!(
            "{:>10.4} {:>10.4} {:>12.5e} {:>12.5e} {:>12.5e}  {}",
            st.pump,
            st.inversion,
            st.n,
            nf.n,
            sc.n,
            st.region.name()
        );
    }
    Ok(())
}
