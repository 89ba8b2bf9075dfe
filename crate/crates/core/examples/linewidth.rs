//! Laser linewidth against pump, with the low- and high-pump power forms.

use srlaser::commands::steady_sweep;
use srlaser::fluct::linewidth_high;
use srlaser::nofluct::{exact_fwhm, high_pump_nsp, linewidth_r, power_form};
use srlaser::presets::SUPERRADIANT;
use srlaser::derive;

fn main() -> srlaser::Result<()> {
    let pumps = [0.1, 1.0, 4.0, 12.0, 20.0, 40.0, 100.0];
    println!("{:>8} {:>8} {:>12} {:>12} {:>12}", "P", "r", "FWHM", "low form", "high form");
    for st in steady_sweep(&SUPERRADIANT, &pumps)? {
        let p = SUPERRADIANT.with_pump(st.pump);
        let d = derive(&p);
        let r = linewidth_r(&p, &d, st.inversion);
        let fwhm = if r <= 1.0 { exact_fwhm(&p, r) } else { f64::NAN };
        let low = power_form(&p, &d, st.ne / d.nth, st.n);
        let high = linewidth_high(&p, &d, &st).map(|l| l.gamma_las).unwrap_or(f64::NAN);
        println!("{:>8.2} {:>8.3} {:>12.5e} {:>12.5e} {:>12.5e}", st.pump, r, fwhm, low, high);
    }
    let d = derive(&SUPERRADIANT);
    println!("N_sp at high pump = {:.4}", high_pump_nsp(&SUPERRADIANT, &d));
    Ok(())
}
