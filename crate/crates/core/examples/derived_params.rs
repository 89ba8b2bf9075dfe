//! Threshold and coupling quantities for the two reference nanolasers.

use srlaser::nofluct::solve_pc;
use srlaser::presets::{NON_SUPERRADIANT, SUPERRADIANT};
use srlaser::derive;

fn main() {
    for (name, p) in [("superradiant", SUPERRADIANT), ("non-superradiant", NON_SUPERRADIANT)] {
        let d = derive(&p);
        println!("{name} (gamma_perp = {})", p.gamma_perp);
        println!("  Nth = {:.4}  Pth = {:.4}  Nc = {:.4}", d.nth, d.pth, d.nc);
        println!("  beta~ = {:.4}  beta~_c = {:.4}  beta = {:.4}", d.beta_tilde, d.beta_tilde_c, d.beta_conv);
        println!("  gamma_c = {:.4}  Omega0/(2kappa+gamma_perp) = {:.3}", d.gamma_c, p.coupling_ratio());
        match solve_pc(&p, &d) {
            Ok(pc) => println!("  spectrum split below P = {pc:.4}"),
            Err(e) => println!("  no splitting: {e}"),
        }
    }
}
