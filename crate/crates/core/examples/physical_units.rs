//! Normalizing an SI device description to dimensionless parameters.

use srlaser::{derive, normalize, ModeVolume, PhysicalInputs};

fn main() -> srlaser::Result<()> {
    let device = PhysicalInputs {
        lambda0: 1.55e-6,
        n_r: 3.4,
        mode_volume: ModeVolume::WavelengthCubed(1.0),
        dipole: 1.0e-28,
        q_factor: 1.0e4,
        gamma_par: 1.0e9,
        gamma_perp: 5.0e12,
        n0: 100,
        f: 0.5,
        pump: 10.0,
    };
    let p = normalize(&device)?;
    let d = derive(&p);
    println!("omega0 = {:.4e} rad/s, V = {:.4e} m^3", device.omega0(), device.volume_m3());
    println!("kappa = {:.4}  gamma_perp = {:.4}  Omega0 = {:.4}", p.kappa, p.gamma_perp, p.omega_rabi);
    println!("Nth = {:.4}  Pth = {:.4}", d.nth, d.pth);
    if p.weak_coupling_violated() {
        println!("warning: Omega0 is not small against 2kappa + gamma_perp");
    }
    Ok(())
}
