//! Driving the library from a JSON run configuration.

use srlaser::commands::{cmd_derive, cmd_steady};
use srlaser::config::RunConfig;

fn main() -> srlaser::Result<()> {
    let cfg = RunConfig::from_json(
        r#"{
            "dimensionless": {"kappa": 50, "gamma_perp": 50, "omega_rabi": 34, "f": 0.5, "n0": 100, "pump": 1},
            "pumps": "log:0.1:100:7"
        }"#,
    )?;
    cfg.validate()?;
    print!("{}", cmd_derive(&cfg)?.to_string(cfg.format.unwrap_or_default())?);
    println!();
    print!("{}", cmd_steady(&cfg)?.to_string(cfg.format.unwrap_or_default())?);
    Ok(())
}
