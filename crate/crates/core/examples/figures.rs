//! Regenerates every figure preset as CSV files in a directory.
//!
//! cargo run --release --example figures -- out_dir

use srlaser::commands::cmd_figure;
use srlaser::config::Format;
use srlaser::output::write_named;
use srlaser::presets::PRESETS;
use srlaser::spectrum::GridSpec;

fn main() -> srlaser::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "figures".into());
    std::fs::create_dir_all(&dir)?;
    for preset in PRESETS {
        let docs = cmd_figure(preset, GridSpec::default())?;
        write_named(&docs, dir.as_ref(), Format::Csv)?;
        println!("{:<6} {:<50} {} curves", preset.id, preset.title, docs.len());
    }
    Ok(())
}
