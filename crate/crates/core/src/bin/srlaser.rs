use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use srlaser::commands::{self, DEFAULT_SEED};
use srlaser::config::{Format, PumpSpec, RunConfig};
use srlaser::output::{write_documents, write_named, Document};
use srlaser::presets;
use srlaser::spectrum::{GridSpec, SpectrumKind};
use srlaser::{Error, Result};

/// Superradiant nanolaser steady states, spectra and linewidths.
///
/// Worker threads default to the available parallelism; set SRLASER_THREADS
/// to override.
#[derive(Parser)]
#[command(name = "srlaser", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived parameters: thresholds, beta factors, splitting pump.
    Derive(Common),
    /// Steady-state table over pump values.
    Steady(Common),
    /// Optical spectra (--kind nofluct, A, S, AS, full, rf).
    Spectrum(Common),
    /// Intensity-noise spectrum.
    Rf(Common),
    /// Linewidth and its asymptotes over pump values.
    Linewidth(Common),
    /// Monte-Carlo spectra of the field combinations against the analytic ones.
    McValidate(Common),
    /// Runs a figure preset; writes one file per curve into --out (a directory).
    Figure {
        /// Figure id, e.g. fig2b; --preset is used when omitted.
        id: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config with a "physical" or "dimensionless" parameter block.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Figure preset supplying parameters and pumps.
    #[arg(long, value_name = "ID")]
    preset: Option<String>,
    /// Pump values: `2,4,8`, `START:STOP:COUNT` or `log:START:STOP:COUNT`.
    #[arg(long, value_name = "LIST|RANGE")]
    pump: Option<String>,
    /// Spectrum kinds, repeatable or comma separated.
    #[arg(long, value_name = "K", value_delimiter = ',')]
    kind: Vec<String>,
    /// `auto`, `auto:NLOG:NLIN`, `linear:MAX:POINTS` or `composite:MIN:JOIN:MAX:NLOG:NLIN`.
    #[arg(long, value_name = "SPEC")]
    grid: Option<String>,
    /// Add the spectrum without population fluctuations (steady: tabulate it instead).
    #[arg(long)]
    no_popfluct: bool,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "csv|json")]
    format: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(id) = &c.preset {
        let preset = presets::find(id)?;
        if cfg.physical.is_some() || cfg.dimensionless.is_some() {
            return Err(Error::Config(
                "--preset and a config parameter block are mutually exclusive".into(),
            ));
        }
        let pumps = preset.pumps.values();
        cfg.dimensionless = Some(preset.params_at(pumps[0]));
        cfg.pumps.get_or_insert(pumps);
    }
    if let Some(s) = &c.pump {
        cfg.pumps = Some(s.parse::<PumpSpec>()?.values());
    }
    if !c.kind.is_empty() {
        cfg.kinds = c.kind.iter().map(|k| k.parse()).collect::<Result<Vec<SpectrumKind>>>()?;
    }
    if let Some(g) = &c.grid {
        cfg.grid = Some(g.parse::<GridSpec>()?);
    }
    cfg.no_popfluct |= c.no_popfluct;
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if let Some(f) = &c.format {
        cfg.format = Some(f.parse()?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(docs: &[Document], out: Option<&PathBuf>, format: Format) -> Result<()> {
    match out {
        Some(path) => {
            for p in write_documents(docs, path, format)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for (i, doc) in docs.iter().enumerate() {
                if i > 0 {
                    writeln!(lock)?;
                }
                doc.write(&mut lock, format)?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    commands::configure_threads()?;
    if let Command::Figure { id, common } = &cli.command {
        let id = id
            .as_deref()
            .or(common.preset.as_deref())
            .ok_or_else(|| Error::Config(format!("figure needs an id; valid ids: {}", presets::ids().join(", "))))?;
        let preset = presets::find(id)?;
        let grid = match &common.grid {
            Some(g) => g.parse()?,
            None => GridSpec::default(),
        };
        let format = match &common.format {
            Some(f) => f.parse()?,
            None => Format::Csv,
        };
        let docs = commands::cmd_figure(preset, grid)?;
        let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
        for p in write_named(&docs, &dir, format)? {
            eprintln!("wrote {}", p.display());
        }
        return Ok(());
    }
    let common = match &cli.command {
        Command::Derive(c)
        | Command::Steady(c)
        | Command::Spectrum(c)
        | Command::Rf(c)
        | Command::Linewidth(c)
        | Command::McValidate(c) => c,
        Command::Figure { .. } => unreachable!(),
    };
    let cfg = build_config(common)?;
    let format = cfg.format.unwrap_or_default();
    let docs = match cli.command {
        Command::Derive(_) => vec![commands::cmd_derive(&cfg)?],
        Command::Steady(_) => vec![commands::cmd_steady(&cfg)?],
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg)?,
        Command::Rf(_) => commands::cmd_rf(&cfg)?,
        Command::Linewidth(_) => vec![commands::cmd_linewidth(&cfg)?],
        Command::McValidate(_) => {
            let cfg = RunConfig {
                seed: Some(cfg.seed.unwrap_or(DEFAULT_SEED)),
                ..cfg
            };
            commands::cmd_mc_validate(&cfg)?
        }
        Command::Figure { .. } => unreachable!(),
    };
    emit(&docs, common.out.as_ref(), format)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
