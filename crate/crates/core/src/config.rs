//! Run configuration: the JSON config file, pump lists and the values the
//! command-line front end resolves before dispatching a command.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::mcsim::{Integrator, Window};
use crate::params::{normalize, LaserParams, PhysicalInputs};
use crate::spectrum::{GridSpec, SpectrumKind};

/// Pump values, either listed or generated.
#[derive(Debug, Clone, PartialEq)]
pub enum PumpSpec {
    List(Vec<f64>),
    /// `count` values from `start` to `stop` inclusive, evenly spaced.
    Linear { start: f64, stop: f64, count: usize },
    /// `count` values from `start` to `stop` inclusive, evenly spaced in log.
    Log { start: f64, stop: f64, count: usize },
}

impl PumpSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            PumpSpec::List(ref v) => v.clone(),
            PumpSpec::Linear { start, stop, count } => spaced(start, stop, count, |x| x, |x| x),
            PumpSpec::Log { start, stop, count } => spaced(start, stop, count, f64::ln, f64::exp),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::validation("pump", reason));
        match *self {
            PumpSpec::List(ref v) if v.is_empty() => bad("empty pump list".into()),
            PumpSpec::Linear { count, .. } | PumpSpec::Log { count, .. } if count == 0 => {
                bad("a pump range needs at least one point".into())
            }
            PumpSpec::Log { start, .. } if !(start > 0.0) => {
                bad(format!("log range must start above zero, got {start}"))
            }
            _ => {
                let v = self.values();
                match v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                    Some(x) => bad(format!("pump values must be non-negative and finite, got {x}")),
                    None => Ok(()),
                }
            }
        }
    }
}

fn spaced(start: f64, stop: f64, count: usize, to: fn(f64) -> f64, from: fn(f64) -> f64) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = (to(start), to(stop));
    (0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                from(a + (b - a) * i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

impl FromStr for PumpSpec {
    type Err = Error;

    /// `2,4,8`, `START:STOP:COUNT` or `log:START:STOP:COUNT`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid pump spec `{s}`"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let int = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            [list] => PumpSpec::List(list.split(',').map(num).collect::<Result<_>>()?),
            [a, b, n] => PumpSpec::Linear {
                start: num(a)?,
                stop: num(b)?,
                count: int(n)?,
            },
            ["log", a, b, n] => PumpSpec::Log {
                start: num(a)?,
                stop: num(b)?,
                count: int(n)?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for PumpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PumpSpec::List(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&s.join(","))
            }
            PumpSpec::Linear { start, stop, count } => write!(f, "{start}:{stop}:{count}"),
            PumpSpec::Log { start, stop, count } => write!(f, "log:{start}:{stop}:{count}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

/// Overrides of the automatic Monte-Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<Integrator>,
}

/// Contents of a config file. Every field is optional; exactly one
/// parameter block is required once command-line flags are merged in.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<LaserParams>,
    #[serde(
        default,
        deserialize_with = "pumps_de",
        skip_serializing_if = "Option::is_none"
    )]
    pub pumps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kinds: Vec<SpectrumKind>,
    #[serde(
        default,
        deserialize_with = "grid_de",
        skip_serializing_if = "Option::is_none"
    )]
    pub grid: Option<GridSpec>,
    /// Fixes the inversion instead of solving for it (spectrum commands).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<f64>,
    #[serde(default)]
    pub no_popfluct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PumpField {
    List(Vec<f64>),
    Spec(String),
}

fn pumps_de<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    let spec = match PumpField::deserialize(de)? {
        PumpField::List(v) => PumpSpec::List(v),
        PumpField::Spec(s) => s.parse().map_err(serde::de::Error::custom)?,
    };
    spec.validate().map_err(serde::de::Error::custom)?;
    Ok(Some(spec.values()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridField {
    Spec(String),
    Full(GridSpec),
}

fn grid_de<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Option<GridSpec>, D::Error> {
    match GridField::deserialize(de)? {
        GridField::Spec(s) => s.parse().map(Some).map_err(serde::de::Error::custom),
        GridField::Full(g) => Ok(Some(g)),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Working-unit parameters from whichever block is present.
    pub fn params(&self) -> Result<LaserParams> {
        match (&self.physical, &self.dimensionless) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either a \"physical\" or a \"dimensionless\" block, not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "no parameters: use --preset or a config with a \"physical\" or \"dimensionless\" block"
                    .into(),
            )),
            (Some(phys), None) => normalize(phys),
            (None, Some(p)) => {
                p.validate()?;
                Ok(*p)
            }
        }
    }

    /// Pump values to run: the configured list, else the parameter block's pump.
    pub fn pump_values(&self) -> Result<Vec<f64>> {
        match &self.pumps {
            Some(v) => {
                PumpSpec::List(v.clone()).validate()?;
                Ok(v.clone())
            }
            None => Ok(vec![self.params()?.pump]),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.pump_values()?;
        if let Some(g) = self.grid {
            let p = self.params()?;
            g.build(&p, 0.0)?;
        }
        Ok(())
    }

    /// The same run with the parameter block replaced by its working-unit form,
    /// suitable for echoing into output headers.
    pub fn resolved(&self) -> Result<Self> {
        let pumps = self.pump_values()?;
        let mut params = self.params()?;
        if let [pump] = pumps[..] {
            params.pump = pump;
        }
        Ok(Self {
            physical: None,
            dimensionless: Some(params),
            pumps: Some(pumps),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: &str = r#""dimensionless": {"kappa": 50, "gamma_perp": 50, "omega_rabi": 34, "f": 0.5, "n0": 100, "pump": 4}"#;

    fn with(extra: &str) -> String {
        format!("{{{PARAMS}{extra}}}")
    }

    #[test]
    fn pump_spec_forms() {
        assert_eq!("2,4,8".parse::<PumpSpec>().unwrap().values(), vec![2.0, 4.0, 8.0]);
        assert_eq!(
            "0:1:5".parse::<PumpSpec>().unwrap().values(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        let log = "log:0.01:100:5".parse::<PumpSpec>().unwrap().values();
        assert!((log[2] - 1.0).abs() < 1e-12 && log[4] == 100.0);
        assert!("-1,2".parse::<PumpSpec>().is_err());
        assert!("log:0:1:3".parse::<PumpSpec>().is_err());
        assert!("a:b".parse::<PumpSpec>().is_err());
    }

    #[test]
    fn pump_spec_display_round_trips() {
        for s in ["2,4.5,8", "0:40:81", "log:0.01:100:41"] {
            let spec: PumpSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<PumpSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn dimensionless_block() {
        let cfg = RunConfig::from_json(&with("")).unwrap();
        assert_eq!(cfg.params().unwrap().gamma_perp, 50.0);
        assert_eq!(cfg.pump_values().unwrap(), vec![4.0]);
    }

    #[test]
    fn unknown_key_names_the_key() {
        let text = with("").replace("\"pump\": 4", "\"pump\": 4, \"kapa\": 1");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("kapa"), "{err}");
        let err = RunConfig::from_json(r#"{"colour": 1}"#).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn parameter_block_must_be_unique() {
        assert!(RunConfig::default().params().is_err());
        let phys = r#""physical": {"lambda0": 1.55e-6, "n_r": 3.4, "mode_volume": {"wavelength_cubed": 1.0},
            "dipole": 1e-28, "q_factor": 1000, "gamma_par": 1e9, "gamma_perp": 5e10,
            "n0": 100, "f": 0.5, "pump": 1}"#;
        let cfg = RunConfig::from_json(&with(&format!(", {phys}"))).unwrap();
        assert!(matches!(cfg.params(), Err(Error::Config(_))));
        let only = RunConfig::from_json(&format!("{{{phys}}}")).unwrap();
        assert!((only.params().unwrap().gamma_perp - 50.0).abs() < 1e-9);
    }

    #[test]
    fn pumps_and_grid_accept_strings() {
        let cfg = RunConfig::from_json(&with(r#", "pumps": "1:3:3", "grid": "linear:100:11""#)).unwrap();
        assert_eq!(cfg.pumps, Some(vec![1.0, 2.0, 3.0]));
        assert_eq!(cfg.grid, Some(GridSpec::Linear { max: 100.0, points: 11 }));
    }

    #[test]
    fn resolved_config_round_trips() {
        let text = with(
            r#", "pumps": [1, 2], "kinds": ["full", "A"], "grid": {"type": "auto", "n_log": 10, "n_lin": 20},
            "seed": 7, "mc": {"chains": 4, "window": "rect"}"#,
        );
        let cfg = RunConfig::from_json(&text).unwrap().resolved().unwrap();
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn negative_pump_in_list_rejected() {
        assert!(RunConfig::from_json(&with(r#", "pumps": [1, -2]"#)).is_err());
    }
}
