//! Run configuration: scenario, grid, output and named tolerances, assembled
//! from defaults, an optional `key=value` file and command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::fields::ScenarioParams;
use crate::series::Format;

/// Named tolerances of the validation battery and their defaults.
/// `rk_order` is a lower bound on the error ratio when the step is halved;
/// `co_movement` bounds a count of sign mismatches.
pub const DEFAULT_TOLERANCES: [(&str, f64); 19] = [
    ("route_agreement", 1e-9),
    ("expectation_agreement", 1e-5),
    ("generic_route_agreement", 1e-5),
    ("schrodinger_fidelity", 1e-6),
    ("transport_phase", 1e-6),
    ("bloch_error", 1e-6),
    ("schrodinger_bloch", 1e-6),
    ("rk_order", 14.0),
    ("speed_efficiency", 1e-12),
    ("speed_from_state", 1e-6),
    ("orthogonality", 1e-9),
    ("periodicity", 1e-10),
    ("extrema_value", 1e-6),
    ("extrema_time", 1e-4),
    ("extrema_consistency", 1e-9),
    ("co_movement", 0.0),
    ("geodesic_efficiency", 1e-6),
    ("arc_length", 1e-6),
    ("norm_drift", 1e-9),
];

pub const DEFAULT_T_MAX: f64 = std::f64::consts::TAU;
pub const DEFAULT_STEPS: usize = 6283;

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    /// Tolerance by name; panics on names outside [`DEFAULT_TOLERANCES`].
    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or_else(|| panic!("unknown tolerance `{name}`"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance `{name}` must be finite and >= 0, got {value}"
            )));
        }
        match self.0.get_mut(name) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::InvalidArgument(format!(
                "unknown tolerance `{name}` (known: {})",
                self.0.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Parses `name=value`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("expected <name>=<value>, got `{s}`")))?;
    Ok((name.trim().to_string(), parse_number(value)?))
}

fn parse_number<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse `{}` as a number", s.trim())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ScenarioParams,
    pub grid: TimeGrid,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ScenarioParams::default(),
            grid: TimeGrid::new(0.0, DEFAULT_T_MAX, DEFAULT_STEPS).expect("valid default grid"),
            output: None,
            format: Format::Csv,
            tolerances: Tolerances::default(),
        }
    }
}

/// Partial configuration from one source. Later sources win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub omega0: Option<f64>,
    pub nu0: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tolerances: Vec<(String, f64)>,
}

impl ConfigOverrides {
    /// Parses `key=value` lines. Blank lines and `#` comments are skipped;
    /// keys mirror the command-line flags (`t_max` and `t-max` both work).
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            let value = value.trim();
            let context = |e: Error| Error::InvalidArgument(format!("config line {}: {e}", lineno + 1));
            match key.trim().replace('-', "_").as_str() {
                "omega0" => out.omega0 = Some(parse_number(value).map_err(context)?),
                "nu0" => out.nu0 = Some(parse_number(value).map_err(context)?),
                "t_max" => out.t_max = Some(parse_number(value).map_err(context)?),
                "steps" => out.steps = Some(parse_number(value).map_err(context)?),
                "out" => out.output = Some(PathBuf::from(value)),
                "format" => out.format = Some(value.parse().map_err(context)?),
                "tol" => out.tolerances.push(parse_tolerance(value).map_err(context)?),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "config line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `self` overridden by `later`.
    pub fn merged_with(self, later: ConfigOverrides) -> Self {
        let mut tolerances = self.tolerances;
        tolerances.extend(later.tolerances);
        ConfigOverrides {
            omega0: later.omega0.or(self.omega0),
            nu0: later.nu0.or(self.nu0),
            t_max: later.t_max.or(self.t_max),
            steps: later.steps.or(self.steps),
            output: later.output.or(self.output),
            format: later.format.or(self.format),
            tolerances,
        }
    }

    /// Fills the gaps with defaults and validates.
    pub fn build(self) -> Result<RunConfig> {
        let defaults = RunConfig::default();
        let params = ScenarioParams::new(
            self.omega0.unwrap_or(defaults.params.omega0()),
            self.nu0.unwrap_or(defaults.params.nu0()),
        )?;
        let grid = TimeGrid::new(
            0.0,
            self.t_max.unwrap_or(DEFAULT_T_MAX),
            self.steps.unwrap_or(DEFAULT_STEPS),
        )?;
        let mut tolerances = defaults.tolerances;
        for (name, value) in &self.tolerances {
            tolerances.set(name, *value)?;
        }
        Ok(RunConfig {
            params,
            grid,
            output: self.output,
            format: self.format.unwrap_or_default(),
            tolerances,
        })
    }
}
