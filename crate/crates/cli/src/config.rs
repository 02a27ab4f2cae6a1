//! Run configuration: built-in defaults, JSON configuration files and
//! command-line overrides, merged in that order of increasing precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use secbound_core::model::OperatorConvention;
use secbound_core::{ChainParams, PairFamily, PathChoice, TimeGrid};

/// Fraction of the chain length used as the default window of the
/// Markovian-point scenario.
pub const MARKOVIAN_WINDOW_PER_SPIN: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_STEPS: usize = 2000;
pub const BOUND_CHECK_MODELS: usize = 50;
pub const BOUND_CHECK_T_MAX: f64 = 5.0;
pub const BOUND_CHECK_TIMES: usize = 20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{location}: malformed configuration: {message}")]
    Parse { location: String, message: String },
    #[error("{location}: unknown key `{key}`")]
    UnknownKey { key: String, location: String },
    #[error("{location}: invalid value for `{key}`: {message}")]
    InvalidValue {
        key: String,
        location: String,
        message: String,
    },
    #[error("scenario `{scenario}` requires `{key}`")]
    MissingKey { key: String, scenario: String },
    #[error("model file: {0}")]
    Model(#[from] secbound_core::model::ModelError),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    BoundCheck,
    Measure,
    Sweep,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Fig1a,
        Scenario::Fig1b,
        Scenario::Fig2a,
        Scenario::Fig2b,
        Scenario::BoundCheck,
        Scenario::Measure,
        Scenario::Sweep,
        Scenario::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Fig1a => "fig1a",
            Scenario::Fig1b => "fig1b",
            Scenario::Fig2a => "fig2a",
            Scenario::Fig2b => "fig2b",
            Scenario::BoundCheck => "bound-check",
            Scenario::Measure => "measure",
            Scenario::Sweep => "sweep",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|sc| sc.as_str()).collect();
                format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Input pairs to optimize over, as written on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSpec {
    Paper,
    Equatorial(usize),
    Random(usize),
}

impl PairSpec {
    pub fn family(self, seed: u64) -> PairFamily {
        match self {
            PairSpec::Paper => PairFamily::Paper,
            PairSpec::Equatorial(k) => PairFamily::Equatorial(k),
            PairSpec::Random(count) => PairFamily::Random { count, seed },
        }
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSpec::Paper => write!(f, "paper"),
            PairSpec::Equatorial(k) => write!(f, "equatorial:{k}"),
            PairSpec::Random(n) => write!(f, "random:{n}"),
        }
    }
}

impl FromStr for PairSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let count = |text: &str| -> std::result::Result<usize, String> {
            match text.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(format!("`{text}` is not a positive count")),
            }
        };
        match s.split_once(':') {
            None if s == "paper" => Ok(PairSpec::Paper),
            Some(("equatorial", k)) => Ok(PairSpec::Equatorial(count(k)?)),
            Some(("random", n)) => Ok(PairSpec::Random(count(n)?)),
            _ => Err(format!("unknown pair family `{s}` (expected paper, equatorial:K or random:N)")),
        }
    }
}

pub fn parse_path_choice(s: &str) -> std::result::Result<PathChoice, String> {
    match s {
        "dense" => Ok(PathChoice::Dense),
        "subspace" => Ok(PathChoice::Subspace),
        "auto" => Ok(PathChoice::Auto),
        _ => Err(format!("unknown path `{s}` (expected dense, subspace or auto)")),
    }
}

pub fn path_choice_str(p: PathChoice) -> &'static str {
    match p {
        PathChoice::Dense => "dense",
        PathChoice::Subspace => "subspace",
        PathChoice::Auto => "auto",
    }
}

pub fn parse_convention(s: &str) -> std::result::Result<OperatorConvention, String> {
    match s {
        "spin" => Ok(OperatorConvention::Spin),
        "pauli" => Ok(OperatorConvention::Pauli),
        _ => Err(format!("unknown operator convention `{s}` (expected spin or pauli)")),
    }
}

/// Evenly spaced sweep coordinate; a single point sits at `min`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn single(value: f64) -> Self {
        GridAxis {
            min: value,
            max: value,
            count: 1,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.count == 0 {
            return Err("count must be at least 1".into());
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err("range must be finite".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.max } else { self.min + step * k as f64 })
            .collect()
    }
}

impl FromStr for GridAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("`{s}` is not of the form min:max:count"));
        };
        let axis = GridAxis {
            min: min.parse().map_err(|_| format!("`{min}` is not a number"))?,
            max: max.parse().map_err(|_| format!("`{max}` is not a number"))?,
            count: count.parse().map_err(|_| format!("`{count}` is not a count"))?,
        };
        axis.validate()?;
        Ok(axis)
    }
}

/// Partial settings from one source. `None` leaves a lower-precedence value
/// in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub n_spins: Option<usize>,
    pub j: Option<f64>,
    pub j0: Option<f64>,
    pub b_field: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub pair: Option<PairSpec>,
    pub path: Option<PathChoice>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub field_on_system: Option<bool>,
    pub convention: Option<OperatorConvention>,
    pub model: Option<PathBuf>,
    pub models: Option<usize>,
    pub j0_grid: Option<GridAxis>,
    pub b_grid: Option<GridAxis>,
}

macro_rules! take_later {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Overrides {
    /// Fields set in `top` replace those in `self`.
    pub fn merged_with(mut self, top: &Overrides) -> Overrides {
        take_later!(
            self, top, scenario, n_spins, j, j0, b_field, t_max, steps, pair, path, seed, out, summary,
            field_on_system, convention, model, models, j0_grid, b_grid
        );
        self
    }
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.find(&needle).map(|pos| text[..pos].matches('\n').count() + 1)
}

fn key_location(source: &str, text: &str, key: &str) -> String {
    match line_of_key(text, key) {
        Some(line) => format!("{source}:{line}"),
        None => source.to_string(),
    }
}

/// Parses a JSON configuration document. `source` names it in messages.
pub fn parse_config_text(text: &str, source: &str) -> Result<Overrides> {
    let map: Map<String, Value> = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        location: format!("{source}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut out = Overrides::default();
    for (key, value) in map {
        let location = key_location(source, text, &key);
        let invalid = |message: String| ConfigError::InvalidValue {
            key: key.clone(),
            location: location.clone(),
            message,
        };
        fn typed<T: DeserializeOwned>(value: Value) -> std::result::Result<T, String> {
            serde_json::from_value(value).map_err(|e| e.to_string())
        }
        fn text_value<T>(value: Value, parse: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<T, String> {
            let s: String = typed(value)?;
            parse(&s)
        }
        match key.as_str() {
            "scenario" => out.scenario = Some(text_value(value, str::parse).map_err(invalid)?),
            "n_spins" => out.n_spins = Some(typed(value).map_err(invalid)?),
            "j" => out.j = Some(typed(value).map_err(invalid)?),
            "j0" => out.j0 = Some(typed(value).map_err(invalid)?),
            "b_field" => out.b_field = Some(typed(value).map_err(invalid)?),
            "t_max" => out.t_max = Some(typed(value).map_err(invalid)?),
            "steps" => out.steps = Some(typed(value).map_err(invalid)?),
            "pair" => out.pair = Some(text_value(value, str::parse).map_err(invalid)?),
            "path" => out.path = Some(text_value(value, parse_path_choice).map_err(invalid)?),
            "seed" => out.seed = Some(typed(value).map_err(invalid)?),
            "out" => out.out = Some(typed(value).map_err(invalid)?),
            "summary" => out.summary = Some(typed(value).map_err(invalid)?),
            "field_on_system" => out.field_on_system = Some(typed(value).map_err(invalid)?),
            "convention" => out.convention = Some(text_value(value, parse_convention).map_err(invalid)?),
            "model" => out.model = Some(typed(value).map_err(invalid)?),
            "models" => out.models = Some(typed(value).map_err(invalid)?),
            "j0_grid" | "b_grid" => {
                let axis: GridAxis = typed(value).map_err(&invalid)?;
                axis.validate().map_err(&invalid)?;
                if key == "j0_grid" {
                    out.j0_grid = Some(axis);
                } else {
                    out.b_grid = Some(axis);
                }
            }
            _ => return Err(ConfigError::UnknownKey { key, location }),
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_text(&text, &path.display().to_string())
}

/// A fully resolved, validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub chain: ChainParams,
    pub t_max: f64,
    pub n_steps: usize,
    pub pair: PairSpec,
    pub path: PathChoice,
    pub seed: u64,
    pub out: PathBuf,
    pub summary: PathBuf,
    pub model: Option<PathBuf>,
    pub models: usize,
    pub j0_grid: GridAxis,
    pub b_grid: GridAxis,
}

impl RunConfig {
    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.t_max, self.n_steps).expect("validated on resolve")
    }

    pub fn parameters_json(&self) -> Value {
        serde_json::json!({
            "scenario": self.scenario.as_str(),
            "n_total": self.chain.n_total,
            "j": self.chain.j_env,
            "j0": self.chain.j_sys,
            "b_field": self.chain.b_field,
            "field_on_system": self.chain.field_on_system,
            "convention": self.chain.convention.as_str(),
            "t_max": self.t_max,
            "steps": self.n_steps,
            "pair": self.pair.to_string(),
            "path": path_choice_str(self.path),
            "seed": self.seed,
            "model": self.model.as_ref().map(|p| p.display().to_string()),
        })
    }
}

/// Applies defaults, then the scenario's own defaults, then `given`, and
/// validates the result.
pub fn resolve(given: &Overrides) -> Result<RunConfig> {
    let scenario = given.scenario.ok_or_else(|| ConfigError::MissingKey {
        key: "scenario".into(),
        scenario: "run".into(),
    })?;
    let base = ChainParams::default();
    let n_total = given.n_spins.unwrap_or(base.n_total);
    let chain = ChainParams {
        n_total,
        j_env: given.j.unwrap_or(base.j_env),
        j_sys: given.j0.unwrap_or(base.j_sys),
        b_field: given
            .b_field
            .unwrap_or(if scenario == Scenario::Fig2b { 0.5 } else { base.b_field }),
        field_on_system: given.field_on_system.unwrap_or(base.field_on_system),
        convention: given.convention.unwrap_or(base.convention),
    };
    let invalid = |key: &str, message: String| ConfigError::InvalidValue {
        key: key.into(),
        location: "configuration".into(),
        message,
    };
    chain.validate().map_err(|e| invalid("chain", e.to_string()))?;

    let (default_t, default_steps) = match scenario {
        Scenario::Fig2b => (MARKOVIAN_WINDOW_PER_SPIN * n_total as f64, DEFAULT_STEPS),
        Scenario::BoundCheck => (BOUND_CHECK_T_MAX, BOUND_CHECK_TIMES - 1),
        _ => ((n_total - 1) as f64, DEFAULT_STEPS),
    };
    let t_max = given.t_max.unwrap_or(default_t);
    let n_steps = given.steps.unwrap_or(default_steps);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", format!("must be positive and finite, got {t_max}")));
    }
    if n_steps < 2 {
        return Err(invalid("steps", format!("need at least 2 steps, got {n_steps}")));
    }

    let models = given.models.unwrap_or(BOUND_CHECK_MODELS);
    if models == 0 {
        return Err(invalid("models", "must be at least 1".into()));
    }
    if scenario == Scenario::Custom && given.model.is_none() {
        return Err(ConfigError::MissingKey {
            key: "model".into(),
            scenario: scenario.to_string(),
        });
    }
    let j0_grid = given.j0_grid.unwrap_or(GridAxis::single(chain.j_sys));
    let b_grid = given.b_grid.unwrap_or(GridAxis::single(chain.b_field));
    j0_grid.validate().map_err(|m| invalid("j0_grid", m))?;
    b_grid.validate().map_err(|m| invalid("b_grid", m))?;

    Ok(RunConfig {
        scenario,
        chain,
        t_max,
        n_steps,
        pair: given.pair.unwrap_or(PairSpec::Paper),
        path: given.path.unwrap_or(PathChoice::Auto),
        seed: given.seed.unwrap_or(DEFAULT_SEED),
        out: given
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{scenario}.csv"))),
        summary: given
            .summary
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{scenario}.json"))),
        model: given.model.clone(),
        models,
        j0_grid,
        b_grid,
    })
}

/// Reads the optional configuration file and lays `flags` over it.
pub fn parse_config(config_file: Option<&Path>, flags: &Overrides) -> Result<RunConfig> {
    let file = match config_file {
        Some(path) => read_config_file(path)?,
        None => Overrides::default(),
    };
    resolve(&file.merged_with(flags))
}
