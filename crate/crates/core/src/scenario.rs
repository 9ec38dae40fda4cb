//! Declarative planning scenarios.
//!
//! A scenario file uses the config syntax. `map`, `start` and `goal` are required,
//! `config` names a base config file and `reps` a repetition count; every other key
//! overrides a config field. Paths are relative to the scenario file.
//!
//! ```text
//! map = maze.grid
//! config = default.cfg
//! start = 3, 5, 0, 0
//! goal = 26, 25, 0, 0
//! reps = 20
//! max_iterations = 2000
//! ```

use std::path::{Path, PathBuf};

use crate::error::ConfigError;
use crate::grid::OccupancyGrid;
use crate::optimizer::{key_value_lines, PlannerConfig, State};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// File stem of the scenario.
    pub name: String,
    pub map: PathBuf,
    pub start: State,
    pub goal: State,
    pub config: PlannerConfig,
    pub reps: usize,
}

/// Parses `"x,y,theta,v"`.
pub fn parse_state(text: &str) -> Result<State, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected `x,y,theta,v`, found `{text}`"));
    }
    let mut v = [0.0; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{part}` is not a finite number"))?;
    }
    Ok(State::new(v[0], v[1], v[2], v[3]))
}

fn io_error(path: &Path, source: std::io::Error) -> ConfigError {
    ConfigError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl ScenarioSpec {
    /// Parses scenario text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path, name: &str) -> Result<Self, ConfigError> {
        let mut config = PlannerConfig::default();
        let lines: Vec<(usize, &str, &str)> = key_value_lines(text).collect::<Result<_, _>>()?;
        if let Some((_, _, file)) = lines.iter().find(|(_, k, _)| *k == "config") {
            let path = base.join(file);
            if !path.is_file() {
                return Err(io_error(&path, std::io::ErrorKind::NotFound.into()));
            }
            config = PlannerConfig::load(&path)?;
        }
        let (mut map, mut start, mut goal, mut reps) = (None, None, None, 1);
        for &(line, key, value) in &lines {
            let bad = |message: String| ConfigError::Value {
                line,
                key: key.to_string(),
                message,
            };
            match key {
                "config" => {}
                "map" => map = Some(base.join(value)),
                "start" => start = Some(parse_state(value).map_err(bad)?),
                "goal" => goal = Some(parse_state(value).map_err(bad)?),
                "reps" => {
                    reps = value
                        .parse::<usize>()
                        .ok()
                        .filter(|r| *r > 0)
                        .ok_or_else(|| bad("expected a positive integer".into()))?;
                }
                _ => config.apply(line, key, value)?,
            }
        }
        config.validate()?;
        let map = map.ok_or(ConfigError::Missing("map"))?;
        if !map.is_file() {
            return Err(io_error(&map, std::io::ErrorKind::NotFound.into()));
        }
        Ok(Self {
            name: name.to_string(),
            map,
            start: start.ok_or(ConfigError::Missing("start"))?,
            goal: goal.ok_or(ConfigError::Missing("goal"))?,
            config,
            reps,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&text, base, &name)
    }

    pub fn load_map(&self) -> Result<OccupancyGrid, crate::error::GridError> {
        OccupancyGrid::load(&self.map)
    }
}
