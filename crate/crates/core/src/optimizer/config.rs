use std::path::Path;

use crate::corridor::CorridorParams;
use crate::error::ConfigError;
use crate::lbfgsb::MinimizeOptions;
use crate::search::SearchParams;

/// Limits, geometry, weights and solver settings for one planning query.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub kappa_max: f64,
    /// Disc radius, also the obstacle inflation radius (m).
    pub radius: f64,
    /// Front disc offset along the heading (m).
    pub disc_offset: f64,
    pub lambda_o: f64,
    pub lambda_eq: f64,
    pub lambda_ie: f64,
    pub delta_t: f64,
    pub delta_kappa: f64,
    pub delta_s: f64,
    pub delta_v: f64,
    /// Knee between the cubic and quadratic pieces of the penalty.
    pub x_j: f64,
    pub t_min: f64,
    pub t_max: f64,

    pub max_iterations: usize,
    pub history: usize,
    pub gtol: f64,
    /// Relative objective-change floor of the solver, averaged over `ftol_window` iterations.
    pub ftol_rel: f64,
    pub ftol_window: usize,
    /// Penalty multiplier applied between continuation rounds.
    pub penalty_growth: f64,
    pub max_penalty_rounds: usize,
    /// Continuation stops once residuals are below these targets.
    pub eq_target: f64,
    pub safety_target: f64,
    pub curvature_target: f64,
    pub gear_target: f64,

    /// State spacing along the coarse path (m).
    pub spacing: f64,
    /// Dense output sample period (s).
    pub sample_dt: f64,
    pub corridor_max_side: f64,

    pub heading_bins: usize,
    pub step_factor: f64,
    pub reverse_cost: f64,
    pub switch_penalty: f64,
    pub goal_position_tolerance: f64,
    /// Degrees.
    pub goal_heading_tolerance: f64,
    pub max_expansions: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            v_min: -2.0,
            v_max: 3.0,
            a_min: -2.0,
            a_max: 2.0,
            kappa_max: 0.4,
            radius: 0.6,
            disc_offset: 1.2,
            lambda_o: 1.0,
            lambda_eq: 1e3,
            lambda_ie: 1e5,
            delta_t: 1.0,
            delta_kappa: 1.0,
            delta_s: 1.0,
            delta_v: 1.0,
            x_j: 1e-2,
            t_min: 1e-2,
            t_max: 5.0,
            max_iterations: 3000,
            history: 8,
            gtol: 1e-5,
            ftol_rel: 1e-6,
            ftol_window: 5,
            penalty_growth: 10.0,
            max_penalty_rounds: 6,
            eq_target: 5e-4,
            safety_target: 5e-4,
            curvature_target: 5e-4,
            gear_target: 5e-5,
            spacing: 1.0,
            sample_dt: 0.05,
            corridor_max_side: 10.0,
            heading_bins: 72,
            step_factor: 1.5,
            reverse_cost: 2.0,
            switch_penalty: 2.0,
            goal_position_tolerance: 0.3,
            goal_heading_tolerance: 10.0,
            max_expansions: 2_000_000,
        }
    }
}

macro_rules! config_keys {
    ($($name:ident: $kind:ident),* $(,)?) => {
        /// Every key accepted in a config file.
        pub const CONFIG_KEYS: &[&str] = &[$(stringify!($name)),*];

        impl PlannerConfig {
            /// Sets one field from its textual value.
            pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
                match key {
                    $(stringify!($name) => {
                        self.$name = config_keys!(@parse $kind, value)?;
                        Ok(())
                    })*
                    _ => Err(format!("unknown key `{key}`")),
                }
            }

            /// Renders every field as `key = value` lines that [`PlannerConfig::parse`] reads back.
            pub fn to_text(&self) -> String {
                let mut out = String::new();
                $(out.push_str(&format!("{} = {}\n", stringify!($name), self.$name));)*
                out
            }
        }
    };
    (@parse float, $v:expr) => {
        $v.parse::<f64>().map_err(|e| e.to_string()).and_then(|x| {
            if x.is_finite() { Ok(x) } else { Err("value must be finite".to_string()) }
        })
    };
    (@parse count, $v:expr) => {
        $v.parse::<usize>().map_err(|e| e.to_string())
    };
}

config_keys! {
    v_min: float, v_max: float, a_min: float, a_max: float, kappa_max: float,
    radius: float, disc_offset: float,
    lambda_o: float, lambda_eq: float, lambda_ie: float,
    delta_t: float, delta_kappa: float, delta_s: float, delta_v: float, x_j: float,
    t_min: float, t_max: float,
    max_iterations: count, history: count, gtol: float, ftol_rel: float, ftol_window: count,
    penalty_growth: float, max_penalty_rounds: count,
    eq_target: float, safety_target: float, curvature_target: float, gear_target: float,
    spacing: float, sample_dt: float, corridor_max_side: float,
    heading_bins: count, step_factor: float, reverse_cost: float, switch_penalty: float,
    goal_position_tolerance: float, goal_heading_tolerance: float, max_expansions: count,
}

/// Splits `key = value` lines, skipping blanks and `#` comments. Yields `(line, key, value)`.
pub fn key_value_lines(
    text: &str,
) -> impl Iterator<Item = Result<(usize, &str, &str), ConfigError>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(match trimmed.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((line, k.trim(), v.trim())),
            _ => Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, found `{trimmed}`"),
            }),
        })
    })
}

impl PlannerConfig {
    /// Parses a config file; keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for item in key_value_lines(text) {
            let (line, key, value) = item?;
            cfg.apply(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// [`PlannerConfig::set`] with line-numbered errors.
    pub fn apply(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        if !CONFIG_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        self.set(key, value).map_err(|message| ConfigError::Value {
            line,
            key: key.to_string(),
            message,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.v_min < 0.0 && 0.0 < self.v_max) {
            return fail("need v_min < 0 < v_max");
        }
        if !(self.a_min < 0.0 && 0.0 < self.a_max) {
            return fail("need a_min < 0 < a_max");
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max) {
            return fail("need 0 < t_min < t_max");
        }
        let positive = [
            ("kappa_max", self.kappa_max),
            ("x_j", self.x_j),
            ("lambda_o", self.lambda_o),
            ("lambda_eq", self.lambda_eq),
            ("lambda_ie", self.lambda_ie),
            ("delta_t", self.delta_t),
            ("delta_kappa", self.delta_kappa),
            ("delta_s", self.delta_s),
            ("delta_v", self.delta_v),
            ("spacing", self.spacing),
            ("sample_dt", self.sample_dt),
            ("corridor_max_side", self.corridor_max_side),
            ("step_factor", self.step_factor),
            ("gtol", self.gtol),
            ("eq_target", self.eq_target),
            ("safety_target", self.safety_target),
            ("curvature_target", self.curvature_target),
            ("gear_target", self.gear_target),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(ConfigError::Invalid(format!("{name} must be positive")));
        }
        if self.radius < 0.0 || self.disc_offset < 0.0 {
            return fail("radius and disc_offset must be non-negative");
        }
        if self.penalty_growth < 1.0 {
            return fail("penalty_growth must be at least 1");
        }
        if self.reverse_cost < 1.0 || self.switch_penalty < 0.0 {
            return fail("need reverse_cost >= 1 and switch_penalty >= 0");
        }
        if self.history == 0 || self.heading_bins < 4 || self.max_iterations == 0 || self.ftol_window == 0 {
            return fail("history, heading_bins, max_iterations and ftol_window must be positive");
        }
        Ok(())
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            kappa_max: self.kappa_max,
            disc_offset: self.disc_offset,
            heading_bins: self.heading_bins,
            step_factor: self.step_factor,
            reverse_cost: self.reverse_cost,
            switch_penalty: self.switch_penalty,
            goal_position_tolerance: self.goal_position_tolerance,
            goal_heading_tolerance: self.goal_heading_tolerance.to_radians(),
            max_expansions: self.max_expansions,
        }
    }

    pub fn corridor_params(&self) -> CorridorParams {
        CorridorParams {
            max_side: self.corridor_max_side,
            disc_offset: self.disc_offset,
        }
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            history: self.history,
            gtol: self.gtol,
            ftol_rel: self.ftol_rel,
            ftol_window: self.ftol_window,
            max_iterations: self.max_iterations,
            ..MinimizeOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = PlannerConfig::default();
        cfg.v_max = 2.5;
        cfg.history = 5;
        let back = PlannerConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.to_text().lines().count(), CONFIG_KEYS.len());
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = PlannerConfig::parse("# limits\nv_max = 2\nspeed = 4\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 3, ref key } if key == "speed"));
    }

    #[test]
    fn bad_values_and_syntax() {
        assert!(matches!(
            PlannerConfig::parse("v_max = fast").unwrap_err(),
            ConfigError::Value { line: 1, .. }
        ));
        assert!(matches!(
            PlannerConfig::parse("\nv_max 3").unwrap_err(),
            ConfigError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            PlannerConfig::parse("v_min = 1").unwrap_err(),
            ConfigError::Invalid(_)
        ));
        assert!(matches!(
            PlannerConfig::parse("history = -1").unwrap_err(),
            ConfigError::Value { .. }
        ));
    }

    #[test]
    fn defaults_are_valid() {
        PlannerConfig::default().validate().unwrap();
        let p = PlannerConfig::default().search_params();
        assert!((p.goal_heading_tolerance - 10f64.to_radians()).abs() < 1e-15);
    }
}
