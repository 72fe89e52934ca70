//! Run configuration: a flat `key = value` file overridden by flags.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value? ws* ('#' any*)?
//! ```
//!
//! Keys are the names in [`KEYS`]; an unknown or repeated key is an
//! error. An empty value resets the key to its default. Relative paths are
//! resolved against the directory of the file that names them.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use panelcausal::pcmci::Weighting;
use panelcausal::PanelLayout;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "input",
    "layout",
    "groups",
    "group_column",
    "variables",
    "max_missing",
    "adf_alpha",
    "auto_preprocess",
    "p",
    "p_max",
    "tau_max",
    "alpha",
    "alpha_pc",
    "horizon",
    "bootstrap_reps",
    "permutation_reps",
    "mc_reps",
    "mc_entities",
    "mc_years",
    "mc_variables",
    "ordering",
    "seed",
    "output",
    "split_year",
    "tracked",
    "tau_sweep",
    "lag_sweep",
    "granger_graph",
    "pcmci_graph",
    "min_group_entities",
    "weighting",
];

const PATH_KEYS: &[&str] = &["input", "groups", "output", "granger_graph", "pcmci_graph"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagChoice {
    Fixed(usize),
    /// AIC minimiser over `1..=p_max`.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub layout: PanelLayout,
    pub groups: Option<PathBuf>,
    pub group_column: Option<String>,
    pub variables: Vec<String>,
    pub max_missing: f64,
    pub adf_alpha: f64,
    /// Treat `input` as a raw level panel and difference it first.
    pub auto_preprocess: bool,
    pub p: LagChoice,
    pub p_max: usize,
    pub tau_max: usize,
    pub alpha: f64,
    pub alpha_pc: Option<f64>,
    pub horizon: usize,
    /// 0 disables IRF bands.
    pub bootstrap_reps: usize,
    /// 0 skips the permutation test.
    pub permutation_reps: usize,
    /// 0 skips the Monte Carlo study.
    pub mc_reps: usize,
    pub mc_entities: usize,
    pub mc_years: usize,
    pub mc_variables: usize,
    pub ordering: Vec<String>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub split_year: i32,
    pub tracked: Vec<(String, String)>,
    pub tau_sweep: Vec<usize>,
    pub lag_sweep: Vec<usize>,
    pub granger_graph: Option<PathBuf>,
    pub pcmci_graph: Option<PathBuf>,
    pub min_group_entities: usize,
    pub weighting: Weighting,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            layout: PanelLayout::Long,
            groups: None,
            group_column: None,
            variables: Vec::new(),
            max_missing: 0.4,
            adf_alpha: 0.05,
            auto_preprocess: false,
            p: LagChoice::Fixed(2),
            p_max: 4,
            tau_max: 3,
            alpha: 0.05,
            alpha_pc: None,
            horizon: 10,
            bootstrap_reps: 200,
            permutation_reps: 100,
            mc_reps: 100,
            mc_entities: 168,
            mc_years: 25,
            mc_variables: 8,
            ordering: Vec::new(),
            seed: 0,
            output: None,
            split_year: 2015,
            tracked: Vec::new(),
            tau_sweep: vec![2, 3, 4],
            lag_sweep: vec![1, 2, 3],
            granger_graph: None,
            pcmci_graph: None,
            min_group_entities: 5,
            weighting: Weighting::None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("config key `{key}`: cannot parse `{value}`")))
}

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(key: &str, v: T, lo: T, hi: T) -> CliResult<T> {
    if v < lo || v > hi {
        return Err(CliError::usage(format!("config key `{key}`: {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

fn probability(key: &str, value: &str, closed_top: bool) -> CliResult<f64> {
    let v: f64 = parse(key, value)?;
    if !(v > 0.0 && (v < 1.0 || closed_top && v == 1.0)) {
        let top = if closed_top { "]" } else { ")" };
        return Err(CliError::usage(format!("config key `{key}`: {v} outside (0, 1{top}")));
    }
    Ok(v)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn usize_list(key: &str, value: &str, lo: usize, hi: usize) -> CliResult<Vec<usize>> {
    let out = list(value)
        .iter()
        .map(|s| parse::<usize>(key, s).and_then(|v| in_range(key, v, lo, hi)))
        .collect::<CliResult<Vec<_>>>()?;
    if out.is_empty() {
        return Err(CliError::usage(format!("config key `{key}` needs at least one value")));
    }
    Ok(out)
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::usage(format!("config key `{key}`: expected true or false, got `{value}`"))),
    }
}

fn parse_tracked(value: &str) -> CliResult<Vec<(String, String)>> {
    list(value)
        .iter()
        .map(|pair| match pair.split_once("->") {
            Some((s, t)) if !s.trim().is_empty() && !t.trim().is_empty() => {
                Ok((s.trim().to_string(), t.trim().to_string()))
            }
            _ => Err(CliError::usage(format!(
                "config key `tracked`: `{pair}` is not of the form source->target"
            ))),
        })
        .collect()
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn path_str(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Sets one key; the empty string restores the default.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::usage(format!("unknown config key `{key}`")));
        }
        if value.is_empty() {
            return self.reset(key);
        }
        let path = || Some(PathBuf::from(value));
        match key {
            "input" => self.input = path(),
            "layout" => self.layout = value.parse().map_err(|e: panelcausal::Error| CliError::usage(e.to_string()))?,
            "groups" => self.groups = path(),
            "group_column" => self.group_column = Some(value.to_string()),
            "variables" => self.variables = list(value),
            "max_missing" => self.max_missing = in_range(key, parse(key, value)?, 0.0, 1.0)?,
            "adf_alpha" => self.adf_alpha = probability(key, value, false)?,
            "auto_preprocess" => self.auto_preprocess = parse_bool(key, value)?,
            "p" => {
                self.p = if value.eq_ignore_ascii_case("auto") {
                    LagChoice::Auto
                } else {
                    LagChoice::Fixed(in_range(key, parse(key, value)?, 1, 12)?)
                }
            }
            "p_max" => self.p_max = in_range(key, parse(key, value)?, 1, 12)?,
            "tau_max" => self.tau_max = in_range(key, parse(key, value)?, 1, 10)?,
            "alpha" => self.alpha = probability(key, value, false)?,
            "alpha_pc" => self.alpha_pc = Some(probability(key, value, true)?),
            "horizon" => self.horizon = in_range(key, parse(key, value)?, 1, 200)?,
            "bootstrap_reps" => {
                let v = in_range(key, parse(key, value)?, 0, 100_000)?;
                if v == 1 {
                    return Err(CliError::usage("config key `bootstrap_reps`: use 0 (no bands) or at least 2"));
                }
                self.bootstrap_reps = v;
            }
            "permutation_reps" | "mc_reps" => {
                let v: usize = in_range(key, parse(key, value)?, 0, 100_000)?;
                if (1..10).contains(&v) {
                    return Err(CliError::usage(format!("config key `{key}`: use 0 (skip) or at least 10")));
                }
                if key == "mc_reps" {
                    self.mc_reps = v;
                } else {
                    self.permutation_reps = v;
                }
            }
            "mc_entities" => self.mc_entities = in_range(key, parse(key, value)?, 2, 100_000)?,
            "mc_years" => self.mc_years = in_range(key, parse(key, value)?, 4, 10_000)?,
            "mc_variables" => self.mc_variables = in_range(key, parse(key, value)?, 1, 50)?,
            "ordering" => self.ordering = list(value),
            "seed" => self.seed = parse(key, value)?,
            "output" => self.output = path(),
            "split_year" => self.split_year = parse(key, value)?,
            "tracked" => self.tracked = parse_tracked(value)?,
            "tau_sweep" => self.tau_sweep = usize_list(key, value, 1, 10)?,
            "lag_sweep" => self.lag_sweep = usize_list(key, value, 1, 12)?,
            "granger_graph" => self.granger_graph = path(),
            "pcmci_graph" => self.pcmci_graph = path(),
            "min_group_entities" => self.min_group_entities = in_range(key, parse(key, value)?, 2, 1_000_000)?,
            "weighting" => {
                self.weighting = match value.to_ascii_lowercase().as_str() {
                    "none" => Weighting::None,
                    "entity_inverse_variance" => Weighting::EntityInverseVariance,
                    _ => {
                        return Err(CliError::usage(format!(
                            "config key `weighting`: expected none or entity_inverse_variance, got `{value}`"
                        )))
                    }
                }
            }
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    fn reset(&mut self, key: &str) -> CliResult<()> {
        match key {
            "input" => self.input = None,
            "groups" => self.groups = None,
            "group_column" => self.group_column = None,
            "variables" => self.variables.clear(),
            "alpha_pc" => self.alpha_pc = None,
            "ordering" => self.ordering.clear(),
            "output" => self.output = None,
            "tracked" => self.tracked.clear(),
            "granger_graph" => self.granger_graph = None,
            "pcmci_graph" => self.pcmci_graph = None,
            _ => return self.set(key, &RunConfig::default().get(key)),
        }
        Ok(())
    }

    /// Canonical text of one key.
    pub fn get(&self, key: &str) -> String {
        match key {
            "input" => path_str(&self.input),
            "layout" => match self.layout {
                PanelLayout::Long => "long".into(),
                PanelLayout::Wide => "wide".into(),
            },
            "groups" => path_str(&self.groups),
            "group_column" => self.group_column.clone().unwrap_or_default(),
            "variables" => self.variables.join(","),
            "max_missing" => self.max_missing.to_string(),
            "adf_alpha" => self.adf_alpha.to_string(),
            "auto_preprocess" => self.auto_preprocess.to_string(),
            "p" => match self.p {
                LagChoice::Fixed(p) => p.to_string(),
                LagChoice::Auto => "auto".into(),
            },
            "p_max" => self.p_max.to_string(),
            "tau_max" => self.tau_max.to_string(),
            "alpha" => self.alpha.to_string(),
            "alpha_pc" => self.alpha_pc.map(|a| a.to_string()).unwrap_or_default(),
            "horizon" => self.horizon.to_string(),
            "bootstrap_reps" => self.bootstrap_reps.to_string(),
            "permutation_reps" => self.permutation_reps.to_string(),
            "mc_reps" => self.mc_reps.to_string(),
            "mc_entities" => self.mc_entities.to_string(),
            "mc_years" => self.mc_years.to_string(),
            "mc_variables" => self.mc_variables.to_string(),
            "ordering" => self.ordering.join(","),
            "seed" => self.seed.to_string(),
            "output" => path_str(&self.output),
            "split_year" => self.split_year.to_string(),
            "tracked" => self
                .tracked
                .iter()
                .map(|(s, t)| format!("{s}->{t}"))
                .collect::<Vec<_>>()
                .join(","),
            "tau_sweep" => join_usize(&self.tau_sweep),
            "lag_sweep" => join_usize(&self.lag_sweep),
            "granger_graph" => path_str(&self.granger_graph),
            "pcmci_graph" => path_str(&self.pcmci_graph),
            "min_group_entities" => self.min_group_entities.to_string(),
            "weighting" => match self.weighting {
                Weighting::None => "none".into(),
                Weighting::EntityInverseVariance => "entity_inverse_variance".into(),
            },
            _ => String::new(),
        }
    }

    /// Applies a config file's entries. Relative paths resolve against `base`.
    pub fn apply_text(&mut self, text: &str, base: &Path) -> CliResult<()> {
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!("config line {}: expected key = value", n + 1)));
            };
            let key = key.trim();
            if seen.contains(&key) {
                return Err(CliError::usage(format!("config line {}: key `{key}` repeated", n + 1)));
            }
            seen.push(key);
            let value = value.trim();
            let resolved;
            let value = if PATH_KEYS.contains(&key) && !value.is_empty() && Path::new(value).is_relative() {
                resolved = base.join(value).display().to_string();
                resolved.as_str()
            } else {
                value
            };
            self.set(key, value)
                .map_err(|e| CliError::usage(format!("config line {}: {}", n + 1, e.message)))?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config file {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        self.apply_text(&text, base)
    }

    /// `key=value` for every key in canonical order.
    pub fn canonical(&self) -> String {
        KEYS.iter().map(|k| format!("{k}={}\n", self.get(k))).collect()
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn require_input(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::usage("no input panel: set `input` in the config or pass --input"))
    }

    pub fn require_output(&self) -> CliResult<&Path> {
        self.output
            .as_deref()
            .ok_or_else(|| CliError::usage("no output directory: set `output` in the config or pass --output"))
    }

    pub fn ordering(&self) -> Option<Vec<String>> {
        (!self.ordering.is_empty()).then(|| self.ordering.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_render_and_reparse() {
        let c = RunConfig::default();
        let mut back = RunConfig::default();
        back.apply_text(&c.canonical(), Path::new(".")).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.get("p"), "2");
        assert_eq!(c.get("tau_sweep"), "2,3,4");
    }

    #[test]
    fn file_entries_comments_and_paths() {
        let mut c = RunConfig::default();
        let text = "# run\ninput = data/panel.csv  # raw\np = auto\ntracked = Edu->Ineq, Growth -> Pov\nseed=7\n\n";
        c.apply_text(text, Path::new("/cfg")).unwrap();
        assert_eq!(c.input, Some(PathBuf::from("/cfg/data/panel.csv")));
        assert_eq!(c.p, LagChoice::Auto);
        assert_eq!(c.seed, 7);
        assert_eq!(c.tracked[1], ("Growth".into(), "Pov".into()));
    }

    #[test]
    fn rejects_unknown_repeated_and_out_of_range() {
        let mut c = RunConfig::default();
        let e = c.apply_text("bogus = 1", Path::new(".")).unwrap_err();
        assert!(e.message.contains("bogus") && e.message.contains("line 1"));
        assert!(c.apply_text("seed = 1\nseed = 2", Path::new(".")).is_err());
        assert!(c.set("alpha", "1.5").is_err());
        assert!(c.set("mc_reps", "5").is_err());
        assert!(c.set("bootstrap_reps", "1").is_err());
        assert!(c.set("tracked", "a-b").is_err());
        assert!(c.set("p", "0").is_err());
        assert!(c.apply_text("no equals sign", Path::new(".")).is_err());
    }

    #[test]
    fn empty_value_resets() {
        let mut c = RunConfig::default();
        c.set("alpha", "0.01").unwrap();
        c.set("groups", "g.csv").unwrap();
        c.set("alpha", "").unwrap();
        c.set("groups", "").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn hash_tracks_values() {
        let mut c = RunConfig::default();
        let h = c.sha256();
        assert_eq!(h.len(), 64);
        c.set("seed", "1").unwrap();
        assert_ne!(c.sha256(), h);
    }
}
