//! Run configuration and the tolerance table.
//!
//! Configurations are plain `key = value` lines; `#` starts a comment. The
//! same format is written back as the run manifest, so a manifest can be fed
//! to a later run to reproduce it.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::fourier::GridSpec;
use crate::{Error, Result};

/// Every tolerance used by a verdict, in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed excess of a fitted exponent over the predicted one.
    pub exponent_slack: f64,
    /// Factor applied to fitted constants on holdout samples.
    pub constant_slack: f64,
    /// Allowed |slope| of log-ratio against log-scale in sweeps.
    pub trend_slope: f64,
    /// Allowed max/min of sweep ratios.
    pub max_min_ratio: f64,
    /// Relative agreement of the direct flow and the branch assembly.
    pub branch_match: f64,
    /// Step of the centered time difference in residual checks.
    pub residual_dt: f64,
    pub residual_max: f64,
    /// Equality tolerance in the admissibility conditions.
    pub equality: f64,
    /// Share of `L²` mass near the box boundary that triggers a warning.
    pub wrap_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exponent_slack: 0.1,
            constant_slack: 1.2,
            trend_slope: 0.15,
            max_min_ratio: 50.0,
            branch_match: 1e-8,
            residual_dt: 1e-3,
            residual_max: 1e-4,
            equality: 1e-12,
            wrap_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid_n: usize,
    pub box_length: f64,
    pub horizon: f64,
    /// Window radius for grid-based spatial norms.
    pub space_window_radius: f64,
    /// Window radius for kernel (radial) norms.
    pub kernel_window_radius: f64,
    pub time_window_radius: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_n: 48,
            box_length: 32.0,
            horizon: 8.0,
            space_window_radius: 3.0,
            kernel_window_radius: 1.0,
            time_window_radius: 1.0,
            output_dir: PathBuf::from("out"),
            seed: 20_240_917,
            tolerances: Tolerances::default(),
        }
    }
}

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "DIRAC_AMALGAM_OUT";

const KEYS: &[&str] = &[
    "grid.n",
    "grid.box_length",
    "horizon",
    "window.space_radius",
    "window.kernel_radius",
    "window.time_radius",
    "output_dir",
    "seed",
    "tol.exponent_slack",
    "tol.constant_slack",
    "tol.trend_slope",
    "tol.max_min_ratio",
    "tol.branch_match",
    "tol.residual_dt",
    "tol.residual_max",
    "tol.equality",
    "tol.wrap_fraction",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

impl RunConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Sets one key; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let t = &mut self.tolerances;
        match key.trim() {
            "grid.n" => self.grid_n = parse_num(key, v)?,
            "grid.box_length" => self.box_length = parse_num(key, v)?,
            "horizon" => self.horizon = parse_num(key, v)?,
            "window.space_radius" => self.space_window_radius = parse_num(key, v)?,
            "window.kernel_radius" => self.kernel_window_radius = parse_num(key, v)?,
            "window.time_radius" => self.time_window_radius = parse_num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "seed" => self.seed = parse_num(key, v)?,
            "tol.exponent_slack" => t.exponent_slack = parse_num(key, v)?,
            "tol.constant_slack" => t.constant_slack = parse_num(key, v)?,
            "tol.trend_slope" => t.trend_slope = parse_num(key, v)?,
            "tol.max_min_ratio" => t.max_min_ratio = parse_num(key, v)?,
            "tol.branch_match" => t.branch_match = parse_num(key, v)?,
            "tol.residual_dt" => t.residual_dt = parse_num(key, v)?,
            "tol.residual_max" => t.residual_max = parse_num(key, v)?,
            "tol.equality" => t.equality = parse_num(key, v)?,
            "tol.wrap_fraction" => t.wrap_fraction = parse_num(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Lines that are not part
    /// of the configuration (blank, `#` comments) are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        let positive = [
            ("horizon", self.horizon),
            ("window.space_radius", self.space_window_radius),
            ("window.kernel_radius", self.kernel_window_radius),
            ("window.time_radius", self.time_window_radius),
        ];
        for (k, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        let t = &self.tolerances;
        let tols = [
            ("tol.exponent_slack", t.exponent_slack),
            ("tol.trend_slope", t.trend_slope),
            ("tol.branch_match", t.branch_match),
            ("tol.residual_dt", t.residual_dt),
            ("tol.residual_max", t.residual_max),
            ("tol.equality", t.equality),
            ("tol.wrap_fraction", t.wrap_fraction),
        ];
        for (k, v) in tols {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{k} must be a finite nonnegative number, got {v}")));
            }
        }
        if !(t.constant_slack >= 1.0) || !(t.max_min_ratio >= 1.0) {
            return Err(Error::Config("tol.constant_slack and tol.max_min_ratio must be >= 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid_n, self.box_length).map_err(|e| Error::Config(e.to_string()))
    }

    /// Serializes every key, in a fixed order, in the format [`Self::parse`] reads.
    pub fn to_text(&self) -> String {
        let t = &self.tolerances;
        let values = [
            self.grid_n.to_string(),
            self.box_length.to_string(),
            self.horizon.to_string(),
            self.space_window_radius.to_string(),
            self.kernel_window_radius.to_string(),
            self.time_window_radius.to_string(),
            self.output_dir.display().to_string(),
            self.seed.to_string(),
            t.exponent_slack.to_string(),
            t.constant_slack.to_string(),
            t.trend_slope.to_string(),
            t.max_min_ratio.to_string(),
            t.branch_match.to_string(),
            t.residual_dt.to_string(),
            t.residual_max.to_string(),
            t.equality.to_string(),
            t.wrap_fraction.to_string(),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
