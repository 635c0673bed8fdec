//! Run configuration: defaults, the `key = value` file format and angle parsing.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use catbell_core::measurement::SettingAngles;
use catbell_core::state::{DEFAULT_NODES, DEFAULT_R0};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub r0: f64,
    pub alphas: Vec<f64>,
    pub angles: SettingAngles,
    pub n0_list: Vec<u32>,
    pub k_points: usize,
    pub sigma_factor: f64,
    pub epsilon: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Random mixtures drawn by `lhv`; zero skips the sampling.
    pub samples: usize,
    /// Size of the worker pool; `None` uses every core.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r0: DEFAULT_R0,
            alphas: vec![1.0, 2.0, 3.0, 4.0],
            angles: SettingAngles::default(),
            n0_list: vec![0],
            k_points: DEFAULT_NODES,
            sigma_factor: 8.0,
            epsilon: 0.01,
            output_dir: PathBuf::from("."),
            seed: 1,
            samples: 100_000,
            workers: None,
        }
    }
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

/// Parses an angle in radians. Accepts plain numbers and multiples of pi
/// such as `pi`, `-pi/4`, `3pi/4`, `3*pi/4` and `0.5pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim();
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| format!("bad angle `{text}`"));
    };
    let head = s[..at].trim().trim_end_matches('*').trim();
    let coefficient = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("bad angle `{text}`"))?,
    };
    let tail = s[at + 2..].trim();
    let divisor = if tail.is_empty() {
        1.0
    } else {
        let d = tail.strip_prefix('/').ok_or_else(|| format!("bad angle `{text}`"))?;
        d.trim().parse::<f64>().map_err(|_| format!("bad angle `{text}`"))?
    };
    if divisor == 0.0 {
        return Err(format!("bad angle `{text}`"));
    }
    Ok(coefficient * PI / divisor)
}

pub fn parse_angles(text: &str) -> Result<SettingAngles, String> {
    let v = text.split(',').map(parse_angle).collect::<Result<Vec<_>, _>>()?;
    match v[..] {
        [theta, phi, theta_prime, phi_prime] => Ok(SettingAngles { theta, phi, theta_prime, phi_prime }),
        _ => Err(format!("expected four angles, got {}", v.len())),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("bad list entry `{s}`")))
        .collect()
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| config_err(idx + 1, "expected `key = value`"))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| config_err(idx + 1, e))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number `{v}` for {key}"));
        match key {
            "r0" => self.r0 = num(value)?,
            "alphas" => self.alphas = parse_list(value)?,
            "angles" => self.angles = parse_angles(value)?,
            "n0_list" => self.n0_list = parse_list(value)?,
            "k_points" => self.k_points = value.parse().map_err(|_| format!("bad k_points `{value}`"))?,
            "sigma_factor" => self.sigma_factor = num(value)?,
            "epsilon" => self.epsilon = num(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?,
            "samples" => self.samples = value.parse().map_err(|_| format!("bad samples `{value}`"))?,
            "workers" => {
                self.workers = match value {
                    "" | "auto" => None,
                    v => Some(v.parse().map_err(|_| format!("bad workers `{v}`"))?),
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Writes every field; floats use the shortest exact representation so
    /// parsing the result gives back the same config.
    pub fn serialize(&self) -> String {
        let a = &self.angles;
        let mut s = String::new();
        let _ = writeln!(s, "r0 = {:?}", self.r0);
        let _ = writeln!(s, "alphas = {}", join(&self.alphas));
        let _ = writeln!(s, "angles = {}", join(&[a.theta, a.phi, a.theta_prime, a.phi_prime]));
        let _ = writeln!(s, "n0_list = {}", join(&self.n0_list));
        let _ = writeln!(s, "k_points = {}", self.k_points);
        let _ = writeln!(s, "sigma_factor = {:?}", self.sigma_factor);
        let _ = writeln!(s, "epsilon = {:?}", self.epsilon);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "workers = {}", self.workers.map_or("auto".to_string(), |w| w.to_string()));
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.r0.is_finite() && self.r0 >= 0.0) {
            return bad(format!("r0 must be finite and non-negative, got {}", self.r0));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return bad(format!("alphas must be finite and positive, got {a}"));
        }
        let a = &self.angles;
        if ![a.theta, a.phi, a.theta_prime, a.phi_prime].iter().all(|x| x.is_finite()) {
            return bad("angles must be finite".into());
        }
        if !(self.sigma_factor.is_finite() && self.sigma_factor > 0.0) {
            return bad(format!("sigma_factor must be positive, got {}", self.sigma_factor));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }
}
