//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, list values are comma
//! separated. Keys:
//!
//! | key | meaning | experiments |
//! |---|---|---|
//! | `experiment` | experiment name | all |
//! | `out` | output directory | all |
//! | `xi` | dimensionless temperature | all but gibbs-scaling, custom |
//! | `gamma` | friction rate | all |
//! | `sigma` | initial width | fig2, fig3 |
//! | `m0` | blob momentum | fig3 |
//! | `l_max` | linear cutoff | fig2, stationary-linear |
//! | `m_max` | planar cutoff | fig3, stationary-planar |
//! | `t_final` | final time | fig2, classical-linear, custom |
//! | `dt_output` | output spacing | fig2, classical-linear, custom |
//! | `times` | output times | fig3 |
//! | `n_alpha` | Wigner angle samples | fig3 |
//! | `variant` | `full` or `high_T` | fig2, fig3, stationary-* |
//! | `include_1overT_terms` | boolean form of `variant` | as `variant` |
//! | `inversion_symmetric` | boolean | fig2, fig3, stationary-* |
//! | `seed` | random seed | classical-linear, custom |
//! | `trajectories` | ensemble size | classical-linear, custom |
//! | `dt` | SDE step | classical-linear, custom |
//! | `xi_list` | temperatures | gibbs-scaling |
//! | `geometry` | particle file | custom |
//! | `kt` | temperature `kT` | custom |
//! | `rtol`, `atol` | integrator tolerances | fig2, fig3 |

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig2,
    Fig3,
    StationaryLinear,
    StationaryPlanar,
    ClassicalLinear,
    GibbsScaling,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::StationaryLinear,
        Experiment::StationaryPlanar,
        Experiment::ClassicalLinear,
        Experiment::GibbsScaling,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::StationaryLinear => "stationary-linear",
            Experiment::StationaryPlanar => "stationary-planar",
            Experiment::ClassicalLinear => "classical-linear",
            Experiment::GibbsScaling => "gibbs-scaling",
            Experiment::Custom => "custom",
        }
    }

    /// Keys accepted besides `experiment` and `out`.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Fig2 => &[
                "xi", "gamma", "sigma", "l_max", "t_final", "dt_output", "variant", "include_1overT_terms",
                "inversion_symmetric", "rtol", "atol",
            ],
            Experiment::Fig3 => &[
                "xi", "gamma", "sigma", "m0", "m_max", "times", "n_alpha", "variant", "include_1overT_terms",
                "inversion_symmetric", "rtol", "atol",
            ],
            Experiment::StationaryLinear => &["xi", "gamma", "l_max", "variant", "include_1overT_terms", "inversion_symmetric"],
            Experiment::StationaryPlanar => &["xi", "gamma", "m_max", "variant", "include_1overT_terms", "inversion_symmetric"],
            Experiment::ClassicalLinear => &["xi", "gamma", "t_final", "dt_output", "seed", "trajectories", "dt"],
            Experiment::GibbsScaling => &["gamma", "xi_list"],
            Experiment::Custom => &["geometry", "kt", "t_final", "dt_output", "seed", "trajectories", "dt"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub out: PathBuf,
    pub xi: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub m0: i64,
    pub l_max: usize,
    pub m_max: usize,
    pub t_final: f64,
    pub dt_output: f64,
    pub times: Vec<f64>,
    pub n_alpha: Option<usize>,
    pub variant: Variant,
    pub inversion_symmetric: bool,
    pub seed: u64,
    pub trajectories: usize,
    pub dt: Option<f64>,
    pub xi_list: Vec<f64>,
    pub geometry: Option<PathBuf>,
    pub kt: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl RunConfig {
    /// Defaults of one experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        use std::f64::consts::PI;
        let mut c = Self {
            experiment,
            out: PathBuf::from(format!("out/{experiment}")),
            xi: 5.0,
            gamma: 1.0,
            sigma: 0.4,
            m0: 25,
            l_max: 14,
            m_max: 60,
            t_final: 5.0,
            dt_output: 0.05,
            times: vec![0.0, 0.4 * PI, 4.0 * PI],
            n_alpha: None,
            variant: Variant::Full,
            inversion_symmetric: false,
            seed: 1,
            trajectories: 10_000,
            dt: None,
            xi_list: vec![10.0, 20.0, 40.0],
            geometry: None,
            kt: 1.0,
            rtol: 1e-8,
            atol: 1e-12,
        };
        match experiment {
            Experiment::Fig3 => {
                c.xi = 20.0;
                c.gamma = 1.0 / PI;
                c.sigma = 0.2;
                c.rtol = 1e-10;
                c.atol = 1e-13;
            }
            Experiment::StationaryPlanar => {
                c.xi = 20.0;
            }
            Experiment::ClassicalLinear => {
                c.xi = 40.0;
                c.t_final = 3.0;
                c.dt_output = 0.25;
            }
            Experiment::Custom => {
                c.t_final = 3.0;
                c.dt_output = 0.25;
                c.trajectories = 2000;
            }
            _ => {}
        }
        c
    }

    /// Resolve `pairs` in order (later entries win) on top of the defaults.
    /// The experiment comes from `experiment` or else from an `experiment` key.
    pub fn from_pairs(experiment: Option<Experiment>, pairs: &[(String, String)]) -> Result<Self> {
        let named = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.parse::<Experiment>())
            .transpose()?;
        let experiment = match (experiment, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidArgument(format!(
                    "configuration is for {b} but {a} was requested"
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(Error::InvalidArgument("no experiment given".into())),
        };
        let mut c = Self::defaults(experiment);
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "experiment" {
            return Ok(());
        }
        if key == "out" {
            self.out = PathBuf::from(value);
            return Ok(());
        }
        if !self.experiment.keys().contains(&key) {
            return Err(Error::InvalidArgument(format!(
                "unknown key {key:?} for experiment {}",
                self.experiment
            )));
        }
        match key {
            "xi" => self.xi = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "m0" => self.m0 = num(key, value)?,
            "l_max" => self.l_max = num(key, value)?,
            "m_max" => self.m_max = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "dt_output" => self.dt_output = num(key, value)?,
            "times" => self.times = list(key, value)?,
            "n_alpha" => self.n_alpha = Some(num(key, value)?),
            "variant" => self.variant = value.parse()?,
            "include_1overT_terms" => self.variant = Variant::from_flag(flag(key, value)?),
            "inversion_symmetric" => self.inversion_symmetric = flag(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "trajectories" => self.trajectories = num(key, value)?,
            "dt" => self.dt = Some(num(key, value)?),
            "xi_list" => self.xi_list = list(key, value)?,
            "geometry" => self.geometry = Some(PathBuf::from(value)),
            "kt" => self.kt = num(key, value)?,
            "rtol" => self.rtol = num(key, value)?,
            "atol" => self.atol = num(key, value)?,
            _ => unreachable!("key list and setter agree"),
        }
        Ok(())
    }

    /// Range checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, v) in [("xi", self.xi), ("sigma", self.sigma), ("kt", self.kt), ("rtol", self.rtol), ("atol", self.atol)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if !(self.t_final >= 0.0) || !(self.dt_output > 0.0) {
            return bad("t_final must be non-negative and dt_output positive".into());
        }
        if self.dt.is_some_and(|d| !(d > 0.0)) {
            return bad("dt must be positive".into());
        }
        match self.experiment {
            Experiment::Fig2 if self.l_max < 12 => bad(format!("fig2 needs l_max >= 12, got {}", self.l_max)),
            Experiment::StationaryLinear if self.l_max < 2 => bad(format!("l_max must be at least 2, got {}", self.l_max)),
            Experiment::Fig3 | Experiment::StationaryPlanar if self.m_max < 4 => {
                bad(format!("m_max must be at least 4, got {}", self.m_max))
            }
            Experiment::Fig3 if self.times.is_empty() || self.times.windows(2).any(|w| w[1] < w[0]) || self.times[0] < 0.0 => {
                bad("times must be non-empty, sorted, and non-negative".into())
            }
            Experiment::Fig3 if self.m0.unsigned_abs() as usize > self.m_max => {
                bad(format!("m0 = {} lies outside m_max = {}", self.m0, self.m_max))
            }
            Experiment::ClassicalLinear | Experiment::Custom if self.trajectories == 0 => {
                bad("need at least one trajectory".into())
            }
            Experiment::ClassicalLinear if self.gamma == 0.0 => bad("classical-linear needs gamma > 0".into()),
            Experiment::GibbsScaling if self.xi_list.is_empty() => bad("xi_list is empty".into()),
            Experiment::GibbsScaling if self.xi_list.iter().any(|&x| x < 5.0) || self.xi_list.windows(2).any(|w| w[1] <= w[0]) => {
                bad("xi_list must be ascending with every value at least 5".into())
            }
            Experiment::Custom if self.geometry.is_none() => bad("custom needs a geometry file".into()),
            _ => Ok(()),
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse {key} = {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidArgument(format!("{key} expects a boolean, got {value:?}"))),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// Parse `key = value` text into ordered pairs. Duplicate keys are rejected.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!("line {}: expected key = value", n + 1)));
        };
        let k = k.trim().to_string();
        if seen.insert(k.clone(), n + 1).is_some() {
            return Err(Error::InvalidArgument(format!("line {}: duplicate key {k:?}", n + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}
