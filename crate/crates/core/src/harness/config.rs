use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::Params;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VarianceScan,
    Identity,
    Burke,
    Clt,
    FlatEdge,
    ExitTails,
    PathFluct,
    Coupling,
    ShapeLln,
    OracleSelftest,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::VarianceScan,
        Experiment::Identity,
        Experiment::Burke,
        Experiment::Clt,
        Experiment::FlatEdge,
        Experiment::ExitTails,
        Experiment::PathFluct,
        Experiment::Coupling,
        Experiment::ShapeLln,
        Experiment::OracleSelftest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::VarianceScan => "variance-scan",
            Experiment::Identity => "identity",
            Experiment::Burke => "burke",
            Experiment::Clt => "clt",
            Experiment::FlatEdge => "flat-edge",
            Experiment::ExitTails => "exit-tails",
            Experiment::PathFluct => "path-fluct",
            Experiment::Coupling => "coupling",
            Experiment::ShapeLln => "shape-lln",
            Experiment::OracleSelftest => "oracle-selftest",
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
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format '{s}'"))),
        }
    }
}

/// Everything an experiment needs. Fields that only affect scheduling or
/// where the output goes are not echoed into results, so result files are
/// identical at any worker count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub p: f64,
    pub u: f64,
    pub n_grid: Vec<usize>,
    pub samples: usize,
    /// Off-characteristic offset coefficient.
    pub c: f64,
    /// Off-characteristic offset exponent.
    pub alpha: f64,
    /// Level fraction for path fluctuations.
    pub tau: f64,
    /// Slope `y/x` of the flat-edge direction.
    pub flat_slope: f64,
    /// Use the characteristic endpoint instead of `m = n = N`.
    pub characteristic: bool,
    pub r_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub b_grid: Vec<f64>,
    /// Boundary parameters compared by the coupling checks.
    pub coupling_pair: (f64, f64),
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub timing: bool,
}

pub const DEFAULT_SEED: u64 = 20240611;

impl ExperimentConfig {
    /// Defaults sized to the acceptance targets of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            p: 0.5,
            u: 0.5,
            n_grid: vec![64, 128, 256, 512, 1024],
            samples: 10_000,
            c: -1.0,
            alpha: 0.9,
            tau: 0.5,
            flat_slope: 0.3,
            characteristic: true,
            r_grid: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            delta_grid: vec![0.4, 0.2, 0.1],
            b_grid: vec![0.5, 0.75, 1.0, 1.25, 1.5],
            coupling_pair: (0.4, 0.6),
            seed: DEFAULT_SEED,
            workers: 0,
            out: None,
            format: Format::Json,
            timing: false,
        };
        match experiment {
            Experiment::VarianceScan => base,
            Experiment::Identity => ExperimentConfig {
                n_grid: vec![64],
                samples: 100_000,
                characteristic: false,
                ..base
            },
            Experiment::Burke => ExperimentConfig {
                n_grid: vec![64],
                samples: 100_000,
                characteristic: false,
                ..base
            },
            Experiment::Clt => ExperimentConfig {
                n_grid: vec![64, 128, 256, 512],
                samples: 5_000,
                ..base
            },
            Experiment::FlatEdge => ExperimentConfig {
                n_grid: vec![100, 200, 400],
                ..base
            },
            Experiment::ExitTails => ExperimentConfig {
                n_grid: vec![128, 256, 512, 1024],
                ..base
            },
            Experiment::PathFluct => ExperimentConfig {
                n_grid: vec![128, 256, 512, 1024],
                ..base
            },
            Experiment::Coupling => ExperimentConfig {
                n_grid: vec![64],
                samples: 1_000,
                characteristic: false,
                ..base
            },
            Experiment::ShapeLln => ExperimentConfig {
                n_grid: vec![128, 512],
                samples: 1_000,
                ..base
            },
            Experiment::OracleSelftest => ExperimentConfig {
                n_grid: vec![1, 2, 3, 4, 5],
                samples: 200,
                characteristic: false,
                ..base
            },
        }
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.p, self.u).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.n_grid.is_empty() {
            return Err(Error::Config("N-grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("N-grid must be strictly increasing".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::Config("N-grid entries must be positive".into()));
        }
        if self.samples < 100 {
            return Err(Error::Config(format!(
                "samples = {} must be at least 100",
                self.samples
            )));
        }
        if !(self.tau >= 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau = {} must lie in [0,1)", self.tau)));
        }
        for (name, grid) in [("r", &self.r_grid), ("delta", &self.delta_grid), ("b", &self.b_grid)] {
            if grid.iter().any(|x| x.is_nan() || *x <= 0.0) {
                return Err(Error::Config(format!("{name}-grid entries must be positive")));
            }
        }
        let (r1, r2) = self.coupling_pair;
        if !(r1 > 0.0 && r1 <= r2 && r2 < 1.0) {
            return Err(Error::Config(format!(
                "coupling pair ({r1},{r2}) must satisfy 0 < r1 <= r2 < 1"
            )));
        }
        match self.experiment {
            Experiment::Clt => {
                if !(self.alpha > 2.0 / 3.0 && self.alpha <= 1.0) {
                    return Err(Error::Config(format!("alpha = {} must lie in (2/3, 1]", self.alpha)));
                }
                if self.c == 0.0 || !self.c.is_finite() {
                    return Err(Error::Config("c must be a nonzero finite number".into()));
                }
                if self.u >= 1.0 {
                    return Err(Error::Config("the CLT needs u < 1".into()));
                }
            }
            Experiment::FlatEdge => {
                let s = self.flat_slope;
                if !(s > 0.0 && (s < self.p || s > 1.0 / self.p)) {
                    return Err(Error::Config(format!(
                        "direction slope {s} is not in the flat edge (needs < p or > 1/p)"
                    )));
                }
            }
            Experiment::PathFluct => {
                if !(self.tau > 0.0 && self.tau < 1.0) {
                    return Err(Error::Config(format!("tau = {} must lie in (0,1)", self.tau)));
                }
            }
            Experiment::OracleSelftest if *self.n_grid.last().unwrap() > 7 => {
                return Err(Error::Config("oracle sizes above 7 are too large to enumerate".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            ExperimentConfig::defaults(e).validate().unwrap();
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::defaults(Experiment::VarianceScan);
        c.n_grid = vec![128, 64];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::defaults(Experiment::VarianceScan);
        c.samples = 10;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::defaults(Experiment::Clt);
        c.alpha = 0.5;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::defaults(Experiment::FlatEdge);
        c.flat_slope = 0.7;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::defaults(Experiment::Identity);
        c.p = 1.0;
        assert!(c.validate().is_err());
    }
}
