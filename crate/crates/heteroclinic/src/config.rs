//! Flat key=value run configuration: one key per line, `#` comments,
//! dotted names for grid keys. Zero-dependency format so any script can
//! generate or diff it.

use std::path::Path;

use crate::error::{Error, Result};
use crate::iterate::IterateOptions;
use crate::model::{ModelParams, Overrides};
use crate::profile::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub delta: f64,
    pub harvest: f64,
    pub rho: f64,
    pub sigma: f64,
    pub r: f64,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub t0: Option<f64>,
    pub grid_t_min: f64,
    pub grid_t_max: f64,
    pub grid_h: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub save_count: usize,
    pub allow_unverified: bool,
}

#[derive(Default)]
struct Builder {
    delta: Option<f64>,
    harvest: Option<f64>,
    rho: Option<f64>,
    sigma: Option<f64>,
    r: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    alpha: Option<f64>,
    t0: Option<f64>,
    grid_t_min: Option<f64>,
    grid_t_max: Option<f64>,
    grid_h: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    save_count: Option<usize>,
    allow_unverified: Option<bool>,
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse '{v}' as a number")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse '{v}' as a count")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Parse(format!("{key}: expected true or false, got '{v}'"))),
    }
}

impl Builder {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "delta" => self.delta = Some(num(key, v)?),
            "harvest" => self.harvest = Some(num(key, v)?),
            "rho" => self.rho = Some(num(key, v)?),
            "sigma" => self.sigma = Some(num(key, v)?),
            "r" => self.r = Some(num(key, v)?),
            "beta" => self.beta = Some(num(key, v)?),
            "lambda" => self.lambda = Some(num(key, v)?),
            "epsilon" => self.epsilon = Some(num(key, v)?),
            "alpha" => self.alpha = Some(num(key, v)?),
            "t0" => self.t0 = Some(num(key, v)?),
            "grid.t_min" => self.grid_t_min = Some(num(key, v)?),
            "grid.t_max" => self.grid_t_max = Some(num(key, v)?),
            "grid.h" => self.grid_h = Some(num(key, v)?),
            "tol" => self.tol = Some(num(key, v)?),
            "max_iter" => self.max_iter = Some(count(key, v)?),
            "save_count" => self.save_count = Some(count(key, v)?),
            "allow_unverified" => self.allow_unverified = Some(flag(key, v)?),
            _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig> {
        let req = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Parse(format!("missing required key '{name}'")))
        };
        Ok(RunConfig {
            delta: req(self.delta, "delta")?,
            harvest: req(self.harvest, "harvest")?,
            rho: req(self.rho, "rho")?,
            sigma: req(self.sigma, "sigma")?,
            r: req(self.r, "r")?,
            beta: self.beta,
            lambda: self.lambda,
            epsilon: self.epsilon,
            alpha: self.alpha,
            t0: self.t0,
            // deep enough on the left for the iteration gap to reach the
            // default tolerance; the floor scales like e^{lambda t_min}
            grid_t_min: self.grid_t_min.unwrap_or(-45.0),
            grid_t_max: self.grid_t_max.unwrap_or(20.0),
            grid_h: self.grid_h.unwrap_or(0.01),
            tol: self.tol.unwrap_or(1e-8),
            max_iter: self.max_iter.unwrap_or(500),
            save_count: self.save_count.unwrap_or(4),
            allow_unverified: self.allow_unverified.unwrap_or(false),
        })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut b = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key=value, got '{line}'", idx + 1))
            })?;
            b.set(k.trim(), v.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
        }
        b.finish()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Apply command-line `key=value` overrides on top of the file.
    pub fn apply_sets(&mut self, sets: &[String]) -> Result<()> {
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("--set needs key=value, got '{s}'")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "delta" => self.delta = num(k, v)?,
                "harvest" => self.harvest = num(k, v)?,
                "rho" => self.rho = num(k, v)?,
                "sigma" => self.sigma = num(k, v)?,
                "r" => self.r = num(k, v)?,
                "beta" => self.beta = Some(num(k, v)?),
                "lambda" => self.lambda = Some(num(k, v)?),
                "epsilon" => self.epsilon = Some(num(k, v)?),
                "alpha" => self.alpha = Some(num(k, v)?),
                "t0" => self.t0 = Some(num(k, v)?),
                "grid.t_min" => self.grid_t_min = num(k, v)?,
                "grid.t_max" => self.grid_t_max = num(k, v)?,
                "grid.h" => self.grid_h = num(k, v)?,
                "tol" => self.tol = num(k, v)?,
                "max_iter" => self.max_iter = count(k, v)?,
                "save_count" => self.save_count = count(k, v)?,
                "allow_unverified" => self.allow_unverified = flag(k, v)?,
                _ => return Err(Error::Parse(format!("unknown key '{k}'"))),
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams<f64>> {
        ModelParams::new(self.delta, self.harvest, self.rho, self.sigma, self.r)
    }

    pub fn overrides(&self) -> Overrides<f64> {
        Overrides {
            beta: self.beta,
            lambda: self.lambda,
            epsilon: self.epsilon,
            alpha: self.alpha,
            t0: self.t0,
        }
    }

    pub fn grid(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.grid_t_min, self.grid_t_max, self.grid_h)
    }

    pub fn options(&self) -> IterateOptions<f64> {
        IterateOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            check_p34: true,
            save_count: self.save_count,
            allow_uncertified: self.allow_unverified,
        }
    }
}
