//! Effective run configuration: built-in defaults, then an optional
//! `key = value` file, then command-line flags.

use std::fmt::Write as _;
use std::path::Path;

use crate::eval::KappaVariant;
use crate::features::DEFAULT_K;
use crate::sampling::{SampleProfile, DEFAULT_SPHERE_RADIUS};
use crate::svm::SvmHyperparams;
use crate::synthgen::SuitePreset;
use crate::{Error, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "LEAFWOOD_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Plane-fit residual sampling.
    Auto,
    /// Spheres around leaf/wood seed points.
    SeedSphere,
    /// Random subset of externally labeled points.
    Labels,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "auto" => Some(Method::Auto),
            "seed-sphere" => Some(Method::SeedSphere),
            "labels" => Some(Method::Labels),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::SeedSphere => "seed-sphere",
            Method::Labels => "labels",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub seed: u64,
    pub method: Method,
    pub profile_name: String,
    pub profile: SampleProfile,
    pub radius: f64,
    pub n_seeds: usize,
    pub n_labeled: usize,
    pub svm: SvmHyperparams,
    pub grid_search: bool,
    pub kappa: KappaVariant,
    pub planar_leaves: bool,
    pub synth_preset: SuitePreset,
    pub synth_points: usize,
    /// Not part of the echoed config: it never changes results.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: DEFAULT_K,
            seed: 42,
            method: Method::Auto,
            profile_name: "balanced".into(),
            profile: SampleProfile::BALANCED,
            radius: DEFAULT_SPHERE_RADIUS,
            n_seeds: 20,
            n_labeled: 10_000,
            svm: SvmHyperparams::default(),
            grid_search: false,
            kappa: KappaVariant::Paper,
            planar_leaves: false,
            synth_preset: SuitePreset::Balanced,
            synth_points: 100_000,
            workers: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value {v:?} for '{key}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {v:?} for '{key}'"))),
    }
}

impl RunConfig {
    /// Sets one option by name. Names match the echoed config keys.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "k" => self.k = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "method" => {
                self.method = Method::parse(v)
                    .ok_or_else(|| Error::Config(format!("unknown method {v:?}")))?
            }
            "profile" => {
                self.profile = SampleProfile::preset(v).ok_or_else(|| {
                    Error::Config(format!("unknown profile {v:?} (leafy, balanced, woody)"))
                })?;
                self.profile_name = v.to_string();
            }
            "n_candidates" => self.set_counts(Some(parse_num(key, v)?), None, None),
            "n_leaf" => self.set_counts(None, Some(parse_num(key, v)?), None),
            "n_wood" => self.set_counts(None, None, Some(parse_num(key, v)?)),
            "radius" => self.radius = parse_num(key, v)?,
            "n_seeds" => self.n_seeds = parse_num(key, v)?,
            "n_labeled" => self.n_labeled = parse_num(key, v)?,
            "c" => self.svm.c = parse_num(key, v)?,
            "gamma" => self.svm.gamma = parse_num(key, v)?,
            "tol" => self.svm.tol = parse_num(key, v)?,
            "max_iter" => self.svm.max_iter = parse_num(key, v)?,
            "scaling" => self.svm.scaling = parse_bool(key, v)?,
            "grid_search" => self.grid_search = parse_bool(key, v)?,
            "kappa" => {
                self.kappa = KappaVariant::parse(v)
                    .ok_or_else(|| Error::Config(format!("unknown kappa variant {v:?}")))?
            }
            "planar_leaves" => self.planar_leaves = parse_bool(key, v)?,
            "synth_preset" => {
                self.synth_preset = SuitePreset::parse(v)
                    .ok_or_else(|| Error::Config(format!("unknown synth preset {v:?}")))?
            }
            "synth_points" => self.synth_points = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    fn set_counts(&mut self, cand: Option<usize>, leaf: Option<usize>, wood: Option<usize>) {
        let p = &mut self.profile;
        p.n_candidates = cand.unwrap_or(p.n_candidates);
        p.n_leaf = leaf.unwrap_or(p.n_leaf);
        p.n_wood = wood.unwrap_or(p.n_wood);
        self.profile_name = "custom".into();
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are
    /// ignored.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key = value", origin.display(), i + 1))
            })?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}:{}: {m}", origin.display(), i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        self.profile.validate()?;
        self.svm.validate()?;
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config("radius must be positive".into()));
        }
        if self.n_seeds == 0 || self.n_labeled == 0 || self.synth_points == 0 {
            return Err(Error::Config("counts must be positive".into()));
        }
        Ok(())
    }

    /// `key = value` text that reproduces this configuration through
    /// [`RunConfig::apply_text`].
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("k", self.k.to_string());
        kv("seed", self.seed.to_string());
        kv("method", self.method.name().into());
        if self.profile_name == "custom" {
            kv("n_candidates", self.profile.n_candidates.to_string());
            kv("n_leaf", self.profile.n_leaf.to_string());
            kv("n_wood", self.profile.n_wood.to_string());
        } else {
            kv("profile", self.profile_name.clone());
        }
        kv("radius", format!("{:?}", self.radius));
        kv("n_seeds", self.n_seeds.to_string());
        kv("n_labeled", self.n_labeled.to_string());
        kv("c", format!("{:?}", self.svm.c));
        kv("gamma", format!("{:?}", self.svm.gamma));
        kv("tol", format!("{:?}", self.svm.tol));
        kv("max_iter", self.svm.max_iter.to_string());
        kv("scaling", self.svm.scaling.to_string());
        kv("grid_search", self.grid_search.to_string());
        kv("kappa", self.kappa.name().into());
        kv("planar_leaves", self.planar_leaves.to_string());
        kv("synth_preset", self.synth_preset.name().into());
        kv("synth_points", self.synth_points.to_string());
        s
    }
}
