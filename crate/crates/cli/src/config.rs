//! Line-oriented `key = value` experiment configuration with `#` comments.

use crate::CliError;
use shellzeros::operators::{CoefficientLaw, PerturbationKind};
use shellzeros::pointprocess::DEFAULT_BINS;
use shellzeros::symbols::{solve_energy_shell, Rect, SymbolModel};
use shellzeros::C64;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ComplexHo,
    TorusExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    Product,
    Det,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    K2v,
    Ginibre,
    Kappa,
}

impl Theory {
    pub fn name(self) -> &'static str {
        match self {
            Theory::K2v => "k2v",
            Theory::Ginibre => "ginibre",
            Theory::Kappa => "kappa",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub q: u32,
    pub h: f64,
    /// `delta = h^delta_exponent`.
    pub delta_exponent: f64,
    pub z0: C64,
    /// Harvest radius of the rescaled window.
    pub window_radius: f64,
    /// Radius used for statistics; defaults to `window_radius - 1`.
    pub stats_radius: Option<f64>,
    pub realizations: usize,
    pub perturbation: PerturbationKind,
    pub law: CoefficientLaw,
    pub clamp: bool,
    pub clamp_c: f64,
    /// Mode cutoff `K` (torus) or `n_max` (Hermite); 0 picks the default.
    pub basis_cutoff: usize,
    /// Number of random-potential coefficients; 0 picks the default.
    pub potential_modes: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub process: ProcessKind,
    /// GAF parameters; empty means the `sigma_+` values of the symbol at `z0`.
    pub sigmas: Vec<f64>,
    /// `sigma_-` values for the determinant process; empty means the symbol's.
    pub sigma_minus: Vec<f64>,
    pub bins: usize,
    pub max_r2: Option<f64>,
    pub theory: Theory,
    pub max_z: f64,
    pub mean_z: f64,
    pub gamma: Option<Rect>,
    pub weyl_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::TorusExp,
            q: 1,
            h: 0.01,
            delta_exponent: 4.0,
            z0: C64::new(1.6, 0.0),
            window_radius: 5.0,
            stats_radius: None,
            realizations: 400,
            perturbation: PerturbationKind::RandomPotential,
            law: CoefficientLaw::ComplexGaussian,
            clamp: false,
            clamp_c: 1.0,
            basis_cutoff: 0,
            potential_modes: 0,
            master_seed: 0,
            out_dir: PathBuf::from("out"),
            process: ProcessKind::Product,
            sigmas: Vec::new(),
            sigma_minus: Vec::new(),
            bins: DEFAULT_BINS,
            max_r2: None,
            theory: Theory::K2v,
            max_z: 4.0,
            mean_z: 1.5,
            gamma: None,
            weyl_tolerance: 0.1,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("invalid value {value:?} for {key}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, value))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|s| num(key, s.trim())).collect()
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Option<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse().ok().map(|re| C64::new(re, 0.0));
    };
    // split at the last sign that is not an exponent sign or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => s.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(C64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "model" => {
                self.model = match v {
                    "complex_ho" => ModelKind::ComplexHo,
                    "torus_exp" => ModelKind::TorusExp,
                    _ => return Err(bad(key, v)),
                }
            }
            "q" => self.q = num(key, v)?,
            "h" => self.h = num(key, v)?,
            "delta_exponent" => self.delta_exponent = num(key, v)?,
            "z0" => self.z0 = parse_complex(v).ok_or_else(|| bad(key, v))?,
            "window_radius" => self.window_radius = num(key, v)?,
            "stats_radius" => self.stats_radius = Some(num(key, v)?),
            "realizations" => self.realizations = num(key, v)?,
            "perturbation" => {
                self.perturbation = match v {
                    "matrix" => PerturbationKind::RandomMatrix,
                    "potential" => PerturbationKind::RandomPotential,
                    _ => return Err(bad(key, v)),
                }
            }
            "law" => {
                self.law = match v {
                    "gaussian" => CoefficientLaw::ComplexGaussian,
                    "uniform_phase" => CoefficientLaw::UniformPhase,
                    _ => return Err(bad(key, v)),
                }
            }
            "clamp" => self.clamp = num(key, v)?,
            "clamp_c" => self.clamp_c = num(key, v)?,
            "basis_cutoff" => self.basis_cutoff = num(key, v)?,
            "potential_modes" => self.potential_modes = num(key, v)?,
            "master_seed" => self.master_seed = num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "process" => {
                self.process = match v {
                    "product" => ProcessKind::Product,
                    "det" => ProcessKind::Det,
                    _ => return Err(bad(key, v)),
                }
            }
            "sigmas" => self.sigmas = list(key, v)?,
            "sigma_minus" => self.sigma_minus = list(key, v)?,
            "bins" if v.is_empty() => self.bins = DEFAULT_BINS,
            "bins" => self.bins = num(key, v)?,
            "max_r2" if v.is_empty() => self.max_r2 = None,
            "max_r2" => self.max_r2 = Some(num(key, v)?),
            "theory" => {
                self.theory = match v {
                    "k2v" => Theory::K2v,
                    "ginibre" => Theory::Ginibre,
                    "kappa" => Theory::Kappa,
                    _ => return Err(bad(key, v)),
                }
            }
            "max_z" => self.max_z = num(key, v)?,
            "mean_z" => self.mean_z = num(key, v)?,
            "gamma" => {
                let g = list(key, v)?;
                if g.len() != 4 {
                    return Err(bad(key, v));
                }
                self.gamma = Some(Rect::new(g[0], g[1], g[2], g[3]));
            }
            "weyl_tolerance" => self.weyl_tolerance = num(key, v)?,
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_override(&mut self, kv: &str) -> Result<(), CliError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {kv:?} is not key=value")))?;
        self.set(k, v)
    }

    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.delta_exponent > 3.0) {
            return err("delta_exponent must exceed 3");
        }
        if self.realizations < 1 {
            return err("realizations must be at least 1");
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return err("h must lie in (0, 1]");
        }
        if !(self.window_radius > 0.0) {
            return err("window_radius must be positive");
        }
        if self.stats_radius.is_some_and(|r| !(r > 0.0 && r <= self.window_radius)) {
            return err("stats_radius must lie in (0, window_radius]");
        }
        if self.model == ModelKind::TorusExp && self.q == 0 {
            return err("q must be positive");
        }
        if self.bins == 0 {
            return err("bins must be positive");
        }
        if self.sigmas.iter().chain(&self.sigma_minus).any(|&s| !(s > 0.0)) {
            return err("sigmas must be positive");
        }
        Ok(())
    }

    pub fn symbol(&self) -> SymbolModel {
        match self.model {
            ModelKind::ComplexHo => SymbolModel::ComplexHarmonicOscillator,
            ModelKind::TorusExp => SymbolModel::TorusExp { q: self.q },
        }
    }

    pub fn delta(&self) -> f64 {
        self.h.powf(self.delta_exponent)
    }

    pub fn effective_stats_radius(&self) -> f64 {
        self.stats_radius.unwrap_or((self.window_radius - 1.0).max(self.window_radius / 2.0))
    }

    /// `(sigma_+, sigma_-)` lists: the configured ones, else those of the symbol at `z0`.
    pub fn sigma_lists(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        if !self.sigmas.is_empty() {
            let minus = if self.sigma_minus.is_empty() {
                self.sigmas.clone()
            } else {
                self.sigma_minus.clone()
            };
            if minus.len() != self.sigmas.len() {
                return Err(CliError::Config("sigmas and sigma_minus differ in length".into()));
            }
            return Ok((self.sigmas.clone(), minus));
        }
        let shell = solve_energy_shell(self.symbol(), self.z0)?;
        Ok((shell.sigma_plus(), shell.sigma_minus()))
    }

    pub fn ensemble_tag(&self) -> String {
        let model = match self.model {
            ModelKind::ComplexHo => "complex_ho".to_string(),
            ModelKind::TorusExp => format!("torus_q{}", self.q),
        };
        let pert = match self.perturbation {
            PerturbationKind::RandomMatrix => "matrix",
            PerturbationKind::RandomPotential => "potential",
        };
        let law = match self.law {
            CoefficientLaw::ComplexGaussian => "gaussian",
            CoefficientLaw::UniformPhase => "uniform_phase",
        };
        format!("{model}_{pert}_{law}")
    }
}
