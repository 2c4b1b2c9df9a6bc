//! Seeded Monte Carlo runs. Realization `i` uses the stream seeded by
//! `derive_seed(master_seed, i)`; results are collected in index order, so
//! outputs do not depend on the number of worker threads.

use crate::config::{ExperimentConfig, ModelKind, ProcessKind};
use crate::CliError;
use rayon::prelude::*;
use shellzeros::gaf::{sample_limit_process, LimitKind, LimitProcessSpec};
use shellzeros::operators::{
    assemble_perturbed, build_unperturbed, default_hermite_cutoff, default_torus_cutoff, draw_perturbation,
    BasisSpec, OperatorMatrix, PerturbationKind,
};
use shellzeros::pointprocess::{rescale, RescaledProcess, SpectrumRecord};
use shellzeros::rng::derive_seed;
use shellzeros::{eigensolver, C64};

/// Largest `|z|` the discretization has to resolve.
pub fn window_max(cfg: &ExperimentConfig) -> f64 {
    let mut m = cfg.z0.norm() + cfg.window_radius * cfg.h.sqrt();
    if let Some(g) = cfg.gamma {
        for z in [
            C64::new(g.re_lo, g.im_lo),
            C64::new(g.re_lo, g.im_hi),
            C64::new(g.re_hi, g.im_lo),
            C64::new(g.re_hi, g.im_hi),
        ] {
            m = m.max(z.norm());
        }
    }
    m
}

pub fn basis(cfg: &ExperimentConfig) -> BasisSpec {
    let wmax = window_max(cfg);
    match cfg.model {
        ModelKind::TorusExp => BasisSpec::FourierTorus {
            k_max: if cfg.basis_cutoff > 0 {
                cfg.basis_cutoff
            } else {
                default_torus_cutoff(cfg.h, wmax)
            },
        },
        ModelKind::ComplexHo => BasisSpec::ScaledHermite {
            h: cfg.h,
            n_max: if cfg.basis_cutoff > 0 {
                cfg.basis_cutoff
            } else {
                default_hermite_cutoff(cfg.h, wmax)
            },
        },
    }
}

pub fn prepare_operator(cfg: &ExperimentConfig) -> Result<OperatorMatrix, CliError> {
    Ok(build_unperturbed(cfg.symbol(), basis(cfg), cfg.h, window_max(cfg))?)
}

/// Number of random coefficients per draw.
pub fn perturbation_size(cfg: &ExperimentConfig, dim: usize) -> usize {
    match cfg.perturbation {
        PerturbationKind::RandomMatrix => dim,
        PerturbationKind::RandomPotential if cfg.potential_modes > 0 => cfg.potential_modes,
        PerturbationKind::RandomPotential => match cfg.model {
            ModelKind::TorusExp => dim - (1 - dim % 2),
            ModelKind::ComplexHo => dim,
        },
    }
}

pub fn run_realization(cfg: &ExperimentConfig, op: &OperatorMatrix, index: usize) -> Result<SpectrumRecord, CliError> {
    let seed = derive_seed(cfg.master_seed, index as u64);
    let n = perturbation_size(cfg, op.dimension());
    let draw = draw_perturbation(cfg.perturbation, cfg.law, n, cfg.h, cfg.clamp.then_some(cfg.clamp_c), seed)?;
    let perturbed = assemble_perturbed(op, &draw, cfg.delta())?;
    let eig = eigensolver::eigenvalues(&perturbed.matrix)?;
    Ok(SpectrumRecord {
        h: cfg.h,
        delta: cfg.delta(),
        seed,
        ensemble_tag: cfg.ensemble_tag(),
        eigenvalues: eig.eigenvalues,
    })
}

pub fn run_spectra(cfg: &ExperimentConfig) -> Result<Vec<SpectrumRecord>, CliError> {
    cfg.validate()?;
    let op = prepare_operator(cfg)?;
    (0..cfg.realizations)
        .into_par_iter()
        .map(|i| run_realization(cfg, &op, i))
        .collect()
}

pub fn rescale_all(cfg: &ExperimentConfig, spectra: &[SpectrumRecord]) -> Result<Vec<RescaledProcess>, CliError> {
    spectra
        .iter()
        .map(|s| Ok(rescale(s, cfg.z0, cfg.window_radius)?))
        .collect()
}

pub fn limit_kind(cfg: &ExperimentConfig) -> Result<LimitKind, CliError> {
    let (plus, minus) = cfg.sigma_lists()?;
    Ok(match cfg.process {
        ProcessKind::Product => LimitKind::ProductV(plus),
        ProcessKind::Det => LimitKind::det_from_pairs(&plus, &minus)?,
    })
}

pub fn gaf_tag(cfg: &ExperimentConfig) -> &'static str {
    match cfg.process {
        ProcessKind::Product => "gaf_product",
        ProcessKind::Det => "gaf_det",
    }
}

/// Zero sets of the configured limit process, one per realization, as
/// rescaled processes centred at 0 with `h = 1`.
pub fn run_gaf(cfg: &ExperimentConfig) -> Result<Vec<RescaledProcess>, CliError> {
    cfg.validate()?;
    let kind = limit_kind(cfg)?;
    (0..cfg.realizations)
        .into_par_iter()
        .map(|i| {
            let spec = LimitProcessSpec {
                kind: kind.clone(),
                window_radius: cfg.window_radius,
                seed: derive_seed(cfg.master_seed, i as u64),
            };
            let z = sample_limit_process(&spec)?;
            Ok(RescaledProcess {
                z0: C64::new(0.0, 0.0),
                h: 1.0,
                window_radius: cfg.window_radius,
                points: z.zeros,
            })
        })
        .collect()
}

/// Runs `f` on a pool with `threads` workers (0 = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
