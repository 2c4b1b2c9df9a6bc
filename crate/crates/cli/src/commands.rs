//! The five subcommands. Each returns whether its statistical check passed;
//! hard failures are errors.

use crate::config::{ExperimentConfig, Theory};
use crate::csvio::{
    read_corr, read_rescaled, write_corr, write_curves, write_rescaled, write_spectra, CurvePoint, RescaledEnsemble,
};
use crate::experiment::{gaf_tag, rescale_all, run_gaf, run_spectra};
use crate::{svg, CliError};
use shellzeros::limits::{ginibre_2pt_correlation, kappa, limit_2pt_correlation_v};
use shellzeros::pointprocess::{
    deviation_from_curve, intensity, pair_correlation, theory_bins, uniform_bin_edges, weyl_count, CorrelationEstimate,
    Deviation, RescaledProcess,
};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    StatisticalFail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::StatisticalFail => 2,
        }
    }
}

/// Writes all files or none: on any failure the files already written are removed.
pub fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, content) in files {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(())
}

pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spectra = run_spectra(cfg)?;
    let processes = rescale_all(cfg, &spectra)?;
    let ens = RescaledEnsemble {
        ensemble: cfg.ensemble_tag(),
        processes,
    };
    write_outputs(
        &cfg.out_dir,
        &[("spectra.csv", write_spectra(&spectra)), ("rescaled.csv", write_rescaled(&ens)?)],
    )?;
    let (d, se) = intensity(&ens.processes);
    println!(
        "{} realizations, dimension {}, rescaled intensity {d:.4} +- {se:.4}",
        spectra.len(),
        spectra.first().map_or(0, |s| s.eigenvalues.len())
    );
    Ok(Outcome::Pass)
}

pub fn cmd_gaf(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let processes = run_gaf(cfg)?;
    let ens = RescaledEnsemble {
        ensemble: gaf_tag(cfg).to_string(),
        processes,
    };
    write_outputs(&cfg.out_dir, &[("rescaled.csv", write_rescaled(&ens)?)])?;
    let (d, se) = intensity(&ens.processes);
    println!("{} realizations, zero density {d:.4} +- {se:.4}", ens.processes.len());
    Ok(Outcome::Pass)
}

/// Bin edges from the configuration: `bins` equal bins up to `max_r2`,
/// which defaults to `9 / min sigma`.
pub fn bin_edges(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    let max_r2 = match cfg.max_r2 {
        Some(m) => m,
        None => {
            let (plus, minus) = cfg.sigma_lists()?;
            9.0 / plus.iter().chain(&minus).fold(f64::INFINITY, |a, &b| a.min(b))
        }
    };
    Ok(uniform_bin_edges(max_r2, cfg.bins))
}

/// Pools the realizations of several rescaled files restricted to the statistics radius.
pub fn load_processes(cfg: &ExperimentConfig, inputs: &[PathBuf]) -> Result<Vec<RescaledProcess>, CliError> {
    let mut all: Vec<RescaledProcess> = Vec::new();
    for path in inputs {
        let text = std::fs::read_to_string(path)?;
        let ens = read_rescaled(&text)?;
        if let (Some(a), Some(b)) = (all.first(), ens.processes.first()) {
            if a.z0 != b.z0 || a.window_radius != b.window_radius {
                return Err(CliError::MetadataMismatch(format!(
                    "{} has z0 = {}, R = {} but earlier inputs have z0 = {}, R = {}",
                    path.display(),
                    b.z0,
                    b.window_radius,
                    a.z0,
                    a.window_radius
                )));
            }
        }
        all.extend(ens.processes);
    }
    let r = cfg.effective_stats_radius();
    Ok(all.iter().map(|p| p.restrict(r)).collect())
}

pub fn correlate(cfg: &ExperimentConfig, processes: &[RescaledProcess]) -> Result<CorrelationEstimate, CliError> {
    Ok(pair_correlation(processes, &bin_edges(cfg)?)?)
}

pub fn cmd_correlate(cfg: &ExperimentConfig, inputs: &[PathBuf]) -> Result<Outcome, CliError> {
    let processes = load_processes(cfg, inputs)?;
    let est = correlate(cfg, &processes)?;
    write_outputs(&cfg.out_dir, &[("corr.csv", write_corr(&est))])?;
    println!(
        "{} realizations, pooled intensity {:.4}, {} bins",
        est.realizations,
        est.pooled_intensity,
        est.bins()
    );
    Ok(Outcome::Pass)
}

/// The selected theoretical two-point curve as a function of `r2`.
pub fn theory_curve(cfg: &ExperimentConfig) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>, CliError> {
    let (plus, minus) = cfg.sigma_lists()?;
    Ok(match cfg.theory {
        Theory::K2v => Box::new(move |r2| limit_2pt_correlation_v(r2, &plus)),
        Theory::Ginibre => {
            let total: f64 = plus.iter().chain(&minus).sum();
            Box::new(move |r2| ginibre_2pt_correlation(r2, total))
        }
        Theory::Kappa => {
            let s = plus[0];
            Box::new(move |r2| kappa(s * r2 / 2.0))
        }
    })
}

/// Bin-averaged theory and the deviation of `est` from it.
pub fn compare(cfg: &ExperimentConfig, est: &CorrelationEstimate) -> Result<(Vec<f64>, Deviation), CliError> {
    let curve = theory_curve(cfg)?;
    let binned = theory_bins(&est.bin_edges, cfg.effective_stats_radius(), |r2| curve(r2));
    let dev = deviation_from_curve(est, &binned, cfg.max_z, cfg.mean_z)?;
    Ok((binned, dev))
}

pub fn report_text(cfg: &ExperimentConfig, est: &CorrelationEstimate, binned: &[f64], dev: &Deviation) -> String {
    let mut s = format!(
        "theory {}\nmax_abs_z {:.4}\nmean_abs_z {:.4}\nthresholds max {} mean {}\nresult {}\n\nbin_lo_r2 bin_hi_r2 khat stderr theory z\n",
        cfg.theory.name(),
        dev.max_abs_z,
        dev.mean_abs_z,
        cfg.max_z,
        cfg.mean_z,
        if dev.pass { "pass" } else { "fail" }
    );
    for k in 0..est.bins() {
        s += &format!(
            "{:.4} {:.4} {:.4} {:.4} {:.4} {:.2}\n",
            est.bin_edges[k],
            est.bin_edges[k + 1],
            est.khat[k],
            est.stderr[k],
            binned[k],
            dev.z[k]
        );
    }
    s
}

pub fn cmd_report(cfg: &ExperimentConfig, corr: &Path) -> Result<Outcome, CliError> {
    let est = read_corr(&std::fs::read_to_string(corr)?)?;
    let (binned, dev) = compare(cfg, &est)?;
    let curve = theory_curve(cfg)?;
    let x_max = *est.bin_edges.last().unwrap();
    let dense: Vec<(f64, f64)> = (0..=200)
        .map(|k| {
            let x = x_max * k as f64 / 200.0;
            (x, curve(x))
        })
        .collect();
    let name = cfg.theory.name();
    let mut points: Vec<CurvePoint> = dense
        .iter()
        .map(|&(r2, value)| CurvePoint {
            r2,
            value,
            curve: name.to_string(),
        })
        .collect();
    points.extend(est.bin_midpoints().iter().zip(&binned).map(|(&r2, &value)| CurvePoint {
        r2,
        value,
        curve: format!("{name}_binned"),
    }));
    let text = report_text(cfg, &est, &binned, &dev);
    let title = format!("pair correlation vs {name}: max|z| {:.2}, mean|z| {:.2}", dev.max_abs_z, dev.mean_abs_z);
    write_outputs(
        &cfg.out_dir,
        &[
            ("curves.csv", write_curves(&points)),
            ("report.txt", text.clone()),
            ("figure.svg", svg::correlation_figure(&est, &dense, &title)),
        ],
    )?;
    print!("{text}");
    Ok(if dev.pass { Outcome::Pass } else { Outcome::StatisticalFail })
}

pub fn cmd_weyl(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let gamma = cfg
        .gamma
        .ok_or_else(|| CliError::Config("weyl needs gamma = re_lo, re_hi, im_lo, im_hi".into()))?;
    let spectra = run_spectra(cfg)?;
    let (mean, predicted) = weyl_count(&spectra, cfg.symbol(), gamma)?;
    let rel = if predicted > 0.0 { (mean - predicted) / predicted } else { 0.0 };
    println!("mean_count {mean:.4}\npredicted {predicted:.4}\nrelative_deviation {rel:.4}");
    Ok(if rel.abs() <= cfg.weyl_tolerance {
        Outcome::Pass
    } else {
        Outcome::StatisticalFail
    })
}
