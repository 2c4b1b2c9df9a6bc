//! Rescaled spectra as point processes in a disk window, and their empirical
//! statistics: intensity, pair correlation with exact disk edge correction,
//! Weyl counts and two-sample comparisons.

use crate::matrix::C64;
use crate::symbols::{phase_space_volume, Rect, SymbolModel};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Number of bins used when none are given.
pub const DEFAULT_BINS: usize = 40;
/// Per-bin z-score bound of the two-sample test.
pub const MAX_Z: f64 = 4.0;
/// Mean absolute z-score bound of the two-sample test.
pub const MEAN_Z: f64 = 1.5;

/// Eigenvalues of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub h: f64,
    pub delta: f64,
    pub seed: u64,
    pub ensemble_tag: String,
    pub eigenvalues: Vec<C64>,
}

impl SpectrumRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.delta >= 0.0) || self.ensemble_tag.is_empty() {
            return Err(Error::InvalidArgument("spectrum record needs h > 0, delta >= 0 and a tag".into()));
        }
        if self.eigenvalues.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
        }
        Ok(())
    }
}

/// Points `w = (z - z0) / sqrt(h)` with `|w| < window_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledProcess {
    pub z0: C64,
    pub h: f64,
    pub window_radius: f64,
    pub points: Vec<C64>,
}

impl RescaledProcess {
    /// The same realization seen through a smaller concentric window.
    pub fn restrict(&self, radius: f64) -> RescaledProcess {
        let radius = radius.min(self.window_radius);
        RescaledProcess {
            z0: self.z0,
            h: self.h,
            window_radius: radius,
            points: self.points.iter().copied().filter(|w| w.norm() < radius).collect(),
        }
    }

    /// Maps the points back to the spectral plane.
    pub fn unscaled(&self) -> Vec<C64> {
        let s = self.h.sqrt();
        self.points.iter().map(|w| self.z0 + w * s).collect()
    }

    pub fn area(&self) -> f64 {
        PI * self.window_radius * self.window_radius
    }
}

pub fn rescale(spectrum: &SpectrumRecord, z0: C64, r: f64) -> Result<RescaledProcess> {
    if !(r > 0.0) || !(spectrum.h > 0.0) {
        return Err(Error::InvalidArgument(format!("R = {r}, h = {}", spectrum.h)));
    }
    let s = spectrum.h.sqrt();
    Ok(RescaledProcess {
        z0,
        h: spectrum.h,
        window_radius: r,
        points: spectrum
            .eigenvalues
            .iter()
            .map(|z| (z - z0) / s)
            .filter(|w| w.norm() < r)
            .collect(),
    })
}

/// Area of the intersection of a disk of radius `r_win` with its translate by `r`.
pub fn set_covariance(r: f64, r_win: f64) -> f64 {
    if r >= 2.0 * r_win {
        return 0.0;
    }
    let x = r / (2.0 * r_win);
    2.0 * r_win * r_win * x.acos() - 0.5 * r * (4.0 * r_win * r_win - r * r).sqrt()
}

/// `int_{sqrt a}^{sqrt b} 2 pi r A_cov(r) dr`, the Poisson reference for
/// ordered pairs per unit squared intensity with squared separation in `[a, b)`.
pub fn pair_measure(a: f64, b: f64, r_win: f64) -> f64 {
    weighted_pair_measure(a, b, r_win, |_| 1.0)
}

// With r = 2R cos(phi) the set covariance is R^2 (2 phi - sin 2 phi) and the
// integrand is smooth on the whole range.
fn weighted_pair_measure(a: f64, b: f64, r_win: f64, f: impl Fn(f64) -> f64) -> f64 {
    let s_max = 4.0 * r_win * r_win;
    let (a, b) = (a.max(0.0), b.min(s_max));
    if b <= a {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_cached();
    let phi_hi = (a.sqrt() / (2.0 * r_win)).min(1.0).acos();
    let phi_lo = (b.sqrt() / (2.0 * r_win)).min(1.0).acos();
    let panels = 8;
    let r2 = r_win * r_win;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = phi_lo + (phi_hi - phi_lo) * p as f64 / panels as f64;
        let hi = phi_lo + (phi_hi - phi_lo) * (p + 1) as f64 / panels as f64;
        for (t, w) in nodes.iter().zip(weights) {
            let phi = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
            let r = 2.0 * r_win * phi.cos();
            let cov = r2 * (2.0 * phi - (2.0 * phi).sin());
            // 2 pi r dr with dr = 2R sin(phi) dphi
            total += 0.5 * (hi - lo) * w * 2.0 * PI * r * cov * 2.0 * r_win * phi.sin() * f(r * r);
        }
    }
    total
}

fn gauss_legendre_cached() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| crate::symbols::gauss_legendre(32))
}

/// Average of `curve(r2)` over a bin, weighted by the distribution of pair
/// separations in the window.
pub fn bin_average(curve: impl Fn(f64) -> f64, a: f64, b: f64, r_win: f64) -> f64 {
    let den = pair_measure(a, b, r_win);
    if den == 0.0 {
        return curve(0.5 * (a + b));
    }
    weighted_pair_measure(a, b, r_win, curve) / den
}

/// `n` equal-width squared-separation bins on `[0, max_r2]`.
pub fn uniform_bin_edges(max_r2: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| max_r2 * k as f64 / n as f64).collect()
}

/// Default bins: 40 equal bins on `[0, 9 / min sigma]`.
pub fn default_bin_edges(min_sigma: f64) -> Vec<f64> {
    uniform_bin_edges(9.0 / min_sigma, DEFAULT_BINS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub bin_edges: Vec<f64>,
    pub pair_counts: Vec<u64>,
    pub khat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
    pub pooled_intensity: f64,
}

impl CorrelationEstimate {
    pub fn bins(&self) -> usize {
        self.khat.len()
    }

    pub fn bin_midpoints(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }
}

fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|e| !(e[1] > e[0])) {
        return Err(Error::InvalidArgument("bin edges must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

fn common_window(processes: &[RescaledProcess]) -> Result<f64> {
    let first = processes.first().ok_or(Error::EmptyEnsemble)?;
    if processes
        .iter()
        .any(|p| p.z0 != first.z0 || p.window_radius != first.window_radius)
    {
        return Err(Error::InvalidArgument("processes must share z0 and window radius".into()));
    }
    Ok(first.window_radius)
}

/// Ordered pair counts of one realization per squared-separation bin.
fn pair_counts(points: &[C64], edges: &[f64]) -> Vec<u64> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0u64; bins];
    for (i, a) in points.iter().enumerate() {
        for b in &points[..i] {
            let d = (a - b).norm_sqr();
            if d >= lo && d < hi {
                let k = edges.partition_point(|&e| e <= d) - 1;
                counts[k] += 2;
            }
        }
    }
    counts
}

/// Pooled pair correlation over an ensemble of realizations observed in the
/// same disk window.
pub fn pair_correlation(processes: &[RescaledProcess], bin_edges: &[f64]) -> Result<CorrelationEstimate> {
    let r_win = common_window(processes)?;
    validate_edges(bin_edges)?;
    let m = processes.len();
    if m < 2 {
        return Err(Error::InvalidArgument("pair correlation needs at least two realizations".into()));
    }
    let bins = bin_edges.len() - 1;
    let area = PI * r_win * r_win;
    let per: Vec<Vec<u64>> = processes.iter().map(|p| pair_counts(&p.points, bin_edges)).collect();
    let sizes: Vec<usize> = processes.iter().map(|p| p.points.len()).collect();
    let total_points: usize = sizes.iter().sum();
    if total_points == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mut counts = vec![0u64; bins];
    for c in &per {
        for (t, x) in counts.iter_mut().zip(c) {
            *t += x;
        }
    }
    let gamma: Vec<f64> = bin_edges.windows(2).map(|e| pair_measure(e[0], e[1], r_win)).collect();
    let lambda = total_points as f64 / (m as f64 * area);
    let any_pairs = counts.iter().any(|&c| c > 0);
    if any_pairs {
        for (k, g) in gamma.iter().enumerate() {
            let expected = m as f64 * lambda * lambda * g;
            if expected < 1.0 {
                return Err(Error::BinDegenerate {
                    lo: bin_edges[k],
                    hi: bin_edges[k + 1],
                    expected,
                });
            }
        }
    }
    let estimate = |counts: &[u64], n_points: usize, m: usize| -> Vec<f64> {
        let lam = n_points as f64 / (m as f64 * area);
        counts
            .iter()
            .zip(&gamma)
            .map(|(&c, &g)| {
                let den = m as f64 * lam * lam * g;
                if den > 0.0 {
                    c as f64 / den
                } else {
                    0.0
                }
            })
            .collect()
    };
    let khat = estimate(&counts, total_points, m);
    // delete-one jackknife over realizations
    let loo: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let c: Vec<u64> = counts.iter().zip(&per[i]).map(|(t, x)| t - x).collect();
            estimate(&c, total_points - sizes[i], m - 1)
        })
        .collect();
    let stderr = (0..bins)
        .map(|k| {
            let mean = loo.iter().map(|v| v[k]).sum::<f64>() / m as f64;
            let ss: f64 = loo.iter().map(|v| (v[k] - mean).powi(2)).sum();
            ((m as f64 - 1.0) / m as f64 * ss).sqrt()
        })
        .collect();
    Ok(CorrelationEstimate {
        bin_edges: bin_edges.to_vec(),
        pair_counts: counts,
        khat,
        stderr,
        realizations: m,
        pooled_intensity: lambda,
    })
}

/// Points per unit window area, with its delete-one jackknife standard error.
pub fn intensity(processes: &[RescaledProcess]) -> (f64, f64) {
    let m = processes.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    let densities: Vec<f64> = processes.iter().map(|p| p.points.len() as f64 / p.area()).collect();
    let total: f64 = densities.iter().sum();
    let mean = total / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let loo: Vec<f64> = densities.iter().map(|d| (total - d) / (m - 1) as f64).collect();
    let lm = loo.iter().sum::<f64>() / m as f64;
    let var = (m as f64 - 1.0) / m as f64 * loo.iter().map(|x| (x - lm).powi(2)).sum::<f64>();
    (mean, var.sqrt())
}

/// Mean number of eigenvalues in `gamma` and the phase-space prediction
/// `vol(p^{-1}(gamma)) / (2 pi h)`.
pub fn weyl_count(spectra: &[SpectrumRecord], model: SymbolModel, gamma: Rect) -> Result<(f64, f64)> {
    let first = spectra.first().ok_or(Error::EmptyEnsemble)?;
    if spectra.iter().any(|s| s.h != first.h) {
        return Err(Error::InvalidArgument("spectra must share h".into()));
    }
    if gamma.area() == 0.0 {
        return Ok((0.0, 0.0));
    }
    let total: usize = spectra
        .iter()
        .map(|s| s.eigenvalues.iter().filter(|z| gamma.contains(**z)).count())
        .sum();
    let mean = total as f64 / spectra.len() as f64;
    let predicted = phase_space_volume(model, gamma)? / (2.0 * PI * first.h);
    Ok((mean, predicted))
}

/// Per-bin z-scores and the pass decision of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub mean_abs_z: f64,
    pub pass: bool,
}

impl Deviation {
    fn from_z(z: Vec<f64>, max_z: f64, mean_z: f64) -> Self {
        let max_abs_z = z.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mean_abs_z = if z.is_empty() {
            0.0
        } else {
            z.iter().map(|x| x.abs()).sum::<f64>() / z.len() as f64
        };
        Deviation {
            pass: max_abs_z <= max_z && mean_abs_z <= mean_z,
            z,
            max_abs_z,
            mean_abs_z,
        }
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Compares two estimates bin by bin; passes iff `max |z| <= 4` and `mean |z| <= 1.5`.
pub fn two_sample_correlation_test(a: &CorrelationEstimate, b: &CorrelationEstimate) -> Result<Deviation> {
    if a.bin_edges != b.bin_edges {
        return Err(Error::BinMismatch);
    }
    let z = (0..a.bins())
        .map(|k| z_score(a.khat[k] - b.khat[k], a.stderr[k].hypot(b.stderr[k])))
        .collect();
    Ok(Deviation::from_z(z, MAX_Z, MEAN_Z))
}

/// Compares an estimate with bin-averaged values of a theoretical curve.
pub fn deviation_from_curve(est: &CorrelationEstimate, theory: &[f64], max_z: f64, mean_z: f64) -> Result<Deviation> {
    if theory.len() != est.bins() {
        return Err(Error::BinMismatch);
    }
    let z = (0..est.bins())
        .map(|k| z_score(est.khat[k] - theory[k], est.stderr[k]))
        .collect();
    Ok(Deviation::from_z(z, max_z, mean_z))
}

/// Bin averages of `curve` for the bins of `est` in a window of radius `r_win`.
pub fn theory_bins(edges: &[f64], r_win: f64, curve: impl Fn(f64) -> f64) -> Vec<f64> {
    edges.windows(2).map(|e| bin_average(&curve, e[0], e[1], r_win)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(eigs: Vec<C64>) -> SpectrumRecord {
        SpectrumRecord {
            h: 0.01,
            delta: 1e-8,
            seed: 1,
            ensemble_tag: "t".into(),
            eigenvalues: eigs,
        }
    }

    #[test]
    fn rescale_window() {
        let z0 = C64::new(1.0, 0.5);
        let r = 3.0;
        let p = rescale(&record(vec![z0, z0 + 0.1 * (r + 1.0)]), z0, r).unwrap();
        assert_eq!(p.points, vec![C64::new(0.0, 0.0)]);
    }

    #[test]
    fn unscale_inverts_rescale() {
        let z0 = C64::new(1.6, 0.0);
        let eigs: Vec<C64> = (0..20).map(|k| z0 + C64::new(0.01 * k as f64, -0.02 * k as f64 + 0.1)).collect();
        let p = rescale(&record(eigs.clone()), z0, 100.0).unwrap();
        for (a, b) in p.unscaled().iter().zip(&eigs) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn set_covariance_limits() {
        assert!((set_covariance(0.0, 2.0) - PI * 4.0).abs() < 1e-12);
        assert_eq!(set_covariance(4.0, 2.0), 0.0);
        // total ordered-pair measure equals area^2
        let total = pair_measure(0.0, 16.0, 2.0);
        assert!((total - (PI * 4.0).powi(2)).abs() < 1e-9 * total);
    }

    #[test]
    fn pairs_never_cross_realizations() {
        let mk = |w: C64| RescaledProcess {
            z0: C64::new(0.0, 0.0),
            h: 0.01,
            window_radius: 2.0,
            points: vec![w],
        };
        let est = pair_correlation(&[mk(C64::new(0.1, 0.0)), mk(C64::new(0.2, 0.0))], &uniform_bin_edges(4.0, 8)).unwrap();
        assert!(est.khat.iter().all(|&k| k == 0.0));
        assert_eq!(est.pair_counts.iter().sum::<u64>(), 0);
    }

    #[test]
    fn errors() {
        assert!(matches!(pair_correlation(&[], &[0.0, 1.0]), Err(Error::EmptyEnsemble)));
        let p = RescaledProcess {
            z0: C64::new(0.0, 0.0),
            h: 0.01,
            window_radius: 1.0,
            points: vec![C64::new(0.0, 0.0), C64::new(0.1, 0.0)],
        };
        let r = pair_correlation(&[p.clone(), p], &uniform_bin_edges(3.9, 3));
        assert!(matches!(r, Err(Error::BinDegenerate { .. })));
    }

    #[test]
    fn intensity_of_empty_processes() {
        let p = RescaledProcess {
            z0: C64::new(0.0, 0.0),
            h: 0.01,
            window_radius: 1.0,
            points: vec![],
        };
        assert_eq!(intensity(&[p.clone(), p]), (0.0, 0.0));
    }

    #[test]
    fn identical_estimates_pass() {
        let est = CorrelationEstimate {
            bin_edges: vec![0.0, 1.0, 2.0],
            pair_counts: vec![3, 4],
            khat: vec![0.5, 0.9],
            stderr: vec![0.1, 0.1],
            realizations: 3,
            pooled_intensity: 0.3,
        };
        let d = two_sample_correlation_test(&est, &est).unwrap();
        assert_eq!(d.max_abs_z, 0.0);
        assert!(d.pass);
        let mut other = est.clone();
        other.bin_edges[1] = 1.5;
        assert!(matches!(two_sample_correlation_test(&est, &other), Err(Error::BinMismatch)));
    }

    #[test]
    fn bin_average_of_constant() {
        assert!((bin_average(|_| 2.5, 0.3, 7.0, 3.0) - 2.5).abs() < 1e-12);
    }
}
