use proptest::prelude::*;
use shellzeros::eigensolver::eigenvalues;
use shellzeros::gaf::{find_zeros, sample_gaf};
use shellzeros::limits::kappa;
use shellzeros::operators::{build_unperturbed, BasisSpec};
use shellzeros::pointprocess::{
    deviation_from_curve, intensity, pair_correlation, rescale, theory_bins, two_sample_correlation_test,
    uniform_bin_edges, weyl_count, RescaledProcess, SpectrumRecord,
};
use shellzeros::rng::{derive_seed, Stream};
use shellzeros::symbols::{Rect, SymbolModel};
use shellzeros::{CMatrix, C64};
use std::f64::consts::{FRAC_PI_4, PI};

fn process(points: Vec<C64>, r: f64) -> RescaledProcess {
    RescaledProcess {
        z0: C64::new(0.0, 0.0),
        h: 1.0,
        window_radius: r,
        points,
    }
}

fn poisson_ensemble(m: u64, lambda: f64, r: f64, master: u64) -> Vec<RescaledProcess> {
    (0..m)
        .map(|k| {
            let mut s = Stream::new(derive_seed(master, k));
            let n = s.poisson(lambda * PI * r * r);
            process((0..n).map(|_| s.point_in_disk(r)).collect(), r)
        })
        .collect()
}

#[test]
fn poisson_input_is_flat_within_errors() {
    let edges = uniform_bin_edges(16.0, 20);
    let mut outside = 0;
    let mut total = 0;
    for rep in 0..50 {
        let est = pair_correlation(&poisson_ensemble(200, 1.0, 3.0, rep), &edges).unwrap();
        for k in 0..est.bins() {
            total += 1;
            if (est.khat[k] - 1.0).abs() > 3.0 * est.stderr[k] {
                outside += 1;
            }
        }
    }
    assert!(outside as f64 <= 0.05 * total as f64, "{outside} of {total} bins outside 3 se");
}

#[test]
fn estimator_ignores_global_rotations() {
    let ens = poisson_ensemble(50, 1.0, 3.0, 77);
    let edges = uniform_bin_edges(16.0, 20);
    let base = pair_correlation(&ens, &edges).unwrap();
    let rot = C64::from_polar(1.0, 1.234);
    let turned: Vec<RescaledProcess> = ens
        .iter()
        .map(|p| process(p.points.iter().map(|w| w * rot).collect(), p.window_radius))
        .collect();
    let other = pair_correlation(&turned, &edges).unwrap();
    for k in 0..base.bins() {
        assert!((base.khat[k] - other.khat[k]).abs() <= 1e-12 * base.khat[k].abs().max(1.0));
    }
}

fn gaf_ensemble(sigma: f64, r: f64, m: u64, master: u64) -> Vec<RescaledProcess> {
    (0..m)
        .map(|k| {
            let g = sample_gaf(sigma, r, derive_seed(master, k)).unwrap();
            process(find_zeros(&g).unwrap().zeros, r)
        })
        .collect()
}

#[test]
fn gaf_zeros_follow_the_kappa_curve() {
    let (sigma, r) = (0.5, 4.0);
    let ens = gaf_ensemble(sigma, r, 600, 3);
    let edges = uniform_bin_edges(9.0 / sigma, 20);
    let est = pair_correlation(&ens, &edges).unwrap();
    let theory = theory_bins(&edges, r, |r2| kappa(sigma * r2 / 2.0));
    let outside = (0..est.bins())
        .filter(|&k| (est.khat[k] - theory[k]).abs() > 3.0 * est.stderr[k])
        .count();
    assert!(outside <= 1, "{outside} bins outside 3 se");
    let dev = deviation_from_curve(&est, &theory, 4.0, 1.5).unwrap();
    assert!(dev.pass, "{dev:?}");
    let (d, se) = intensity(&ens);
    assert!((d - sigma / PI).abs() < 3.0 * se, "intensity {d} +- {se}");
}

/// Eigenvalues of an `n x n` Ginibre matrix scaled to density `sigma / pi`.
fn ginibre_ensemble(sigma: f64, r: f64, m: u64, n: usize, master: u64) -> Vec<RescaledProcess> {
    (0..m)
        .map(|k| {
            let mut s = Stream::new(derive_seed(master, k));
            let scale = 1.0 / (n as f64).sqrt();
            let g = CMatrix::from_fn(n, n, |_, _| s.complex_gaussian() * scale);
            let stretch = (n as f64 / sigma).sqrt();
            let pts = eigenvalues(&g)
                .unwrap()
                .eigenvalues
                .iter()
                .map(|z| z * stretch)
                .filter(|w| w.norm() < r)
                .collect();
            process(pts, r)
        })
        .collect()
}

#[test]
fn ginibre_sample_is_told_apart_from_gaf_zeros() {
    let (sigma, r) = (0.5, 4.0);
    let edges = uniform_bin_edges(9.0 / sigma, 20);
    let gaf = pair_correlation(&gaf_ensemble(sigma, r, 400, 8), &edges).unwrap();
    let gin = pair_correlation(&ginibre_ensemble(sigma, r, 400, 100, 9), &edges).unwrap();
    // both have intensity sigma / pi
    assert!((gin.pooled_intensity - sigma / PI).abs() < 0.01, "{}", gin.pooled_intensity);
    let dev = two_sample_correlation_test(&gaf, &gin).unwrap();
    assert!(!dev.pass, "{dev:?}");
    let same = pair_correlation(&gaf_ensemble(sigma, r, 400, 10), &edges).unwrap();
    assert!(two_sample_correlation_test(&gaf, &same).unwrap().pass);
}

#[test]
fn oscillator_spectrum_rescales_to_a_lattice() {
    let h = 0.01;
    let op = build_unperturbed(
        SymbolModel::ComplexHarmonicOscillator,
        BasisSpec::ScaledHermite { h, n_max: 60 },
        h,
        0.0,
    )
    .unwrap();
    let record = SpectrumRecord {
        h,
        delta: 0.0,
        seed: 0,
        ensemble_tag: "ho".into(),
        eigenvalues: eigenvalues(&op.matrix).unwrap().eigenvalues,
    };
    let dir = C64::from_polar(1.0, FRAC_PI_4);
    let z0 = dir * h * 10.5;
    let rp = rescale(&record, z0, 1.0).unwrap();
    let mut w = rp.points.clone();
    w.sort_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap());
    let mut along: Vec<f64> = w.iter().map(|p| (p / dir).re).collect();
    along.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(along.len(), 10);
    for p in &w {
        assert!((p / dir).im.abs() < 1e-8, "{p} off the ray");
    }
    // eigenvalues e^{i pi/4} h (2n + 1) are 2h apart
    for pair in along.windows(2) {
        assert!((pair[1] - pair[0] - 2.0 * h.sqrt()).abs() < 1e-8, "{pair:?}");
    }
}

#[test]
fn predicted_weyl_count_scales_as_inverse_h() {
    let gamma = Rect::new(0.5, 1.5, 0.5, 1.5);
    let model = SymbolModel::ComplexHarmonicOscillator;
    let mut scaled = Vec::new();
    for h in [0.1, 0.05, 0.02, 0.01] {
        let rec = SpectrumRecord {
            h,
            delta: 0.0,
            seed: 0,
            ensemble_tag: "t".into(),
            eigenvalues: vec![],
        };
        let (_, predicted) = weyl_count(&[rec], model, gamma).unwrap();
        scaled.push(predicted * h);
    }
    for s in &scaled {
        assert!((s / scaled[0] - 1.0).abs() < 1e-9);
    }
    let volume = 4.0 * (1.5f64.sqrt() - 0.5f64.sqrt()).powi(2);
    assert!((scaled[0] - volume / (2.0 * PI)).abs() < 1e-3 * scaled[0], "{}", scaled[0]);
}

#[test]
fn unperturbed_torus_spectrum_stays_real() {
    let h = 0.05;
    let k_max = 40;
    let model = SymbolModel::TorusExp { q: 1 };
    let op = build_unperturbed(model, BasisSpec::FourierTorus { k_max }, h, 0.0).unwrap();
    let rec = SpectrumRecord {
        h,
        delta: 0.0,
        seed: 0,
        ensemble_tag: "torus".into(),
        eigenvalues: eigenvalues(&op.matrix).unwrap().eigenvalues,
    };
    let gamma = Rect::new(0.5, 1.5, -0.1, 0.1);
    let (count, predicted) = weyl_count(&[rec.clone()], model, gamma).unwrap();
    let exact = (-(k_max as i64)..=k_max as i64)
        .filter(|&k| {
            let e = (h * k as f64).powi(2);
            (0.5..=1.5).contains(&e)
        })
        .count();
    assert_eq!(count, exact as f64);
    assert!((count - predicted).abs() > 1.0, "{count} vs {predicted}");
    assert!(rec.eigenvalues.iter().all(|z| z.im.abs() < 1e-12));
}

#[test]
fn intensity_edge_cases() {
    assert_eq!(intensity(&[]), (0.0, 0.0));
    let empty = vec![process(vec![], 2.0); 3];
    assert_eq!(intensity(&empty), (0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescaling_round_trips(re in -2.0f64..2.0, im in -2.0f64..2.0, h in 1e-3f64..0.5, seed in any::<u64>()) {
        let z0 = C64::new(re, im);
        let mut s = Stream::new(seed);
        let eigs: Vec<C64> = (0..20).map(|_| z0 + s.point_in_disk(3.0) * h.sqrt()).collect();
        let rec = SpectrumRecord { h, delta: 0.0, seed, ensemble_tag: "p".into(), eigenvalues: eigs.clone() };
        let rp = rescale(&rec, z0, 10.0).unwrap();
        prop_assert_eq!(rp.points.len(), eigs.len());
        for (a, b) in rp.unscaled().iter().zip(&eigs) {
            prop_assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn pair_counts_are_order_independent(seed in any::<u64>()) {
        let mut ens = poisson_ensemble(6, 1.0, 2.0, seed);
        let edges = uniform_bin_edges(9.0, 6);
        let a = pair_correlation(&ens, &edges);
        ens.reverse();
        for p in ens.iter_mut() {
            p.points.reverse();
        }
        let b = pair_correlation(&ens, &edges);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.pair_counts, b.pair_counts),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "outcomes differ"),
        }
    }
}
