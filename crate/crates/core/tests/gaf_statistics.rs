use proptest::prelude::*;
use shellzeros::gaf::{
    find_zeros, sample_gaf, sample_limit_process, translate_process, LimitKind, LimitProcessSpec, MERGE_DISTANCE,
    RESIDUAL_TOLERANCE,
};
use shellzeros::pointprocess::{pair_correlation, two_sample_correlation_test, uniform_bin_edges, RescaledProcess};
use shellzeros::rng::derive_seed;
use shellzeros::C64;
use std::f64::consts::PI;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn covariance_kernel_by_monte_carlo() {
    let sigma = 1.0;
    let (z, w) = (C64::new(0.3, 0.0), C64::new(0.5, 0.2));
    let mut re = Vec::new();
    let mut im = Vec::new();
    let mut gz2 = Vec::new();
    let mut g0 = Vec::new();
    for k in 0..5000 {
        let g = sample_gaf(sigma, 1.0, derive_seed(100, k)).unwrap();
        let prod = g.eval(z) * g.eval(w).conj();
        re.push(prod.re);
        im.push(prod.im);
        gz2.push(g.eval(w).norm_sqr());
        g0.push(g.eval(C64::new(0.0, 0.0)).norm_sqr());
    }
    let want = (sigma * z * w.conj()).exp();
    let (mr, sr) = mean_se(&re);
    let (mi, si) = mean_se(&im);
    assert!((mr - want.re).abs() < 4.0 * sr, "re {mr} vs {} (se {sr})", want.re);
    assert!((mi - want.im).abs() < 4.0 * si, "im {mi} vs {} (se {si})", want.im);
    let (m2, s2) = mean_se(&gz2);
    let want2 = (sigma * w.norm_sqr()).exp();
    assert!((m2 - want2).abs() < 4.0 * s2, "E|g(w)|^2 {m2} vs {want2}");
    let (m0, s0) = mean_se(&g0);
    assert!((m0 - 1.0).abs() < 4.0 * s0, "E|g(0)|^2 {m0}");
}

fn zero_counts(sigma: f64, r: f64, samples: u64, master: u64) -> Vec<f64> {
    (0..samples)
        .map(|k| {
            let g = sample_gaf(sigma, r, derive_seed(master, k)).unwrap();
            find_zeros(&g).unwrap().len() as f64
        })
        .collect()
}

#[test]
fn expected_zero_count_is_sigma_r_squared() {
    for (sigma, r) in [(1.0, 3.0), (0.5, 4.0)] {
        let counts = zero_counts(sigma, r, 2000, 7);
        let (m, se) = mean_se(&counts);
        let want = sigma * r * r;
        assert!((m - want).abs() < 4.0 * se, "sigma {sigma}: {m} vs {want} (se {se})");
    }
}

#[test]
fn zero_counts_are_rigid() {
    // number variance grows like the perimeter, far below the Poisson value
    let counts = zero_counts(1.0, 3.0, 1000, 9);
    let (m, _) = mean_se(&counts);
    let var = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (counts.len() as f64 - 1.0);
    assert!(var < 0.5 * m, "variance {var} vs mean {m}");
}

fn gaf_processes(sigma: f64, r: f64, samples: u64, master: u64, scale: f64) -> Vec<RescaledProcess> {
    (0..samples)
        .map(|k| {
            let g = sample_gaf(sigma, r, derive_seed(master, k)).unwrap();
            let z = find_zeros(&g).unwrap();
            RescaledProcess {
                z0: C64::new(0.0, 0.0),
                h: 1.0,
                window_radius: r * scale,
                points: z.zeros.iter().map(|w| w * scale).collect(),
            }
        })
        .collect()
}

#[test]
fn dilation_maps_parameters_onto_each_other() {
    // sqrt(sigma) * zeros of g_sigma has the law of the zeros of g_1
    let edges = uniform_bin_edges(6.0, 12);
    let a = pair_correlation(&gaf_processes(2.0, 2.5 / 2f64.sqrt(), 600, 1, 2f64.sqrt()), &edges).unwrap();
    let b = pair_correlation(&gaf_processes(1.0, 2.5, 600, 2, 1.0), &edges).unwrap();
    let dev = two_sample_correlation_test(&a, &b).unwrap();
    assert!(dev.pass, "{dev:?}");
    assert!((a.pooled_intensity - 1.0 / PI).abs() < 0.03, "{}", a.pooled_intensity);
}

#[test]
fn determinant_process_count_is_two_sigma_r_squared() {
    let (sigma, r) = (1.0, 2.0);
    let counts: Vec<f64> = (0..300)
        .map(|k| {
            let spec = LimitProcessSpec {
                kind: LimitKind::DetM {
                    j: 2,
                    sigma: vec![sigma; 4],
                },
                window_radius: r,
                seed: derive_seed(5, k),
            };
            sample_limit_process(&spec).unwrap().len() as f64
        })
        .collect();
    let (m, se) = mean_se(&counts);
    let want = 2.0 * sigma * r * r;
    assert!((m - want).abs() < 4.0 * se, "{m} vs {want} (se {se})");
}

#[test]
fn determinant_with_one_entry_is_a_single_gaf() {
    for k in 0..20 {
        let seed = derive_seed(13, k);
        let spec = LimitProcessSpec {
            kind: LimitKind::DetM { j: 1, sigma: vec![0.8] },
            window_radius: 2.5,
            seed,
        };
        let det = sample_limit_process(&spec).unwrap();
        let single = find_zeros(&sample_gaf(0.8, 2.5 * 2f64.sqrt(), derive_seed(seed, 0)).unwrap()).unwrap();
        let mut a: Vec<C64> = det.zeros.clone();
        let mut b: Vec<C64> = single.zeros.iter().copied().filter(|w| w.norm() < 2.5).collect();
        let key = |w: &C64| (w.re, w.im);
        a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        assert_eq!(a.len(), b.len(), "sample {k}");
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8, "sample {k}: {x} vs {y}");
        }
    }
}

fn product_spec(seed: u64, r: f64) -> LimitProcessSpec {
    LimitProcessSpec {
        kind: LimitKind::ProductV(vec![0.6455, 0.3101]),
        window_radius: r,
        seed,
    }
}

#[test]
fn translated_and_rotated_samples_share_statistics() {
    let r = 3.0;
    let edges = uniform_bin_edges(9.0, 12);
    let wrap = |zs: Vec<C64>| RescaledProcess {
        z0: C64::new(0.0, 0.0),
        h: 1.0,
        window_radius: r,
        points: zs,
    };
    let base: Vec<RescaledProcess> = (0..800)
        .map(|k| wrap(sample_limit_process(&product_spec(derive_seed(21, k), r)).unwrap().zeros))
        .collect();
    let alpha = C64::from_polar(1.0, 0.7);
    let beta = C64::new(1.5, -0.8);
    let moved: Vec<RescaledProcess> = (0..800)
        .map(|k| wrap(translate_process(&product_spec(derive_seed(22, k), r), alpha, beta).unwrap().zeros))
        .collect();
    let a = pair_correlation(&base, &edges).unwrap();
    let b = pair_correlation(&moved, &edges).unwrap();
    assert!(two_sample_correlation_test(&a, &b).unwrap().pass);
    let density = (0.6455 + 0.3101) / PI;
    for est in [&a, &b] {
        assert!((est.pooled_intensity - density).abs() < 0.02, "{}", est.pooled_intensity);
    }
}

#[test]
fn sector_counts_are_uniform() {
    let r = 3.0;
    let mut cells = [0usize; 8];
    for k in 0..600 {
        for w in sample_limit_process(&product_spec(derive_seed(41, k), r)).unwrap().zeros {
            let a = w.arg().rem_euclid(2.0 * PI);
            cells[((a / (2.0 * PI) * 8.0) as usize).min(7)] += 1;
        }
    }
    let total: usize = cells.iter().sum();
    let e = total as f64 / 8.0;
    let chi2: f64 = cells.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 7 degrees of freedom, upper 1% point
    assert!(chi2 < 18.475, "chi2 {chi2}, cells {cells:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn located_zeros_are_genuine(seed in any::<u64>(), sigma in 0.2f64..1.5, r in 1.0f64..4.0) {
        let g = sample_gaf(sigma, r, seed).unwrap();
        let z = find_zeros(&g).unwrap();
        for (w, res) in z.zeros.iter().zip(&z.residuals) {
            prop_assert!(w.norm() < r);
            prop_assert!(*res <= RESIDUAL_TOLERANCE * (sigma * w.norm_sqr() / 2.0).exp());
            prop_assert!((g.eval(*w).norm() - res).abs() <= 1e-12 * (1.0 + res));
        }
        for (i, a) in z.zeros.iter().enumerate() {
            for b in &z.zeros[..i] {
                prop_assert!((a - b).norm() > MERGE_DISTANCE);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let spec = product_spec(seed, 2.0);
        prop_assert_eq!(sample_limit_process(&spec).unwrap(), sample_limit_process(&spec).unwrap());
    }
}
