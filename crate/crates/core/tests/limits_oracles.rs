use proptest::prelude::*;
use shellzeros::limits::{
    gaf_r_point_density, gaf_r_point_density_clustered, gaf_r_point_density_robust, kappa, limit_1_density_m,
    limit_2pt_correlation_v, limit_k_density_v, permanent, DensityQuery,
};
use shellzeros::rng::Stream;
use shellzeros::{CMatrix, Error, C64};
use std::f64::consts::PI;

/// High-precision reference values computed with 50-digit arithmetic.
const KAPPA_TABLE: [(f64, f64); 13] = [
    (0.25, 0.24657071997112401),
    (0.5, 0.47355380403247096591),
    (0.75, 0.66586151689538381),
    (1.0, 0.81563047329272986256),
    (1.5, 0.991373101469487376),
    (2.0, 1.0486616541259673197),
    (3.0, 1.0353085499684040493),
    (4.0, 1.01142757938010799),
    (5.0, 1.0028154594099232242),
    (7.5, 1.00005108576070047),
    (10.0, 1.0000006636914725513),
    (12.0, 1.00000001819614851),
    (20.0, 1.0000000000000061261),
];

#[test]
fn kappa_matches_reference_table() {
    for (t, want) in KAPPA_TABLE {
        let got = kappa(t);
        assert!((got - want).abs() <= 1e-13 * want, "kappa({t}) = {got}, want {want}");
    }
}

#[test]
fn kappa_rises_to_one_peak_then_relaxes() {
    let ts: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.005).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| kappa(t)).collect();
    let peak = vals
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > vals[best] { i } else { best });
    assert!(ts[peak] > 1.5 && ts[peak] < 2.5, "peak at {}", ts[peak]);
    assert!(vals[..=peak].windows(2).all(|w| w[1] > w[0]));
    assert!(vals[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(vals.iter().all(|&v| (0.0..1.06).contains(&v)));
    assert_eq!(kappa(0.0), 0.0);
}

#[test]
fn kappa_tail_envelope() {
    for k in 0..=300 {
        let t = 5.0 + k as f64 * 0.1;
        let bound = 4.0 * t * t * (-2.0 * t).exp();
        assert!((kappa(t) - 1.0).abs() <= bound + 4.0 * f64::EPSILON, "t = {t}");
    }
}

fn brute_permanent(m: &CMatrix) -> C64 {
    fn rec(m: &CMatrix, row: usize, used: &mut Vec<bool>) -> C64 {
        let n = m.rows();
        if row == n {
            return C64::new(1.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                acc += m[(row, c)] * rec(m, row + 1, used);
                used[c] = false;
            }
        }
        acc
    }
    rec(m, 0, &mut vec![false; m.rows()])
}

fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let mut s = Stream::new(seed);
    CMatrix::from_fn(n, n, |_, _| s.complex_gaussian())
}

#[test]
fn permanent_matches_expansion_5x5() {
    for seed in 0..20 {
        let m = random_matrix(5, seed);
        let want = brute_permanent(&m);
        let got = permanent(&m).unwrap();
        assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "seed {seed}");
    }
}

#[test]
fn permanent_rejects_large_and_rectangular() {
    assert!(matches!(permanent(&CMatrix::zeros(13, 13)), Err(Error::TooLarge { .. })));
    assert!(matches!(
        permanent(&CMatrix::zeros(2, 3)),
        Err(Error::DimensionMismatch { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn permanent_agrees_with_expansion(n in 1usize..=7, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let want = brute_permanent(&m);
        let got = permanent(&m).unwrap();
        prop_assert!((got - want).norm() <= 1e-11 * want.norm().max(1.0));
    }

    #[test]
    fn permanent_is_invariant_under_transpose(n in 1usize..=6, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let a = permanent(&m).unwrap();
        let b = permanent(&m.transpose()).unwrap();
        prop_assert!((a - b).norm() <= 1e-11 * a.norm().max(1.0));
    }
}

fn point(s: &mut Stream, r: f64) -> C64 {
    s.point_in_disk(r)
}

#[test]
fn one_point_density_is_sigma_over_pi() {
    let mut s = Stream::new(3);
    for sigma in [0.1, 0.5, 1.0, 2.5] {
        for _ in 0..20 {
            let w = point(&mut s, 3.0);
            let d = gaf_r_point_density(&[w], sigma).unwrap();
            assert!((d - sigma / PI).abs() <= 1e-12 * sigma / PI, "sigma {sigma} at {w}");
        }
    }
}

#[test]
fn two_point_density_matches_kappa() {
    let mut s = Stream::new(11);
    for k in 0..50 {
        let sigma = 0.2 + 1.8 * s.uniform();
        let a = point(&mut s, 2.0);
        let b = point(&mut s, 2.0);
        let d = gaf_r_point_density(&[a, b], sigma).unwrap();
        let want = (sigma / PI).powi(2) * kappa(sigma * (a - b).norm_sqr() / 2.0);
        assert!((d - want).abs() <= 1e-10 * want, "pair {k}: {d} vs {want}");
    }
}

#[test]
fn close_pairs_vanish_quadratically() {
    for sigma in [0.5, 1.0, 2.0] {
        for eps in [1e-2, 1e-3, 1e-4] {
            let a = C64::new(0.3, -0.1);
            let b = a + C64::new(eps * 0.6, eps * 0.8);
            let d = gaf_r_point_density_robust(&[a, b], sigma).unwrap();
            let ratio = d / (eps * eps);
            let want = sigma.powi(3) / (2.0 * PI * PI);
            assert!((ratio / want - 1.0).abs() < 5.0 * sigma * eps * eps + 1e-6, "{sigma} {eps}: {ratio} vs {want}");
        }
    }
}

#[test]
fn density_is_symmetric_in_its_points() {
    let mut s = Stream::new(5);
    for r in 2..=4 {
        let pts: Vec<C64> = (0..r).map(|_| point(&mut s, 1.5)).collect();
        let base = gaf_r_point_density(&pts, 0.7).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        let mut rot = pts.clone();
        rot.rotate_left(1);
        for perm in [rev, rot] {
            let d = gaf_r_point_density(&perm, 0.7).unwrap();
            assert!((d - base).abs() <= 1e-11 * base, "r {r}");
        }
    }
}

#[test]
fn direct_and_divided_difference_routes_agree() {
    let mut s = Stream::new(17);
    for r in 1..=5 {
        for _ in 0..10 {
            let pts: Vec<C64> = (0..r).map(|_| point(&mut s, 1.5)).collect();
            let a = gaf_r_point_density(&pts, 0.9).unwrap();
            let b = gaf_r_point_density_clustered(&pts, 0.9).unwrap();
            assert!((a - b).abs() <= 1e-8 * a, "r {r}: {a} vs {b}");
        }
    }
}

#[test]
fn density_is_translation_invariant() {
    let pts = [C64::new(0.1, 0.2), C64::new(-0.5, 0.4), C64::new(0.6, -0.3)];
    let base = gaf_r_point_density(&pts, 1.0).unwrap();
    for shift in [C64::new(1.0, 0.0), C64::new(-0.7, 1.3)] {
        let moved: Vec<C64> = pts.iter().map(|p| p + shift).collect();
        let d = gaf_r_point_density(&moved, 1.0).unwrap();
        assert!((d - base).abs() <= 1e-9 * base);
    }
}

#[test]
fn near_coincident_points_are_flagged_on_the_direct_route() {
    let a = C64::new(0.2, 0.1);
    let pts = [a, a + C64::new(1e-4, 0.0), a + C64::new(0.0, 1e-4)];
    assert!(matches!(gaf_r_point_density(&pts, 1.0), Err(Error::NearSingularA(_))));
    let d = gaf_r_point_density_robust(&pts, 1.0).unwrap();
    assert!(d > 0.0 && d.is_finite());
}

#[test]
fn vandermonde_envelope_is_bounded() {
    let mut s = Stream::new(23);
    for r in 2..=4 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for _ in 0..1000 {
            let pts: Vec<C64> = (0..r).map(|_| point(&mut s, 1.0)).collect();
            let mut vdm = 1.0;
            for a in 0..r {
                for b in 0..a {
                    vdm *= (pts[a] - pts[b]).norm_sqr();
                }
            }
            let ratio = gaf_r_point_density_robust(&pts, 1.0).unwrap() / vdm;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(lo > 0.0 && hi.is_finite(), "r {r}: [{lo}, {hi}]");
        assert!(hi / lo < 100.0, "r {r}: ratio spread {}", hi / lo);
    }
}

#[test]
fn k1_product_density_sums_factors() {
    let q = DensityQuery {
        points: vec![C64::new(0.4, -1.2)],
        sigmas: vec![0.6455, 0.3101, 1.2],
    };
    let want = (0.6455 + 0.3101 + 1.2) / PI;
    assert!((limit_k_density_v(&q).unwrap() - want).abs() <= 1e-12);
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn compositions(k: usize, j: usize) -> Vec<Vec<usize>> {
    if j == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(k - first, j - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Sum over multi-indices alpha with |alpha| = k and permutations tau of
/// `prod_j d^{alpha_j}(tau-block j) / alpha!`.
fn brute_product_density(points: &[C64], sigmas: &[f64]) -> f64 {
    let k = points.len();
    let mut total = 0.0;
    for alpha in compositions(k, sigmas.len()) {
        let weight: f64 = alpha.iter().map(|&a| factorial(a)).product();
        for tau in permutations(k) {
            let mut start = 0;
            let mut term = 1.0;
            for (&a, &s) in alpha.iter().zip(sigmas) {
                let block: Vec<C64> = tau[start..start + a].iter().map(|&i| points[i]).collect();
                term *= gaf_r_point_density_robust(&block, s).unwrap();
                start += a;
            }
            total += term / weight;
        }
    }
    total
}

#[test]
fn product_density_matches_alpha_tau_enumeration() {
    let mut s = Stream::new(31);
    for (k, j) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
        for _ in 0..5 {
            let pts: Vec<C64> = (0..k).map(|_| point(&mut s, 1.5)).collect();
            let sigmas: Vec<f64> = (0..j).map(|_| 0.2 + s.uniform()).collect();
            let got = limit_k_density_v(&DensityQuery {
                points: pts.clone(),
                sigmas: sigmas.clone(),
            })
            .unwrap();
            let want = brute_product_density(&pts, &sigmas);
            assert!((got - want).abs() <= 1e-11 * want, "k {k} J {j}: {got} vs {want}");
        }
    }
}

#[test]
fn two_point_product_matches_closed_form() {
    let sigmas = [0.6455, 0.3101];
    let total: f64 = sigmas.iter().sum();
    for r2 in [0.05f64, 0.5, 1.0, 3.0, 8.0] {
        let pts = vec![C64::new(0.0, 0.0), C64::new(r2.sqrt(), 0.0)];
        let d = limit_k_density_v(&DensityQuery {
            points: pts,
            sigmas: sigmas.to_vec(),
        })
        .unwrap();
        let normalized = d / (total / PI).powi(2);
        assert!((normalized - limit_2pt_correlation_v(r2, &sigmas)).abs() < 1e-10, "r2 {r2}");
    }
}

#[test]
fn distant_clusters_factorize() {
    let sigmas = vec![0.6, 0.3];
    let sep = 10.0 / 0.3f64.sqrt();
    let a = vec![C64::new(0.0, 0.0), C64::new(0.4, 0.3)];
    let b = vec![C64::new(sep, 0.0), C64::new(sep - 0.2, 0.5)];
    let d = |pts: Vec<C64>| {
        limit_k_density_v(&DensityQuery {
            points: pts,
            sigmas: sigmas.clone(),
        })
        .unwrap()
    };
    let joint = d([a.clone(), b.clone()].concat());
    let split = d(a) * d(b);
    assert!((joint / split - 1.0).abs() < 1e-6, "{joint} vs {split}");
}

#[test]
fn shrinking_triples_decay_quadratically() {
    let shape = [C64::new(1.0, 0.0), C64::from_polar(1.0, 2.0 * PI / 3.0), C64::from_polar(1.0, 4.0 * PI / 3.0)];
    let rhos: Vec<f64> = (0..=8).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect();
    let logs: Vec<(f64, f64)> = rhos
        .iter()
        .map(|&rho| {
            let d = limit_k_density_v(&DensityQuery {
                points: shape.iter().map(|p| p * rho).collect(),
                sigmas: vec![0.6455, 0.3101],
            })
            .unwrap();
            (rho.ln(), d.ln())
        })
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(slope >= 1.8 && slope < 2.2, "slope {slope}");
}

#[test]
fn query_limits() {
    let pts: Vec<C64> = (0..7).map(|k| C64::new(k as f64, 0.0)).collect();
    assert!(matches!(
        limit_k_density_v(&DensityQuery {
            points: pts,
            sigmas: vec![1.0]
        }),
        Err(Error::TooLarge { .. })
    ));
    let pts: Vec<C64> = (0..9).map(|k| C64::new(k as f64, 0.0)).collect();
    assert!(matches!(gaf_r_point_density(&pts, 1.0), Err(Error::TooLarge { .. })));
}

#[test]
fn determinant_one_point_density() {
    let got = limit_1_density_m(&[(0.6455, 0.6455), (0.3101, 0.3101)]).unwrap();
    assert!((got - (0.6455 + 0.3101) / PI).abs() < 1e-12, "{got}");
}
