//! Closed-form limit quantities: the two-point scaling function `kappa`, GAF
//! zero correlation densities through permanents, the k-point densities of the
//! product process, and the two-point curves compared against experiments.

use crate::matrix::{CMatrix, C64};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Below this argument `kappa` is evaluated from its Taylor series.
pub const KAPPA_SMALL: f64 = 1e-4;
/// Largest matrix handled by [`permanent`].
pub const MAX_PERMANENT: usize = 12;
/// Largest point count for [`gaf_r_point_density`].
pub const MAX_R_POINTS: usize = 8;
/// Condition number above which the covariance matrix is rejected.
pub const MAX_CONDITION: f64 = 1e12;
pub const MAX_K: usize = 6;
pub const MAX_J: usize = 6;

/// `kappa(t) = ((sinh^2 t + t^2) cosh t - 2 t sinh t) / sinh^3 t`.
///
/// Evaluated as `coth t (1 - t / sinh t)^2 + t / cosh^2(t/2)`, an identical
/// rearrangement with no cancellation between large terms.
pub fn kappa(t: f64) -> f64 {
    assert!(t >= 0.0, "kappa needs t >= 0, got {t}");
    if t <= KAPPA_SMALL {
        let t2 = t * t;
        return t * (1.0 - t2 * (2.0 / 9.0 - t2 * (2.0 / 45.0 - t2 * 4.0 / 525.0)));
    }
    if t > 40.0 {
        // (4t^2 - 8t + 2) e^{-2t} < 1e-31
        return 1.0 + (4.0 * t * t - 8.0 * t + 2.0) * (-2.0 * t).exp();
    }
    let s = t.sinh();
    let gap = sinh_minus_identity(t) / s; // 1 - t / sinh t
    let c = (0.5 * t).cosh();
    gap * gap / t.tanh() + t / (c * c)
}

fn sinh_minus_identity(t: f64) -> f64 {
    if t < 0.5 {
        // t^3/3! + t^5/5! + ...
        let t2 = t * t;
        let mut term = t * t2 / 6.0;
        let mut sum: f64 = 0.0;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            sum += term;
            term *= t2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        sum
    } else {
        t.sinh() - t
    }
}

/// Permanent by Ryser's formula with Gray-code ordering of the column subsets.
pub fn permanent(m: &CMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let n = m.rows();
    if n > MAX_PERMANENT {
        return Err(Error::TooLarge {
            size: n,
            limit: MAX_PERMANENT,
        });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut gray = 0usize;
    for k in 1..(1usize << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += m[(i, col)];
            } else {
                *s -= m[(i, col)];
            }
        }
        gray = next;
        let prod = row_sums.iter().fold(C64::new(1.0, 0.0), |acc, &s| acc * s);
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(if n % 2 == 1 { -total } else { total })
}

/// r-point correlation density of the zeros of a GAF with parameter `sigma`,
/// `perm(C - B A^{-1} B^*) / det(pi A)` built from the covariance kernel.
pub fn gaf_r_point_density(points: &[C64], sigma: f64) -> Result<f64> {
    let r = points.len();
    if r == 0 {
        return Ok(1.0);
    }
    if r > MAX_R_POINTS {
        return Err(Error::TooLarge {
            size: r,
            limit: MAX_R_POINTS,
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma}")));
    }
    // kernel scaled by exp(-sigma(|w_n|^2 + |w_m|^2)/2) on both sides; the
    // scale factors cancel between permanent and determinant
    let a = CMatrix::from_fn(r, r, |n, m| {
        let (u, v) = (points[n], points[m]);
        (sigma * (u * v.conj() - 0.5 * (u.norm_sqr() + v.norm_sqr()))).exp()
    });
    let b = CMatrix::from_fn(r, r, |n, m| sigma * points[m].conj() * a[(n, m)]);
    let c = CMatrix::from_fn(r, r, |n, m| (sigma + sigma * sigma * points[n] * points[m].conj()) * a[(n, m)]);
    let lu = a.lu();
    let a_inv = lu
        .inverse()
        .ok_or(Error::NearSingularA(f64::INFINITY))?;
    let cond = a.norm_1() * a_inv.norm_1();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::NearSingularA(cond));
    }
    let schur = c.sub(&b.matmul(&a_inv).matmul(&b.adjoint()));
    let det = lu.determinant() * PI.powi(r as i32);
    Ok((permanent(&schur)? / det).re)
}

/// The same density by conditioning on divided differences, which stays
/// accurate for tightly clustered points.
///
/// With `U[j, n] = c_n h_{n-j}(w_1..w_{j+1})` (divided differences of the
/// series basis `c_n w^n`, `c_n = sigma^{n/2}/sqrt(n!)`) and
/// `E[i, n] = c_n h_{n-r}(w_1..w_r, w_i)`,
/// `d^r = prod_{i<j} |w_i - w_j|^2 perm(E P E^*) / (pi^r det(U U^*))` where `P`
/// projects onto the kernel of `U`. Points are first centred at their mean,
/// which leaves the density unchanged.
pub fn gaf_r_point_density_clustered(points: &[C64], sigma: f64) -> Result<f64> {
    let r = points.len();
    if r == 0 {
        return Ok(1.0);
    }
    if r > MAX_R_POINTS {
        return Err(Error::TooLarge {
            size: r,
            limit: MAX_R_POINTS,
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma}")));
    }
    let centre = points.iter().sum::<C64>() / r as f64;
    let w: Vec<C64> = points.iter().map(|p| p - centre).collect();
    let rho2 = w.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    let n_terms = (sigma * rho2 * std::f64::consts::E).ceil() as usize + 2 * r + 60;
    let mut c = vec![1.0; n_terms];
    for n in 1..n_terms {
        c[n] = c[n - 1] * (sigma / n as f64).sqrt();
    }
    // h[k] = complete homogeneous polynomial of degree k in the points absorbed so far
    let absorb = |h: &mut Vec<C64>, x: C64| {
        for k in 1..h.len() {
            let prev = h[k - 1];
            h[k] += x * prev;
        }
    };
    let zero = C64::new(0.0, 0.0);
    let mut u = CMatrix::zeros(r, n_terms);
    let mut h = vec![zero; n_terms];
    h[0] = C64::new(1.0, 0.0);
    for j in 0..r {
        absorb(&mut h, w[j]);
        for n in j..n_terms {
            u[(j, n)] = c[n] * h[n - j];
        }
    }
    let mut e = CMatrix::zeros(r, n_terms);
    for i in 0..r {
        let mut hi = h.clone();
        absorb(&mut hi, w[i]);
        for n in r..n_terms {
            e[(i, n)] = c[n] * hi[n - r];
        }
    }
    let uu = u.matmul(&u.adjoint());
    let eu = e.matmul(&u.adjoint());
    let ee = e.matmul(&e.adjoint());
    let lu = uu.lu();
    let uu_inv = lu.inverse().ok_or(Error::NearSingularA(f64::INFINITY))?;
    let m = ee.sub(&eu.matmul(&uu_inv).matmul(&eu.adjoint()));
    let mut vandermonde = 1.0;
    for a in 0..r {
        for b in 0..a {
            vandermonde *= (w[a] - w[b]).norm_sqr();
        }
    }
    let det = lu.determinant() * PI.powi(r as i32);
    Ok(vandermonde * (permanent(&m)? / det).re)
}

/// Scaled squared separation `sigma |w_i - w_j|^2` below which the direct
/// route loses too many digits in its Schur complement.
pub const CLUSTER_SEPARATION: f64 = 0.05;

/// r-point density choosing the divided-difference route for clustered
/// points and the direct route otherwise.
pub fn gaf_r_point_density_robust(points: &[C64], sigma: f64) -> Result<f64> {
    let clustered = points
        .iter()
        .enumerate()
        .any(|(a, p)| points[..a].iter().any(|q| sigma * (p - q).norm_sqr() < CLUSTER_SEPARATION));
    if clustered {
        return gaf_r_point_density_clustered(points, sigma);
    }
    match gaf_r_point_density(points, sigma) {
        Err(Error::NearSingularA(_)) => gaf_r_point_density_clustered(points, sigma),
        other => other,
    }
}

/// Parameters of a k-point density query for the product process.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityQuery {
    pub points: Vec<C64>,
    pub sigmas: Vec<f64>,
}

impl DensityQuery {
    fn validate(&self) -> Result<()> {
        let (k, j) = (self.points.len(), self.sigmas.len());
        if k > MAX_K {
            return Err(Error::TooLarge { size: k, limit: MAX_K });
        }
        if j > MAX_J {
            return Err(Error::TooLarge { size: j, limit: MAX_J });
        }
        if k == 0 || j == 0 || self.sigmas.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidArgument("need k >= 1, J >= 1 and positive sigmas".into()));
        }
        for a in 0..k {
            for b in 0..a {
                if (self.points[a] - self.points[b]).norm() <= 1e-9 {
                    return Err(Error::InvalidArgument("points must be pairwise distinct".into()));
                }
            }
        }
        Ok(())
    }
}

/// k-point density of the zeros of a product of independent GAFs.
///
/// Sums over every assignment of the points to factors, which groups the
/// permutation sum weighted by `1/alpha!` into its distinct terms.
pub fn limit_k_density_v(query: &DensityQuery) -> Result<f64> {
    query.validate()?;
    let (k, j) = (query.points.len(), query.sigmas.len());
    let mut total = 0.0;
    let mut assign = vec![0usize; k];
    let mut groups: Vec<Vec<C64>> = vec![Vec::with_capacity(k); j];
    loop {
        for g in groups.iter_mut() {
            g.clear();
        }
        for (p, &f) in assign.iter().enumerate() {
            groups[f].push(query.points[p]);
        }
        let mut term = 1.0;
        for (g, &s) in groups.iter().zip(&query.sigmas) {
            term *= gaf_r_point_density_robust(g, s)?;
            if term == 0.0 {
                break;
            }
        }
        total += term;
        // next assignment in base j
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(total);
            }
            assign[pos] += 1;
            if assign[pos] < j {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

/// Normalized two-point function of the product process,
/// `1 + sum_j (sigma_j / sum sigma)^2 (kappa(sigma_j r2 / 2) - 1)`.
pub fn limit_2pt_correlation_v(r2: f64, sigmas: &[f64]) -> f64 {
    let total: f64 = sigmas.iter().sum();
    1.0 + sigmas
        .iter()
        .map(|&s| (s / total).powi(2) * (kappa(s * r2 / 2.0) - 1.0))
        .sum::<f64>()
}

/// Ginibre two-point function at the density `sigma_sum / 2pi`.
pub fn ginibre_2pt_correlation(r2: f64, sigma_sum: f64) -> f64 {
    -(-0.5 * sigma_sum * r2).exp_m1()
}

/// One-point density of the determinant process, `sum_i (sigma_+^i + sigma_-^i) / 2pi`.
pub fn limit_1_density_m(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.iter().any(|&(p, m)| !(p > 0.0 && m > 0.0)) {
        return Err(Error::InvalidArgument("densities must be positive".into()));
    }
    Ok(pairs.iter().map(|&(p, m)| p + m).sum::<f64>() / (2.0 * PI))
}
