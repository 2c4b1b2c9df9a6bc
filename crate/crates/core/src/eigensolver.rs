//! All eigenvalues of a dense complex matrix.
//!
//! Pipeline: diagonal balancing, unitary reduction to upper Hessenberg form
//! by Householder reflectors, then implicitly shifted single-shift complex QR
//! with Wilkinson shifts and deflation on the Hessenberg matrix. Only
//! eigenvalues are computed, so each QR sweep touches just the active
//! diagonal block.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ZERO};

/// Eigenvalues of one matrix together with iteration diagnostics.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    /// Total number of QR sweeps performed.
    pub iterations: usize,
    pub converged_all: bool,
}

const RADIX: f64 = 2.0;
const MAX_BALANCE_SWEEPS: usize = 200;
/// QR sweeps allowed per unit of dimension before giving up.
const SWEEPS_PER_DIM: usize = 40;
/// Stalled sweeps between exceptional shifts.
const EXCEPTIONAL_EVERY: usize = 10;

#[inline]
fn abs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity balancing `B = D^{-1} A D` with `D` a vector of powers of two.
///
/// After the sweep, for every index the off-diagonal 1-norms of its row and
/// column of `B` agree within a factor of two (unless one of them vanishes).
pub fn balance(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square(), "balance needs a square matrix");
    let n = a.rows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    for _ in 0..MAX_BALANCE_SWEEPS {
        let mut changed = false;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].norm();
                    r += b[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let mut cs = c;
            while cs < r / RADIX {
                f *= RADIX;
                cs *= RADIX * RADIX;
            }
            while cs >= r * RADIX {
                f /= RADIX;
                cs /= RADIX * RADIX;
            }
            if f != 1.0 {
                changed = true;
                d[i] *= f;
                let g = 1.0 / f;
                for z in b.row_mut(i) {
                    *z *= g;
                }
                for j in 0..n {
                    b[(j, i)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (d, b)
}

/// Reduces `a` in place to upper Hessenberg form by a unitary similarity.
pub fn hessenberg_in_place(a: &mut CMatrix) {
    assert!(a.is_square());
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let x0 = a[(k + 1, k)];
        let mut tail = 0.0;
        for i in k + 2..n {
            tail += a[(i, k)].norm_sqr();
        }
        if tail == 0.0 {
            continue;
        }
        let alpha = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0 == ZERO { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let beta = -phase * alpha;
        v[0] = x0 - beta;
        for i in 1..m {
            v[i] = a[(k + 1 + i, k)];
        }
        let vnorm2 = v[0].norm_sqr() + tail;
        let tau = 2.0 / vnorm2;
        let v = &v[..m];

        // Left: rows k+1.., columns k+1.. (column k is set explicitly below).
        let wcols = &mut w[..n - k - 1];
        wcols.iter_mut().for_each(|z| *z = ZERO);
        for (i, vi) in v.iter().enumerate() {
            let cvi = vi.conj();
            let row = &a.row(k + 1 + i)[k + 1..];
            for (wj, aij) in wcols.iter_mut().zip(row) {
                *wj += cvi * aij;
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let f = vi * tau;
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for (aij, wj) in row.iter_mut().zip(wcols.iter()) {
                *aij -= f * wj;
            }
        }
        a[(k + 1, k)] = beta;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }

        // Right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut a.row_mut(i)[k + 1..];
            let s: C64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
            if s == ZERO {
                continue;
            }
            let f = s * tau;
            for (x, y) in row.iter_mut().zip(v) {
                *x -= f * y.conj();
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Rotation {
    c: f64,
    s: C64,
}

/// Rotation `G = [c s; -conj(s) c]` with `G [f; g] = [r; 0]`.
#[inline]
fn givens(f: C64, g: C64) -> (Rotation, C64) {
    if g == ZERO {
        return (Rotation { c: 1.0, s: ZERO }, f);
    }
    if f == ZERO {
        let gn = g.norm();
        return (Rotation { c: 0.0, s: g.conj() / gn }, C64::new(gn, 0.0));
    }
    let fa = f.norm();
    let rho = fa.hypot(g.norm());
    let ph = f / fa;
    (
        Rotation {
            c: fa / rho,
            s: ph * g.conj() / rho,
        },
        ph * rho,
    )
}

#[inline]
fn rotate_rows(h: &mut CMatrix, k: usize, cols: std::ops::RangeInclusive<usize>, g: Rotation) {
    let n = h.cols();
    let data = h.as_mut_slice();
    let (top, bottom) = data.split_at_mut((k + 1) * n);
    let r0 = &mut top[k * n..];
    let r1 = &mut bottom[..n];
    let cs = g.s.conj();
    for j in cols {
        let a = r0[j];
        let b = r1[j];
        r0[j] = a * g.c + g.s * b;
        r1[j] = b * g.c - cs * a;
    }
}

#[inline]
fn rotate_cols(h: &mut CMatrix, k: usize, rows: std::ops::RangeInclusive<usize>, g: Rotation) {
    let n = h.cols();
    let data = h.as_mut_slice();
    let cs = g.s.conj();
    for i in rows {
        let a = data[i * n + k];
        let b = data[i * n + k + 1];
        data[i * n + k] = a * g.c + cs * b;
        data[i * n + k + 1] = b * g.c - g.s * a;
    }
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let den = if (p + disc).norm() >= (p - disc).norm() { p + disc } else { p - disc };
    if den == ZERO {
        d
    } else {
        d - bc / den
    }
}

/// Eigenvalues of an upper Hessenberg matrix, destroying it.
pub fn hessenberg_eigenvalues(h: &mut CMatrix) -> Result<EigenResult> {
    let n = h.rows();
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: eig,
            iterations: 0,
            converged_all: true,
        });
    }
    let eps = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE / eps;
    let max_sweeps = SWEEPS_PER_DIM * n.max(1);
    let mut sweeps = 0usize;
    let mut stalled = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = abs1(h[(k, k - 1)]);
            let tst = abs1(h[(k, k)]) + abs1(h[(k - 1, k - 1)]);
            if sub <= smlnum || sub <= eps * tst {
                h[(k, k - 1)] = ZERO;
                lo = k;
                break;
            }
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            stalled = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                remaining: hi + 1,
            });
        }
        sweeps += 1;
        stalled += 1;

        let shift = if stalled % EXCEPTIONAL_EVERY == 0 {
            let s = abs1(h[(hi, hi - 1)]) + if hi >= lo + 2 { abs1(h[(hi - 1, hi - 2)]) } else { 0.0 };
            h[(hi, hi)] + C64::new(0.75 * s, -0.4375 * s)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let (g, _) = givens(h[(lo, lo)] - shift, h[(lo + 1, lo)]);
        rotate_rows(h, lo, lo..=hi, g);
        rotate_cols(h, lo, lo..=(lo + 2).min(hi), g);
        for k in lo + 1..hi {
            let (g, r) = givens(h[(k, k - 1)], h[(k + 1, k - 1)]);
            h[(k, k - 1)] = r;
            h[(k + 1, k - 1)] = ZERO;
            rotate_rows(h, k, k..=hi, g);
            rotate_cols(h, k, lo..=(k + 2).min(hi), g);
        }
    }
    Ok(EigenResult {
        eigenvalues: eig,
        iterations: sweeps,
        converged_all: true,
    })
}

/// All eigenvalues of `a` (balanced first).
pub fn eigenvalues(a: &CMatrix) -> Result<EigenResult> {
    eigenvalues_with(a, true)
}

pub fn eigenvalues_with(a: &CMatrix, balanced: bool) -> Result<EigenResult> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    if a.rows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    // a lower triangular matrix is handled as its (upper triangular) transpose
    let lower = (0..a.rows()).all(|i| (i + 1..a.cols()).all(|j| a[(i, j)] == ZERO));
    let src = if lower && a.rows() > 1 { a.transpose() } else { a.clone() };
    let mut h = if balanced { balance(&src).1 } else { src };
    hessenberg_in_place(&mut h);
    hessenberg_eigenvalues(&mut h)
}
