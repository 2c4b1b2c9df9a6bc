//! Matrix discretizations of the model operators and their random perturbations.
//!
//! - `TorusExp(q)`: `-h^2 d_x^2 + exp(-i q x)` on `L^2(R / 2 pi Z)`, in the
//!   orthonormal Fourier modes `e^{ikx}/sqrt(2 pi)`, `|k| <= K`, ordered by `k`.
//! - `ComplexHarmonicOscillator`: `-h^2 d_x^2 + i x^2` on `L^2(R)`, in the
//!   h-scaled Hermite functions `h^{-1/4} psi_n(x / sqrt h)`, `n <= n_max`.
//!
//! Perturbations are drawn in the discretization basis: a Ginibre-type matrix
//! `M = N^{-1} sum q_jk e_j e_k^*` or a potential `V = N^{-1} sum v_j e_j`.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ZERO};
use crate::rng::Stream;
use crate::symbols::SymbolModel;
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisSpec {
    /// Fourier modes `-k_max..=k_max`.
    FourierTorus { k_max: usize },
    /// Hermite functions scaled to semiclassical parameter `h`, degrees `0..=n_max`.
    ScaledHermite { h: f64, n_max: usize },
}

impl BasisSpec {
    pub fn dimension(&self) -> usize {
        match *self {
            BasisSpec::FourierTorus { k_max } => 2 * k_max + 1,
            BasisSpec::ScaledHermite { n_max, .. } => n_max + 1,
        }
    }

    /// Largest symbol modulus the basis resolves at semiclassical parameter `h`.
    pub fn covered_energy(&self, h: f64) -> f64 {
        match *self {
            BasisSpec::FourierTorus { k_max } => (h * k_max as f64).powi(2),
            BasisSpec::ScaledHermite { h: hb, n_max } => hb * (2 * n_max + 1) as f64,
        }
    }

    fn describe(&self) -> String {
        match self {
            BasisSpec::FourierTorus { k_max } => format!("fourier(K={k_max})"),
            BasisSpec::ScaledHermite { h, n_max } => format!("hermite(h={h}, n_max={n_max})"),
        }
    }
}

/// Smallest Fourier cutoff with `(hK)^2 >= 2 * window_max`.
pub fn default_torus_cutoff(h: f64, window_max: f64) -> usize {
    ((2.0 * window_max).sqrt() / h).ceil() as usize
}

/// Smallest Hermite degree with `h (2 n + 1) >= 2 * window_max`.
pub fn default_hermite_cutoff(h: f64, window_max: f64) -> usize {
    ((2.0 * window_max / h - 1.0) / 2.0).ceil().max(1.0) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CMatrix,
    pub basis: BasisSpec,
    pub h: f64,
}

impl OperatorMatrix {
    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }
}

/// Truncated matrix of the unperturbed operator.
///
/// `window_max` is the largest `|z|` the caller intends to study; the basis
/// must resolve at least that energy (pass 0 to skip the check).
pub fn build_unperturbed(model: SymbolModel, basis: BasisSpec, h: f64, window_max: f64) -> Result<OperatorMatrix> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("h = {h} outside (0, 1]")));
    }
    let mismatch = || Error::BasisMismatch {
        basis: basis.describe(),
        model: model.name(),
    };
    let matrix = match (model, basis) {
        (SymbolModel::TorusExp { q }, BasisSpec::FourierTorus { k_max }) => {
            let n = 2 * k_max + 1;
            let q = q as usize;
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                let k = i as f64 - k_max as f64;
                m[(i, i)] = C64::new((h * k).powi(2), 0.0);
                // exp(-iqx) e_k = e_{k-q}
                if i >= q {
                    m[(i - q, i)] = C64::new(1.0, 0.0);
                }
            }
            m
        }
        (SymbolModel::ComplexHarmonicOscillator, BasisSpec::ScaledHermite { h: hb, n_max }) => {
            if (hb - h).abs() > 1e-15 * h {
                return Err(mismatch());
            }
            let n = n_max + 1;
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                let d = (2 * i + 1) as f64 / 2.0;
                // kinetic and potential share the diagonal
                m[(i, i)] = C64::new(h * d, h * d);
                if i + 2 < n {
                    let off = (((i + 1) * (i + 2)) as f64).sqrt() / 2.0;
                    // -off from D^2, +i off from x^2
                    let e = C64::new(-h * off, h * off);
                    m[(i, i + 2)] = e;
                    m[(i + 2, i)] = e;
                }
            }
            m
        }
        _ => return Err(mismatch()),
    };
    let covered = basis.covered_energy(h);
    if covered < window_max {
        return Err(Error::CutoffTooSmall {
            covered,
            needed: window_max,
        });
    }
    Ok(OperatorMatrix { matrix, basis, h })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationKind {
    RandomMatrix,
    RandomPotential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientLaw {
    /// `N_C(0, 1)`.
    ComplexGaussian,
    /// `exp(i theta)` with `theta` uniform.
    UniformPhase,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationDraw {
    pub kind: PerturbationKind,
    pub law: CoefficientLaw,
    /// `n * n` row-major for a random matrix, `n` for a potential.
    pub coefficients: Vec<C64>,
    pub n: usize,
    /// Clamp radius `C / h` if clamping was requested.
    pub clamp_radius: Option<f64>,
    pub seed: u64,
}

impl PerturbationDraw {
    pub fn clamped(&self) -> bool {
        self.clamp_radius.is_some()
    }
}

/// Draws i.i.d. coefficients. With `clamp = Some(c)` every coefficient with
/// `|alpha| > c / h` is redrawn, which realizes the law conditioned on the disk.
pub fn draw_perturbation(
    kind: PerturbationKind,
    law: CoefficientLaw,
    n: usize,
    h: f64,
    clamp: Option<f64>,
    seed: u64,
) -> Result<PerturbationDraw> {
    if n == 0 {
        return Err(Error::InvalidArgument("ensemble size must be positive".into()));
    }
    let count = match kind {
        PerturbationKind::RandomMatrix => n * n,
        PerturbationKind::RandomPotential => n,
    };
    let clamp_radius = clamp.map(|c| c / h);
    if let Some(r) = clamp_radius {
        if !(r > 0.0) || (law == CoefficientLaw::UniformPhase && r < 1.0) {
            return Err(Error::InvalidArgument(format!("clamp radius {r} excludes the whole law")));
        }
    }
    let mut stream = Stream::new(seed);
    let mut sample = || match law {
        CoefficientLaw::ComplexGaussian => stream.complex_gaussian(),
        CoefficientLaw::UniformPhase => stream.unit_phase(),
    };
    let coefficients = (0..count)
        .map(|_| loop {
            let a = sample();
            match clamp_radius {
                Some(r) if a.norm() > r => continue,
                _ => break a,
            }
        })
        .collect();
    Ok(PerturbationDraw {
        kind,
        law,
        coefficients,
        n,
        clamp_radius,
        seed,
    })
}

/// `(1/N) * sqrt(sum |q_jk|^2)`, the Hilbert–Schmidt norm of `M`.
pub fn hs_norm(draw: &PerturbationDraw) -> Result<f64> {
    if draw.kind != PerturbationKind::RandomMatrix {
        return Err(Error::InvalidArgument("Hilbert-Schmidt norm needs a random matrix draw".into()));
    }
    Ok(draw.coefficients.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt() / draw.n as f64)
}

/// Matrix of the perturbation `Q` (before multiplying by `delta`) in the basis of `p`.
pub fn perturbation_matrix(p: &OperatorMatrix, draw: &PerturbationDraw) -> Result<CMatrix> {
    let dim = p.dimension();
    match draw.kind {
        PerturbationKind::RandomMatrix => {
            if draw.n != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: draw.n,
                });
            }
            let inv = 1.0 / draw.n as f64;
            Ok(CMatrix::from_row_major(
                dim,
                dim,
                draw.coefficients.iter().map(|q| q * inv).collect(),
            ))
        }
        PerturbationKind::RandomPotential => match p.basis {
            BasisSpec::FourierTorus { .. } => {
                if draw.n % 2 == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "torus potential needs an odd mode count, got {}",
                        draw.n
                    )));
                }
                let half = (draw.n - 1) / 2;
                let scale = 1.0 / (draw.n as f64 * TAU.sqrt());
                let mut m = CMatrix::zeros(dim, dim);
                // V[k + j, k] = v_j / (N sqrt(2 pi))
                for (idx, v) in draw.coefficients.iter().enumerate() {
                    let j = idx as i64 - half as i64;
                    let c = v * scale;
                    for col in 0..dim {
                        let row = col as i64 + j;
                        if row >= 0 && (row as usize) < dim {
                            m[(row as usize, col)] = c;
                        }
                    }
                }
                Ok(m)
            }
            BasisSpec::ScaledHermite { h, n_max } => Ok(hermite_potential_matrix(&draw.coefficients, h, n_max)),
        },
    }
}

/// `P + delta * Q`.
pub fn assemble_perturbed(p: &OperatorMatrix, draw: &PerturbationDraw, delta: f64) -> Result<OperatorMatrix> {
    let q = perturbation_matrix(p, draw)?;
    let mut matrix = p.matrix.clone();
    if delta != 0.0 {
        matrix.axpy(C64::new(delta, 0.0), &q);
    }
    Ok(OperatorMatrix {
        matrix,
        basis: p.basis,
        h: p.h,
    })
}

/// Values `psi_0(y) .. psi_{count-1}(y)` of the orthonormal Hermite functions,
/// computed by the three-term recurrence with running rescaling so that large
/// `|y|` neither overflows nor loses the high-degree values to underflow.
pub fn hermite_functions(y: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let mut log_scale = -0.5 * y * y - 0.25 * PI.ln();
    let (mut prev, mut cur) = (0.0, 1.0);
    out[0] = log_scale.exp();
    for n in 0..count - 1 {
        let next = (2.0 / (n + 1) as f64).sqrt() * y * cur - (n as f64 / (n + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
        out[n + 1] = cur * log_scale.exp();
    }
    out
}

/// Gauss–Hermite rule for weight `exp(-u^2)`: nodes and the rescaled weights
/// `w_i exp(u_i^2)`, so that `int f du ~ sum wt_i f(u_i)` for `f` carrying its
/// own Gaussian factor.
pub fn gauss_hermite_scaled(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z: f64 = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-0.16667),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        for _ in 0..100 {
            let psi = hermite_functions(z, n + 1);
            let p1 = psi[n];
            let pp = (2.0 * n as f64).sqrt() * psi[n - 1];
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let psi = hermite_functions(z, n);
        let pp = (2.0 * n as f64).sqrt() * psi[n - 1];
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Matrix elements `<phi_m, V phi_n>` of `V = N^{-1} sum_j v_j phi_j` in the
/// h-scaled Hermite basis, by a Gauss–Hermite rule that is exact for the
/// triple products involved.
fn hermite_potential_matrix(v: &[C64], h: f64, n_max: usize) -> CMatrix {
    let dim = n_max + 1;
    let nv = v.len();
    let degree = nv.saturating_sub(1) + 2 * n_max;
    let nodes = degree / 2 + 2;
    let (u, wt) = gauss_hermite_scaled(nodes);
    // int psi_j psi_m psi_n dy with y = u sqrt(2/3) turns exp(-3y^2/2) into exp(-u^2)
    let stretch = (2.0f64 / 3.0).sqrt();
    let norm = h.powf(-0.25) / nv as f64;
    let count = dim.max(nv);
    let mut m = CMatrix::zeros(dim, dim);
    for (uq, wq) in u.iter().zip(&wt) {
        let y = uq * stretch;
        let psi = hermite_functions(y, count);
        let vy: C64 = v.iter().zip(&psi).map(|(a, p)| a * p).sum::<C64>() * norm * wq * stretch;
        if vy == ZERO {
            continue;
        }
        for a in 0..dim {
            let f = vy * psi[a];
            let row = m.row_mut(a);
            for (b, entry) in row.iter_mut().enumerate() {
                *entry += f * psi[b];
            }
        }
    }
    m
}
