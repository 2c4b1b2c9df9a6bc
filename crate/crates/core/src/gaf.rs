//! Gaussian analytic functions `g(w) = sum a_n sigma^{n/2} w^n / sqrt(n!)` with
//! i.i.d. standard complex Gaussian `a_n`, the two limit functions built from
//! them (a product of independent GAFs, and the determinant of a matrix of
//! independent GAFs), and extraction of their zeros in a disk.

use crate::eigensolver;
use crate::matrix::{CMatrix, C64};
use crate::rng::{derive_seed, Stream};
use crate::{Error, Result};
use std::f64::consts::{PI, TAU};

/// Relative truncation tolerance for the series tail on the window.
pub const TAIL_TOLERANCE: f64 = 1e-3;
/// Residual bound for accepted zeros, relative to `exp(sigma |w|^2 / 2)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Polished zeros closer than this are treated as one zero with multiplicity.
pub const MERGE_DISTANCE: f64 = 1e-6;

/// A sampled GAF truncated to degree `truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct GafSample {
    pub sigma: f64,
    pub truncation: usize,
    /// Series coefficients `a_n sigma^{n/2} / sqrt(n!)`, `n = 0..=truncation`.
    pub coefficients: Vec<C64>,
    pub window_radius: f64,
    pub seed: u64,
}

/// Zeros inside the open window disk, with `|f(w)|` at each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<C64>,
    pub residuals: Vec<f64>,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    fn extend(&mut self, other: ZeroSet) {
        self.zeros.extend(other.zeros);
        self.residuals.extend(other.residuals);
    }
}

/// Smallest `N` with `sum_{n > N} sigma^{n/2} R^n / sqrt(n!) <= tol * exp(sigma R^2 / 2)`.
///
/// The tail is bounded by the geometric majorant `t_{N+1} / (1 - rho)` with
/// `rho = sqrt(sigma R^2 / (N + 2))`, valid once `rho < 1`.
pub fn truncation_degree(sigma: f64, r: f64) -> usize {
    let x = sigma * r * r;
    let target = (TAIL_TOLERANCE.ln()) + x / 2.0;
    // ln t_n = (n/2) ln x - ln(n!)/2
    let mut ln_t = 0.0; // n = 0
    let mut n = 0usize;
    loop {
        let ln_next = ln_t + 0.5 * (x.ln() - ((n + 1) as f64).ln());
        let rho = (x / (n + 2) as f64).sqrt();
        if rho < 1.0 && ln_next - (1.0 - rho).ln() <= target {
            return n;
        }
        ln_t = ln_next;
        n += 1;
    }
}

/// Exact tail `sum_{n > N} sigma^{n/2} R^n / sqrt(n!)` relative to `exp(sigma R^2 / 2)`.
pub fn relative_tail(sigma: f64, r: f64, n_t: usize) -> f64 {
    let x = sigma * r * r;
    let mut ln_t = 0.0;
    let mut total = 0.0;
    let mut n = 0usize;
    loop {
        if n > n_t {
            let term = (ln_t - x / 2.0).exp();
            total += term;
            if term < 1e-20 * total.max(1e-300) && (n as f64) > x {
                break;
            }
        }
        ln_t += 0.5 * (x.ln() - ((n + 1) as f64).ln());
        n += 1;
    }
    total
}

/// Draws a GAF with parameter `sigma`, truncated so the tail is negligible in
/// the disk of radius `r`.
pub fn sample_gaf(sigma: f64, r: f64, seed: u64) -> Result<GafSample> {
    if !(sigma > 0.0 && sigma.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma}, R = {r}")));
    }
    let n_t = truncation_degree(sigma, r);
    let mut stream = Stream::new(seed);
    let mut scale = 1.0;
    let mut coefficients = Vec::with_capacity(n_t + 1);
    for n in 0..=n_t {
        if n > 0 {
            scale *= (sigma / n as f64).sqrt();
        }
        coefficients.push(stream.complex_gaussian() * scale);
    }
    Ok(GafSample {
        sigma,
        truncation: n_t,
        coefficients,
        window_radius: r,
        seed,
    })
}

impl GafSample {
    /// A sample with explicitly given series coefficients.
    pub fn from_coefficients(sigma: f64, r: f64, coefficients: Vec<C64>) -> Self {
        GafSample {
            sigma,
            truncation: coefficients.len().saturating_sub(1),
            coefficients,
            window_radius: r,
            seed: 0,
        }
    }

    pub fn eval(&self, w: C64) -> C64 {
        self.coefficients.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * w + c)
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, w: C64) -> (C64, C64) {
        let mut f = C64::new(0.0, 0.0);
        let mut df = C64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            df = df * w + f;
            f = f * w + c;
        }
        (f, df)
    }

    /// Typical size `exp(sigma |w|^2 / 2)` of the function at `w`.
    pub fn local_scale(&self, w: C64) -> f64 {
        (self.sigma * w.norm_sqr() / 2.0).exp()
    }
}

fn companion_roots(coefficients: &[C64], r: f64) -> Result<Vec<C64>> {
    // roots of p(u) = sum c_n r^n u^n, mapped back by w = r u
    let mut scaled: Vec<C64> = coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| c * r.powi(n as i32))
        .collect();
    while scaled.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
        scaled.pop();
    }
    let d = scaled.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = scaled[d];
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        m[(0, k)] = -scaled[d - 1 - k] / lead;
    }
    for i in 1..d {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    let res = eigensolver::eigenvalues(&m).map_err(|e| Error::CompanionFailure(e.to_string()))?;
    Ok(res.eigenvalues.into_iter().map(|u| u * r).collect())
}

fn newton_polish(
    mut w: C64,
    max_move: f64,
    eval: impl Fn(C64) -> (C64, C64),
) -> Option<C64> {
    let start = w;
    for _ in 0..50 {
        let (f, df) = eval(w);
        if f == C64::new(0.0, 0.0) {
            break;
        }
        if df == C64::new(0.0, 0.0) || !df.is_finite() {
            return None;
        }
        let step = f / df;
        w -= step;
        if !w.is_finite() || (w - start).norm() > max_move {
            return None;
        }
        if step.norm() <= 4.0 * f64::EPSILON * w.norm().max(1.0) {
            break;
        }
    }
    Some(w)
}

/// Zeros of the truncated series inside the open window disk.
pub fn find_zeros(sample: &GafSample) -> Result<ZeroSet> {
    let r = sample.window_radius;
    let roots = companion_roots(&sample.coefficients, r)?;
    let mut out = ZeroSet::default();
    for (i, &w0) in roots.iter().enumerate() {
        if w0.norm() >= r + 0.5 {
            continue;
        }
        let nearest = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| (v - w0).norm())
            .fold(f64::INFINITY, f64::min);
        let w = newton_polish(w0, 0.5 * nearest.min(1.0), |w| sample.eval_with_derivative(w)).unwrap_or(w0);
        if w.norm() >= r {
            continue;
        }
        let residual = sample.eval(w).norm();
        if residual > RESIDUAL_TOLERANCE * sample.local_scale(w) {
            continue;
        }
        out.zeros.push(w);
        out.residuals.push(residual);
    }
    merge_duplicates(&mut out.zeros);
    Ok(out)
}

// Snap near-coincident zeros onto a common point; each copy keeps its multiplicity.
fn merge_duplicates(zeros: &mut [C64]) {
    for i in 0..zeros.len() {
        for j in 0..i {
            if (zeros[i] - zeros[j]).norm() < MERGE_DISTANCE {
                zeros[i] = zeros[j];
                break;
            }
        }
    }
}

/// Which limit process to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitKind {
    /// Product of independent GAFs with the given parameters.
    ProductV(Vec<f64>),
    /// Determinant of a `j x j` matrix of independent GAFs; `sigma` is row-major.
    DetM { j: usize, sigma: Vec<f64> },
}

impl LimitKind {
    /// Determinant process with entry `(i, j)` carrying `(sigma_plus[j] + sigma_minus[i]) / 2`.
    pub fn det_from_pairs(sigma_plus: &[f64], sigma_minus: &[f64]) -> Result<Self> {
        if sigma_plus.len() != sigma_minus.len() || sigma_plus.is_empty() {
            return Err(Error::InvalidArgument("sigma lists must be nonempty and of equal length".into()));
        }
        let j = sigma_plus.len();
        let mut sigma = Vec::with_capacity(j * j);
        for i in 0..j {
            for k in 0..j {
                sigma.push(0.5 * (sigma_plus[k] + sigma_minus[i]));
            }
        }
        Ok(LimitKind::DetM { j, sigma })
    }

    /// Expected number of zeros per unit area.
    pub fn density(&self) -> f64 {
        match self {
            LimitKind::ProductV(s) => s.iter().sum::<f64>() / PI,
            LimitKind::DetM { j, sigma } => {
                let total: f64 = sigma.iter().sum();
                2.0 * total / (*j as f64) / TAU
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitProcessSpec {
    pub kind: LimitKind,
    pub window_radius: f64,
    pub seed: u64,
}

impl LimitProcessSpec {
    fn validate(&self) -> Result<()> {
        if !(self.window_radius > 0.0) {
            return Err(Error::InvalidArgument(format!("window radius {}", self.window_radius)));
        }
        let ok = match &self.kind {
            LimitKind::ProductV(s) => !s.is_empty() && s.iter().all(|&x| x > 0.0 && x.is_finite()),
            LimitKind::DetM { j, sigma } => {
                *j >= 1 && sigma.len() == j * j && sigma.iter().all(|&x| x > 0.0 && x.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid limit process parameters {:?}", self.kind)))
        }
    }
}

/// Radius on which determinant entries are truncated: the covering grid of
/// the window disk reaches its corners at `r * sqrt(2)`.
pub fn det_cover_radius(r: f64) -> f64 {
    r * std::f64::consts::SQRT_2
}

/// Samples the zero set of a limit process in the disk of radius `spec.window_radius`.
pub fn sample_limit_process(spec: &LimitProcessSpec) -> Result<ZeroSet> {
    spec.validate()?;
    let r = spec.window_radius;
    match &spec.kind {
        LimitKind::ProductV(sigmas) => {
            let mut out = ZeroSet::default();
            for (j, &s) in sigmas.iter().enumerate() {
                let g = sample_gaf(s, r, derive_seed(spec.seed, j as u64))?;
                out.extend(find_zeros(&g)?);
            }
            Ok(out)
        }
        LimitKind::DetM { j, sigma } => {
            let entries = sigma
                .iter()
                .enumerate()
                .map(|(k, &s)| sample_gaf(s, det_cover_radius(r), derive_seed(spec.seed, k as u64)))
                .collect::<Result<Vec<_>>>()?;
            let det = GafDeterminant { j: *j, entries };
            det.zeros_in_disk(r)
        }
    }
}

/// Samples the process and returns the zeros mapped by `w -> alpha w + beta`
/// that land in the window.
pub fn translate_process(spec: &LimitProcessSpec, alpha: C64, beta: C64) -> Result<ZeroSet> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("|alpha| = {} is not 1", alpha.norm())));
    }
    let r = spec.window_radius;
    let mut wide = spec.clone();
    wide.window_radius = r + beta.norm();
    let zs = sample_limit_process(&wide)?;
    let mut out = ZeroSet::default();
    for (w, res) in zs.zeros.iter().zip(&zs.residuals) {
        let t = alpha * w + beta;
        if t.norm() < r {
            out.zeros.push(t);
            out.residuals.push(*res);
        }
    }
    Ok(out)
}

/// `det [g^{ij}(w)]` for a matrix of sampled GAFs.
pub struct GafDeterminant {
    pub j: usize,
    /// Row-major entries.
    pub entries: Vec<GafSample>,
}

const MAX_CELL: f64 = 0.5;
const MAX_DEPTH: usize = 40;

impl GafDeterminant {
    pub fn eval(&self, w: C64) -> C64 {
        let m = CMatrix::from_fn(self.j, self.j, |a, b| self.entries[a * self.j + b].eval(w));
        m.determinant()
    }

    /// Value and derivative; the derivative sums determinants with one row
    /// replaced by its derivative.
    pub fn eval_with_derivative(&self, w: C64) -> (C64, C64) {
        let j = self.j;
        let vals: Vec<(C64, C64)> = self.entries.iter().map(|g| g.eval_with_derivative(w)).collect();
        let base = CMatrix::from_fn(j, j, |a, b| vals[a * j + b].0);
        let f = base.determinant();
        let mut df = C64::new(0.0, 0.0);
        for row in 0..j {
            let mut m = base.clone();
            for b in 0..j {
                m[(row, b)] = vals[row * j + b].1;
            }
            df += m.determinant();
        }
        (f, df)
    }

    // Change of argument along the segment a -> b, refined until each step
    // turns by less than `max_turn`.
    fn arg_change(&self, a: C64, fa: C64, b: C64, fb: C64, max_turn: f64, depth: usize) -> f64 {
        let d = (fb / fa).arg();
        if d.abs() <= max_turn || depth >= MAX_DEPTH {
            return d;
        }
        let m = 0.5 * (a + b);
        let fm = self.eval(m);
        self.arg_change(a, fa, m, fm, max_turn, depth + 1) + self.arg_change(m, fm, b, fb, max_turn, depth + 1)
    }

    fn cell_count(&self, lo: C64, size: f64, max_turn: f64) -> Result<usize> {
        let corners = [
            lo,
            lo + C64::new(size, 0.0),
            lo + C64::new(size, size),
            lo + C64::new(0.0, size),
        ];
        let vals: Vec<C64> = corners.iter().map(|&c| self.eval(c)).collect();
        let mut total = 0.0;
        for k in 0..4 {
            let l = (k + 1) % 4;
            total += self.arg_change(corners[k], vals[k], corners[l], vals[l], max_turn, 0);
        }
        winding_to_count(total)
    }

    fn locate(&self, lo: C64, size: f64, count: usize, max_turn: f64, depth: usize, out: &mut Vec<C64>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let center = lo + C64::new(size / 2.0, size / 2.0);
        if count == 1 {
            if let Some(w) = newton_polish(center, size, |w| self.eval_with_derivative(w)) {
                let slack = 1e-9 * size.max(1e-300);
                if w.re >= lo.re - slack
                    && w.re <= lo.re + size + slack
                    && w.im >= lo.im - slack
                    && w.im <= lo.im + size + slack
                {
                    out.push(w);
                    return Ok(());
                }
            }
        }
        if depth >= MAX_DEPTH {
            let w = newton_polish(center, size, |w| self.eval_with_derivative(w)).unwrap_or(center);
            out.extend(std::iter::repeat_n(w, count));
            return Ok(());
        }
        let half = size / 2.0;
        let mut found = 0;
        for (dx, dy) in [(0.0, 0.0), (half, 0.0), (0.0, half), (half, half)] {
            let sub = lo + C64::new(dx, dy);
            let c = self.cell_count(sub, half, max_turn)?;
            found += c;
            self.locate(sub, half, c, max_turn, depth + 1, out)?;
        }
        if found != count {
            return Err(Error::WindingMismatch {
                boundary: count as i64,
                cells: found as i64,
            });
        }
        Ok(())
    }

    fn disk_count(&self, r: f64, max_turn: f64) -> Result<usize> {
        let n = 64;
        let pts: Vec<C64> = (0..n).map(|k| C64::from_polar(r, TAU * k as f64 / n as f64)).collect();
        let vals: Vec<C64> = pts.iter().map(|&p| self.eval(p)).collect();
        let mut total = 0.0;
        for k in 0..n {
            let l = (k + 1) % n;
            total += self.arc_change(r, TAU * k as f64 / n as f64, TAU / n as f64, vals[k], vals[l], max_turn, 0);
        }
        winding_to_count(total)
    }

    #[allow(clippy::too_many_arguments)]
    fn arc_change(&self, r: f64, theta: f64, dtheta: f64, fa: C64, fb: C64, max_turn: f64, depth: usize) -> f64 {
        let d = (fb / fa).arg();
        if d.abs() <= max_turn || depth >= MAX_DEPTH {
            return d;
        }
        let h = dtheta / 2.0;
        let fm = self.eval(C64::from_polar(r, theta + h));
        self.arc_change(r, theta, h, fa, fm, max_turn, depth + 1)
            + self.arc_change(r, theta + h, h, fm, fb, max_turn, depth + 1)
    }

    /// Zeros in the open disk of radius `r`, by the argument principle on a
    /// grid of square cells followed by Newton polishing.
    pub fn zeros_in_disk(&self, r: f64) -> Result<ZeroSet> {
        let mut last = Error::WindingMismatch { boundary: 0, cells: 0 };
        for attempt in 0..3 {
            let max_turn = (PI / 4.0) / (1 << attempt) as f64;
            let cell = MAX_CELL / (1 << attempt) as f64;
            match self.try_zeros_in_disk(r, cell, max_turn) {
                Ok(z) => return Ok(z),
                Err(e @ Error::WindingMismatch { .. }) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn try_zeros_in_disk(&self, r: f64, cell: f64, max_turn: f64) -> Result<ZeroSet> {
        let n = (2.0 * r / cell).ceil() as usize;
        let size = 2.0 * r / n as f64;
        let mut zeros = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let lo = C64::new(-r + a as f64 * size, -r + b as f64 * size);
                // skip cells entirely outside the disk
                let nx = lo.re.max(0.0f64.min(lo.re + size));
                let ny = lo.im.max(0.0f64.min(lo.im + size));
                if (nx * nx + ny * ny).sqrt() >= r {
                    continue;
                }
                let c = self.cell_count(lo, size, max_turn)?;
                self.locate(lo, size, c, max_turn, 0, &mut zeros)?;
            }
        }
        zeros.retain(|w| w.norm() < r);
        let expected = self.disk_count(r, max_turn)?;
        if expected != zeros.len() {
            return Err(Error::WindingMismatch {
                boundary: expected as i64,
                cells: zeros.len() as i64,
            });
        }
        merge_duplicates(&mut zeros);
        let residuals = zeros.iter().map(|&w| self.eval(w).norm()).collect();
        Ok(ZeroSet { zeros, residuals })
    }
}

fn winding_to_count(total_arg: f64) -> Result<usize> {
    let x = total_arg / TAU;
    let k = x.round();
    if (x - k).abs() > 0.05 || k < 0.0 {
        return Err(Error::WindingMismatch {
            boundary: k as i64,
            cells: -1,
        });
    }
    Ok(k as usize)
}
