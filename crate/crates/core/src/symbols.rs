//! Classical symbols `p0(x, xi)`, their energy shells `p0^{-1}(z)`, Poisson
//! brackets, classical densities and phase-space volumes.
//!
//! Bracket convention: `{f, g} = d_xi f * d_x g - d_xi g * d_x f`. A shell
//! point carries sign `+` when `{Re p0, Im p0} < 0` there, and its classical
//! density is `sigma = 1 / |{Re p0, Im p0}|`.

use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::rng::Stream;
use std::f64::consts::{PI, TAU};

/// Below this bracket magnitude a shell point is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Default distance kept between `z` and the boundary of the classical spectrum.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Step of the central finite differences used for bracket cross-checks.
pub const FD_STEP: f64 = 1e-6;

const NEWTON_GRID: usize = 64;
const MERGE_DIST: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    RealLine,
    /// `R / 2 pi Z`
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolModel {
    /// `xi^2 + i x^2` on the real line.
    ComplexHarmonicOscillator,
    /// `xi^2 + exp(-i q x)` on the torus.
    TorusExp { q: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub fn new(x: f64, xi: f64) -> Self {
        Self { x, xi }
    }

    /// Same point with `x` reduced to `[0, 2 pi)` on the torus.
    pub fn on(self, domain: Domain) -> Self {
        match domain {
            Domain::RealLine => self,
            Domain::Torus => Self {
                x: self.x.rem_euclid(TAU),
                xi: self.xi,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellPoint {
    pub rho: PhasePoint,
    pub sign: Sign,
    pub bracket: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyShell {
    pub z: C64,
    pub points: Vec<ShellPoint>,
    pub j: usize,
}

impl EnergyShell {
    /// Classical densities of the `+` points, in the order stored.
    pub fn sigma_plus(&self) -> Vec<f64> {
        self.sigmas(Sign::Plus)
    }

    pub fn sigma_minus(&self) -> Vec<f64> {
        self.sigmas(Sign::Minus)
    }

    fn sigmas(&self, sign: Sign) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.sign == sign)
            .map(|p| p.sigma)
            .collect()
    }

    /// Push-forward density of the symplectic volume at `z`: the sum of all sigmas.
    pub fn total_density(&self) -> f64 {
        self.points.iter().map(|p| p.sigma).sum()
    }
}

/// A rectangle `[re_lo, re_hi] x [im_lo, im_hi]` in the energy plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        Self {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        }
    }

    pub fn area(&self) -> f64 {
        (self.re_hi - self.re_lo).max(0.0) * (self.im_hi - self.im_lo).max(0.0)
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }
}

/// Axis-aligned region of phase space `[x_lo, x_hi] x [xi_lo, xi_hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub xi_lo: f64,
    pub xi_hi: f64,
}

impl PhaseBox {
    pub fn area(&self) -> f64 {
        (self.x_hi - self.x_lo) * (self.xi_hi - self.xi_lo)
    }
}

/// A smooth complex-valued function on phase space.
///
/// Only `eval` and `domain` are required; derivatives default to central
/// finite differences.
pub trait Symbol {
    fn eval(&self, rho: PhasePoint) -> C64;

    fn domain(&self) -> Domain;

    /// `(d_x p, d_xi p)`.
    fn gradient(&self, rho: PhasePoint) -> (C64, C64) {
        fd_gradient(self, rho)
    }

    /// `{Re p, Im p}(rho)`.
    fn bracket(&self, rho: PhasePoint) -> f64 {
        let (px, pxi) = self.gradient(rho);
        pxi.re * px.im - pxi.im * px.re
    }
}

fn fd_gradient<S: Symbol + ?Sized>(s: &S, rho: PhasePoint) -> (C64, C64) {
    let h = FD_STEP;
    let px = (s.eval(PhasePoint::new(rho.x + h, rho.xi)) - s.eval(PhasePoint::new(rho.x - h, rho.xi))) / (2.0 * h);
    let pxi = (s.eval(PhasePoint::new(rho.x, rho.xi + h)) - s.eval(PhasePoint::new(rho.x, rho.xi - h))) / (2.0 * h);
    (px, pxi)
}

/// Finite-difference Poisson bracket `{f, g}` of two real functions.
pub fn fd_bracket(f: impl Fn(PhasePoint) -> f64, g: impl Fn(PhasePoint) -> f64, rho: PhasePoint) -> f64 {
    let h = FD_STEP;
    let dx = |u: &dyn Fn(PhasePoint) -> f64| (u(PhasePoint::new(rho.x + h, rho.xi)) - u(PhasePoint::new(rho.x - h, rho.xi))) / (2.0 * h);
    let dxi = |u: &dyn Fn(PhasePoint) -> f64| (u(PhasePoint::new(rho.x, rho.xi + h)) - u(PhasePoint::new(rho.x, rho.xi - h))) / (2.0 * h);
    dxi(&f) * dx(&g) - dxi(&g) * dx(&f)
}

/// `{Re p, Im p}` by central differences, for cross-checking closed forms.
pub fn fd_poisson_bracket<S: Symbol + ?Sized>(s: &S, rho: PhasePoint) -> f64 {
    fd_bracket(|r| s.eval(r).re, |r| s.eval(r).im, rho)
}

impl Symbol for SymbolModel {
    fn eval(&self, rho: PhasePoint) -> C64 {
        eval_symbol(*self, rho)
    }

    fn domain(&self) -> Domain {
        SymbolModel::domain(self)
    }

    fn gradient(&self, rho: PhasePoint) -> (C64, C64) {
        match *self {
            SymbolModel::ComplexHarmonicOscillator => (C64::new(0.0, 2.0 * rho.x), C64::new(2.0 * rho.xi, 0.0)),
            SymbolModel::TorusExp { q } => {
                let q = q as f64;
                (C64::new(0.0, -q) * C64::from_polar(1.0, -q * rho.x), C64::new(2.0 * rho.xi, 0.0))
            }
        }
    }

    fn bracket(&self, rho: PhasePoint) -> f64 {
        poisson_bracket(*self, rho)
    }
}

impl SymbolModel {
    pub fn domain(&self) -> Domain {
        match self {
            SymbolModel::ComplexHarmonicOscillator => Domain::RealLine,
            SymbolModel::TorusExp { .. } => Domain::Torus,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SymbolModel::ComplexHarmonicOscillator => "complex_ho".into(),
            SymbolModel::TorusExp { q } => format!("torus_exp(q={q})"),
        }
    }

    /// Distance from `z` to the boundary of the classical spectrum, negative outside.
    pub fn interior_distance(&self, z: C64) -> f64 {
        match self {
            SymbolModel::ComplexHarmonicOscillator => z.re.min(z.im),
            // Sigma = [0, inf) + closed unit disk
            SymbolModel::TorusExp { .. } => {
                if z.re >= 0.0 {
                    1.0 - z.im.abs()
                } else {
                    1.0 - z.norm()
                }
            }
        }
    }

    /// Phase-space box containing `p0^{-1}(gamma)`.
    pub fn bounding_box(&self, gamma: &Rect) -> PhaseBox {
        match self {
            SymbolModel::ComplexHarmonicOscillator => {
                let xm = gamma.im_hi.max(0.0).sqrt();
                let xim = gamma.re_hi.max(0.0).sqrt();
                PhaseBox {
                    x_lo: -xm,
                    x_hi: xm,
                    xi_lo: -xim,
                    xi_hi: xim,
                }
            }
            SymbolModel::TorusExp { .. } => {
                let xim = (gamma.re_hi + 1.0).max(0.0).sqrt();
                PhaseBox {
                    x_lo: 0.0,
                    x_hi: TAU,
                    xi_lo: -xim,
                    xi_hi: xim,
                }
            }
        }
    }
}

pub fn eval_symbol(model: SymbolModel, rho: PhasePoint) -> C64 {
    match model {
        SymbolModel::ComplexHarmonicOscillator => C64::new(rho.xi * rho.xi, rho.x * rho.x),
        SymbolModel::TorusExp { q } => C64::new(rho.xi * rho.xi, 0.0) + C64::from_polar(1.0, -(q as f64) * rho.x),
    }
}

/// `{Re p0, Im p0}(rho)` in closed form.
pub fn poisson_bracket(model: SymbolModel, rho: PhasePoint) -> f64 {
    match model {
        SymbolModel::ComplexHarmonicOscillator => 4.0 * rho.x * rho.xi,
        SymbolModel::TorusExp { q } => {
            let q = q as f64;
            -2.0 * q * rho.xi * (q * rho.x).cos()
        }
    }
}

fn classify<S: Symbol + ?Sized>(s: &S, rho: PhasePoint) -> Result<ShellPoint> {
    let bracket = s.bracket(rho);
    if !(bracket.abs() >= DEGENERACY_TOL) {
        return Err(Error::ShellDegenerate {
            x: rho.x,
            xi: rho.xi,
            bracket,
        });
    }
    Ok(ShellPoint {
        rho: rho.on(s.domain()),
        sign: if bracket < 0.0 { Sign::Plus } else { Sign::Minus },
        bracket,
        sigma: 1.0 / bracket.abs(),
    })
}

fn assemble_shell(z: C64, mut points: Vec<ShellPoint>) -> Result<EnergyShell> {
    let plus = points.iter().filter(|p| p.sign == Sign::Plus).count();
    let minus = points.len() - plus;
    if points.is_empty() {
        return Err(Error::NoSolution(format!("{z}")));
    }
    if plus != minus {
        return Err(Error::NoSolution(format!(
            "{z}: unbalanced shell with {plus} '+' and {minus} '-' points"
        )));
    }
    // + points first, each family ordered by (x, xi)
    points.sort_by(|a, b| {
        let key = |p: &ShellPoint| (p.sign == Sign::Minus, p.rho.x, p.rho.xi);
        key(a).partial_cmp(&key(b)).unwrap()
    });
    Ok(EnergyShell { z, points, j: plus })
}

/// Energy shell with the default boundary margin.
pub fn solve_energy_shell(model: SymbolModel, z: C64) -> Result<EnergyShell> {
    solve_energy_shell_with(model, z, DEFAULT_MARGIN)
}

/// Closed-form energy shell of a built-in model; `margin` is the required
/// distance from `z` to the boundary of the classical spectrum.
pub fn solve_energy_shell_with(model: SymbolModel, z: C64, margin: f64) -> Result<EnergyShell> {
    if model.interior_distance(z) <= margin {
        return Err(Error::NoSolution(format!("{z} (margin {margin})")));
    }
    let mut points = Vec::new();
    match model {
        SymbolModel::ComplexHarmonicOscillator => {
            let (sx, sy) = (z.re.sqrt(), z.im.sqrt());
            for x in [sy, -sy] {
                for xi in [sx, -sx] {
                    points.push(classify(&model, PhasePoint::new(x, xi))?);
                }
            }
        }
        SymbolModel::TorusExp { q } => {
            let qf = q as f64;
            let root = (1.0 - z.im * z.im).sqrt();
            let mut ts = vec![z.re + root, z.re - root];
            ts.retain(|&t| t >= 0.0);
            ts.dedup();
            for t in ts {
                // exp(-i q x) = z - t
                let phi = (z - t).arg();
                for xi in [t.sqrt(), -t.sqrt()] {
                    for m in 0..q {
                        let x = (-phi - TAU * m as f64) / qf;
                        points.push(classify(&model, PhasePoint::new(x, xi))?);
                    }
                }
            }
        }
    }
    assemble_shell(z, points)
}

/// Energy shell of an arbitrary symbol by Newton iteration seeded from a
/// 64x64 grid over `search`. Roots closer than 1e-6 are merged.
pub fn solve_energy_shell_newton<S: Symbol + ?Sized>(symbol: &S, z: C64, search: PhaseBox) -> Result<EnergyShell> {
    let mut roots: Vec<PhasePoint> = Vec::new();
    let domain = symbol.domain();
    let scale = z.norm().max(1.0);
    for a in 0..NEWTON_GRID {
        for b in 0..NEWTON_GRID {
            let x0 = search.x_lo + (a as f64 + 0.5) / NEWTON_GRID as f64 * (search.x_hi - search.x_lo);
            let xi0 = search.xi_lo + (b as f64 + 0.5) / NEWTON_GRID as f64 * (search.xi_hi - search.xi_lo);
            let Some(rho) = newton(symbol, z, PhasePoint::new(x0, xi0)) else {
                continue;
            };
            if (symbol.eval(rho) - z).norm() > 1e-8 * scale {
                continue;
            }
            let rho = rho.on(domain);
            let dup = roots.iter().any(|r| phase_distance(domain, *r, rho) < MERGE_DIST);
            if !dup {
                roots.push(rho);
            }
        }
    }
    let points = roots
        .into_iter()
        .map(|rho| classify(symbol, rho))
        .collect::<Result<Vec<_>>>()?;
    assemble_shell(z, points)
}

fn phase_distance(domain: Domain, a: PhasePoint, b: PhasePoint) -> f64 {
    let mut dx = (a.x - b.x).abs();
    if domain == Domain::Torus {
        dx = dx.rem_euclid(TAU);
        dx = dx.min(TAU - dx);
    }
    dx.hypot(a.xi - b.xi)
}

fn newton<S: Symbol + ?Sized>(s: &S, z: C64, start: PhasePoint) -> Option<PhasePoint> {
    let mut rho = start;
    for _ in 0..60 {
        let f = s.eval(rho) - z;
        if f.norm() < 1e-14 * z.norm().max(1.0) {
            return Some(rho);
        }
        let (px, pxi) = s.gradient(rho);
        // [Re px, Re pxi; Im px, Im pxi] [dx; dxi] = -[Re f; Im f]
        let det = px.re * pxi.im - pxi.re * px.im;
        if det.abs() < 1e-300 {
            return None;
        }
        let dx = -(pxi.im * f.re - pxi.re * f.im) / det;
        let dxi = -(-px.im * f.re + px.re * f.im) / det;
        rho = PhasePoint::new(rho.x + dx, rho.xi + dxi);
        if !(rho.x.is_finite() && rho.xi.is_finite()) || rho.xi.abs() > 1e8 || rho.x.abs() > 1e8 {
            return None;
        }
    }
    Some(rho)
}

/// Volume estimates of `p0^{-1}(gamma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    /// Integral of the push-forward density over `gamma`.
    pub quadrature: f64,
    /// Rejection-sampling estimate over a bounding phase-space box.
    pub monte_carlo: f64,
    pub monte_carlo_stderr: f64,
}

const VOLUME_MC_SAMPLES: usize = 400_000;
const VOLUME_MC_SEED: u64 = 0x5EED_0F_F0_1DE;

/// Symplectic volume of `p0^{-1}(gamma)`, cross-validated by Monte Carlo.
pub fn phase_space_volume(model: SymbolModel, gamma: Rect) -> Result<f64> {
    phase_space_volume_detailed(model, gamma, VOLUME_MC_SAMPLES, VOLUME_MC_SEED).map(|v| v.quadrature)
}

pub fn phase_space_volume_detailed(model: SymbolModel, gamma: Rect, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if gamma.area() == 0.0 {
        return Ok(VolumeEstimate {
            quadrature: 0.0,
            monte_carlo: 0.0,
            monte_carlo_stderr: 0.0,
        });
    }
    let quadrature = integrate_density(model, gamma);

    let bbox = model.bounding_box(&gamma);
    let mut stream = Stream::new(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = bbox.x_lo + stream.uniform() * (bbox.x_hi - bbox.x_lo);
        let xi = bbox.xi_lo + stream.uniform() * (bbox.xi_hi - bbox.xi_lo);
        if gamma.contains(eval_symbol(model, PhasePoint::new(x, xi))) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let monte_carlo = bbox.area() * frac;
    let monte_carlo_stderr = bbox.area() * (frac * (1.0 - frac) / samples as f64).sqrt();
    if (monte_carlo - quadrature).abs() > 3.0 * monte_carlo_stderr.max(f64::EPSILON * quadrature) {
        return Err(Error::InconsistentVolume {
            quadrature,
            monte_carlo,
            stderr: monte_carlo_stderr,
        });
    }
    Ok(VolumeEstimate {
        quadrature,
        monte_carlo,
        monte_carlo_stderr,
    })
}

/// Push-forward density at `z`, zero outside the classical spectrum.
pub fn classical_density(model: SymbolModel, z: C64) -> f64 {
    solve_energy_shell_with(model, z, 0.0)
        .map(|s| s.total_density())
        .unwrap_or(0.0)
}

const QUAD_PANELS: usize = 8;
const QUAD_NODES: usize = 24;

fn integrate_density(model: SymbolModel, gamma: Rect) -> f64 {
    let (nodes, weights) = gauss_legendre(QUAD_NODES);
    let panel = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let w = (hi - lo) / QUAD_PANELS as f64;
        (0..QUAD_PANELS)
            .flat_map(|p| {
                let a = lo + p as f64 * w;
                nodes
                    .iter()
                    .zip(&weights)
                    .map(move |(&t, &wt)| (a + 0.5 * w * (t + 1.0), 0.5 * w * wt))
            })
            .collect()
    };
    let xs = panel(gamma.re_lo, gamma.re_hi);
    let ys = panel(gamma.im_lo, gamma.im_hi);
    let mut total = 0.0;
    for &(x, wx) in &xs {
        for &(y, wy) in &ys {
            total += wx * wy * classical_density(model, C64::new(x, y));
        }
    }
    total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
