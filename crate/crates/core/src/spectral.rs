//! First Dirichlet eigenpair of `−Δ`, the weight `a = φ₁²` and the load `f = Δ²a`.
//!
//! Eigenfunctions are normalized to `sup φ₁ = 1`.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{build_grid, BoundaryFit, DomainKind, DomainSpec, Grid2D, GridField};
use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, CsrMatrix};
use crate::scalar::{count, dot, lit, to_f64, Real};

/// Eigenvalue change at which inverse iteration stops (relative).
pub const EIGEN_TOL: f64 = 1e-10;

const MAX_INVERSE_ITERATIONS: usize = 500;

/// `J_ν`-type profile `f(z) = Σ_m (−z²/4)^m / (m! (ν+1)_m)`, normalized `f(0) = 1`.
fn bessel_profile(nu: f64, z: f64) -> f64 {
    let x = -z * z / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= x / (mf * (nu + mf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && mf > -x {
            break;
        }
    }
    sum
}

/// First positive zero of [`bessel_profile`], i.e. `j_{ν,1}`, by bisection.
pub fn first_bessel_zero(nu: f64) -> f64 {
    let step = 0.05;
    let mut lo = step;
    while bessel_profile(nu, lo + step) > 0.0 {
        lo += step;
    }
    let mut hi = lo + step;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_profile(nu, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Analytic radial eigenfunction `φ₁(r) = Σ_m c_m r^{2m}` of the unit ball in `R^n`.
#[derive(Clone, Debug)]
pub struct BallProfile<T> {
    n: usize,
    j: T,
    lambda: T,
    coef: Vec<T>,
}

impl<T: Real> BallProfile<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {n}")));
        }
        let nu = n as f64 / 2.0 - 1.0;
        let j = first_bessel_zero(nu);
        let x = -j * j / 4.0;
        let mut coef = vec![1.0];
        for m in 1..80 {
            let mf = m as f64;
            let c = coef[m - 1] * x / (mf * (nu + mf));
            coef.push(c);
            if c.abs() < 1e-20 {
                break;
            }
        }
        Ok(Self {
            n,
            j: lit(j),
            lambda: lit(j * j),
            coef: coef.into_iter().map(lit).collect(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// First zero `j` of the profile; `λ₁ = j²`.
    pub fn zero(&self) -> T {
        self.j
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `φ₁(r)`.
    pub fn phi(&self, r: T) -> T {
        let r2 = r * r;
        self.coef.iter().rev().fold(T::zero(), |acc, &c| acc * r2 + c)
    }

    /// `(φ₁, φ₁', φ₁'', φ₁'/r)` at `r`; the last entry is regular at `r = 0`.
    pub fn derivatives(&self, r: T) -> [T; 4] {
        let r2 = r * r;
        let mut p = T::zero();
        let mut d1_over_r = T::zero();
        let mut d2 = T::zero();
        for (m, &c) in self.coef.iter().enumerate().rev() {
            let m2 = count::<T>(2 * m);
            p = p * r2 + c;
            if m >= 1 {
                d1_over_r = d1_over_r * r2 + m2 * c;
                d2 = d2 * r2 + m2 * (m2 - T::one()) * c;
            }
        }
        [p, d1_over_r * r, d2, d1_over_r]
    }

    /// `a = φ₁²`.
    pub fn weight(&self, r: T) -> T {
        let p = self.phi(r);
        p * p
    }

    /// `f = Δ²(φ₁²) = 4λ²φ² − 8λ φ'² + 4(φ''² + (n−1)(φ'/r)²)`.
    pub fn load(&self, r: T) -> T {
        let [p, d1, d2, d1r] = self.derivatives(r);
        let l = self.lambda;
        let four = lit::<T>(4.0);
        let hess = d2 * d2 + count::<T>(self.n - 1) * d1r * d1r;
        four * l * l * p * p - lit::<T>(8.0) * l * d1 * d1 + four * hess
    }

    /// `|φ₁'(1)|`, the limit of `φ₁/δ` at the boundary.
    pub fn boundary_slope(&self) -> T {
        self.derivatives(T::one())[1].abs()
    }
}

/// Discrete or analytic eigenfunction.
#[derive(Clone, Debug)]
pub enum EigenProfile<T> {
    /// 5-point finite differences on a planar lattice.
    Grid(GridField<T>),
    /// Analytic ball profile.
    Ball(BallProfile<T>),
    /// Radial finite volumes on cell centres `r_i = (i + ½) h` of the unit ball.
    Radial { n: usize, r: Vec<T>, phi: Vec<T> },
}

/// First Dirichlet eigenpair with `sup φ₁ = 1`.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub lambda: T,
    pub profile: EigenProfile<T>,
    /// `‖−Δ_h φ − λ φ‖ / ‖φ‖` of the discrete problem (zero when analytic).
    pub rayleigh_residual: T,
    pub iterations: usize,
}

/// Computes the first eigenpair of `d`.
///
/// Planar domains use inverse power iteration on the 5-point Laplacian at
/// spacing `h` from a start vector drawn with `seed`. The unit disk uses the
/// analytic profile; balls with `n ≥ 3` use radial finite volumes with
/// `⌈1/h⌉` cells.
pub fn eigenpair<T: Real>(d: &DomainSpec<T>, h: T, seed: u64) -> Result<EigenPair<T>> {
    match d.kind {
        DomainKind::UnitBall { n: 2 } => {
            let p = BallProfile::new(2)?;
            Ok(EigenPair {
                lambda: p.lambda(),
                profile: EigenProfile::Ball(p),
                rayleigh_residual: T::zero(),
                iterations: 0,
            })
        }
        DomainKind::UnitBall { n } => radial_eigenpair(n, h),
        _ => grid_eigenpair(Arc::new(build_grid(d, h)?), seed),
    }
}

/// 5-point `−Δ_h` with zero exterior values.
pub fn laplacian_matrix<T: Real>(grid: &Grid2D<T>) -> CsrMatrix<T> {
    let h2 = grid.h * grid.h;
    let mut trip = Vec::with_capacity(5 * grid.unknowns());
    for k in 0..grid.unknowns() {
        let (i, j) = grid.unknown_ij(k);
        let (i, j) = (i as isize, j as isize);
        trip.push((k, k, lit::<T>(4.0) / h2));
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(c) = grid.unknown_at(i + di, j + dj) {
                trip.push((k, c, -T::one() / h2));
            }
        }
    }
    CsrMatrix::from_triplets(grid.unknowns(), trip)
}

fn grid_eigenpair<T: Real>(grid: Arc<Grid2D<T>>, seed: u64) -> Result<EigenPair<T>> {
    let lap = laplacian_matrix(&grid);
    let chol = lap.to_band().cholesky()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<T> = (0..grid.unknowns())
        .map(|_| lit(rng.gen_range(0.5..1.0)))
        .collect();
    normalize_l2(&mut u);
    let mut lambda = rayleigh(&lap, &u);
    let mut iterations = 0;
    let mut converged = false;
    let mut trace = Vec::new();
    while iterations < MAX_INVERSE_ITERATIONS {
        iterations += 1;
        chol.solve_in_place(&mut u);
        normalize_l2(&mut u);
        let next = rayleigh(&lap, &u);
        let change = (next - lambda).abs() / next;
        trace.push(to_f64(change));
        lambda = next;
        if change < lit(EIGEN_TOL) && residual(&lap, &u, lambda) <= lit(1e-9) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            residual: trace.last().copied().unwrap_or(f64::NAN),
            trace,
        });
    }
    let res = residual(&lap, &u, lambda);
    let phi = sign_normalize(u)?;
    Ok(EigenPair {
        lambda,
        profile: EigenProfile::Grid(GridField { grid, values: phi }),
        rayleigh_residual: res,
        iterations,
    })
}

/// Radial finite volumes for the unit ball in any dimension `n ≥ 2` with `⌈1/h⌉` cells.
pub fn radial_eigenpair<T: Real>(n: usize, h: T) -> Result<EigenPair<T>> {
    let cells = (T::one() / h).ceil().to_usize().unwrap_or(0);
    if cells < 8 {
        return Err(Error::GridTooCoarse(format!("{cells} radial cells; need at least 8")));
    }
    let hh = T::one() / count(cells);
    let half = lit::<T>(0.5);
    let pw = n as i32 - 1;
    let r: Vec<T> = (0..cells).map(|i| (count::<T>(i) + half) * hh).collect();
    // −(r^{n−1} u')' discretized with face areas; mass diag = cell volumes
    let face = |i: usize| (count::<T>(i) * hh).powi(pw);
    let mut lower = vec![T::zero(); cells];
    let mut diag = vec![T::zero(); cells];
    let mut upper = vec![T::zero(); cells];
    let mut mass = vec![T::zero(); cells];
    for i in 0..cells {
        let (fl, fr) = (face(i), face(i + 1));
        mass[i] = (fr * count::<T>(i + 1) * hh - fl * count::<T>(i) * hh) / count::<T>(n);
        let h2 = hh * hh;
        if i > 0 {
            lower[i] = -fl / h2 * hh;
            diag[i] = diag[i] + fl / h2 * hh;
        }
        if i + 1 < cells {
            upper[i] = -fr / h2 * hh;
            diag[i] = diag[i] + fr / h2 * hh;
        } else {
            // u = 0 at r = 1, half a cell away
            diag[i] = diag[i] + lit::<T>(2.0) * fr / h2 * hh;
        }
    }
    let apply = |u: &[T]| -> Vec<T> {
        (0..cells)
            .map(|i| {
                let mut s = diag[i] * u[i];
                if i > 0 {
                    s = s + lower[i] * u[i - 1];
                }
                if i + 1 < cells {
                    s = s + upper[i] * u[i + 1];
                }
                s
            })
            .collect()
    };
    let quotient = |u: &[T]| {
        let au = apply(u);
        let num: T = au.iter().zip(u).map(|(&a, &b)| a * b).sum();
        let den: T = u.iter().zip(&mass).map(|(&a, &m)| a * a * m).sum();
        num / den
    };
    let weighted_residual = |u: &[T], lambda: T| {
        let au = apply(u);
        let num: T = au
            .iter()
            .zip(u)
            .zip(&mass)
            .map(|((&a, &v), &m)| (a / m - lambda * v).powi(2) * m)
            .sum();
        let den: T = u.iter().zip(&mass).map(|(&v, &m)| v * v * m).sum();
        (num / den).sqrt()
    };
    let mut u = vec![T::one(); cells];
    let mut lambda = quotient(&u);
    let mut iterations = 0;
    let mut trace = Vec::new();
    let res = loop {
        iterations += 1;
        let rhs: Vec<T> = u.iter().zip(&mass).map(|(&a, &m)| a * m).collect();
        u = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let s = crate::scalar::sup_abs(&u);
        u.iter_mut().for_each(|v| *v = *v / s);
        let next = quotient(&u);
        let change = (next - lambda).abs() / next;
        trace.push(to_f64(change));
        lambda = next;
        let res = weighted_residual(&u, lambda);
        if change < lit(EIGEN_TOL) && res <= lit(1e-9) {
            break res;
        }
        if iterations >= MAX_INVERSE_ITERATIONS {
            return Err(Error::NotConverged {
                iterations,
                residual: to_f64(res),
                trace,
            });
        }
    };
    let phi = sign_normalize(u)?;
    Ok(EigenPair {
        lambda,
        profile: EigenProfile::Radial { n, r, phi },
        rayleigh_residual: res,
        iterations,
    })
}

fn normalize_l2<T: Real>(u: &mut [T]) {
    let s = dot(u, u).sqrt();
    u.iter_mut().for_each(|v| *v = *v / s);
}

fn rayleigh<T: Real>(a: &CsrMatrix<T>, u: &[T]) -> T {
    dot(&a.matvec(u), u) / dot(u, u)
}

fn residual<T: Real>(a: &CsrMatrix<T>, u: &[T], lambda: T) -> T {
    let au = a.matvec(u);
    let r: T = au.iter().zip(u).map(|(&x, &y)| (x - lambda * y).powi(2)).sum();
    (r / dot(u, u)).sqrt()
}

/// Flips to the positive sign and scales to `sup = 1`; fails on a sign change.
fn sign_normalize<T: Real>(mut u: Vec<T>) -> Result<Vec<T>> {
    let big = u
        .iter()
        .copied()
        .fold(T::zero(), |m, v| if v.abs() > m.abs() { v } else { m });
    if big == T::zero() {
        return Err(Error::SignIndefinite { node: 0 });
    }
    u.iter_mut().for_each(|v| *v = *v / big);
    if let Some(node) = u.iter().position(|&v| v <= T::zero()) {
        return Err(Error::SignIndefinite { node });
    }
    Ok(u)
}

impl<T: Real> EigenPair<T> {
    /// `(φ₁, δ)` at every interior sample of the profile.
    pub fn samples(&self) -> Result<Vec<(T, T)>> {
        Ok(match &self.profile {
            EigenProfile::Grid(f) => (0..f.values.len())
                .map(|k| (f.values[k], f.grid.unknown_delta(k)))
                .collect(),
            EigenProfile::Ball(p) => (0..4096)
                .map(|i| {
                    let r = (count::<T>(i) + lit(0.5)) / lit(4096.0);
                    (p.phi(r), T::one() - r)
                })
                .collect(),
            EigenProfile::Radial { r, phi, .. } => {
                r.iter().zip(phi).map(|(&r, &p)| (p, T::one() - r)).collect()
            }
        })
    }

    /// Comparison constant `c` with `c δ ≤ φ₁ ≤ δ / c` on the samples.
    pub fn comparison_constant(&self) -> Result<T> {
        let s = self.samples()?;
        let phi: Vec<T> = s.iter().map(|p| p.0).collect();
        let delta: Vec<T> = s.iter().map(|p| p.1).collect();
        comparison_constant(&phi, &delta)
    }

    /// Weight `a = φ₁²`, load `f = Δ²a` and the comparison constant.
    pub fn weight_data(&self) -> Result<WeightData<T>> {
        let (a, f) = match &self.profile {
            EigenProfile::Grid(g) => {
                let f = grid_load(g, self.lambda)?;
                (g.values.iter().map(|&p| p * p).collect(), f)
            }
            EigenProfile::Ball(p) => self
                .samples()?
                .iter()
                .map(|&(_, d)| {
                    let r = T::one() - d;
                    (p.weight(r), p.load(r))
                })
                .unzip(),
            EigenProfile::Radial { .. } => {
                return Err(Error::InvalidInput(
                    "load needs the analytic ball profile or a planar grid".into(),
                ))
            }
        };
        let sup_f = crate::scalar::sup_abs(&f);
        if !sup_f.is_finite() {
            return Err(Error::Accuracy("load f is not finite".into()));
        }
        Ok(WeightData {
            a,
            f,
            sup_f,
            c: self.comparison_constant()?,
        })
    }

    pub fn summary(&self) -> Result<EigenSummary> {
        let w = self.weight_data()?;
        Ok(EigenSummary {
            lambda1: to_f64(self.lambda),
            c_fi: to_f64(w.c),
            sup_f: to_f64(w.sup_f),
        })
    }
}

/// Largest `c` with `c δ ≤ φ ≤ δ / c` on the samples, shrunk by 1%.
pub fn comparison_constant<T: Real>(phi: &[T], delta: &[T]) -> Result<T> {
    let mut lo = T::infinity();
    for (&p, &d) in phi.iter().zip(delta) {
        if !(p > T::zero() && d > T::zero()) {
            return Err(Error::Accuracy(format!(
                "comparison ratio degenerate: phi = {}, delta = {}",
                to_f64(p),
                to_f64(d)
            )));
        }
        lo = lo.min(p / d).min(d / p);
    }
    let c = lo / lit(1.01);
    if !(c > T::zero() && c < T::one()) {
        return Err(Error::Accuracy(format!(
            "comparison constant {} outside (0, 1)",
            to_f64(c)
        )));
    }
    Ok(c)
}

/// `Δ²(φ²) = 4λ²φ² − 8λ|∇φ|² + 4|D²φ|²` with centred differences of `φ`.
fn grid_load<T: Real>(phi: &GridField<T>, lambda: T) -> Result<Vec<T>> {
    let g = &phi.grid;
    if g.nx < 9 || g.ny < 9 {
        return Err(Error::GridTooCoarse(
            "load needs at least 8 cells per axis".into(),
        ));
    }
    let h = g.h;
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    Ok((0..g.unknowns())
        .map(|k| {
            let (i, j) = g.unknown_ij(k);
            let (i, j) = (i as isize, j as isize);
            let u = |a: isize, b: isize| phi.at(i + a, j + b);
            let p = u(0, 0);
            let px = (u(1, 0) - u(-1, 0)) / (two * h);
            let py = (u(0, 1) - u(0, -1)) / (two * h);
            let pxx = (u(1, 0) - two * p + u(-1, 0)) / (h * h);
            let pyy = (u(0, 1) - two * p + u(0, -1)) / (h * h);
            let pxy = (u(1, 1) - u(1, -1) - u(-1, 1) + u(-1, -1)) / (four * h * h);
            let grad = px * px + py * py;
            let hess = pxx * pxx + pyy * pyy + two * pxy * pxy;
            four * lambda * lambda * p * p - lit::<T>(8.0) * lambda * grad + four * hess
        })
        .collect())
}

/// `2λ²φ² + Σ_i [8 ∂_iφ ∂_i³φ + 6 (∂_i²φ)²]`: the load with mixed terms dropped.
///
/// Kept for comparison with [`BallProfile::load`] and the grid load; on the
/// unit square centre it gives `20π⁴` against the full `24π⁴`.
pub fn axis_sum_load<T: Real>(lambda: T, phi: T, d1: &[T], d2: &[T], d3: &[T]) -> T {
    let s = d1
        .iter()
        .zip(d2)
        .zip(d3)
        .fold(T::zero(), |acc, ((&a, &b), &c)| {
            acc + lit::<T>(8.0) * a * c + lit::<T>(6.0) * b * b
        });
    lit::<T>(2.0) * lambda * lambda * phi * phi + s
}

/// Weight, load and comparison constant on the samples of an eigenpair.
#[derive(Clone, Debug)]
pub struct WeightData<T> {
    pub a: Vec<T>,
    pub f: Vec<T>,
    pub sup_f: T,
    pub c: T,
}

impl<T: Real> WeightData<T> {
    /// CSV with columns `x, y, phi, a, f` for a grid eigenpair.
    pub fn write_grid_csv<W: Write>(&self, out: &mut W, grid: &Grid2D<T>) -> std::io::Result<()> {
        writeln!(out, "x,y,phi,a,f")?;
        for k in 0..self.a.len() {
            let p = grid.unknown_coords(k);
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                to_f64(p[0]),
                to_f64(p[1]),
                to_f64(self.a[k].sqrt()),
                to_f64(self.a[k]),
                to_f64(self.f[k])
            )?;
        }
        Ok(())
    }
}

/// JSON summary of an eigenpair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub lambda1: f64,
    pub c_fi: f64,
    pub sup_f: f64,
}

/// Whether a grid eigenpair sits on a staircase boundary.
pub fn is_approximate<T: Real>(e: &EigenPair<T>) -> bool {
    matches!(&e.profile, EigenProfile::Grid(g) if g.grid.fit == BoundaryFit::Rasterized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn bessel_zeros() {
        assert_relative_eq!(first_bessel_zero(0.0), 2.404825557695773, max_relative = 1e-13);
        // ν = 1/2: sin z / z
        assert_relative_eq!(first_bessel_zero(0.5), PI, max_relative = 1e-13);
        assert_relative_eq!(first_bessel_zero(1.0), 3.831705970207512, max_relative = 1e-13);
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let p = BallProfile::<f64>::new(3).unwrap();
        // n = 3: φ = sin(π r) / (π r)
        let r = 0.4;
        assert_relative_eq!(p.phi(r), (PI * r).sin() / (PI * r), max_relative = 1e-14);
        let [v, d1, d2, d1r] = p.derivatives(r);
        let e = 1e-4;
        assert_relative_eq!(v, p.phi(r));
        assert_relative_eq!(d1, (p.phi(r + e) - p.phi(r - e)) / (2.0 * e), max_relative = 1e-7);
        assert_relative_eq!(
            d2,
            (p.phi(r + e) - 2.0 * p.phi(r) + p.phi(r - e)) / (e * e),
            max_relative = 1e-6
        );
        assert_relative_eq!(d1r * r, d1, max_relative = 1e-14);
        assert!(p.phi(1.0).abs() < 1e-14);
    }

    #[test]
    fn ball_load_is_bilaplacian_of_weight() {
        // radial Δ²a by nested differences of Δa = a'' + (n−1) a'/r
        for n in [2usize, 3, 5] {
            let p = BallProfile::<f64>::new(n).unwrap();
            let e = 1e-3;
            let lap = |r: f64| {
                let a = |s: f64| p.weight(s);
                (a(r + e) - 2.0 * a(r) + a(r - e)) / (e * e)
                    + (n as f64 - 1.0) * (a(r + e) - a(r - e)) / (2.0 * e * r)
            };
            let r = 0.5;
            let bil = (lap(r + e) - 2.0 * lap(r) + lap(r - e)) / (e * e)
                + (n as f64 - 1.0) * (lap(r + e) - lap(r - e)) / (2.0 * e * r);
            assert_relative_eq!(p.load(r), bil, max_relative = 1e-3);
        }
    }

    #[test]
    fn square_centre_load_and_axis_sum() {
        let l = 2.0 * PI * PI;
        // φ = sin πx sin πy at the centre: φ_i = 0, φ_ii = −π², φ_iii = 0
        let axis = axis_sum_load(l, 1.0, &[0.0, 0.0], &[-PI * PI; 2], &[0.0, 0.0]);
        assert_relative_eq!(axis, 20.0 * PI.powi(4), max_relative = 1e-14);
    }

    #[test]
    fn comparison_constant_of_identity_ratio() {
        let d = [0.1, 0.2, 0.5];
        assert_relative_eq!(comparison_constant(&d, &d).unwrap(), 1.0 / 1.01);
    }
}
