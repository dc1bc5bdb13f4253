//! Finite-difference clamped plate on planar lattices and discrete Green functions.
//!
//! The operator is the 13-point stencil
//!
//! ```text
//!             1
//!        2   -8    2
//!    1  -8   20   -8   1      × h⁻⁴
//!        2   -8    2
//!             1
//! ```
//!
//! On rectangles the boundary lies on lattice lines: boundary nodes carry
//! `u = 0`, and `∂_ν u = 0` is imposed with the reflected ghost
//! `u(−h) = u(h)`. On curved domains the lattice is masked and every
//! exterior node is zero (a staircase boundary); results there are flagged as
//! approximate.

use std::sync::{Arc, OnceLock};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boggio::{BoggioKernel, GreenKernel};
use crate::domain::{build_grid, BoundaryFit, DomainKind, DomainSpec, Grid2D, GridField};
use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, BandCholesky, CsrMatrix};
use crate::scalar::{dot, lit, sup_abs, to_f64, Real};

/// Stencil offsets and weights (before the `h⁻⁴` factor).
pub const STENCIL: [(isize, isize, f64); 13] = [
    (0, 0, 20.0),
    (1, 0, -8.0),
    (-1, 0, -8.0),
    (0, 1, -8.0),
    (0, -1, -8.0),
    (1, 1, 2.0),
    (1, -1, 2.0),
    (-1, 1, 2.0),
    (-1, -1, 2.0),
    (2, 0, 1.0),
    (-2, 0, 1.0),
    (0, 2, 1.0),
    (0, -2, 1.0),
];

/// Unknown count up to which dense inverses are formed.
pub const DENSE_LIMIT: usize = 4096;

/// Largest banded factor (stored entries) the direct solver will build.
pub const FACTOR_LIMIT: usize = 40_000_000;

/// Applies the free-space stencil to a lattice function at `(i, j)`.
pub fn stencil_at<T: Real, F: Fn(isize, isize) -> T>(u: F, i: isize, j: isize, h: T) -> T {
    let s = STENCIL
        .iter()
        .fold(T::zero(), |acc, &(di, dj, w)| acc + lit::<T>(w) * u(i + di, j + dj));
    s / (h * h * h * h)
}

/// How linear systems with the plate matrix are solved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMode<T> {
    /// Banded Cholesky with one refinement step; the normwise backward error must stay below `1000 ε`.
    Direct,
    /// Conjugate gradients to relative residual `tol` (at most `1e−8`).
    ConjugateGradient { tol: T, max_iter: usize },
}

/// Assembled clamped-plate matrix on the interior unknowns of a grid.
#[derive(Debug)]
pub struct ClampedPlate<T> {
    grid: Arc<Grid2D<T>>,
    matrix: CsrMatrix<T>,
    factor: OnceLock<Result<BandCholesky<T>>>,
}

impl<T: Real> ClampedPlate<T> {
    pub fn assemble(grid: Arc<Grid2D<T>>) -> Result<Self> {
        let h4 = grid.h.powi(4);
        let mut trip = Vec::with_capacity(13 * grid.unknowns());
        for k in 0..grid.unknowns() {
            let (i, j) = grid.unknown_ij(k);
            let (i, j) = (i as isize, j as isize);
            for &(di, dj, w) in STENCIL.iter() {
                let (mut p, mut q) = (i + di, j + dj);
                if grid.fit == BoundaryFit::Aligned {
                    p = reflect(p, grid.nx);
                    q = reflect(q, grid.ny);
                }
                if let Some(col) = grid.unknown_at(p, q) {
                    trip.push((k, col, lit::<T>(w) / h4));
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(grid.unknowns(), trip);
        Ok(Self {
            grid,
            matrix,
            factor: OnceLock::new(),
        })
    }

    /// Builds the grid for `d` at spacing `h` and assembles on it.
    pub fn for_domain(d: &DomainSpec<T>, h: T) -> Result<Self> {
        Self::assemble(Arc::new(build_grid(d, h)?))
    }

    pub fn grid(&self) -> &Arc<Grid2D<T>> {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    /// True when the boundary is a staircase approximation.
    pub fn is_approximate(&self) -> bool {
        self.grid.fit == BoundaryFit::Rasterized
    }

    pub fn apply(&self, u: &[T]) -> Vec<T> {
        self.matrix.matvec(u)
    }

    fn cholesky(&self) -> Result<&BandCholesky<T>> {
        self.factor
            .get_or_init(|| {
                let n = self.matrix.dim();
                let bw = self.matrix.bandwidth();
                if n.saturating_mul(bw + 1) > FACTOR_LIMIT {
                    return Err(Error::MemoryBudget {
                        unknowns: n,
                        limit: FACTOR_LIMIT / (bw + 1),
                    });
                }
                self.matrix.to_band().cholesky()
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn solve_vec(&self, rhs: &[T], mode: SolveMode<T>) -> Result<Vec<T>> {
        match mode {
            SolveMode::Direct => {
                let f = self.cholesky()?;
                let mut x = f.solve(rhs);
                let bn = dot(rhs, rhs).sqrt();
                if bn > T::zero() {
                    // one round of iterative refinement
                    let ax = self.matrix.matvec(&x);
                    let r: Vec<T> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
                    let dx = f.solve(&r);
                    x.iter_mut().zip(&dx).for_each(|(xi, &d)| *xi = *xi + d);
                    let ax = self.matrix.matvec(&x);
                    let r = ax.iter().zip(rhs).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
                    let anorm = (0..self.matrix.dim()).fold(T::zero(), |m, i| {
                        m.max(self.matrix.row(i).fold(T::zero(), |acc, (_, a)| acc + a.abs()))
                    });
                    // normwise backward error in the max norm
                    let eta = r / (anorm * sup_abs(&x) + sup_abs(rhs));
                    if eta > lit::<T>(1e3) * T::epsilon() {
                        return Err(Error::Accuracy(format!(
                            "direct solve backward error {:e}",
                            to_f64(eta)
                        )));
                    }
                }
                Ok(x)
            }
            SolveMode::ConjugateGradient { tol, max_iter } => {
                let tol = tol.min(lit(1e-8));
                Ok(conjugate_gradient(&self.matrix, rhs, tol, max_iter)?.solution)
            }
        }
    }

    pub fn solve(&self, rhs: &GridField<T>, mode: SolveMode<T>) -> Result<GridField<T>> {
        if !Arc::ptr_eq(&rhs.grid, &self.grid) && rhs.values.len() != self.grid.unknowns() {
            return Err(Error::InvalidInput("right-hand side lives on another grid".into()));
        }
        let values = self.solve_vec(&rhs.values, mode)?;
        Ok(GridField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// `G_h(·, y) = A⁻¹ e_y h⁻²` for interior unknown `y`.
    pub fn green_column(&self, y: usize) -> Result<GridField<T>> {
        let values = self.green_column_vec(y)?;
        Ok(GridField {
            grid: self.grid.clone(),
            values,
        })
    }

    fn green_column_vec(&self, y: usize) -> Result<Vec<T>> {
        let n = self.grid.unknowns();
        if y >= n {
            return Err(Error::InvalidInput(format!("unknown {y} out of range (n = {n})")));
        }
        let mut e = vec![T::zero(); n];
        e[y] = (self.grid.h * self.grid.h).recip();
        let f = self.cholesky()?;
        f.solve_in_place(&mut e);
        Ok(e)
    }
}

fn reflect(p: isize, len: usize) -> isize {
    let last = len as isize - 1;
    if p < 0 {
        -p
    } else if p > last {
        2 * last - p
    } else {
        p
    }
}

/// Dense discrete Green function `G_h(x, y)` on all interior pairs.
#[derive(Clone, Debug)]
pub struct DiscreteGreen<T> {
    grid: Arc<Grid2D<T>>,
    nodes: Vec<[T; 2]>,
    values: Vec<T>,
}

impl<T: Real> DiscreteGreen<T> {
    /// Forms every column; refuses grids with more than [`DENSE_LIMIT`] unknowns.
    pub fn dense(plate: &ClampedPlate<T>) -> Result<Self> {
        let n = plate.grid.unknowns();
        if n > DENSE_LIMIT {
            return Err(Error::MemoryBudget {
                unknowns: n,
                limit: DENSE_LIMIT,
            });
        }
        plate.cholesky()?;
        let cols: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|y| plate.green_column_vec(y))
            .collect::<Result<_>>()?;
        let nodes = (0..n).map(|k| plate.grid.unknown_coords(k)).collect();
        Ok(Self {
            grid: plate.grid.clone(),
            nodes,
            values: cols.concat(),
        })
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn grid(&self) -> &Arc<Grid2D<T>> {
        &self.grid
    }

    /// `G_h(x_k, y_l)`.
    pub fn entry(&self, x: usize, y: usize) -> T {
        self.values[y * self.nodes.len() + x]
    }

    pub fn column(&self, y: usize) -> &[T] {
        let n = self.nodes.len();
        &self.values[y * n..(y + 1) * n]
    }

    fn locate(&self, p: &[T]) -> Result<usize> {
        let g = &self.grid;
        if p.len() != 2 {
            return Err(Error::InvalidInput("discrete kernel is planar".into()));
        }
        let fi = (p[0] - g.origin[0]) / g.h;
        let fj = (p[1] - g.origin[1]) / g.h;
        let (ri, rj) = (fi.round(), fj.round());
        let tol = lit::<T>(1e-6);
        if (fi - ri).abs() > tol || (fj - rj).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "point ({}, {}) is not a lattice node",
                to_f64(p[0]),
                to_f64(p[1])
            )));
        }
        let (i, j) = (ri.to_isize().unwrap_or(-1), rj.to_isize().unwrap_or(-1));
        g.unknown_at(i, j).ok_or_else(|| Error::OutsideDomain {
            point: p.iter().map(|&c| to_f64(c)).collect(),
        })
    }
}

impl<T: Real> GreenKernel<T> for DiscreteGreen<T> {
    fn domain(&self) -> &DomainSpec<T> {
        self.grid.domain()
    }

    fn green(&self, x: &[T], y: &[T]) -> Result<T> {
        Ok(self.entry(self.locate(x)?, self.locate(y)?))
    }

    fn lattice(&self) -> Option<&[[T; 2]]> {
        Some(&self.nodes)
    }
}

/// Which Green-function entries a sign probe inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ProbeMode {
    /// Every pair of interior nodes.
    Dense,
    /// `columns` source nodes drawn without replacement, all targets.
    Subsample { columns: usize, seed: u64 },
}

/// Result of scanning a Green function for negative entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub min: f64,
    pub argmin_x: [f64; 2],
    pub argmin_y: [f64; 2],
    pub negative_fraction: f64,
    pub h: f64,
    pub mode: String,
    pub seed: Option<u64>,
    /// `fd` for the plate matrix, `boggio` for the exact ball kernel.
    pub kernel: String,
    /// Boundary represented by a staircase mask.
    pub approximate: bool,
    pub unknowns: usize,
    pub pairs: u64,
}

/// Scans the Green function of `d` on the lattice of spacing `h`.
///
/// Rectangles and ellipses use the finite-difference plate; the disk uses
/// the exact kernel at the lattice nodes. Pairs `x = y` are skipped.
pub fn sign_probe<T: Real>(d: &DomainSpec<T>, h: T, mode: ProbeMode) -> Result<SignReport> {
    let grid = Arc::new(build_grid(d, h)?);
    let n = grid.unknowns();
    let columns: Vec<usize> = match mode {
        ProbeMode::Dense => {
            if n > DENSE_LIMIT {
                return Err(Error::MemoryBudget {
                    unknowns: n,
                    limit: DENSE_LIMIT,
                });
            }
            (0..n).collect()
        }
        ProbeMode::Subsample { columns, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = sample(&mut rng, n, columns.min(n)).into_vec();
            picked.sort_unstable();
            picked
        }
    };
    let (kernel, scans) = match d.kind {
        DomainKind::UnitBall { .. } => {
            let bk = BoggioKernel::<T>::new(2)?;
            let nodes: Vec<[T; 2]> = (0..n).map(|k| grid.unknown_coords(k)).collect();
            let scans = columns
                .par_iter()
                .map(|&y| {
                    let col = nodes
                        .iter()
                        .enumerate()
                        .map(|(x, p)| if x == y { Ok(T::zero()) } else { bk.green(p, &nodes[y]) })
                        .collect::<Result<Vec<T>>>()?;
                    Ok(scan_column(&col, y))
                })
                .collect::<Result<Vec<_>>>()?;
            ("boggio", scans)
        }
        _ => {
            let plate = ClampedPlate::assemble(grid.clone())?;
            plate.cholesky()?;
            let scans = columns
                .par_iter()
                .map(|&y| Ok(scan_column(&plate.green_column_vec(y)?, y)))
                .collect::<Result<Vec<_>>>()?;
            ("fd", scans)
        }
    };
    let mut best: Option<(T, usize, usize)> = None;
    let mut negative = 0u64;
    for s in &scans {
        negative += s.negative;
        if let Some((v, x)) = s.min {
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, x, s.y));
            }
        }
    }
    let pairs = columns.len() as u64 * (n as u64 - 1);
    let (min, x, y) = best.ok_or_else(|| Error::InvalidInput("no pairs to probe".into()))?;
    let pt = |k: usize| {
        let c = grid.unknown_coords(k);
        [to_f64(c[0]), to_f64(c[1])]
    };
    let (mode_name, seed) = match mode {
        ProbeMode::Dense => ("dense", None),
        ProbeMode::Subsample { seed, .. } => ("subsample", Some(seed)),
    };
    Ok(SignReport {
        min: to_f64(min),
        argmin_x: pt(x),
        argmin_y: pt(y),
        negative_fraction: negative as f64 / pairs as f64,
        h: to_f64(h),
        mode: mode_name.into(),
        seed,
        kernel: kernel.into(),
        approximate: grid.fit == BoundaryFit::Rasterized && kernel == "fd",
        unknowns: n,
        pairs,
    })
}

struct ColumnScan<T> {
    y: usize,
    min: Option<(T, usize)>,
    negative: u64,
}

fn scan_column<T: Real>(col: &[T], y: usize) -> ColumnScan<T> {
    let mut min: Option<(T, usize)> = None;
    let mut negative = 0;
    for (x, &v) in col.iter().enumerate() {
        if x == y {
            continue;
        }
        if v < T::zero() {
            negative += 1;
        }
        if min.is_none_or(|(m, _)| v < m) {
            min = Some((v, x));
        }
    }
    ColumnScan { y, min, negative }
}
