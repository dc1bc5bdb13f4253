//! Supported domains, their boundary-distance functions, and 2-D lattices.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

/// Shape of the domain. Balls are centred at the origin with unit radius,
/// ellipses are centred at the origin with half-axes `a` (x) and `b` (y),
/// rectangles occupy `[0, width] × [0, height]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind<T> {
    UnitBall { n: usize },
    Ellipse { a: T, b: T },
    Rectangle { width: T, height: T },
}

/// Domain description with an optional grid-spacing hint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec<T> {
    #[serde(flatten)]
    pub kind: DomainKind<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<T>,
}

impl<T: Real> DomainSpec<T> {
    pub fn unit_ball(n: usize) -> Result<Self> {
        Self::new(DomainKind::UnitBall { n })
    }

    pub fn ellipse(a: T, b: T) -> Result<Self> {
        Self::new(DomainKind::Ellipse { a, b })
    }

    pub fn rectangle(width: T, height: T) -> Result<Self> {
        Self::new(DomainKind::Rectangle { width, height })
    }

    pub fn new(kind: DomainKind<T>) -> Result<Self> {
        let d = Self { kind, h: None };
        d.validate()?;
        Ok(d)
    }

    pub fn with_spacing(mut self, h: T) -> Result<Self> {
        self.h = Some(h);
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter invariants; deserialized specs should call this.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DomainKind::UnitBall { n } if n < 2 => {
                return Err(Error::InvalidInput(format!("ball dimension must be >= 2, got {n}")))
            }
            DomainKind::Ellipse { a, b } if !(a > T::zero() && b > T::zero()) => {
                return Err(Error::InvalidInput("ellipse half-axes must be positive".into()))
            }
            DomainKind::Rectangle { width, height } if !(width > T::zero() && height > T::zero()) => {
                return Err(Error::InvalidInput("rectangle sides must be positive".into()))
            }
            _ => {}
        }
        if let Some(h) = self.h {
            if !(h > T::zero()) {
                return Err(Error::InvalidInput("grid spacing must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            DomainKind::UnitBall { n } => n,
            _ => 2,
        }
    }

    /// Largest distance between two points of the closure.
    pub fn diameter(&self) -> T {
        match self.kind {
            DomainKind::UnitBall { .. } => lit(2.0),
            DomainKind::Ellipse { a, b } => lit::<T>(2.0) * a.max(b),
            DomainKind::Rectangle { width, height } => width.hypot(height),
        }
    }

    /// Largest value of `δ` over the domain.
    pub fn inradius(&self) -> T {
        match self.kind {
            DomainKind::UnitBall { .. } => T::one(),
            DomainKind::Ellipse { a, b } => a.min(b),
            DomainKind::Rectangle { width, height } => width.min(height) / lit(2.0),
        }
    }

    /// Whether `x` lies in the closed domain (with a relative slack of 1e-12).
    pub fn contains(&self, x: &[T]) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        let slack = lit::<T>(1e-12);
        match self.kind {
            DomainKind::UnitBall { .. } => x.iter().map(|&c| c * c).sum::<T>() <= T::one() + slack,
            DomainKind::Ellipse { a, b } => {
                let (u, v) = (x[0] / a, x[1] / b);
                u * u + v * v <= T::one() + slack
            }
            DomainKind::Rectangle { width, height } => {
                let sw = slack * width;
                let sh = slack * height;
                x[0] >= -sw && x[0] <= width + sw && x[1] >= -sh && x[1] <= height + sh
            }
        }
    }

    /// `δ(x) = dist(x, ∂Ω)` for `x` in the closed domain.
    pub fn distance_to_boundary(&self, x: &[T]) -> Result<T> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain {
                point: x.iter().map(|&c| to_f64(c)).collect(),
            });
        }
        Ok(match self.kind {
            DomainKind::UnitBall { .. } => {
                let r = x.iter().map(|&c| c * c).sum::<T>().sqrt();
                (T::one() - r).max(T::zero())
            }
            DomainKind::Rectangle { width, height } => x[0]
                .min(width - x[0])
                .min(x[1])
                .min(height - x[1])
                .max(T::zero()),
            DomainKind::Ellipse { a, b } => ellipse_distance(a, b, x[0].abs(), x[1].abs()),
        })
    }
}

/// Distance from `(x, y)` (first quadrant, inside the ellipse) to the boundary.
///
/// Solves the normal equation `g(θ) = (b² − a²) sin θ cos θ + a x sin θ − b y cos θ = 0`
/// for the boundary parameter by bisection on `[0, π/2]`, where `g(0) ≤ 0 ≤ g(π/2)`,
/// then compares against the two axis endpoints.
fn ellipse_distance<T: Real>(a: T, b: T, x: T, y: T) -> T {
    let g = |t: T| {
        let (s, c) = t.sin_cos();
        (b * b - a * a) * s * c + a * x * s - b * y * c
    };
    let dist = |t: T| {
        let (s, c) = t.sin_cos();
        (a * c - x).hypot(b * s - y)
    };
    let mut lo = T::zero();
    let mut hi = T::FRAC_PI_2();
    for _ in 0..200 {
        let mid = (lo + hi) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = (lo + hi) / lit(2.0);
    dist(root).min(dist(T::zero())).min(dist(T::FRAC_PI_2()))
}

/// How a lattice meets the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFit {
    /// Boundary lies on lattice lines (rectangles): clamped conditions by reflection.
    Aligned,
    /// Boundary cuts through the lattice (curved domains): staircase approximation.
    Rasterized,
}

/// Uniform 2-D lattice over the bounding box of a planar domain.
///
/// Rectangles use a vertex lattice whose outermost nodes sit on the edges;
/// curved domains use a cell-centred lattice symmetric about the origin.
/// Interior unknowns are the nodes with `δ > 0`, numbered so that the short
/// axis varies fastest (keeps stencil matrices narrow-banded).
#[derive(Clone, Debug)]
pub struct Grid2D<T> {
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub origin: [T; 2],
    pub fit: BoundaryFit,
    domain: DomainSpec<T>,
    delta: Vec<T>,
    node_to_unknown: Vec<Option<usize>>,
    unknown_to_node: Vec<usize>,
}

impl<T: Real> Grid2D<T> {
    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn unknowns(&self) -> usize {
        self.unknown_to_node.len()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn coords(&self, i: usize, j: usize) -> [T; 2] {
        [
            self.origin[0] + count::<T>(i) * self.h,
            self.origin[1] + count::<T>(j) * self.h,
        ]
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.node_to_unknown[node].is_some()
    }

    pub fn unknown_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.node_to_unknown[self.node_index(i as usize, j as usize)]
    }

    pub fn unknown_node(&self, k: usize) -> usize {
        self.unknown_to_node[k]
    }

    pub fn unknown_ij(&self, k: usize) -> (usize, usize) {
        self.node_ij(self.unknown_to_node[k])
    }

    pub fn unknown_coords(&self, k: usize) -> [T; 2] {
        let (i, j) = self.unknown_ij(k);
        self.coords(i, j)
    }

    /// `δ` at interior unknown `k`.
    pub fn unknown_delta(&self, k: usize) -> T {
        self.delta[self.unknown_to_node[k]]
    }

    /// Interior unknowns with `δ < threshold` (the boundary band).
    pub fn band(&self, threshold: T) -> Vec<usize> {
        (0..self.unknowns())
            .filter(|&k| self.unknown_delta(k) < threshold)
            .collect()
    }

    /// Number of interior nodes along the grid row and column through the centre.
    fn interior_extent(&self) -> (usize, usize) {
        let row = (0..self.nx)
            .filter(|&i| self.is_interior(self.node_index(i, self.ny / 2)))
            .count();
        let col = (0..self.ny)
            .filter(|&j| self.is_interior(self.node_index(self.nx / 2, j)))
            .count();
        (row, col)
    }
}

/// Minimum number of interior nodes per axis (the 13-point stencil reaches two nodes out).
pub const MIN_INTERIOR_PER_AXIS: usize = 3;

/// Builds the lattice for a planar domain at spacing `h`.
pub fn build_grid<T: Real>(d: &DomainSpec<T>, h: T) -> Result<Grid2D<T>> {
    d.validate()?;
    if !(h > T::zero()) {
        return Err(Error::InvalidInput("grid spacing must be positive".into()));
    }
    let (nx, ny, origin, fit) = match d.kind {
        DomainKind::UnitBall { n } if n != 2 => {
            return Err(Error::InvalidInput(format!(
                "2-D grids only; ball dimension is {n}"
            )))
        }
        DomainKind::Rectangle { width, height } => {
            let cx = lattice_cells(width, h)?;
            let cy = lattice_cells(height, h)?;
            (cx + 1, cy + 1, [T::zero(), T::zero()], BoundaryFit::Aligned)
        }
        DomainKind::UnitBall { .. } | DomainKind::Ellipse { .. } => {
            let (a, b) = match d.kind {
                DomainKind::Ellipse { a, b } => (a, b),
                _ => (T::one(), T::one()),
            };
            // one ring of exterior nodes around the domain
            let mx = (a / h).ceil().to_usize().unwrap_or(0) + 1;
            let my = (b / h).ceil().to_usize().unwrap_or(0) + 1;
            let half = lit::<T>(0.5);
            let origin = [
                -(count::<T>(mx) - half) * h,
                -(count::<T>(my) - half) * h,
            ];
            (2 * mx, 2 * my, origin, BoundaryFit::Rasterized)
        }
    };
    if nx.saturating_mul(ny) > 50_000_000 {
        return Err(Error::InvalidInput("grid spacing too fine".into()));
    }
    let mut delta = vec![T::zero(); nx * ny];
    let mut interior = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let p = [origin[0] + count::<T>(i) * h, origin[1] + count::<T>(j) * h];
            let node = j * nx + i;
            if d.contains(&p) {
                let dist = d.distance_to_boundary(&p)?;
                delta[node] = dist;
                // vertex lattices: nodes within rounding of an edge are boundary nodes
                interior[node] = dist > h * lit(1e-9);
            }
        }
    }
    let mut node_to_unknown = vec![None; nx * ny];
    let mut unknown_to_node = Vec::new();
    let mut push = |node: usize| {
        if interior[node] {
            node_to_unknown[node] = Some(unknown_to_node.len());
            unknown_to_node.push(node);
        }
    };
    if nx >= ny {
        for i in 0..nx {
            for j in 0..ny {
                push(j * nx + i);
            }
        }
    } else {
        for j in 0..ny {
            for i in 0..nx {
                push(j * nx + i);
            }
        }
    }
    let grid = Grid2D {
        h,
        nx,
        ny,
        origin,
        fit,
        domain: d.clone(),
        delta,
        node_to_unknown,
        unknown_to_node,
    };
    let (row, col) = grid.interior_extent();
    if row < MIN_INTERIOR_PER_AXIS || col < MIN_INTERIOR_PER_AXIS {
        return Err(Error::GridTooCoarse(format!(
            "spacing {} leaves {row}×{col} interior nodes through the centre; need at least {MIN_INTERIOR_PER_AXIS} per axis",
            to_f64(h)
        )));
    }
    Ok(grid)
}

fn lattice_cells<T: Real>(len: T, h: T) -> Result<usize> {
    let cells = (len / h).round();
    if (cells * h - len).abs() > lit::<T>(1e-6) * h {
        return Err(Error::InvalidInput(format!(
            "spacing {} does not divide side {}",
            to_f64(h),
            to_f64(len)
        )));
    }
    cells
        .to_usize()
        .ok_or_else(|| Error::InvalidInput("lattice size overflow".into()))
}

/// Scalar field on the interior unknowns of a grid.
#[derive(Clone, Debug)]
pub struct GridField<T> {
    pub grid: Arc<Grid2D<T>>,
    pub values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn zeros(grid: Arc<Grid2D<T>>) -> Self {
        let n = grid.unknowns();
        Self {
            grid,
            values: vec![T::zero(); n],
        }
    }

    pub fn from_fn<F: Fn([T; 2]) -> T>(grid: Arc<Grid2D<T>>, f: F) -> Self {
        let values = (0..grid.unknowns()).map(|k| f(grid.unknown_coords(k))).collect();
        Self { grid, values }
    }

    /// Value at lattice node `(i, j)`; zero for non-interior or out-of-lattice nodes.
    pub fn at(&self, i: isize, j: isize) -> T {
        self.grid
            .unknown_at(i, j)
            .map_or(T::zero(), |k| self.values[k])
    }

    pub fn sup_abs(&self) -> T {
        crate::scalar::sup_abs(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_distances() {
        let d = DomainSpec::<f64>::unit_ball(2).unwrap();
        assert_eq!(d.distance_to_boundary(&[0.0, 0.0]).unwrap(), 1.0);
        assert_relative_eq!(d.distance_to_boundary(&[0.6, 0.0]).unwrap(), 0.4, epsilon = 1e-15);
        assert!(matches!(
            d.distance_to_boundary(&[1.1, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(d.distance_to_boundary(&[0.1, 0.1, 0.1]).is_err());
    }

    #[test]
    fn ellipse_center_distance_is_minor_half_axis() {
        let d = DomainSpec::<f64>::ellipse(1.0, 0.5).unwrap();
        assert_relative_eq!(d.distance_to_boundary(&[0.0, 0.0]).unwrap(), 0.5, epsilon = 1e-14);
    }

    /// Dense boundary sampling, refined around the best sample.
    fn ellipse_distance_oracle(a: f64, b: f64, x: f64, y: f64) -> f64 {
        let n = 200_000;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let d = (a * t.cos() - x).hypot(b * t.sin() - y);
            if d < best.0 {
                best = (d, t);
            }
        }
        let step = 2.0 * std::f64::consts::PI / n as f64;
        let (mut lo, mut hi) = (best.1 - step, best.1 + step);
        let f = |t: f64| (a * t.cos() - x).hypot(b * t.sin() - y);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f(0.5 * (lo + hi)).min(best.0)
    }

    #[test]
    fn ellipse_distance_matches_sampling_oracle() {
        let cases = [
            (1.0, 0.5, 0.0, 0.0),
            (1.0, 0.5, 0.3, 0.0),
            (1.0, 0.5, 0.7, 0.0),
            (1.0, 0.5, 0.74, 0.01),
            (1.0, 0.5, -0.2, 0.3),
            (1.0, 0.5, 0.9, 0.1),
            (0.5, 1.0, 0.2, -0.5),
            (1.0, 0.95, 0.1, 0.2),
        ];
        for (a, b, x, y) in cases {
            let d = DomainSpec::<f64>::ellipse(a, b).unwrap();
            let got = d.distance_to_boundary(&[x, y]).unwrap();
            let want = ellipse_distance_oracle(a, b, x, y);
            assert!((got - want).abs() < 1e-12, "({a},{b}) at ({x},{y}): {got} vs {want}");
        }
    }

    #[test]
    fn rectangle_grid_counts() {
        let d = DomainSpec::<f64>::rectangle(1.0, 1.0).unwrap();
        let g = build_grid(&d, 0.25).unwrap();
        assert_eq!(g.unknowns(), 9);
        assert!(matches!(build_grid(&d, 0.5), Err(Error::GridTooCoarse(_))));
        assert!(build_grid(&d, 0.3).is_err());
    }

    #[test]
    fn disk_grid_count_close_to_area() {
        let d = DomainSpec::<f64>::unit_ball(2).unwrap();
        let g = build_grid(&d, 0.1).unwrap();
        // enumeration oracle: cell centres ((i + 1/2) h, (j + 1/2) h) strictly inside
        let mut exact = 0;
        for i in -12i32..12 {
            for j in -12i32..12 {
                let (x, y) = ((i as f64 + 0.5) * 0.1, (j as f64 + 0.5) * 0.1);
                if x * x + y * y < 1.0 {
                    exact += 1;
                }
            }
        }
        assert_eq!(g.unknowns(), exact);
        let target = std::f64::consts::PI / 0.01;
        assert!((exact as f64 - target).abs() / target < 0.02);
    }

    #[test]
    fn interior_nodes_have_axis_neighbours_in_box() {
        for d in [
            DomainSpec::<f64>::rectangle(1.0, 0.5).unwrap(),
            DomainSpec::<f64>::ellipse(1.0, 0.5).unwrap(),
        ] {
            let g = build_grid(&d, 0.05).unwrap();
            for k in 0..g.unknowns() {
                let (i, j) = g.unknown_ij(k);
                assert!(i >= 1 && j >= 1 && i + 1 < g.nx && j + 1 < g.ny);
            }
        }
    }

    #[test]
    fn band_is_monotone_in_threshold() {
        let d = DomainSpec::<f64>::ellipse(1.0, 0.5).unwrap();
        let g = build_grid(&d, 0.05).unwrap();
        let mut prev = 0;
        for t in [0.01, 0.05, 0.1, 0.2, 0.6] {
            let b = g.band(t);
            assert!(b.len() >= prev);
            prev = b.len();
        }
        assert_eq!(prev, g.unknowns());
    }

    #[test]
    fn domain_spec_json_shape() {
        let d = DomainSpec::<f64>::ellipse(1.0, 0.5).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"ellipse","a":1.0,"b":0.5}"#);
        let back: DomainSpec<f64> = serde_json::from_str(r#"{"kind":"unit_ball","n":3,"h":0.1}"#).unwrap();
        assert_eq!(back.dimension(), 3);
        assert_eq!(back.h, Some(0.1));
    }
}
