//! Bracketed fixed-point solver for `Δ²u = u^{−α}` with clamped conditions.
//!
//! With `a = φ₁²` and `u = a v` the problem becomes `v = T(v)`,
//!
//! ```text
//! T_ε(v)(x) = ∫_Ω K(x, y) g_ε(v(y)) dy,   K(x, y) = G(x, y) / (a(x) a(y)^α),
//! ```
//!
//! where `g_ε(t) = max(t, ε)^{−α}`. If `1/M ≤ ∫ K(x, ·) ≤ M`, then `T_ε` maps
//! the order interval `[v₁, v₂]`, `v₁ = M^{−1−α} ε^{α²}`, `v₂ = M ε^{−α}`,
//! into itself; when `ε^{1−α²} ≤ M^{−1−α}` also `v₁ ≥ ε`, so the truncation is
//! inactive at any fixed point in the bracket.
//!
//! On the unit ball the kernel is radial and the solver works with cell-centred
//! radial nodes and product-integration (Nyström) weights.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boggio::RadialGreen;
use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, PowerWeightRule};
use crate::scalar::{count, lit, to_f64, Real};
use crate::spectral::BallProfile;

/// How `ε` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum EpsilonPolicy<T> {
    /// Equality case `ε = M^{−1/(1−α)}`.
    Auto,
    /// Fixed value; must satisfy `ε^{1−α²} ≤ M^{−1−α}`.
    Explicit { value: T },
}

/// Solver parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig<T> {
    pub alpha: T,
    /// Radial nodes `r_i = (i + ½)/nodes`.
    pub nodes: usize,
    /// Gauss points per interval in the product-integration weights.
    pub quad_points: usize,
    pub epsilon: EpsilonPolicy<T>,
    /// `θ` in `v ← (1 − θ) v + θ T(v)`.
    pub damping: T,
    #[serde(alias = "max_iter")]
    pub max_iterations: usize,
    /// Stop when `sup |v^{k+1} − v^k| / sup v^k ≤ tolerance`.
    pub tolerance: T,
    /// Stratified radii used for the mass bound, besides the nodes.
    pub mass_samples: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            alpha: lit(0.5),
            nodes: 512,
            quad_points: 8,
            epsilon: EpsilonPolicy::Auto,
            damping: lit(0.5),
            max_iterations: 500,
            tolerance: lit(1e-12),
            mass_samples: 200,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn with_alpha(alpha: T) -> Result<Self> {
        let cfg = Self {
            alpha,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::InvalidInput("alpha out of range (0,1)".into()));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::InvalidInput("damping out of range (0,1]".into()));
        }
        if self.nodes < 8 {
            return Err(Error::InvalidInput("need at least 8 radial nodes".into()));
        }
        if !(1..=12).contains(&self.quad_points) {
            return Err(Error::InvalidInput("quad_points must lie in 1..=12".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if let EpsilonPolicy::Explicit { value } = self.epsilon {
            if !(value > T::zero() && value < T::one()) {
                return Err(Error::InvalidInput("explicit epsilon out of range (0,1)".into()));
            }
        }
        Ok(())
    }
}

/// `g_ε(t) = ε^{−α}` for `t < ε`, `t^{−α}` otherwise.
pub fn g_eps<T: Real>(t: T, eps: T, alpha: T) -> T {
    t.max(eps).powf(-alpha)
}

/// `ε = M^{−1/(1−α)}`, the equality case of `ε^{1−α²} ≤ M^{−1−α}`.
pub fn choose_epsilon<T: Real>(m: T, alpha: T) -> Result<T> {
    if !(m > T::one()) {
        return Err(Error::InvalidInput(format!("M must exceed 1, got {}", to_f64(m))));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidInput("alpha out of range (0,1)".into()));
    }
    let eps = m.powf(-(T::one() - alpha).recip());
    Ok(if eps < T::one() {
        eps
    } else {
        T::one() - T::epsilon()
    })
}

/// `M = 1.05 · max(sup mass, 1 / inf mass)`.
pub fn estimate_m<T: Real>(masses: &[T]) -> Result<T> {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for &m in masses {
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::Positivity(format!("kernel mass {}", to_f64(m))));
        }
        lo = lo.min(m);
        hi = hi.max(m);
    }
    if masses.is_empty() {
        return Err(Error::InvalidInput("no mass samples".into()));
    }
    let m = hi.max(lo.recip()) * lit(1.05);
    debug_assert!(m > T::one());
    Ok(m)
}

/// Invariant order interval `[v₁, v₂]` of `T_ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket<T> {
    pub m: T,
    pub epsilon: T,
    pub v1: T,
    pub v2: T,
}

impl<T: Real> Bracket<T> {
    pub fn new(m: T, epsilon: T, alpha: T) -> Result<Self> {
        if !(m > T::one() && epsilon > T::zero() && epsilon < T::one()) {
            return Err(Error::InvalidInput("bracket needs M > 1 and 0 < ε < 1".into()));
        }
        let one = T::one();
        let lhs = epsilon.powf(one - alpha * alpha);
        let rhs = m.powf(-one - alpha);
        if lhs > rhs * (one + lit(1e-12)) {
            return Err(Error::InvalidInput(format!(
                "ε = {} violates ε^(1−α²) ≤ M^(−1−α)",
                to_f64(epsilon)
            )));
        }
        let v1 = m.powf(-one - alpha) * epsilon.powf(alpha * alpha);
        let v2 = m * epsilon.powf(-alpha);
        Ok(Self {
            m,
            epsilon,
            v1: v1.max(epsilon),
            v2,
        })
    }

    /// Geometric midpoint `(v₁ v₂)^{1/2}`.
    pub fn midpoint(&self) -> T {
        (self.v1 * self.v2).sqrt()
    }
}

/// Starting iterate for [`iterate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Midpoint,
    Lower,
    Upper,
}

/// Dense product-integration matrix `W` with `T_ε(v)_i = Σ_j W_ij g_ε(v_j)`.
#[derive(Clone, Debug)]
pub struct NystromOperator<T> {
    nodes: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> NystromOperator<T> {
    /// From a row-major `n × n` matrix with nonnegative entries.
    pub fn from_weights(nodes: Vec<T>, w: Vec<T>) -> Result<Self> {
        let n = nodes.len();
        if w.len() != n * n {
            return Err(Error::InvalidInput("weight matrix has the wrong size".into()));
        }
        if let Some(k) = w.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::Positivity(format!(
                "weight ({}, {}) = {}",
                k / n,
                k % n,
                to_f64(w[k])
            )));
        }
        Ok(Self { nodes, w })
    }

    /// Constant kernel `K ≡ c` on a unit-measure domain sampled at `m` points.
    pub fn constant(c: T, m: usize) -> Result<Self> {
        let nodes = (0..m)
            .map(|i| (count::<T>(i) + lit(0.5)) / count(m))
            .collect();
        Self::from_weights(nodes, vec![c / count(m); m * m])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.w[i * self.nodes.len() + j]
    }

    /// `Σ_j W_ij g_j`, rows in parallel.
    pub fn apply(&self, g: &[T]) -> Vec<T> {
        let n = self.nodes.len();
        self.w
            .par_chunks(n)
            .map(|row| row.iter().zip(g).fold(T::zero(), |acc, (&w, &x)| acc + w * x))
            .collect()
    }

    /// Discrete kernel masses `Σ_j W_ij`.
    pub fn row_sums(&self) -> Vec<T> {
        let n = self.nodes.len();
        self.w.chunks(n).map(|row| row.iter().copied().sum()).collect()
    }

    pub fn t_eps(&self, v: &[T], eps: T, alpha: T) -> Vec<T> {
        let g: Vec<T> = v.iter().map(|&t| g_eps(t, eps, alpha)).collect();
        self.apply(&g)
    }

    /// `T` without truncation.
    pub fn t_plain(&self, v: &[T], alpha: T) -> Vec<T> {
        let g: Vec<T> = v.iter().map(|&t| t.powf(-alpha)).collect();
        self.apply(&g)
    }
}

/// Outcome of the damped fixed-point iteration.
#[derive(Clone, Debug)]
pub struct Iteration<T> {
    pub v: Vec<T>,
    pub iterations: usize,
    /// `sup |v^{k+1} − v^k| / sup v^k` per step.
    pub history: Vec<f64>,
    /// `(inf v^k, sup v^k)` per step, starting with the initial iterate.
    pub bracket_trace: Vec<[f64; 2]>,
}

/// Damped Picard iteration `v ← (1 − θ) v + θ T_ε(v)` inside the bracket.
///
/// Every iterate is checked against `[v₁, v₂]` (relative slack `1e−12`);
/// on exit the fixed point must satisfy `min v ≥ ε`.
pub fn iterate<T: Real>(
    op: &NystromOperator<T>,
    b: &Bracket<T>,
    cfg: &SolverConfig<T>,
    start: Start,
) -> Result<Iteration<T>> {
    cfg.validate()?;
    let n = op.len();
    let v0 = match start {
        Start::Midpoint => b.midpoint(),
        Start::Lower => b.v1,
        Start::Upper => b.v2,
    };
    let mut v = vec![v0; n];
    let theta = cfg.damping;
    let slack = lit::<T>(1e-12);
    let (lo, hi) = (b.v1 * (T::one() - slack), b.v2 * (T::one() + slack));
    let mut history = Vec::new();
    let mut trace = vec![[to_f64(v0), to_f64(v0)]];
    for k in 1..=cfg.max_iterations {
        let tv = op.t_eps(&v, b.epsilon, cfg.alpha);
        let next: Vec<T> = v
            .iter()
            .zip(&tv)
            .map(|(&a, &t)| (T::one() - theta) * a + theta * t)
            .collect();
        let (mn, mx) = min_max(&next);
        trace.push([to_f64(mn), to_f64(mx)]);
        if mn < lo || mx > hi {
            return Err(Error::BracketViolation {
                iteration: k,
                min: to_f64(mn),
                max: to_f64(mx),
                lower: to_f64(b.v1),
                upper: to_f64(b.v2),
            });
        }
        let diff = next
            .iter()
            .zip(&v)
            .fold(T::zero(), |m, (&a, &c)| m.max((a - c).abs()));
        let (_, sup_prev) = min_max(&v);
        let change = diff / sup_prev;
        history.push(to_f64(change));
        v = next;
        if change <= cfg.tolerance {
            if mn < b.epsilon {
                return Err(Error::TruncationActive {
                    min_v: to_f64(mn),
                    epsilon: to_f64(b.epsilon),
                });
            }
            return Ok(Iteration {
                v,
                iterations: k,
                history,
                bracket_trace: trace,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: history.last().copied().unwrap_or(f64::NAN),
        trace: history,
    })
}

fn min_max<T: Real>(v: &[T]) -> (T, T) {
    v.iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Panel counts for [`RadialKernelK::mass`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassQuadrature {
    /// Uniform panels on `[0, r]` and geometric panels on `[r, 1]`.
    pub panels: usize,
    /// Gauss points per panel.
    pub points: usize,
}

impl Default for MassQuadrature {
    fn default() -> Self {
        Self {
            panels: 12,
            points: 10,
        }
    }
}

/// Weighted radial kernel `K(r, s) = K_r(r, s) / (a(r) a(s)^α)` on the unit ball,
/// with `K_r` the sphere integral of the Green function.
#[derive(Clone, Debug)]
pub struct RadialKernelK<T> {
    green: RadialGreen<T>,
    profile: BallProfile<T>,
    alpha: T,
    /// `a''(1) = 2 φ₁'(1)²`.
    a_second: T,
}

impl<T: Real> RadialKernelK<T> {
    pub fn new(n: usize, alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidInput("alpha out of range (0,1)".into()));
        }
        let profile = BallProfile::new(n)?;
        let slope = profile.boundary_slope();
        Ok(Self {
            green: RadialGreen::new(n)?,
            a_second: lit::<T>(2.0) * slope * slope,
            profile,
            alpha,
        })
    }

    pub fn dimension(&self) -> usize {
        self.green.dimension()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn green(&self) -> &RadialGreen<T> {
        &self.green
    }

    pub fn profile(&self) -> &BallProfile<T> {
        &self.profile
    }

    /// `a(r) = φ₁(r)²`.
    pub fn weight(&self, r: T) -> T {
        self.profile.weight(r)
    }

    /// `(1 − s)² / a(s)`, finite up to `s = 1`.
    fn gap_sq_over_weight(&self, s: T) -> T {
        let t = T::one() - s;
        if t == T::zero() {
            return lit::<T>(2.0) / self.a_second;
        }
        let q = t / self.profile.phi(s);
        q * q
    }

    /// `K(r, s)` for `r < 1`.
    pub fn value(&self, r: T, s: T) -> T {
        self.green.value(r, s) / (self.weight(r) * self.weight(s).powf(self.alpha))
    }

    /// Limit of `K(r, s)` as `r → 1`: `∂²_r K_r(1, s) / (a''(1) a(s)^α)`.
    pub fn boundary_value(&self, s: T) -> T {
        self.green.boundary_second_derivative(s) / (self.a_second * self.weight(s).powf(self.alpha))
    }

    /// `∫_0^1 K(r, s) ds`, using the boundary limit at `r = 1`.
    pub fn mass_at(&self, r: T, quad: MassQuadrature) -> T {
        let one = T::one();
        let gl = GaussLegendre::<T>::new(quad.points);
        let boundary = r >= one;
        let r = r.min(one);
        let inv_a = if boundary { T::zero() } else { self.weight(r).recip() };
        let f = |s: T| -> T {
            if boundary {
                self.boundary_value(s)
            } else {
                self.green.value(r, s) * inv_a / self.weight(s).powf(self.alpha)
            }
        };
        // uniform panels, dyadic panels toward s = 1, then dyadic panels
        // toward 1 on the scale 1 − r
        let half = lit::<T>(0.5);
        let mut breaks: Vec<T> = (0..=quad.panels)
            .map(|i| count::<T>(i) / count(quad.panels))
            .collect();
        let scale = if boundary { one } else { one - r };
        let mut g = half;
        while g > scale * half {
            breaks.push(one - g);
            g = g * half;
        }
        let mut gap = scale;
        breaks.push(r);
        for _ in 0..quad.panels {
            gap = gap * half;
            breaks.push(one - gap);
        }
        breaks.retain(|&b| b <= one - gap);
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        breaks.dedup();
        let total = breaks
            .windows(2)
            .fold(T::zero(), |acc, w| acc + gl.integrate(w[0], w[1], &f));
        let two = lit::<T>(2.0);
        let p = if boundary {
            one - two * self.alpha
        } else {
            two - two * self.alpha
        };
        let rule = PowerWeightRule::new(p, quad.points.min(12));
        let smooth = |t: T| -> T {
            let s = one - t;
            let ratio = self.gap_sq_over_weight(s).powf(self.alpha);
            if boundary {
                self.green.boundary_second_derivative(s) / t / self.a_second * ratio
            } else {
                self.green.value(r, s) / (t * t) * inv_a * ratio
            }
        };
        total + rule.integrate(gap, smooth)
    }

    /// [`Self::mass_at`], accepted only if doubling the panel count changes it
    /// by at most `1e−6` relatively.
    pub fn mass(&self, r: T, quad: MassQuadrature) -> Result<T> {
        let a = self.mass_at(r, quad);
        let b = self.mass_at(
            r,
            MassQuadrature {
                panels: 2 * quad.panels,
                ..quad
            },
        );
        if (a - b).abs() > lit::<T>(1e-6) * b.abs() {
            return Err(Error::Accuracy(format!(
                "kernel mass at r = {} changed by {:e} under refinement",
                to_f64(r),
                to_f64((a - b).abs() / b)
            )));
        }
        Ok(b)
    }

    /// Nyström weights on `nodes` cell-centred radii.
    ///
    /// `W_ij = (1/a(r_i)) ∫ K_r(r_i, s) a(s)^{−α} ℓ_j(s) ds` with hat functions
    /// `ℓ_j`, extended as constants on `[0, r_0]` and `[r_{N−1}, 1]`. The last
    /// interval uses the power-weight rule for `(1 − s)^{2−2α}`.
    pub fn nystrom(&self, nodes: usize, points: usize) -> Result<NystromOperator<T>> {
        let n = nodes;
        let h = T::one() / count(n);
        let half = lit::<T>(0.5);
        let r: Vec<T> = (0..n).map(|i| (count::<T>(i) + half) * h).collect();
        let pts = QuadTable::build(self, &r, points, 1);
        let coef_r: Vec<(T, T)> = r.iter().map(|&x| self.green.coefficients(x)).collect();
        let pw = self.dimension() as i32 - 1;
        let mut w = vec![T::zero(); n * n];
        w.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let ri = r[i];
            let inv_a = self.weight(ri).recip();
            let (c1r, c2r) = coef_r[i];
            for q in &pts.points {
                let k = if q.s >= ri {
                    q.c1 + q.c2 * ri * ri
                } else {
                    (q.s / ri).powi(pw) * (c1r + c2r * q.s * q.s)
                };
                let val = k * q.weight * inv_a;
                row[q.left] = row[q.left] + val * q.hat_left;
                if q.hat_left < T::one() {
                    row[q.left + 1] = row[q.left + 1] + val * (T::one() - q.hat_left);
                }
            }
        });
        NystromOperator::from_weights(r, w)
    }
}

/// Quadrature points `s` with `ws = weight · a(s)^{−α}`, hat split and Green coefficients.
struct QuadTable<T> {
    points: Vec<QuadPoint<T>>,
}

struct QuadPoint<T> {
    s: T,
    /// Quadrature weight times `a(s)^{−α}` (for the last interval, folded
    /// with the power weight and divided by `(1 − s)²`, matching `K_r`).
    weight: T,
    left: usize,
    /// Share of the hat at `left`; the rest goes to `left + 1`.
    hat_left: T,
    c1: T,
    c2: T,
}

impl<T: Real> QuadTable<T> {
    /// Points on `[0, r_0]`, `[r_{j}, r_{j+1}]` and `[r_{N−1}, 1]`, with each
    /// interior interval split into `splits` equal panels.
    fn build(k: &RadialKernelK<T>, r: &[T], points: usize, splits: usize) -> Self {
        let n = r.len();
        let gl = GaussLegendre::<T>::new(points);
        let mut out = Vec::with_capacity((n + 1) * points * splits);
        let mut push = |s: T, wq: T, left: usize, hat_left: T| {
            let (c1, c2) = k.green.coefficients(s);
            out.push(QuadPoint {
                s,
                weight: wq / k.weight(s).powf(k.alpha),
                left,
                hat_left,
                c1,
                c2,
            });
        };
        for p in 0..splits {
            let w = r[0] / count(splits);
            let lo = count::<T>(p) * w;
            for (s, wq) in gl.mapped(lo, lo + w) {
                push(s, wq, 0, T::one());
            }
        }
        for j in 0..n - 1 {
            let (a, b) = (r[j], r[j + 1]);
            let w = (b - a) / count(splits);
            for p in 0..splits {
                let lo = a + count::<T>(p) * w;
                for (s, wq) in gl.mapped(lo, lo + w) {
                    push(s, wq, j, (b - s) / (b - a));
                }
            }
        }
        let gap = T::one() - r[n - 1];
        let two = lit::<T>(2.0);
        let rule = PowerWeightRule::new(two - two * k.alpha, points.min(12));
        for (t, wp) in rule.mapped(gap) {
            let s = T::one() - t;
            let (c1, c2) = k.green.coefficients(s);
            out.push(QuadPoint {
                s,
                weight: wp * k.gap_sq_over_weight(s).powf(k.alpha) / (t * t),
                left: n - 1,
                hat_left: T::one(),
                c1,
                c2,
            });
        }
        Self { points: out }
    }
}

/// `v` on `[0, 1]` from nodal values: linear between nodes, constant beyond the end nodes.
pub fn interpolate<T: Real>(nodes: &[T], v: &[T], s: T) -> T {
    let n = nodes.len();
    if s <= nodes[0] {
        return v[0];
    }
    if s >= nodes[n - 1] {
        return v[n - 1];
    }
    let h = nodes[1] - nodes[0];
    let j = ((s - nodes[0]) / h).floor().to_usize().unwrap_or(0).min(n - 2);
    let t = (s - nodes[j]) / (nodes[j + 1] - nodes[j]);
    v[j] * (T::one() - t) + v[j + 1] * t
}

/// Stratified radii added to the residual samples.
pub const RESIDUAL_STRATA: usize = 200;

/// `sup |u − ∫ K_r(·, s) u(s)^{−α} ds| / sup u` at the nodes, the midpoints
/// between them and [`RESIDUAL_STRATA`] stratified radii, with `u = a · interpolate(v)` and a quadrature twice as fine
/// (12 points, two panels per interval) as the Nyström weights.
pub fn fixed_point_residual<T: Real>(k: &RadialKernelK<T>, nodes: &[T], v: &[T]) -> T {
    let n = nodes.len();
    let pts = QuadTable::build(k, nodes, 12, 2);
    let pw = k.dimension() as i32 - 1;
    // u(s)^{-α} = a(s)^{-α} v(s)^{-α}; a(s)^{-α} already sits in the weights
    let load: Vec<T> = pts
        .points
        .iter()
        .map(|q| q.weight * interpolate(nodes, v, q.s).powf(-k.alpha))
        .collect();
    let half = lit::<T>(0.5);
    let mut samples: Vec<T> = (0..2 * n - 1)
        .map(|i| (count::<T>(i) + T::one()) * half / count(n))
        .collect();
    samples.extend(stratified_radii::<T>(RESIDUAL_STRATA));
    let errs: Vec<(T, T)> = samples
        .par_iter()
        .map(|&r| {
            let (c1r, c2r) = k.green.coefficients(r);
            let gu = pts
                .points
                .iter()
                .zip(&load)
                .fold(T::zero(), |acc, (q, &l)| {
                    let kr = if q.s >= r {
                        q.c1 + q.c2 * r * r
                    } else {
                        (q.s / r).powi(pw) * (c1r + c2r * q.s * q.s)
                    };
                    acc + kr * l
                });
            let u = k.weight(r) * interpolate(nodes, v, r);
            ((u - gu).abs(), u)
        })
        .collect();
    let (err, sup) = errs
        .iter()
        .fold((T::zero(), T::zero()), |(e, s), &(a, b)| (e.max(a), s.max(b)));
    err / sup
}

/// Stratified radii: half uniform in `r`, half log-uniform in `δ = 1 − r`
/// down to `1e−6`, plus the boundary `r = 1`.
pub fn stratified_radii<T: Real>(count_: usize) -> Vec<T> {
    let m = count_.max(2) / 2;
    let mut out: Vec<T> = (0..m)
        .map(|i| (count::<T>(i) + lit(0.5)) / count(m))
        .collect();
    for i in 0..m {
        let e = -6.0 + 6.0 * (i as f64 + 0.5) / m as f64;
        out.push(T::one() - lit::<T>(10f64.powf(e)));
    }
    out.push(T::one());
    out
}

/// Kernel, Nyström weights and bracket for the unit ball of `R^n`.
#[derive(Clone, Debug)]
pub struct RadialSolver<T> {
    cfg: SolverConfig<T>,
    kernel: RadialKernelK<T>,
    op: NystromOperator<T>,
    bracket: Bracket<T>,
    mass_range: (T, T),
}

impl<T: Real> RadialSolver<T> {
    pub fn new(n: usize, cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let kernel = RadialKernelK::new(n, cfg.alpha)?;
        let op = kernel.nystrom(cfg.nodes, cfg.quad_points)?;
        let mut masses = op.row_sums();
        let radii = stratified_radii::<T>(cfg.mass_samples);
        let sampled = radii
            .par_iter()
            .map(|&r| kernel.mass(r, MassQuadrature::default()))
            .collect::<Result<Vec<T>>>()?;
        masses.extend(sampled);
        let m = estimate_m(&masses)?;
        let (lo, hi) = min_max(&masses);
        let eps = match cfg.epsilon {
            EpsilonPolicy::Auto => choose_epsilon(m, cfg.alpha)?,
            EpsilonPolicy::Explicit { value } => value,
        };
        let bracket = Bracket::new(m, eps, cfg.alpha)?;
        Ok(Self {
            cfg,
            kernel,
            op,
            bracket,
            mass_range: (lo, hi),
        })
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    pub fn kernel(&self) -> &RadialKernelK<T> {
        &self.kernel
    }

    pub fn operator(&self) -> &NystromOperator<T> {
        &self.op
    }

    pub fn bracket(&self) -> &Bracket<T> {
        &self.bracket
    }

    /// Smallest and largest kernel mass seen while estimating `M`.
    pub fn mass_range(&self) -> (T, T) {
        self.mass_range
    }

    pub fn solve(&self, start: Start) -> Result<RadialSolution<T>> {
        let it = iterate(&self.op, &self.bracket, &self.cfg, start)?;
        let nodes = self.op.nodes().to_vec();
        let u = nodes
            .iter()
            .zip(&it.v)
            .map(|(&r, &v)| self.kernel.weight(r) * v)
            .collect();
        let residual = fixed_point_residual(&self.kernel, &nodes, &it.v);
        Ok(RadialSolution {
            nodes,
            u,
            residual,
            iteration: it,
        })
    }

    /// `u ↦ a · T(u / a)` without truncation: the discrete solution operator.
    pub fn solution_operator(&self, u: &[T]) -> Vec<T> {
        let a: Vec<T> = self.op.nodes().iter().map(|&r| self.kernel.weight(r)).collect();
        let v: Vec<T> = u.iter().zip(&a).map(|(&x, &w)| x / w).collect();
        self.op
            .t_plain(&v, self.cfg.alpha)
            .into_iter()
            .zip(&a)
            .map(|(t, &w)| t * w)
            .collect()
    }

    pub fn report(&self, sol: &RadialSolution<T>, a_star: Option<T>) -> SolveReport {
        let (c1, c2) = sol.rate_constants(lit(0.1));
        let (min_v, _) = min_max(&sol.iteration.v);
        SolveReport {
            dimension: self.kernel.dimension(),
            alpha: to_f64(self.cfg.alpha),
            nodes: self.cfg.nodes,
            damping: to_f64(self.cfg.damping),
            tolerance: to_f64(self.cfg.tolerance),
            m_mass: to_f64(self.bracket.m),
            mass_min: to_f64(self.mass_range.0),
            mass_max: to_f64(self.mass_range.1),
            epsilon: to_f64(self.bracket.epsilon),
            v1: to_f64(self.bracket.v1),
            v2: to_f64(self.bracket.v2),
            iterations: sol.iteration.iterations,
            residual_history: sol.iteration.history.clone(),
            bracket_trace: sol.iteration.bracket_trace.clone(),
            min_v: to_f64(min_v),
            sup_u: to_f64(sol.u.iter().fold(T::zero(), |m, &x| m.max(x))),
            fixed_point_residual: to_f64(sol.residual),
            c1: to_f64(c1),
            c2: to_f64(c2),
            a_star: a_star.map(to_f64),
        }
    }
}

/// Fixed point on the radial nodes.
#[derive(Clone, Debug)]
pub struct RadialSolution<T> {
    pub nodes: Vec<T>,
    pub u: Vec<T>,
    pub residual: T,
    pub iteration: Iteration<T>,
}

impl<T: Real> RadialSolution<T> {
    pub fn v(&self) -> &[T] {
        &self.iteration.v
    }

    /// `δ = 1 − r` at the nodes.
    pub fn delta(&self) -> Vec<T> {
        self.nodes.iter().map(|&r| T::one() - r).collect()
    }

    /// `(min, max)` of `u / δ²` over nodes with `δ < band`.
    pub fn rate_constants(&self, band: T) -> (T, T) {
        self.nodes
            .iter()
            .zip(&self.u)
            .filter(|(&r, _)| T::one() - r < band)
            .fold((T::infinity(), T::zero()), |(lo, hi), (&r, &u)| {
                let q = u / ((T::one() - r) * (T::one() - r));
                (lo.min(q), hi.max(q))
            })
    }

    /// CSV with columns `x, y, delta, u, v, u_over_delta2` along the ray `y = 0`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,y,delta,u,v,u_over_delta2")?;
        for ((&r, &u), &v) in self.nodes.iter().zip(&self.u).zip(self.v()) {
            let d = T::one() - r;
            writeln!(
                out,
                "{:e},0,{:e},{:e},{:e},{:e}",
                to_f64(r),
                to_f64(d),
                to_f64(u),
                to_f64(v),
                to_f64(u / (d * d))
            )?;
        }
        Ok(())
    }
}

/// Summary of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub dimension: usize,
    pub alpha: f64,
    pub nodes: usize,
    pub damping: f64,
    pub tolerance: f64,
    /// Kernel-mass constant `M`.
    pub m_mass: f64,
    pub mass_min: f64,
    pub mass_max: f64,
    pub epsilon: f64,
    pub v1: f64,
    pub v2: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub bracket_trace: Vec<[f64; 2]>,
    pub min_v: f64,
    pub sup_u: f64,
    pub fixed_point_residual: f64,
    /// `min` and `max` of `u / δ²` over `δ < 0.1`.
    pub c1: f64,
    pub c2: f64,
    /// Multi-start agreement `A*`, when computed.
    pub a_star: Option<f64>,
}

/// `A* = max_i max(u₂/u₁, u₁/u₂)`.
pub fn uniqueness_certificate<T: Real>(u1: &[T], u2: &[T]) -> Result<T> {
    if u1.len() != u2.len() || u1.is_empty() {
        return Err(Error::InvalidInput("fields must share a nonempty sample set".into()));
    }
    let mut a = T::one();
    for (i, (&x, &y)) in u1.iter().zip(u2).enumerate() {
        if !(x > T::zero() && y > T::zero()) {
            return Err(Error::InvalidInput(format!("nonpositive field value at sample {i}")));
        }
        a = a.max(y / x).max(x / y);
    }
    Ok(a)
}

/// Result of one contraction round of the uniqueness argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub a_star: f64,
    /// `A*` of the pair after applying the solution operator twice.
    pub after: f64,
    /// `(A*)^{α²}`.
    pub bound: f64,
    pub holds: bool,
}

/// Applies `S` twice to both fields and compares the new `A*` with `(A*)^{α²}`.
///
/// `S` is order reversing and `S(c u) = c^{−α} S(u)`, so `A u₁ ≥ u₂` implies
/// `A^{α²} S²u₁ ≥ S²u₂`.
pub fn contraction_round<T: Real, S: Fn(&[T]) -> Vec<T>>(
    s: S,
    alpha: T,
    u1: &[T],
    u2: &[T],
    tol: T,
) -> Result<ContractionCheck> {
    let a = uniqueness_certificate(u1, u2)?;
    let s1 = s(&s(u1));
    let s2 = s(&s(u2));
    let after = uniqueness_certificate(&s1, &s2)?;
    let bound = a.powf(alpha * alpha);
    Ok(ContractionCheck {
        a_star: to_f64(a),
        after: to_f64(after),
        bound: to_f64(bound),
        holds: after <= bound + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn epsilon_equality_case() {
        let e = choose_epsilon(2.0f64, 0.5).unwrap();
        assert_relative_eq!(e, 0.25, max_relative = 1e-15);
        assert_relative_eq!(e.powf(0.75), 2f64.powf(-1.5), max_relative = 1e-15);
        assert_relative_eq!(choose_epsilon(4.0f64, 0.5).unwrap(), 0.0625, max_relative = 1e-15);
        let e = choose_epsilon(1.0f64 + 1e-9, 0.5).unwrap();
        assert!(e < 1.0 && e > 0.999);
    }

    #[test]
    fn truncated_power() {
        assert_relative_eq!(g_eps(0.1f64, 0.25, 0.5), 2.0);
        assert_relative_eq!(g_eps(1.0f64, 0.25, 0.5), 1.0);
        assert_relative_eq!(g_eps(0.25f64, 0.25, 0.5), 2.0);
    }

    #[test]
    fn mass_constant() {
        assert_relative_eq!(estimate_m(&[1.0f64; 4]).unwrap(), 1.05);
        assert_relative_eq!(estimate_m(&[0.5f64, 1.0, 2.0]).unwrap(), 2.1);
        assert!(matches!(estimate_m(&[1.0f64, 0.0]), Err(Error::Positivity(_))));
    }

    #[test]
    fn constant_kernel_fixed_point() {
        for (c, want) in [(1.0f64, 1.0f64), (2f64.powf(1.5), 2.0)] {
            let op = NystromOperator::constant(c, 16).unwrap();
            let m = estimate_m(&op.row_sums()).unwrap();
            let cfg = SolverConfig::with_alpha(0.5).unwrap();
            let b = Bracket::new(m, choose_epsilon(m, 0.5).unwrap(), 0.5).unwrap();
            let it = iterate(&op, &b, &cfg, Start::Midpoint).unwrap();
            for v in &it.v {
                assert_relative_eq!(*v, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn rejects_alpha_outside_unit_interval() {
        let e = SolverConfig::<f64>::with_alpha(1.2).unwrap_err();
        assert_eq!(e.to_string(), "invalid input: alpha out of range (0,1)");
    }

    #[test]
    fn interpolation_ends_are_constant() {
        let nodes = [0.25, 0.75];
        let v = [1.0, 3.0];
        assert_eq!(interpolate(&nodes, &v, 0.1), 1.0);
        assert_eq!(interpolate(&nodes, &v, 0.5), 2.0);
        assert_eq!(interpolate(&nodes, &v, 0.9), 3.0);
    }
}
