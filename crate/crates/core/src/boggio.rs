//! Green function of the clamped biharmonic operator on the unit ball.
//!
//! For `x ≠ y` in the unit ball of `R^n`,
//!
//! ```text
//! G(x, y) = k_n |x − y|^{4−n} ∫_1^A (v² − 1) v^{1−n} dv,
//! A² = 1 + q,   q = (1 − |x|²)(1 − |y|²) / |x − y|²,
//! k_n = 1 / (4 n e_n),
//! ```
//!
//! where `e_n` is the volume of the unit ball. Writing the inner integral in
//! terms of `q` gives `Φ_n(q) = ½ ∫_0^q p (1 + p)^{−n/2} dp`, which is what the
//! evaluator works with: it has closed forms for `n ≤ 4`, a short power
//! series for small `q` (where the closed forms cancel), and an exact
//! Gauss–Legendre rule in `w = 1/v` for `n ≥ 5`.

use std::io::Write;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::quadrature::GaussLegendre;
use crate::scalar::{count, lit, norm_sq, to_f64, Real};

/// Anything that evaluates a biharmonic Green function `G(x, y)`.
pub trait GreenKernel<T: Real>: Sync {
    fn domain(&self) -> &DomainSpec<T>;

    fn green(&self, x: &[T], y: &[T]) -> Result<T>;

    /// Lattice points the kernel is restricted to, if it is a discrete kernel.
    fn lattice(&self) -> Option<&[[T; 2]]> {
        None
    }

    /// Exact derivatives of `G(x + t·dir, y)` at `t = 0`, when available.
    fn line_jet(&self, _x: &[T], _dir: &[T], _y: &[T]) -> Option<Result<Jet3<T>>> {
        None
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut e = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 0 } else { 1 };
    while k < n {
        k += 2;
        e *= 2.0 * std::f64::consts::PI / k as f64;
    }
    e
}

/// Surface area of the unit sphere `S^{n−1} ⊂ R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Below this `q` the profile is summed as a power series.
const SERIES_THRESHOLD: f64 = 1e-2;

/// Boggio's Green function on the unit ball of `R^n`, `n ≥ 2`.
#[derive(Clone, Debug)]
pub struct BoggioKernel<T> {
    n: usize,
    norm: T,
    inner_rule: GaussLegendre<T>,
    domain: DomainSpec<T>,
}

impl<T: Real> BoggioKernel<T> {
    pub fn new(n: usize) -> Result<Self> {
        let domain = DomainSpec::unit_ball(n)?;
        let norm = lit(1.0 / (4.0 * unit_sphere_area(n)));
        // w^{n-5}(1 - w^2) has degree n - 3; m points integrate degree 2m - 1
        let m = (n.saturating_sub(2)).div_ceil(2).max(1);
        Ok(Self {
            n,
            norm,
            inner_rule: GaussLegendre::new(m),
            domain,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `k_n = 1 / (4 n e_n)`.
    pub fn normalization(&self) -> T {
        self.norm
    }

    /// `Φ_n(q) = ½ ∫_0^q p (1 + p)^{−n/2} dp = ∫_1^A (v² − 1) v^{1−n} dv`.
    pub fn profile(&self, q: T) -> T {
        let half = lit::<T>(0.5);
        if q < lit(SERIES_THRESHOLD) {
            return self.profile_series(q);
        }
        match self.n {
            2 => half * (q - q.ln_1p()),
            3 => {
                let a = (T::one() + q).sqrt();
                let am1 = q / (T::one() + a);
                am1 * am1 / a
            }
            4 => half * (q.ln_1p() - q / (T::one() + q)),
            n => {
                let a = (T::one() + q).sqrt();
                let len = q / (T::one() + a) / a; // 1 - 1/A
                let lo = a.recip();
                let pw = (n - 5) as i32;
                self.inner_rule
                    .mapped(-T::one(), T::one())
                    .map(|(xi, wt)| {
                        let w = lo + len * (xi + T::one()) * half;
                        let one_minus_w = len * (T::one() - xi) * half;
                        wt * half * len * w.powi(pw) * one_minus_w * (T::one() + w)
                    })
                    .sum()
            }
        }
    }

    fn profile_series(&self, q: T) -> T {
        // ½ Σ_k binom(−n/2, k) q^{k+2} / (k + 2)
        let e = -count::<T>(self.n) / lit(2.0);
        let mut binom = T::one();
        let mut qpow = q * q;
        let mut sum = T::zero();
        for k in 0..400 {
            let kf = count::<T>(k);
            let term = binom * qpow / (kf + lit(2.0));
            sum = sum + term;
            if term.abs() <= T::epsilon() * lit(1e-2) * sum.abs() {
                break;
            }
            binom = binom * (e - kf) / (kf + T::one());
            qpow = qpow * q;
        }
        sum * lit(0.5)
    }

    /// `Φ_n` and its first three derivatives at `q`.
    fn profile_jet(&self, q: T) -> [T; 4] {
        let nh = count::<T>(self.n) / lit(2.0);
        let one = T::one();
        let base = (one + q).powf(-nh);
        let half = lit::<T>(0.5);
        let d1 = half * q * base;
        let d2 = half * base - nh * half * q * base / (one + q);
        let d3 = -nh * base / (one + q) + nh * (nh + one) * half * q * base / ((one + q) * (one + q));
        [self.profile(q), d1, d2, d3]
    }

    fn check_interior(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, kernel dimension is {}",
                x.len(),
                self.n
            )));
        }
        let r2 = norm_sq(x);
        if r2 >= T::one() || r2.is_nan() {
            return Err(Error::OutsideDomain {
                point: x.iter().map(|&c| to_f64(c)).collect(),
            });
        }
        Ok(r2)
    }

    /// `G(x, y)` from `|x − y|²` and `1 − |x|²`, `1 − |y|²`.
    fn green_parts(&self, d2: T, cx: T, cy: T) -> T {
        let q = cx * cy / d2;
        let pw = lit::<T>(4.0 - self.n as f64) / lit(2.0);
        let lead = if self.n == 4 { T::one() } else { d2.powf(pw) };
        self.norm * lead * self.profile(q)
    }

    /// `G` for `|x| = r`, `|y| = s` and angle `θ` between them.
    pub fn green_polar(&self, r: T, s: T, theta: T) -> T {
        let sh = (theta / lit(2.0)).sin();
        let d2 = (r - s) * (r - s) + lit::<T>(4.0) * r * s * sh * sh;
        self.green_parts(d2, (T::one() - r) * (T::one() + r), (T::one() - s) * (T::one() + s))
    }

    /// `G(x, y)` and its first three derivatives along `x + t·dir` at `t = 0`.
    pub fn directional_jet(&self, x: &[T], dir: &[T], y: &[T]) -> Result<Jet3<T>> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        let two = lit::<T>(2.0);
        let diff: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        let d2_0 = norm_sq(&diff);
        if d2_0 == T::zero() {
            return Err(Error::Singular);
        }
        let ee = norm_sq(dir);
        let d2 = Jet3::quadratic(d2_0, two * crate::scalar::dot(dir, &diff), ee);
        let cx = Jet3::quadratic(
            T::one() - norm_sq(x),
            -two * crate::scalar::dot(dir, x),
            -ee,
        );
        let cy = Jet3::constant(T::one() - norm_sq(y));
        let q = cx * cy / d2;
        let prof = q.compose(self.profile_jet(q.v));
        let lead = d2.powf(lit::<T>(4.0 - self.n as f64) / two);
        Ok((lead * prof).scale(self.norm))
    }

    /// Sphere average of `G` in `y` at radius `s`, times the sphere area
    /// `|S^{n−1}| s^{n−1}`, for `x` at radius `r`.
    ///
    /// Integrating this against a radial load `g(s)` over `s ∈ [0, 1)` gives
    /// the radial solution of `Δ²u = g(|x|)`. The angular integral uses
    /// Gauss panels graded geometrically toward the near-singular direction;
    /// the result is accepted only if doubling `angular_order` changes it by
    /// at most `1e−8` relatively.
    pub fn radial_kernel(&self, r: T, s: T, angular_order: usize) -> Result<T> {
        if !(r >= T::zero() && r < T::one() && s >= T::zero() && s < T::one()) {
            return Err(Error::InvalidInput(format!(
                "radii must lie in [0, 1): r = {}, s = {}",
                to_f64(r),
                to_f64(s)
            )));
        }
        if s == T::zero() {
            return Ok(T::zero());
        }
        let n = self.n;
        let sphere = lit::<T>(unit_sphere_area(n));
        if r == T::zero() {
            return Ok(sphere * s.powi(n as i32 - 1) * self.green_polar(r, s, T::zero()));
        }
        let coarse = self.angular_integral(r, s, angular_order.max(2));
        let fine = self.angular_integral(r, s, 2 * angular_order.max(2));
        let tol = lit::<T>(1e-8);
        if (fine - coarse).abs() > tol * fine.abs() + T::min_positive_value() {
            return Err(Error::Accuracy(format!(
                "angular quadrature at r = {}, s = {} changed by {:e} on order doubling",
                to_f64(r),
                to_f64(s),
                to_f64((fine - coarse).abs() / fine.abs())
            )));
        }
        let sub = lit::<T>(if n == 2 { 2.0 } else { unit_sphere_area(n - 1) });
        Ok(sub * s.powi(n as i32 - 1) * fine)
    }

    /// `∫_0^π G(r, s, θ) sin^{n−2} θ dθ`.
    fn angular_integral(&self, r: T, s: T, order: usize) -> T {
        let rule = GaussLegendre::<T>::new(order);
        let pi = T::PI();
        let scale = (r - s).abs() / (r * s).sqrt();
        let floor = (scale / lit(4.0)).max(lit(1e-9));
        let mut breaks = vec![pi];
        let mut b = pi;
        while b > floor && breaks.len() < 64 {
            b = b / lit(2.0);
            breaks.push(b);
        }
        breaks.push(T::zero());
        let pw = (self.n - 2) as i32;
        breaks
            .windows(2)
            .map(|w| {
                rule.integrate(w[1], w[0], |th| {
                    self.green_polar(r, s, th) * th.sin().powi(pw)
                })
            })
            .sum()
    }

    /// `∫_{|y|<1} G(x, y) dy` for `n = 2`, by polar quadrature.
    pub fn constant_load_potential(&self, x: &[T], quad: &LoadQuadrature) -> Result<T> {
        if self.n != 2 {
            return Err(Error::InvalidInput(
                "constant-load potential is implemented for n = 2".into(),
            ));
        }
        let r = self.check_interior(x)?.sqrt();
        let rule = GaussLegendre::<T>::new(quad.radial_points);
        let mut total = T::zero();
        for (a, b) in [(T::zero(), r), (r, T::one())] {
            if b <= a {
                continue;
            }
            let w = (b - a) / count(quad.radial_panels);
            for p in 0..quad.radial_panels {
                let lo = a + count::<T>(p) * w;
                for (s, wt) in rule.mapped(lo, lo + w) {
                    total = total + wt * self.radial_kernel(r, s, quad.angular_order)?;
                }
            }
        }
        Ok(total)
    }

    /// Writes `(x_1..x_n, y_1..y_n, G)` rows as CSV.
    pub fn write_kernel_table<W: Write>(
        &self,
        out: &mut W,
        pairs: &[(Vec<T>, Vec<T>)],
    ) -> std::io::Result<()> {
        let n = self.n;
        let head: Vec<String> = (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("y{i}")))
            .chain(std::iter::once("G".to_string()))
            .collect();
        writeln!(out, "{}", head.join(","))?;
        for (x, y) in pairs {
            let g = self
                .green(x, y)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
            let row: Vec<String> = x
                .iter()
                .chain(y)
                .chain(std::iter::once(&g))
                .map(|v| format!("{:e}", to_f64(*v)))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl<T: Real> GreenKernel<T> for BoggioKernel<T> {
    fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    fn green(&self, x: &[T], y: &[T]) -> Result<T> {
        let rx = self.check_interior(x)?;
        let ry = self.check_interior(y)?;
        let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        if d2 == T::zero() {
            return Err(Error::Singular);
        }
        let cx = (T::one() - rx.sqrt()) * (T::one() + rx.sqrt());
        let cy = (T::one() - ry.sqrt()) * (T::one() + ry.sqrt());
        Ok(self.green_parts(d2, cx, cy))
    }

    fn line_jet(&self, x: &[T], dir: &[T], y: &[T]) -> Option<Result<Jet3<T>>> {
        Some(self.directional_jet(x, dir, y))
    }
}

/// Resolution of the polar rule in [`BoggioKernel::constant_load_potential`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadQuadrature {
    /// Panels on each of `[0, |x|]` and `[|x|, 1]`.
    pub radial_panels: usize,
    /// Gauss points per radial panel.
    pub radial_points: usize,
    /// Gauss points per angular panel.
    pub angular_order: usize,
}

impl Default for LoadQuadrature {
    fn default() -> Self {
        Self {
            radial_panels: 4,
            radial_points: 8,
            angular_order: 16,
        }
    }
}

/// Closed-form sphere integral of `G` (same quantity as
/// [`BoggioKernel::radial_kernel`]), from the radial clamped-plate ODE.
///
/// With `c₁`, `c₂` the coefficients of the regular solution on `r < s`,
/// `K(r, s) = c₁(s) + c₂(s) r²` for `r ≤ s` and
/// `K(r, s) = (s/r)^{n−1} K(s, r)` for `r > s`. Both coefficients vanish to
/// second order at `s = 1`; for `n ∉ {2, 4}` they are stored as `(1 − s)²`
/// times deflated integer polynomials so no cancellation occurs near the
/// boundary.
#[derive(Clone, Debug)]
pub struct RadialGreen<T> {
    n: usize,
    // c1 = (1-s)^2 Q1(s) / d1, c2 = -s (1-s)^2 Q2(s) / d2 (n not in {2, 4})
    q1: Vec<T>,
    q2: Vec<T>,
    d1: T,
    d2: T,
}

impl<T: Real> RadialGreen<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {n}")));
        }
        let (q1, q2, d1, d2) = if n == 2 || n == 4 {
            (vec![], vec![], T::one(), T::one())
        } else {
            let nf = n as f64;
            // N1(s) = 2 s^3 + (n-4) s^{n+1} - (n-2) s^{n-1}
            let mut p1 = vec![0.0; n + 2];
            p1[3] += 2.0;
            p1[n + 1] += nf - 4.0;
            p1[n - 1] -= nf - 2.0;
            // N2(s) = (n-2) s^n - n s^{n-2} + 2
            let mut p2 = vec![0.0; n + 1];
            p2[n] += nf - 2.0;
            p2[n - 2] -= nf;
            p2[0] += 2.0;
            let q1 = deflate_double_root_at_one(&p1);
            let q2 = deflate_double_root_at_one(&p2);
            (
                q1.into_iter().map(lit).collect(),
                q2.into_iter().map(lit).collect(),
                lit(4.0 * (nf - 4.0) * (nf - 2.0)),
                lit(4.0 * nf * (nf - 2.0)),
            )
        };
        Ok(Self { n, q1, q2, d1, d2 })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Coefficients `(c₁(s), c₂(s))` of the regular branch.
    pub fn coefficients(&self, s: T) -> (T, T) {
        let one = T::one();
        match self.n {
            2 => {
                let e = (s - one) * (s + one);
                let l = s.ln();
                let k = -s / lit(8.0);
                (k * (e - lit::<T>(2.0) * s * s * l), k * (e - lit::<T>(2.0) * l))
            }
            4 => {
                let e = (one - s) * (one + s);
                let c1 = -s * s * s * (e + lit::<T>(2.0) * s.ln()) / lit(8.0);
                let c2 = -s * e * e / lit(16.0);
                (c1, c2)
            }
            _ => {
                let t = (one - s) * (one - s);
                (t * horner(&self.q1, s) / self.d1, -s * t * horner(&self.q2, s) / self.d2)
            }
        }
    }

    /// `K(r, s)` for `r, s ∈ [0, 1]`.
    pub fn value(&self, r: T, s: T) -> T {
        if r <= s {
            let (c1, c2) = self.coefficients(s);
            c1 + c2 * r * r
        } else {
            let (c1, c2) = self.coefficients(r);
            (s / r).powi(self.n as i32 - 1) * (c1 + c2 * s * s)
        }
    }

    /// `∂²_r K(1, s)`, the boundary trace used by the boundary limit of the weighted kernel.
    pub fn boundary_second_derivative(&self, s: T) -> T {
        let half = lit::<T>(0.5);
        let (a, b) = match self.n {
            2 | 4 => (half, -half),
            _ => {
                let two = lit::<T>(2.0);
                (
                    two * horner(&self.q1, T::one()) / self.d1,
                    -two * horner(&self.q2, T::one()) / self.d2,
                )
            }
        };
        s.powi(self.n as i32 - 1) * (a + b * s * s)
    }
}

fn horner<T: Real>(coef: &[T], x: T) -> T {
    coef.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Divides a polynomial (ascending coefficients) with a double root at 1 by `(1 − s)²`.
fn deflate_double_root_at_one(p: &[f64]) -> Vec<f64> {
    let once = |c: &[f64]| -> Vec<f64> {
        // synthetic division by (s - 1), then negate for (1 - s)
        let deg = c.len() - 1;
        let mut q = vec![0.0; deg];
        let mut carry = 0.0;
        for k in (1..=deg).rev() {
            carry += c[k];
            q[k - 1] = carry;
        }
        debug_assert!((carry + c[0]).abs() < 1e-9, "polynomial has no root at 1");
        q.into_iter().map(|v| -v).collect()
    };
    once(&once(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(2), std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 / 3.0 * std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(
            unit_ball_volume(5),
            8.0 * std::f64::consts::PI.powi(2) / 15.0,
            max_relative = 1e-15
        );
    }

    /// Composite Simpson on `∫_1^A (v² − 1) v^{1−n} dv`, independent of the closed forms.
    fn profile_oracle(n: usize, q: f64) -> f64 {
        let a = (1.0 + q).sqrt();
        let f = |v: f64| (v * v - 1.0) * v.powi(1 - n as i32);
        let m = 20_000;
        let h = (a - 1.0) / m as f64;
        let inner: f64 = (1..m)
            .map(|k| f(1.0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        h / 3.0 * (f(1.0) + inner + f(a))
    }

    #[test]
    fn profile_matches_direct_integral() {
        for n in 2..=8 {
            let k = BoggioKernel::<f64>::new(n).unwrap();
            for q in [1e-3, 5e-3, 1e-2, 0.3, 2.0, 50.0] {
                let got = k.profile(q);
                let want = profile_oracle(n, q);
                assert_relative_eq!(got, want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for n in 2..=7 {
            let k = BoggioKernel::<f64>::new(n).unwrap();
            let below = k.profile_series(SERIES_THRESHOLD * (1.0 - 1e-12));
            let above = k.profile(SERIES_THRESHOLD * (1.0 + 1e-12));
            assert_relative_eq!(below, above, max_relative = 1e-9);
        }
    }

    #[test]
    fn center_value_n2() {
        // (1/(16π)) (1 − r² + 2 r² ln r) at r = 1/2
        let k = BoggioKernel::<f64>::new(2).unwrap();
        let r: f64 = 0.5;
        let want = (1.0 - r * r + 2.0 * r * r * r.ln()) / (16.0 * std::f64::consts::PI);
        let got = k.green(&[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-14);
        assert_relative_eq!(got, 8.026e-3, max_relative = 1e-3);
        // oracle route: quadrature of the inner integral
        let q = 0.75 / 0.25;
        assert_relative_eq!(got, k.normalization() * 0.25 * profile_oracle(2, q), max_relative = 1e-12);
    }

    #[test]
    fn symmetric_and_positive() {
        let k = BoggioKernel::<f64>::new(2).unwrap();
        let a = k.green(&[0.3, 0.0], &[0.0, 0.4]).unwrap();
        let b = k.green(&[0.0, 0.4], &[0.3, 0.0]).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0);
    }

    #[test]
    fn rejects_bad_points() {
        let k = BoggioKernel::<f64>::new(2).unwrap();
        assert!(matches!(k.green(&[0.1, 0.1], &[0.1, 0.1]), Err(Error::Singular)));
        assert!(matches!(k.green(&[1.0, 0.0], &[0.1, 0.1]), Err(Error::OutsideDomain { .. })));
        assert!(k.green(&[0.1, 0.1, 0.0], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn jet_matches_finite_differences() {
        let k = BoggioKernel::<f64>::new(3).unwrap();
        let x = [0.2, 0.1, -0.3];
        let y = [-0.4, 0.3, 0.1];
        let dir = [0.6, 0.0, 0.8];
        let j = k.directional_jet(&x, &dir, &y).unwrap();
        let g = |t: f64| {
            let p: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            k.green(&p, &y).unwrap()
        };
        let h = 1e-3;
        assert_relative_eq!(j.v, g(0.0), max_relative = 1e-14);
        assert_relative_eq!(j.d1, (g(h) - g(-h)) / (2.0 * h), max_relative = 1e-5);
        assert_relative_eq!(j.d2, (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h), max_relative = 1e-4);
        let d3 = (g(2.0 * h) - 2.0 * g(h) + 2.0 * g(-h) - g(-2.0 * h)) / (2.0 * h * h * h);
        assert_relative_eq!(j.d3, d3, max_relative = 1e-3);
    }

    #[test]
    fn radial_green_matches_angular_average() {
        for n in [2usize, 3, 4, 5] {
            let bk = BoggioKernel::<f64>::new(n).unwrap();
            let rg = RadialGreen::<f64>::new(n).unwrap();
            for &(r, s) in &[(0.0, 0.5), (0.3, 0.7), (0.7, 0.3), (0.5, 0.5), (0.9, 0.95), (0.2, 0.21)] {
                let quad = bk.radial_kernel(r, s, 16).unwrap();
                assert_relative_eq!(rg.value(r, s), quad, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn radial_green_boundary_trace_matches_difference_quotient() {
        for n in [2usize, 3, 4, 5, 6] {
            let rg = RadialGreen::<f64>::new(n).unwrap();
            for s in [0.2, 0.5, 0.8] {
                let t = 1e-4;
                // K(1 - t, s) = t² ∂²K(1, s)/2 + O(t³)
                let fd = 2.0 * rg.value(1.0 - t, s) / (t * t);
                assert_relative_eq!(rg.boundary_second_derivative(s), fd, max_relative = 1e-3);
            }
        }
    }

    #[test]
    fn deflation_recovers_quotient() {
        // (1 - s)^2 (1 + 2 s) = 1 - 3 s^2 + 2 s^3
        let q = deflate_double_root_at_one(&[1.0, 0.0, -3.0, 2.0]);
        assert_eq!(q, vec![1.0, 2.0]);
    }
}
