//! Gauss–Legendre rules and the endpoint power-weight rule used on boundary bands.

use crate::linalg::solve_dense;
use crate::scalar::{lit, Real};

/// Gauss–Legendre rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let (nodes, weights) = legendre_nodes(n);
        Self {
            nodes: nodes.into_iter().map(lit).collect(),
            weights: weights.into_iter().map(lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}

fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Value and derivative of `P_n` at `x`.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule for `∫_0^L f(t) t^p dt` with `p > -1` and `f` smooth.
///
/// The nodes are Gauss–Legendre points on `[0, 1]`; the weights integrate the
/// Lagrange interpolant of `f` exactly against `t^p`, so the rule is exact for
/// polynomials of degree `< npts` times the power weight.
#[derive(Clone, Debug)]
pub struct PowerWeightRule<T> {
    exponent: T,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> PowerWeightRule<T> {
    pub fn new(exponent: T, npts: usize) -> Self {
        let p = exponent.to_f64().unwrap_or(f64::NAN);
        assert!(p > -1.0, "power weight t^p needs p > -1");
        assert!((1..=12).contains(&npts));
        let (gl, _) = legendre_nodes(npts);
        let t: Vec<f64> = gl.iter().map(|x| 0.5 * (x + 1.0)).collect();
        // Vandermonde system sum_k w_k t_k^m = 1 / (m + p + 1)
        let mut a = vec![0.0; npts * npts];
        let mut b = vec![0.0; npts];
        for m in 0..npts {
            for k in 0..npts {
                a[m * npts + k] = t[k].powi(m as i32);
            }
            b[m] = 1.0 / (m as f64 + p + 1.0);
        }
        let w = solve_dense(&mut a, &mut b, npts).expect("Vandermonde system at distinct nodes");
        Self {
            exponent,
            nodes: t.into_iter().map(lit).collect(),
            weights: w.into_iter().map(lit).collect(),
        }
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    /// Nodes `t_k ∈ (0, L)` and weights for `∫_0^L f(t) t^p dt`.
    pub fn mapped(&self, len: T) -> impl Iterator<Item = (T, T)> + '_ {
        let scale = len.powf(self.exponent + T::one());
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (t * len, w * scale))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, len: T, mut f: F) -> T {
        self.mapped(len).fold(T::zero(), |acc, (t, w)| acc + w * f(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in 1..12 {
            let rule = GaussLegendre::<f64>::new(n);
            for deg in 0..(2 * n) {
                let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
                let want = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                assert_relative_eq!(got, want, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let rule = GaussLegendre::<f64>::new(20);
        let s: f64 = rule.mapped(-3.0, 5.0).map(|(_, w)| w).sum();
        assert_relative_eq!(s, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn power_weight_rule_integrates_singular_monomials() {
        let rule = PowerWeightRule::<f64>::new(-0.5, 6);
        // ∫_0^L t^{k - 1/2} dt
        for k in 0..6 {
            let len = 0.3;
            let got = rule.integrate(len, |t| t.powi(k));
            let want = len.powf(k as f64 + 0.5) / (k as f64 + 0.5);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn power_weight_rule_smooth_factor() {
        let rule = PowerWeightRule::<f64>::new(0.5, 8);
        // ∫_0^1 e^t t^{1/2} dt, reference from a fine substitution t = s^2.
        let gl = GaussLegendre::<f64>::new(40);
        let want = gl.integrate(0.0, 1.0, |s| 2.0 * s * s * (s * s).exp());
        assert_relative_eq!(rule.integrate(1.0, f64::exp), want, max_relative = 1e-12);
    }
}
