//! Third-order Taylor jets along a line, for exact directional derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{lit, Real};

/// Value and first three derivatives of a function of one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: Real> Jet3<T> {
    pub fn constant(v: T) -> Self {
        Self {
            v,
            d1: T::zero(),
            d2: T::zero(),
            d3: T::zero(),
        }
    }

    /// Quadratic `c0 + c1 t + c2 t²` at `t = 0`.
    pub fn quadratic(c0: T, c1: T, c2: T) -> Self {
        Self {
            v: c0,
            d1: c1,
            d2: lit::<T>(2.0) * c2,
            d3: T::zero(),
        }
    }

    /// `f ∘ self` given `f` and its first three derivatives at `self.v`.
    pub fn compose(self, f: [T; 4]) -> Self {
        let three = lit::<T>(3.0);
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        Self {
            v: f[0],
            d1: f[1] * g1,
            d2: f[2] * g1 * g1 + f[1] * g2,
            d3: f[3] * g1 * g1 * g1 + three * f[2] * g1 * g2 + f[1] * g3,
        }
    }

    pub fn powf(self, p: T) -> Self {
        let x = self.v;
        let one = T::one();
        let two = lit::<T>(2.0);
        self.compose([
            x.powf(p),
            p * x.powf(p - one),
            p * (p - one) * x.powf(p - two),
            p * (p - one) * (p - two) * x.powf(p - lit(3.0)),
        ])
    }

    pub fn recip(self) -> Self {
        let x = self.v;
        let r = x.recip();
        self.compose([r, -r * r, lit::<T>(2.0) * r * r * r, lit::<T>(-6.0) * r * r * r * r])
    }

    pub fn scale(self, c: T) -> Self {
        Self {
            v: self.v * c,
            d1: self.d1 * c,
            d2: self.d2 * c,
            d3: self.d3 * c,
        }
    }
}

impl<T: Real> Add for Jet3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
        }
    }
}

impl<T: Real> Sub for Jet3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Jet3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for Jet3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + two * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + three * (self.d2 * o.d1 + self.d1 * o.d2) + self.v * o.d3,
        }
    }
}

impl<T: Real> Div for Jet3<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}
