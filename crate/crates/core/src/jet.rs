//! Truncated Taylor arithmetic in one variable.
//!
//! A [`Jet4`] carries a value together with its first four derivatives with
//! respect to a single scalar parameter. Arithmetic follows the truncated
//! Leibniz and Faà di Bruno rules, so any smooth expression built from jets
//! carries exact derivatives (up to rounding) without finite differences.
//!
//! Jets also track how many derivatives are meaningful: [`Jet4::derivative`]
//! shifts the stack down by one and lowers the order, and binary operations
//! keep the smaller order of their operands.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 4;

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet4 {
    d: [f64; 5],
    order: usize,
}

impl Jet4 {
    pub fn constant(value: f64) -> Self {
        Jet4 { d: [value, 0.0, 0.0, 0.0, 0.0], order: MAX_ORDER }
    }

    /// The independent variable evaluated at `at`.
    pub fn variable(at: f64) -> Self {
        Jet4 { d: [at, 1.0, 0.0, 0.0, 0.0], order: MAX_ORDER }
    }

    /// Builds a jet from a derivative stack `[f, f', f'', ...]`. Missing
    /// entries lower the order; extra entries beyond order 4 are ignored.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        assert!(!derivs.is_empty(), "a jet needs at least a value");
        let mut d = [0.0; 5];
        let len = derivs.len().min(MAX_ORDER + 1);
        d[..len].copy_from_slice(&derivs[..len]);
        Jet4 { d, order: len - 1 }
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// The `k`-th derivative, or `None` if it is beyond the tracked order.
    pub fn deriv(&self, k: usize) -> Option<f64> {
        (k <= self.order).then(|| self.d[k])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn derivs(&self) -> &[f64] {
        &self.d[..=self.order]
    }

    /// Jet of the derivative: shifts the stack down and loses one order.
    ///
    /// # Panics
    /// If the jet is already of order zero.
    pub fn derivative(&self) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let mut d = [0.0; 5];
        d[..self.order].copy_from_slice(&self.d[1..=self.order]);
        Jet4 { d, order: self.order - 1 }
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.order = self.order.min(order);
        for k in self.order + 1..=MAX_ORDER {
            self.d[k] = 0.0;
        }
        self
    }

    /// Composes an outer function with this jet, given the outer function's
    /// derivatives `[f(g), f'(g), ..., f''''(g)]` evaluated at `self.value()`.
    pub fn compose(&self, outer: [f64; 5]) -> Self {
        let g = &self.d;
        let f = outer;
        let mut d = [0.0; 5];
        d[0] = f[0];
        d[1] = f[1] * g[1];
        d[2] = f[2] * g[1] * g[1] + f[1] * g[2];
        d[3] = f[3] * g[1].powi(3) + 3.0 * f[2] * g[1] * g[2] + f[1] * g[3];
        d[4] = f[4] * g[1].powi(4)
            + 6.0 * f[3] * g[1] * g[1] * g[2]
            + f[2] * (3.0 * g[2] * g[2] + 4.0 * g[1] * g[3])
            + f[1] * g[4];
        Jet4 { d, order: self.order }.truncate(self.order)
    }

    pub fn powf(&self, p: f64) -> Self {
        let x = self.d[0];
        let mut outer = [0.0; 5];
        let mut coeff = 1.0;
        for (k, slot) in outer.iter_mut().enumerate() {
            *slot = coeff * x.powf(p - k as f64);
            coeff *= p - k as f64;
        }
        self.compose(outer)
    }

    pub fn powi(&self, p: i32) -> Self {
        match p {
            0 => Jet4::constant(1.0).truncate(self.order),
            1 => *self,
            p if p > 0 => {
                let mut acc = *self;
                for _ in 1..p {
                    acc = acc * *self;
                }
                acc
            }
            p => Jet4::constant(1.0).truncate(self.order) / self.powi(-p),
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        Jet4::constant(1.0).truncate(self.order) / *self
    }

    pub fn ln(&self) -> Self {
        let x = self.d[0];
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / x.powi(3), -6.0 / x.powi(4)])
    }

    pub fn exp(&self) -> Self {
        let e = self.d[0].exp();
        self.compose([e; 5])
    }
}

impl From<f64> for Jet4 {
    fn from(value: f64) -> Self {
        Jet4::constant(value)
    }
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(self, rhs: Jet4) -> Jet4 {
        let order = self.order.min(rhs.order);
        let mut d = [0.0; 5];
        for k in 0..=order {
            d[k] = self.d[k] + rhs.d[k];
        }
        Jet4 { d, order }
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        self + (-rhs)
    }
}

impl Neg for Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        let mut d = self.d;
        d.iter_mut().for_each(|x| *x = -*x);
        Jet4 { d, order: self.order }
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let order = self.order.min(rhs.order);
        let mut d = [0.0; 5];
        for k in 0..=order {
            d[k] = (0..=k).map(|j| BINOM[k][j] * self.d[j] * rhs.d[k - j]).sum();
        }
        Jet4 { d, order }
    }
}

impl Div for Jet4 {
    type Output = Jet4;
    fn div(self, rhs: Jet4) -> Jet4 {
        let order = self.order.min(rhs.order);
        let g0 = rhs.d[0];
        let mut h = [0.0; 5];
        for k in 0..=order {
            let tail: f64 = (1..=k).map(|j| BINOM[k][j] * rhs.d[j] * h[k - j]).sum();
            h[k] = (self.d[k] - tail) / g0;
        }
        Jet4 { d: h, order }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<f64> for Jet4 {
            type Output = Jet4;
            fn $method(self, rhs: f64) -> Jet4 {
                $tr::$method(self, Jet4::constant(rhs))
            }
        }
        impl $tr<Jet4> for f64 {
            type Output = Jet4;
            fn $method(self, rhs: Jet4) -> Jet4 {
                $tr::$method(Jet4::constant(self), rhs)
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn central_fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let c = Jet4::constant(3.5);
        assert_eq!(c.derivs(), &[3.5, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // p(x) = x^4 - 2x^3 + x  at x = 1.5
        let x = Jet4::variable(1.5);
        let p = x.powi(4) - 2.0 * x.powi(3) + x;
        let xv: f64 = 1.5;
        assert_relative_eq!(p.value(), xv.powi(4) - 2.0 * xv.powi(3) + xv);
        assert_relative_eq!(p.deriv(1).unwrap(), 4.0 * xv.powi(3) - 6.0 * xv * xv + 1.0);
        assert_relative_eq!(p.deriv(2).unwrap(), 12.0 * xv * xv - 12.0 * xv);
        assert_relative_eq!(p.deriv(3).unwrap(), 24.0 * xv - 12.0);
        assert_relative_eq!(p.deriv(4).unwrap(), 24.0);
    }

    #[test]
    fn quotient_matches_closed_form() {
        // 2/(1-s) has k-th derivative 2 k! / (1-s)^(k+1)
        let s = Jet4::variable(0.3);
        let q = 2.0 / (1.0 - s);
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0];
        for k in 0..=4 {
            let expected = 2.0 * fact[k] / 0.7f64.powi(k as i32 + 1);
            assert_relative_eq!(q.deriv(k).unwrap(), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let s = Jet4::variable(0.2);
        let q = (s * s).derivative();
        assert_eq!(q.order(), 3);
        assert_eq!(q.value(), 0.4);
        assert_eq!(q.deriv(1), Some(2.0));
        assert_eq!(q.deriv(4), None);
        let mixed = q + Jet4::constant(1.0);
        assert_eq!(mixed.order(), 3);
    }

    #[test]
    fn transcendental_functions_match_finite_differences() {
        let x0 = 0.8;
        let x = Jet4::variable(x0);
        let f = (x.exp() * x.sqrt()).ln() / (1.0 + x * x);
        let scalar = |t: f64| (t.exp() * t.sqrt()).ln() / (1.0 + t * t);
        assert_relative_eq!(f.deriv(1).unwrap(), central_fd(scalar, x0, 1e-5), max_relative = 1e-8);
        let d1 = |t: f64| {
            let j = Jet4::variable(t);
            ((j.exp() * j.sqrt()).ln() / (1.0 + j * j)).deriv(1).unwrap()
        };
        assert_relative_eq!(f.deriv(2).unwrap(), central_fd(d1, x0, 1e-5), max_relative = 1e-8);
        let d3 = |t: f64| {
            let j = Jet4::variable(t);
            ((j.exp() * j.sqrt()).ln() / (1.0 + j * j)).deriv(3).unwrap()
        };
        assert_relative_eq!(f.deriv(4).unwrap(), central_fd(d3, x0, 1e-5), max_relative = 1e-7);
    }

    proptest! {
        #[test]
        fn division_inverts_multiplication(a in -3.0..3.0f64, b in 0.5..3.0f64, x in -1.0..1.0f64) {
            let t = Jet4::variable(x);
            let f = t * a + t.powi(3);
            let g = b + t * t;
            let back = (f * g) / g;
            for k in 0..=4 {
                prop_assert!((back.deriv(k).unwrap() - f.deriv(k).unwrap()).abs() < 1e-10);
            }
        }

        #[test]
        fn powf_matches_repeated_product(x in 0.2..2.0f64) {
            let t = Jet4::variable(x) + 0.5 * Jet4::variable(x).powi(2);
            let a = t.powf(3.0);
            let b = t * t * t;
            for k in 0..=4 {
                let (u, v) = (a.deriv(k).unwrap(), b.deriv(k).unwrap());
                prop_assert!((u - v).abs() <= 1e-10 * (1.0 + v.abs()));
            }
        }
    }
}
