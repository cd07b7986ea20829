//! Sparse polynomials in `s`, `b2`, `n` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponents of `(s, b2, n)`.
pub type Monomial = [u16; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    S = 0,
    B2 = 1,
    N = 2,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::S, Var::B2, Var::N];

    pub fn name(self) -> &'static str {
        match self {
            Var::S => "s",
            Var::B2 => "b2",
            Var::N => "n",
        }
    }
}

/// Terms are kept in a `BTreeMap`, so iteration order is lexicographic in
/// `(deg_s, deg_b2, deg_n)` and zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn one() -> Self {
        MPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        MPoly::monomial([0, 0, 0], c)
    }

    pub fn int(c: i64) -> Self {
        MPoly::constant(BigRational::from_integer(c.into()))
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v as usize] = 1;
        MPoly::monomial(e, BigRational::one())
    }

    pub fn monomial(exps: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        MPoly { terms }
    }

    /// `Σ c_k s^k`.
    pub fn univariate_s(coeffs: &[BigRational]) -> Self {
        let mut p = MPoly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term([k as u16, 0, 0], c.clone());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&[0, 0, 0]).cloned(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: Monomial) -> BigRational {
        self.terms.get(&exps).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self, v: Var) -> u16 {
        self.terms.keys().map(|e| e[v as usize]).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }

    pub fn checked_mul(&self, other: &MPoly) -> Result<Self> {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = [0u16; 3];
                for k in 0..3 {
                    e[k] = ea[k].checked_add(eb[k]).ok_or(Error::ExponentOverflow)?;
                }
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn checked_pow(&self, k: u32) -> Result<Self> {
        let mut acc = MPoly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// # Panics
    /// On exponent overflow; use [`MPoly::checked_pow`] to handle it.
    pub fn pow(&self, k: u32) -> Self {
        self.checked_pow(k).expect("exponent overflow")
    }

    /// Partial derivative in `v`.
    pub fn deriv(&self, v: Var) -> Self {
        let i = v as usize;
        let mut out = MPoly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = *e;
            d[i] -= 1;
            out.add_term(d, c * BigRational::from_integer(e[i].into()));
        }
        out
    }

    fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// `self / d` if `d` divides `self` exactly, else `None`.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        let (ld, cd) = d.leading()?;
        let (ld, cd) = (*ld, cd.clone());
        let mut r = self.clone();
        let mut q = MPoly::zero();
        while let Some((lr, cr)) = r.leading() {
            if (0..3).any(|k| lr[k] < ld[k]) {
                return None;
            }
            let e = [lr[0] - ld[0], lr[1] - ld[1], lr[2] - ld[2]];
            let t = MPoly::monomial(e, cr / &cd);
            r = &r - &t.checked_mul(d).ok()?;
            q = &q + &t;
        }
        Some(q)
    }

    pub fn eval(&self, s: &BigRational, b2: &BigRational, n: &BigRational) -> BigRational {
        let vals = [s, b2, n];
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..3 {
                if e[k] > 0 {
                    t *= num_traits::pow(vals[k].clone(), e[k] as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[0] as i32, e[1] as i32, e[2] as i32], c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    pub fn eval_f64(&self, s: f64, b2: f64, n: f64) -> f64 {
        self.to_float().eval(s, b2, n)
    }
}

impl fmt::Display for MPoly {
    /// Terms from highest to lowest, e.g. `-6*n*s^3 + 3*s^2 - 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (idx, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || *e == [0, 0, 0] {
                factors.push(a.to_string());
            }
            for v in [Var::N, Var::B2, Var::S] {
                match e[v as usize] {
                    0 => {}
                    1 => factors.push(v.name().to_string()),
                    k => factors.push(format!("{}^{k}", v.name())),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    /// # Panics
    /// On exponent overflow; use [`MPoly::checked_mul`] to handle it.
    fn mul(self, rhs: &MPoly) -> MPoly {
        self.checked_mul(rhs).expect("exponent overflow")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for MPoly {
            type Output = MPoly;
            fn $method(self, rhs: MPoly) -> MPoly {
                $tr::$method(&self, &rhs)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

/// A polynomial with `f64` coefficients for fast evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatPoly {
    terms: Vec<([i32; 3], f64)>,
}

impl FloatPoly {
    pub fn eval(&self, s: f64, b2: f64, n: f64) -> f64 {
        self.terms.iter().map(|(e, c)| c * s.powi(e[0]) * b2.powi(e[1]) * n.powi(e[2])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s() -> MPoly {
        MPoly::var(Var::S)
    }

    #[test]
    fn difference_of_squares() {
        let one = MPoly::one();
        let p = (&one - &s()) * (&one + &s());
        assert_eq!(p, &one - &s().pow(2));
        assert_eq!(p.to_string(), "-s^2 + 1");
    }

    #[test]
    fn binomial_fourth_power() {
        let p = (MPoly::one() - s()).pow(4);
        let c: Vec<i64> = (0..=4).map(|k| p.coeff([k, 0, 0]).to_integer().try_into().unwrap()).collect();
        assert_eq!(c, vec![1, -4, 6, -4, 1]);
    }

    #[test]
    fn n_stays_linear() {
        let delta = &MPoly::one() + &(s() * MPoly::var(Var::B2));
        let p = MPoly::var(Var::N) * delta;
        assert_eq!(p.degree(Var::N), 1);
    }

    #[test]
    fn exponent_overflow_is_reported() {
        let big = MPoly::monomial([u16::MAX, 0, 0], rat(1, 1));
        assert!(matches!(big.checked_mul(&s()), Err(Error::ExponentOverflow)));
        assert!(matches!(s().checked_pow(70_000), Err(Error::ExponentOverflow)));
    }

    #[test]
    fn derivative_and_exact_division() {
        let p = (s() - MPoly::int(1)).pow(3) * (MPoly::var(Var::B2) + MPoly::var(Var::N));
        assert_eq!(p.deriv(Var::N), (s() - MPoly::int(1)).pow(3));
        let q = p.div_exact(&(s() - MPoly::int(1))).unwrap();
        assert_eq!(q, (s() - MPoly::int(1)).pow(2) * (MPoly::var(Var::B2) + MPoly::var(Var::N)));
        assert!(p.div_exact(&(s() + MPoly::int(1))).is_none());
    }

    #[test]
    fn display_is_canonical() {
        let p = MPoly::var(Var::N).scale(&rat(-6, 1)) * s().pow(3) + MPoly::constant(rat(1, 2));
        assert_eq!(p.to_string(), "-6*n*s^3 + 1/2");
        assert_eq!(MPoly::zero().to_string(), "0");
    }

    #[test]
    fn exact_and_float_evaluation_agree() {
        let p = (s() * MPoly::int(3) - MPoly::var(Var::B2)).pow(3) * MPoly::var(Var::N);
        let exact = p.eval(&rat(1, 3), &rat(1, 4), &rat(5, 1));
        let float = p.eval_f64(1.0 / 3.0, 0.25, 5.0);
        assert!((exact.to_f64().unwrap() - float).abs() < 1e-14);
    }

    fn arb_poly() -> impl Strategy<Value = MPoly> {
        proptest::collection::vec(((0u16..4, 0u16..3, 0u16..2), -5i64..=5, 1i64..4), 0..6).prop_map(|ts| {
            let mut p = MPoly::zero();
            for ((a, b, c), num, den) in ts {
                p.add_term([a, b, c], rat(num, den));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a - &a, MPoly::zero());
            prop_assert_eq!(&a * &MPoly::one(), a.clone());
        }

        #[test]
        fn division_inverts_multiplication(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).div_exact(&b), Some(a));
        }

        #[test]
        fn product_rule(a in arb_poly(), b in arb_poly()) {
            let lhs = (&a * &b).deriv(Var::S);
            let rhs = &(&a.deriv(Var::S) * &b) + &(&a * &b.deriv(Var::S));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
