//! Rational functions `num / Π f_i^{e_i}` over [`MPoly`].
//!
//! The denominator is a list of polynomial factors with multiplicities.
//! Factors are never factored further and no GCDs are computed; products and
//! quotients only cancel a denominator factor when it divides the numerator
//! exactly. Equality is decided by cross-multiplication.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::mpoly::{FloatPoly, MPoly, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc {
    num: MPoly,
    /// Distinct non-constant factors with positive exponents.
    den: Vec<(MPoly, u32)>,
}

impl RatFunc {
    pub fn from_poly(p: MPoly) -> Self {
        RatFunc { num: p, den: Vec::new() }
    }

    pub fn int(c: i64) -> Self {
        RatFunc::from_poly(MPoly::int(c))
    }

    pub fn var(v: Var) -> Self {
        RatFunc::from_poly(MPoly::var(v))
    }

    /// `num / den`.
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        RatFunc::with_factors(num, vec![(den, 1)])
    }

    /// `num / Π f^e`. Constant factors are folded into the numerator and
    /// repeated factors are merged.
    pub fn with_factors(num: MPoly, factors: Vec<(MPoly, u32)>) -> Result<Self> {
        let mut out = RatFunc::from_poly(num);
        for (f, e) in factors {
            if e == 0 {
                continue;
            }
            if let Some(c) = f.as_constant() {
                if c.is_zero() {
                    return Err(Error::ZeroDenominator);
                }
                let inv = num_traits::pow(c.recip(), e as usize);
                out.num = out.num.scale(&inv);
            } else {
                out.push_factor(f, e);
            }
        }
        Ok(out.reduce())
    }

    fn push_factor(&mut self, f: MPoly, e: u32) {
        match self.den.iter_mut().find(|(g, _)| *g == f) {
            Some((_, k)) => *k += e,
            None => self.den.push((f, e)),
        }
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den_factors(&self) -> &[(MPoly, u32)] {
        &self.den
    }

    /// Expanded denominator.
    pub fn den(&self) -> MPoly {
        self.den.iter().fold(MPoly::one(), |acc, (f, e)| &acc * &f.pow(*e))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Cancels denominator factors that divide the numerator exactly.
    fn reduce(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(f) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
        self
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if other.num.is_zero() {
            return self.clone();
        }
        if self.num.is_zero() {
            return other.clone();
        }
        let mut den = self.den.clone();
        for (f, e) in &other.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, k)) => *k = (*k).max(*e),
                None => den.push((f.clone(), *e)),
            }
        }
        let lift = |r: &RatFunc| {
            den.iter().fold(r.num.clone(), |acc, (f, e)| {
                let have = r.den.iter().find(|(g, _)| g == f).map_or(0, |(_, k)| *k);
                if *e > have {
                    &acc * &f.pow(e - have)
                } else {
                    acc
                }
            })
        };
        let num = &lift(self) + &lift(other);
        RatFunc { num, den }.reduce()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        let mut out = RatFunc { num: &self.num * &other.num, den: self.den.clone() };
        for (f, e) in &other.den {
            out.push_factor(f.clone(), *e);
        }
        out.reduce()
    }

    pub fn scale(&self, c: &BigRational) -> RatFunc {
        RatFunc { num: self.num.scale(c), den: self.den.clone() }.reduce()
    }

    pub fn recip(&self) -> Result<RatFunc> {
        if self.num.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        RatFunc::with_factors(self.den(), vec![(self.num.clone(), 1)]).map(RatFunc::reduce)
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, k: u32) -> RatFunc {
        RatFunc { num: self.num.pow(k), den: self.den.iter().map(|(f, e)| (f.clone(), e * k)).collect() }
    }

    /// Partial derivative in `v`:
    /// `(N′ Π f − N Σ e_i f_i′ Π_{j≠i} f_j) / Π f^{e+1}`.
    pub fn deriv(&self, v: Var) -> RatFunc {
        let base = self.den.iter().fold(MPoly::one(), |acc, (f, _)| &acc * f);
        let mut num = &self.num.deriv(v) * &base;
        for (i, (fi, ei)) in self.den.iter().enumerate() {
            let dfi = fi.deriv(v);
            if dfi.is_zero() {
                continue;
            }
            let others = self
                .den
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(MPoly::one(), |acc, (_, (f, _))| &acc * f);
            let term = &(&self.num * &dfi) * &others;
            num = &num - &term.scale(&BigRational::from_integer((*ei).into()));
        }
        RatFunc { num, den: self.den.iter().map(|(f, e)| (f.clone(), e + 1)).collect() }.reduce()
    }

    /// `a.num · (b's extra factors) − b.num · (a's extra factors)` after
    /// cancelling the factors both denominators share. Zero iff `a == b`.
    pub fn cross_difference(&self, other: &RatFunc) -> MPoly {
        let mut lhs = self.num.clone();
        let mut rhs = other.num.clone();
        for (f, e) in &other.den {
            let have = self.den.iter().find(|(g, _)| g == f).map_or(0, |(_, k)| *k);
            if *e > have {
                lhs = &lhs * &f.pow(e - have);
            }
        }
        for (f, e) in &self.den {
            let have = other.den.iter().find(|(g, _)| g == f).map_or(0, |(_, k)| *k);
            if *e > have {
                rhs = &rhs * &f.pow(e - have);
            }
        }
        &lhs - &rhs
    }

    pub fn equals(&self, other: &RatFunc) -> bool {
        self.cross_difference(other).is_zero()
    }

    /// Exact value, or `None` where the denominator vanishes.
    pub fn eval(&self, s: &BigRational, b2: &BigRational, n: &BigRational) -> Option<BigRational> {
        let mut den = BigRational::one();
        for (f, e) in &self.den {
            den *= num_traits::pow(f.eval(s, b2, n), *e as usize);
        }
        (!den.is_zero()).then(|| self.num.eval(s, b2, n) / den)
    }

    pub fn to_float(&self) -> FloatRatFunc {
        FloatRatFunc {
            num: self.num.to_float(),
            den: self.den.iter().map(|(f, e)| (f.to_float(), *e as i32)).collect(),
        }
    }

    pub fn eval_f64(&self, s: f64, b2: f64, n: f64) -> f64 {
        self.to_float().eval(s, b2, n)
    }

    /// Value at exact rationals, converted to `f64`.
    pub fn eval_exact_f64(&self, s: f64, b2: f64, n: f64) -> Option<f64> {
        let r = |x: f64| BigRational::from_float(x);
        self.eval(&r(s)?, &r(b2)?, &r(n)?)?.to_f64()
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.num)?;
        if self.den.is_empty() {
            return Ok(());
        }
        f.write_str(" / (")?;
        for (i, (p, e)) in self.den.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            match e {
                1 => write!(f, "({p})")?,
                e => write!(f, "({p})^{e}")?,
            }
        }
        f.write_str(")")
    }
}

/// [`RatFunc`] with `f64` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatRatFunc {
    num: FloatPoly,
    den: Vec<(FloatPoly, i32)>,
}

impl FloatRatFunc {
    pub fn eval(&self, s: f64, b2: f64, n: f64) -> f64 {
        let den: f64 = self.den.iter().map(|(f, e)| f.eval(s, b2, n).powi(*e)).product();
        self.num.eval(s, b2, n) / den
    }
}

#[cfg(test)]
mod tests {
    use super::super::mpoly::rat;
    use super::*;
    use proptest::prelude::*;

    fn s() -> MPoly {
        MPoly::var(Var::S)
    }

    fn one_minus_s() -> MPoly {
        &MPoly::one() - &s()
    }

    #[test]
    fn equal_after_cross_multiplication() {
        let a = RatFunc::new(MPoly::int(2), one_minus_s()).unwrap();
        let b = RatFunc::new(&MPoly::int(2) + &s().scale(&rat(2, 1)), &MPoly::one() - &s().pow(2)).unwrap();
        assert!(a.equals(&b));
        let c = RatFunc::new(MPoly::int(2), &MPoly::one() + &s()).unwrap();
        assert!(!a.equals(&c));
        assert_eq!(a.cross_difference(&c).to_string(), "4*s");
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(matches!(RatFunc::new(MPoly::one(), MPoly::zero()), Err(Error::ZeroDenominator)));
        assert!(matches!(RatFunc::from_poly(MPoly::zero()).recip(), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn constant_denominators_fold_into_numerator() {
        let r = RatFunc::new(MPoly::int(3), MPoly::int(6)).unwrap();
        assert!(r.den_factors().is_empty());
        assert_eq!(r.num(), &MPoly::constant(rat(1, 2)));
    }

    #[test]
    fn derivative_of_quotient() {
        // d/ds 2/(1-s) = 2/(1-s)^2
        let q = RatFunc::new(MPoly::int(2), one_minus_s()).unwrap();
        let dq = q.deriv(Var::S);
        let expected = RatFunc::with_factors(MPoly::int(2), vec![(one_minus_s(), 2)]).unwrap();
        assert!(dq.equals(&expected));
        assert_eq!(dq.den_factors(), &[(one_minus_s(), 2)]);
    }

    #[test]
    fn products_cancel_exact_factors() {
        let a = RatFunc::new(&MPoly::one() - &s().pow(2), one_minus_s()).unwrap();
        assert!(a.den_factors().is_empty());
        assert_eq!(a.num(), &(&MPoly::one() + &s()));
    }

    #[test]
    fn evaluation() {
        let q = RatFunc::new(MPoly::int(2), one_minus_s()).unwrap();
        assert_eq!(q.eval(&rat(1, 2), &rat(0, 1), &rat(0, 1)), Some(rat(4, 1)));
        assert_eq!(q.eval(&rat(1, 1), &rat(0, 1), &rat(0, 1)), None);
        assert_eq!(q.eval_f64(0.5, 0.0, 0.0), 4.0);
    }

    fn arb_rf() -> impl Strategy<Value = RatFunc> {
        let factors = [
            one_minus_s(),
            &MPoly::one() + &s(),
            &(&MPoly::one() + &MPoly::var(Var::B2).scale(&rat(2, 1))) - &s().pow(2).scale(&rat(3, 1)),
        ];
        (proptest::collection::vec(-3i64..=3, 1..4), proptest::collection::vec(0u32..3, 3), 1i64..4).prop_map(
            move |(c, exps, k)| {
                let mut num = MPoly::univariate_s(&c.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>());
                num = &num + &MPoly::var(Var::N).scale(&rat(k, 1));
                let den = factors.iter().cloned().zip(exps).collect();
                RatFunc::with_factors(num, den).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn equality_is_an_equivalence(a in arb_rf(), b in arb_rf(), k in 1i64..5) {
            prop_assert!(a.equals(&a));
            // a scaled above and below by the same factor is the same function
            let f = RatFunc::from_poly(&MPoly::int(k) + &s());
            let a2 = a.mul(&f).div(&f).unwrap();
            prop_assert!(a.equals(&a2) && a2.equals(&a));
            prop_assert_eq!(a.equals(&b), b.equals(&a));
            if a.equals(&b) {
                prop_assert!(a2.equals(&b));
            }
        }

        #[test]
        fn field_operations(a in arb_rf(), b in arb_rf()) {
            prop_assert!(a.add(&b).sub(&b).equals(&a));
            if !b.is_zero() {
                prop_assert!(a.mul(&b).div(&b).unwrap().equals(&a));
            }
            // quotient rule against product rule
            let lhs = a.mul(&b).deriv(Var::S);
            let rhs = a.deriv(Var::S).mul(&b).add(&a.mul(&b.deriv(Var::S)));
            prop_assert!(lhs.equals(&rhs));
        }
    }
}
