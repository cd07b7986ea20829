//! The auxiliary functions of a polynomial `φ` as exact rational functions.

use num_rational::BigRational;

use super::mpoly::{MPoly, Var};
use super::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::metric::PhiSpec;

#[derive(Clone, Debug)]
pub struct SymbolicQuantities {
    pub phi: MPoly,
    pub q: RatFunc,
    pub q_prime: RatFunc,
    pub q_second: RatFunc,
    pub delta: RatFunc,
    pub psi: RatFunc,
    pub big_phi: RatFunc,
    /// `Φ / (2Δ²)`, the factor in front of the bracket terms of `S`.
    pub factor: RatFunc,
    pub factor_prime: RatFunc,
    pub factor_second: RatFunc,
    /// `φ − sφ′ + (b2 − s²)φ″`.
    pub shen_condition: MPoly,
}

pub fn build_quantities_symbolic(phi: &PhiSpec) -> Result<SymbolicQuantities> {
    build_from_poly(MPoly::univariate_s(phi.coeffs()))
}

pub fn build_from_poly(phi: MPoly) -> Result<SymbolicQuantities> {
    let s = MPoly::var(Var::S);
    let b2 = MPoly::var(Var::B2);
    let dphi = phi.deriv(Var::S);
    let d2phi = dphi.deriv(Var::S);
    let denom = &phi - &(&s * &dphi);
    if denom.is_zero() {
        return Err(Error::InvalidPhi("phi - s phi' vanishes identically".into()));
    }
    let q = RatFunc::new(dphi.clone(), denom)?;
    let q_prime = q.deriv(Var::S);
    let q_second = q_prime.deriv(Var::S);

    let one = RatFunc::int(1);
    let sr = RatFunc::var(Var::S);
    let gap = RatFunc::from_poly(&b2 - &s.pow(2));
    let sq = sr.mul(&q);
    let delta = one.add(&sq).add(&gap.mul(&q_prime));
    let psi = q_prime.div(&delta.scale(&BigRational::from_integer(2.into())))?;
    let big_phi = sr
        .mul(&q_prime)
        .sub(&q)
        .mul(&RatFunc::var(Var::N).mul(&delta).add(&one).add(&sq))
        .sub(&gap.mul(&one.add(&sq)).mul(&q_second));
    let factor = big_phi.div(&delta.pow(2).scale(&BigRational::from_integer(2.into())))?;
    let factor_prime = factor.deriv(Var::S);
    let factor_second = factor_prime.deriv(Var::S);
    let shen_condition = &(&phi - &(&s * &dphi)) + &(&(&b2 - &s.pow(2)) * &d2phi);
    Ok(SymbolicQuantities {
        phi,
        q,
        q_prime,
        q_second,
        delta,
        psi,
        big_phi,
        factor,
        factor_prime,
        factor_second,
        shen_condition,
    })
}
