//! Hand-simplified expressions for the square and Randers-changed square
//! families, transcribed as polynomial text. They are checked against the
//! definitional assembly in [`super::symbolic`], and the mean Berwald code
//! evaluates several of them directly.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::parse::parse_poly;
use super::ratfunc::{FloatRatFunc, RatFunc};
use crate::error::Result;

/// `num / Π den_i^{e_i}`, all parts in the [`parse_poly`] grammar.
#[derive(Clone, Copy, Debug)]
pub struct PrintedExpr {
    pub num: &'static str,
    pub den: &'static [(&'static str, u32)],
}

impl PrintedExpr {
    pub fn rat_func(&self) -> Result<RatFunc> {
        let factors = self.den.iter().map(|(f, e)| Ok((parse_poly(f)?, *e))).collect::<Result<Vec<_>>>()?;
        RatFunc::with_factors(parse_poly(self.num)?, factors)
    }
}

const SQ_SHEN: &str = "1-3*s^2+2*b2";
const RSQ_DELTA_NUM: &str = "-3*s^4-9*s^3+(2*b2-2)*s^2+(6*b2+3)*s+2*b2+1";

pub const SQUARE_Q: PrintedExpr = PrintedExpr { num: "2", den: &[("1-s", 1)] };
pub const SQUARE_QP: PrintedExpr = PrintedExpr { num: "2", den: &[("1-s", 2)] };
pub const SQUARE_QPP: PrintedExpr = PrintedExpr { num: "4", den: &[("1-s", 3)] };
pub const SQUARE_DELTA: PrintedExpr = PrintedExpr { num: SQ_SHEN, den: &[("1-s", 2)] };
pub const SQUARE_PHI: PrintedExpr = PrintedExpr {
    num: "2*(-6*n*s^3 + 3*(n+1)*s^2 + 2*(1+n+(2*n-1)*b2)*s - (1+n)*(1+2*b2))",
    den: &[("1-s", 4)],
};

/// The bracket factor `A` of the square S-curvature formula.
pub const SQUARE_A: PrintedExpr = PrintedExpr {
    num: "-6*n*s^3 + 2*(1+n+(2*n-1)*b2)*s + 3*(n+1)*s^2 - (1+n)*(1+2*b2)",
    den: &[(SQ_SHEN, 2)],
};

/// `A` as restated before its derivatives are taken.
pub const SQUARE_A_RESTATED: PrintedExpr = PrintedExpr {
    num: "-6*n*s^3 + 3*(n+1)*s^2 + (2+2*n+(4*n-2)*b2)*s - (1+n)*(1+2*b2)",
    den: &[(SQ_SHEN, 2)],
};

/// `dA/ds`.
pub const SQUARE_DA: PrintedExpr = PrintedExpr {
    num: "-18*n*s^4 + (18*n+18)*s^3 + (-18*b2+18)*s^2 + (-6*n-12*n*b2-6-12*b2)*s \
          + 2 + 2*b2 - 4*b2^2 + 2*n + 8*n*b2^2 + 8*n*b2",
    den: &[(SQ_SHEN, 3)],
};

/// `d²A/ds²`.
pub const SQUARE_D2A: PrintedExpr = PrintedExpr {
    num: "6*(-18*n*s^5 + (27+27*n)*s^4 + (-24*n*b2-36*b2+36-12*n)*s^3 \
          + (-6*n-12*n*b2-12*b2-6)*s^2 + (12*b2+6*n+24*n*b2-24*b2^2+24*n*b2^2+12)*s \
          - 1 - n - 4*n*b2 - 4*b2 - 4*n*b2^2 - 4*b2^2)",
    den: &[(SQ_SHEN, 4)],
};

pub const RSQ_Q: PrintedExpr = PrintedExpr { num: "2*s+3", den: &[("1-s^2", 1)] };
pub const RSQ_QP: PrintedExpr = PrintedExpr { num: "2*s^2+6*s+2", den: &[("1-s^2", 2)] };
pub const RSQ_QPP: PrintedExpr = PrintedExpr { num: "4*s^3+18*s^2+12*s+6", den: &[("1-s^2", 3)] };
pub const RSQ_DELTA: PrintedExpr = PrintedExpr { num: RSQ_DELTA_NUM, den: &[("1-s^2", 2)] };

/// `(sQ′ − Q)(1 + nΔ + sQ)` as first expanded.
pub const RSQ_PHI_FIRST: PrintedExpr = PrintedExpr {
    num: "-(12*n+4)*s^7 - (63*n+21)*s^6 + (8*n*b2-89*n-27)*s^5 + (42*n*b2+3*n+15)*s^4 \
          + (62*n*b2+58*n+40)*s^3 + (12*n*b2+15*n+9)*s^2 - (18*n*b2+9*n+9)*s - (6*n*b2+3*n+3)",
    den: &[("1-s^2", 4)],
};

/// `(s² − b²)(1 + sQ)Q″` as first expanded.
pub const RSQ_PHI_SECOND: PrintedExpr = PrintedExpr {
    num: "4*s^7 + 30*s^6 + (70-4*b2)*s^5 + (60-30*b2)*s^4 + (30-70*b2)*s^3 + (6-60*b2)*s^2 - 30*b2*s - 6*b2",
    den: &[("1-s^2", 4)],
};

pub const RSQ_PHI: PrintedExpr = PrintedExpr {
    num: "-12*n*s^7 + (9-63*n)*s^6 + (8*n*b2-4*b2-89*n+43)*s^5 + (42*n*b2-30*b2+3*n+75)*s^4 \
          + (62*n*b2-70*b2+58*n+70)*s^3 + (12*n*b2-60*b2+15*n+15)*s^2 - (18*n*b2+30*b2+9*n+9)*s \
          - (6*n*b2+6*b2+3*n+3)",
    den: &[("1-s^2", 4)],
};

const RSQ_B_DEN: &[(&str, u32)] =
    &[("2", 1), ("-3*s^2+1+2*b2", 1), ("1-2*s^2-3*s^4+3*s-9*s^3+2*b2+2*b2*s^2+6*b2*s", 1)];

/// The bracket factor `B` of the Randers-changed square S-curvature formula.
pub const RSQ_B: PrintedExpr = PrintedExpr {
    num: "-12*s^5*n + (-27*n+9)*s^4 + (8*n*b2+4*n-4*b2+16)*s^3 + (18*n*b2+18*n-18*b2+18)*s^2 \
          + -12*b2*s - 3 - 6*b2 - 6*n*b2 - 3*n",
    den: RSQ_B_DEN,
};

/// `B` with the linear term read as `+12 b² s`.
pub const RSQ_B_PLUS: PrintedExpr = PrintedExpr {
    num: "-12*s^5*n + (-27*n+9)*s^4 + (8*n*b2+4*n-4*b2+16)*s^3 + (18*n*b2+18*n-18*b2+18)*s^2 \
          + 12*b2*s - 3 - 6*b2 - 6*n*b2 - 3*n",
    den: RSQ_B_DEN,
};

/// `dB/ds`.
pub const RSQ_DB: PrintedExpr = PrintedExpr {
    num: "-36*n*s^8 + (-162*n+54)*s^7 + (-207*n-36*b2+225)*s^6 + (-252*b2+90*n-36*n*b2+522)*s^5 \
          + (-488*b2+631-80*n*b2+199*n-8*b2^2+16*n*b2^2)*s^4 \
          + (-30*n+186+96*n*b2^2-408*b2-120*n*b2-48*b2^2)*s^3 \
          + (-228*b2+156*n*b2^2-108*b2^2-33-60*n*b2-69*n)*s^2 \
          + (96*n*b2^2+6*n+6-48*b2^2-12*b2+60*n*b2)*s + 9 + 24*b2 + 36*n*b2^2 + 12*b2^2 + 36*n*b2 + 9*n",
    den: &[("2", 1), ("-3*s^2+1+2*b2", 1), (RSQ_DELTA_NUM, 2)],
};

/// `d²B/ds²`.
pub const RSQ_D2B: PrintedExpr = PrintedExpr {
    num: "-108*s^11*n + (243-729*n)*s^10 + (1593-216*b2-144*n*b2-1935*n)*s^9 \
          + (5940-2052*b2-1404*n*b2-1512*n)*s^8 \
          + (-144*b2^2-6570*b2+144*n*b2^2+1440*n-4338*n*b2+13356)*s^7 \
          + (15894-10188*b2+1260*n*b2^2+1638*n-1332*b2^2-6300*n*b2)*s^6 \
          + (8706-4884*b2^2-4254*n*b2-1122*n-8574*b2+3756*n*b2^2)*s^5 \
          + (3132-7560*b2^2-1080*n+5400*n*b2^2-3834*b2+54*n*b2)*s^4 \
          + (2634*n*b2+3960*n*b2^2+1700-4680*b2^2+40*b2^3+40*n*b2^3+332*n+402*b2)*s^3 \
          + (1476*n*b2^2+1368*n*b2+720*b2+315*n-1116*b2^2+639)*s^2 \
          + (-90*n*b2-15*n-162*b2-180*n*b2^2+21-468*b2^2-120*n*b2^3-120*b2^3)*s \
          - 24 - 24*n - 120*n*b2^3 - 120*b2^3 - 126*b2 - 216*n*b2^2 - 126*n*b2 - 216*b2^2",
    den: &[("-3*s^2+1+2*b2", 1), (RSQ_DELTA_NUM, 3)],
};

/// Float evaluator for a printed expression, parsed once per process.
pub fn float_eval(expr: &'static PrintedExpr) -> &'static FloatRatFunc {
    static CACHE: OnceLock<std::sync::Mutex<HashMap<usize, &'static FloatRatFunc>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = expr.num.as_ptr() as usize;
    let mut map = cache.lock().expect("cache lock");
    map.entry(key).or_insert_with(|| {
        let rf = expr.rat_func().expect("printed expressions parse");
        Box::leak(Box::new(rf.to_float()))
    })
}
