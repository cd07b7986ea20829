//! Exact verification of the closed forms.
//!
//! [`symbolic`] assembles `Q`, `Δ`, `Φ` and the S-curvature factor of a
//! polynomial `φ` as exact rational functions in `s`, `b2 = b²` and `n`.
//! [`printed`] holds the hand-simplified versions. [`certify_all`] compares
//! every printed expression with its definitional counterpart by
//! cross-multiplication and returns one verdict per claim.

pub mod mpoly;
mod parse;
pub mod printed;
pub mod ratfunc;
pub mod symbolic;

use serde::Serialize;

pub use mpoly::{MPoly, Var};
pub(crate) use parse::parse_poly;
pub use printed::PrintedExpr;
pub use ratfunc::RatFunc;
pub use symbolic::{build_quantities_symbolic, SymbolicQuantities};

use crate::error::{Error, Result};
use crate::metric::{PhiFamily, PhiSpec};

/// `a == b` as rational functions.
pub fn rf_equal(a: &RatFunc, b: &RatFunc) -> bool {
    a.equals(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimResult {
    pub id: &'static str,
    /// Where the expression appears, e.g. "square S-curvature intermediates".
    pub location: &'static str,
    pub description: &'static str,
    pub holds: bool,
    /// Cross-multiplied difference polynomial when the claim fails.
    pub difference: Option<String>,
}

impl ClaimResult {
    fn compare(
        id: &'static str,
        location: &'static str,
        description: &'static str,
        printed: &RatFunc,
        reference: &RatFunc,
    ) -> Self {
        let diff = printed.cross_difference(reference);
        ClaimResult { id, location, description, holds: diff.is_zero(), difference: (!diff.is_zero()).then(|| diff.to_string()) }
    }
}

const SQ_INTERMEDIATE: &str = "square S-curvature intermediates";
const SQ_CLOSED: &str = "square S-curvature closed form";
const SQ_BERWALD: &str = "square mean Berwald derivation";
const RSQ_INTERMEDIATE: &str = "Randers-changed square S-curvature intermediates";
const RSQ_CLOSED: &str = "Randers-changed square S-curvature closed form";
const RSQ_BERWALD: &str = "Randers-changed square mean Berwald derivation";

/// Result of comparing the general S-curvature formula with a family's
/// factored closed form.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub family: &'static str,
    /// `Q` equals the inline factor in front of `⟨[v, y]_k, v⟩`.
    pub q_matches: bool,
    /// `Φ / (2Δ²)` equals the closed-form bracket factor.
    pub factor_matches: bool,
    pub verdict: bool,
    pub q_difference: Option<String>,
    pub factor_difference: Option<String>,
}

/// Checks that the general formula `Φ/(2αΔ²)(P + αQL)` and the family's
/// closed form `K (q L + P/α)` are the same function, i.e. `Φ/(2Δ²) = K` and
/// `Q = q`.
pub fn certify_general_vs_closed(family: PhiFamily) -> Result<Certificate> {
    let (phi, closed_q, closed_factor) = match family {
        PhiFamily::Square => (PhiSpec::square(), printed::SQUARE_Q.rat_func()?, printed::SQUARE_A.rat_func()?),
        PhiFamily::RandersSquare => (PhiSpec::randers_square(), printed::RSQ_Q.rat_func()?, printed::RSQ_B.rat_func()?),
        PhiFamily::Riemannian => (PhiSpec::riemannian(), RatFunc::int(0), RatFunc::int(0)),
        other => return Err(Error::NoClosedForm(other.name().into())),
    };
    let sym = build_quantities_symbolic(&phi)?;
    let qd = sym.q.cross_difference(&closed_q);
    let fd = sym.factor.cross_difference(&closed_factor);
    // With Φ = 0 both sides vanish whatever Q is.
    let q_matches = qd.is_zero() || (sym.factor.is_zero() && closed_factor.is_zero());
    let factor_matches = fd.is_zero();
    Ok(Certificate {
        family: family.name(),
        q_matches,
        factor_matches,
        verdict: q_matches && factor_matches,
        q_difference: (!q_matches).then(|| qd.to_string()),
        factor_difference: (!factor_matches).then(|| fd.to_string()),
    })
}

/// Every printed expression checked against the definitional assembly.
pub fn certify_all() -> Result<Vec<ClaimResult>> {
    use printed::*;
    let sq = build_quantities_symbolic(&PhiSpec::square())?;
    let rsq = build_quantities_symbolic(&PhiSpec::randers_square())?;
    let riem = build_quantities_symbolic(&PhiSpec::riemannian())?;
    let shen = RatFunc::from_poly(parse_poly("1-3*s^2+2*b2")?);

    let mut out = Vec::new();
    let mut push = |id, loc, desc, p: &PrintedExpr, r: &RatFunc| -> Result<()> {
        out.push(ClaimResult::compare(id, loc, desc, &p.rat_func()?, r));
        Ok(())
    };
    push("square.Q", SQ_INTERMEDIATE, "Q = 2/(1-s)", &SQUARE_Q, &sq.q)?;
    push("square.Qp", SQ_INTERMEDIATE, "Q' = 2/(1-s)^2", &SQUARE_QP, &sq.q_prime)?;
    push("square.Qpp", SQ_INTERMEDIATE, "Q'' = 4/(1-s)^3", &SQUARE_QPP, &sq.q_second)?;
    push("square.Delta", SQ_INTERMEDIATE, "Delta = (1-3s^2+2b^2)/(1-s)^2", &SQUARE_DELTA, &sq.delta)?;
    push("square.Phi", SQ_INTERMEDIATE, "Phi as a cubic over (1-s)^4", &SQUARE_PHI, &sq.big_phi)?;
    push("square.A", SQ_CLOSED, "A = Phi/(2 Delta^2)", &SQUARE_A, &sq.factor)?;
    push("square.A.restated", SQ_BERWALD, "A as restated", &SQUARE_A_RESTATED, &sq.factor)?;
    push("square.dA", SQ_BERWALD, "dA/ds over (1-3s^2+2b^2)^3", &SQUARE_DA, &sq.factor_prime)?;
    push("square.d2A", SQ_BERWALD, "d2A/ds2 over (1-3s^2+2b^2)^4", &SQUARE_D2A, &sq.factor_second)?;

    push("rsq.Q", RSQ_INTERMEDIATE, "Q = (2s+3)/(1-s^2)", &RSQ_Q, &rsq.q)?;
    push("rsq.Qp", RSQ_INTERMEDIATE, "Q' = (2s^2+6s+2)/(1-s^2)^2", &RSQ_QP, &rsq.q_prime)?;
    push("rsq.Qpp", RSQ_INTERMEDIATE, "Q'' = (4s^3+18s^2+12s+6)/(1-s^2)^3", &RSQ_QPP, &rsq.q_second)?;
    push("rsq.Delta", RSQ_INTERMEDIATE, "Delta as a quartic over (1-s^2)^2", &RSQ_DELTA, &rsq.delta)?;
    let s = RatFunc::var(Var::S);
    let first = s.mul(&rsq.q_prime).sub(&rsq.q).mul(
        &RatFunc::int(1).add(&RatFunc::var(Var::N).mul(&rsq.delta)).add(&s.mul(&rsq.q)),
    );
    let gap = RatFunc::from_poly(parse_poly("s^2-b2")?);
    let second = gap.mul(&RatFunc::int(1).add(&s.mul(&rsq.q))).mul(&rsq.q_second);
    push("rsq.Phi.first", RSQ_INTERMEDIATE, "(sQ'-Q)(1+n Delta+sQ) expanded", &RSQ_PHI_FIRST, &first)?;
    push("rsq.Phi.second", RSQ_INTERMEDIATE, "(s^2-b^2)(1+sQ)Q'' expanded", &RSQ_PHI_SECOND, &second)?;
    let parts = RSQ_PHI_FIRST.rat_func()?.add(&RSQ_PHI_SECOND.rat_func()?);
    out.push(ClaimResult::compare(
        "rsq.Phi.parts",
        RSQ_INTERMEDIATE,
        "sum of the two expanded parts equals Phi",
        &parts,
        &rsq.big_phi,
    ));
    let mut push = |id, loc, desc, p: &PrintedExpr, r: &RatFunc| -> Result<()> {
        out.push(ClaimResult::compare(id, loc, desc, &p.rat_func()?, r));
        Ok(())
    };
    push("rsq.Phi", RSQ_INTERMEDIATE, "Phi as a degree-7 polynomial over (1-s^2)^4", &RSQ_PHI, &rsq.big_phi)?;
    push("rsq.B", RSQ_CLOSED, "B = Phi/(2 Delta^2) with linear term -12b^2 s", &RSQ_B, &rsq.factor)?;
    push("rsq.B.plus", RSQ_CLOSED, "B with the linear term read as +12b^2 s", &RSQ_B_PLUS, &rsq.factor)?;
    push("rsq.dB", RSQ_BERWALD, "dB/ds with a degree-8 numerator", &RSQ_DB, &rsq.factor_prime)?;
    push("rsq.d2B", RSQ_BERWALD, "d2B/ds2 with a degree-11 numerator", &RSQ_D2B, &rsq.factor_second)?;

    out.push(ClaimResult::compare(
        "riemannian.Phi",
        "general S-curvature formula",
        "Phi = 0 for phi = 1",
        &riem.big_phi,
        &RatFunc::int(0),
    ));
    out.push(ClaimResult::compare(
        "square.shen",
        "validity criterion",
        "phi - s phi' + (b^2-s^2) phi'' = 1-3s^2+2b^2",
        &RatFunc::from_poly(sq.shen_condition.clone()),
        &shen,
    ));
    out.push(ClaimResult::compare(
        "rsq.shen",
        "validity criterion",
        "phi - s phi' + (b^2-s^2) phi'' = 1-3s^2+2b^2",
        &RatFunc::from_poly(rsq.shen_condition.clone()),
        &shen,
    ));
    for (family, id, loc) in [
        (PhiFamily::Square, "square.general", SQ_CLOSED),
        (PhiFamily::RandersSquare, "rsq.general", RSQ_CLOSED),
    ] {
        let c = certify_general_vs_closed(family)?;
        out.push(ClaimResult {
            id,
            location: loc,
            description: "closed form equals the general S-curvature formula",
            holds: c.verdict,
            difference: c.factor_difference.or(c.q_difference),
        });
    }
    Ok(out)
}
