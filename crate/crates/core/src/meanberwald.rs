//! Mean Berwald curvature `E_ij = ½ ∂²S/∂y^i∂y^j` at the origin.
//!
//! [`eij_closed`] assembles the Hessian of `S = K(s)(g(s) L + P/α)` by the
//! chain rule, with `K = A` or `B` and `g = Q`, in an orthonormal frame of
//! `k`. [`eij_numeric`] differentiates the general S-curvature formula with
//! central differences and serves as the oracle.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{KVector, ValidatedModel};
use crate::metric::{PhiFamily, PhiSpec};
use crate::par::{self, Execution};
use crate::phicalc::{quantity_jets, CurvContext};
use crate::ratcheck::printed::{self, float_eval};
use crate::scurvature::SCurvature;

/// Inner-product tolerance for the orthonormal-frame check.
pub const ORTHONORMAL_TOL: f64 = 1e-12;
/// Relative finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Richardson gap above which a numeric Hessian is flagged.
pub const RICHARDSON_FLAG: f64 = 1e-4;

fn check_direction(m: &ValidatedModel, y: &KVector) -> Result<()> {
    if y.len() != m.k_dim() {
        return Err(Error::DimensionMismatch { expected: m.k_dim(), got: y.len() });
    }
    if y.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

fn check_frame(m: &ValidatedModel) -> Result<()> {
    if m.is_orthonormal(ORTHONORMAL_TOL) {
        Ok(())
    } else {
        Err(Error::NotOrthonormal)
    }
}

/// First and second `y`-derivatives of `s = β/α`.
#[derive(Clone, Debug, PartialEq)]
pub struct SDerivs {
    pub s: f64,
    pub alpha: f64,
    pub first: DVector<f64>,
    pub second: DMatrix<f64>,
}

/// `s_{y^i}` and `s_{y^i y^j}` in an orthonormal frame.
pub fn s_derivs(m: &ValidatedModel, y: &KVector) -> Result<SDerivs> {
    check_frame(m)?;
    check_direction(m, y)?;
    let yv = y.to_dvector();
    let bv = m.v().to_dvector();
    let alpha = yv.norm();
    let s = bv.dot(&yv) / alpha;
    let nk = yv.len();
    let a2 = alpha * alpha;
    let first = DVector::from_fn(nk, |i, _| (bv[i] * alpha - s * yv[i]) / a2);
    let second = DMatrix::from_fn(nk, nk, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (-(bv[i] * yv[j] + bv[j] * yv[i]) * alpha + 3.0 * s * yv[i] * yv[j] - a2 * s * delta) / (a2 * a2)
    });
    Ok(SDerivs { s, alpha, first, second })
}

fn finite(value: f64, ctx: &CurvContext) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Singular { s: ctx.s(), what: "a denominator" })
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > 2 {
        return Err(Error::Unsupported(format!("derivative order {order} (at most 2)")));
    }
    Ok(())
}

/// `A`, `dA/ds` or `d²A/ds²` for the square family from the simplified
/// expressions.
pub fn a_factor(ctx: &CurvContext, order: usize) -> Result<f64> {
    check_order(order)?;
    let expr = match order {
        0 => &printed::SQUARE_A,
        1 => &printed::SQUARE_DA,
        _ => &printed::SQUARE_D2A,
    };
    finite(float_eval(expr).eval(ctx.s(), ctx.b2(), ctx.n() as f64), ctx)
}

/// The same derivative of `A = Φ/(2Δ²)` by jet differentiation.
pub fn a_factor_jet(ctx: &CurvContext, order: usize) -> Result<f64> {
    factor_jet(&PhiSpec::square(), ctx, order)
}

/// `B`, `dB/ds` or `d²B/ds²` for the Randers-changed square family, by jet
/// differentiation of `Φ/(2Δ²)`.
pub fn b_factor(ctx: &CurvContext, order: usize) -> Result<f64> {
    factor_jet(&PhiSpec::randers_square(), ctx, order)
}

/// The printed simplified expressions for `B` and its derivatives.
pub fn b_factor_printed(ctx: &CurvContext, order: usize) -> Result<f64> {
    check_order(order)?;
    let expr = match order {
        0 => &printed::RSQ_B,
        1 => &printed::RSQ_DB,
        _ => &printed::RSQ_D2B,
    };
    finite(float_eval(expr).eval(ctx.s(), ctx.b2(), ctx.n() as f64), ctx)
}

fn factor_jet(phi: &PhiSpec, ctx: &CurvContext, order: usize) -> Result<f64> {
    check_order(order)?;
    let jet = quantity_jets(phi, ctx)?.scurv_factor();
    finite(jet.deriv(order).expect("factor carries two derivatives"), ctx)
}

/// `g = Q` and its two derivatives for the named families.
fn q_factor(family: PhiFamily, s: f64) -> [f64; 3] {
    match family {
        PhiFamily::Square => {
            let t = 1.0 - s;
            [2.0 / t, 2.0 / (t * t), 4.0 / (t * t * t)]
        }
        _ => {
            let t = 1.0 - s * s;
            [
                (2.0 * s + 3.0) / t,
                (2.0 * s * s + 6.0 * s + 2.0) / (t * t),
                (4.0 * s.powi(3) + 18.0 * s * s + 12.0 * s + 6.0) / (t * t * t),
            ]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EijMatrix {
    /// Row-major, indexed by the orthonormal basis of `k`.
    pub entries: Vec<Vec<f64>>,
    pub y: KVector,
}

impl EijMatrix {
    fn from_matrix(m: &DMatrix<f64>, y: &KVector) -> Self {
        let entries = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
        EijMatrix { entries, y: y.clone() }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.entries.len();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max_{i,j} |E_ij − E_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = self.to_matrix();
        (&m - m.transpose()).amax()
    }

    /// `max_i |Σ_j E_ij y^j|`.
    pub fn euler_residual(&self) -> f64 {
        (self.to_matrix() * self.y.to_dvector()).amax()
    }

    pub fn max_abs_diff(&self, other: &EijMatrix) -> f64 {
        (self.to_matrix() - other.to_matrix()).amax()
    }
}

/// Values of `K`, `K′`, `K″` and `g`, `g′`, `g″` at one `s`.
#[derive(Clone, Copy, Debug)]
struct Factors {
    k: [f64; 3],
    g: [f64; 3],
}

fn family_factors(family: PhiFamily, ctx: &CurvContext) -> Result<Factors> {
    let k = match family {
        PhiFamily::Square => [a_factor(ctx, 0)?, a_factor(ctx, 1)?, a_factor(ctx, 2)?],
        PhiFamily::RandersSquare => {
            let jet = quantity_jets(&PhiSpec::randers_square(), ctx)?.scurv_factor();
            let d = jet.derivs();
            [finite(d[0], ctx)?, finite(d[1], ctx)?, finite(d[2], ctx)?]
        }
        other => return Err(Error::NoClosedForm(other.name().into())),
    };
    Ok(Factors { k, g: q_factor(family, ctx.s()) })
}

/// Hessian of `S = K(g L + P/α)`, halved.
fn assemble(sd: &SDerivs, f: &Factors, w: &DVector<f64>, ad: &DMatrix<f64>, y: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let nk = y.len();
    let a = sd.alpha;
    let (a3, a5) = (a.powi(3), a.powi(5));
    let [k, k1, k2] = f.k;
    let [g, g1, g2] = f.g;
    let (si, sij) = (&sd.first, &sd.second);
    // w = [v, y]_k, column j of ad is [v, e_j]_k.
    let p = w.dot(y);
    let l = w.dot(v);
    let pi = ad.transpose() * y + w;
    let li = ad.transpose() * v;
    let ki = si * k1;
    DMatrix::from_fn(nk, nk, |i, j| {
        let dij = if i == j { 1.0 } else { 0.0 };
        let kij = k2 * si[i] * si[j] + k1 * sij[(i, j)];
        let pij = ad[(i, j)] + ad[(j, i)];
        let p_part = (kij / a - y[i] * ki[j] / a3 - y[j] * ki[i] / a3 - k * dij / a3 + 3.0 * k * y[i] * y[j] / a5) * p
            + (ki[j] / a - k * y[j] / a3) * pi[i]
            + (ki[i] / a - k * y[i] / a3) * pi[j]
            + k / a * pij;
        let l_part = (g * kij + g1 * si[i] * ki[j] + g1 * si[j] * ki[i] + k * g2 * si[i] * si[j] + k * g1 * sij[(i, j)]) * l
            + (g * ki[j] + k * g1 * si[j]) * li[i]
            + (g * ki[i] + k * g1 * si[i]) * li[j];
        0.5 * (p_part + l_part)
    })
}

/// `E_ij(H, y)` for the square or Randers-changed square family.
///
/// The model must be in an orthonormal frame; see
/// [`ValidatedModel::orthonormalize`].
pub fn eij_closed(m: &ValidatedModel, family: PhiFamily, n: usize, y: &KVector) -> Result<EijMatrix> {
    if !matches!(family, PhiFamily::Square | PhiFamily::RandersSquare) {
        return Err(Error::NoClosedForm(family.name().into()));
    }
    let phi = match family {
        PhiFamily::Square => PhiSpec::square(),
        _ => PhiSpec::randers_square(),
    };
    let eval = SCurvature::new(m, &phi, Some(n))?;
    let sd = s_derivs(m, y)?;
    let ctx = CurvContext::new(n, m.b(), sd.s)?;
    let factors = family_factors(family, &ctx)?;
    let nk = m.k_dim();
    let ad = DMatrix::from_columns(
        &(0..nk).map(|j| eval.bracket_v(&KVector::basis(nk, j).to_dvector())).collect::<Vec<_>>(),
    );
    let yv = y.to_dvector();
    let w = eval.bracket_v(&yv);
    let e = assemble(&sd, &factors, &w, &ad, &yv, &m.v().to_dvector());
    Ok(EijMatrix::from_matrix(&e, y))
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericEij {
    pub matrix: EijMatrix,
    /// Step used for the coarse estimate; the fine one uses `h/2`.
    pub h: f64,
    /// `|H(h) − H(h/2)|_∞ / (1 + |H(h/2)|_∞)` before extrapolation.
    pub richardson_gap: f64,
    pub flagged: bool,
}

/// Half the central-difference Hessian of the general S-curvature formula,
/// Richardson-extrapolated over steps `h` and `h/2`. `h` defaults to
/// `1e-4 · |y|`.
pub fn eij_numeric(m: &ValidatedModel, phi: &PhiSpec, n: usize, y: &KVector, h: Option<f64>) -> Result<NumericEij> {
    eij_numeric_with(m, phi, n, y, h, Execution::Sequential)
}

pub fn eij_numeric_with(
    m: &ValidatedModel,
    phi: &PhiSpec,
    n: usize,
    y: &KVector,
    h: Option<f64>,
    exec: Execution,
) -> Result<NumericEij> {
    check_direction(m, y)?;
    let eval = SCurvature::new(m, phi, Some(n))?;
    let yv = y.to_dvector();
    let h = h.unwrap_or(DEFAULT_STEP * yv.norm());
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidContext(format!("finite-difference step must be positive, got {h}")));
    }
    let coarse = hessian(&eval, &yv, h, exec)?;
    let fine = hessian(&eval, &yv, 0.5 * h, exec)?;
    let richardson_gap = (&coarse - &fine).amax() / (1.0 + fine.amax());
    let extrapolated = (&fine * 4.0 - &coarse) / 3.0;
    let e = (&extrapolated + extrapolated.transpose()) * 0.25;
    Ok(NumericEij {
        matrix: EijMatrix::from_matrix(&e, y),
        h,
        richardson_gap,
        flagged: richardson_gap > RICHARDSON_FLAG,
    })
}

fn hessian(eval: &SCurvature, y: &DVector<f64>, h: f64, exec: Execution) -> Result<DMatrix<f64>> {
    let nk = y.len();
    let s_at = |d: &[(usize, f64)]| -> Result<f64> {
        let mut p = y.clone();
        for &(i, t) in d {
            p[i] += t;
        }
        eval.general(&KVector::from(p))
    };
    let pairs: Vec<(usize, usize)> = (0..nk).flat_map(|i| (i..nk).map(move |j| (i, j))).collect();
    let f0 = s_at(&[])?;
    let vals = par::map_indexed(exec, pairs.len(), |idx| -> Result<f64> {
        let (i, j) = pairs[idx];
        if i == j {
            Ok((s_at(&[(i, h)])? - 2.0 * f0 + s_at(&[(i, -h)])?) / (h * h))
        } else {
            let pp = s_at(&[(i, h), (j, h)])?;
            let pm = s_at(&[(i, h), (j, -h)])?;
            let mp = s_at(&[(i, -h), (j, h)])?;
            let mm = s_at(&[(i, -h), (j, -h)])?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        }
    });
    let mut out = DMatrix::zeros(nk, nk);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        let v = v?;
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    Ok(out)
}
