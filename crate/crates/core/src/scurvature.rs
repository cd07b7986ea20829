//! S-curvature at the origin of a reductive homogeneous space.
//!
//! With `P = ⟨[v, y]_k, y⟩` and `L = ⟨[v, y]_k, v⟩`,
//!
//! ```text
//! S(H, y) = Φ / (2αΔ²) · (P + αQ L)
//! ```
//!
//! evaluated at `s = β(y)/α(y)`. The square and Randers-changed square
//! families also have hand-factored closed forms, which are evaluated
//! independently and compared against the general formula.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{KVector, ValidatedModel};
use crate::metric::{self, PhiFamily, PhiSpec, ValidityReport};
use crate::par::{self, Execution};
use crate::phicalc::{quantities_generic, CurvContext};
use crate::sampling;

/// Default number of sampled directions.
pub const DEFAULT_SAMPLES: usize = 512;
/// Default relative vanishing tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bracket data of one direction `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionTerms {
    pub alpha: f64,
    pub beta: f64,
    /// `⟨[v, y]_k, y⟩`.
    pub p: f64,
    /// `⟨[v, y]_k, v⟩`.
    pub l: f64,
}

impl DirectionTerms {
    pub fn s(&self) -> f64 {
        self.beta / self.alpha
    }
}

/// Evaluates `S(H, ·)` for one model and one `φ`.
#[derive(Clone, Debug)]
pub struct SCurvature {
    model: ValidatedModel,
    phi: PhiSpec,
    n: usize,
    b: f64,
    ad_v: DMatrix<f64>,
    /// `(a, b, l, c)` with `a < b` over `k` indices, `c = c^l_{ab}` antisymmetrized.
    k_constants: Vec<(usize, usize, usize, f64)>,
    gram: DMatrix<f64>,
    gv: DVector<f64>,
    validity: ValidityReport,
}

impl SCurvature {
    /// `n` defaults to `dim k`. Fails if `φ` does not define a Finsler metric
    /// at `b = |v|`.
    pub fn new(model: &ValidatedModel, phi: &PhiSpec, n: Option<usize>) -> Result<Self> {
        let n = n.unwrap_or(model.k_dim());
        if n < 2 {
            return Err(Error::InvalidContext(format!("n must be at least 2, got {n}")));
        }
        let b = model.b();
        let validity = metric::ensure_valid(phi, b)?;
        let ad_v = model.ad_k(model.v())?;
        let k = model.k_indices();
        let mut k_constants = Vec::new();
        for a in 0..k.len() {
            for b in a + 1..k.len() {
                for (l, &kl) in k.iter().enumerate() {
                    let c = 0.5 * (model.constant(k[a], k[b], kl) - model.constant(k[b], k[a], kl));
                    if c != 0.0 {
                        k_constants.push((a, b, l, c));
                    }
                }
            }
        }
        let gram = model.inner().clone();
        let gv = &gram * model.v().to_dvector();
        Ok(SCurvature { model: model.clone(), phi: phi.clone(), n, b, ad_v, k_constants, gram, gv, validity })
    }

    /// `[x, y]_k`, summed over `a < b` so that `[x, x]_k` is exactly zero.
    pub fn bracket_k(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut w = DVector::zeros(self.model.k_dim());
        for &(a, b, l, c) in &self.k_constants {
            w[l] += c * (x[a] * y[b] - x[b] * y[a]);
        }
        w
    }

    /// `[v, y]_k`.
    pub fn bracket_v(&self, y: &DVector<f64>) -> DVector<f64> {
        self.bracket_k(&self.model.v().to_dvector(), y)
    }

    /// The Gram matrix of `⟨·,·⟩` on `k`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn model(&self) -> &ValidatedModel {
        &self.model
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn validity(&self) -> &ValidityReport {
        &self.validity
    }

    /// Matrix of `y ↦ [v, y]_k`.
    pub fn ad_v(&self) -> &DMatrix<f64> {
        &self.ad_v
    }

    pub fn terms(&self, y: &KVector) -> Result<DirectionTerms> {
        let nk = self.model.k_dim();
        if y.len() != nk {
            return Err(Error::DimensionMismatch { expected: nk, got: y.len() });
        }
        let yv = y.to_dvector();
        let gy = &self.gram * &yv;
        let alpha = yv.dot(&gy).max(0.0).sqrt();
        if alpha == 0.0 {
            return Err(Error::ZeroVector);
        }
        let w = self.bracket_v(&yv);
        Ok(DirectionTerms { alpha, beta: self.gv.dot(&yv), p: w.dot(&gy), l: w.dot(&self.gv) })
    }

    fn context(&self, t: &DirectionTerms) -> Result<CurvContext> {
        CurvContext::new(self.n, self.b, t.s())
    }

    /// The general formula with `Q`, `Δ`, `Φ` from jets of `φ`.
    pub fn general(&self, y: &KVector) -> Result<f64> {
        let t = self.terms(y)?;
        let q = quantities_generic(&self.phi, &self.context(&t)?)?;
        if t.p == 0.0 && t.l == 0.0 {
            return Ok(0.0);
        }
        Ok(q.big_phi / (2.0 * t.alpha * q.delta * q.delta) * (t.p + t.alpha * q.q * t.l))
    }

    /// The family's hand-factored closed form, or `None` for a custom `φ`.
    pub fn closed(&self, y: &KVector) -> Result<Option<f64>> {
        let t = self.terms(y)?;
        let ctx = self.context(&t)?;
        let (factor, q) = match self.phi.family() {
            PhiFamily::Riemannian => return Ok(Some(0.0)),
            PhiFamily::Randers => randers_factor(&ctx),
            PhiFamily::Square => square_factor(&ctx),
            PhiFamily::RandersSquare => randers_square_factor(&ctx),
            PhiFamily::Custom => return Ok(None),
        };
        Ok(Some(factor * (q * t.l + t.p / t.alpha)))
    }

    pub fn sample(&self, y: &KVector) -> Result<SCurvatureSample> {
        let s_general = self.general(y)?;
        let s_closed = self.closed(y)?;
        Ok(SCurvatureSample {
            y: y.clone(),
            s_general,
            s_closed,
            residual: s_closed.map(|c| (s_general - c).abs()),
        })
    }

    pub fn sweep(&self, ys: &[KVector], exec: Execution) -> Result<Vec<SCurvatureSample>> {
        par::map_indexed(exec, ys.len(), |i| self.sample(&ys[i])).into_iter().collect()
    }

    /// `F(y)` for the metric this evaluator was built with.
    pub fn finsler_norm(&self, y: &KVector) -> Result<f64> {
        metric::finsler_norm(&self.model, &self.phi, y)
    }
}

/// `(A, Q)` with `A = Φ/(2Δ²)` in factored form for `φ = 1 + 2s + s²`.
pub fn square_factor(ctx: &CurvContext) -> (f64, f64) {
    let (s, b2, n) = (ctx.s(), ctx.b2(), ctx.n() as f64);
    let num = -6.0 * n * s.powi(3) + 2.0 * (1.0 + n + (2.0 * n - 1.0) * b2) * s + 3.0 * (n + 1.0) * s * s
        - (1.0 + n) * (1.0 + 2.0 * b2);
    let den = 1.0 - 3.0 * s * s + 2.0 * b2;
    (num / (den * den), 2.0 / (1.0 - s))
}

/// `(B, Q)` with `B = Φ/(2Δ²)` in factored form for `φ = 1 + 3s + s²`.
pub fn randers_square_factor(ctx: &CurvContext) -> (f64, f64) {
    let (s, b2, n) = (ctx.s(), ctx.b2(), ctx.n() as f64);
    let num = -12.0 * s.powi(5) * n
        + (-27.0 * n + 9.0) * s.powi(4)
        + (8.0 * n * b2 + 4.0 * n - 4.0 * b2 + 16.0) * s.powi(3)
        + (18.0 * n * b2 + 18.0 * n - 18.0 * b2 + 18.0) * s * s
        - 12.0 * b2 * s
        - 3.0
        - 6.0 * b2
        - 6.0 * n * b2
        - 3.0 * n;
    let den = 2.0
        * (-3.0 * s * s + 1.0 + 2.0 * b2)
        * (1.0 - 2.0 * s * s - 3.0 * s.powi(4) + 3.0 * s - 9.0 * s.powi(3) + 2.0 * b2 + 2.0 * b2 * s * s + 6.0 * b2 * s);
    (num / den, (2.0 * s + 3.0) / (1.0 - s * s))
}

fn randers_factor(ctx: &CurvContext) -> (f64, f64) {
    (-(ctx.n() as f64 + 1.0) / (2.0 * (1.0 + ctx.s())), 1.0)
}

/// One evaluated direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SCurvatureSample {
    pub y: KVector,
    pub s_general: f64,
    pub s_closed: Option<f64>,
    pub residual: Option<f64>,
}

/// `S(H, y)` via the general formula.
pub fn s_general(m: &ValidatedModel, phi: &PhiSpec, n: Option<usize>, y: &KVector) -> Result<f64> {
    SCurvature::new(m, phi, n)?.general(y)
}

/// `S(H, y)` via the square-metric closed form.
pub fn s_square(m: &ValidatedModel, n: Option<usize>, y: &KVector) -> Result<f64> {
    Ok(SCurvature::new(m, &PhiSpec::square(), n)?.closed(y)?.expect("named family"))
}

/// `S(H, y)` via the Randers-changed square closed form.
pub fn s_randers_square(m: &ValidatedModel, n: Option<usize>, y: &KVector) -> Result<f64> {
    Ok(SCurvature::new(m, &PhiSpec::randers_square(), n)?.closed(y)?.expect("named family"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Vanishing,
    NonVanishing,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsotropyVerdict {
    pub verdict: Verdict,
    /// For the square and Randers-changed square families isotropic
    /// S-curvature is equivalent to vanishing S-curvature.
    pub isotropic: bool,
    pub samples: usize,
    pub max_abs_s: f64,
    pub threshold: f64,
    /// Frobenius norm of `ad_k(v)`.
    pub ad_v_norm: f64,
    /// Least-squares `c` in `S = (n + 1) c F`.
    pub fitted_c: f64,
    /// `max |S − (n + 1) c F|` for the fitted `c`.
    pub fit_residual: f64,
    /// `S(H, v)`, present when `v ≠ 0`.
    pub s_at_v: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct IsotropyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub exec: Execution,
}

impl Default for IsotropyOptions {
    fn default() -> Self {
        IsotropyOptions { samples: DEFAULT_SAMPLES, seed: 0, tol: DEFAULT_TOL, exec: Execution::default() }
    }
}

/// Samples `S` on the `α`-unit sphere and decides whether it vanishes.
///
/// `S` vanishes when `max |S| < tol · max(1, |ad_k v|_F)`.
pub fn isotropy_classify(eval: &SCurvature, opts: IsotropyOptions) -> Result<IsotropyVerdict> {
    if opts.samples == 0 {
        return Err(Error::InvalidContext("need at least one sample".into()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidContext("tolerance must be positive".into()));
    }
    let ys = sampling::alpha_unit_directions(eval.model(), opts.samples, opts.seed)?;
    let pairs: Vec<(f64, f64)> = par::map_indexed(opts.exec, ys.len(), |i| -> Result<(f64, f64)> {
        Ok((eval.general(&ys[i])?, eval.finsler_norm(&ys[i])?))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let max_abs_s = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let ad_v_norm = eval.ad_v().norm();
    let threshold = opts.tol * ad_v_norm.max(1.0);
    let np1 = eval.n() as f64 + 1.0;
    let sf: f64 = pairs.iter().map(|(s, f)| s * f).sum();
    let ff: f64 = pairs.iter().map(|(_, f)| f * f).sum();
    let fitted_c = sf / (np1 * ff);
    let fit_residual = pairs.iter().map(|(s, f)| (s - np1 * fitted_c * f).abs()).fold(0.0, f64::max);
    let v = eval.model().v();
    let s_at_v = if v.is_zero() { None } else { Some(eval.general(v)?) };
    let verdict = if max_abs_s < threshold { Verdict::Vanishing } else { Verdict::NonVanishing };
    Ok(IsotropyVerdict {
        verdict,
        isotropic: verdict == Verdict::Vanishing,
        samples: opts.samples,
        max_abs_s,
        threshold,
        ad_v_norm,
        fitted_c,
        fit_residual,
        s_at_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn validated(m: crate::liealg::LieModel) -> ValidatedModel {
        m.into_validated().unwrap()
    }

    #[test]
    fn solvable_anchor_is_minus_one() {
        let m = validated(fixtures::solvable2());
        let y = KVector::basis(2, 1);
        let e = SCurvature::new(&m, &PhiSpec::square(), Some(2)).unwrap();
        let t = e.terms(&y).unwrap();
        assert_eq!((t.alpha, t.beta, t.p, t.l), (1.0, 0.0, 0.5, 0.0));
        assert_abs_diff_eq!(e.general(&y).unwrap(), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s_square(&m, Some(2), &y).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_v_and_central_v_vanish() {
        for (m, phi) in [
            (fixtures::abelian(), PhiSpec::square()),
            (fixtures::heisenberg(), PhiSpec::square()),
            (fixtures::with_b(&fixtures::heisenberg(), 0.3), PhiSpec::randers_square()),
        ] {
            let m = validated(m);
            let e = SCurvature::new(&m, &phi, None).unwrap();
            for y in sampling::alpha_unit_directions(&m, 32, 1).unwrap() {
                assert_eq!(e.general(&y).unwrap(), 0.0);
                assert_eq!(e.closed(&y).unwrap(), Some(0.0));
            }
        }
    }

    #[test]
    fn closed_forms_agree_with_general() {
        for (name, m) in fixtures::all() {
            for (phi, b) in [(PhiSpec::square(), None), (PhiSpec::randers_square(), Some(0.3))] {
                let m = validated(match b {
                    Some(b) if m.b() > b => fixtures::with_b(&m, b),
                    _ => m.clone(),
                });
                let e = SCurvature::new(&m, &phi, Some(3)).unwrap();
                for y in sampling::alpha_unit_directions(&m, 64, 5).unwrap() {
                    let smp = e.sample(&y).unwrap();
                    let c = smp.s_closed.unwrap();
                    assert!(smp.residual.unwrap() <= 1e-10 * c.abs().max(1.0), "{name}: {smp:?}");
                }
            }
        }
    }

    #[test]
    fn riemannian_reduction() {
        let m = validated(fixtures::solvable3());
        let e = SCurvature::new(&m, &PhiSpec::riemannian(), None).unwrap();
        for y in sampling::alpha_unit_directions(&m, 16, 2).unwrap() {
            assert_eq!(e.general(&y).unwrap(), 0.0);
        }
    }

    #[test]
    fn s_at_v_is_exactly_zero() {
        for (_, m) in fixtures::all() {
            let m = validated(fixtures::with_b(&m, m.b().min(0.3)));
            if m.v().is_zero() {
                continue;
            }
            for phi in [PhiSpec::square(), PhiSpec::randers_square()] {
                let e = SCurvature::new(&m, &phi, None).unwrap();
                assert_eq!(e.general(m.v()).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn randers_square_rejects_large_b() {
        let m = validated(fixtures::solvable2());
        assert!(matches!(
            SCurvature::new(&m, &PhiSpec::randers_square(), None),
            Err(Error::InvalidMetric { .. })
        ));
    }

    #[test]
    fn isotropy_verdicts() {
        let opts = IsotropyOptions { samples: 128, ..Default::default() };
        let heis = validated(fixtures::heisenberg());
        let v = isotropy_classify(&SCurvature::new(&heis, &PhiSpec::square(), None).unwrap(), opts).unwrap();
        assert_eq!(v.verdict, Verdict::Vanishing);
        assert_eq!(v.s_at_v, Some(0.0));

        let ab = validated(fixtures::abelian());
        let v = isotropy_classify(&SCurvature::new(&ab, &PhiSpec::square(), None).unwrap(), opts).unwrap();
        assert_eq!(v.verdict, Verdict::Vanishing);
        assert_eq!(v.s_at_v, None);

        let sol = validated(fixtures::solvable2());
        let v = isotropy_classify(&SCurvature::new(&sol, &PhiSpec::square(), None).unwrap(), opts).unwrap();
        assert_eq!(v.verdict, Verdict::NonVanishing);
        assert!(!v.isotropic);
        assert!(v.fit_residual > 0.1);
    }

    #[test]
    fn sweep_is_identical_in_both_modes() {
        let m = validated(fixtures::solvable3());
        let e = SCurvature::new(&m, &PhiSpec::square(), None).unwrap();
        let ys = sampling::alpha_unit_directions(&m, 100, 4).unwrap();
        assert_eq!(e.sweep(&ys, Execution::Sequential).unwrap(), e.sweep(&ys, Execution::Parallel).unwrap());
    }
}
