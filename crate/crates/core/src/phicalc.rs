//! The auxiliary functions `Q`, `Δ`, `ψ`, `Φ`, `T` and the volume factor
//! `f(b)` of an `(α,β)`-metric.
//!
//! Everything is available two ways: generically, by differentiating `φ`
//! with [`Jet4`], and through hand-simplified closed forms for the square and
//! Randers-changed square families. The generic path is the reference.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::metric::{PhiFamily, PhiSpec};
use crate::par::{self, Execution};
use crate::quadrature::GaussLegendre;

/// Slack allowed on `|s| <= b` before rejecting a context; `s = β/α` picks up
/// rounding at the boundary.
const S_SLACK: f64 = 1e-12;

/// `φ − sφ′` smaller than this is treated as a pole of `Q`.
const SINGULAR_EPS: f64 = 1e-300;

/// A point `(n, b, s)` at which the auxiliary functions are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvContext {
    n: usize,
    b: f64,
    s: f64,
}

impl CurvContext {
    /// Checks `n >= 2`, `0 <= b < 1` and `|s| <= b`. Values of `s` that exceed
    /// `b` by rounding only are clamped.
    pub fn new(n: usize, b: f64, s: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidContext(format!("n must be at least 2, got {n}")));
        }
        if !(0.0..1.0).contains(&b) {
            return Err(Error::NormBound(b));
        }
        if !s.is_finite() || s.abs() > b + S_SLACK * (1.0 + b) {
            return Err(Error::InvalidContext(format!("|s| = {} exceeds b = {b}", s.abs())));
        }
        Ok(CurvContext { n, b, s: s.clamp(-b, b) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn b2(&self) -> f64 {
        self.b * self.b
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        CurvContext::new(self.n, self.b, s)
    }

    /// All contexts on the product grid `ns × bs × (s_points uniform points in [−b, b])`.
    pub fn grid(ns: &[usize], bs: &[f64], s_points: usize) -> Result<Vec<CurvContext>> {
        let mut out = Vec::with_capacity(ns.len() * bs.len() * s_points);
        for &n in ns {
            for &b in bs {
                for i in 0..s_points {
                    let s = if s_points == 1 { 0.0 } else { -b + 2.0 * b * i as f64 / (s_points - 1) as f64 };
                    out.push(CurvContext::new(n, b, s)?);
                }
            }
        }
        Ok(out)
    }
}

/// Values of the auxiliary functions at one context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiQuantities {
    pub q: f64,
    pub q_prime: f64,
    pub q_second: f64,
    pub delta: f64,
    pub psi: f64,
    pub big_phi: f64,
}

impl PhiQuantities {
    pub fn field(&self, f: QuantityField) -> f64 {
        match f {
            QuantityField::Q => self.q,
            QuantityField::QPrime => self.q_prime,
            QuantityField::QSecond => self.q_second,
            QuantityField::Delta => self.delta,
            QuantityField::Psi => self.psi,
            QuantityField::BigPhi => self.big_phi,
        }
    }

    /// Largest field-wise relative difference `|a − b| / |b|`. Equal values
    /// count as zero, so a reference of exactly `0` only matches `0`.
    pub fn max_relative_diff(&self, reference: &PhiQuantities) -> f64 {
        QuantityField::ALL
            .iter()
            .map(|&f| {
                let (a, b) = (self.field(f), reference.field(f));
                if a == b {
                    0.0
                } else {
                    (a - b).abs() / b.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    fn check_finite(self, s: f64) -> Result<Self> {
        if QuantityField::ALL.iter().all(|&f| self.field(f).is_finite()) {
            Ok(self)
        } else {
            Err(Error::Singular { s, what: "a denominator" })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityField {
    Q,
    QPrime,
    QSecond,
    Delta,
    Psi,
    BigPhi,
}

impl QuantityField {
    pub const ALL: [QuantityField; 6] = [
        QuantityField::Q,
        QuantityField::QPrime,
        QuantityField::QSecond,
        QuantityField::Delta,
        QuantityField::Psi,
        QuantityField::BigPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuantityField::Q => "Q",
            QuantityField::QPrime => "Qp",
            QuantityField::QSecond => "Qpp",
            QuantityField::Delta => "Delta",
            QuantityField::Psi => "psi",
            QuantityField::BigPhi => "Phi",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        QuantityField::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for QuantityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The auxiliary functions as jets in `s`.
///
/// `Q` carries four derivatives, `Q′`, `Δ` and `ψ` three, `Q″` and `Φ` two.
#[derive(Clone, Copy, Debug)]
pub struct QuantityJets {
    pub q: Jet4,
    pub q_prime: Jet4,
    pub q_second: Jet4,
    pub delta: Jet4,
    pub psi: Jet4,
    pub big_phi: Jet4,
}

impl QuantityJets {
    pub fn field(&self, f: QuantityField) -> Jet4 {
        match f {
            QuantityField::Q => self.q,
            QuantityField::QPrime => self.q_prime,
            QuantityField::QSecond => self.q_second,
            QuantityField::Delta => self.delta,
            QuantityField::Psi => self.psi,
            QuantityField::BigPhi => self.big_phi,
        }
    }

    pub fn values(&self) -> PhiQuantities {
        PhiQuantities {
            q: self.q.value(),
            q_prime: self.q_prime.value(),
            q_second: self.q_second.value(),
            delta: self.delta.value(),
            psi: self.psi.value(),
            big_phi: self.big_phi.value(),
        }
    }

    /// `Φ / (2Δ²)` with two derivatives: the `A` factor for the square
    /// family and `B` for the Randers-changed square family.
    pub fn scurv_factor(&self) -> Jet4 {
        self.big_phi / (2.0 * self.delta * self.delta)
    }
}

pub fn quantity_jets(phi: &PhiSpec, ctx: &CurvContext) -> Result<QuantityJets> {
    let s0 = ctx.s();
    let d = phi.derivatives::<6>(s0);
    let s = Jet4::variable(s0);
    let p = Jet4::from_derivatives(&d[..5]);
    let dp = Jet4::from_derivatives(&d[1..]);
    let denom = p - s * dp;
    if denom.value().abs() < SINGULAR_EPS || !denom.value().is_finite() {
        return Err(Error::Singular { s: s0, what: "phi - s phi'" });
    }
    let q = dp / denom;
    let q_prime = q.derivative();
    let q_second = q_prime.derivative();
    let b2 = ctx.b2();
    let n = ctx.n() as f64;
    let delta = 1.0 + s * q + (b2 - s * s) * q_prime;
    let psi = q_prime / (2.0 * delta);
    let big_phi = (s * q_prime - q) * (n * delta + 1.0 + s * q) - (b2 - s * s) * (1.0 + s * q) * q_second;
    Ok(QuantityJets { q, q_prime, q_second, delta, psi, big_phi })
}

/// `Q`, `Q′`, `Q″`, `Δ`, `ψ`, `Φ` from `φ` by jet differentiation.
pub fn quantities_generic(phi: &PhiSpec, ctx: &CurvContext) -> Result<PhiQuantities> {
    quantity_jets(phi, ctx)?.values().check_finite(ctx.s())
}

/// `d^order/ds^order` of one auxiliary function, `order <= 2`.
pub fn quantity_derivative(phi: &PhiSpec, ctx: &CurvContext, field: QuantityField, order: usize) -> Result<f64> {
    if order > 2 {
        return Err(Error::Unsupported(format!("derivative order {order} (at most 2)")));
    }
    let jet = quantity_jets(phi, ctx)?.field(field);
    let value = jet.deriv(order).expect("every field carries two derivatives");
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Singular { s: ctx.s(), what: "a denominator" })
    }
}

/// Closed forms for `φ(s) = 1 + 2s + s²`.
pub fn quantities_square(ctx: &CurvContext) -> PhiQuantities {
    let (s, b2, n) = (ctx.s(), ctx.b2(), ctx.n() as f64);
    let t = 1.0 - s;
    let q = 2.0 / t;
    let q_prime = 2.0 / (t * t);
    let q_second = 4.0 / (t * t * t);
    let delta = (1.0 - 3.0 * s * s + 2.0 * b2) / (t * t);
    let poly = -6.0 * n * s.powi(3) + 3.0 * (n + 1.0) * s * s + 2.0 * (1.0 + n + (2.0 * n - 1.0) * b2) * s
        - (1.0 + n) * (1.0 + 2.0 * b2);
    let big_phi = 2.0 * poly / t.powi(4);
    PhiQuantities { q, q_prime, q_second, delta, psi: q_prime / (2.0 * delta), big_phi }
}

/// Double-double value `hi + lo` for the expanded closed-form numerators,
/// which cancel heavily near their roots.
#[derive(Clone, Copy, Debug)]
struct DoubleDouble(f64, f64);

impl DoubleDouble {
    fn new(x: f64) -> Self {
        DoubleDouble(x, 0.0)
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        DoubleDouble(s, lo - (s - hi))
    }

    fn add(self, o: Self) -> Self {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (o.0 - bb);
        Self::renorm(s, err + self.1 + o.1)
    }

    fn mul(self, o: Self) -> Self {
        let p = self.0 * o.0;
        let err = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        Self::renorm(p, err)
    }

    fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// `Σ_k (c0 + c1·n + c2·b² + c3·n·b²) s^k` with `coeffs[k] = [c0, c1, c2, c3]`.
fn eval_expanded(coeffs: &[[f64; 4]], s: f64, b2: f64, n: f64) -> f64 {
    let (dn, db2) = (DoubleDouble::new(n), DoubleDouble::new(b2));
    let nb2 = dn.mul(db2);
    coeffs
        .iter()
        .rev()
        .fold(DoubleDouble::new(0.0), |acc, c| {
            let coeff = DoubleDouble::new(c[0])
                .add(DoubleDouble::new(c[1]).mul(dn))
                .add(DoubleDouble::new(c[2]).mul(db2))
                .add(DoubleDouble::new(c[3]).mul(nb2));
            acc.mul(DoubleDouble::new(s)).add(coeff)
        })
        .value()
}

const RSQ_DELTA_COEFFS: [[f64; 4]; 5] =
    [[1.0, 0.0, 2.0, 0.0], [3.0, 0.0, 6.0, 0.0], [-2.0, 0.0, 2.0, 0.0], [-9.0, 0.0, 0.0, 0.0], [-3.0, 0.0, 0.0, 0.0]];

const RSQ_PHI_COEFFS: [[f64; 4]; 8] = [
    [-3.0, -3.0, -6.0, -6.0],
    [-9.0, -9.0, -30.0, -18.0],
    [15.0, 15.0, -60.0, 12.0],
    [70.0, 58.0, -70.0, 62.0],
    [75.0, 3.0, -30.0, 42.0],
    [43.0, -89.0, -4.0, 8.0],
    [9.0, -63.0, 0.0, 0.0],
    [0.0, -12.0, 0.0, 0.0],
];

/// Closed forms for `φ(s) = 1 + 3s + s²`.
pub fn quantities_randers_square(ctx: &CurvContext) -> PhiQuantities {
    let (s, b2, n) = (ctx.s(), ctx.b2(), ctx.n() as f64);
    let t = 1.0 - s * s;
    let q = (2.0 * s + 3.0) / t;
    let q_prime = (2.0 * s * s + 6.0 * s + 2.0) / (t * t);
    let q_second = (4.0 * s.powi(3) + 18.0 * s * s + 12.0 * s + 6.0) / t.powi(3);
    let delta = eval_expanded(&RSQ_DELTA_COEFFS, s, b2, n) / (t * t);
    let big_phi = eval_expanded(&RSQ_PHI_COEFFS, s, b2, n) / t.powi(4);
    PhiQuantities { q, q_prime, q_second, delta, psi: q_prime / (2.0 * delta), big_phi }
}

/// Closed forms for every named family.
pub fn quantities_closed(phi: &PhiSpec, ctx: &CurvContext) -> Result<PhiQuantities> {
    let n = ctx.n() as f64;
    let out = match phi.family() {
        PhiFamily::Riemannian => {
            PhiQuantities { q: 0.0, q_prime: 0.0, q_second: 0.0, delta: 1.0, psi: 0.0, big_phi: 0.0 }
        }
        PhiFamily::Randers => {
            let delta = 1.0 + ctx.s();
            PhiQuantities { q: 1.0, q_prime: 0.0, q_second: 0.0, delta, psi: 0.0, big_phi: -(n + 1.0) * delta }
        }
        PhiFamily::Square => quantities_square(ctx),
        PhiFamily::RandersSquare => quantities_randers_square(ctx),
        PhiFamily::Custom => return Err(Error::NoClosedForm("custom phi".into())),
    };
    out.check_finite(ctx.s())
}

/// Largest field-wise relative difference between the closed forms and the
/// jet pipeline over `contexts`.
pub fn closed_form_discrepancy(phi: &PhiSpec, contexts: &[CurvContext], exec: Execution) -> Result<f64> {
    let diffs = par::map_indexed(exec, contexts.len(), |i| -> Result<f64> {
        let ctx = &contexts[i];
        Ok(quantities_closed(phi, ctx)?.max_relative_diff(&quantities_generic(phi, ctx)?))
    });
    diffs.into_iter().try_fold(0.0, |acc, d| Ok(f64::max(acc, d?)))
}

fn t_value(phi: &PhiSpec, n: usize, b: f64, s: f64) -> f64 {
    let [p, dp, d2p] = phi.derivatives::<3>(s);
    let m = p - s * dp;
    p * m.powi(n as i32 - 2) * (m + (b * b - s * s) * d2p)
}

/// `T(s) = φ (φ − sφ′)^{n−2} {(φ − sφ′) + (b² − s²)φ″}`.
pub fn t_function(phi: &PhiSpec, ctx: &CurvContext) -> Result<f64> {
    let t = t_value(phi, ctx.n(), ctx.b(), ctx.s());
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::Singular { s: ctx.s(), what: "a denominator" })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VolumeForm {
    /// Busemann–Hausdorff.
    #[serde(rename = "BH")]
    BusemannHausdorff,
    /// Holmes–Thompson.
    #[serde(rename = "HT")]
    HolmesThompson,
}

impl VolumeForm {
    pub fn tag(self) -> &'static str {
        match self {
            VolumeForm::BusemannHausdorff => "BH",
            VolumeForm::HolmesThompson => "HT",
        }
    }
}

/// Default starting node count for [`volume_factor`].
pub const DEFAULT_VOLUME_NODES: usize = 64;
/// Refinement stops once two successive rules agree this well.
pub const VOLUME_TARGET: f64 = 1e-10;
/// A final refinement gap above this marks the result non-convergent.
pub const VOLUME_FLAG: f64 = 1e-8;
const VOLUME_MAX_NODES: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeFactor {
    pub form: VolumeForm,
    pub value: f64,
    /// Node count of the rule that produced `value`.
    pub nodes: usize,
    /// `|f_N − f_{N/2}|` for the last doubling.
    pub refinement_gap: f64,
    /// `refinement_gap <= 1e-8`.
    pub converged: bool,
}

fn volume_quotient(phi: &PhiSpec, b: f64, n: usize, form: VolumeForm, nodes: usize) -> f64 {
    let gl = GaussLegendre::new(nodes);
    let mut weight_sum = 0.0;
    let mut weighted = 0.0;
    for (t, w) in gl.on_interval(0.0, std::f64::consts::PI) {
        let sw = w * t.sin().powi(n as i32 - 2);
        let s = b * t.cos();
        weight_sum += sw;
        weighted += sw
            * match form {
                VolumeForm::BusemannHausdorff => phi.eval(s).powi(-(n as i32)),
                VolumeForm::HolmesThompson => t_value(phi, n, b, s),
            };
    }
    match form {
        VolumeForm::BusemannHausdorff => weight_sum / weighted,
        VolumeForm::HolmesThompson => weighted / weight_sum,
    }
}

/// The factor `f(b)` in `dV = f(b) dV_α`.
///
/// Gauss–Legendre on `[0, π]`, starting from `quad_n` nodes and doubling until
/// successive rules agree to `1e-10` or 8192 nodes are reached. The
/// Busemann–Hausdorff integrand `φ(b cos t)^{−n}` needs `φ > 0` on `[−b, b]`.
pub fn volume_factor(phi: &PhiSpec, b: f64, n: usize, form: VolumeForm, quad_n: usize) -> Result<VolumeFactor> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::NormBound(b));
    }
    if n < 2 {
        return Err(Error::InvalidContext(format!("n must be at least 2, got {n}")));
    }
    if quad_n < 2 {
        return Err(Error::InvalidContext("quad_n must be at least 2".into()));
    }
    if form == VolumeForm::BusemannHausdorff {
        let lowest = phi_min_on(phi, b);
        if lowest.0 <= 0.0 {
            return Err(Error::InvalidMetric {
                b,
                reason: format!("phi({}) = {} <= 0 makes the BH integrand singular", lowest.1, lowest.0),
            });
        }
    }
    let mut nodes = quad_n;
    let mut prev = volume_quotient(phi, b, n, form, nodes);
    loop {
        let next = volume_quotient(phi, b, n, form, 2 * nodes);
        nodes *= 2;
        let gap = (next - prev).abs();
        if gap <= VOLUME_TARGET || 2 * nodes > VOLUME_MAX_NODES {
            if !next.is_finite() {
                return Err(Error::Singular { s: b, what: "the volume integrand denominator" });
            }
            return Ok(VolumeFactor { form, value: next, nodes, refinement_gap: gap, converged: gap <= VOLUME_FLAG });
        }
        prev = next;
    }
}

fn phi_min_on(phi: &PhiSpec, b: f64) -> (f64, f64) {
    let grid = 2001;
    (0..grid)
        .map(|i| {
            let s = -b + 2.0 * b * i as f64 / (grid - 1) as f64;
            (phi.eval(s), s)
        })
        .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc })
}
