//! `(α,β)`-metrics `F = α φ(β/α)` on the tangent space at the origin.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::liealg::{KVector, LieModel};
use crate::par::{self, Execution};
use crate::quadrature::GaussLegendre;

/// Default number of grid points for [`shen_validity`].
pub const DEFAULT_VALIDITY_GRID: usize = 1001;

/// Margins below this are flagged as near-degenerate.
pub const NEAR_DEGENERATE_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhiFamily {
    Riemannian,
    Randers,
    Square,
    RandersSquare,
    Custom,
}

impl PhiFamily {
    pub fn name(self) -> &'static str {
        match self {
            PhiFamily::Riemannian => "riemannian",
            PhiFamily::Randers => "randers",
            PhiFamily::Square => "square",
            PhiFamily::RandersSquare => "randers_square",
            PhiFamily::Custom => "custom",
        }
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `φ(s)` as a polynomial with rational coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSpec {
    family: PhiFamily,
    coeffs: Vec<BigRational>,
    coeffs_f64: Vec<f64>,
}

fn ints(c: &[i64]) -> Vec<BigRational> {
    c.iter().map(|&x| BigRational::from_integer(x.into())).collect()
}

impl PhiSpec {
    fn build(family: PhiFamily, mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let coeffs_f64 = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        PhiSpec { family, coeffs, coeffs_f64 }
    }

    /// `φ ≡ 1`.
    pub fn riemannian() -> Self {
        Self::build(PhiFamily::Riemannian, ints(&[1]))
    }

    /// `φ(s) = 1 + s`.
    pub fn randers() -> Self {
        Self::build(PhiFamily::Randers, ints(&[1, 1]))
    }

    /// `φ(s) = 1 + 2s + s²`, i.e. `F = (α+β)²/α`.
    pub fn square() -> Self {
        Self::build(PhiFamily::Square, ints(&[1, 2, 1]))
    }

    /// `φ(s) = 1 + 3s + s²`, i.e. `F = (α+β)²/α + β`.
    pub fn randers_square() -> Self {
        Self::build(PhiFamily::RandersSquare, ints(&[1, 3, 1]))
    }

    pub fn custom(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPhi("no coefficients".into()));
        }
        if coeffs[0] <= BigRational::zero() {
            return Err(Error::InvalidPhi("phi(0) must be positive".into()));
        }
        Ok(Self::build(PhiFamily::Custom, coeffs))
    }

    pub fn named(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "riemannian" => Ok(Self::riemannian()),
            "randers" => Ok(Self::randers()),
            "square" => Ok(Self::square()),
            "randers_square" => Ok(Self::randers_square()),
            other => Err(Error::InvalidPhi(format!("unknown family {other:?}"))),
        }
    }

    pub fn family(&self) -> PhiFamily {
        self.family
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> &[f64] {
        &self.coeffs_f64
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs_f64.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `[φ(s), φ'(s), ..., φ⁽ᴷ⁻¹⁾(s)]`, exact polynomial derivatives.
    pub fn derivatives<const K: usize>(&self, s: f64) -> [f64; K] {
        let mut out = [0.0; K];
        let mut c = self.coeffs_f64.clone();
        for slot in out.iter_mut() {
            *slot = c.iter().rev().fold(0.0, |acc, x| acc * s + x);
            if c.len() <= 1 {
                break;
            }
            c = c.iter().enumerate().skip(1).map(|(k, x)| k as f64 * x).collect();
        }
        out
    }

    /// Jet of `φ` in `s` at `s`.
    pub fn jet(&self, s: f64) -> Jet4 {
        Jet4::from_derivatives(&self.derivatives::<5>(s))
    }

    /// `φ ∘ t` for a jet `t`.
    pub fn compose(&self, t: Jet4) -> Jet4 {
        t.compose(self.derivatives::<5>(t.value()))
    }

    /// `φ − sφ′ + (b² − s²)φ″`.
    pub fn shen_condition(&self, b: f64, s: f64) -> f64 {
        let [p, dp, d2p] = self.derivatives::<3>(s);
        p - s * dp + (b * b - s * s) * d2p
    }

    /// Closed-form minimum of the Shen condition over `|s| <= b`, for the
    /// families where it is known.
    pub fn closed_form_condition_min(&self, b: f64) -> Option<f64> {
        match self.family {
            PhiFamily::Riemannian | PhiFamily::Randers => Some(1.0),
            // 1 - 3s² + 2b², smallest at s = ±b
            PhiFamily::Square | PhiFamily::RandersSquare => Some(1.0 - b * b),
            PhiFamily::Custom => None,
        }
    }

    /// Closed-form minimum of `φ` over `|s| <= b`.
    pub fn closed_form_phi_min(&self, b: f64) -> Option<f64> {
        match self.family {
            PhiFamily::Riemannian => Some(1.0),
            PhiFamily::Randers => Some(1.0 - b),
            PhiFamily::Square => Some((1.0 - b) * (1.0 - b)),
            // 1 + 3s + s² is increasing on [-1, 1]
            PhiFamily::RandersSquare => Some(1.0 - 3.0 * b + b * b),
            PhiFamily::Custom => None,
        }
    }
}

impl Serialize for PhiSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("family", self.family.name())?;
        if self.family == PhiFamily::Custom {
            let c: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
            map.serialize_entry("coeffs", &c)?;
        }
        map.end()
    }
}

pub fn alpha(m: &LieModel, y: &KVector) -> f64 {
    m.inner_product(y, y).max(0.0).sqrt()
}

pub fn beta(m: &LieModel, y: &KVector) -> f64 {
    m.inner_product(m.v(), y)
}

/// `F(y) = α(y) φ(β(y)/α(y))`.
pub fn finsler_norm(m: &LieModel, phi: &PhiSpec, y: &KVector) -> Result<f64> {
    if y.len() != m.k_dim() {
        return Err(Error::DimensionMismatch { expected: m.k_dim(), got: y.len() });
    }
    let a = alpha(m, y);
    if a == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(a * phi.eval(beta(m, y) / a))
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidityReport {
    pub phi: PhiSpec,
    pub b: f64,
    pub grid_n: usize,
    pub min_phi: f64,
    pub min_phi_at: f64,
    pub min_condition: f64,
    pub min_condition_at: f64,
    /// `min(min_phi, min_condition)`.
    pub margin: f64,
    pub valid: bool,
    pub near_degenerate: bool,
    pub closed_form_condition_min: Option<f64>,
    pub closed_form_phi_min: Option<f64>,
}

/// Shen's criterion: `φ(s) > 0` and `φ − sφ′ + (b² − s²)φ″ > 0` on `|s| <= b`,
/// sampled on a uniform grid of `grid_n` points including both endpoints.
pub fn shen_validity(phi: &PhiSpec, b: f64, grid_n: usize) -> Result<ValidityReport> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::NormBound(b));
    }
    if grid_n < 3 {
        return Err(Error::InvalidContext(format!("validity grid needs at least 3 points, got {grid_n}")));
    }
    let mut min_phi = (f64::INFINITY, 0.0);
    let mut min_cond = (f64::INFINITY, 0.0);
    for i in 0..grid_n {
        let s = if i == grid_n - 1 { b } else { -b + 2.0 * b * i as f64 / (grid_n - 1) as f64 };
        let p = phi.eval(s);
        let c = phi.shen_condition(b, s);
        if p < min_phi.0 {
            min_phi = (p, s);
        }
        if c < min_cond.0 {
            min_cond = (c, s);
        }
    }
    let margin = min_phi.0.min(min_cond.0);
    Ok(ValidityReport {
        phi: phi.clone(),
        b,
        grid_n,
        min_phi: min_phi.0,
        min_phi_at: min_phi.1,
        min_condition: min_cond.0,
        min_condition_at: min_cond.1,
        margin,
        valid: margin > 0.0,
        near_degenerate: margin < NEAR_DEGENERATE_MARGIN,
        closed_form_condition_min: phi.closed_form_condition_min(b),
        closed_form_phi_min: phi.closed_form_phi_min(b),
    })
}

/// Runs [`shen_validity`] on the default grid and turns an invalid verdict
/// into an error.
pub fn ensure_valid(phi: &PhiSpec, b: f64) -> Result<ValidityReport> {
    let report = shen_validity(phi, b, DEFAULT_VALIDITY_GRID)?;
    if report.valid {
        Ok(report)
    } else {
        let reason = if report.min_phi <= 0.0 {
            format!("phi({}) = {} <= 0", report.min_phi_at, report.min_phi)
        } else {
            format!("Shen condition is {} at s = {}", report.min_condition, report.min_condition_at)
        };
        Err(Error::InvalidMetric { b, reason })
    }
}

/// `F(y + t u)` as a jet in `t` at `t = 0`.
fn norm_jet_along(m: &LieModel, phi: &PhiSpec, y: &KVector, u: &KVector) -> Jet4 {
    let yy = m.inner_product(y, y);
    let yu = m.inner_product(y, u);
    let uu = m.inner_product(u, u);
    let alpha_sq = Jet4::from_derivatives(&[yy, 2.0 * yu, 2.0 * uu, 0.0, 0.0]);
    let beta = Jet4::from_derivatives(&[beta(m, y), beta(m, u), 0.0, 0.0, 0.0]);
    let alpha = alpha_sq.sqrt();
    alpha * phi.compose(beta / alpha)
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j`, from second directional derivatives of `F²` and
/// polarization.
pub fn fundamental_tensor(m: &LieModel, phi: &PhiSpec, y: &KVector) -> Result<DMatrix<f64>> {
    let nk = m.k_dim();
    if y.len() != nk {
        return Err(Error::DimensionMismatch { expected: nk, got: y.len() });
    }
    if alpha(m, y) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let second = |u: &KVector| {
        let f = norm_jet_along(m, phi, y, u);
        (f * f).deriv(2).expect("order-4 jet")
    };
    let diag: Vec<f64> = (0..nk).map(|i| second(&KVector::basis(nk, i))).collect();
    let mut g = DMatrix::zeros(nk, nk);
    for i in 0..nk {
        g[(i, i)] = 0.5 * diag[i];
        for j in i + 1..nk {
            let mut u = vec![0.0; nk];
            u[i] = 1.0;
            u[j] = 1.0;
            let mixed = 0.25 * (second(&KVector::new(u)) - diag[i] - diag[j]);
            g[(i, j)] = mixed;
            g[(j, i)] = mixed;
        }
    }
    Ok(g)
}

/// Volume of the unit ball `B^n`.
pub fn euclidean_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => PI.powf(n as f64 / 2.0) / gamma_half_integer(n + 2),
    }
}

/// `Γ(m/2)` for positive integer `m`.
fn gamma_half_integer(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        (1..m / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < m as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Coordinate volume of `{y : F(y) < 1}` via `(1/n) ∫_{S^{n-1}} F(θ)^{-n} dθ`.
///
/// Dimension 2 uses a uniform angular grid of `quad_n` points. Dimensions 3
/// and 4 use Gauss–Legendre rules with `quad_n` nodes on each polar angle and
/// a uniform grid of `2 quad_n` points in the azimuth.
pub fn unit_ball_volume(m: &LieModel, phi: &PhiSpec, quad_n: usize, exec: Execution) -> Result<f64> {
    let n = m.k_dim();
    if n > 4 {
        return Err(Error::Unsupported(format!("unit-ball quadrature supports dim k <= 4, got {n}")));
    }
    if quad_n < 2 {
        return Err(Error::InvalidContext("quad_n must be at least 2".into()));
    }
    let inv_pow = |x: Vec<f64>| -> f64 {
        let f = finsler_norm(m, phi, &KVector::new(x)).unwrap_or(f64::NAN);
        f.powi(-(n as i32))
    };
    let total = match n {
        1 => inv_pow(vec![1.0]) + inv_pow(vec![-1.0]),
        2 => {
            let h = 2.0 * PI / quad_n as f64;
            par::sum_indexed(exec, quad_n, |i| {
                let t = h * i as f64;
                h * inv_pow(vec![t.cos(), t.sin()])
            })
        }
        3 => {
            let gl = GaussLegendre::new(quad_n);
            let naz = 2 * quad_n;
            let h = 2.0 * PI / naz as f64;
            par::sum_indexed(exec, quad_n, |i| {
                let (u, w) = (gl.nodes[i], gl.weights[i]);
                let r = (1.0 - u * u).max(0.0).sqrt();
                (0..naz)
                    .map(|j| {
                        let p = h * j as f64;
                        w * h * inv_pow(vec![r * p.cos(), r * p.sin(), u])
                    })
                    .sum()
            })
        }
        4 => {
            let gl = GaussLegendre::new(quad_n);
            let naz = 2 * quad_n;
            let h = 2.0 * PI / naz as f64;
            let psi_rule: Vec<(f64, f64)> = gl.on_interval(0.0, PI).collect();
            par::sum_indexed(exec, quad_n, |i| {
                let (psi, wpsi) = psi_rule[i];
                let (sp, cp) = psi.sin_cos();
                let mut acc = 0.0;
                for (&u, &wu) in gl.nodes.iter().zip(&gl.weights) {
                    let r = (1.0 - u * u).max(0.0).sqrt();
                    for j in 0..naz {
                        let p = h * j as f64;
                        let x = vec![cp, sp * u, sp * r * p.cos(), sp * r * p.sin()];
                        acc += wpsi * sp * sp * wu * h * inv_pow(x);
                    }
                }
                acc
            })
        }
        _ => unreachable!(),
    };
    if !total.is_finite() {
        return Err(Error::InvalidMetric { b: m.b(), reason: "F vanishes on the unit sphere".into() });
    }
    Ok(total / n as f64)
}

/// Distortion `τ(y) = ln(√det g(y) / σ_F)` with `σ_F = Vol(B^n) / Vol{F < 1}`.
pub fn distortion(m: &LieModel, phi: &PhiSpec, y: &KVector, quad_n: usize) -> Result<f64> {
    distortion_with(m, phi, y, quad_n, Execution::default())
}

pub fn distortion_with(m: &LieModel, phi: &PhiSpec, y: &KVector, quad_n: usize, exec: Execution) -> Result<f64> {
    let n = m.k_dim();
    if n > 4 {
        return Err(Error::Unsupported(format!("distortion supports dim k <= 4, got {n}")));
    }
    ensure_valid(phi, m.b())?;
    let g = fundamental_tensor(m, phi, y)?;
    let det = g.determinant();
    let vol = unit_ball_volume(m, phi, quad_n, exec)?;
    Ok(0.5 * det.ln() - euclidean_ball_volume(n).ln() + vol.ln())
}
