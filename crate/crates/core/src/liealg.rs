//! Lie-algebra model of a reductive homogeneous space `G/H`.
//!
//! The Lie algebra `g` is given by structure constants `c^l_{ij}` in a basis
//! `e_0, ..., e_{dim-1}`, split into index sets spanning `h` and `k`. The
//! inner product on `k` is the value of `α` at the origin and the vector `v ∈ k`
//! is the invariant vector field dual to `β`.
//!
//! Models read from files carry exact rational structure constants, so the
//! algebraic checks in [`LieModel::validate`] are exact. Models produced by
//! [`orthonormalize`] carry floating-point constants and are checked with a
//! small tolerance instead.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for float-mode algebraic checks, relative to the largest
/// structure constant.
const FLOAT_CHECK_TOL: f64 = 1e-10;

/// Tolerance for `[h, v] = 0` and for symmetry of the inner product.
const VECTOR_CHECK_TOL: f64 = 1e-12;

/// One structure constant `c^l_{ij}`: `[e_i, e_j] = Σ_l c^l_{ij} e_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub coeff: BigRational,
}

impl BracketEntry {
    pub fn new(i: usize, j: usize, l: usize, coeff: BigRational) -> Self {
        BracketEntry { i, j, l, coeff }
    }

    pub fn int(i: usize, j: usize, l: usize, coeff: i64) -> Self {
        BracketEntry::new(i, j, l, BigRational::from_integer(coeff.into()))
    }
}

/// Coordinates of a tangent vector at the origin, in the basis of `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct KVector(Vec<f64>);

impl KVector {
    pub fn new(coords: Vec<f64>) -> Self {
        KVector(coords)
    }

    pub fn zeros(len: usize) -> Self {
        KVector(vec![0.0; len])
    }

    /// The `a`-th basis vector of `k`.
    pub fn basis(len: usize, a: usize) -> Self {
        let mut c = vec![0.0; len];
        c[a] = 1.0;
        KVector(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        KVector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

impl From<Vec<f64>> for KVector {
    fn from(v: Vec<f64>) -> Self {
        KVector(v)
    }
}

impl From<DVector<f64>> for KVector {
    fn from(v: DVector<f64>) -> Self {
        KVector(v.iter().copied().collect())
    }
}

#[derive(Clone, Debug)]
pub struct LieModel {
    dim: usize,
    h: Vec<usize>,
    k: Vec<usize>,
    exact: Option<BTreeMap<(usize, usize, usize), BigRational>>,
    dense: Vec<f64>,
    inner: DMatrix<f64>,
    v: KVector,
}

impl LieModel {
    /// Builds a model from exact structure constants.
    ///
    /// An entry with `i < j` also sets `c^l_{ji} = -c` unless `(j, i, l)` is
    /// listed explicitly. Entries with `i >= j` are stored as given, so
    /// inconsistent data survives construction and is reported by
    /// [`LieModel::validate`].
    pub fn new(
        dim: usize,
        h: Vec<usize>,
        k: Vec<usize>,
        entries: &[BracketEntry],
        inner: DMatrix<f64>,
        v: Vec<f64>,
    ) -> Result<Self> {
        check_split(dim, &h, &k)?;
        let mut table: BTreeMap<(usize, usize, usize), BigRational> = BTreeMap::new();
        let explicit: std::collections::BTreeSet<_> =
            entries.iter().map(|e| (e.i, e.j, e.l)).collect();
        for e in entries {
            for idx in [e.i, e.j, e.l] {
                if idx >= dim {
                    return Err(Error::InvalidModel(format!(
                        "bracket index {idx} out of range for dim {dim}"
                    )));
                }
            }
            table.insert((e.i, e.j, e.l), e.coeff.clone());
            if e.i < e.j && !explicit.contains(&(e.j, e.i, e.l)) {
                table.insert((e.j, e.i, e.l), -e.coeff.clone());
            }
        }
        table.retain(|_, c| !c.is_zero());
        let mut dense = vec![0.0; dim * dim * dim];
        for (&(i, j, l), c) in &table {
            dense[(i * dim + j) * dim + l] = c.to_f64().unwrap_or(f64::NAN);
        }
        let model = LieModel { dim, h, k, exact: Some(table), dense, inner, v: KVector(v) };
        model.check_shapes()?;
        Ok(model)
    }

    /// Builds a model from a dense table `c[(i*dim + j)*dim + l] = c^l_{ij}`.
    pub fn from_dense(
        dim: usize,
        h: Vec<usize>,
        k: Vec<usize>,
        dense: Vec<f64>,
        inner: DMatrix<f64>,
        v: Vec<f64>,
    ) -> Result<Self> {
        check_split(dim, &h, &k)?;
        if dense.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, got: dense.len() });
        }
        let model = LieModel { dim, h, k, exact: None, dense, inner, v: KVector(v) };
        model.check_shapes()?;
        Ok(model)
    }

    fn check_shapes(&self) -> Result<()> {
        let nk = self.k.len();
        if self.inner.nrows() != nk || self.inner.ncols() != nk {
            return Err(Error::InvalidModel(format!(
                "inner product must be {nk}x{nk}, got {}x{}",
                self.inner.nrows(),
                self.inner.ncols()
            )));
        }
        if self.v.len() != nk {
            return Err(Error::DimensionMismatch { expected: nk, got: self.v.len() });
        }
        if self.inner.iter().chain(self.v.coords()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite inner product or v".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_indices(&self) -> &[usize] {
        &self.h
    }

    pub fn k_indices(&self) -> &[usize] {
        &self.k
    }

    pub fn k_dim(&self) -> usize {
        self.k.len()
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn v(&self) -> &KVector {
        &self.v
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact structure constants, if the model has them.
    pub fn exact_constants(&self) -> Option<&BTreeMap<(usize, usize, usize), BigRational>> {
        self.exact.as_ref()
    }

    /// `c^l_{ij}` as a float.
    pub fn constant(&self, i: usize, j: usize, l: usize) -> f64 {
        self.dense[(i * self.dim + j) * self.dim + l]
    }

    /// Same model with `v` replaced.
    pub fn with_v(&self, v: Vec<f64>) -> Result<Self> {
        let mut m = self.clone();
        m.v = KVector(v);
        m.check_shapes()?;
        Ok(m)
    }

    /// `⟨x, y⟩` on `k`.
    pub fn inner_product(&self, x: &KVector, y: &KVector) -> f64 {
        let nk = self.k.len();
        let mut acc = 0.0;
        for a in 0..nk {
            let xa = x.0[a];
            if xa == 0.0 {
                continue;
            }
            for b in 0..nk {
                acc += xa * self.inner[(a, b)] * y.0[b];
            }
        }
        acc
    }

    /// Length of `v`, i.e. the Riemannian length of `β`.
    pub fn b(&self) -> f64 {
        self.inner_product(&self.v, &self.v).max(0.0).sqrt()
    }

    /// Embeds a `k`-vector into `g` coordinates.
    pub fn embed(&self, x: &KVector) -> Result<Vec<f64>> {
        self.check_k(x)?;
        let mut g = vec![0.0; self.dim];
        for (a, &idx) in self.k.iter().enumerate() {
            g[idx] = x.0[a];
        }
        Ok(g)
    }

    /// `k`-component of a `g`-vector (drops the `h` part).
    pub fn project_k(&self, x: &[f64]) -> Result<KVector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(KVector(self.k.iter().map(|&idx| x[idx]).collect()))
    }

    fn check_k(&self, x: &KVector) -> Result<()> {
        if x.len() != self.k.len() {
            return Err(Error::DimensionMismatch { expected: self.k.len(), got: x.len() });
        }
        Ok(())
    }

    /// `[x, y] = Σ c^l_{ij} x^i y^j e_l` for `g`-vectors.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        for len in [x.len(), y.len()] {
            if len != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: len });
            }
        }
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let row = &self.dense[(i * d + j) * d..(i * d + j + 1) * d];
                for (o, c) in out.iter_mut().zip(row) {
                    *o += w * c;
                }
            }
        }
        Ok(out)
    }

    /// Runs every algebraic check and reports pass/fail per invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        match &self.exact {
            Some(table) => self.exact_checks(table, &mut checks),
            None => self.float_checks(&mut checks),
        }
        checks.push(self.spd_check());
        let b = self.b();
        checks.push(if b < 1.0 {
            CheckResult::pass("norm_bound")
        } else {
            CheckResult::fail("norm_bound", None, format!("norm bound violated: b = {b} >= 1"))
        });
        checks.push(self.invariance_check());
        ValidationReport {
            checks,
            b,
            exact: self.exact.is_some(),
            notes: vec![
                "invariance of v is checked infinitesimally as [h, v] = 0; this is equivalent \
                 to Ad(H)-invariance only when H is connected"
                    .to_string(),
            ],
        }
    }

    fn exact_checks(
        &self,
        table: &BTreeMap<(usize, usize, usize), BigRational>,
        checks: &mut Vec<CheckResult>,
    ) {
        let d = self.dim;
        let zero = BigRational::zero();
        let get = |i: usize, j: usize, l: usize| table.get(&(i, j, l)).unwrap_or(&zero);

        let mut anti = None;
        'outer: for i in 0..d {
            for j in i..d {
                for l in 0..d {
                    if !(get(i, j, l) + get(j, i, l)).is_zero() {
                        anti = Some(vec![i, j, l]);
                        break 'outer;
                    }
                }
            }
        }
        checks.push(match anti {
            None => CheckResult::pass("antisymmetry"),
            Some(w) => CheckResult::fail(
                "antisymmetry",
                Some(w.clone()),
                format!("c^{}_({},{}) != -c^{}_({},{})", w[2], w[0], w[1], w[2], w[1], w[0]),
            ),
        });

        // [e_i,[e_j,e_l]] + cyclic, component p
        let mut jacobi = None;
        'jac: for i in 0..d {
            for j in i + 1..d {
                for l in j + 1..d {
                    for p in 0..d {
                        let mut acc = BigRational::zero();
                        for (a, b, c) in [(i, j, l), (j, l, i), (l, i, j)] {
                            for m in 0..d {
                                let inner = get(b, c, m);
                                if inner.is_zero() {
                                    continue;
                                }
                                acc += inner * get(a, m, p);
                            }
                        }
                        if !acc.is_zero() {
                            jacobi = Some(vec![i, j, l, p]);
                            break 'jac;
                        }
                    }
                }
            }
        }
        checks.push(match jacobi {
            None => CheckResult::pass("jacobi"),
            Some(w) => CheckResult::fail(
                "jacobi",
                Some(w.clone()),
                format!("Jacobi identity fails on (e{}, e{}, e{}) in component {}", w[0], w[1], w[2], w[3]),
            ),
        });

        checks.push(self.split_check("h_subalgebra", |i, j, l| !get(i, j, l).is_zero(), true));
        checks.push(self.split_check("reductivity", |i, j, l| !get(i, j, l).is_zero(), false));
    }

    fn float_checks(&self, checks: &mut Vec<CheckResult>) {
        let d = self.dim;
        let scale = self.dense.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = FLOAT_CHECK_TOL * scale;
        let c = |i: usize, j: usize, l: usize| self.constant(i, j, l);

        let mut anti = None;
        'outer: for i in 0..d {
            for j in i..d {
                for l in 0..d {
                    if (c(i, j, l) + c(j, i, l)).abs() > tol {
                        anti = Some(vec![i, j, l]);
                        break 'outer;
                    }
                }
            }
        }
        checks.push(match anti {
            None => CheckResult::pass("antisymmetry"),
            Some(w) => CheckResult::fail("antisymmetry", Some(w), "structure constants not antisymmetric".into()),
        });

        let mut jacobi = None;
        'jac: for i in 0..d {
            for j in i + 1..d {
                for l in j + 1..d {
                    for p in 0..d {
                        let mut acc = 0.0;
                        for (a, b, cc) in [(i, j, l), (j, l, i), (l, i, j)] {
                            for m in 0..d {
                                acc += c(b, cc, m) * c(a, m, p);
                            }
                        }
                        if acc.abs() > tol * scale {
                            jacobi = Some(vec![i, j, l, p]);
                            break 'jac;
                        }
                    }
                }
            }
        }
        checks.push(match jacobi {
            None => CheckResult::pass("jacobi"),
            Some(w) => CheckResult::fail("jacobi", Some(w), "Jacobi identity fails".into()),
        });

        checks.push(self.split_check("h_subalgebra", |i, j, l| c(i, j, l).abs() > tol, true));
        checks.push(self.split_check("reductivity", |i, j, l| c(i, j, l).abs() > tol, false));
    }

    /// `h_subalgebra`: no `[h,h]` component in `k`. `reductivity`: no `[h,k]`
    /// component in `h`.
    fn split_check(
        &self,
        name: &'static str,
        nonzero: impl Fn(usize, usize, usize) -> bool,
        subalgebra: bool,
    ) -> CheckResult {
        let (second, target) = if subalgebra { (&self.h, &self.k) } else { (&self.k, &self.h) };
        for &i in &self.h {
            for &j in second {
                for &l in target {
                    if nonzero(i, j, l) {
                        let msg = if subalgebra {
                            format!("[e{i}, e{j}] has a component along e{l} in k")
                        } else {
                            format!("[e{i}, e{j}] has a component along e{l} in h, so [h, k] is not in k")
                        };
                        return CheckResult::fail(name, Some(vec![i, j, l]), msg);
                    }
                }
            }
        }
        CheckResult::pass(name)
    }

    fn spd_check(&self) -> CheckResult {
        let g = &self.inner;
        let scale = g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for a in 0..g.nrows() {
            for b in a + 1..g.ncols() {
                if (g[(a, b)] - g[(b, a)]).abs() > VECTOR_CHECK_TOL * scale {
                    return CheckResult::fail("inner_spd", Some(vec![a, b]), "inner product not symmetric".into());
                }
            }
        }
        if g.nrows() > 0 && g.clone().cholesky().is_none() {
            return CheckResult::fail("inner_spd", None, "inner product not positive-definite".into());
        }
        CheckResult::pass("inner_spd")
    }

    fn invariance_check(&self) -> CheckResult {
        let Ok(vg) = self.embed(&self.v) else {
            return CheckResult::fail("h_invariance", None, "v has wrong length".into());
        };
        let vnorm = self.v.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let cmax = self.dense.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let tol = VECTOR_CHECK_TOL * (1.0 + vnorm * cmax);
        for &w in &self.h {
            let mut e = vec![0.0; self.dim];
            e[w] = 1.0;
            let br = self.bracket(&e, &vg).expect("dimensions checked");
            if let Some(l) = br.iter().position(|x| x.abs() > tol) {
                return CheckResult::fail(
                    "h_invariance",
                    Some(vec![w, l]),
                    format!("[e{w}, v] has component {} along e{l}", br[l]),
                );
            }
        }
        CheckResult::pass("h_invariance")
    }

    /// Validates and wraps the model.
    pub fn into_validated(self) -> Result<ValidatedModel> {
        let report = self.validate();
        if report.passed() {
            Ok(ValidatedModel(self))
        } else {
            Err(Error::ModelValidation(Box::new(report)))
        }
    }

    /// True when the inner product on `k` is the identity within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let nk = self.k.len();
        (0..nk).all(|a| {
            (0..nk).all(|b| (self.inner[(a, b)] - if a == b { 1.0 } else { 0.0 }).abs() <= tol)
        })
    }
}

fn check_split(dim: usize, h: &[usize], k: &[usize]) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidModel("dim must be at least 1".into()));
    }
    let mut seen = vec![false; dim];
    for &idx in h.iter().chain(k) {
        if idx >= dim {
            return Err(Error::InvalidModel(format!("basis index {idx} out of range for dim {dim}")));
        }
        if seen[idx] {
            return Err(Error::InvalidModel(format!("basis index {idx} listed twice in h/k")));
        }
        seen[idx] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidModel(format!("basis index {missing} is in neither h nor k")));
    }
    if k.is_empty() {
        return Err(Error::InvalidModel("k must be non-empty".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// First violating index tuple, 0-based.
    pub witness: Option<Vec<usize>>,
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass(name: &'static str) -> Self {
        CheckResult { name, passed: true, witness: None, detail: None }
    }

    fn fail(name: &'static str, witness: Option<Vec<usize>>, detail: String) -> Self {
        CheckResult { name, passed: false, witness, detail: Some(detail) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub b: f64,
    pub exact: bool,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail.as_deref().unwrap_or("failed")))
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<14} {}", c.name, if c.passed { "ok" } else { "FAILED" })?;
            if let Some(d) = &c.detail {
                writeln!(f, "    {d}")?;
            }
        }
        write!(f, "b = {}", self.b)
    }
}

/// A model that passed [`LieModel::validate`]. Curvature code only accepts
/// validated models.
#[derive(Clone, Debug)]
pub struct ValidatedModel(LieModel);

impl std::ops::Deref for ValidatedModel {
    type Target = LieModel;
    fn deref(&self) -> &LieModel {
        &self.0
    }
}

impl ValidatedModel {
    pub fn model(&self) -> &LieModel {
        &self.0
    }

    pub fn into_inner(self) -> LieModel {
        self.0
    }

    /// `[x, y]_k`: the bracket followed by dropping the `h` component.
    pub fn bracket_k(&self, x: &KVector, y: &KVector) -> Result<KVector> {
        let br = self.0.bracket(&self.0.embed(x)?, &self.0.embed(y)?)?;
        self.0.project_k(&br)
    }

    /// Matrix of `y ↦ [x, y]_k` on `k`.
    pub fn ad_k(&self, x: &KVector) -> Result<DMatrix<f64>> {
        let nk = self.0.k_dim();
        let mut m = DMatrix::zeros(nk, nk);
        for b in 0..nk {
            let col = self.bracket_k(x, &KVector::basis(nk, b))?;
            for a in 0..nk {
                m[(a, b)] = col.0[a];
            }
        }
        Ok(m)
    }

    /// Orthonormalizes `k`; validity is basis-independent so the result stays
    /// validated.
    pub fn orthonormalize(&self) -> Result<(ValidatedModel, DMatrix<f64>)> {
        let (m, p) = orthonormalize(&self.0)?;
        Ok((ValidatedModel(m), p))
    }

    pub fn with_v(&self, v: Vec<f64>) -> Result<ValidatedModel> {
        self.0.with_v(v)?.into_validated()
    }
}

/// Changes the basis of `k` so the inner product becomes the identity.
///
/// Returns the new model and the matrix `P` whose columns are the new basis
/// vectors in old `k` coordinates, so `y_old = P y_new`. The `h` basis is
/// unchanged. A model whose inner product is already the identity is returned
/// as is, with its exact constants.
pub fn orthonormalize(m: &LieModel) -> Result<(LieModel, DMatrix<f64>)> {
    let nk = m.k_dim();
    if m.is_orthonormal(0.0) {
        return Ok((m.clone(), DMatrix::identity(nk, nk)));
    }
    let sym = (m.inner.clone() + m.inner.transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(Error::NotPositiveDefinite)?;
    // G = L L^T, P = L^{-T} gives P^T G P = I.
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let p = l_inv.transpose();
    let p_inv = l.transpose();

    let d = m.dim;
    // Full change of basis on g: columns are new basis vectors in old coordinates.
    let mut t = DMatrix::<f64>::identity(d, d);
    let mut t_inv = DMatrix::<f64>::identity(d, d);
    for (a, &ia) in m.k.iter().enumerate() {
        for (b, &ib) in m.k.iter().enumerate() {
            t[(ia, ib)] = p[(a, b)];
            t_inv[(ia, ib)] = p_inv[(a, b)];
        }
    }
    let mut dense = vec![0.0; d * d * d];
    for i in 0..d {
        let ui: Vec<f64> = t.column(i).iter().copied().collect();
        for j in 0..d {
            let uj: Vec<f64> = t.column(j).iter().copied().collect();
            let br = m.bracket(&ui, &uj)?;
            let new = &t_inv * DVector::from_vec(br);
            dense[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(new.as_slice());
        }
    }
    let inner = p.transpose() * &m.inner * &p;
    let v = &p_inv * m.v.to_dvector();
    let out = LieModel::from_dense(d, m.h.clone(), m.k.clone(), dense, inner, v.iter().copied().collect())?;
    Ok((out, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn g(v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    #[test]
    fn abelian_brackets_vanish_and_validate() {
        let m = fixtures::abelian();
        assert_eq!(m.bracket(&g(&[1.0, 2.0, 3.0]), &g(&[-1.0, 0.5, 4.0])).unwrap(), vec![0.0; 3]);
        let r = m.validate();
        assert!(r.passed(), "{r}");
        assert_eq!(r.b, 0.0);
    }

    #[test]
    fn heisenberg_bracket_table() {
        let m = fixtures::heisenberg();
        assert_eq!(m.bracket(&g(&[1.0, 0.0, 0.0]), &g(&[0.0, 1.0, 0.0])).unwrap(), vec![0.0, 0.0, 1.0]);
        assert_eq!(m.bracket(&g(&[0.0, 1.0, 0.0]), &g(&[1.0, 0.0, 0.0])).unwrap(), vec![0.0, 0.0, -1.0]);
        let r = m.validate();
        assert!(r.passed(), "{r}");
        assert_abs_diff_eq!(r.b, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn so3_levi_civita_brackets() {
        let m = fixtures::so3();
        let e = |i: usize| {
            let mut x = vec![0.0; 3];
            x[i] = 1.0;
            x
        };
        assert_eq!(m.bracket(&e(0), &e(1)).unwrap(), e(2));
        assert_eq!(m.bracket(&e(1), &e(2)).unwrap(), e(0));
        assert_eq!(m.bracket(&e(2), &e(0)).unwrap(), e(1));
        assert!(m.validate().passed());
    }

    #[test]
    fn bracket_rejects_wrong_length() {
        let m = fixtures::heisenberg();
        assert!(matches!(m.bracket(&[1.0, 0.0], &[0.0, 1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bracket_k_on_solvable_fixture() {
        let m = fixtures::solvable2().into_validated().unwrap();
        let (a, b) = (0.7, -1.3);
        let r = m.bracket_k(&KVector::basis(2, 0), &KVector::new(vec![a, b])).unwrap();
        assert_eq!(r.coords(), &[0.0, b]);
        let y = KVector::new(vec![0.3, 0.9]);
        assert!(m.bracket_k(&y, &y).unwrap().is_zero());
    }

    #[test]
    fn bracket_k_drops_h_component() {
        // [e0, e1] = e2 lands in h, so its k-projection is zero.
        let m = fixtures::so3().into_validated().unwrap();
        let r = m.bracket_k(&KVector::basis(2, 0), &KVector::basis(2, 1)).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn broken_antisymmetry_is_reported_with_witness() {
        let entries = [BracketEntry::int(0, 1, 2, 1), BracketEntry::int(1, 0, 2, 0)];
        let m = LieModel::new(3, vec![], vec![0, 1, 2], &entries, DMatrix::identity(3, 3), vec![0.0; 3]).unwrap();
        let r = m.validate();
        let c = r.check("antisymmetry").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness, Some(vec![0, 1, 2]));
        assert!(matches!(m.into_validated(), Err(Error::ModelValidation(_))));
    }

    #[test]
    fn jacobi_violation_is_detected() {
        // [e0,e1]=e1, [e1,e2]=e0, [e0,e2]=0 breaks Jacobi.
        let entries = [BracketEntry::int(0, 1, 1, 1), BracketEntry::int(1, 2, 0, 1)];
        let m = LieModel::new(3, vec![], vec![0, 1, 2], &entries, DMatrix::identity(3, 3), vec![0.0; 3]).unwrap();
        let r = m.validate();
        assert!(r.check("antisymmetry").unwrap().passed);
        assert!(!r.check("jacobi").unwrap().passed);
    }

    #[test]
    fn reductivity_and_invariance_failures() {
        // h = span{e0}; [e0, e1] = e0 puts [h,k] into h.
        let entries = [BracketEntry::int(0, 1, 0, 1)];
        let m = LieModel::new(2, vec![0], vec![1], &entries, DMatrix::identity(1, 1), vec![0.2]).unwrap();
        let r = m.validate();
        assert!(!r.check("reductivity").unwrap().passed);

        let so3 = fixtures::so3().with_v(vec![0.5, 0.0]).unwrap();
        let r = so3.validate();
        assert!(r.check("reductivity").unwrap().passed);
        let inv = r.check("h_invariance").unwrap();
        assert!(!inv.passed);
        assert_eq!(inv.witness.as_ref().unwrap()[0], 2);
    }

    #[test]
    fn norm_bound_and_spd() {
        let m = fixtures::heisenberg().with_v(vec![0.0, 0.0, 1.0]).unwrap();
        let c = m.validate().check("norm_bound").unwrap().clone();
        assert!(!c.passed);
        assert!(c.detail.unwrap().contains("norm bound violated"));

        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let m = LieModel::new(2, vec![], vec![0, 1], &[], bad, vec![0.0, 0.0]).unwrap();
        assert!(!m.validate().check("inner_spd").unwrap().passed);
    }

    #[test]
    fn split_must_partition_the_basis() {
        let id = DMatrix::identity(2, 2);
        assert!(LieModel::new(3, vec![], vec![0, 1], &[], id.clone(), vec![0.0; 2]).is_err());
        assert!(LieModel::new(2, vec![0], vec![0, 1], &[], id, vec![0.0; 2]).is_err());
    }

    #[test]
    fn orthonormalize_identity_is_noop() {
        let m = fixtures::heisenberg();
        let (o, p) = orthonormalize(&m).unwrap();
        assert_eq!(p, DMatrix::identity(3, 3));
        assert!(o.is_exact());
        assert_eq!(o.v(), m.v());
    }

    #[test]
    fn orthonormalize_diagonal_inner() {
        let inner = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let m = LieModel::new(2, vec![], vec![0, 1], &[BracketEntry::int(0, 1, 1, 1)], inner, vec![0.25, 0.0]).unwrap();
        assert_abs_diff_eq!(m.b(), 0.5, epsilon = 1e-15);
        let (o, p) = orthonormalize(&m).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[(1, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.v().coords()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(o.b(), 0.5, epsilon = 1e-15);
        assert!(o.is_orthonormal(1e-15));
        assert!(o.validate().passed());
    }

    #[test]
    fn orthonormalize_rejects_indefinite() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let m = LieModel::new(2, vec![], vec![0, 1], &[], bad, vec![0.0, 0.0]).unwrap();
        assert!(matches!(orthonormalize(&m), Err(Error::NotPositiveDefinite)));
    }

    fn spd_from(entries: [f64; 6]) -> DMatrix<f64> {
        let a = DMatrix::from_row_slice(3, 3, &[entries[0], entries[1], entries[2], 0.0, entries[3], entries[4], 0.0, 0.0, entries[5]]);
        &a * a.transpose() + DMatrix::identity(3, 3) * 0.5
    }

    proptest! {
        #[test]
        fn orthonormalize_random_spd(e in proptest::array::uniform6(-1.5..1.5f64), v in proptest::array::uniform3(-0.2..0.2f64)) {
            let base = fixtures::solvable3();
            let inner = spd_from(e);
            let m = LieModel::new(3, vec![], vec![0, 1, 2], &fixtures::solvable3_brackets(), inner, v.to_vec()).unwrap();
            let (o, p) = orthonormalize(&m).unwrap();
            prop_assert!(o.is_orthonormal(1e-12));
            prop_assert!((o.b() - m.b()).abs() < 1e-12);
            prop_assert!(o.validate().passed());
            // Φ([x,y]) = [Φx, Φy]' with Φ = P^{-1}
            let p_inv = p.clone().try_inverse().unwrap();
            let x = DVector::from_vec(vec![0.3, -0.7, 1.1]);
            let y = DVector::from_vec(vec![-0.4, 0.2, 0.9]);
            let lhs = &p_inv * DVector::from_vec(m.bracket(x.as_slice(), y.as_slice()).unwrap());
            let rhs = o.bracket((&p_inv * &x).as_slice(), (&p_inv * &y).as_slice()).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
            }
            let _ = base;
        }

        #[test]
        fn bracket_k_is_antisymmetric(x in proptest::array::uniform3(-2.0..2.0f64), y in proptest::array::uniform3(-2.0..2.0f64)) {
            let m = fixtures::solvable3().into_validated().unwrap();
            let (x, y) = (KVector::new(x.to_vec()), KVector::new(y.to_vec()));
            let a = m.bracket_k(&x, &y).unwrap();
            let b = m.bracket_k(&y, &x).unwrap();
            for (p, q) in a.coords().iter().zip(b.coords()) {
                prop_assert!((p + q).abs() < 1e-12);
            }
        }
    }
}
