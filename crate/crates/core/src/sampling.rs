//! Deterministic direction sampling on the unit sphere of `α`.
//!
//! Points come from a Halton sequence with a seeded Cranley–Patterson
//! rotation, pushed through Box–Muller and normalized. The same `(count,
//! seed)` always yields the same directions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::liealg::{KVector, LieModel};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// `count` Euclidean unit vectors in `R^dim`.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::InvalidContext("cannot sample directions in dimension 0".into()));
    }
    let pairs = dim.div_ceil(2);
    if 2 * pairs > PRIMES.len() {
        return Err(Error::Unsupported(format!("direction sampling supports dim <= {}, got {dim}", PRIMES.len())));
    }
    if dim == 1 {
        return Ok((0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..2 * pairs).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count {
        let u: Vec<f64> = (0..2 * pairs).map(|d| (halton(index, PRIMES[d]) + shift[d]).fract()).collect();
        index += 1;
        let mut z = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            let r = (-2.0 * (1.0 - u[2 * p]).ln()).sqrt();
            let (sn, cs) = (2.0 * PI * u[2 * p + 1]).sin_cos();
            z.push(r * cs);
            z.push(r * sn);
        }
        z.truncate(dim);
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        out.push(z.into_iter().map(|x| x / norm).collect());
    }
    Ok(out)
}

/// `count` directions in `k` with `α(y) = 1`.
pub fn alpha_unit_directions(m: &LieModel, count: usize, seed: u64) -> Result<Vec<KVector>> {
    let nk = m.k_dim();
    let sym: DMatrix<f64> = (m.inner() + m.inner().transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(Error::NotPositiveDefinite)?;
    // G = L Lᵀ; y = L^{-T} z has yᵀ G y = |z|².
    let p = chol.l().try_inverse().ok_or(Error::NotPositiveDefinite)?.transpose();
    Ok(sphere_directions(nk, count, seed)?
        .into_iter()
        .map(|z| KVector::from(&p * nalgebra::DVector::from_vec(z)))
        .collect())
}
