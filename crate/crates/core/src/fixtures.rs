//! Models shipped with the crate. The JSON sources live in `fixtures/`.

use crate::liealg::{BracketEntry, LieModel};
use crate::model_io::parse_model;

pub const ABELIAN_JSON: &str = include_str!("../fixtures/abelian.json");
pub const HEISENBERG_JSON: &str = include_str!("../fixtures/heisenberg.json");
pub const SOLVABLE2_JSON: &str = include_str!("../fixtures/solvable2.json");
pub const SO3_JSON: &str = include_str!("../fixtures/so3.json");
pub const SOLVABLE3_JSON: &str = include_str!("../fixtures/solvable3.json");

fn load(json: &str) -> LieModel {
    parse_model(json).expect("shipped fixture parses").model
}

/// `R^3` with zero brackets and `v = 0`.
pub fn abelian() -> LieModel {
    load(ABELIAN_JSON)
}

/// Heisenberg algebra `[e0, e1] = e2` with central `v = e2/2`.
pub fn heisenberg() -> LieModel {
    load(HEISENBERG_JSON)
}

/// Two-dimensional solvable algebra `[e0, e1] = e1` with `v = e0/2`.
pub fn solvable2() -> LieModel {
    load(SOLVABLE2_JSON)
}

/// `so(3)` with `h = span{e2}` acting on `k = span{e0, e1}`; `v = 0` is the
/// only `h`-invariant vector.
pub fn so3() -> LieModel {
    load(SO3_JSON)
}

/// Three-dimensional solvable algebra `[e0, e1] = e1`, `[e0, e2] = 2 e2` with a
/// non-diagonal inner product and a generic `v` (`b ≈ 0.354`).
pub fn solvable3() -> LieModel {
    load(SOLVABLE3_JSON)
}

pub fn solvable3_brackets() -> Vec<BracketEntry> {
    vec![BracketEntry::int(0, 1, 1, 1), BracketEntry::int(0, 2, 2, 2)]
}

/// The four fixtures used by the acceptance suite, by name.
pub fn acceptance_set() -> Vec<(&'static str, LieModel)> {
    vec![
        ("abelian", abelian()),
        ("heisenberg", heisenberg()),
        ("solvable2", solvable2()),
        ("so3", so3()),
    ]
}

/// Every shipped fixture.
pub fn all() -> Vec<(&'static str, LieModel)> {
    let mut v = acceptance_set();
    v.push(("solvable3", solvable3()));
    v
}

/// `model` with `v` rescaled to length `b` (or left at zero).
pub fn with_b(model: &LieModel, b: f64) -> LieModel {
    let current = model.b();
    if current == 0.0 {
        return model.clone();
    }
    let v = model.v().scaled(b / current);
    model.with_v(v.coords().to_vec()).expect("same length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_validates() {
        for (name, m) in all() {
            let r = m.validate();
            assert!(r.passed(), "{name}: {r}");
            assert!(m.is_exact());
        }
    }

    #[test]
    fn rescaling_v() {
        let m = with_b(&solvable2(), 0.3);
        assert!((m.b() - 0.3).abs() < 1e-15);
        assert_eq!(with_b(&abelian(), 0.3).b(), 0.0);
    }
}
