//! Shared fixtures for the benchmarks.

use germfold::{corpus, find_link_points, GermSystem};

pub const SEED: u64 = 42;

pub fn germ(name: &str) -> GermSystem {
    corpus::get(name).and_then(|d| d.build()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// A link point away from the obstruction locus.
pub fn link_point(gs: &GermSystem) -> Vec<f64> {
    find_link_points(gs, 16, SEED)
        .into_iter()
        .map(|p| p.into_vec())
        .find(|s| !gs.is_obstructed(s, 1e-3))
        .expect("an unobstructed link point")
}

/// Points at weighted radius about `t` in the direction of `s`.
pub fn scaled(gs: &GermSystem, s: &[f64], t: f64) -> Vec<f64> {
    s.iter().zip(gs.ws().omega()).map(|(v, &w)| v * t.powi(w as i32)).collect()
}
