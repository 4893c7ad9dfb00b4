//! Built-in germ definitions.

use crate::error::{Error, Result};
use crate::germfile::GermDefinition;

const SOURCES: &[(&str, &str)] = &[
    ("briancon-speder", include_str!("../corpus/briancon-speder.json")),
    ("bs-type", include_str!("../corpus/bs-type.json")),
    ("cusp-d4", include_str!("../corpus/cusp-d4.json")),
    ("cusp-d3", include_str!("../corpus/cusp-d3.json")),
    ("cusp-d2", include_str!("../corpus/cusp-d2.json")),
    ("brieskorn-d2", include_str!("../corpus/brieskorn-d2.json")),
    ("brieskorn-d1", include_str!("../corpus/brieskorn-d1.json")),
    ("quadric", include_str!("../corpus/quadric.json")),
    ("quadric-fixed-arc", include_str!("../corpus/quadric-fixed-arc.json")),
    ("homogeneous-cone", include_str!("../corpus/homogeneous-cone.json")),
    ("surface-1-2-2", include_str!("../corpus/surface-1-2-2.json")),
    ("ci-quadrics", include_str!("../corpus/ci-quadrics.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Result<GermDefinition> {
    let (_, text) = SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Definition(format!("no corpus germ named `{name}`")))?;
    GermDefinition::from_json(text)
}

pub fn all() -> Vec<GermDefinition> {
    SOURCES.iter().map(|(_, t)| GermDefinition::from_json(t).expect("corpus entries are valid")).collect()
}
