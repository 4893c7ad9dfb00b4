//! Deformed arc foliations of weighted-homogeneous germs under higher-order
//! perturbations, the obstruction locus that blocks them, and the contact
//! trivializations built from them.
//!
//! The usual entry point is a [`GermDefinition`] (JSON) built into a
//! [`GermSystem`], then [`scan_link`], [`solve_arc`] and [`Trivializer`].

pub mod error;
pub mod geom;
pub mod poly;
pub mod series;
pub mod obstruction;
pub mod arc;
pub mod trivial;
pub mod germfile;
pub mod corpus;
pub mod verify;

pub use arc::{solve_arc, DeformedArc};
pub use error::{Error, Result};
pub use geom::{SpherePoint, Tord, WeightSystem};
pub use germfile::{GermDefinition, Options};
pub use obstruction::{find_link_points, scan_link, GermSystem, Mode, ObstructionReport, Verdict};
pub use poly::{parse_poly, WOrder, WPolynomial};
pub use series::TSeries;
pub use trivial::{TrivializationDiagnostics, Trivializer};
pub use verify::{verify, VerificationReport};
