//! Stable matchings with ties where closed hospitals, when left unmatched,
//! cannot take part in a blocking pair.
//!
//! The crate provides the instance model and preference calculus
//! ([`model`]), the blocking/stability predicate ([`stability`]), the
//! pre-processing fixpoint that forbids edges no stable matching can use
//! ([`preprocess`]), two polynomial solvers ([`separated`] for instances
//! whose doctors rank open hospitals above closed ones, [`degree2`] for
//! doctors with at most two acceptable hospitals), reductions from
//! (3,B2)-SAT and from envy-free matching ([`reductions`]), exhaustive
//! oracles ([`oracle`]), seeded generators ([`generators`]) and the
//! randomized cross-check harness ([`verify`]).

pub mod bipartite;
pub mod degree2;
pub mod error;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod preprocess;
pub mod reductions;
pub mod separated;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use model::{parse_instance, Doctor, Edge, EdgeId, EdgeSet, Hospital, Instance, Vertex};
pub use stability::{is_stable, Matching, Outcome};
