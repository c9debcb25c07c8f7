//! A symbolic engine for 2-local homotopy groups of spheres.
//!
//! The library works over a curated database of generators, group
//! presentations, composition relations, Whitehead-product instances, and
//! EHP-sequence images, all with citations into the standard tables. On top
//! of that data it mechanizes:
//!
//! * composition chains of suspended generators and their normalization to
//!   elements of presented groups ([`term`], [`normalize`]);
//! * formal matrices between wedges of spheres, with wedge homotopy groups
//!   through the truncated Hilton decomposition ([`wedge`]);
//! * matrix Toda brackets: well-definedness, indeterminacy by the
//!   index-positive formula and by the full coset computation, and the
//!   zero-corner shape rewrites ([`bracket`]);
//! * the EHP sequence as data: applying E, H, P, preimage cosets of P, and
//!   the generalized H-formula ([`ehp`]);
//! * database validation, exactness included ([`validate`]).
//!
//! Everything is 2-local: finite cyclic orders are powers of two and odd
//! integers act invertibly.

pub mod bracket;
pub mod congr;
pub mod db;
pub mod ehp;
pub mod error;
pub mod group;
pub mod normalize;
pub mod term;
pub mod validate;
pub mod wedge;

pub use db::{load_database, Database};
pub use error::{Error, Result};

use std::sync::Arc;

use group::{GroupPresentation, Target};
use wedge::WedgeSpace;

/// `pi_deg(target)`: stored presentations for spheres (or the trivial group
/// below connectivity), the Hilton decomposition for wedges.
pub fn lookup_group(db: &Database, deg: u32, target: &Target) -> Result<Arc<GroupPresentation>> {
    match target {
        Target::Sphere(m) => db.lookup_sphere_group(deg, *m),
        Target::Wedge(summands) => {
            let space = WedgeSpace::new(summands.clone())?;
            wedge::wedge_group(db, deg, &space)
        }
    }
}
