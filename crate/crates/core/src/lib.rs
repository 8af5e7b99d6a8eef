//! Root systems, peeling sequences, alcove geometry, Weyl characters and
//! restriction norms of characters on compact simple Lie groups.

pub mod alcove;
pub mod character;
pub mod error;
pub mod linalg;
pub mod norms;
pub mod peeling;
pub mod quadrature;
pub mod rootsys;

pub use error::{Error, Result};
pub use rootsys::{build_root_system, Family, NodeSet, RootSystem, Subsystem, SubsystemTable};
