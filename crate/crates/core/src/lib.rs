//! Construction and LOCC (in)distinguishability analysis of multipartite
//! orthogonal product-state sets, plus the bound-entanglement distribution
//! checks built on them.

pub mod analysis;
pub mod entanglement;
pub mod error;
pub mod partition;
pub mod states;
pub mod tensor;
pub mod tolerance;

pub use error::{Error, Result};
pub use partition::{Partition, RelabelMap};
pub use states::{ProductState, StateSet};
pub use tolerance::Tolerances;
