//! Exact lattice toolkit for the pair-sum construction `K = M + N`.

pub mod catalog;
pub mod enumerate;
pub mod error;
pub mod glue;
pub mod harness;
pub mod isometry;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod pair_sum;

pub use error::{LatticeError, Result};
pub use isometry::{Isometry, IsometrySpec};
pub use lattice::{DiscriminantGroup, Lattice, VectorSet};
pub use catalog::{CatalogEntry, Identification, Verdict};
pub use linalg::{Rational, RationalMatrix, SmithDecomposition};
pub use pair_sum::{pair_sum, PairSumResult};
