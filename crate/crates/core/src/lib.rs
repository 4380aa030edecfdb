//! Exact and certified-numeric geometry of the solvable Baumslag-Solitar
//! groups BS(1,n) = <a, b | b a b^-1 = a^n>.
//!
//! The crate models the n-adic rationals and their clone tree, the group as
//! affine maps over Z[1/n], the fiber-product complex X_n, quasisimilarity
//! dynamics on the real line, boundary dynamics on triple spaces, and the
//! commensurability algebra of the groups.

pub mod bsgroup;
pub mod dynamics;
pub mod error;
pub mod fibercomplex;
pub mod nadic;
pub mod quasisim;
pub mod rigidity;
pub mod treespace;

pub use error::{Error, Result};
