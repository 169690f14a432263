//! Product operator norms, superoperator norms and the maximum acceptance
//! probability of two-prover one-round quantum interactive proofs.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, SVD, partial trace, Schmidt decomposition.
//! - [`norms`]: trace norm and the bipartite product norm (exact for rank one,
//!   certified lower bounds by alternating maximization in general).
//! - [`sop`]: superoperators and their l1, diamond and product norms.
//! - [`games`]: verifier specifications, prover strategies and game values.
//!
//! Every optimizer returns a certificate: the witnesses that achieve the
//! reported value, so the value can be checked by re-evaluation.

pub mod error;
pub mod games;
pub mod limits;
pub mod linalg;
pub mod norms;
pub mod seesaw;
pub mod sop;

pub use error::{Error, Result};
pub use linalg::{Bipartition, ComplexMatrix, C64};
pub use seesaw::SeesawOptions;
