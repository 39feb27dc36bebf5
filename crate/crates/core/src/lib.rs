//! Truncated moment problems in `C^n`: given complex numbers `s_k` on a finite
//! set of multi-indices containing zero, find a nonnegative measure `mu` with
//! `integral z^k dmu = s_k`.
//!
//! A solution exists iff `s_0 > 0` or every `s_k` vanishes. For `s_0 > 0` the
//! solver builds commuting shift operators on the span of vectors with
//! `(x_k, x_0) = s_k`, scales them into contractions, reads off the Fourier
//! data of their regular unitary dilation and realizes it as a finitely
//! atomic measure on a polytorus.

pub mod cli;
pub mod dilation;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod synthesis;
pub mod verify;

pub use error::{MomentError, Result};
pub use lattice::{EmbeddedSpec, MomentSpec, MultiIndex, SignedIndex};
pub use synthesis::{synthesize, AtomicMeasure, SolverConfig};
pub use verify::{solvability, Report, Verdict};
