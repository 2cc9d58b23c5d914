//! Exact lattice polytopes of smooth complete fans, with a brute-force check
//! of the integer decomposition property (IDP) and a constructive
//! decomposition algorithm for fans with `n + 3` rays.
//!
//! A pair of lattice polytopes `(P, Q)` has the IDP when every lattice point
//! of `P + Q` is a sum of a lattice point of `P` and one of `Q`. For a smooth
//! complete fan with ray matrix `A`, every convex height vector `h` gives a
//! lattice polytope `P(A, h) = { x : A x >= -h }`, and heights add:
//! `P(A, h + h') = P(A, h) + P(A, h')`.
//!
//! ```
//! use idp_lab::batyrev::{BatyrevParams, BatyrevStructure, CanonicalHeight};
//! use idp_lab::decompose::Decomposer;
//! use idp_lab::polytope::{idp_check, LatticePolytope};
//!
//! let st = BatyrevStructure::build(BatyrevParams::new([2, 1, 1, 1, 1], &[1], &[]))?;
//! let h = st.heights_from_canonical(&CanonicalHeight::new(0, 1, 3))?;
//! let h2 = st.heights_from_canonical(&CanonicalHeight::new(2, 2, 1))?;
//!
//! let p = LatticePolytope::new(st.fan(), h.clone())?;
//! let q = LatticePolytope::new(st.fan(), h2.clone())?;
//! assert!(idp_check(&p, &q)?.is_pass());
//!
//! let certificates = Decomposer::new(&st, &h, &h2)?.decompose_all()?;
//! assert_eq!(certificates.len(), 434);
//! # Ok::<(), idp_lab::Error>(())
//! ```
//!
//! Modules, bottom up:
//!
//! * [`linalg`]: big-integer vectors and matrices, determinants, unimodular solves.
//! * [`fan`]: fans from rays and primitive collections, support functions, convexity.
//! * [`batyrev`]: the five-collection fans with `n + 3` rays and their height normal form.
//! * [`polytope`]: vertices, lattice points, the IDP oracle.
//! * [`decompose`]: the constructive decomposer and its certificates.
//! * [`sweep`], [`fans2d`]: search harnesses.

pub mod batyrev;
pub mod decompose;
pub mod error;
pub mod fan;
pub mod fans2d;
pub mod lattice;
pub mod linalg;
pub mod polytope;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fans.md")]
    mod fans {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/five_collections.md")]
    mod five_collections {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/plane_search.md")]
    mod plane_search {}
    #[doc = include_str!("../../../book/src/command_line.md")]
    mod command_line {}
}
