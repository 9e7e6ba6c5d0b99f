//! Constructible sheaves and cosheaves on finite posets.
//!
//! A finite poset carries the topology whose open sets are the up-sets, and a
//! functor from the poset to chain complexes is exactly a constructible sheaf
//! on that space. This crate implements the combinatorial calculus of such
//! sheaves with exact rational arithmetic: homotopy limits over open sets,
//! open/closed recollement, pseudo-free resolutions and derived pushforwards,
//! cosheaf maps with checkable closed-image certificates, and stratification
//! refinement. A separate floating-point layer discretizes fiberwise de Rham
//! complexes on rectangle regions and cross-checks its Betti numbers against
//! the combinatorial answers.
//!
//! Everything outside the de Rham layer is exact: ranks are true ranks over
//! ℚ, and every verification the crate performs is an identity, not a
//! tolerance.

pub mod chain;
pub mod cosheaf;
pub mod derham;
pub mod docs;
pub mod error;
pub mod linalg;
pub mod poset;
pub mod sheaf;
pub mod simplicial;
pub mod stratify;
pub mod suite;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
