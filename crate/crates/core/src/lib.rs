//! Free-vibration analysis of nanostructures under Eringen's differential
//! nonlocal elasticity.
//!
//! Three structural models share one pipeline: element kernels built from
//! Gauss quadrature over Lagrange or NURBS bases, sparse assembly into an
//! [`AssembledSystem`], constraint elimination and a symmetric generalized
//! eigensolver.
//!
//! - [`rod`]: axial vibration, optionally with a crack represented by a
//!   shifted sign enrichment bridged by a linear spring.
//! - [`beam`]: Timoshenko beams with linear Lagrange or NURBS interpolation.
//! - [`plate`]: first-order shear deformable (Mindlin) plates with
//!   field-consistent Q4/Q8 elements or a tensor-product NURBS patch.
//! - [`oracle`]: closed-form and transcendental reference solutions for rods.

pub mod basis;
pub mod beam;
pub mod eigen;
mod error;
pub mod nonlocal;
pub mod oracle;
pub mod plate;
pub mod post;
pub mod quadrature;
pub mod rod;
pub mod sparse;
pub mod system;

pub use error::{Error, Result};
pub use nonlocal::NonlocalParams;
pub use system::AssembledSystem;
