//! Exterior algebra, Spin(7) calibrations, Cayley plane geometry and the
//! deformation operators of Cayley and complex submanifolds on a flat torus.

// Dense small-matrix code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exterior;
pub mod graphs;
pub mod kahler;
pub mod linalg;
pub mod plane;
pub mod sampling;
pub mod scalar;
pub mod spin7;
pub mod torus;

pub use error::{Error, Result};
pub use exterior::{ComplexMultivector, ComplexVector, Multivector, Vector};
pub use kahler::{CalabiYauModel, ComplexStructure, Phase, TypedVector, VectorType};
pub use plane::OrientedPlane;
pub use scalar::{Backend, Rational, Scalar};
pub use spin7::{CayleyForm, TauValue};
pub use torus::{Bundle, FourierSection, TorusModel};
