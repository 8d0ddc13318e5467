//! Normal graphs over Cayley and complex planes.

pub mod angles;
pub mod complex;
pub mod equivalence;
pub mod isom;
pub mod system;

pub use angles::{canonical_angles, construct_from_angles, CanonicalAngles};
pub use complex::{
    complex_graph_linear_system, is_complex_plane, sigma_eval, ComplexCheck, ComplexGraphCoefficients, SigmaValue,
};
pub use equivalence::{find_equivalence, SignedPermutation};
pub use isom::{e_isom_checks, normal_isom, normal_isom_inverse, BundleValuedForm, EIsomReport, InverseNormalization};
pub use system::{
    graph_frame, residual_quadratics, solve_tau_system, tau_system, GraphCoefficients, NewtonOutcome, GRAPH_RADIUS,
};
