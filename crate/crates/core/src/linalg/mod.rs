//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! Every vector and matrix is laid out row-major over its [`SpaceRegistry`],
//! leftmost label slowest. Values are immutable once built.

mod operator;
mod space;
mod spectrum;
mod state;

pub use operator::{partial_trace, projector, DensityOperator, Operator, DENSITY_TOLERANCE};
pub use space::{SpaceRegistry, SystemSet, MAX_DIMENSION};
pub use spectrum::{eig_hermitian, Spectrum, DEGENERACY_GAP};
pub use state::{tensor_product, Normalization, StateVector, NORM_TOLERANCE};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
