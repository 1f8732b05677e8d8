//! Exterior differential systems on tangent sphere bundles, verified in an
//! adapted orthonormal coframe with exact rational or floating point
//! coefficients.

pub mod adapted_frame;
pub mod calibration;
pub mod error;
pub mod exterior;
pub mod griffiths_forms;
pub mod hypersurface;
pub mod linalg;
pub mod metrics;
pub mod scalar;
pub mod space_forms;
pub mod symmetry;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

pub type ExactForm = exterior::ExteriorForm<Rational>;
pub type FloatForm = exterior::ExteriorForm<f64>;
pub type ExactRiemann = adapted_frame::RiemannTensor<Rational>;
pub type FloatRiemann = adapted_frame::RiemannTensor<f64>;
pub type ExactSystem = griffiths_forms::GriffithsSystem<Rational>;
pub type FloatSystem = griffiths_forms::GriffithsSystem<f64>;
pub type ExactMatrix = linalg::Matrix<Rational>;
