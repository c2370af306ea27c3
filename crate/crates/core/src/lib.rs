//! Second-order quantum correlation tensors of the free electromagnetic field
//! in a periodic box, with residual checks of their continuity laws.

pub mod conservation;
pub mod correlators;
pub mod error;
pub mod field_ops;
pub mod harness;
pub mod linalg;
pub mod mode_basis;
pub mod oracle;
pub mod quantum_state;
pub mod tensor;
pub mod wave_sum;

pub use error::{LabError, Result};
