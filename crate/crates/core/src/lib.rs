//! Random plane waves in the plane: simulation of realizations, detection
//! and classification of critical points, and the Kac-Rice one- and
//! two-point functions of the critical point process.

pub mod critical;
pub mod error;
pub mod field;
pub mod kacrice;
pub mod mc;
pub mod point_process;
pub mod special_math;

pub use error::{Error, Result};
