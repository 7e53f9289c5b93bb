pub mod diagonal;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod numeric;
pub mod pressure;
pub mod symbolic;
pub mod system;

pub use error::{Error, Result};
pub use system::{Budget, MatrixSystem};
