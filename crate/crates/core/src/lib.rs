pub mod cag;
pub mod error;
pub mod ground;
pub mod hcp;
pub mod incremental;
pub mod lang;
pub mod solve;
#[cfg(any(test, feature = "testgen"))]
pub mod testgen;

pub use error::{Error, Result};
