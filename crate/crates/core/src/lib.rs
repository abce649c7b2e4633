//! Randomized column-pivoted QR for tall matrices (CQRRPT) and the tools
//! used to check its guarantees.

pub mod analysis;
pub mod cqrrpt;
pub mod error;
pub mod linalg;
pub mod qrcp;
pub mod sketching;
pub mod testmat;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
