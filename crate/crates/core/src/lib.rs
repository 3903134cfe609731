pub mod dd;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod multipole;
pub mod optim;
pub mod protocol;
pub mod spin;
pub mod wigner;

pub use error::{Error, Result};
