pub mod analytics;
pub mod encoding;
pub mod error;
pub mod error_model;
pub mod qram;
pub mod quadrature;
pub mod router;
pub mod scheduler;
pub mod units;
pub mod wavepackets;

pub use encoding::Encoding;
pub use error::{Error, Result};
