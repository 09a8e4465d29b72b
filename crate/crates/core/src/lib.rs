pub mod error;
pub mod qdm;

pub use error::{Error, Result};
pub mod bath;
pub mod classical;
pub mod flow;
pub mod hamiltonians;
pub mod output;
pub mod scenario;
pub mod validate;
