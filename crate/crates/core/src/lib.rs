pub mod asd;
pub mod audio_ssl;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod sim;
pub mod vc;
pub mod vision;

pub use error::{Error, Result};
