pub mod benchmark;
pub mod bitstream;
pub mod cipher;
pub mod codec;
pub mod error;
pub mod keystream;
pub mod roi;
pub mod scramble;
pub mod selftest;
pub mod synth;
pub mod syntax;
pub mod yuv;

pub use error::{Error, Result};
