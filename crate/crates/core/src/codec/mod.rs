//! Tile-based block codec: prediction, transform, entropy coding and the
//! container format.

pub mod config;
pub mod container;
pub mod decoder;
pub mod encoder;
pub mod cu;
pub mod entropy;
pub mod frame;
pub mod inter;
pub mod intra;
pub mod transform;

pub use config::{CodecConfig, FrameType};
pub use container::{Container, ContainerHeader, FrameRecord};
pub use decoder::{decode, Decoded, FrameError};
pub use encoder::{analyze, classify_sequence, emit, Analysis, Protection};
