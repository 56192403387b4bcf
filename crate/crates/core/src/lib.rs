pub mod bits;
pub mod channel;
pub mod codes;
pub mod error;
pub mod gf2m;
pub mod mlc;
pub mod osd;
pub mod sim;

pub use bits::BitVector;
pub use error::{Error, Result};
