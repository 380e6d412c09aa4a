pub mod blinded;
pub mod codec;
pub mod error;
pub mod games;
pub mod gs;
pub mod mht;
pub mod pairing;
pub mod protocol;
pub mod scheme;
