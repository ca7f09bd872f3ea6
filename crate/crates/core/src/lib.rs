//! Weighted belief-propagation decoding of short LDPC codes with
//! absorbing-set specialized training, decoder diversity and OSD
//! post-processing.

pub mod absorbing;
pub mod bp;
pub mod channel;
pub mod diversity;
pub mod harness;
pub mod osd;
pub mod stats;
pub mod tanner;
pub mod training;
