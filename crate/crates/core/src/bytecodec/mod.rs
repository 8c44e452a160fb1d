//! Byte-granular codecs: classic VByte and StreamVByte.

pub mod svb;
pub mod vbyte;
