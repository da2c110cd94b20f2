//! Library surface of the command-line front end: scenario parsing and
//! deterministic CSV output, shared by the binary and its tests.

pub mod output;
pub mod scenario;
