//! Harness library behind the `lrtc` binary: file formats, the
//! Monte-Carlo sweep runner and the denoising workflow.

pub mod denoise;
pub mod io;
pub mod sweep;
