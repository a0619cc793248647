//! Pipeline plumbing behind the `cuisto` binary.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{Overrides, PipelineConfig, Task};
pub use error::{CliError, ErrorKind};
