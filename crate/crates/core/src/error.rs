use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: expected {expected}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
    },

    #[error("unsupported construct at {line}:{column}: {name}")]
    Unsupported { name: String, line: usize, column: usize },

    #[error("unsafe rule `{rule}`: {detail}")]
    Unsafe { rule: String, detail: String },

    #[error("grounding would exceed {limit} rule instances")]
    UniverseTooLarge { limit: u64 },

    #[error("timed out after {elapsed:?}")]
    Timeout { elapsed: Duration },

    #[error("{count} candidate atoms exceed the brute-force cap of {cap}")]
    TooManyAtoms { count: usize, cap: usize },

    #[error("no answer set at iteration {iteration}")]
    IterationUnsat { iteration: usize },

    #[error("engine timed out at iteration {iteration}")]
    EngineTimeout { iteration: usize },

    #[error("engine failure: {0}")]
    Engine(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
