//! Command implementations behind the `mkent` binary.
//!
//! Every command produces one JSON document and an exit code. Decisions
//! exit with 0 for entangled and 1 for product; bad input exits with 2.

pub mod commands;
pub mod state_file;

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::PrettyFormatter;
use serde_json::{Serializer, Value};

pub use commands::{decide, ghz_scan, mk_op, selftest, DecideArgs, GhzScanArgs, MkOpArgs, SelftestArgs};
pub use state_file::{LoadInfo, StateFile};

pub const EXIT_ENTANGLED: u8 = 0;
pub const EXIT_PRODUCT: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, #[source] io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] mkent_core::Error),
    #[error("{0}")]
    Input(String),
}

/// A finished command: the document to print and the process exit code.
#[derive(Debug, Clone)]
pub struct Output {
    pub document: Value,
    pub code: u8,
}

impl Output {
    pub fn new<T: Serialize>(document: &T, code: u8) -> Result<Self, CliError> {
        Ok(Output { document: serde_json::to_value(document)?, code })
    }
}

/// Compact JSON when `indent` is `None`, otherwise pretty-printed with that
/// many spaces.
pub fn render(value: &Value, indent: Option<usize>) -> Result<String, CliError> {
    match indent {
        None => Ok(serde_json::to_string(value)?),
        Some(width) => {
            let pad = vec![b' '; width];
            let mut buf = Vec::new();
            let mut ser = Serializer::with_formatter(&mut buf, PrettyFormatter::with_indent(&pad));
            value.serialize(&mut ser)?;
            Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
        }
    }
}

pub fn print(value: &Value, indent: Option<usize>) -> Result<(), CliError> {
    let text = render(value, indent)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::Io("stdout".into(), e))
}
