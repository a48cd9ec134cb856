//! On-disk JSON grammar: parsing, canonical serialization, validation and
//! per-spec structural metrics.

mod lint;
mod metrics;
mod parse;
mod serialize;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use metrics::{check_expressible, compute_metrics, Expressibility, SpecMetrics};
pub use parse::{parse_spec, parse_spec_value, Parsed};
pub use serialize::{serialize_spec, spec_to_value};

/// Observed maximum composition depth in practice; deeper specs only get a lint.
pub const DEPTH_LINT_THRESHOLD: usize = 4;

/// How unknown identifiers are treated while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Unknown identifiers are errors.
    #[default]
    Strict,
    /// Unknown identifiers become warnings; unknown marks are admitted as
    /// `others`, every other identifier is kept verbatim.
    Lenient,
}

impl ParseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseMode::Strict => "strict",
            ParseMode::Lenient => "lenient",
        }
    }
}

impl std::str::FromStr for ParseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(ParseMode::Strict),
            "lenient" => Ok(ParseMode::Lenient),
            other => Err(format!("unknown mode '{other}' (expected strict or lenient)")),
        }
    }
}

impl fmt::Display for ParseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    Syntax,
    UnknownKey,
    UnknownIdentifier,
    Arity,
    MissingField,
    TypeMismatch,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::UnknownKey => "unknown_key",
            ParseErrorKind::UnknownIdentifier => "unknown_identifier",
            ParseErrorKind::Arity => "arity",
            ParseErrorKind::MissingField => "missing_field",
            ParseErrorKind::TypeMismatch => "type_mismatch",
        }
    }
}

/// A located grammar violation. `path` is a JSON pointer into the source
/// document; `/` denotes the document root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{path}: {} ({message})", kind.as_str())]
pub struct ParseError {
    pub path: String,
    pub kind: ParseErrorKind,
    pub message: String,
}

/// A non-blocking finding produced while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Renders a JSON pointer, using `/` for the root.
pub(crate) fn display_path(path: &str) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.to_string()
    }
}
