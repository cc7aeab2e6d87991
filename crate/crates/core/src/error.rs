use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Machine-readable error class, printed first on CLI failure lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Io,
    Parse,
    Domain,
    Range,
    Ambiguity,
    Extraction,
    Bracketing,
    GridTooCoarse,
    Rank,
    Feasibility,
    Degenerate,
    Invalid,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Io => "io",
            Category::Parse => "parse",
            Category::Domain => "domain",
            Category::Range => "range",
            Category::Ambiguity => "ambiguity",
            Category::Extraction => "extraction",
            Category::Bracketing => "bracketing",
            Category::GridTooCoarse => "grid_too_coarse",
            Category::Rank => "rank",
            Category::Feasibility => "feasibility",
            Category::Degenerate => "degenerate",
            Category::Invalid => "invalid",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Domain(String),
    #[error("{what} = {value} outside valid interval [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{what}: candidates {candidates:?}")]
    Ambiguity { what: String, candidates: Vec<(f64, f64)> },
    #[error("{0}")]
    Extraction(String),
    #[error("{0}")]
    Bracketing(String),
    #[error("phase step {step:.3} rad between {f_lo} Hz and {f_hi} Hz; grid too coarse")]
    GridTooCoarse { step: f64, f_lo: f64, f_hi: f64 },
    #[error("{0}")]
    Rank(String),
    #[error("{msg} (limit {limit})")]
    Feasibility { msg: String, limit: f64 },
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Usage(_) => Category::Usage,
            Error::Io { .. } => Category::Io,
            Error::Parse { .. } => Category::Parse,
            Error::Domain(_) => Category::Domain,
            Error::Range { .. } => Category::Range,
            Error::Ambiguity { .. } => Category::Ambiguity,
            Error::Extraction(_) => Category::Extraction,
            Error::Bracketing(_) => Category::Bracketing,
            Error::GridTooCoarse { .. } => Category::GridTooCoarse,
            Error::Rank(_) => Category::Rank,
            Error::Feasibility { .. } => Category::Feasibility,
            Error::Degenerate(_) => Category::Degenerate,
            Error::Invalid(_) => Category::Invalid,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
