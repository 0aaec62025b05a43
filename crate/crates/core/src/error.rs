use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can surface.
///
/// Variants are grouped by the exit code the command-line front end maps
/// them to; see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, config line, or engine setting is unusable.
    #[error("config error: {0}")]
    Config(String),

    /// A config file line could not be understood.
    #[error("config error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    /// The iteration budget is empty.
    #[error("budget error: total iterations must be at least 1 (got {0})")]
    Budget(usize),

    /// A decision variable lies outside its box.
    #[error("infeasible point: {variable} = {value} is outside [{lower}, {upper}]")]
    Infeasible {
        variable: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    /// A weight vector is negative somewhere or does not sum to one.
    #[error("invalid weight vector: {0}")]
    Weights(String),

    /// No lattice point satisfies the requested step and minimum.
    #[error("lattice error: {0}")]
    Lattice(String),

    /// A CDF was asked for a value outside the distribution's support.
    #[error("domain error: x = {x} lies outside the support of the {distribution} distribution")]
    Domain { distribution: &'static str, x: f64 },

    /// A point set is malformed (ragged, non-finite, or of unsupported dimension).
    #[error("point set error: {0}")]
    PointSet(String),

    /// Some point does not weakly dominate the reference point.
    #[error("reference error: point #{index} does not weakly dominate the reference point in coordinate {coordinate}")]
    Reference { index: usize, coordinate: usize },

    /// The explorative-rate denominator vanished.
    #[error("degenerate trace: value at position {index} is exactly zero")]
    DegenerateTrace { index: usize },

    /// A trace too short to contain one deviation.
    #[error("degenerate trace: need at least 2 values, got {0}")]
    ShortTrace(usize),

    /// Percentage gap against a zero baseline.
    #[error("division error: baseline hypervolume is zero")]
    Division,

    /// A data file does not match its schema.
    #[error("{}:{line}: schema error: {message}", path.display())]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A single optimizer run inside a sweep failed.
    #[error("run failed (engine {engine}, weight #{weight}, run #{run}): {source}")]
    Run {
        engine: String,
        weight: usize,
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 2 config/infeasible input,
    /// 3 numeric or metric failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::ConfigLine { .. }
            | Error::Budget(_)
            | Error::Infeasible { .. }
            | Error::Weights(_)
            | Error::Lattice(_) => 2,
            Error::Domain { .. }
            | Error::PointSet(_)
            | Error::Reference { .. }
            | Error::DegenerateTrace { .. }
            | Error::ShortTrace(_)
            | Error::Division => 3,
            Error::Schema { .. } | Error::Io { .. } => 4,
            Error::Run { source, .. } => source.exit_code(),
        }
    }
}
