use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported field order {order}: {limit}")]
    UnsupportedOrder { order: usize, limit: String },

    #[error("{construction} supports at most {max} columns, requested {requested}")]
    ColumnLimit {
        construction: &'static str,
        requested: usize,
        max: usize,
    },

    #[error("linear program is infeasible{}", scenario_suffix(*.scenario))]
    Infeasible { scenario: Option<usize> },

    #[error("linear program is unbounded{}", scenario_suffix(*.scenario))]
    Unbounded { scenario: Option<usize> },

    #[error("pivot magnitude {pivot:e} below tolerance; consider rescaling the problem")]
    DegeneratePivot { pivot: f64 },

    #[error("evaluation of slice {slice} failed: {source}")]
    Slice {
        slice: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn scenario_suffix(scenario: Option<usize>) -> String {
    match scenario {
        Some(i) => format!(" (scenario {i})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
