use thiserror::Error;

/// Errors raised by parsing, validation and the solvers.
///
/// Every variant maps onto a stable short code (see [`Error::code`]) that the
/// command-line front end prints alongside the message.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("`{from}` lists `{to}` but `{to}` does not list `{from}`")]
    Asymmetric { from: String, to: String },
    #[error("closed vertex `{0}` is not a hospital")]
    ClosedNotHospital(String),
    #[error("`{partner}` appears more than once in the preference of `{owner}`")]
    DuplicatePrefEntry { owner: String, partner: String },
    #[error("edge is not incident to `{0}`")]
    NotIncident(String),
    #[error("edge set is not flat")]
    NotFlat,
    #[error("hospital `{0}` has no edge in the flat set")]
    EmptyAtHospital(String),
    #[error("edge ({0}, {1}) is already in the matching")]
    EdgeInMatching(String, String),
    #[error("({0}, {1}) is not an edge of the instance")]
    EdgeNotInE(String, String),
    #[error("edge set is not a matching: `{0}` is covered twice")]
    NotMatching(String),
    #[error("{what} has {size} elements, above the enumeration budget {budget}")]
    Budget { what: &'static str, size: usize, budget: usize },
    #[error("separated-preference condition fails at doctor `{0}`")]
    StarViolated(String),
    #[error("doctor `{0}` has more than two acceptable hospitals")]
    Degree(String),
    #[error("component node receives more than one arc")]
    Indegree,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("variable {0} does not occur exactly twice positively and twice negatively")]
    Occurrence(usize),
    #[error("clause {0} does not have exactly three distinct literals")]
    ClauseSize(usize),
    #[error("variable count {0} is not a positive multiple of 3")]
    BadVariableCount(usize),
    #[error("assignment does not satisfy clause {0}")]
    UnsatAssignment(usize),
    #[error("matching does not decode to an assignment: {0}")]
    NotCanonical(String),
    #[error("invalid generator parameter: {0}")]
    Params(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "E_SYNTAX",
            Error::UnknownId(_) => "E_UNKNOWN_ID",
            Error::DuplicateId(_) => "E_DUP_ID",
            Error::Asymmetric { .. } => "E_ASYMMETRIC",
            Error::ClosedNotHospital(_) => "E_CLOSED_NOT_HOSPITAL",
            Error::DuplicatePrefEntry { .. } => "E_DUP_PREF_ENTRY",
            Error::NotIncident(_) => "E_NOT_INCIDENT",
            Error::NotFlat => "E_NOT_FLAT",
            Error::EmptyAtHospital(_) => "E_EMPTY_FH",
            Error::EdgeInMatching(..) => "E_EDGE_IN_MATCHING",
            Error::EdgeNotInE(..) => "E_EDGE_NOT_IN_E",
            Error::NotMatching(_) => "E_NOT_MATCHING",
            Error::Budget { .. } => "E_BUDGET",
            Error::StarViolated(_) => "E_STAR_VIOLATED",
            Error::Degree(_) => "E_DEGREE",
            Error::Indegree => "E_INDEGREE",
            Error::Invariant(_) => "E_INVARIANT",
            Error::Occurrence(_) => "E_OCCURRENCE",
            Error::ClauseSize(_) => "E_CLAUSE_SIZE",
            Error::BadVariableCount(_) => "E_BAD_N",
            Error::UnsatAssignment(_) => "E_UNSAT_ASSIGNMENT",
            Error::NotCanonical(_) => "E_NOT_CANONICAL",
            Error::Params(_) => "E_PARAMS",
        }
    }

    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Indegree | Error::Invariant(_))
    }

    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax { line, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
