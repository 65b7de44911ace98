use std::fmt;

use thiserror::Error;

/// Optional source position (1-based line and column).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Location(Option<(usize, usize)>);

impl Location {
    pub fn none() -> Location {
        Location(None)
    }

    pub fn at(line: usize, column: usize) -> Location {
        Location(Some((line, column)))
    }

    pub fn line(&self) -> Option<usize> {
        self.0.map(|(l, _)| l)
    }

    pub fn column(&self) -> Option<usize> {
        self.0.map(|(_, c)| c)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some((l, c)) => write!(f, " at line {l}, column {c}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("syntax error{at}: {message}")]
    Syntax { at: Location, message: String },
    #[error("directed cycle: {}", cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },
    #[error("duplicate node `{name}`{at}")]
    DuplicateNode { name: String, at: Location },
    #[error("unknown node `{name}`{at}")]
    UnknownNode { name: String, at: Location },
    #[error("duplicate edge {edge}{at}")]
    DuplicateEdge { edge: String, at: Location },
    #[error("self-loop on `{name}`{at}")]
    SelfLoop { name: String, at: Location },
    #[error("invalid node name `{name}`{at}")]
    InvalidName { name: String, at: Location },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparationError {
    #[error("argument sets overlap on `{0}`")]
    Overlap(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("empty product")]
    EmptyProduct,
    #[error("conditional `{term}` is undefined: its conditioning event has probability zero")]
    UndefinedConditional { term: String },
    #[error("no value assigned to free variable `{0}`")]
    MissingAssignment(String),
    #[error("variable `{0}` is not part of the model")]
    UnknownVariable(String),
    #[error("value {value} out of range for `{var}`")]
    ValueOutOfRange { var: String, value: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("state space of {states} assignments exceeds the enumeration cap of {cap}")]
    TooLarge { states: u128, cap: u128 },
    #[error("exact weight accumulation overflowed")]
    Overflow,
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("invalid s-hedge: {0}")]
    InvalidHedge(String),
    #[error("counterexample construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("the diagram already has selection targets: {0}")]
    HasSelection(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}
