//! Error types shared across the engine.
//!
//! Errors split into two families that the CLI maps to distinct exit codes:
//! data errors (parse failures, missing tables, stuck normalizations) and
//! mathematical precondition failures (a formula asked for outside its
//! hypotheses). `Error::is_math_precondition` makes the distinction.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("subscript {subscript} below birth sphere {birth} for generator `{name}`")]
    SubscriptBelowBirth {
        name: String,
        subscript: u32,
        birth: u32,
    },

    #[error("pi_{deg}(S^{sphere}) is not in the database (and not trivial by connectivity)")]
    GroupNotInDatabase { deg: u32, sphere: u32 },

    #[error("chains not composable: left factor has domain S^{left_dom}, right factor has codomain S^{right_cod}")]
    NotComposable { left_dom: u32, right_cod: u32 },

    #[error("stuck term: no rule resolves `{fragment}` in pi_{deg}(S^{sphere})")]
    StuckTerm {
        fragment: String,
        deg: u32,
        sphere: u32,
    },

    #[error("rewrite budget exhausted while normalizing `{0}`")]
    BudgetExhausted(String),

    #[error("suspension of the Whitehead square atom w_{0} is not defined (Whitehead squares are not suspensions)")]
    WhiteheadSuspension(u32),

    #[error("cannot desuspend `{name}_{subscript}` by {by}: subscript would drop below birth sphere {birth}")]
    CannotDesuspend {
        name: String,
        subscript: u32,
        by: u32,
        birth: u32,
    },

    #[error("matrix shapes do not chain: {0}")]
    Shape(String),

    #[error("matrix product not homotopy-meaningful: {0}")]
    ProductNotMeaningful(String),

    #[error("entry is not expressible as a single formal sum of chains: {0}")]
    NotExpressible(String),

    #[error("missing Whitehead relation for [{0}, {1}]")]
    MissingWhiteheadRelation(String, String),

    #[error("EHP node (m = {m}, N = {deg}) is not in the database")]
    NodeNotInDatabase { m: u32, deg: u32 },

    #[error("summand-wise indeterminacy formula inapplicable: {0}")]
    IndexFormulaInapplicable(String),

    #[error("corner rewrite precondition violated: {0}")]
    CornerRewritePrecondition(String),

    #[error("{0} is not in the image of P (its suspension is nonzero)")]
    NotInImageOfP(String),

    #[error("bracket is not well-defined: {0}")]
    NotWellDefined(String),

    #[error("ambient group mismatch: {0} vs {1}")]
    AmbientMismatch(String, String),

    #[error("H-formula inapplicable: {0}")]
    HFormulaInapplicable(String),

    #[error("no integer representative for the preimage ({0})")]
    NoIntegerRepresentative(String),
}

impl Error {
    /// True when the failure is a mathematical hypothesis violation rather
    /// than a data or parse problem. The CLI exits 2 on these, 1 otherwise.
    pub fn is_math_precondition(&self) -> bool {
        matches!(
            self,
            Error::IndexFormulaInapplicable(_)
                | Error::CornerRewritePrecondition(_)
                | Error::NotInImageOfP(_)
                | Error::NotWellDefined(_)
                | Error::HFormulaInapplicable(_)
        )
    }
}
