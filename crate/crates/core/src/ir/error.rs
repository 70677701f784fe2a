use thiserror::Error;

/// Errors raised while a program is being staged.
///
/// All of these mean the DSL program itself is ill-formed; they surface
/// before any optimization or code generation runs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageError {
    #[error("type mismatch in {op}: {detail}")]
    TypeMismatch { op: String, detail: String },

    #[error("conditional branches disagree: then yields {then_ty}, else yields {else_ty}")]
    BranchTypeMismatch { then_ty: String, else_ty: String },

    #[error("write to immutable value {target}: {detail}")]
    WriteToImmutable { target: String, detail: String },

    #[error("illegal sharing between mutable objects at {stmt}: {detail}")]
    IllegalSharing { stmt: String, detail: String },

    #[error("unknown field `{field}` on {ty}")]
    UnknownField { field: String, ty: String },

    #[error("record shape mismatch: {left} vs {right}")]
    RecordShapeMismatch { left: String, right: String },

    #[error("symbol {sym} used outside the scope that defines it")]
    ScopeEscape { sym: String },
}

impl StageError {
    pub(crate) fn mismatch(op: impl Into<String>, detail: impl Into<String>) -> Self {
        StageError::TypeMismatch {
            op: op.into(),
            detail: detail.into(),
        }
    }
}
