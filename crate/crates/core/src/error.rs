use thiserror::Error;

use crate::codegen::GenerationFailed;
use crate::ir::StageError;
use crate::opt::ScheduleError;
use crate::records::RecordResidualized;

/// Any failure between staging and code generation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Record(#[from] RecordResidualized),
    #[error(transparent)]
    Codegen(#[from] GenerationFailed),
}
