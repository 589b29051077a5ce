//! Knowledge-base question answering over a space-object catalogue with
//! KoPL programs: KB model, program language, executor, value parsing,
//! argument linking, data augmentation and evaluation.

pub mod augment;
pub mod eval;
pub mod exec;
pub mod kb;
pub mod linker;
pub mod program;
pub mod value_parse;

pub use exec::{execute_program, Answer, ExecConfig, ExecError, ExecResult, Executor};
pub use kb::{
    load_kb, Candidate, CandidateKind, Concept, Direction, Entity, EntityRef, KbError,
    KnowledgeBase, TypedValue, ValueKind,
};
pub use linker::{LexicalScorer, LinkError, Linker, Pipeline, PipelineError, QaResult, ScoringProvider, TemplateStore};
pub use program::{parse_program, serialize_program, FunctionCall, FunctionKind, Program, ProgramError, Sketch};
