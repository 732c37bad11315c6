//! Test generation and feedback-loop refinement: structured prompts,
//! pluggable generator backends, candidate validation, and the bounded
//! generate–validate–repair session.

pub mod backend;
pub mod brute;
pub mod domains;
pub mod emit;
pub mod external;
pub mod prompt;
pub mod scripted;
pub mod session;
pub mod validate;

pub use backend::{
    BackendDescriptor, BackendFailure, BackendRequest, FailureInfo, GeneratorBackend,
    RepairRequest, WIRE_FORMAT_VERSION,
};
pub use brute::{BruteForce, BruteForceBackend, BruteResult};
pub use domains::{TupleIter, ValueDomains};
pub use emit::{synthesize_test, FieldAssignment, TestSpec};
pub use external::{ExternalBackend, DEFAULT_TIMEOUT_SECS};
pub use prompt::{build_prompt, InfeasibleContext, PromptDocument};
pub use scripted::{Script, ScriptedBackend};
pub use session::{
    run_session, RefinementSession, Round, RoundOutcome, SessionConfig, SessionStatus,
    DEFAULT_MAX_ROUNDS,
};
pub use validate::{test_entry, validate, ValidationOutcome, TEST_CLASS, TEST_METHOD};

#[cfg(test)]
mod tests;
