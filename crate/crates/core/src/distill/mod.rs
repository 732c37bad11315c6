//! Context knowledge distillation: invocation planning, dependent-variable
//! requirements, and recursive dependent-method constraint resolution,
//! assembled into the minimal per-path context for generation.

pub mod candidates;
pub mod context;
pub mod invocation;
pub mod predicate;
pub mod resolve;
pub mod variables;

pub use candidates::{
    candidate_paths_for_return, derive_param_predicate, rank_paths, DerivedPredicate,
};
pub use context::{distill, parse_method_id, DistillError, DistilledContext};
pub use invocation::{plan_invocation, InvocationKind, InvocationPlan, PlanError, ReceiverRecipe};
pub use predicate::{intersect_all, intersect_predicates, ParamConstraint, ParamPredicate};
pub use resolve::{
    resolve_dependent_method, ResolutionResult, ResolutionStatus, DEFAULT_RECURSION_DEPTH,
};
pub use variables::{collect_variable_requirements, SetVia, VariableRequirement};

#[cfg(test)]
mod tests;
