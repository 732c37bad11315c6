//! Knowledge extraction: type facts, control-flow graphs, loop-once path
//! enumeration, data-flow dependencies, and the persistent knowledge base.

pub mod cfg;
pub mod deps;
pub mod facts;
pub mod kb;
pub mod paths;
pub mod persist;

pub use cfg::{build_cfg, BranchInfo, CallInfo, Cfg, CfgEdge, CfgNode, EdgeLabel, NodeKind, StmtOp};
pub use deps::{
    collect_dependencies, DependentCall, DependentVariable, PathDependencies, ReturnConstraint,
    SignKind,
};
pub use facts::{extract_type_facts, DispatchError, TypeFacts};
pub use kb::{build_kb, CallEdge, KbError, KnowledgeBase};
pub use paths::{enumerate_paths, CfgPath, PathSet, DEFAULT_PATH_CAP};
pub use persist::{load_kb, save_kb, PersistError, FORMAT_VERSION};

#[cfg(test)]
pub(crate) mod tests;
