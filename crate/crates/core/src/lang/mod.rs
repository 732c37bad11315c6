//! The SJ subject language: syntax, static semantics, interpretation, and
//! coverage instrumentation.

pub mod ast;
pub mod checker;
pub mod coverage;
pub mod index;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::{
    Access, Block, Builtin, ClassDecl, ConstValue, Expr, FieldDecl, FieldRef, MethodDecl,
    MethodRef, MethodSig, Param, RetType, SourceUnit, Stmt, Type,
};
pub use checker::check;
pub use coverage::{measure_coverage, CoverageReport};
pub use index::ProgramIndex;
pub use interp::{execute, ExecutionTrace, Limits, Outcome, TraceEvent, Value};
pub use parser::parse;
pub use pretty::{pretty_method, pretty_unit};

#[cfg(test)]
pub(crate) mod tests;
