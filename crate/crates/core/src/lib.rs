//! pathgen: path-sensitive unit-test generation for the SJ subject language.
//!
//! The pipeline has four stages, mirrored by the top-level modules:
//!
//! * [`lang`] — parse, check, interpret, and measure coverage of SJ code;
//! * [`knowledge`] — extract type facts, per-method CFGs, loop-once path
//!   enumeration, and per-path data-flow dependencies into a persistent
//!   knowledge base;
//! * [`distill`] — reduce a (focal method, path) pair to the minimal calling
//!   context: an invocation plan, variable requirements, and resolved
//!   dependent-method constraints;
//! * [`genloop`] — render structured prompts, drive a generator backend, and
//!   validate/repair candidates in a bounded refinement loop;
//! * [`harness`] — project orchestration, focal selection, and reporting.

pub mod diag;
pub mod distill;
pub mod genloop;
pub mod harness;
pub mod knowledge;
pub mod lang;
pub mod span;

pub use diag::{DiagCode, Diagnostic, Severity};
pub use span::Span;
