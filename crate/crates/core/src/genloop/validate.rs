//! Candidate validation: compile the candidate against the project, run it,
//! and classify per the two-condition validity definition — it compiles, and
//! no exception precedes the focal method's entry. Exceptions after the
//! focal entry leave validity intact.

use crate::diag::{DiagCode, Diagnostic};
use crate::lang::ast::{MethodRef, MethodSig, RetType, SourceUnit};
use crate::lang::checker::check;
use crate::lang::index::ProgramIndex;
use crate::lang::interp::{execute, ExecutionTrace, Limits};
use crate::lang::parser::parse;
use crate::span::Span;
use serde::{Deserialize, Serialize};

pub const TEST_CLASS: &str = "Test";
pub const TEST_METHOD: &str = "test";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ValidationOutcome {
    CompileError(Vec<Diagnostic>),
    ExceptionBeforeFocal(ExecutionTrace),
    Valid(ExecutionTrace),
}

impl ValidationOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationOutcome::Valid(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            ValidationOutcome::CompileError(_) => "compile-error",
            ValidationOutcome::ExceptionBeforeFocal(_) => "exception-before-focal",
            ValidationOutcome::Valid(_) => "valid",
        }
    }
}

pub fn test_entry() -> MethodRef {
    MethodRef {
        class: TEST_CLASS.to_string(),
        sig: MethodSig {
            name: TEST_METHOD.to_string(),
            params: Vec::new(),
        },
    }
}

/// Validate a candidate test source against a checked project.
pub fn validate(
    candidate: &str,
    project: &[SourceUnit],
    project_index: &ProgramIndex,
    focal: &MethodRef,
    limits: Limits,
) -> ValidationOutcome {
    let unit = match parse(candidate, "Test.sj") {
        Ok(unit) => unit,
        Err(diags) => return ValidationOutcome::CompileError(diags),
    };

    let entry_ok = unit.classes.iter().any(|c| {
        c.name == TEST_CLASS
            && c.methods.iter().any(|m| {
                m.name == TEST_METHOD
                    && m.params.is_empty()
                    && m.is_static
                    && m.return_type == RetType::Void
            })
    });
    if !entry_ok {
        return ValidationOutcome::CompileError(vec![Diagnostic::error(
            "Test.sj",
            Span::point(1, 1),
            DiagCode::MissingTestEntry,
            format!(
                "candidate must declare `public static void {TEST_METHOD}()` in class `{TEST_CLASS}`"
            ),
        )]);
    }

    let mut combined: Vec<SourceUnit> = project.to_vec();
    combined.push(unit.clone());
    let diags = check(&combined);
    if !diags.is_empty() {
        return ValidationOutcome::CompileError(diags);
    }

    let index = project_index.with_unit(&unit);
    let trace = match execute(&index, &test_entry(), focal, limits) {
        Ok(trace) => trace,
        Err(err) => {
            return ValidationOutcome::CompileError(vec![Diagnostic::error(
                "Test.sj",
                Span::point(1, 1),
                DiagCode::MissingTestEntry,
                err.to_string(),
            )])
        }
    };
    if trace.focal_reached {
        ValidationOutcome::Valid(trace)
    } else {
        ValidationOutcome::ExceptionBeforeFocal(trace)
    }
}
