//! Compile-time diagnostics.
//!
//! Diagnostics are values, not errors: `parse` and `check` return them in a
//! deterministic order (by file, then span, then code) so the refinement loop
//! can feed them back to a generator verbatim.

use crate::span::Span;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// Stable machine codes for every diagnostic the frontend can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagCode {
    SyntaxError,
    DuplicateClass,
    DuplicateMember,
    DuplicateParam,
    CyclicInheritance,
    UnknownName,
    TypeMismatch,
    ArityMismatch,
    AccessPrivate,
    AbstractInstantiation,
    AbstractBody,
    MissingReturn,
    MissingOverride,
    InvalidOverride,
    InvalidFieldType,
    StaticMisuse,
    VoidValue,
    MissingTestEntry,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagCode::SyntaxError => "SYNTAX_ERROR",
            DiagCode::DuplicateClass => "DUPLICATE_CLASS",
            DiagCode::DuplicateMember => "DUPLICATE_MEMBER",
            DiagCode::DuplicateParam => "DUPLICATE_PARAM",
            DiagCode::CyclicInheritance => "CYCLIC_INHERITANCE",
            DiagCode::UnknownName => "UNKNOWN_NAME",
            DiagCode::TypeMismatch => "TYPE_MISMATCH",
            DiagCode::ArityMismatch => "ARITY_MISMATCH",
            DiagCode::AccessPrivate => "ACCESS_PRIVATE",
            DiagCode::AbstractInstantiation => "ABSTRACT_INSTANTIATION",
            DiagCode::AbstractBody => "ABSTRACT_BODY",
            DiagCode::MissingReturn => "MISSING_RETURN",
            DiagCode::MissingOverride => "MISSING_OVERRIDE",
            DiagCode::InvalidOverride => "INVALID_OVERRIDE",
            DiagCode::InvalidFieldType => "INVALID_FIELD_TYPE",
            DiagCode::StaticMisuse => "STATIC_MISUSE",
            DiagCode::VoidValue => "VOID_VALUE",
            DiagCode::MissingTestEntry => "MISSING_TEST_ENTRY",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub file: String,
    pub span: Span,
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(file: &str, span: Span, code: DiagCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            file: file.to_string(),
            span,
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.file, self.span, self.code, self.message
        )
    }
}

/// Sort into the canonical reporting order: file, span, code.
pub fn sort_diags(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&a.file, a.span, a.code)
            .cmp(&(&b.file, b.span, b.code))
    });
}
