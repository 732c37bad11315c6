//! Fixed value domains for the deterministic brute-force backend and for
//! exhaustive reachability checks.

use crate::lang::ast::{ConstValue, Expr, SourceUnit, Stmt, Type};
use crate::lang::interp::Value;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::rc::Rc;

pub const DEFAULT_INT_LO: i64 = -8;
pub const DEFAULT_INT_HI: i64 = 8;
pub const DEFAULT_CHARS: &str = "AEIOUYBCX";

/// Base string pool; project string constants are appended at build time.
pub const DEFAULT_STRINGS: &[&str] = &["", "A", "B", "E", "X", "AB", "AX", "EI", "AEI", "XXX"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDomains {
    pub ints: Vec<i64>,
    pub bools: Vec<bool>,
    pub chars: Vec<char>,
    pub strings: Vec<String>,
}

impl ValueDomains {
    /// Default domains plus every string constant of the project (literals
    /// in method bodies and field initializers), deduplicated, in a fixed
    /// deterministic order.
    pub fn for_project(project: &[SourceUnit]) -> Self {
        let mut strings: Vec<String> = DEFAULT_STRINGS.iter().map(|s| s.to_string()).collect();
        let mut extra: BTreeSet<String> = BTreeSet::new();
        for unit in project {
            for class in &unit.classes {
                for field in &class.fields {
                    if let Some(ConstValue::Str(s)) = &field.initializer {
                        extra.insert(s.clone());
                    }
                }
                for method in &class.methods {
                    if let Some(body) = &method.body {
                        collect_strings_block(body, &mut extra);
                    }
                }
            }
        }
        for s in extra {
            if !strings.contains(&s) {
                strings.push(s);
            }
        }
        ValueDomains {
            ints: (DEFAULT_INT_LO..=DEFAULT_INT_HI).collect(),
            bools: vec![false, true],
            chars: DEFAULT_CHARS.chars().collect(),
            strings,
        }
    }

    pub fn values_of(&self, ty: &Type) -> Vec<Value> {
        match ty {
            Type::Int => self.ints.iter().map(|v| Value::Int(*v)).collect(),
            Type::Bool => self.bools.iter().map(|v| Value::Bool(*v)).collect(),
            Type::Char => self.chars.iter().map(|v| Value::Char(*v)).collect(),
            Type::Str => self
                .strings
                .iter()
                .map(|v| Value::Str(Rc::new(v.clone())))
                .collect(),
            Type::Class(_) => Vec::new(),
        }
    }

    /// Total tuples for a parameter list; `None` when a non-enumerable
    /// (class-typed) parameter appears.
    pub fn tuple_count(&self, params: &[Type]) -> Option<usize> {
        let mut total: usize = 1;
        for ty in params {
            let n = self.values_of(ty).len();
            if n == 0 {
                return None;
            }
            total = total.checked_mul(n)?;
        }
        Some(total)
    }
}

fn collect_strings_block(block: &[Stmt], out: &mut BTreeSet<String>) {
    for stmt in block {
        match stmt {
            Stmt::VarDecl { init, .. } => {
                if let Some(e) = init {
                    collect_strings_expr(e, out);
                }
            }
            Stmt::Assign { target, value, .. } => {
                collect_strings_expr(target, out);
                collect_strings_expr(value, out);
            }
            Stmt::If {
                guard,
                then_block,
                else_block,
                ..
            } => {
                collect_strings_expr(guard, out);
                collect_strings_block(then_block, out);
                if let Some(els) = else_block {
                    collect_strings_block(els, out);
                }
            }
            Stmt::While { guard, body, .. } => {
                collect_strings_expr(guard, out);
                collect_strings_block(body, out);
            }
            Stmt::Return { value, .. } => {
                if let Some(e) = value {
                    collect_strings_expr(e, out);
                }
            }
            Stmt::ExprStmt { expr, .. } => collect_strings_expr(expr, out),
            Stmt::ReflectSet { value, .. } => collect_strings_expr(value, out),
        }
    }
}

fn collect_strings_expr(expr: &Expr, out: &mut BTreeSet<String>) {
    match expr {
        Expr::StrLit { value, .. } => {
            out.insert(value.clone());
        }
        Expr::FieldAccess { base, .. } => collect_strings_expr(base, out),
        Expr::Unary { expr, .. } => collect_strings_expr(expr, out),
        Expr::Binary { lhs, rhs, .. } => {
            collect_strings_expr(lhs, out);
            collect_strings_expr(rhs, out);
        }
        Expr::BuiltinCall { args, .. } => {
            for a in args {
                collect_strings_expr(a, out);
            }
        }
        Expr::Call { receiver, args, .. } | Expr::ReflectCall { receiver, args, .. } => {
            if let Some(r) = receiver {
                collect_strings_expr(r, out);
            }
            for a in args {
                collect_strings_expr(a, out);
            }
        }
        _ => {}
    }
}

/// Iterate all argument tuples over the domains in a fixed order: the last
/// parameter varies fastest.
pub struct TupleIter {
    domains: Vec<Vec<Value>>,
    indices: Vec<usize>,
    done: bool,
}

impl TupleIter {
    pub fn new(domains: &ValueDomains, params: &[Type]) -> TupleIter {
        let per: Vec<Vec<Value>> = params.iter().map(|t| domains.values_of(t)).collect();
        let done = per.iter().any(|v| v.is_empty());
        TupleIter {
            indices: vec![0; per.len()],
            domains: per,
            done,
        }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<Value>;

    fn next(&mut self) -> Option<Vec<Value>> {
        if self.done {
            return None;
        }
        let tuple: Vec<Value> = self
            .indices
            .iter()
            .zip(&self.domains)
            .map(|(i, d)| d[*i].clone())
            .collect();
        // Odometer increment, last position fastest.
        let mut pos = self.indices.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.indices[pos] += 1;
            if self.indices[pos] < self.domains[pos].len() {
                break;
            }
            self.indices[pos] = 0;
        }
        Some(tuple)
    }
}
