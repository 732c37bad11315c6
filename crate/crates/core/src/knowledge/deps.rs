//! Per-path data-flow dependencies: which fields feed guards on a path, and
//! what each guard demands of the dependent calls whose results it reads.

use crate::knowledge::cfg::{Cfg, NodeKind, StmtOp};
use crate::knowledge::facts::TypeFacts;
use crate::knowledge::paths::CfgPath;
use crate::lang::ast::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignKind {
    Negative,
    Nonnegative,
}

/// The closed vocabulary of conditions a path can impose on a dependent
/// call's return value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReturnConstraint {
    Equals(ConstValue),
    NotEquals(ConstValue),
    Truthy,
    Falsy,
    /// Inclusive bounds; `i64::MIN`/`i64::MAX` mark unbounded ends.
    InIntRange { lo: i64, hi: i64 },
    Sign(SignKind),
}

impl ReturnConstraint {
    /// Does a constant return value satisfy this constraint?
    pub fn accepts(&self, v: &ConstValue) -> bool {
        match (self, v) {
            (ReturnConstraint::Truthy, ConstValue::Bool(b)) => *b,
            (ReturnConstraint::Falsy, ConstValue::Bool(b)) => !*b,
            (ReturnConstraint::Equals(c), v) => c == v,
            (ReturnConstraint::NotEquals(c), v) => c != v,
            (ReturnConstraint::InIntRange { lo, hi }, ConstValue::Int(i)) => lo <= i && i <= hi,
            (ReturnConstraint::Sign(SignKind::Negative), ConstValue::Int(i)) => *i < 0,
            (ReturnConstraint::Sign(SignKind::Nonnegative), ConstValue::Int(i)) => *i >= 0,
            _ => false,
        }
    }

    /// Does a runtime value satisfy this constraint?
    pub fn accepts_value(&self, v: &crate::lang::interp::Value) -> bool {
        use crate::lang::interp::Value;
        let as_const = match v {
            Value::Int(i) => ConstValue::Int(*i),
            Value::Bool(b) => ConstValue::Bool(*b),
            Value::Char(c) => ConstValue::Char(*c),
            Value::Str(s) => ConstValue::Str(s.as_ref().clone()),
            _ => return false,
        };
        self.accepts(&as_const)
    }

    pub fn render(&self) -> String {
        match self {
            ReturnConstraint::Truthy => "true".to_string(),
            ReturnConstraint::Falsy => "false".to_string(),
            ReturnConstraint::Equals(c) => format!("== {}", crate::lang::pretty::const_text(c)),
            ReturnConstraint::NotEquals(c) => {
                format!("!= {}", crate::lang::pretty::const_text(c))
            }
            ReturnConstraint::InIntRange { lo, hi } => match (*lo, *hi) {
                (i64::MIN, h) => format!("< {}", h as i128 + 1),
                (l, i64::MAX) => format!(">= {l}"),
                (l, h) => format!("in [{l}, {h}]"),
            },
            ReturnConstraint::Sign(SignKind::Negative) => "< 0".to_string(),
            ReturnConstraint::Sign(SignKind::Nonnegative) => ">= 0".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentVariable {
    pub field: FieldRef,
    pub access: Access,
    pub is_static: bool,
    pub declared_type: Type,
    /// The only role tracked: the field is read by a guard (or an expression
    /// feeding a guard) on the path.
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    #[serde(rename = "appears-in-guard")]
    AppearsInGuard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentCall {
    pub call_node: u32,
    pub callee_class: String,
    pub callee_sig: MethodSig,
    pub required_return: ReturnConstraint,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathDependencies {
    pub variables: Vec<DependentVariable>,
    pub calls: Vec<DependentCall>,
}

/// Collect the dependencies of one path: fields read by guards (one level of
/// local def-use chasing) and guard-feeding calls with the return constraint
/// each obligation imposes.
pub fn collect_dependencies(cfg: &Cfg, path: &CfgPath, facts: &TypeFacts) -> PathDependencies {
    let position: BTreeMap<u32, usize> = path
        .node_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();

    let mut variables: Vec<DependentVariable> = Vec::new();
    let mut calls: Vec<DependentCall> = Vec::new();

    for (branch_id, outcome) in &path.obligations {
        let NodeKind::Branch { info } = &cfg.node(*branch_id).kind else {
            continue;
        };
        let branch_pos = position.get(branch_id).copied().unwrap_or(usize::MAX);

        // Field reads: directly in the atom, plus one level through local
        // definitions reaching this branch along the path.
        let mut fields = info.field_reads.clone();
        for local in local_reads(&info.expr) {
            if let Some(def) = reaching_define(cfg, path, branch_pos, &local) {
                fields.extend(def.field_reads.clone());
            }
        }
        for field in fields {
            if variables.iter().any(|v| v.field == field) {
                continue;
            }
            if let Some(fact) = facts.field(&field.class, &field.name) {
                variables.push(DependentVariable {
                    field,
                    access: fact.access,
                    is_static: fact.is_static,
                    declared_type: fact.declared_type.clone(),
                    role: VarRole::AppearsInGuard,
                });
            }
        }

        // Calls: the atom (after one level of local substitution) must
        // constrain exactly one call temp in a supported shape.
        let required = *outcome != info.negated;
        let expr = substitute_locals(cfg, path, branch_pos, &info.expr);
        let temps = crate::knowledge::cfg::collect_temp_reads(&expr);
        if temps.len() == 1 {
            let temp = &temps[0];
            if let Some(constraint) = constraint_from_atom(&expr, temp, required) {
                if let Some((node_id, call)) = find_call(cfg, path, branch_pos, temp) {
                    if !calls.iter().any(|c| c.call_node == node_id) {
                        calls.push(DependentCall {
                            call_node: node_id,
                            callee_class: call.callee_class.clone(),
                            callee_sig: call.sig.clone(),
                            required_return: constraint,
                        });
                    }
                }
            }
        }
    }

    PathDependencies { variables, calls }
}

/// Locals (not temps, not the synthetic receiver) read by an expression.
fn local_reads(expr: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    walk_locals(expr, &mut out);
    out.sort();
    out.dedup();
    out
}

fn walk_locals(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Var { name, .. } => {
            if !name.starts_with('$') {
                out.push(name.clone());
            }
        }
        Expr::FieldAccess { .. } => {
            // Field reads are tracked separately; the base is not a local
            // read for dependency purposes.
        }
        Expr::Unary { expr, .. } => walk_locals(expr, out),
        Expr::Binary { lhs, rhs, .. } => {
            walk_locals(lhs, out);
            walk_locals(rhs, out);
        }
        Expr::BuiltinCall { args, .. } => {
            for a in args {
                walk_locals(a, out);
            }
        }
        Expr::Call { receiver, args, .. } | Expr::ReflectCall { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_locals(r, out);
            }
            for a in args {
                walk_locals(a, out);
            }
        }
        _ => {}
    }
}

struct DefineView<'a> {
    value: Option<&'a Expr>,
    field_reads: Vec<FieldRef>,
}

/// The last definition of `local` on the path before `before_pos`.
fn reaching_define<'a>(
    cfg: &'a Cfg,
    path: &CfgPath,
    before_pos: usize,
    local: &str,
) -> Option<DefineView<'a>> {
    for idx in (0..before_pos.min(path.node_ids.len())).rev() {
        let node = cfg.node(path.node_ids[idx]);
        if let NodeKind::Statement {
            op:
                StmtOp::Define {
                    name,
                    value,
                    field_reads,
                    ..
                },
            ..
        } = &node.kind
        {
            if name == local {
                return Some(DefineView {
                    value: value.as_ref(),
                    field_reads: field_reads.clone(),
                });
            }
        }
    }
    None
}

/// One-level substitution: locals whose reaching definition is exactly a
/// call temp are replaced by that temp.
fn substitute_locals(cfg: &Cfg, path: &CfgPath, before_pos: usize, expr: &Expr) -> Expr {
    match expr {
        Expr::Var { name, span } if !name.starts_with('$') => {
            if let Some(def) = reaching_define(cfg, path, before_pos, name) {
                if let Some(Expr::Var {
                    name: def_name, ..
                }) = def.value
                {
                    if def_name.starts_with("$t") {
                        return Expr::Var {
                            name: def_name.clone(),
                            span: *span,
                        };
                    }
                }
            }
            expr.clone()
        }
        Expr::Unary { op, expr: inner, span } => Expr::Unary {
            op: *op,
            expr: Box::new(substitute_locals(cfg, path, before_pos, inner)),
            span: *span,
        },
        Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
            op: *op,
            lhs: Box::new(substitute_locals(cfg, path, before_pos, lhs)),
            rhs: Box::new(substitute_locals(cfg, path, before_pos, rhs)),
            span: *span,
        },
        other => other.clone(),
    }
}

/// The call node on the path (before `before_pos`) whose result is `temp`.
fn find_call<'a>(
    cfg: &'a Cfg,
    path: &CfgPath,
    before_pos: usize,
    temp: &str,
) -> Option<(u32, &'a crate::knowledge::cfg::CallInfo)> {
    for idx in (0..before_pos.min(path.node_ids.len())).rev() {
        let node = cfg.node(path.node_ids[idx]);
        if let NodeKind::Call { info } = &node.kind {
            if info.result.as_deref() == Some(temp) {
                return Some((node.id, info));
            }
        }
    }
    None
}

/// Extract a return constraint from a guard atom over a single call temp.
/// `required` is the value the whole atom must take on this path.
fn constraint_from_atom(expr: &Expr, temp: &str, required: bool) -> Option<ReturnConstraint> {
    let is_subject =
        |e: &Expr| matches!(e, Expr::Var { name, .. } if name == temp);
    constraint_on_subject(expr, &is_subject, required)
}

/// Extract the constraint a guard atom imposes on a subject subexpression
/// (a call temp or a field access) when the atom must evaluate to
/// `required`. Shapes outside the closed vocabulary yield `None`.
pub fn constraint_on_subject(
    expr: &Expr,
    is_subject: &dyn Fn(&Expr) -> bool,
    required: bool,
) -> Option<ReturnConstraint> {
    match expr {
        e if is_subject(e) => Some(if required {
            ReturnConstraint::Truthy
        } else {
            ReturnConstraint::Falsy
        }),
        Expr::Unary {
            op: UnOp::Not,
            expr: inner,
            ..
        } => constraint_on_subject(inner, is_subject, !required),
        Expr::Binary { op, lhs, rhs, .. } => {
            let (const_side, flipped) = match (lhs.as_ref(), rhs.as_ref()) {
                (l, other) if is_subject(l) => (other, false),
                (other, r) if is_subject(r) => (other, true),
                _ => return None,
            };
            let constant = const_of(const_side)?;
            match op {
                BinOp::Eq | BinOp::Ne => {
                    let eq_required = (*op == BinOp::Eq) == required;
                    Some(match (&constant, eq_required) {
                        (ConstValue::Bool(true), true) | (ConstValue::Bool(false), false) => {
                            ReturnConstraint::Truthy
                        }
                        (ConstValue::Bool(true), false) | (ConstValue::Bool(false), true) => {
                            ReturnConstraint::Falsy
                        }
                        (_, true) => ReturnConstraint::Equals(constant.clone()),
                        (_, false) => ReturnConstraint::NotEquals(constant.clone()),
                    })
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let c = match constant {
                        ConstValue::Int(i) => i,
                        _ => return None,
                    };
                    // Normalize to `temp OP c`.
                    let op = if flipped {
                        match op {
                            BinOp::Lt => BinOp::Gt,
                            BinOp::Le => BinOp::Ge,
                            BinOp::Gt => BinOp::Lt,
                            BinOp::Ge => BinOp::Le,
                            other => *other,
                        }
                    } else {
                        *op
                    };
                    // Apply the required outcome.
                    let op = if required {
                        op
                    } else {
                        match op {
                            BinOp::Lt => BinOp::Ge,
                            BinOp::Le => BinOp::Gt,
                            BinOp::Gt => BinOp::Le,
                            BinOp::Ge => BinOp::Lt,
                            other => other,
                        }
                    };
                    Some(match op {
                        BinOp::Lt if c == 0 => ReturnConstraint::Sign(SignKind::Negative),
                        BinOp::Ge if c == 0 => ReturnConstraint::Sign(SignKind::Nonnegative),
                        BinOp::Lt => ReturnConstraint::InIntRange {
                            lo: i64::MIN,
                            hi: c.saturating_sub(1),
                        },
                        BinOp::Le => ReturnConstraint::InIntRange {
                            lo: i64::MIN,
                            hi: c,
                        },
                        BinOp::Gt => ReturnConstraint::InIntRange {
                            lo: c.saturating_add(1),
                            hi: i64::MAX,
                        },
                        BinOp::Ge => ReturnConstraint::InIntRange {
                            lo: c,
                            hi: i64::MAX,
                        },
                        _ => unreachable!(),
                    })
                }
                _ => None,
            }
        }
        _ => None,
    }
}

fn const_of(expr: &Expr) -> Option<ConstValue> {
    match expr {
        Expr::IntLit { value, .. } => Some(ConstValue::Int(*value)),
        Expr::BoolLit { value, .. } => Some(ConstValue::Bool(*value)),
        Expr::CharLit { value, .. } => Some(ConstValue::Char(*value)),
        Expr::StrLit { value, .. } => Some(ConstValue::Str(value.clone())),
        Expr::Unary {
            op: UnOp::Neg,
            expr,
            ..
        } => match expr.as_ref() {
            Expr::IntLit { value, .. } => Some(ConstValue::Int(-*value)),
            _ => None,
        },
        _ => None,
    }
}

/// Whether any guard on the path reads a built-in result (data flowing from
/// a library routine into a branch decision).
pub fn path_has_guard_builtin(cfg: &Cfg, path: &CfgPath) -> bool {
    path.obligations.iter().any(|(id, _)| {
        if let NodeKind::Branch { info } = &cfg.node(*id).kind {
            expr_has_builtin(&info.expr)
        } else {
            false
        }
    })
}

fn expr_has_builtin(expr: &Expr) -> bool {
    match expr {
        Expr::BuiltinCall { .. } => true,
        Expr::Unary { expr, .. } => expr_has_builtin(expr),
        Expr::Binary { lhs, rhs, .. } => expr_has_builtin(lhs) || expr_has_builtin(rhs),
        Expr::FieldAccess { base, .. } => expr_has_builtin(base),
        Expr::Call { receiver, args, .. } | Expr::ReflectCall { receiver, args, .. } => {
            receiver.as_ref().map(|r| expr_has_builtin(r)).unwrap_or(false)
                || args.iter().any(expr_has_builtin)
        }
        _ => false,
    }
}

/// Evaluate the constant return value of a path, tracking constant-valued
/// locals along it. `None` means the value is not statically known.
pub fn path_return_const(cfg: &Cfg, path: &CfgPath) -> Option<ConstValue> {
    let mut consts: BTreeMap<String, Option<ConstValue>> = BTreeMap::new();
    for id in &path.node_ids {
        match &cfg.node(*id).kind {
            NodeKind::Statement { op, .. } => match op {
                StmtOp::Define { name, value, .. } => {
                    let v = value.as_ref().and_then(|e| const_eval(e, &consts));
                    consts.insert(name.clone(), v);
                }
                StmtOp::Return { value } => {
                    return value.as_ref().and_then(|e| const_eval(e, &consts));
                }
                _ => {}
            },
            NodeKind::Call { info } => {
                if let Some(result) = &info.result {
                    consts.insert(result.clone(), None);
                }
            }
            _ => {}
        }
    }
    None
}

fn const_eval(expr: &Expr, consts: &BTreeMap<String, Option<ConstValue>>) -> Option<ConstValue> {
    match expr {
        Expr::IntLit { value, .. } => Some(ConstValue::Int(*value)),
        Expr::BoolLit { value, .. } => Some(ConstValue::Bool(*value)),
        Expr::CharLit { value, .. } => Some(ConstValue::Char(*value)),
        Expr::StrLit { value, .. } => Some(ConstValue::Str(value.clone())),
        Expr::Var { name, .. } => consts.get(name).cloned().flatten(),
        Expr::Unary { op, expr, .. } => {
            let v = const_eval(expr, consts)?;
            match (op, v) {
                (UnOp::Not, ConstValue::Bool(b)) => Some(ConstValue::Bool(!b)),
                (UnOp::Neg, ConstValue::Int(i)) => Some(ConstValue::Int(i.wrapping_neg())),
                _ => None,
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let l = const_eval(lhs, consts)?;
            let r = const_eval(rhs, consts)?;
            match (op, l, r) {
                (BinOp::Add, ConstValue::Int(a), ConstValue::Int(b)) => {
                    Some(ConstValue::Int(a.wrapping_add(b)))
                }
                (BinOp::Sub, ConstValue::Int(a), ConstValue::Int(b)) => {
                    Some(ConstValue::Int(a.wrapping_sub(b)))
                }
                (BinOp::Mul, ConstValue::Int(a), ConstValue::Int(b)) => {
                    Some(ConstValue::Int(a.wrapping_mul(b)))
                }
                (BinOp::Eq, a, b) => Some(ConstValue::Bool(a == b)),
                (BinOp::Ne, a, b) => Some(ConstValue::Bool(a != b)),
                (BinOp::Lt, ConstValue::Int(a), ConstValue::Int(b)) => Some(ConstValue::Bool(a < b)),
                (BinOp::Le, ConstValue::Int(a), ConstValue::Int(b)) => {
                    Some(ConstValue::Bool(a <= b))
                }
                (BinOp::Gt, ConstValue::Int(a), ConstValue::Int(b)) => Some(ConstValue::Bool(a > b)),
                (BinOp::Ge, ConstValue::Int(a), ConstValue::Int(b)) => {
                    Some(ConstValue::Bool(a >= b))
                }
                (BinOp::And, ConstValue::Bool(a), ConstValue::Bool(b)) => {
                    Some(ConstValue::Bool(a && b))
                }
                (BinOp::Or, ConstValue::Bool(a), ConstValue::Bool(b)) => {
                    Some(ConstValue::Bool(a || b))
                }
                _ => None,
            }
        }
        _ => None,
    }
}
