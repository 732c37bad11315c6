//! Candidate paths through a dependent method and the parameter predicates
//! that drive them.

use crate::distill::predicate::{Atom, ParamPredicate};
use crate::knowledge::cfg::{Cfg, NodeKind, StmtOp, SYNTHETIC_THIS};
use crate::knowledge::deps::{path_return_const, ReturnConstraint};
use crate::knowledge::facts::TypeFacts;
use crate::knowledge::kb::KnowledgeBase;
use crate::knowledge::paths::CfgPath;
use crate::lang::ast::*;
use std::collections::BTreeSet;

/// Paths of `callee` whose return can satisfy `rc`: constant returns are
/// checked exactly, non-constant returns are kept conservatively.
pub fn candidate_paths_for_return(
    callee: &MethodRef,
    rc: &ReturnConstraint,
    kb: &KnowledgeBase,
) -> Vec<usize> {
    let Ok(cfg) = kb.cfg_of(callee) else {
        return Vec::new();
    };
    let Ok(set) = kb.paths_of(callee) else {
        return Vec::new();
    };
    set.paths
        .iter()
        .enumerate()
        .filter(|(_, path)| match path_return_const(cfg, path) {
            Some(c) => rc.accepts(&c),
            None => true,
        })
        .map(|(i, _)| i)
        .collect()
}

/// Stable sort by the simplicity key: (dependent methods, dependent
/// variables, path node count); enumeration order breaks ties.
pub fn rank_paths(callee: &MethodRef, candidates: &[usize], kb: &KnowledgeBase) -> Vec<usize> {
    let mut keyed: Vec<(usize, (usize, usize, usize))> = candidates
        .iter()
        .map(|&i| {
            let deps = kb
                .deps_of(callee, i)
                .map(|d| (d.calls.len(), d.variables.len()))
                .unwrap_or((usize::MAX, usize::MAX));
            let nodes = kb
                .path_of(callee, i)
                .map(|p| p.node_ids.len())
                .unwrap_or(usize::MAX);
            (i, (deps.0, deps.1, nodes))
        })
        .collect();
    keyed.sort_by_key(|(_, key)| *key);
    keyed.into_iter().map(|(i, _)| i).collect()
}

/// The outcome of predicate derivation for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedPredicate {
    pub predicate: ParamPredicate,
    /// Guards the closed vocabulary cannot express, rendered verbatim for
    /// the generator to reason about. Empty means fully resolved.
    pub unresolved_guards: Vec<String>,
}

impl DerivedPredicate {
    pub fn is_resolved(&self) -> bool {
        self.unresolved_guards.is_empty() && !self.predicate.is_empty()
    }
}

/// Derive the parameter predicate that sends `callee` down `path`.
///
/// Each obligation's atom contributes either a predicate atom over a
/// parameter (comparisons with constants, `indexOf`/`length` patterns over
/// constant strings, boolean parameters), a no-op when the atom constrains a
/// dependent call result (handled by recursion), or an unresolved guard.
pub fn derive_param_predicate(
    callee_decl_params: &[(String, Type)],
    cfg: &Cfg,
    path: &CfgPath,
    facts: &TypeFacts,
) -> DerivedPredicate {
    let mut predicate = ParamPredicate::unconstrained(callee_decl_params);
    let mut unresolved = Vec::new();

    for (node, outcome) in &path.obligations {
        let NodeKind::Branch { info } = &cfg.node(*node).kind else {
            continue;
        };
        let required = *outcome != info.negated;

        // Call-result atoms are the child resolutions' job.
        if !info.temp_reads.is_empty() {
            continue;
        }

        let expr = resolve_final_fields(&info.expr, facts, &cfg.method.class);
        match atom_for_params(&expr, callee_decl_params, cfg, path, *node, required) {
            AtomOutcome::Atoms(atoms) => {
                for (idx, atom) in atoms {
                    predicate.conjoin(idx, atom);
                }
            }
            AtomOutcome::Trivial => {}
            AtomOutcome::Unsupported => {
                let text = if required {
                    info.guard_text()
                } else {
                    format!("!({})", info.guard_text())
                };
                unresolved.push(text);
            }
        }
    }

    DerivedPredicate {
        predicate,
        unresolved_guards: unresolved,
    }
}

/// Substitute reads of effectively final fields (constant initializer and
/// never stored anywhere in the project) with their constant values.
fn resolve_final_fields(expr: &Expr, facts: &TypeFacts, _owner: &str) -> Expr {
    match expr {
        Expr::FieldAccess { base, name, span } => {
            let class = match base.as_ref() {
                Expr::Var { name: b, .. } if b == SYNTHETIC_THIS => None,
                Expr::Var { name: b, .. } => Some(b.clone()),
                _ => None,
            };
            let fact = match &class {
                Some(c) => facts.field(c, name),
                None => facts
                    .fields
                    .iter()
                    .find(|f| f.name == *name && f.effectively_final),
            };
            if let Some(fact) = fact {
                if fact.effectively_final {
                    if let Some(init) = &fact.initializer {
                        return const_to_expr(init, *span);
                    }
                }
            }
            expr.clone()
        }
        Expr::Unary { op, expr: inner, span } => Expr::Unary {
            op: *op,
            expr: Box::new(resolve_final_fields(inner, facts, _owner)),
            span: *span,
        },
        Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
            op: *op,
            lhs: Box::new(resolve_final_fields(lhs, facts, _owner)),
            rhs: Box::new(resolve_final_fields(rhs, facts, _owner)),
            span: *span,
        },
        Expr::BuiltinCall {
            builtin,
            args,
            span,
        } => Expr::BuiltinCall {
            builtin: *builtin,
            args: args
                .iter()
                .map(|a| resolve_final_fields(a, facts, _owner))
                .collect(),
            span: *span,
        },
        other => other.clone(),
    }
}

fn const_to_expr(c: &ConstValue, span: crate::span::Span) -> Expr {
    match c {
        ConstValue::Int(v) => Expr::IntLit { value: *v, span },
        ConstValue::Bool(v) => Expr::BoolLit { value: *v, span },
        ConstValue::Char(v) => Expr::CharLit { value: *v, span },
        ConstValue::Str(v) => Expr::StrLit {
            value: v.clone(),
            span,
        },
    }
}

enum AtomOutcome {
    Atoms(Vec<(usize, Atom)>),
    /// The atom is constant-true under the required outcome (e.g. a
    /// substituted constant guard); nothing to add.
    Trivial,
    Unsupported,
}

fn atom_for_params(
    expr: &Expr,
    params: &[(String, Type)],
    cfg: &Cfg,
    path: &CfgPath,
    branch_node: u32,
    required: bool,
) -> AtomOutcome {
    // One level of local def-use: a local defined from a parameter or a
    // constant stands in for its definition.
    let expr = substitute_simple_locals(expr, cfg, path, branch_node, params);
    atom_for_expr(&expr, params, required)
}

fn atom_for_expr(expr: &Expr, params: &[(String, Type)], required: bool) -> AtomOutcome {
    let param_index = |name: &str| params.iter().position(|(n, _)| n == name);

    match expr {
        // Bare boolean parameter.
        Expr::Var { name, .. } => match param_index(name) {
            Some(i) => AtomOutcome::Atoms(vec![(i, Atom::BoolEq(required))]),
            None => AtomOutcome::Unsupported,
        },
        Expr::BoolLit { value, .. } => {
            if *value == required {
                AtomOutcome::Trivial
            } else {
                // Statically impossible edge; the predicate cannot express
                // it, so surface the guard.
                AtomOutcome::Unsupported
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            binary_atom(*op, lhs, rhs, params, required)
        }
        _ => AtomOutcome::Unsupported,
    }
}

fn binary_atom(
    op: BinOp,
    lhs: &Expr,
    rhs: &Expr,
    params: &[(String, Type)],
    required: bool,
) -> AtomOutcome {
    let param_index = |name: &str| params.iter().position(|(n, _)| n == name);

    // Normalize to subject-op-constant.
    let (subject, constant, op) = if let Some(c) = const_of_expr(rhs) {
        (lhs, c, op)
    } else if let Some(c) = const_of_expr(lhs) {
        (rhs, c, flip(op))
    } else {
        return AtomOutcome::Unsupported;
    };

    // Constant-vs-constant guards fold away entirely.
    if let Some(l) = const_of_expr(subject) {
        return match eval_const_cmp(op, &l, &constant) {
            Some(v) if v == required => AtomOutcome::Trivial,
            Some(_) => AtomOutcome::Unsupported,
            None => AtomOutcome::Unsupported,
        };
    }

    match subject {
        // `p OP const`
        Expr::Var { name, .. } => {
            let Some(idx) = param_index(name) else {
                return AtomOutcome::Unsupported;
            };
            let ty = &params[idx].1;
            match (ty, &constant) {
                (Type::Int, ConstValue::Int(c)) => int_atom(idx, op, *c, required),
                (Type::Bool, ConstValue::Bool(b)) => {
                    let eq = match op {
                        BinOp::Eq => required == *b,
                        BinOp::Ne => required != *b,
                        _ => return AtomOutcome::Unsupported,
                    };
                    AtomOutcome::Atoms(vec![(idx, Atom::BoolEq(eq))])
                }
                (Type::Char, ConstValue::Char(c)) => {
                    let set: BTreeSet<char> = [*c].into_iter().collect();
                    let within = match op {
                        BinOp::Eq => required,
                        BinOp::Ne => !required,
                        _ => return AtomOutcome::Unsupported,
                    };
                    AtomOutcome::Atoms(vec![(
                        idx,
                        if within {
                            Atom::CharIn(set)
                        } else {
                            Atom::CharNotIn(set)
                        },
                    )])
                }
                (Type::Str, ConstValue::Str(s)) => match op {
                    BinOp::Eq if required => AtomOutcome::Atoms(vec![(idx, Atom::StrEq(s.clone()))]),
                    BinOp::Ne if !required => AtomOutcome::Atoms(vec![(idx, Atom::StrEq(s.clone()))]),
                    // Negative string equality is outside the vocabulary.
                    _ => AtomOutcome::Unsupported,
                },
                _ => AtomOutcome::Unsupported,
            }
        }
        // `length(p) OP const`
        Expr::BuiltinCall {
            builtin: Builtin::Length,
            args,
            ..
        } => {
            let Expr::Var { name, .. } = &args[0] else {
                return AtomOutcome::Unsupported;
            };
            let Some(idx) = param_index(name) else {
                return AtomOutcome::Unsupported;
            };
            let ConstValue::Int(c) = constant else {
                return AtomOutcome::Unsupported;
            };
            match int_atom(idx, op, c, required) {
                AtomOutcome::Atoms(atoms) => AtomOutcome::Atoms(
                    atoms
                        .into_iter()
                        .map(|(i, a)| {
                            let len_atom = match a {
                                Atom::IntInterval { lo, hi } => Atom::StrLenInterval { lo, hi },
                                Atom::IntNe(v) => Atom::StrLenNe(v),
                                other => other,
                            };
                            (i, len_atom)
                        })
                        .collect(),
                ),
                other => other,
            }
        }
        // `indexOf(constant-string, p) OP const`
        Expr::BuiltinCall {
            builtin: Builtin::IndexOf,
            args,
            ..
        } => {
            let Some(ConstValue::Str(source)) = const_of_expr(&args[0]) else {
                return AtomOutcome::Unsupported;
            };
            let Expr::Var { name, .. } = &args[1] else {
                return AtomOutcome::Unsupported;
            };
            let Some(idx) = param_index(name) else {
                return AtomOutcome::Unsupported;
            };
            let ConstValue::Int(c) = constant else {
                return AtomOutcome::Unsupported;
            };
            let set: BTreeSet<char> = source.chars().collect();
            // Membership is `indexOf(S, p) != -1` and its equivalents.
            let member = match (op, c) {
                (BinOp::Ne, -1) => required,
                (BinOp::Eq, -1) => !required,
                (BinOp::Ge, 0) => required,
                (BinOp::Lt, 0) => !required,
                _ => return AtomOutcome::Unsupported,
            };
            AtomOutcome::Atoms(vec![(
                idx,
                if member {
                    Atom::CharIn(set)
                } else {
                    Atom::CharNotIn(set)
                },
            )])
        }
        _ => AtomOutcome::Unsupported,
    }
}

fn int_atom(idx: usize, op: BinOp, c: i64, required: bool) -> AtomOutcome {
    let op = if required {
        op
    } else {
        match op {
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            other => other,
        }
    };
    let atom = match op {
        BinOp::Lt => Atom::IntInterval {
            lo: i64::MIN,
            hi: c.saturating_sub(1),
        },
        BinOp::Le => Atom::IntInterval {
            lo: i64::MIN,
            hi: c,
        },
        BinOp::Gt => Atom::IntInterval {
            lo: c.saturating_add(1),
            hi: i64::MAX,
        },
        BinOp::Ge => Atom::IntInterval {
            lo: c,
            hi: i64::MAX,
        },
        BinOp::Eq => Atom::IntInterval { lo: c, hi: c },
        BinOp::Ne => Atom::IntNe(c),
        _ => return AtomOutcome::Unsupported,
    };
    AtomOutcome::Atoms(vec![(idx, atom)])
}

fn flip(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        other => other,
    }
}

/// How the required return constraint binds to a candidate path's return
/// expression when that expression is not a checked constant.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnBinding {
    /// Constant return already accepted by the candidate filter.
    ConstOk,
    /// The constraint is expressible as predicate atoms over parameters.
    Atoms(Vec<(usize, Atom)>),
    /// The return value is a call result: the constraint recurses into that
    /// call (the temp names the producing call node's result).
    Child { temp: String },
    /// Outside the closed vocabulary; delegated with the rendered guard.
    Unsupported(String),
    /// A (substituted) constant return violates the constraint.
    Contradiction,
}

/// Bind `rc` to the path's return expression.
pub fn bind_return(
    params: &[(String, Type)],
    cfg: &Cfg,
    path: &CfgPath,
    rc: &ReturnConstraint,
    facts: &TypeFacts,
) -> ReturnBinding {
    if let Some(c) = path_return_const(cfg, path) {
        return if rc.accepts(&c) {
            ReturnBinding::ConstOk
        } else {
            ReturnBinding::Contradiction
        };
    }
    let Some((return_node, return_expr)) = path_return_expr(cfg, path) else {
        return ReturnBinding::Unsupported("void return".to_string());
    };

    // One level of local def-use: a returned local stands in for its
    // reaching definition.
    let expr = inline_return_local(cfg, path, return_node, return_expr);
    let expr = substitute_simple_locals(&expr, cfg, path, return_node, params);
    let expr = resolve_final_fields(&expr, facts, &cfg.method.class);

    if let Some(c) = const_of_expr(&expr) {
        return if rc.accepts(&c) {
            ReturnBinding::ConstOk
        } else {
            ReturnBinding::Contradiction
        };
    }
    if let Expr::Var { name, .. } = &expr {
        if name.starts_with("$t") {
            return ReturnBinding::Child { temp: name.clone() };
        }
        if let Some(idx) = params.iter().position(|(p, _)| p == name) {
            return match rc_atoms(rc, &params[idx].1) {
                Some(atoms) => {
                    ReturnBinding::Atoms(atoms.into_iter().map(|a| (idx, a)).collect())
                }
                None => ReturnBinding::Unsupported(render_return(&expr, rc)),
            };
        }
    }
    // Boolean-shaped returns under truthy/falsy map onto guard atoms.
    let required = match rc {
        ReturnConstraint::Truthy => Some(true),
        ReturnConstraint::Falsy => Some(false),
        ReturnConstraint::Equals(ConstValue::Bool(b)) => Some(*b),
        ReturnConstraint::NotEquals(ConstValue::Bool(b)) => Some(!*b),
        _ => None,
    };
    if let Some(required) = required {
        match atom_for_expr(&expr, params, required) {
            AtomOutcome::Atoms(atoms) => return ReturnBinding::Atoms(atoms),
            AtomOutcome::Trivial => return ReturnBinding::ConstOk,
            AtomOutcome::Unsupported => {}
        }
    }
    ReturnBinding::Unsupported(render_return(&expr, rc))
}

fn render_return(expr: &Expr, rc: &ReturnConstraint) -> String {
    format!(
        "return value `{}` must be {}",
        crate::lang::pretty::expr_text(expr),
        rc.render()
    )
}

/// The return statement node and expression the path ends with.
fn path_return_expr<'a>(cfg: &'a Cfg, path: &CfgPath) -> Option<(u32, &'a Expr)> {
    for id in path.node_ids.iter().rev() {
        if let NodeKind::Statement {
            op: StmtOp::Return { value },
            ..
        } = &cfg.node(*id).kind
        {
            return value.as_ref().map(|e| (*id, e));
        }
    }
    None
}

/// Replace a returned local with its reaching definition (any shape), one
/// level deep.
fn inline_return_local(cfg: &Cfg, path: &CfgPath, return_node: u32, expr: &Expr) -> Expr {
    let Expr::Var { name, .. } = expr else {
        return expr.clone();
    };
    if name.starts_with('$') {
        return expr.clone();
    }
    let return_pos = path
        .node_ids
        .iter()
        .position(|id| *id == return_node)
        .unwrap_or(path.node_ids.len());
    for idx in (0..return_pos).rev() {
        if let NodeKind::Statement {
            op: StmtOp::Define { name: n, value, .. },
            ..
        } = &cfg.node(path.node_ids[idx]).kind
        {
            if n == name {
                return value.clone().unwrap_or_else(|| expr.clone());
            }
        }
    }
    expr.clone()
}

/// Convert a return constraint into predicate atoms for a parameter of the
/// given type.
fn rc_atoms(rc: &ReturnConstraint, ty: &Type) -> Option<Vec<Atom>> {
    use crate::knowledge::deps::SignKind;
    Some(match (rc, ty) {
        (ReturnConstraint::Truthy, Type::Bool) => vec![Atom::BoolEq(true)],
        (ReturnConstraint::Falsy, Type::Bool) => vec![Atom::BoolEq(false)],
        (ReturnConstraint::Equals(ConstValue::Int(c)), Type::Int) => {
            vec![Atom::IntInterval { lo: *c, hi: *c }]
        }
        (ReturnConstraint::Equals(ConstValue::Bool(b)), Type::Bool) => vec![Atom::BoolEq(*b)],
        (ReturnConstraint::Equals(ConstValue::Char(c)), Type::Char) => {
            vec![Atom::CharIn([*c].into_iter().collect())]
        }
        (ReturnConstraint::Equals(ConstValue::Str(s)), Type::Str) => vec![Atom::StrEq(s.clone())],
        (ReturnConstraint::NotEquals(ConstValue::Int(c)), Type::Int) => vec![Atom::IntNe(*c)],
        (ReturnConstraint::NotEquals(ConstValue::Bool(b)), Type::Bool) => vec![Atom::BoolEq(!*b)],
        (ReturnConstraint::NotEquals(ConstValue::Char(c)), Type::Char) => {
            vec![Atom::CharNotIn([*c].into_iter().collect())]
        }
        (ReturnConstraint::InIntRange { lo, hi }, Type::Int) => {
            vec![Atom::IntInterval { lo: *lo, hi: *hi }]
        }
        (ReturnConstraint::Sign(SignKind::Negative), Type::Int) => vec![Atom::IntInterval {
            lo: i64::MIN,
            hi: -1,
        }],
        (ReturnConstraint::Sign(SignKind::Nonnegative), Type::Int) => vec![Atom::IntInterval {
            lo: 0,
            hi: i64::MAX,
        }],
        _ => return None,
    })
}

fn const_of_expr(expr: &Expr) -> Option<ConstValue> {
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

fn eval_const_cmp(op: BinOp, l: &ConstValue, r: &ConstValue) -> Option<bool> {
    match (op, l, r) {
        (BinOp::Eq, a, b) => Some(a == b),
        (BinOp::Ne, a, b) => Some(a != b),
        (BinOp::Lt, ConstValue::Int(a), ConstValue::Int(b)) => Some(a < b),
        (BinOp::Le, ConstValue::Int(a), ConstValue::Int(b)) => Some(a <= b),
        (BinOp::Gt, ConstValue::Int(a), ConstValue::Int(b)) => Some(a > b),
        (BinOp::Ge, ConstValue::Int(a), ConstValue::Int(b)) => Some(a >= b),
        _ => None,
    }
}

/// Replace locals whose reaching definition on the path is a bare parameter
/// or a constant. A parameter reassigned before the branch disqualifies
/// itself (the substituted value would be stale).
fn substitute_simple_locals(
    expr: &Expr,
    cfg: &Cfg,
    path: &CfgPath,
    branch_node: u32,
    params: &[(String, Type)],
) -> Expr {
    let branch_pos = path
        .node_ids
        .iter()
        .position(|id| *id == branch_node)
        .unwrap_or(path.node_ids.len());

    let lookup = |name: &str| -> Option<Expr> {
        // Walk back for the last define of `name` before the branch.
        for idx in (0..branch_pos).rev() {
            if let NodeKind::Statement {
                op: StmtOp::Define { name: n, value, .. },
                ..
            } = &cfg.node(path.node_ids[idx]).kind
            {
                if n == name {
                    return match value {
                        Some(e @ Expr::Var { name: v, .. })
                            if params.iter().any(|(p, _)| p == v) =>
                        {
                            Some(e.clone())
                        }
                        Some(e) if const_of_expr(e).is_some() => Some(e.clone()),
                        _ => None,
                    };
                }
            }
        }
        None
    };

    rewrite_vars(expr, &|name| {
        if params.iter().any(|(p, _)| p == name) {
            // A parameter that was reassigned earlier on the path no longer
            // holds the caller's value; treat the guard as unsupported by
            // mapping it away from the parameter space.
            for idx in (0..branch_pos).rev() {
                if let NodeKind::Statement {
                    op: StmtOp::Define { name: n, .. },
                    ..
                } = &cfg.node(path.node_ids[idx]).kind
                {
                    if n == name {
                        return Some(Expr::Var {
                            name: format!("$stale:{name}"),
                            span: crate::span::Span::synthetic(),
                        });
                    }
                }
            }
            None
        } else {
            lookup(name)
        }
    })
}

fn rewrite_vars(expr: &Expr, subst: &dyn Fn(&str) -> Option<Expr>) -> Expr {
    match expr {
        Expr::Var { name, .. } => subst(name).unwrap_or_else(|| expr.clone()),
        Expr::Unary { op, expr: inner, span } => Expr::Unary {
            op: *op,
            expr: Box::new(rewrite_vars(inner, subst)),
            span: *span,
        },
        Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
            op: *op,
            lhs: Box::new(rewrite_vars(lhs, subst)),
            rhs: Box::new(rewrite_vars(rhs, subst)),
            span: *span,
        },
        Expr::BuiltinCall {
            builtin,
            args,
            span,
        } => Expr::BuiltinCall {
            builtin: *builtin,
            args: args.iter().map(|a| rewrite_vars(a, subst)).collect(),
            span: *span,
        },
        other => other.clone(),
    }
}
