//! Dependent-method constraint resolution: pick the simplest path through a
//! dependent method that produces the required return, derive the parameter
//! predicate driving it, and recurse into that path's own dependent calls.

use crate::distill::candidates::{
    candidate_paths_for_return, derive_param_predicate, rank_paths, DerivedPredicate,
};
use crate::distill::predicate::{intersect_all, ParamPredicate};
use crate::knowledge::deps::{DependentCall, ReturnConstraint};
use crate::knowledge::kb::KnowledgeBase;
use crate::knowledge::paths::CfgPath;
use crate::lang::ast::{Expr, MethodRef, Type};
use serde::{Deserialize, Serialize};

pub const DEFAULT_RECURSION_DEPTH: u32 = 3;

/// How many candidate combinations to try when repeated invocations of the
/// same callee must agree on one predicate.
const MAX_COMBOS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolutionStatus {
    #[serde(rename = "resolved")]
    Resolved,
    #[serde(rename = "unresolved-delegated")]
    UnresolvedDelegated,
    #[serde(rename = "unsatisfiable")]
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionResult {
    pub callee: MethodRef,
    pub required_return: ReturnConstraint,
    /// Path index and shape within the callee, absent when unsatisfiable.
    pub chosen_path_index: Option<usize>,
    pub chosen_path: Option<CfgPath>,
    pub predicate: ParamPredicate,
    /// Guards outside the closed vocabulary, rendered for the generator.
    pub unresolved_guards: Vec<String>,
    pub children: Vec<ResolutionResult>,
    pub status: ResolutionStatus,
}

/// Resolve one dependent call with a remaining recursion budget.
pub fn resolve_dependent_method(
    call: &DependentCall,
    kb: &KnowledgeBase,
    depth: u32,
) -> ResolutionResult {
    let callee = resolve_callee_body(&call.callee_class, &call.callee_sig, kb);
    let Some(callee) = callee else {
        return unsatisfiable(call, "callee has no concrete body");
    };
    resolve_with_rc(&callee, &call.required_return, kb, depth)
}

fn unsatisfiable(call: &DependentCall, note: &str) -> ResolutionResult {
    ResolutionResult {
        callee: MethodRef {
            class: call.callee_class.clone(),
            sig: call.callee_sig.clone(),
        },
        required_return: call.required_return.clone(),
        chosen_path_index: None,
        chosen_path: None,
        predicate: ParamPredicate::Empty,
        unresolved_guards: vec![note.to_string()],
        children: Vec::new(),
        status: ResolutionStatus::Unsatisfiable,
    }
}

/// Call edges record signatures; pick the concrete body a receiver would
/// dispatch to, preferring the recorded class and falling back to its
/// lowest-named concrete subclass.
pub fn resolve_callee_body(
    class: &str,
    sig: &crate::lang::ast::MethodSig,
    kb: &KnowledgeBase,
) -> Option<MethodRef> {
    if let Ok(m) = kb.facts.resolve_dispatch(class, sig) {
        if !m.is_abstract {
            return Some(MethodRef {
                class: m.owner.clone(),
                sig: m.sig.clone(),
            });
        }
    }
    let mut subs: Vec<&crate::knowledge::facts::ClassFact> = kb
        .facts
        .classes
        .iter()
        .filter(|c| c.instantiable && kb.facts.is_subclass_of(&c.name, class))
        .collect();
    subs.sort_by(|a, b| a.name.cmp(&b.name));
    for sub in subs {
        if let Ok(m) = kb.facts.resolve_dispatch(&sub.name, sig) {
            if !m.is_abstract {
                return Some(MethodRef {
                    class: m.owner.clone(),
                    sig: m.sig.clone(),
                });
            }
        }
    }
    None
}

fn callee_params(callee: &MethodRef, kb: &KnowledgeBase) -> Vec<(String, Type)> {
    // Parameter names come from the CFG's method declaration; the facts keep
    // only types, so look the declaration up through the param names stored
    // in the CFG-building source. Names live on the MethodDecl; the KB keeps
    // them in the Cfg via branch expressions, so fetch from the project
    // method table captured at build time.
    kb.param_names
        .get(&callee.id())
        .cloned()
        .unwrap_or_else(|| {
            callee
                .sig
                .params
                .iter()
                .enumerate()
                .map(|(i, t)| (format!("p{i}"), t.clone()))
                .collect()
        })
}

fn resolve_with_rc(
    callee: &MethodRef,
    rc: &ReturnConstraint,
    kb: &KnowledgeBase,
    depth: u32,
) -> ResolutionResult {
    let params = callee_params(callee, kb);
    if depth == 0 {
        return ResolutionResult {
            callee: callee.clone(),
            required_return: rc.clone(),
            chosen_path_index: None,
            chosen_path: None,
            predicate: ParamPredicate::unconstrained(&params),
            unresolved_guards: vec!["recursion depth exhausted".to_string()],
            children: Vec::new(),
            status: ResolutionStatus::UnresolvedDelegated,
        };
    }

    let candidates = candidate_paths_for_return(callee, rc, kb);
    if candidates.is_empty() {
        return ResolutionResult {
            callee: callee.clone(),
            required_return: rc.clone(),
            chosen_path_index: None,
            chosen_path: None,
            predicate: ParamPredicate::Empty,
            unresolved_guards: Vec::new(),
            children: Vec::new(),
            status: ResolutionStatus::Unsatisfiable,
        };
    }
    let ranked = rank_paths(callee, &candidates, kb);

    let mut delegated_fallback: Option<ResolutionResult> = None;
    for idx in ranked {
        match try_candidate(callee, rc, idx, &params, kb, depth) {
            CandidateOutcome::Resolved(result) => return result,
            CandidateOutcome::Delegated(result) => {
                if delegated_fallback.is_none() {
                    delegated_fallback = Some(result);
                }
            }
            CandidateOutcome::Failed => {}
        }
    }
    delegated_fallback.unwrap_or(ResolutionResult {
        callee: callee.clone(),
        required_return: rc.clone(),
        chosen_path_index: None,
        chosen_path: None,
        predicate: ParamPredicate::Empty,
        unresolved_guards: Vec::new(),
        children: Vec::new(),
        status: ResolutionStatus::Unsatisfiable,
    })
}

enum CandidateOutcome {
    Resolved(ResolutionResult),
    Delegated(ResolutionResult),
    /// Empty predicate or unsatisfiable child: try the next candidate.
    Failed,
}

fn try_candidate(
    callee: &MethodRef,
    rc: &ReturnConstraint,
    path_index: usize,
    params: &[(String, Type)],
    kb: &KnowledgeBase,
    depth: u32,
) -> CandidateOutcome {
    let cfg = kb.cfg_of(callee).expect("candidate cfg");
    let path = kb.path_of(callee, path_index).expect("candidate path");
    let DerivedPredicate {
        mut predicate,
        mut unresolved_guards,
    } = derive_param_predicate(params, cfg, path, &kb.facts);
    if predicate.is_empty() {
        return CandidateOutcome::Failed;
    }

    // Bind the required return to the path's return expression. Constant
    // returns were checked by the candidate filter; everything else must be
    // constrained or delegated here, or the "resolved" status would promise
    // a return value the predicate does not actually force.
    let deps = kb.deps_of(callee, path_index).expect("candidate deps");
    let mut delegated = !unresolved_guards.is_empty();
    let mut return_child: Option<crate::knowledge::deps::DependentCall> = None;
    match crate::distill::candidates::bind_return(params, cfg, path, rc, &kb.facts) {
        crate::distill::candidates::ReturnBinding::ConstOk => {}
        crate::distill::candidates::ReturnBinding::Contradiction => {
            return CandidateOutcome::Failed
        }
        crate::distill::candidates::ReturnBinding::Atoms(atoms) => {
            for (idx, atom) in atoms {
                predicate.conjoin(idx, atom);
            }
            if predicate.is_empty() {
                return CandidateOutcome::Failed;
            }
        }
        crate::distill::candidates::ReturnBinding::Child { temp } => {
            let producing = cfg.nodes.iter().find_map(|n| match &n.kind {
                crate::knowledge::cfg::NodeKind::Call { info }
                    if info.result.as_deref() == Some(&temp)
                        && path.node_ids.contains(&n.id) =>
                {
                    Some((n.id, info.clone()))
                }
                _ => None,
            });
            match producing {
                Some((node_id, info)) => {
                    return_child = Some(crate::knowledge::deps::DependentCall {
                        call_node: node_id,
                        callee_class: info.callee_class,
                        callee_sig: info.sig,
                        required_return: rc.clone(),
                    });
                }
                None => {
                    delegated = true;
                    unresolved_guards
                        .push(format!("returned call result `{temp}` must be {}", rc.render()));
                }
            }
        }
        crate::distill::candidates::ReturnBinding::Unsupported(guard) => {
            delegated = true;
            unresolved_guards.push(guard);
        }
    }

    // Recurse into the chosen path's own dependent calls, plus the call
    // feeding the return value when there is one.
    let mut all_calls: Vec<&crate::knowledge::deps::DependentCall> = deps.calls.iter().collect();
    if let Some(rc_call) = &return_child {
        all_calls.push(rc_call);
    }
    let mut children = Vec::new();
    for child_call in all_calls {
        let child = resolve_dependent_method(child_call, kb, depth - 1);
        match child.status {
            ResolutionStatus::Unsatisfiable => return CandidateOutcome::Failed,
            ResolutionStatus::UnresolvedDelegated => delegated = true,
            ResolutionStatus::Resolved => {
                // Propagate the child's predicate through the call-site
                // arguments onto this callee's parameters.
                let call_info = match &cfg.node(child_call.call_node).kind {
                    crate::knowledge::cfg::NodeKind::Call { info } => info,
                    _ => unreachable!("dependent call points at a call node"),
                };
                match propagate_child(&mut predicate, &child.predicate, &call_info.args, params) {
                    Propagation::Ok => {}
                    Propagation::Contradiction => return CandidateOutcome::Failed,
                    Propagation::NotAnalyzable(guard) => {
                        delegated = true;
                        unresolved_guards.push(guard);
                    }
                }
                if predicate.is_empty() {
                    return CandidateOutcome::Failed;
                }
            }
        }
        children.push(child);
    }

    let status = if delegated {
        ResolutionStatus::UnresolvedDelegated
    } else {
        ResolutionStatus::Resolved
    };
    let result = ResolutionResult {
        callee: callee.clone(),
        required_return: rc.clone(),
        chosen_path_index: Some(path_index),
        chosen_path: Some(path.clone()),
        predicate,
        unresolved_guards,
        children,
        status,
    };
    if delegated {
        CandidateOutcome::Delegated(result)
    } else {
        CandidateOutcome::Resolved(result)
    }
}

enum Propagation {
    Ok,
    Contradiction,
    NotAnalyzable(String),
}

/// Map a resolved child's per-parameter constraints through the call-site
/// argument expressions onto the parent's parameters.
fn propagate_child(
    parent: &mut ParamPredicate,
    child: &ParamPredicate,
    args: &[Expr],
    parent_params: &[(String, Type)],
) -> Propagation {
    let ParamPredicate::Conj {
        params: child_params,
    } = child
    else {
        return Propagation::Contradiction;
    };
    for (i, entry) in child_params.iter().enumerate() {
        if matches!(
            entry.constraint,
            crate::distill::predicate::ParamConstraint::Unconstrained
        ) {
            continue;
        }
        let Some(arg) = args.get(i) else {
            return Propagation::NotAnalyzable("argument list mismatch".to_string());
        };
        match arg {
            Expr::Var { name, .. } => {
                match parent_params.iter().position(|(p, _)| p == name) {
                    Some(idx) => {
                        let mut single = ParamPredicate::unconstrained(parent_params);
                        if let ParamPredicate::Conj { params } = &mut single {
                            params[idx].constraint = entry.constraint.clone();
                        }
                        *parent = crate::distill::predicate::intersect_predicates(parent, &single);
                        if parent.is_empty() {
                            return Propagation::Contradiction;
                        }
                    }
                    None => {
                        return Propagation::NotAnalyzable(format!(
                            "constraint on `{}` flows through non-parameter argument `{}`",
                            entry.name,
                            crate::lang::pretty::expr_text(arg)
                        ))
                    }
                }
            }
            other => {
                // Constant argument: check the child constraint directly.
                if let Some(c) = const_value_of(other) {
                    if entry.constraint.accepts(&c) {
                        continue;
                    }
                    return Propagation::Contradiction;
                }
                return Propagation::NotAnalyzable(format!(
                    "constraint on `{}` flows through expression `{}`",
                    entry.name,
                    crate::lang::pretty::expr_text(other)
                ));
            }
        }
    }
    Propagation::Ok
}

fn const_value_of(expr: &Expr) -> Option<crate::lang::interp::Value> {
    use crate::lang::interp::Value;
    match expr {
        Expr::IntLit { value, .. } => Some(Value::Int(*value)),
        Expr::BoolLit { value, .. } => Some(Value::Bool(*value)),
        Expr::CharLit { value, .. } => Some(Value::Char(*value)),
        Expr::StrLit { value, .. } => Some(Value::Str(std::rc::Rc::new(value.clone()))),
        Expr::Unary {
            op: crate::lang::ast::UnOp::Neg,
            expr,
            ..
        } => match expr.as_ref() {
            Expr::IntLit { value, .. } => Some(Value::Int(-*value)),
            _ => None,
        },
        _ => None,
    }
}

/// Resolve a group of invocations of the same callee along one focal path.
/// Each invocation resolves independently; the predicates of the group are
/// intersected and the intersection becomes each member's final predicate.
/// An empty intersection walks alternate candidates before giving up.
pub fn resolve_invocation_group(
    calls: &[&DependentCall],
    kb: &KnowledgeBase,
    depth: u32,
) -> Vec<ResolutionResult> {
    if calls.len() == 1 {
        return vec![resolve_dependent_method(calls[0], kb, depth)];
    }

    // Candidate lists per invocation, in rank order.
    let mut per_call: Vec<Vec<ResolutionResult>> = Vec::new();
    for call in calls {
        let callee = resolve_callee_body(&call.callee_class, &call.callee_sig, kb);
        let mut options = Vec::new();
        if let Some(callee) = callee {
            let candidates = candidate_paths_for_return(&callee, &call.required_return, kb);
            let ranked = rank_paths(&callee, &candidates, kb);
            let params = callee_params(&callee, kb);
            for idx in ranked.into_iter().take(MAX_COMBOS) {
                match try_candidate(&callee, &call.required_return, idx, &params, kb, depth) {
                    CandidateOutcome::Resolved(r) | CandidateOutcome::Delegated(r) => {
                        options.push(r)
                    }
                    CandidateOutcome::Failed => {}
                }
            }
        }
        if options.is_empty() {
            return calls
                .iter()
                .map(|c| unsatisfiable(c, "no candidate path produces the required return"))
                .collect();
        }
        per_call.push(options);
    }

    // Walk joint assignments in rank order until an intersection survives.
    let mut combo = vec![0usize; per_call.len()];
    for _ in 0..MAX_COMBOS {
        let members: Vec<&ResolutionResult> =
            combo.iter().zip(&per_call).map(|(&i, opts)| &opts[i]).collect();
        let preds: Vec<ParamPredicate> = members.iter().map(|m| m.predicate.clone()).collect();
        let intersected = intersect_all(&preds).unwrap_or(ParamPredicate::Empty);
        if !intersected.is_empty() {
            return members
                .into_iter()
                .map(|m| {
                    let mut out = m.clone();
                    out.predicate = intersected.clone();
                    out
                })
                .collect();
        }
        // Advance like an odometer.
        let mut advanced = false;
        for pos in (0..combo.len()).rev() {
            if combo[pos] + 1 < per_call[pos].len() {
                combo[pos] += 1;
                for later in combo.iter_mut().skip(pos + 1) {
                    *later = 0;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }

    calls
        .iter()
        .map(|c| unsatisfiable(c, "no candidate combination has a non-empty intersection"))
        .collect()
}
