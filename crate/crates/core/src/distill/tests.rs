use crate::distill::candidates::{candidate_paths_for_return, derive_param_predicate, rank_paths};
use crate::distill::context::distill;
use crate::distill::invocation::{plan_invocation, InvocationKind, PlanError, ReceiverRecipe};
use crate::distill::predicate::{
    intersect_predicates, Atom, ParamConstraint, ParamPredicate,
};
use crate::distill::resolve::{resolve_dependent_method, ResolutionStatus};
use crate::distill::variables::{collect_variable_requirements, SetVia};
use crate::knowledge::deps::{DependentCall, ReturnConstraint, SignKind};
use crate::knowledge::kb::{build_kb, KnowledgeBase};
use crate::knowledge::tests::checked_project;
use crate::lang::ast::*;
use crate::lang::parser::parse;
use crate::lang::tests::fixture_f1;

fn f1_kb() -> KnowledgeBase {
    let (units, index) = checked_project(vec![fixture_f1()]);
    build_kb(&units, &index, 256)
}

fn kb_of(src: &str) -> KnowledgeBase {
    let (units, index) = checked_project(vec![parse(src, "t.sj").unwrap()]);
    build_kb(&units, &index, 256)
}

fn mref(class: &str, name: &str, params: &[Type]) -> MethodRef {
    MethodRef {
        class: class.to_string(),
        sig: MethodSig {
            name: name.to_string(),
            params: params.to_vec(),
        },
    }
}

fn condition_c0() -> MethodRef {
    mref("Metaphone", "conditionC0", &[Type::Str, Type::Int])
}

fn contains_ref() -> MethodRef {
    mref(
        "Metaphone",
        "contains",
        &[Type::Str, Type::Int, Type::Int, Type::Str],
    )
}

#[test]
fn plan_condition_c0_is_instance_reflective() {
    let kb = f1_kb();
    let plan = plan_invocation(&condition_c0(), &kb.facts).unwrap();
    assert_eq!(plan.kind, InvocationKind::InstanceReflective);
    assert_eq!(
        plan.receiver_recipe,
        ReceiverRecipe::NewConcrete("Metaphone".to_string())
    );
    assert!(plan.needs_reflection);
    assert_eq!(plan.dispatch_target, condition_c0());
}

#[test]
fn plan_public_static_is_direct() {
    let kb = kb_of(
        r#"
class U {
    public static int twice(int x) {
        return x + x;
    }
}
"#,
    );
    let plan = plan_invocation(&mref("U", "twice", &[Type::Int]), &kb.facts).unwrap();
    assert_eq!(plan.kind, InvocationKind::StaticDirect);
    assert_eq!(plan.receiver_recipe, ReceiverRecipe::None);
    assert!(!plan.needs_reflection);
}

#[test]
fn plan_abstract_owner_picks_concrete_subclass() {
    let kb = kb_of(
        r#"
class Shape {
    public abstract int area();
    public bool isLarge() {
        if (area() > 10) {
            return true;
        }
        return false;
    }
}
class Rect extends Shape {
    public int area() {
        return 12;
    }
}
class Circle extends Shape {
    public int area() {
        return 3;
    }
}
"#,
    );
    // Concrete focal on the abstract class: the subclass receiver still
    // dispatches into the focal body.
    let focal = mref("Shape", "isLarge", &[]);
    let plan = plan_invocation(&focal, &kb.facts).unwrap();
    assert_eq!(plan.kind, InvocationKind::InstanceDirect);
    assert_eq!(
        plan.receiver_recipe,
        ReceiverRecipe::NewConcreteSubclass("Circle".to_string()),
        "lowest concrete subclass by name"
    );
    assert_eq!(plan.dispatch_target, focal);

    // Abstract focal: the plan dispatches to the override.
    let area = mref("Shape", "area", &[]);
    let plan = plan_invocation(&area, &kb.facts).unwrap();
    assert_eq!(
        plan.receiver_recipe,
        ReceiverRecipe::NewConcreteSubclass("Circle".to_string())
    );
    assert_eq!(plan.dispatch_target, mref("Circle", "area", &[]));

    // No concrete subclass at all.
    let kb = kb_of(
        r#"
class Lone {
    public abstract int f();
}
"#,
    );
    let err = plan_invocation(&mref("Lone", "f", &[]), &kb.facts).unwrap_err();
    assert!(matches!(err, PlanError::NoConcreteReceiver(_)));
}

#[test]
fn variables_is_vowel_needs_reflect_set_without_hint() {
    let kb = f1_kb();
    let is_vowel = mref("Metaphone", "isVowel", &[Type::Char]);
    let cfg = kb.cfg_of(&is_vowel).unwrap();
    let path = kb.path_of(&is_vowel, 0).unwrap();
    let deps = kb.deps_of(&is_vowel, 0).unwrap();
    let reqs = collect_variable_requirements(cfg, path, deps);
    assert_eq!(reqs.len(), 1);
    let req = &reqs[0];
    assert_eq!(req.field.name, "VOWELS");
    assert_eq!(req.set_via, SetVia::ReflectSet);
    assert!(req.is_static);
    assert!(req.required_value_hint.is_none(), "{req:?}");
}

#[test]
fn variables_public_field_guard_yields_hint() {
    let kb = kb_of(
        r#"
class Gate {
    public static int LIMIT = 0;
    public static bool open(int x) {
        if (LIMIT > 3) {
            return true;
        }
        return x > 0;
    }
}
"#,
    );
    let open = mref("Gate", "open", &[Type::Int]);
    let cfg = kb.cfg_of(&open).unwrap();
    // Path 0 takes the true edge of `LIMIT > 3`.
    let path = kb.path_of(&open, 0).unwrap();
    assert!(path.obligations[0].1);
    let deps = kb.deps_of(&open, 0).unwrap();
    let reqs = collect_variable_requirements(cfg, path, deps);
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].set_via, SetVia::DirectAssignment);
    assert_eq!(
        reqs[0].required_value_hint,
        Some(ReturnConstraint::InIntRange {
            lo: 4,
            hi: i64::MAX
        })
    );
}

#[test]
fn variables_empty_for_field_free_path() {
    let kb = f1_kb();
    let focal = condition_c0();
    let cfg = kb.cfg_of(&focal).unwrap();
    let idx = early_return_false_path(&kb);
    let path = kb.path_of(&focal, idx).unwrap();
    let deps = kb.deps_of(&focal, idx).unwrap();
    assert!(collect_variable_requirements(cfg, path, deps).is_empty());
}

/// The conditionC0 path taking contains=false then index<=1 (early false).
fn early_return_false_path(kb: &KnowledgeBase) -> usize {
    let focal = condition_c0();
    kb.paths_of(&focal)
        .unwrap()
        .paths
        .iter()
        .position(|p| p.obligations.len() == 2 && !p.obligations[0].1 && p.obligations[1].1)
        .expect("early-false path exists")
}

#[test]
fn contains_falsy_has_four_candidates_ranked_by_simplicity() {
    let kb = f1_kb();
    let callee = contains_ref();
    let candidates = candidate_paths_for_return(&callee, &ReturnConstraint::Falsy, &kb);
    assert_eq!(candidates.len(), 4);
    let ranked = rank_paths(&callee, &candidates, &kb);
    // The top-ranked falsy path is the index < 0 early return: one
    // obligation, on the false edge of `index >= 0`.
    let top = kb.path_of(&callee, ranked[0]).unwrap();
    assert_eq!(top.obligations.len(), 1);
    assert!(!top.obligations[0].1);
}

#[test]
fn constant_true_return_has_no_falsy_candidates() {
    let kb = kb_of(
        r#"
class C {
    public static bool yes() {
        return true;
    }
}
"#,
    );
    let callee = mref("C", "yes", &[]);
    assert!(candidate_paths_for_return(&callee, &ReturnConstraint::Falsy, &kb).is_empty());
    assert_eq!(
        candidate_paths_for_return(&callee, &ReturnConstraint::Truthy, &kb),
        vec![0]
    );
}

#[test]
fn expression_return_is_kept_conservatively() {
    let kb = kb_of(
        r#"
class C {
    public static bool pos(int x) {
        return x > 0;
    }
}
"#,
    );
    let callee = mref("C", "pos", &[Type::Int]);
    assert_eq!(
        candidate_paths_for_return(&callee, &ReturnConstraint::Truthy, &kb),
        vec![0]
    );
}

#[test]
fn predicate_for_contains_early_false_is_index_negative() {
    let kb = f1_kb();
    let callee = contains_ref();
    let candidates = candidate_paths_for_return(&callee, &ReturnConstraint::Falsy, &kb);
    let ranked = rank_paths(&callee, &candidates, &kb);
    let cfg = kb.cfg_of(&callee).unwrap();
    let path = kb.path_of(&callee, ranked[0]).unwrap();
    let params = kb.param_names[&callee.id()].clone();
    let derived = derive_param_predicate(&params, cfg, path, &kb.facts);
    assert!(derived.is_resolved(), "{derived:?}");
    let rendered = derived.predicate.render();
    assert_eq!(
        rendered,
        vec![
            "value unconstrained",
            "index < 0",
            "length unconstrained",
            "criteria unconstrained"
        ]
    );
    let inputs_ok = derived.predicate.satisfied_by(&[
        crate::lang::interp::Value::Str(std::rc::Rc::new("A".into())),
        crate::lang::interp::Value::Int(-3),
        crate::lang::interp::Value::Int(0),
        crate::lang::interp::Value::Str(std::rc::Rc::new("".into())),
    ]);
    assert!(inputs_ok);
}

#[test]
fn guardless_path_gets_unconstrained_predicate() {
    let kb = kb_of(
        r#"
class C {
    public static int id(int x) {
        return x;
    }
}
"#,
    );
    let callee = mref("C", "id", &[Type::Int]);
    let cfg = kb.cfg_of(&callee).unwrap();
    let path = kb.path_of(&callee, 0).unwrap();
    let derived = derive_param_predicate(
        &[("x".to_string(), Type::Int)],
        cfg,
        path,
        &kb.facts,
    );
    assert!(derived.is_resolved());
    assert!(derived.predicate.is_unconstrained());
}

#[test]
fn is_vowel_truthy_resolves_through_final_initializer() {
    let kb = f1_kb();
    let callee = mref("Metaphone", "isVowel", &[Type::Char]);
    let candidates = candidate_paths_for_return(&callee, &ReturnConstraint::Truthy, &kb);
    let ranked = rank_paths(&callee, &candidates, &kb);
    let cfg = kb.cfg_of(&callee).unwrap();
    let path = kb.path_of(&callee, ranked[0]).unwrap();
    let derived = derive_param_predicate(
        &[("ch".to_string(), Type::Char)],
        cfg,
        path,
        &kb.facts,
    );
    assert!(derived.is_resolved(), "{derived:?}");
    assert_eq!(derived.predicate.render(), vec!["ch in \"AEIOUY\""]);
}

#[test]
fn intersect_paper_example() {
    let params = vec![("p".to_string(), Type::Int)];
    let mut a = ParamPredicate::unconstrained(&params);
    a.conjoin(0, Atom::IntInterval { lo: 3, hi: i64::MAX });
    let mut b = ParamPredicate::unconstrained(&params);
    b.conjoin(0, Atom::IntInterval { lo: i64::MIN, hi: 4 });
    let both = intersect_predicates(&a, &b);
    assert_eq!(both.render(), vec!["3 <= p < 5"]);

    // Identity element.
    let id = ParamPredicate::unconstrained(&params);
    assert_eq!(intersect_predicates(&a, &id), a);

    // Contradiction.
    let mut neg = ParamPredicate::unconstrained(&params);
    neg.conjoin(0, Atom::IntInterval { lo: i64::MIN, hi: -1 });
    let mut pos = ParamPredicate::unconstrained(&params);
    pos.conjoin(0, Atom::IntInterval { lo: 1, hi: i64::MAX });
    assert!(intersect_predicates(&neg, &pos).is_empty());
}

#[test]
fn resolve_contains_falsy() {
    let kb = f1_kb();
    let call = DependentCall {
        call_node: 1,
        callee_class: "Metaphone".to_string(),
        callee_sig: contains_ref().sig,
        required_return: ReturnConstraint::Falsy,
    };
    let result = resolve_dependent_method(&call, &kb, 3);
    assert_eq!(result.status, ResolutionStatus::Resolved);
    assert!(result.children.is_empty());
    let rendered = result.predicate.render();
    assert!(rendered.contains(&"index < 0".to_string()), "{rendered:?}");
}

#[test]
fn resolve_contradicting_constraint_is_unsatisfiable() {
    let kb = kb_of(
        r#"
class C {
    public static bool yes() {
        return true;
    }
}
"#,
    );
    let call = DependentCall {
        call_node: 0,
        callee_class: "C".to_string(),
        callee_sig: MethodSig {
            name: "yes".to_string(),
            params: vec![],
        },
        required_return: ReturnConstraint::Falsy,
    };
    let result = resolve_dependent_method(&call, &kb, 3);
    assert_eq!(result.status, ResolutionStatus::Unsatisfiable);
}

#[test]
fn chain_resolution_respects_depth_budget() {
    let src = r#"
class Chain {
    public static bool f(int x) {
        if (g(x)) {
            return true;
        }
        return false;
    }
    public static bool g(int x) {
        if (h(x)) {
            return true;
        }
        return false;
    }
    public static bool h(int x) {
        if (x > 2) {
            return true;
        }
        return false;
    }
}
"#;
    let kb = kb_of(src);
    let call = DependentCall {
        call_node: 0,
        callee_class: "Chain".to_string(),
        callee_sig: MethodSig {
            name: "g".to_string(),
            params: vec![Type::Int],
        },
        required_return: ReturnConstraint::Truthy,
    };
    // Depth 1: g resolves its own predicate but h's resolution is cut off
    // and delegated, which propagates to g.
    let result = resolve_dependent_method(&call, &kb, 1);
    assert_eq!(result.status, ResolutionStatus::UnresolvedDelegated);
    assert_eq!(result.children.len(), 1);
    assert_eq!(
        result.children[0].status,
        ResolutionStatus::UnresolvedDelegated
    );

    // With budget, the chain resolves fully and h's x > 2 flows upward.
    let result = resolve_dependent_method(&call, &kb, 3);
    assert_eq!(result.status, ResolutionStatus::Resolved, "{result:?}");
    assert_eq!(result.children.len(), 1);
    assert_eq!(result.children[0].status, ResolutionStatus::Resolved);
    assert!(
        result.predicate.render().contains(&"x >= 3".to_string())
            || result.predicate.render().contains(&"x > 2".to_string()),
        "{:?}",
        result.predicate.render()
    );
}

#[test]
fn distill_condition_c0_early_false_path() {
    let kb = f1_kb();
    let focal = condition_c0();
    let idx = early_return_false_path(&kb);
    let ctx = distill(&focal, idx, &kb, 3).unwrap();
    assert!(!ctx.infeasible);
    assert_eq!(ctx.invocation.kind, InvocationKind::InstanceReflective);
    assert!(ctx.variables.is_empty());
    assert_eq!(ctx.resolutions.len(), 1);
    let res = &ctx.resolutions[0];
    assert_eq!(res.required_return, ReturnConstraint::Falsy);
    assert_eq!(res.status, ResolutionStatus::Resolved);
    assert!(res
        .predicate
        .render()
        .contains(&"index < 0".to_string()));
}

#[test]
fn distill_branchless_public_static_is_trivial() {
    let kb = kb_of(
        r#"
class C {
    public static int id(int x) {
        return x;
    }
}
"#,
    );
    let ctx = distill(&mref("C", "id", &[Type::Int]), 0, &kb, 3).unwrap();
    assert_eq!(ctx.invocation.kind, InvocationKind::StaticDirect);
    assert!(ctx.variables.is_empty());
    assert!(ctx.resolutions.is_empty());
    assert!(ctx.obligations_rendered.is_empty());
    assert!(!ctx.infeasible);
}

#[test]
fn distill_contradictory_repeated_invocations_is_infeasible() {
    let src = r#"
class P {
    public static bool isPos(int x) {
        if (x > 0) {
            return true;
        }
        return false;
    }
    public static bool paradox(int x) {
        if (isPos(x)) {
            if (isPos(x)) {
                return true;
            }
            return false;
        }
        return false;
    }
}
"#;
    let kb = kb_of(src);
    let focal = mref("P", "paradox", &[Type::Int]);
    // The [true, false] path demands isPos(x) truthy then falsy: the
    // per-invocation predicates {x > 0} and {x <= 0} intersect to Empty.
    let paths = kb.paths_of(&focal).unwrap();
    let idx = paths
        .paths
        .iter()
        .position(|p| {
            p.obligations.len() == 2 && p.obligations[0].1 && !p.obligations[1].1
        })
        .expect("the contradictory path exists");
    let ctx = distill(&focal, idx, &kb, 3).unwrap();
    assert!(ctx.infeasible);
    assert!(ctx
        .resolutions
        .iter()
        .all(|r| r.status == ResolutionStatus::Unsatisfiable));

    // The consistent [true, true] path stays feasible with x > 0.
    let idx = paths
        .paths
        .iter()
        .position(|p| p.obligations.len() == 2 && p.obligations[0].1 && p.obligations[1].1)
        .unwrap();
    let ctx = distill(&focal, idx, &kb, 3).unwrap();
    assert!(!ctx.infeasible);
    for r in &ctx.resolutions {
        assert!(r.predicate.render().contains(&"x >= 1".to_string()), "{:?}", r.predicate.render());
    }
}

#[test]
fn sign_constraint_for_zero_comparison() {
    let kb = kb_of(
        r#"
class S {
    public static int probe(int x) {
        if (x < 0) {
            return 0 - x;
        }
        return x;
    }
    public static bool useProbe(int x) {
        if (probe(x) < 0) {
            return true;
        }
        return false;
    }
}
"#,
    );
    let focal = mref("S", "useProbe", &[Type::Int]);
    let deps = kb.deps_of(&focal, 0).unwrap();
    assert_eq!(deps.calls.len(), 1);
    assert_eq!(
        deps.calls[0].required_return,
        ReturnConstraint::Sign(SignKind::Negative)
    );
}

#[test]
fn canonical_json_field_order() {
    let kb = f1_kb();
    let focal = condition_c0();
    let ctx = distill(&focal, early_return_false_path(&kb), &kb, 3).unwrap();
    let json = ctx.canonical_json();
    let focal_pos = json.find("\"focal\"").unwrap();
    let path_pos = json.find("\"path\"").unwrap();
    let invocation_pos = json.find("\"invocation\"").unwrap();
    let variables_pos = json.find("\"variables\"").unwrap();
    let resolutions_pos = json.find("\"resolutions\"").unwrap();
    let obligations_pos = json.find("\"obligations_rendered\"").unwrap();
    assert!(focal_pos < path_pos);
    assert!(path_pos < invocation_pos);
    assert!(invocation_pos < variables_pos);
    assert!(variables_pos < resolutions_pos);
    assert!(resolutions_pos < obligations_pos);

    // Identical context renders identically.
    let again = distill(&focal, early_return_false_path(&kb), &kb, 3).unwrap();
    assert_eq!(json, again.canonical_json());

    let parsed: crate::distill::DistilledContext = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, ctx);
}

#[test]
fn param_constraint_accepts_matches_rendered_meaning() {
    use crate::lang::interp::Value;
    let params = vec![("p".to_string(), Type::Int)];
    let mut pred = ParamPredicate::unconstrained(&params);
    pred.conjoin(0, Atom::IntInterval { lo: 3, hi: 4 });
    assert!(pred.satisfied_by(&[Value::Int(3)]));
    assert!(pred.satisfied_by(&[Value::Int(4)]));
    assert!(!pred.satisfied_by(&[Value::Int(5)]));
    pred.conjoin(0, Atom::IntNe(4));
    assert!(!pred.satisfied_by(&[Value::Int(4)]));
    pred.conjoin(0, Atom::IntNe(3));
    assert!(pred.is_empty(), "interval hollowed out entirely");

    let params = vec![("c".to_string(), Type::Char)];
    let mut pred = ParamPredicate::unconstrained(&params);
    pred.conjoin(0, Atom::CharIn("AEIOUY".chars().collect()));
    pred.conjoin(0, Atom::CharNotIn("AE".chars().collect()));
    assert!(pred.satisfied_by(&[Value::Char('I')]));
    assert!(!pred.satisfied_by(&[Value::Char('A')]));

    let params = vec![("s".to_string(), Type::Str)];
    let mut pred = ParamPredicate::unconstrained(&params);
    pred.conjoin(0, Atom::StrLenInterval { lo: 1, hi: 2 });
    assert!(pred.satisfied_by(&[Value::Str(std::rc::Rc::new("A".into()))]));
    assert!(!pred.satisfied_by(&[Value::Str(std::rc::Rc::new("".into()))]));
    pred.conjoin(0, Atom::StrEq("AB".to_string()));
    assert!(pred.satisfied_by(&[Value::Str(std::rc::Rc::new("AB".into()))]));
    pred.conjoin(0, Atom::StrEq("A".to_string()));
    assert!(pred.is_empty(), "conflicting string equalities");

    assert!(matches!(
        ParamConstraint::Unconstrained,
        ParamConstraint::Unconstrained
    ));
}
