use crate::knowledge::cfg::{build_cfg, NodeKind};
use crate::knowledge::deps::{path_return_const, ReturnConstraint};
use crate::knowledge::kb::build_kb;
use crate::knowledge::paths::enumerate_paths;
use crate::knowledge::persist::{load_kb, save_kb, PersistError};
use crate::lang::ast::*;
use crate::lang::checker::check;
use crate::lang::index::ProgramIndex;
use crate::lang::parser::parse;
use crate::lang::tests::fixture_f1;

pub fn checked_project(units: Vec<SourceUnit>) -> (Vec<SourceUnit>, ProgramIndex) {
    let diags = check(&units);
    assert!(diags.is_empty(), "project must check clean: {diags:?}");
    let (index, diags) = ProgramIndex::build(&units);
    assert!(diags.is_empty());
    (units, index)
}

fn f1_project() -> (Vec<SourceUnit>, ProgramIndex) {
    checked_project(vec![fixture_f1()])
}

fn method<'a>(index: &'a ProgramIndex, class: &str, name: &str) -> &'a MethodDecl {
    index
        .class(class)
        .unwrap()
        .decl
        .methods
        .iter()
        .find(|m| m.name == name)
        .unwrap()
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

#[test]
fn straight_line_method_has_one_path_no_branches() {
    let src = r#"
class S {
    public static int id(int x) {
        return x;
    }
}
"#;
    let (units, index) = checked_project(vec![parse(src, "s.sj").unwrap()]);
    let m = method(&index, "S", "id");
    let cfg = build_cfg(m, &index).unwrap().cfg;
    assert_eq!(cfg.branch_nodes().len(), 0);
    let set = enumerate_paths(&cfg, 256);
    assert_eq!(set.paths.len(), 1);
    assert!(set.paths[0].obligations.is_empty());
    assert!(!set.truncated);
    let _ = units;
}

#[test]
fn while_loop_yields_skip_and_one_iteration_paths() {
    let src = r#"
class L {
    public static int bump(int i, int n) {
        while (i < n) {
            i = i + 1;
        }
        return i;
    }
}
"#;
    let (_units, index) = checked_project(vec![parse(src, "l.sj").unwrap()]);
    let m = method(&index, "L", "bump");
    let cfg = build_cfg(m, &index).unwrap().cfg;
    let loop_heads: Vec<_> = cfg.nodes.iter().filter(|n| n.loop_head).collect();
    assert_eq!(loop_heads.len(), 1);
    let guard = loop_heads[0].id;
    let has_back_edge = cfg.edges.iter().any(|e| e.to == guard && e.from > guard);
    assert!(has_back_edge);

    let set = enumerate_paths(&cfg, 256);
    assert_eq!(set.paths.len(), 2);
    // True-edge first: the one-iteration path is enumerated before the skip.
    assert_eq!(set.paths[0].obligations, vec![(guard, true), (guard, false)]);
    assert_eq!(set.paths[1].obligations, vec![(guard, false)]);
    // Loop-once: no node repeats on any path.
    for path in &set.paths {
        let mut seen = path.node_ids.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), path.node_ids.len());
    }
}

#[test]
fn f1_contains_has_six_paths_four_falsy() {
    let (_units, index) = f1_project();
    let m = method(&index, "Metaphone", "contains");
    let cfg = build_cfg(m, &index).unwrap().cfg;
    let set = enumerate_paths(&cfg, 256);
    assert_eq!(set.paths.len(), 6, "contains must have exactly 6 CFG paths");

    let falsy = ReturnConstraint::Falsy;
    let kept: Vec<_> = set
        .paths
        .iter()
        .filter(|p| {
            match path_return_const(&cfg, p) {
                Some(c) => falsy.accepts(&c),
                None => true, // conservative keep
            }
        })
        .collect();
    assert_eq!(kept.len(), 4, "exactly 4 of 6 paths can return false");
}

#[test]
fn f1_contains_index_negative_covers_one_of_six_outcomes() {
    use crate::lang::coverage::{guard_sites, measure_coverage};
    use crate::lang::interp::{execute, Limits};

    let test = r#"
class Test {
    public static void test() {
        bool r = reflect call Metaphone#contains("AEI", -1, 2, "EI");
    }
}
"#;
    let f1 = fixture_f1();
    let test_unit = parse(test, "t.sj").unwrap();
    let (units, index) = checked_project(vec![f1, test_unit]);

    let contains = method(&index, "Metaphone", "contains");
    assert_eq!(guard_sites(contains).len() * 2, 6, "6 branch outcomes");

    let entry = mref("Test", "test", &[]);
    let focal = contains.method_ref();
    let trace = execute(&index, &entry, &focal, Limits::default()).unwrap();
    let scope = std::collections::BTreeSet::from([focal.id()]);
    let report = measure_coverage(&[&trace], &index, &scope);
    let cov = &report.methods[&focal.id()];
    assert_eq!(cov.total_branch_outcomes, 6);
    assert_eq!(cov.covered_branch_outcomes.len(), 1);
    let _ = units;
}

#[test]
fn f1_callees_of_condition_c0() {
    let (units, index) = f1_project();
    let kb = build_kb(&units, &index, 256);
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let callees = kb.callees_of(&focal).unwrap();
    assert_eq!(callees, vec!["charAt", "contains", "isVowel"]);

    let uncalled = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    assert_eq!(kb.callers_of(&uncalled).unwrap(), Vec::<String>::new());
}

#[test]
fn f1_is_vowel_depends_on_vowels_field() {
    let (units, index) = f1_project();
    let kb = build_kb(&units, &index, 256);
    let is_vowel = mref("Metaphone", "isVowel", &[Type::Char]);
    let paths = kb.paths_of(&is_vowel).unwrap();
    assert_eq!(paths.paths.len(), 2);
    for i in 0..paths.paths.len() {
        let deps = kb.deps_of(&is_vowel, i).unwrap();
        assert_eq!(deps.variables.len(), 1, "path {i}: {deps:?}");
        let var = &deps.variables[0];
        assert_eq!(var.field.class, "Metaphone");
        assert_eq!(var.field.name, "VOWELS");
        assert_eq!(var.access, Access::Private);
        assert!(var.is_static);
        assert!(deps.calls.is_empty());
    }
}

#[test]
fn f1_condition_c0_false_branch_requires_contains_falsy() {
    let (units, index) = f1_project();
    let kb = build_kb(&units, &index, 256);
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let cfg = kb.cfg_of(&focal).unwrap();
    let paths = kb.paths_of(&focal).unwrap();

    // The early-return-false path: contains falsy, then index <= 1.
    let target = paths
        .paths
        .iter()
        .position(|p| {
            p.obligations.len() == 2
                && !p.obligations[0].1
                && p.obligations[1].1
        })
        .expect("the [contains=false, index<=1] path exists");
    let deps = kb.deps_of(&focal, target).unwrap();
    assert!(deps.variables.is_empty(), "{deps:?}");
    assert_eq!(deps.calls.len(), 1, "{deps:?}");
    let call = &deps.calls[0];
    assert_eq!(call.callee_sig.name, "contains");
    assert_eq!(call.required_return, ReturnConstraint::Falsy);
    let _ = cfg;
}

#[test]
fn params_only_guard_has_no_dependencies() {
    let src = r#"
class P {
    public static bool pos(int x) {
        if (x > 0) {
            return true;
        }
        return false;
    }
}
"#;
    let (units, index) = checked_project(vec![parse(src, "p.sj").unwrap()]);
    let kb = build_kb(&units, &index, 256);
    let m = mref("P", "pos", &[Type::Int]);
    let deps = kb.deps_of(&m, 0).unwrap();
    assert!(deps.variables.is_empty());
    assert!(deps.calls.is_empty());
}

#[test]
fn extract_type_facts_f1() {
    let (units, index) = f1_project();
    let facts = crate::knowledge::facts::extract_type_facts(&units, &index);
    let metaphone = facts.class("Metaphone").unwrap();
    assert!(!metaphone.is_abstract);
    assert!(metaphone.instantiable);
    let cond = facts
        .method("Metaphone#conditionC0/(string,int)")
        .unwrap();
    assert_eq!(cond.access, Access::Private);
    assert!(!cond.is_static);

    let empty = crate::knowledge::facts::extract_type_facts(&[], &ProgramIndex::build(&[]).0);
    assert!(empty.classes.is_empty() && empty.methods.is_empty() && empty.fields.is_empty());
}

#[test]
fn abstract_class_is_not_instantiable() {
    let src = r#"
class Base {
    public abstract int f(int x);
}
class Impl extends Base {
    public int f(int x) {
        return x;
    }
}
"#;
    let (units, index) = checked_project(vec![parse(src, "a.sj").unwrap()]);
    let facts = crate::knowledge::facts::extract_type_facts(&units, &index);
    assert!(!facts.class("Base").unwrap().instantiable);
    assert!(facts.class("Impl").unwrap().instantiable);
}

#[test]
fn dispatch_three_level_chain() {
    let src = r#"
class A {
    public int m() {
        return 1;
    }
}
class B extends A {
    public int m() {
        return 2;
    }
}
class C extends B {
    public int other() {
        return 3;
    }
}
"#;
    let (units, index) = checked_project(vec![parse(src, "d.sj").unwrap()]);
    let facts = crate::knowledge::facts::extract_type_facts(&units, &index);
    let sig = MethodSig {
        name: "m".to_string(),
        params: vec![],
    };
    assert_eq!(facts.resolve_dispatch("C", &sig).unwrap().owner, "B");
    assert_eq!(facts.resolve_dispatch("B", &sig).unwrap().owner, "B");
    assert_eq!(facts.resolve_dispatch("A", &sig).unwrap().owner, "A");
    let missing = MethodSig {
        name: "nope".to_string(),
        params: vec![],
    };
    assert!(facts.resolve_dispatch("C", &missing).is_err());
}

#[test]
fn kb_queries_compose_with_direct_build() {
    let (units, index) = f1_project();
    let kb = build_kb(&units, &index, 256);
    let m = method(&index, "Metaphone", "contains");
    let direct = build_cfg(m, &index).unwrap().cfg;
    let via_kb = kb.cfg_of(&m.method_ref()).unwrap();
    assert_eq!(&direct, via_kb);
    let direct_paths = enumerate_paths(&direct, 256);
    assert_eq!(&direct_paths, kb.paths_of(&m.method_ref()).unwrap());
}

#[test]
fn kb_save_load_round_trip() {
    let (units, index) = f1_project();
    let kb = build_kb(&units, &index, 256);
    let text = save_kb(&kb);
    let loaded = load_kb(&text).unwrap();
    assert_eq!(kb, loaded);
    // Byte-identical re-save.
    assert_eq!(text, save_kb(&loaded));
}

#[test]
fn kb_load_rejects_truncated_and_versioned_input() {
    let (units, index) = f1_project();
    let kb = build_kb(&units, &index, 256);
    let text = save_kb(&kb);
    let truncated = &text[..text.len() / 2];
    assert!(matches!(
        load_kb(truncated),
        Err(PersistError::MalformedInput(_))
    ));
    let old = text.replace("\"format_version\": 1", "\"format_version\": 0");
    assert!(matches!(
        load_kb(&old),
        Err(PersistError::VersionMismatch { found: 0, .. })
    ));
}

#[test]
fn path_cap_sets_truncation_flag() {
    let (_units, index) = f1_project();
    let m = method(&index, "Metaphone", "contains");
    let cfg = build_cfg(m, &index).unwrap().cfg;
    let set = enumerate_paths(&cfg, 3);
    assert_eq!(set.paths.len(), 3);
    assert!(set.truncated);
}

#[test]
fn abstract_method_has_no_cfg() {
    let src = r#"
class Base {
    public abstract int f(int x);
}
class Impl extends Base {
    public int f(int x) {
        return x;
    }
}
"#;
    let (_units, index) = checked_project(vec![parse(src, "a.sj").unwrap()]);
    let decl = index
        .class("Base")
        .unwrap()
        .decl
        .methods
        .iter()
        .find(|m| m.name == "f")
        .unwrap();
    assert!(build_cfg(decl, &index).is_err());
}

#[test]
fn call_lifting_creates_call_nodes_in_guard_position() {
    let (_units, index) = f1_project();
    let m = method(&index, "Metaphone", "conditionC0");
    let cfg = build_cfg(m, &index).unwrap().cfg;
    let call_nodes: Vec<_> = cfg
        .nodes
        .iter()
        .filter_map(|n| match &n.kind {
            NodeKind::Call { info } => Some(info),
            _ => None,
        })
        .collect();
    // contains (twice) and isVowel; charAt is a built-in, not a call node.
    assert_eq!(call_nodes.len(), 3);
    assert!(call_nodes.iter().all(|c| c.result.is_some()));
}
