use crate::diag::DiagCode;
use crate::lang::ast::*;
use crate::lang::checker::check;
use crate::lang::index::ProgramIndex;
use crate::lang::interp::{execute, Limits, Outcome};
use crate::lang::parser::parse;
use crate::lang::pretty::pretty_unit;

pub fn fixture_f1() -> SourceUnit {
    let text = include_str!("../../fixtures/corpus/metaphone.sj");
    parse(text, "metaphone.sj").expect("fixture parses")
}

fn method_ref(class: &str, name: &str, params: &[Type]) -> MethodRef {
    MethodRef {
        class: class.to_string(),
        sig: MethodSig {
            name: name.to_string(),
            params: params.to_vec(),
        },
    }
}

#[test]
fn empty_file_parses_to_zero_classes() {
    let unit = parse("", "empty.sj").unwrap();
    assert!(unit.classes.is_empty());
}

#[test]
fn fixture_f1_has_one_class_three_methods() {
    let unit = fixture_f1();
    assert_eq!(unit.classes.len(), 1);
    assert_eq!(unit.classes[0].name, "Metaphone");
    assert_eq!(unit.classes[0].methods.len(), 3);
    assert_eq!(unit.classes[0].fields.len(), 1);
}

#[test]
fn syntax_error_reports_span_and_no_unit() {
    let err = parse("class A { int f( { }", "bad.sj").unwrap_err();
    assert_eq!(err.len(), 1);
    assert_eq!(err[0].code, DiagCode::SyntaxError);
    // Members require an access modifier, so the parse fails at `int`,
    // before ever reaching the dangling `(`.
    assert_eq!(err[0].span.line, 1);
    assert!(err[0].span.col >= 11);
}

#[test]
fn pretty_parse_round_trip_is_stable() {
    let unit = fixture_f1();
    let printed = pretty_unit(&unit);
    let reparsed = parse(&printed, "metaphone.sj").expect("pretty output parses");
    let reprinted = pretty_unit(&reparsed);
    assert_eq!(printed, reprinted);
}

#[test]
fn fixture_f1_checks_clean() {
    let unit = fixture_f1();
    let diags = check(&[unit]);
    assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
}

#[test]
fn external_private_call_is_access_error() {
    let test = r#"
class Test {
    public static void test() {
        Metaphone m = new Metaphone();
        bool r = m.conditionC0("X", 0);
    }
}
"#;
    let f1 = fixture_f1();
    let test_unit = parse(test, "test.sj").unwrap();
    let diags = check(&[f1, test_unit]);
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].code, DiagCode::AccessPrivate);
}

#[test]
fn reflective_private_call_checks_clean_and_runs() {
    let test = r#"
class Test {
    public static void test() {
        Metaphone m = new Metaphone();
        bool r = reflect call m.Metaphone#conditionC0("AXACHX", 3);
    }
}
"#;
    let f1 = fixture_f1();
    let test_unit = parse(test, "test.sj").unwrap();
    let project = vec![f1, test_unit];
    let diags = check(&project);
    assert!(diags.is_empty(), "{diags:?}");

    let (index, _) = ProgramIndex::build(&project);
    let entry = method_ref("Test", "test", &[]);
    let focal = method_ref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let trace = execute(&index, &entry, &focal, Limits::default()).unwrap();
    assert!(trace.focal_reached);
    assert_eq!(trace.outcome, Outcome::Completed);
}

#[test]
fn abstract_instantiation_is_an_error() {
    let src = r#"
class AbstractBase {
    public abstract int f(int x);
}
class Use {
    public static void go() {
        AbstractBase b = new AbstractBase();
    }
}
"#;
    let unit = parse(src, "abs.sj").unwrap();
    let diags = check(&[unit]);
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].code, DiagCode::AbstractInstantiation);
}

#[test]
fn concrete_class_must_override_abstract_methods() {
    let src = r#"
class Base {
    public abstract int f(int x);
}
class Child extends Base {
    public int g(int x) {
        return x;
    }
}
"#;
    let unit = parse(src, "missing.sj").unwrap();
    let diags = check(&[unit]);
    assert!(diags.iter().any(|d| d.code == DiagCode::MissingOverride), "{diags:?}");
}

#[test]
fn exception_before_focal_clears_focal_reached() {
    let src = r#"
class M {
    public static int divide(int a, int b) {
        return a / b;
    }
}
class Test {
    public static void test() {
        int boom = M.divide(1, 0);
        int ok = M.divide(4, 2);
    }
}
"#;
    let unit = parse(src, "div.sj").unwrap();
    let project = vec![unit];
    assert!(check(&project).is_empty());
    let (index, _) = ProgramIndex::build(&project);
    let entry = method_ref("Test", "test", &[]);
    let focal = method_ref("M", "divide", &[Type::Int, Type::Int]);
    // divide IS entered before the division throws, so the focal is reached.
    let trace = execute(&index, &entry, &focal, Limits::default()).unwrap();
    assert!(trace.focal_reached);
    assert_eq!(trace.outcome, Outcome::UncaughtException);

    // With a focal that is never entered, the exception comes first.
    let focal_missing = method_ref("Test", "never", &[]);
    let trace = execute(&index, &entry, &focal_missing, Limits::default()).unwrap();
    assert!(!trace.focal_reached);
}

#[test]
fn entry_equals_focal_counts_as_reached() {
    let src = r#"
class Test {
    public static void test() {
        int x = 1;
    }
}
"#;
    let unit = parse(src, "self.sj").unwrap();
    let project = vec![unit];
    let (index, _) = ProgramIndex::build(&project);
    let entry = method_ref("Test", "test", &[]);
    let trace = execute(&index, &entry, &entry, Limits::default()).unwrap();
    assert!(trace.focal_reached);
}

#[test]
fn step_budget_exceeded_surfaces_as_exception() {
    let src = r#"
class Loop {
    public static int spin() {
        int i = 0;
        while (i >= 0) {
            i = i + 1;
        }
        return i;
    }
}
class Test {
    public static void test() {
        int x = Loop.spin();
    }
}
"#;
    let unit = parse(src, "loop.sj").unwrap();
    let project = vec![unit];
    assert!(check(&project).is_empty());
    let (index, _) = ProgramIndex::build(&project);
    let entry = method_ref("Test", "test", &[]);
    let focal = method_ref("Loop", "spin", &[Type::Int]);
    let trace = execute(&index, &entry, &focal, Limits { max_steps: 5_000 }).unwrap();
    assert_eq!(trace.outcome, Outcome::UncaughtException);
    let (_, kind, _) = trace.exception().unwrap();
    assert_eq!(kind, crate::lang::interp::ExceptionKind::StepBudgetExceeded);
}

#[test]
fn dispatch_picks_lowest_override() {
    let src = r#"
class A {
    public int tag() {
        return 1;
    }
}
class B extends A {
    public int tag() {
        return 2;
    }
}
class C extends B {
    public int nothing() {
        return 0;
    }
}
"#;
    let unit = parse(src, "disp.sj").unwrap();
    let project = vec![unit];
    assert!(check(&project).is_empty());
    let (index, _) = ProgramIndex::build(&project);
    let sig = MethodSig {
        name: "tag".to_string(),
        params: vec![],
    };
    assert_eq!(index.resolve_dispatch("B", &sig).unwrap().owner, "B");
    assert_eq!(index.resolve_dispatch("C", &sig).unwrap().owner, "B");
    assert_eq!(index.resolve_dispatch("A", &sig).unwrap().owner, "A");
}

#[test]
fn reflect_set_bypasses_access_and_direct_set_does_not() {
    let direct = r#"
class Test {
    public static void test() {
        Metaphone.VOWELS = "XYZ";
    }
}
"#;
    let f1 = fixture_f1();
    let unit = parse(direct, "t.sj").unwrap();
    let diags = check(&[f1.clone(), unit]);
    assert!(diags.iter().any(|d| d.code == DiagCode::AccessPrivate));

    let reflective = r#"
class Test {
    public static void test() {
        reflect set Metaphone#VOWELS = "X";
        Metaphone m = new Metaphone();
        bool r = reflect call m.Metaphone#isVowel('A');
    }
}
"#;
    let unit = parse(reflective, "t.sj").unwrap();
    let project = vec![f1, unit];
    assert!(check(&project).is_empty());
    let (index, _) = ProgramIndex::build(&project);
    let entry = method_ref("Test", "test", &[]);
    let focal = method_ref("Metaphone", "isVowel", &[Type::Char]);
    let trace = execute(&index, &entry, &focal, Limits::default()).unwrap();
    assert!(trace.focal_reached);
    assert_eq!(trace.outcome, Outcome::Completed);
}
