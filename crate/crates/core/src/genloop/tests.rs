use crate::distill::context::distill;
use crate::genloop::backend::{BackendFailure, BackendRequest, GeneratorBackend};
use crate::genloop::brute::{BruteForce, BruteForceBackend, BruteResult};
use crate::genloop::domains::ValueDomains;
use crate::genloop::prompt::build_prompt;
use crate::genloop::scripted::{Script, ScriptedBackend};
use crate::genloop::session::{run_session, SessionConfig, SessionStatus};
use crate::genloop::validate::{validate, ValidationOutcome};
use crate::knowledge::kb::{build_kb, KnowledgeBase};
use crate::knowledge::tests::checked_project;
use crate::lang::ast::*;
use crate::lang::index::ProgramIndex;
use crate::lang::interp::Limits;
use crate::lang::parser::parse;
use crate::lang::pretty::pretty_method;
use crate::lang::tests::fixture_f1;

struct World {
    units: Vec<SourceUnit>,
    index: ProgramIndex,
    kb: KnowledgeBase,
    domains: ValueDomains,
}

fn world(units: Vec<SourceUnit>) -> World {
    let (units, index) = checked_project(units);
    let kb = build_kb(&units, &index, 256);
    let domains = ValueDomains::for_project(&units);
    World {
        units,
        index,
        kb,
        domains,
    }
}

fn f1_world() -> World {
    world(vec![fixture_f1()])
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

fn focal_source(world: &World, focal: &MethodRef) -> String {
    let decl = world
        .index
        .class(&focal.class)
        .unwrap()
        .decl
        .methods
        .iter()
        .find(|m| m.signature() == focal.sig)
        .unwrap()
        .clone();
    pretty_method(&decl)
}

fn early_false_path(kb: &KnowledgeBase, focal: &MethodRef) -> usize {
    kb.paths_of(focal)
        .unwrap()
        .paths
        .iter()
        .position(|p| p.obligations.len() == 2 && !p.obligations[0].1 && p.obligations[1].1)
        .unwrap()
}

#[test]
fn prompt_step_four_contains_index_constraint() {
    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let prompt = build_prompt(&ctx, &focal_source(&w, &focal)).unwrap();
    assert!(
        prompt.command[3].contains("index < 0"),
        "step (iv) must carry the derived inequality: {}",
        prompt.command[3]
    );
    assert_eq!(prompt.command.len(), 4);
    assert!(prompt.command[2].contains("No variables to set"));

    // Determinism: identical context renders byte-identical prompts.
    let again = build_prompt(&ctx, &focal_source(&w, &focal)).unwrap();
    assert_eq!(prompt.render_text(), again.render_text());
}

#[test]
fn infeasible_context_refuses_prompt() {
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
    let w = world(vec![parse(src, "p.sj").unwrap()]);
    let focal = mref("P", "paradox", &[Type::Int]);
    let idx = w
        .kb
        .paths_of(&focal)
        .unwrap()
        .paths
        .iter()
        .position(|p| p.obligations.len() == 2 && p.obligations[0].1 && !p.obligations[1].1)
        .unwrap();
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    assert!(ctx.infeasible);
    assert!(build_prompt(&ctx, "src").is_err());

    // Brute force confirms there is no driving input.
    let brute = BruteForce {
        project: &w.units,
        index: &w.index,
        kb: &w.kb,
        domains: &w.domains,
        limits: Limits::default(),
    };
    assert!(matches!(brute.generate(&ctx), BruteResult::Unsat));
}

#[test]
fn brute_force_finds_condition_c0_early_false() {
    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let brute = BruteForce {
        project: &w.units,
        index: &w.index,
        kb: &w.kb,
        domains: &w.domains,
        limits: Limits::default(),
    };
    let BruteResult::Found { source, trace, .. } = brute.generate(&ctx) else {
        panic!("the early-false path is feasible");
    };
    assert!(source.contains("reflect call receiver.Metaphone#conditionC0("));
    assert!(trace.focal_reached);

    // Replay: the emitted test validates as Valid and reproduces the path's
    // branch decisions in order.
    let outcome = validate(&source, &w.units, &w.index, &focal, Limits::default());
    let ValidationOutcome::Valid(replay) = outcome else {
        panic!("emitted test must be valid: {outcome:?}");
    };
    assert_eq!(
        replay.branch_events_of(&focal.id()),
        trace.branch_events_of(&focal.id())
    );
}

#[test]
fn brute_force_trivial_for_branchless_static() {
    let src = r#"
class C {
    public static int id(int x) {
        return x;
    }
}
"#;
    let w = world(vec![parse(src, "c.sj").unwrap()]);
    let focal = mref("C", "id", &[Type::Int]);
    let ctx = distill(&focal, 0, &w.kb, 3).unwrap();
    let brute = BruteForce {
        project: &w.units,
        index: &w.index,
        kb: &w.kb,
        domains: &w.domains,
        limits: Limits::default(),
    };
    let BruteResult::Found { source, .. } = brute.generate(&ctx) else {
        panic!("branchless method always has a driving input");
    };
    // First tuple in enumeration order: the smallest int in the domain.
    assert!(source.contains("C.id(-8)"), "{source}");
}

#[test]
fn validation_differential() {
    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);

    // Compile-broken: unknown class.
    let broken = r#"
class Test {
    public static void test() {
        Ghost g = new Ghost();
    }
}
"#;
    let outcome = validate(broken, &w.units, &w.index, &focal, Limits::default());
    assert!(matches!(outcome, ValidationOutcome::CompileError(_)));

    // Throws before reaching the focal method.
    let throws_before = r#"
class Test {
    public static void test() {
        int boom = 1 / 0;
        Metaphone m = new Metaphone();
        bool r = reflect call m.Metaphone#conditionC0("CHIA", 0);
    }
}
"#;
    let outcome = validate(throws_before, &w.units, &w.index, &focal, Limits::default());
    assert!(matches!(outcome, ValidationOutcome::ExceptionBeforeFocal(_)));

    // Reaches the focal method, then throws afterwards: still valid.
    let throws_after = r#"
class Test {
    public static void test() {
        Metaphone m = new Metaphone();
        bool r = reflect call m.Metaphone#conditionC0("CHIA", 0);
        int boom = 1 / 0;
    }
}
"#;
    let outcome = validate(throws_after, &w.units, &w.index, &focal, Limits::default());
    assert!(matches!(outcome, ValidationOutcome::Valid(_)));

    // Missing the Test.test entry point is a compile-stage failure.
    let no_entry = r#"
class Test {
    public static void other() {
        int x = 1;
    }
}
"#;
    let outcome = validate(no_entry, &w.units, &w.index, &focal, Limits::default());
    let ValidationOutcome::CompileError(diags) = outcome else {
        panic!("missing entry must fail compile stage");
    };
    assert_eq!(diags[0].code, crate::diag::DiagCode::MissingTestEntry);
}

fn valid_test_source() -> String {
    r#"class Test {
    public static void test() {
        Metaphone m = new Metaphone();
        bool r = reflect call m.Metaphone#conditionC0("AXACHX", 3);
    }
}
"#
    .to_string()
}

#[test]
fn scripted_sessions_recover_after_k_broken_rounds() {
    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let source = focal_source(&w, &focal);

    for k in 0..5usize {
        let mut responses = vec!["class Broken {".to_string(); k];
        responses.push(valid_test_source());
        let mut backend = ScriptedBackend::new(Script { responses });
        let session = run_session(
            &ctx,
            &source,
            &w.units,
            &w.index,
            &mut backend,
            &SessionConfig::default(),
        );
        assert_eq!(session.status, SessionStatus::Valid, "k={k}");
        assert_eq!(session.rounds.len(), k + 1, "k={k}");
    }

    // All five rounds broken: exhausted at exactly max_rounds.
    let mut backend = ScriptedBackend::new(Script {
        responses: vec!["class Broken {".to_string(); 5],
    });
    let session = run_session(
        &ctx,
        &source,
        &w.units,
        &w.index,
        &mut backend,
        &SessionConfig::default(),
    );
    assert_eq!(session.status, SessionStatus::Exhausted);
    assert_eq!(session.rounds.len(), 5);
}

#[test]
fn backend_failure_consumes_a_round() {
    struct FlakyThenGood {
        calls: usize,
    }
    impl GeneratorBackend for FlakyThenGood {
        fn descriptor(&self) -> crate::genloop::backend::BackendDescriptor {
            crate::genloop::backend::BackendDescriptor {
                name: "flaky".to_string(),
                deterministic: false,
            }
        }
        fn produce(&mut self, _request: &BackendRequest) -> Result<String, BackendFailure> {
            self.calls += 1;
            if self.calls == 1 {
                Err(BackendFailure("transport down".to_string()))
            } else {
                Ok(valid_test_source())
            }
        }
    }

    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let mut backend = FlakyThenGood { calls: 0 };
    let session = run_session(
        &ctx,
        &focal_source(&w, &focal),
        &w.units,
        &w.index,
        &mut backend,
        &SessionConfig::default(),
    );
    assert_eq!(session.status, SessionStatus::Valid);
    assert_eq!(session.rounds.len(), 2);
    assert!(matches!(
        session.rounds[0].outcome,
        crate::genloop::session::RoundOutcome::BackendFailure(_)
    ));
}

#[test]
fn brute_backend_validates_in_round_one() {
    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let mut backend = BruteForceBackend {
        inner: BruteForce {
            project: &w.units,
            index: &w.index,
            kb: &w.kb,
            domains: &w.domains,
            limits: Limits::default(),
        },
    };
    let session = run_session(
        &ctx,
        &focal_source(&w, &focal),
        &w.units,
        &w.index,
        &mut backend,
        &SessionConfig::default(),
    );
    assert_eq!(session.status, SessionStatus::Valid);
    assert_eq!(session.rounds.len(), 1);
}

#[test]
fn external_backend_passthrough_timeout_and_empty() {
    use crate::genloop::external::ExternalBackend;
    use std::time::Duration;

    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let prompt = build_prompt(&ctx, "src").unwrap();
    let request = BackendRequest::Generate(prompt);

    // Echo-style stub returns fixed text verbatim.
    let mut echo = ExternalBackend::new(
        "cat > /dev/null; printf 'class Test { public static void test() { int x = 1; } }'",
        Duration::from_secs(10),
    );
    let text = echo.produce(&request).unwrap();
    assert!(text.contains("class Test"));

    // Timeout.
    let mut slow = ExternalBackend::new("sleep 5", Duration::from_millis(200));
    let err = slow.produce(&request).unwrap_err();
    assert!(err.0.contains("timed out"), "{err}");

    // Empty output.
    let mut empty = ExternalBackend::new("cat > /dev/null; true", Duration::from_secs(10));
    let err = empty.produce(&request).unwrap_err();
    assert!(err.0.contains("empty"), "{err}");

    // Nonzero exit.
    let mut failing = ExternalBackend::new("cat > /dev/null; exit 3", Duration::from_secs(10));
    let err = failing.produce(&request).unwrap_err();
    assert!(err.0.contains("exited"), "{err}");
}

#[test]
fn wire_json_has_versioned_schema() {
    let w = f1_world();
    let focal = mref("Metaphone", "conditionC0", &[Type::Str, Type::Int]);
    let idx = early_false_path(&w.kb, &focal);
    let ctx = distill(&focal, idx, &w.kb, 3).unwrap();
    let prompt = build_prompt(&ctx, "src").unwrap();
    let wire = BackendRequest::Generate(prompt.clone()).wire_json();
    let value: serde_json::Value = serde_json::from_str(&wire).unwrap();
    assert_eq!(value["kind"], "generate");
    assert_eq!(value["format_version"], 1);
    assert!(value.get("prior_candidate").is_none());

    let repair = BackendRequest::Repair(crate::genloop::backend::RepairRequest {
        prior_candidate: "class Broken {".to_string(),
        failure: crate::genloop::backend::FailureInfo::Compile {
            diagnostics: vec![],
        },
        prompt,
    });
    let value: serde_json::Value = serde_json::from_str(&repair.wire_json()).unwrap();
    assert_eq!(value["kind"], "repair");
    assert_eq!(value["failure"]["stage"], "syntax");
}
