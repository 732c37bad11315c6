use crate::harness::config::{BackendChoice, FocalFilter, RunConfig};
use crate::harness::report::{report_render, ReportFormat};
use crate::harness::run::run;
use crate::harness::select::select_focals;
use crate::knowledge::kb::build_kb;
use crate::knowledge::tests::checked_project;
use crate::lang::parser::parse;
use crate::lang::tests::fixture_f1;

fn write_f1_project(dir: &std::path::Path) {
    std::fs::write(
        dir.join("metaphone.sj"),
        include_str!("../../fixtures/corpus/metaphone.sj"),
    )
    .unwrap();
}

#[test]
fn default_filter_selects_all_three_f1_methods() {
    let (units, index) = checked_project(vec![fixture_f1()]);
    let kb = build_kb(&units, &index, 256);
    let focals = select_focals(&kb, &FocalFilter::BranchingAndDependent).unwrap();
    let names: Vec<String> = focals.iter().map(|f| f.sig.name.clone()).collect();
    assert_eq!(names, vec!["conditionC0", "contains", "isVowel"]);
}

#[test]
fn branchless_getter_is_excluded_by_default() {
    let src = r#"
class G {
    private static int VALUE = 7;
    public static int value() {
        return VALUE;
    }
    public static bool guarded(int x) {
        if (x > VALUE) {
            return true;
        }
        return false;
    }
}
"#;
    let (units, index) = checked_project(vec![parse(src, "g.sj").unwrap()]);
    let kb = build_kb(&units, &index, 256);
    let focals = select_focals(&kb, &FocalFilter::BranchingAndDependent).unwrap();
    let names: Vec<String> = focals.iter().map(|f| f.sig.name.clone()).collect();
    assert_eq!(names, vec!["guarded"]);
}

#[test]
fn explicit_filter_preserves_order() {
    let (units, index) = checked_project(vec![fixture_f1()]);
    let kb = build_kb(&units, &index, 256);
    let filter = FocalFilter::Explicit {
        methods: vec![
            "Metaphone#isVowel".to_string(),
            "Metaphone#conditionC0/(string,int)".to_string(),
        ],
    };
    let focals = select_focals(&kb, &filter).unwrap();
    let names: Vec<String> = focals.iter().map(|f| f.sig.name.clone()).collect();
    assert_eq!(names, vec!["isVowel", "conditionC0"]);

    let unknown = FocalFilter::Explicit {
        methods: vec!["Metaphone#nothing".to_string()],
    };
    assert!(select_focals(&kb, &unknown).is_err());
}

#[test]
fn f1_run_with_brute_force_validates_every_feasible_path() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    std::fs::create_dir_all(&project).unwrap();
    write_f1_project(&project);
    let out = dir.path().join("out");
    let config = RunConfig {
        project_dir: project,
        output_dir: out.clone(),
        ..RunConfig::default()
    };
    let artifacts = run(&config).unwrap();
    let report = &artifacts.report;
    assert_eq!(report.totals.focals, 3);
    // Every feasible (non-skipped) session produced a valid test in one
    // round: the brute-force valid rate is 1.0.
    assert!(report.totals.valid_tests > 0);
    assert_eq!(report.totals.valid_rate, 1.0, "{report:?}");
    for focal in &report.focals {
        assert_eq!(focal.invalid_tests, 0);
    }

    // Artifacts on disk.
    assert!(out.join("report.json").is_file());
    assert!(out.join("kb.json").is_file());
    assert!(out.join("timing.json").is_file());
    let tests: Vec<_> = std::fs::read_dir(out.join("tests")).unwrap().collect();
    assert_eq!(tests.len(), report.totals.valid_tests);

    // Render round trip.
    let json = report_render(report, ReportFormat::Json);
    let parsed: crate::harness::report::RunReport = serde_json::from_str(&json).unwrap();
    assert_eq!(&parsed, report);
    let table = report_render(report, ReportFormat::Table);
    assert!(table.contains("Metaphone.conditionC0") || table.contains("conditionC0"));
}

#[test]
fn empty_project_runs_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    std::fs::create_dir_all(&project).unwrap();
    let config = RunConfig {
        project_dir: project,
        output_dir: dir.path().join("out"),
        ..RunConfig::default()
    };
    let artifacts = run(&config).unwrap();
    assert_eq!(artifacts.report.totals.focals, 0);
    assert_eq!(artifacts.report.totals.valid_tests, 0);
    let table = report_render(&artifacts.report, ReportFormat::Table);
    assert!(table.contains("totals:"));
}

#[test]
fn scripted_all_broken_backend_exhausts_every_session() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    std::fs::create_dir_all(&project).unwrap();
    write_f1_project(&project);
    let script_path = dir.path().join("script.json");
    std::fs::write(
        &script_path,
        serde_json::json!({ "responses": ["class Broken {"] }).to_string(),
    )
    .unwrap();
    let config = RunConfig {
        project_dir: project,
        output_dir: dir.path().join("out"),
        backend: BackendChoice::Scripted { file: script_path },
        ..RunConfig::default()
    };
    let artifacts = run(&config).unwrap();
    assert_eq!(artifacts.report.totals.valid_tests, 0);
    for session in &artifacts.sessions {
        match session.status {
            crate::genloop::session::SessionStatus::Exhausted => {
                assert_eq!(session.rounds.len(), 5);
            }
            crate::genloop::session::SessionStatus::InfeasibleSkipped => {
                assert!(session.rounds.is_empty());
            }
            crate::genloop::session::SessionStatus::Valid => {
                panic!("no session can validate with a broken script")
            }
        }
    }
}

#[test]
fn compile_failure_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    std::fs::create_dir_all(&project).unwrap();
    std::fs::write(project.join("bad.sj"), "class A { int").unwrap();
    let config = RunConfig {
        project_dir: project,
        output_dir: dir.path().join("out"),
        ..RunConfig::default()
    };
    assert!(matches!(
        run(&config),
        Err(crate::harness::run::RunError::Compile(_))
    ));
}

#[test]
fn config_json_round_trip_with_defaults() {
    let text = r#"{ "project_dir": "fixtures/corpus", "max_rounds": 3 }"#;
    let config = RunConfig::from_json(text).unwrap();
    assert_eq!(config.max_rounds, 3);
    assert_eq!(config.path_cap, 256);
    assert_eq!(config.recursion_depth, 3);
    assert!(matches!(config.backend, BackendChoice::BruteForce));
    assert!(matches!(
        config.focal_filter,
        FocalFilter::BranchingAndDependent
    ));
}

#[test]
fn two_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    std::fs::create_dir_all(&project).unwrap();
    write_f1_project(&project);

    let run_once = |out: &std::path::Path| {
        let config = RunConfig {
            project_dir: project.clone(),
            output_dir: out.to_path_buf(),
            ..RunConfig::default()
        };
        run(&config).unwrap()
    };
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");
    run_once(&out1);
    run_once(&out2);

    let read = |p: &std::path::Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(
        read(&out1.join("report.json")),
        read(&out2.join("report.json"))
    );
    assert_eq!(read(&out1.join("kb.json")), read(&out2.join("kb.json")));
    for entry in std::fs::read_dir(out1.join("tests")).unwrap() {
        let p1 = entry.unwrap().path();
        let p2 = out2.join("tests").join(p1.file_name().unwrap());
        assert_eq!(read(&p1), read(&p2), "{p1:?}");
    }
    for entry in std::fs::read_dir(out1.join("prompts")).unwrap() {
        let p1 = entry.unwrap().path();
        let p2 = out2.join("prompts").join(p1.file_name().unwrap());
        assert_eq!(read(&p1), read(&p2), "{p1:?}");
    }
}
