//! Property-based invariants: pretty/parse round trips, checker soundness
//! at runtime, dispatch against a brute-force chain scan, path structural
//! validity, obligation soundness, coverage monotonicity, and predicate
//! intersection against brute-force set semantics.

use pathgen_core::distill::predicate::{CharConstraint, CharMode, IntConstraint, StrConstraint};
use pathgen_core::distill::{intersect_predicates, ParamConstraint, ParamPredicate};
use pathgen_core::knowledge::{build_kb, CfgPath, EdgeLabel, NodeKind};
use pathgen_core::lang::{check, parse, pretty_unit, ProgramIndex, SourceUnit, Type, Value};
use proptest::prelude::*;
use std::collections::BTreeSet;
use std::rc::Rc;

fn corpus_units() -> Vec<SourceUnit> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "sj").unwrap_or(false))
        .collect();
    files.sort();
    files
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(f).unwrap();
            parse(&text, &f.file_name().unwrap().to_string_lossy()).unwrap()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random syntactically-valid ASTs for the round-trip property.
// ---------------------------------------------------------------------------

fn arb_ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "c", "x", "y", "val"]).prop_map(str::to_string)
}

fn arb_type() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["int", "bool", "char", "string"]).prop_map(str::to_string)
}

fn arb_literal() -> impl Strategy<Value = String> {
    prop_oneof![
        (-99i64..100).prop_map(|v| v.to_string()),
        prop::bool::ANY.prop_map(|b| b.to_string()),
        prop::sample::select(vec!["'A'", "'\\n'", "'\\''", "'\\\\'", "'z'"])
            .prop_map(str::to_string),
        prop::sample::select(vec!["\"\"", "\"AE\"", "\"a\\\"b\"", "\"x\\\\y\"", "\"\\0\""])
            .prop_map(str::to_string),
    ]
}

fn arb_expr(depth: u32) -> BoxedStrategy<String> {
    if depth == 0 {
        return prop_oneof![arb_literal(), arb_ident()].boxed();
    }
    let inner = arb_expr(depth - 1);
    prop_oneof![
        arb_literal(),
        arb_ident(),
        (arb_expr(depth - 1), arb_expr(depth - 1), arb_op())
            .prop_map(|(l, r, op)| format!("{l} {op} {r}")),
        inner.clone().prop_map(|e| format!("!({e})")),
        inner.clone().prop_map(|e| format!("-({e})")),
        (arb_ident(), arb_expr(depth - 1)).prop_map(|(recv, arg)| format!("{recv}.m({arg})")),
        arb_expr(depth - 1).prop_map(|a| format!("length(concat(\"A\", substring(\"AB\", 0, 1))) + ({a}) * 0")),
        (arb_ident(), arb_expr(depth - 1))
            .prop_map(|(recv, arg)| format!("reflect call {recv}.Ka#m({arg})")),
        arb_ident().prop_map(|f| format!("Ka.{f}")),
    ]
    .boxed()
}

fn arb_op() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||",
    ])
    .prop_map(str::to_string)
}

fn arb_stmt(depth: u32) -> BoxedStrategy<String> {
    let expr = arb_expr(2);
    if depth == 0 {
        return prop_oneof![
            (arb_type(), arb_ident(), expr.clone())
                .prop_map(|(t, n, e)| format!("{t} {n} = {e};")),
            (arb_ident(), expr.clone()).prop_map(|(n, e)| format!("{n} = {e};")),
            expr.clone().prop_map(|e| format!("return {e};")),
            (arb_ident(), expr.clone())
                .prop_map(|(f, e)| format!("reflect set Ka#{f} = {e};")),
            expr.prop_map(|e| format!("{e};")),
        ]
        .boxed();
    }
    let block = prop::collection::vec(arb_stmt(depth - 1), 0..3)
        .prop_map(|stmts| stmts.join("\n"));
    prop_oneof![
        arb_stmt(0),
        (arb_expr(1), block.clone(), block.clone()).prop_map(|(g, t, e)| format!(
            "if ({g}) {{\n{t}\n}} else {{\n{e}\n}}"
        )),
        (arb_expr(1), block.clone()).prop_map(|(g, b)| format!("if ({g}) {{\n{b}\n}}")),
        (arb_expr(1), block).prop_map(|(g, b)| format!("while ({g}) {{\n{b}\n}}")),
    ]
    .boxed()
}

fn arb_unit() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(
            (arb_type(), arb_ident(), prop::bool::ANY, arb_literal()),
            0..3,
        ),
        prop::collection::vec((arb_type(), arb_ident(), arb_stmt(2)), 1..3),
    )
        .prop_map(|(fields, methods)| {
            let mut out = String::from("class Ka extends Kb {\n");
            for (i, (ty, name, is_static, init)) in fields.iter().enumerate() {
                let st = if *is_static { "static " } else { "" };
                out.push_str(&format!("public {st}{ty} {name}{i} = {init};\n"));
            }
            for (i, (ret, param, body)) in methods.iter().enumerate() {
                out.push_str(&format!(
                    "private {ret} m{i}({ret} {param}) {{\n{body}\nreturn {param};\n}}\n"
                ));
            }
            out.push_str("}\nclass Kb {\n    public abstract int m(int a);\n}\n");
            out
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// parse(pretty(parse(t))) is structurally equal to parse(t): the
    /// canonical form is a fixed point.
    #[test]
    fn pretty_parse_round_trip(source in arb_unit()) {
        // Only syntactic validity is required here.
        let Ok(unit) = parse(&source, "gen.sj") else {
            return Ok(());
        };
        let printed = pretty_unit(&unit);
        let reparsed = parse(&printed, "gen.sj").expect("canonical form parses");
        let reprinted = pretty_unit(&reparsed);
        prop_assert_eq!(&printed, &reprinted);
        // And the reparse of the canonical form is stable as a tree.
        let third = parse(&reprinted, "gen.sj").expect("still parses");
        prop_assert_eq!(pretty_unit(&third), printed);
    }
}

// ---------------------------------------------------------------------------
// Checker soundness at runtime.
// ---------------------------------------------------------------------------

/// Deterministic generator of well-typed single-class programs over int
/// locals, mirroring the acceptance generator.
fn well_typed_program(seed: u64, arg_a: i64, arg_b: i64) -> String {
    let mut state = seed | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut body = String::new();
    for _ in 0..(next() % 4 + 1) {
        match next() % 4 {
            0 => body.push_str(&format!("a = a + {};\n", next() % 3)),
            1 => body.push_str(&format!("b = b - {};\n", next() % 3)),
            2 => body.push_str(&format!(
                "if (a {} {}) {{\nb = b + a;\n}} else {{\na = a - 1;\n}}\n",
                ["<", "<=", ">", ">=", "==", "!="][(next() % 6) as usize],
                (next() % 7) as i64 - 3
            )),
            _ => body.push_str(&format!(
                "while (a < {} && b > -4) {{\na = a + 1;\nb = b - 1;\n}}\n",
                (next() % 5) as i64
            )),
        }
    }
    format!(
        "class R {{\n  public static int probe(int a, int b) {{\n{body}return a + b;\n  }}\n}}\n\
         class Test {{\n  public static void test() {{\n    int r = R.probe({arg_a}, {arg_b});\n  }}\n}}\n"
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Any program that checks clean never raises name or type confusion at
    /// runtime (division, bounds, budget exhaustion remain possible).
    #[test]
    fn checked_programs_never_raise_internal(seed in any::<u64>(), a in -8i64..=8, b in -8i64..=8) {
        let source = well_typed_program(seed, a, b);
        let unit = parse(&source, "gen.sj").expect("generator emits valid syntax");
        let units = vec![unit];
        let diags = check(&units);
        prop_assert!(diags.is_empty(), "generator emits well-typed code: {diags:?}");
        let (index, _) = ProgramIndex::build(&units);
        let entry = pathgen_core::lang::MethodRef {
            class: "Test".to_string(),
            sig: pathgen_core::lang::MethodSig { name: "test".to_string(), params: vec![] },
        };
        let trace = pathgen_core::lang::execute(
            &index,
            &entry,
            &entry,
            pathgen_core::lang::Limits { max_steps: 20_000 },
        )
        .unwrap();
        for event in &trace.events {
            if let pathgen_core::lang::TraceEvent::Exception { kind, message, .. } = event {
                prop_assert!(
                    *kind != pathgen_core::lang::interp::ExceptionKind::Internal,
                    "internal confusion on checked program: {message}\n{source}"
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dispatch against a brute-force chain scan.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct HierarchySpec {
    /// parent[i] is an index < i, or None for roots.
    parents: Vec<Option<usize>>,
    /// methods[i] is a subset of the signature pool per class.
    methods: Vec<Vec<usize>>,
}

fn arb_hierarchy() -> impl Strategy<Value = HierarchySpec> {
    (2usize..=5).prop_flat_map(|n| {
        let parents: Vec<BoxedStrategy<Option<usize>>> = (0..n)
            .map(|i| {
                if i == 0 {
                    Just(None).boxed()
                } else {
                    prop::option::of(0..i).boxed()
                }
            })
            .collect();
        let methods = prop::collection::vec(prop::collection::vec(0usize..3, 0..3), n);
        (parents, methods).prop_map(|(parents, methods)| HierarchySpec { parents, methods })
    })
}

fn hierarchy_source(spec: &HierarchySpec) -> String {
    let mut out = String::new();
    for (i, parent) in spec.parents.iter().enumerate() {
        let ext = match parent {
            Some(p) => format!(" extends C{p}"),
            None => String::new(),
        };
        out.push_str(&format!("class C{i}{ext} {{\n"));
        let mut sigs: Vec<usize> = spec.methods[i].clone();
        sigs.sort_unstable();
        sigs.dedup();
        for sig in sigs {
            out.push_str(&format!(
                "    public int m{sig}() {{\n        return {i};\n    }}\n"
            ));
        }
        out.push_str("}\n");
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// resolve_dispatch returns exactly what a brute-force scan of the full
    /// superclass chain returns.
    #[test]
    fn dispatch_matches_chain_scan(spec in arb_hierarchy(), class in 0usize..5, sig in 0usize..3) {
        let source = hierarchy_source(&spec);
        let unit = parse(&source, "h.sj").unwrap();
        let units = vec![unit];
        prop_assert!(check(&units).is_empty());
        let (index, _) = ProgramIndex::build(&units);
        let kb = build_kb(&units, &index, 64);

        let class = class % spec.parents.len();
        let class_name = format!("C{class}");
        let method_sig = pathgen_core::lang::MethodSig {
            name: format!("m{sig}"),
            params: vec![],
        };

        // Independent oracle: walk the generated parent chain directly.
        let mut expected = None;
        let mut cursor = Some(class);
        while let Some(i) = cursor {
            let mut sigs = spec.methods[i].clone();
            sigs.sort_unstable();
            sigs.dedup();
            if sigs.contains(&sig) {
                expected = Some(format!("C{i}"));
                break;
            }
            cursor = spec.parents[i];
        }

        let resolved = kb.facts.resolve_dispatch(&class_name, &method_sig);
        match expected {
            Some(owner) => {
                prop_assert_eq!(resolved.unwrap().owner.clone(), owner);
            }
            None => prop_assert!(resolved.is_err()),
        }
    }
}

// ---------------------------------------------------------------------------
// Predicate intersection against brute-force set semantics.
// ---------------------------------------------------------------------------

fn arb_constraint(ty: &Type) -> BoxedStrategy<ParamConstraint> {
    match ty {
        Type::Int => (
            -9i64..=9,
            -9i64..=9,
            prop::collection::btree_set(-9i64..=9, 0..3),
        )
            .prop_map(|(a, b, excluded)| {
                ParamConstraint::Int(IntConstraint {
                    lo: a.min(b),
                    hi: a.max(b),
                    excluded,
                })
            })
            .boxed(),
        Type::Bool => prop::bool::ANY.prop_map(ParamConstraint::Bool).boxed(),
        Type::Char => (
            prop::bool::ANY,
            prop::collection::btree_set(prop::sample::select(vec!['A', 'E', 'I', 'B', 'X']), 0..4),
        )
            .prop_map(|(inside, chars)| {
                ParamConstraint::Char(CharConstraint {
                    mode: if inside { CharMode::In } else { CharMode::NotIn },
                    chars,
                })
            })
            .boxed(),
        _ => (
            prop::option::of(prop::sample::select(vec!["", "A", "AB", "AEI"])),
            0i64..=4,
            0i64..=4,
        )
            .prop_map(|(equals, a, b)| {
                ParamConstraint::Str(StrConstraint {
                    equals: equals.map(str::to_string),
                    len: IntConstraint {
                        lo: a.min(b),
                        hi: a.max(b),
                        excluded: BTreeSet::new(),
                    },
                })
            })
            .boxed(),
    }
}

fn domain_values(ty: &Type) -> Vec<Value> {
    match ty {
        Type::Int => (-8..=8).map(Value::Int).collect(),
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::Char => "AEIOUYBCX".chars().map(Value::Char).collect(),
        _ => ["", "A", "B", "AB", "AEI", "XXX"]
            .iter()
            .map(|s| Value::Str(Rc::new(s.to_string())))
            .collect(),
    }
}

fn arb_constraint_pair() -> impl Strategy<Value = (Type, ParamConstraint, ParamConstraint)> {
    (0usize..4).prop_flat_map(|which| {
        let ty = [Type::Int, Type::Bool, Type::Char, Type::Str][which].clone();
        let a = arb_constraint(&ty);
        let b = arb_constraint(&ty);
        (Just(ty), a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// satisfying-set(intersect(a, b)) equals the intersection of the
    /// satisfying sets over the whole domain, for every constraint type.
    #[test]
    fn intersection_matches_set_semantics((ty, a_c, b_c) in arb_constraint_pair()) {
        let params = vec![("p".to_string(), ty.clone())];
        let wrap = |c: ParamConstraint| {
            let mut p = ParamPredicate::unconstrained(&params);
            if let ParamPredicate::Conj { params } = &mut p {
                params[0].constraint = c;
            }
            p
        };
        let a = wrap(a_c);
        let b = wrap(b_c);
        let inter = intersect_predicates(&a, &b);
        for v in domain_values(&ty) {
            let args = [v];
            prop_assert_eq!(
                inter.satisfied_by(&args),
                a.satisfied_by(&args) && b.satisfied_by(&args)
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Structural path validity, obligation soundness, coverage monotonicity,
// and the focal_reached definition, over the fixture corpus.
// ---------------------------------------------------------------------------

/// Independent path validator: replay the obligations as a decision stream
/// from the entry node; the first-visit order must equal `node_ids`, the
/// walk must end at the exit, and every obligation must be consumed with
/// the traversed edge's label.
fn replay_path(cfg: &pathgen_core::knowledge::Cfg, path: &CfgPath) -> Result<(), String> {
    let mut visited: BTreeSet<u32> = BTreeSet::new();
    let mut first_visits: Vec<u32> = Vec::new();
    let mut obligations = path.obligations.iter();
    let mut cursor = cfg.entry;
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > 10_000 {
            return Err("replay did not terminate".to_string());
        }
        if visited.insert(cursor) {
            first_visits.push(cursor);
        }
        if cursor == cfg.exit {
            break;
        }
        let next = match &cfg.node(cursor).kind {
            NodeKind::Branch { .. } => {
                let Some((node, outcome)) = obligations.next() else {
                    return Err(format!("missing obligation at branch {cursor}"));
                };
                if *node != cursor {
                    return Err(format!(
                        "obligation references node {node}, walk is at {cursor}"
                    ));
                }
                let wanted = if *outcome {
                    EdgeLabel::True
                } else {
                    EdgeLabel::False
                };
                cfg.edges
                    .iter()
                    .find(|e| e.from == cursor && e.label == wanted)
                    .ok_or_else(|| format!("no {wanted:?} edge out of {cursor}"))?
                    .to
            }
            _ => {
                cfg.edges
                    .iter()
                    .find(|e| e.from == cursor && e.label == EdgeLabel::Seq)
                    .ok_or_else(|| format!("no seq edge out of {cursor}"))?
                    .to
            }
        };
        cursor = next;
    }
    if obligations.next().is_some() {
        return Err("unconsumed obligations".to_string());
    }
    if first_visits != path.node_ids {
        return Err(format!(
            "first-visit order {first_visits:?} differs from node_ids {:?}",
            path.node_ids
        ));
    }
    Ok(())
}

#[test]
fn corpus_paths_replay_structurally() {
    let units = corpus_units();
    let (index, _) = ProgramIndex::build(&units);
    let kb = build_kb(&units, &index, 256);
    let mut total = 0;
    for (method_id, set) in &kb.paths {
        let cfg = &kb.cfgs[method_id];
        for path in &set.paths {
            replay_path(cfg, path)
                .unwrap_or_else(|e| panic!("{method_id}: invalid path {path:?}: {e}"));
            total += 1;
        }
    }
    assert!(total > 60, "corpus yields a substantial path population: {total}");
}

#[test]
fn brute_force_traces_match_obligations_exactly() {
    use pathgen_core::genloop::{BruteForce, BruteResult, ValueDomains};
    let units = corpus_units();
    let (index, _) = ProgramIndex::build(&units);
    let kb = build_kb(&units, &index, 256);
    let domains = ValueDomains::for_project(&units);
    let brute = BruteForce {
        project: &units,
        index: &index,
        kb: &kb,
        domains: &domains,
        limits: Default::default(),
    };

    let mut found = 0;
    for (method_id, set) in &kb.paths {
        let focal = pathgen_core::distill::parse_method_id(method_id).unwrap();
        let cfg = &kb.cfgs[method_id];
        for path_index in 0..set.paths.len() {
            let Ok(ctx) = pathgen_core::distill::distill(&focal, path_index, &kb, 3) else {
                continue;
            };
            if ctx.infeasible {
                continue;
            }
            let BruteResult::Found { trace, .. } = brute.generate(&ctx) else {
                continue;
            };
            found += 1;
            let expected: Vec<(u32, u32, bool)> = set.paths[path_index]
                .obligations
                .iter()
                .map(|(node, outcome)| match &cfg.node(*node).kind {
                    NodeKind::Branch { info } => (info.guard_site, info.atom, *outcome),
                    _ => panic!("obligation on non-branch"),
                })
                .collect();
            assert_eq!(
                trace.branch_events_of(method_id),
                expected,
                "{method_id} path {path_index}: replayed branch events drift from obligations"
            );
        }
    }
    assert!(found >= 50, "most corpus paths are satisfiable: {found}");
}

#[test]
fn coverage_is_monotone_under_trace_addition() {
    use pathgen_core::lang::measure_coverage;
    let units = corpus_units();
    let (index, _) = ProgramIndex::build(&units);
    let kb = build_kb(&units, &index, 256);
    let domains = pathgen_core::genloop::ValueDomains::for_project(&units);
    let brute = pathgen_core::genloop::BruteForce {
        project: &units,
        index: &index,
        kb: &kb,
        domains: &domains,
        limits: Default::default(),
    };

    // Gather traces from the Metaphone methods.
    let mut traces = Vec::new();
    for (method_id, set) in &kb.paths {
        if !method_id.starts_with("Metaphone#") {
            continue;
        }
        let focal = pathgen_core::distill::parse_method_id(method_id).unwrap();
        for path_index in 0..set.paths.len() {
            if let Ok(ctx) = pathgen_core::distill::distill(&focal, path_index, &kb, 3) {
                if let pathgen_core::genloop::BruteResult::Found { trace, .. } =
                    brute.generate(&ctx)
                {
                    traces.push(trace);
                }
            }
        }
    }
    assert!(traces.len() >= 8);

    let scope: BTreeSet<String> = kb
        .facts
        .methods
        .iter()
        .filter(|m| m.owner == "Metaphone")
        .map(|m| m.id.clone())
        .collect();
    let mut prev_branches: std::collections::BTreeMap<String, BTreeSet<(u32, bool)>> =
        Default::default();
    let mut prev_lines: std::collections::BTreeMap<String, BTreeSet<u32>> = Default::default();
    for upto in 0..=traces.len() {
        let slice: Vec<&pathgen_core::lang::ExecutionTrace> = traces[..upto].iter().collect();
        let report = measure_coverage(&slice, &index, &scope);
        for (method, cov) in &report.methods {
            let prev_b = prev_branches.entry(method.clone()).or_default();
            assert!(
                prev_b.is_subset(&cov.covered_branch_outcomes),
                "branch coverage shrank for {method} at trace {upto}"
            );
            *prev_b = cov.covered_branch_outcomes.clone();
            let prev_l = prev_lines.entry(method.clone()).or_default();
            assert!(prev_l.is_subset(&cov.covered_lines));
            *prev_l = cov.covered_lines.clone();
        }
    }
}

#[test]
fn focal_reached_is_the_literal_event_order_predicate() {
    use pathgen_core::lang::interp::focal_reached;
    use pathgen_core::lang::TraceEvent;
    let units = corpus_units();
    let (index, _) = ProgramIndex::build(&units);

    let focal = pathgen_core::lang::MethodRef {
        class: "SafeMath".to_string(),
        sig: pathgen_core::lang::MethodSig {
            name: "div".to_string(),
            params: vec![Type::Int, Type::Int],
        },
    };
    let candidates = [
        // Exception strictly before the focal entry.
        r#"class Test {
    public static void test() {
        int boom = 1 / 0;
        int ok = SafeMath.div(4, 2);
    }
}"#,
        // Focal entered, then an exception afterwards.
        r#"class Test {
    public static void test() {
        int ok = SafeMath.div(4, 2);
        int boom = 1 / 0;
    }
}"#,
        // Clean completion.
        r#"class Test {
    public static void test() {
        int ok = SafeMath.div(4, 2);
    }
}"#,
    ];
    for source in candidates {
        let unit = parse(source, "t.sj").unwrap();
        let combined = index.with_unit(&unit);
        let entry = pathgen_core::lang::MethodRef {
            class: "Test".to_string(),
            sig: pathgen_core::lang::MethodSig {
                name: "test".to_string(),
                params: vec![],
            },
        };
        let trace =
            pathgen_core::lang::execute(&combined, &entry, &focal, Default::default()).unwrap();

        // Independent scan of the raw events.
        let mut expected = false;
        for event in &trace.events {
            match event {
                TraceEvent::MethodEnter { method } if method == &focal.id() => {
                    expected = true;
                    break;
                }
                TraceEvent::Exception { .. } => break,
                _ => {}
            }
        }
        assert_eq!(trace.focal_reached, expected);
        assert_eq!(focal_reached(&trace.events, &focal.id()), expected);
    }
}
