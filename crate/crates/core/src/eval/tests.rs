use super::*;
use crate::context::dim;
use crate::syntax::{parse_core, parse_surface, translate_to_core};

fn ctx(pairs: &[(&str, i64)]) -> SimpleContext {
    pairs
        .iter()
        .fold(SimpleContext::new(), |c, (d, t)| c.with(d, *t))
}

fn run_with(src: &str, at: &SimpleContext, config: EvaluatorConfig) -> (CoreValue, Evaluator) {
    let program = Program::new(parse_core(src).unwrap());
    let mut ev = Evaluator::new(config);
    let v = ev.evaluate(&program, at).unwrap();
    (v, ev)
}

fn run(src: &str, at: &SimpleContext) -> CoreValue {
    run_with(src, at, EvaluatorConfig::default()).0
}

fn kind(v: &CoreValue) -> Option<SpecialKind> {
    v.as_special().map(|s| s.kind)
}

const FIB: &str = "fib where fib = if #t < 2 then #t else fib @ {t:#t - 1} + fib @ {t:#t - 2}; end";

fn fib_reference(n: i64) -> i64 {
    if n < 2 {
        n
    } else {
        fib_reference(n - 1) + fib_reference(n - 2)
    }
}

#[test]
fn constants_and_queries() {
    assert_eq!(run("42", &ctx(&[("t", 5)])), CoreValue::Integer(42));
    assert_eq!(
        run("#d @ {d:3}", &SimpleContext::new()),
        CoreValue::Integer(3)
    );
    assert_eq!(run("#d", &SimpleContext::new()), CoreValue::Integer(0));
    assert_eq!(
        run("#d where dimension d = 7; end", &SimpleContext::new()),
        CoreValue::Integer(7)
    );
    assert_eq!(
        run("#d where dimension d = 7; end", &ctx(&[("d", 2)])),
        CoreValue::Integer(2)
    );
    assert_eq!(
        run("#lang @ {lang:\"en\"}", &SimpleContext::new()),
        CoreValue::string("en")
    );
}

#[test]
fn recursion_over_t() {
    let n = "N where N = if #t = 0 then 0 else N @ {t:#t - 1} + 1; end";
    assert_eq!(run(n, &ctx(&[("t", 7)])), CoreValue::Integer(7));
    for t in [0, 1, 10] {
        assert_eq!(
            run(FIB, &ctx(&[("t", t)])),
            CoreValue::Integer(fib_reference(t))
        );
    }
    assert_eq!(run(FIB, &ctx(&[("t", 10)])), CoreValue::Integer(55));
}

#[test]
fn second_demand_hits() {
    let program = Program::new(parse_core("X where X = #t * 2; end").unwrap());
    let mut ev = Evaluator::new(EvaluatorConfig::default());
    let a = ev.evaluate(&program, &ctx(&[("t", 4)])).unwrap();
    assert_eq!(ev.stats().hits, 0);
    let b = ev.evaluate(&program, &ctx(&[("t", 4), ("z", 1)])).unwrap();
    assert_eq!(a, b);
    assert_eq!(ev.stats().hits, 1);
    assert_eq!(ev.stats().body_evaluations_of("X"), 1);
}

#[test]
fn rank_zero_key_is_empty() {
    let (_, ev) = run_with(
        "x where x = 42; end",
        &ctx(&[("t", 3), ("u", 9)]),
        EvaluatorConfig::default(),
    );
    let keys = ev.warehouse().keys();
    assert_eq!(keys.len(), 1);
    assert!(keys[0].projection.is_empty());
}

#[test]
fn fib_keys_mention_only_t() {
    let (v, ev) = run_with(
        FIB,
        &ctx(&[("t", 20), ("unrelated", 99)]),
        EvaluatorConfig::default(),
    );
    assert_eq!(v, CoreValue::Integer(6765));
    let keys = ev.warehouse().keys();
    assert!(keys.len() <= 21, "{} entries", keys.len());
    for k in keys {
        assert_eq!(k.dimensions().collect::<Vec<_>>(), vec![&dim("t")]);
    }
}

#[test]
fn body_counts_with_and_without_warehouse() {
    let (_, cached) = run_with(FIB, &ctx(&[("t", 15)]), EvaluatorConfig::default());
    assert_eq!(cached.stats().body_evaluations_of("fib"), 16);
    let config = EvaluatorConfig {
        use_warehouse: false,
        ..EvaluatorConfig::default()
    };
    let (_, uncached) = run_with(FIB, &ctx(&[("t", 15)]), config);
    // calls of the naive recursion: 2 fib(n+1) - 1
    assert_eq!(uncached.stats().body_evaluations_of("fib"), 2 * 987 - 1);
    assert!(uncached.warehouse().is_empty());
}

#[test]
fn switch_hides_the_dimensions_it_sets() {
    // Y reads t only through a switch that sets it, so its rank is {}
    let (_, ev) = run_with(
        "Y where Y = X @ {t:3}; X = #t; end",
        &ctx(&[("t", 8)]),
        EvaluatorConfig::default(),
    );
    let mut keys: Vec<_> = ev
        .warehouse()
        .keys()
        .into_iter()
        .map(|k| (k.subject.name.to_string(), k.dimensions().count()))
        .collect();
    keys.sort();
    assert_eq!(keys, vec![("X".to_string(), 1), ("Y".to_string(), 0)]);
}

#[test]
fn cache_hit_propagates_rank() {
    // the second use of X is a hit; Z must still record t
    let src = "Y + Z where Y = X; Z = X; X = #t; end";
    let (v, ev) = run_with(src, &ctx(&[("t", 2)]), EvaluatorConfig::default());
    assert_eq!(v, CoreValue::Integer(4));
    for k in ev.warehouse().keys() {
        assert_eq!(k.dimensions().count(), 1, "{k}");
    }
}

#[test]
fn error_values() {
    assert_eq!(
        kind(&run("y", &SimpleContext::new())),
        Some(SpecialKind::Undecl)
    );
    assert_eq!(
        kind(&run("1 / 0", &SimpleContext::new())),
        Some(SpecialKind::Arith)
    );
    assert_eq!(
        kind(&run("g(1)", &SimpleContext::new())),
        Some(SpecialKind::Undecl)
    );
    assert_eq!(
        kind(&run(
            "special<undecl> + special<arith>",
            &SimpleContext::new()
        )),
        Some(SpecialKind::Undecl)
    );
    assert_eq!(
        kind(&run("if 1 then 2 else 3", &SimpleContext::new())),
        Some(SpecialKind::TypeErr)
    );
    assert_eq!(
        kind(&run("1 @ {{d:1}}", &SimpleContext::new())),
        Some(SpecialKind::TypeErr)
    );
    assert_eq!(
        kind(&run("#x where x = 3; end", &SimpleContext::new())),
        Some(SpecialKind::UndefDim)
    );
    assert_eq!(
        kind(&run("1 @ {x:1} where x = 3; end", &SimpleContext::new())),
        Some(SpecialKind::TypeErr)
    );
    assert_eq!(
        run("isspecial<arith> (1 / 0)", &SimpleContext::new()),
        CoreValue::Boolean(true)
    );
    let v = run("\n  2 + y", &SimpleContext::new());
    assert_eq!(v.as_special().unwrap().origin.as_ref().unwrap().line, 2);
}

#[test]
fn short_circuit() {
    assert_eq!(
        run("false and 1 / 0 = 1", &SimpleContext::new()),
        CoreValue::Boolean(false)
    );
    assert_eq!(
        run("true or y", &SimpleContext::new()),
        CoreValue::Boolean(true)
    );
}

#[test]
fn depth_limit_is_a_hard_error() {
    let program = Program::new(parse_core("X where X = X @ {t:#t + 1}; end").unwrap());
    let mut ev = Evaluator::new(EvaluatorConfig {
        max_depth: 200,
        ..EvaluatorConfig::default()
    });
    let err = ev.evaluate(&program, &SimpleContext::new()).unwrap_err();
    assert!(
        matches!(err, EvalError::DepthExceeded { limit: 200, .. }),
        "{err}"
    );
    let mut bad = Evaluator::new(EvaluatorConfig {
        max_depth: 0,
        ..EvaluatorConfig::default()
    });
    assert!(matches!(
        bad.evaluate(&program, &SimpleContext::new()),
        Err(EvalError::Config(_))
    ));
}

#[test]
fn deep_recursion_within_limit() {
    let n = "N where N = if #t = 0 then 0 else N @ {t:#t - 1} + 1; end";
    assert_eq!(run(n, &ctx(&[("t", 5000)])), CoreValue::Integer(5000));
}

#[test]
fn functions_and_parameters() {
    assert_eq!(
        run("f(3) where f(n) = n * 2; end", &SimpleContext::new()),
        CoreValue::Integer(6)
    );
    assert_eq!(
        run("g(t) where g(D) = #D; end", &ctx(&[("t", 4)])),
        CoreValue::Integer(4)
    );
    assert_eq!(
        run(
            "g(e) where g(D) = #D @ {D:9}; dimension e; end",
            &SimpleContext::new()
        ),
        CoreValue::Integer(9)
    );
    // arguments are evaluated where the parameter is used
    assert_eq!(
        run("f(#t) where f(x) = x @ {t:5}; end", &ctx(&[("t", 1)])),
        CoreValue::Integer(5)
    );
    assert_eq!(
        kind(&run("f(1, 2) where f(x) = x; end", &SimpleContext::new())),
        Some(SpecialKind::TypeErr)
    );
    let fact = "fact(#t) where fact(n) = if n = 0 then 1 else n * fact(n - 1); end";
    assert_eq!(run(fact, &ctx(&[("t", 10)])), CoreValue::Integer(3_628_800));
}

#[test]
fn dimension_valued_variables() {
    assert_eq!(
        run(
            "#D @ {D:4} where D = e; dimension e; end",
            &SimpleContext::new()
        ),
        CoreValue::Integer(4)
    );
}

#[test]
fn trees_under_switch() {
    let src = r#"(#cfg + #n) @ {cfg:"v1" {lang:"en"}, n:1}"#;
    assert_eq!(
        kind(&run(src, &SimpleContext::new())),
        Some(SpecialKind::TypeErr)
    );
    let src = r#"#cfg @ {cfg:"v1" {lang:"en"}, n:1}"#;
    assert_eq!(run(src, &SimpleContext::new()), CoreValue::string("v1"));
    let v = run(r#"{app:{cfg:{lang:"en"}}}"#, &SimpleContext::new());
    let CoreValue::Tree(t) = v else { panic!("{v}") };
    assert_eq!(t.node_count(), 3);
}

#[test]
fn context_values() {
    assert_eq!(
        run("{d:1, e:2}", &SimpleContext::new()),
        CoreValue::Context(ctx(&[("d", 1), ("e", 2)]))
    );
    assert_eq!(
        run("{d:1, d:2}", &SimpleContext::new()),
        CoreValue::Context(ctx(&[("d", 2)]))
    );
    assert_eq!(
        run("#d @ C where C = {d:6}; end", &SimpleContext::new()),
        CoreValue::Integer(6)
    );
}

#[test]
fn eagerness_contract() {
    let src = "X @ {d:1, e:1 / 0} where X = #d; end";
    let (v, _) = run_with(src, &SimpleContext::new(), EvaluatorConfig::default());
    assert_eq!(kind(&v), Some(SpecialKind::Arith));
    let dimension_eager = EvaluatorConfig {
        eagerness: Eagerness::DimensionEager,
        ..EvaluatorConfig::default()
    };
    let (v, _) = run_with(src, &SimpleContext::new(), dimension_eager.clone());
    assert_eq!(v, CoreValue::Integer(1));
    // using the held-back dimension surfaces the error
    let (v, ev) = run_with(
        "X @ {d:1, e:1 / 0} where X = #e; end",
        &SimpleContext::new(),
        dimension_eager.clone(),
    );
    assert_eq!(kind(&v), Some(SpecialKind::Arith));
    assert!(ev.warehouse().is_empty());
    // a standalone literal propagates in both modes
    let (v, _) = run_with(
        "{d:1, e:1 / 0}",
        &SimpleContext::new(),
        dimension_eager.clone(),
    );
    assert_eq!(kind(&v), Some(SpecialKind::Arith));
    // dimensions first: the bad dimension wins over the earlier bad tag
    let (v, _) = run_with(
        "1 @ {d:1 / 0, x:1} where x = 2; end",
        &SimpleContext::new(),
        dimension_eager,
    );
    assert_eq!(kind(&v), Some(SpecialKind::TypeErr));
    let (v, _) = run_with(
        "1 @ {d:1 / 0, x:1} where x = 2; end",
        &SimpleContext::new(),
        EvaluatorConfig::default(),
    );
    assert_eq!(kind(&v), Some(SpecialKind::Arith));
}

#[test]
fn held_back_values_do_not_poison_the_cache() {
    let dimension_eager = EvaluatorConfig {
        eagerness: Eagerness::DimensionEager,
        ..EvaluatorConfig::default()
    };
    // X is first stored with e unbound; the switched demand must not reuse it
    let src = "X + (X @ {e:1 / 0}) where X = #e; end";
    let (v, _) = run_with(src, &SimpleContext::new(), dimension_eager);
    assert_eq!(kind(&v), Some(SpecialKind::Arith));
}

#[test]
fn context_literal_entry_point() {
    let program = Program::new(parse_core("{d:1, e:1 / 0, d:3}").unwrap());
    let mut ev = Evaluator::new(EvaluatorConfig {
        eagerness: Eagerness::DimensionEager,
        ..EvaluatorConfig::default()
    });
    let patch = ev
        .eval_context_literal(&program, &SimpleContext::new())
        .unwrap()
        .unwrap();
    assert_eq!(patch.point, ctx(&[("d", 3)]));
    assert_eq!(patch.deferred.keys().collect::<Vec<_>>(), vec![&dim("e")]);
    let mut ev = Evaluator::new(EvaluatorConfig::default());
    let out = ev
        .eval_context_literal(&program, &SimpleContext::new())
        .unwrap();
    assert_eq!(out.map_err(|v| kind(&v)), Err(Some(SpecialKind::Arith)));
}

#[test]
fn trace_is_counted_and_nested() {
    let config = EvaluatorConfig {
        trace_enabled: true,
        ..EvaluatorConfig::default()
    };
    let (_, mut ev) = run_with(FIB, &ctx(&[("t", 6)]), config);
    let trace = ev.take_trace();
    assert_eq!(trace.len() as u64, ev.stats().events);
    let issued = trace
        .iter()
        .filter(|e| e.kind == TraceKind::DemandIssued)
        .count() as u64;
    assert_eq!(issued, ev.stats().demands);
    let resolved = trace
        .iter()
        .filter(|e| matches!(e.kind, TraceKind::CacheHit | TraceKind::CacheMiss))
        .count() as u64;
    assert_eq!(resolved, issued);
    assert_eq!(trace[0].to_string(), "demandIssued fib {t:6} 1");
    assert!(trace.iter().all(|e| e.depth >= 1));
}

#[test]
fn shared_warehouse_between_evaluators() {
    let w = Arc::new(Warehouse::new());
    let program = Program::new(parse_core(FIB).unwrap());
    let mut a = Evaluator::with_warehouse(EvaluatorConfig::default(), w.clone());
    a.evaluate(&program, &ctx(&[("t", 12)])).unwrap();
    let mut b = Evaluator::with_warehouse(EvaluatorConfig::default(), w.clone());
    assert_eq!(
        b.evaluate(&program, &ctx(&[("t", 12)])).unwrap(),
        CoreValue::Integer(144)
    );
    assert_eq!(b.stats().body_evaluations_of("fib"), 0);
    assert_eq!(b.stats().hits, 1);
}

#[test]
fn surface_is_rejected_until_translated() {
    let e = parse_surface("N where N = 0 fby N + 1; end").unwrap();
    let err = evaluate(&e, &SimpleContext::new()).unwrap_err();
    assert!(matches!(err, EvalError::NotCore { op: "fby", .. }));
    let core = translate_to_core(&e);
    for k in [0, 1, 30] {
        assert_eq!(
            evaluate(&core, &ctx(&[("t", k)])).unwrap(),
            CoreValue::Integer(k)
        );
    }
}

#[test]
fn upon_example() {
    let e = parse_surface("X upon Y where X = #t; Y = #t mod 2 = 0; end").unwrap();
    let core = translate_to_core(&e);
    let got: Vec<_> = (0..6)
        .map(|t| evaluate(&core, &ctx(&[("t", t)])).unwrap())
        .collect();
    let want: Vec<_> = [0, 1, 1, 2, 2, 3]
        .into_iter()
        .map(CoreValue::Integer)
        .collect();
    assert_eq!(got, want);
}

#[test]
fn wvr_and_asa() {
    let e = parse_surface("X wvr Y where X = #t * 10; Y = #t mod 3 = 1; end").unwrap();
    let core = translate_to_core(&e);
    let got: Vec<_> = (0..4)
        .map(|t| evaluate(&core, &ctx(&[("t", t)])).unwrap())
        .collect();
    let want: Vec<_> = [10, 40, 70, 100]
        .into_iter()
        .map(CoreValue::Integer)
        .collect();
    assert_eq!(got, want);
    let e = parse_surface("X asa Y where X = #t * 10; Y = #t > 4; end").unwrap();
    let core = translate_to_core(&e);
    for t in 0..4 {
        assert_eq!(
            evaluate(&core, &ctx(&[("t", t)])).unwrap(),
            CoreValue::Integer(50)
        );
    }
}

struct Doubler;

impl ForeignFunctions for Doubler {
    fn call(
        &self,
        name: &str,
        args: &[CoreValue],
        _: &SourceLocation,
    ) -> Option<Result<CoreValue, EvalError>> {
        match (name, args) {
            ("double", [CoreValue::Integer(i)]) => Some(Ok(CoreValue::Integer(i * 2))),
            _ => None,
        }
    }
}

#[test]
fn foreign_calls() {
    let program = Program::new(parse_core("double(#t) + double(y)").unwrap());
    let mut ev = Evaluator::new(EvaluatorConfig::default());
    ev.set_foreign(Arc::new(Doubler));
    let v = ev.evaluate(&program, &ctx(&[("t", 3)])).unwrap();
    assert_eq!(kind(&v), Some(SpecialKind::Undecl));
    let program = Program::new(parse_core("double(#t) + 1").unwrap());
    assert_eq!(
        ev.evaluate(&program, &ctx(&[("t", 3)])).unwrap(),
        CoreValue::Integer(7)
    );
    let program = Program::new(parse_core("(1).size()").unwrap());
    assert_eq!(
        kind(&ev.evaluate(&program, &SimpleContext::new()).unwrap()),
        Some(SpecialKind::TypeErr)
    );
}

struct Reversed;

impl DemandGrouper for Reversed {
    fn group(&self, count: usize) -> Vec<Vec<usize>> {
        vec![(0..count).rev().collect()]
    }
}

#[test]
fn grouping_does_not_change_results() {
    let program = Program::new(parse_core("double(a) where a = 1 / 0; end").unwrap());
    let mut ev = Evaluator::new(EvaluatorConfig::default());
    ev.set_foreign(Arc::new(Doubler));
    ev.set_grouper(Box::new(Reversed));
    assert_eq!(
        kind(&ev.evaluate(&program, &SimpleContext::new()).unwrap()),
        Some(SpecialKind::Arith)
    );
}
