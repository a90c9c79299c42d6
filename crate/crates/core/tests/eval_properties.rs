mod support;

use std::sync::Arc;

use corelucid::context::{dim, SimpleContext, TagValue};
use corelucid::eval::{Eagerness, Evaluator, EvaluatorConfig, Program, Warehouse};
use corelucid::syntax::{parse_core, parse_surface, translate_to_core};
use corelucid::types::CoreValue;
use proptest::prelude::*;

use support::streams;

fn programs() -> Vec<Program> {
    let mut out: Vec<Program> = streams::corpus()
        .iter()
        .map(|p| Program::new(translate_to_core(&parse_surface(p.source).unwrap())))
        .collect();
    for src in [
        "fib where fib = if #t < 2 then #t else fib @ {t:#t - 1} + fib @ {t:#t - 2}; end",
        "X @ {s:#t} + X where X = #s * 3 + #t; end",
        "g(#t) where g(n) = if n = 0 then 1 else n * g(n - 1); end",
    ] {
        out.push(Program::new(parse_core(src).unwrap()));
    }
    out
}

fn at(t: i64) -> SimpleContext {
    SimpleContext::new().with("t", t)
}

fn config(use_warehouse: bool, eagerness: Eagerness) -> EvaluatorConfig {
    EvaluatorConfig {
        use_warehouse,
        eagerness,
        ..EvaluatorConfig::default()
    }
}

fn eagerness() -> impl Strategy<Value = Eagerness> {
    prop::sample::select(vec![Eagerness::ContextEager, Eagerness::DimensionEager])
}

fn noise() -> impl Strategy<Value = Vec<(String, TagValue)>> {
    let tag = prop_oneof![
        (-9i64..9).prop_map(TagValue::Int),
        "[a-z]{1,3}".prop_map(TagValue::Str)
    ];
    prop::collection::vec(("z[0-9]", tag), 1..4)
}

#[test]
fn reference_semantics() {
    // hand-unrolled prefixes
    let progs = streams::corpus();
    assert_eq!(progs[0].expected(0..=4), [0, 1, 2, 3, 4]);
    assert_eq!(progs[4].expected(0..=7), [0, 1, 1, 2, 3, 5, 8, 13]);
    assert_eq!(progs[6].expected(0..=3), [0, 3, 6, 9]);
    assert_eq!(progs[7].expected(0..=2), [11, 11, 11]);
    assert_eq!(progs[8].expected(0..=5), [0, 1, 1, 2, 2, 3]);
    assert_eq!(progs[14].expected(0..=4), [10, 20, 20, 30, 30]);
    assert_eq!(progs[15].expected(0..=4), [0, 1, 5, 9, 10]);
    assert_eq!(progs[16].expected(0..=2), [100, 100, 100]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cache_is_sound(which in 0usize..64, t in 0i64..14, warmup in prop::collection::vec(0i64..14, 0..4), mode in eagerness()) {
        let all = programs();
        let program = &all[which % all.len()];
        let cold = Evaluator::new(config(true, mode)).evaluate(program, &at(t)).unwrap();
        let mut warm = Evaluator::new(config(true, mode));
        for w in warmup {
            warm.evaluate(program, &at(w)).unwrap();
        }
        let warmed = warm.evaluate(program, &at(t)).unwrap();
        let off = Evaluator::new(config(false, mode)).evaluate(program, &at(t)).unwrap();
        prop_assert_eq!(&cold, &warmed);
        prop_assert_eq!(&cold, &off);
    }

    #[test]
    fn warehouse_only_grows(which in 0usize..64, ts in prop::collection::vec(0i64..14, 1..6)) {
        let all = programs();
        let program = &all[which % all.len()];
        let warehouse = Arc::new(Warehouse::new());
        let mut seen: Vec<(corelucid::eval::Demand, CoreValue)> = Vec::new();
        for t in ts {
            let before = warehouse.len();
            let mut ev = Evaluator::with_warehouse(EvaluatorConfig::default(), Arc::clone(&warehouse));
            ev.evaluate(program, &at(t)).unwrap();
            prop_assert!(warehouse.len() >= before);
            for (k, v) in &seen {
                prop_assert_eq!(warehouse.get(k), Some(v.clone()));
            }
            seen = warehouse.keys().into_iter().map(|k| {
                let v = warehouse.get(&k).unwrap();
                (k, v)
            }).collect();
        }
    }

    #[test]
    fn irrelevant_dimensions_do_not_matter(
        which in 0usize..64,
        t in 0i64..12,
        noise in noise(),
    ) {
        let all = programs();
        let program = &all[which % all.len()];
        let plain = Evaluator::new(EvaluatorConfig::default()).evaluate(program, &at(t)).unwrap();
        let mut noisy_at = at(t).with("s", 0);
        for (d, v) in noise {
            noisy_at.insert(dim(&d), v);
        }
        let mut ev = Evaluator::new(EvaluatorConfig::default());
        let noisy = ev.evaluate(program, &noisy_at).unwrap();
        prop_assert_eq!(noisy, plain);
        for key in ev.warehouse().keys() {
            for d in key.dimensions() {
                prop_assert!(d.as_str() == "t" || d.as_str() == "s", "key mentions {}", d);
            }
        }
    }
}
