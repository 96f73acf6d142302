mod common;

use std::collections::BTreeSet;

use common::*;
use exflow::classify::{partition_recoverability, Action, DetectorConfig};
use exflow::flow::{analyze_try_block, compute_method_exception_sets, FlowOptions};
use proptest::prelude::*;

#[test]
fn handler_fixture_suite() {
    let config = DetectorConfig::default();
    for f in HANDLER_FIXTURES {
        let got = handler_actions(f.body, &config);
        let want: BTreeSet<Action> = f.expected.iter().copied().collect();
        assert_eq!(got, want, "fixture {}", f.name);
    }
    let covered: BTreeSet<Action> = HANDLER_FIXTURES.iter().flat_map(|f| f.expected.iter().copied()).collect();
    assert_eq!(covered.len(), Action::ALL.len());
}

#[test]
fn configured_log_methods_replace_defaults() {
    let config = DetectorConfig {
        log_methods: BTreeSet::from(["audit".to_string()]),
        ..DetectorConfig::default()
    };
    assert_eq!(handler_actions("audit(e);", &config), BTreeSet::from([Action::Log]));
    assert_eq!(handler_actions("logger.warn(\"x\");", &config), BTreeSet::from([Action::Method]));
}

#[test]
fn configured_abort_signatures() {
    let config = DetectorConfig {
        abort: BTreeSet::from(["h.H#cleanup(0)".to_string()]),
        ..DetectorConfig::default()
    };
    assert_eq!(handler_actions("cleanup();", &config), BTreeSet::from([Action::Abort]));
    assert_eq!(handler_actions("System.exit(1);", &config), BTreeSet::from([Action::Method]));
}

const POOL: &[&str] = &[
    "e.printStackTrace();",
    "System.exit(1);",
    "continue;",
    "logger.info(\"x\");",
    "cleanup();",
    "try { work(); } catch (IOException x) { }",
    "if (attempts > 2) { return null; }",
    "throw e;",
    "throw new IllegalStateException(\"x\");",
    "throw new IllegalStateException(e);",
    "// FIXME later",
    "attempts++;",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_a_statement_keeps_detected_actions(
        stmts in prop::collection::vec(0..POOL.len(), 0..4),
        extra in 0..POOL.len(),
        at in 0usize..5,
    ) {
        let config = DetectorConfig::default();
        let body: Vec<&str> = stmts.iter().map(|&i| POOL[i]).collect();
        let before = handler_actions(&body.join("\n"), &config);
        let mut grown = body.clone();
        grown.insert(at.min(body.len()), POOL[extra]);
        let after = handler_actions(&grown.join("\n"), &config);
        // Empty and Default describe the whole body, so they give way
        for a in &before {
            if !matches!(a, Action::Empty | Action::Default) {
                prop_assert!(after.contains(a), "{a} lost: {before:?} -> {after:?}");
            }
        }
        prop_assert!(!(after.contains(&Action::Default) && after.contains(&Action::Empty)));
        if after.contains(&Action::Empty) {
            prop_assert!(after.iter().all(|a| matches!(a, Action::Empty | Action::Todo)));
        }
        if after.contains(&Action::Default) {
            prop_assert!(after.iter().all(|a| matches!(a, Action::Default | Action::Todo)));
            prop_assert_eq!(grown.iter().filter(|s| !s.starts_with("//")).count(), 1);
        }
        prop_assert_eq!(&after, &handler_actions(&grown.join("\n"), &config));
    }
}

#[test]
fn strategy_over_all_pairs_of_a_three_level_hierarchy() {
    for seed in 0..20 {
        check_strategy_pairs(seed).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn first_matching_clause_wins() {
    check_first_match().unwrap();
}

#[test]
fn recoverability_partition_examples() {
    let model = build(&[("X.java", "class X {}")]);
    let io = model.type_id("java.io.IOException").unwrap();
    let oom = model.type_id("java.lang.OutOfMemoryError").unwrap();
    let fact = |ty| exflow::flow::PossibleException {
        ty,
        origin: exflow::flow::Origin::Signature(model.method_ids().next().unwrap()),
        evidence: BTreeSet::from([exflow::flow::EvidenceKind::ThrowStatement]),
        origin_methods: BTreeSet::new(),
    };
    let (r, u) = partition_recoverability(&[fact(io), fact(oom)], &model);
    assert_eq!(r, vec![fact(io)]);
    assert_eq!(u, vec![fact(oom)]);
    let (r, u) = partition_recoverability(&[], &model);
    assert!(r.is_empty() && u.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recoverability_partition_is_exact(seed in any::<u64>()) {
        let c = acyclic_corpus(seed);
        let (model, _) = c.model();
        let sets = compute_method_exception_sets(&model);
        for t in model.try_ids() {
            let a = analyze_try_block(t, &sets, &model, FlowOptions::default());
            let (r, u) = partition_recoverability(&a.propagated, &model);
            prop_assert_eq!(r.len() + u.len(), a.propagated.len());
            for f in &a.propagated {
                prop_assert!(r.contains(f) != u.contains(f));
            }
        }
    }
}
