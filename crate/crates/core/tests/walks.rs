use boundseek::mutation::mutate;
use boundseek::rng::{derive, Stream};
use boundseek::switchsearch::{is_single_application, property_switch_search, run_step2};
use boundseek::{
    Candidate, MutationOperator, MutatorSet, Origin, Role, SwitchBudget, TestSet, ValidityOracle,
    WalkMode,
};
use proptest::prelude::*;

fn seed(text: &str) -> Candidate {
    Candidate::new(text.to_owned(), true, Origin::Initial { seed: 0, index: 0 })
}

fn small_budget() -> SwitchBudget {
    SwitchBudget {
        target_switches: 8,
        max_mutations_per_switch: 60,
        max_total_mutations: 300,
    }
}

const MODES: [WalkMode; 3] = [
    WalkMode::AdvanceAlways,
    WalkMode::AdvanceOnSwitch,
    WalkMode::AdvanceWhileValid,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutants_are_single_applications(text in "[0-9a-z{}\":,-]{1,30}", rng_seed in any::<u64>()) {
        for preset in ["int", "int_keep_size", "chars"] {
            let ops = MutatorSet::preset(preset).unwrap();
            let mut rng = derive(rng_seed, Stream::Custom(1), 0);
            let out = mutate(&text, &ops, &mut rng);
            if out.no_site {
                prop_assert_eq!(&out.output, &text);
            } else {
                prop_assert!(is_single_application(out.operator, &text, &out.output));
            }
        }
    }

    #[test]
    fn keep_size_operators_preserve_length_and_invert(text in "[0-9x]{1,12}", pos in 0usize..12) {
        use MutationOperator::*;
        if let Some(up) = IncreaseIntKeepingSize.apply_at(&text, pos) {
            prop_assert_eq!(up.chars().count(), text.chars().count());
            prop_assert_eq!(DecreaseIntKeepingSize.apply_at(&up, pos), Some(text.clone()));
        }
    }

    #[test]
    fn date_walks_keep_witnesses(
        y in 1000u32..9999, m in 1u32..=12, d in 1u32..=28,
        rng_seed in any::<u64>(), mode in 0usize..3,
    ) {
        let text = format!("{y:04}-{m:02}-{d:02}");
        let oracle = ValidityOracle::date(Default::default());
        for preset in ["int", "int_keep_size"] {
            let ops = MutatorSet::preset(preset).unwrap();
            let mut rng = derive(rng_seed, Stream::Custom(2), 0);
            let pair = property_switch_search(
                0, &seed(&text), &ops, &oracle, &small_budget(), MODES[mode], &mut rng,
            ).unwrap();
            for s in &pair.switches {
                let (from, to) = (&pair.trace[s.from], &pair.trace[s.to]);
                prop_assert_eq!(to.parent, Some(s.from));
                prop_assert_ne!(from.valid, to.valid);
                prop_assert!(is_single_application(to.operator.unwrap(), &from.text, &to.text));
            }
            for c in pair.mvs.candidates() {
                prop_assert!(oracle.is_valid(&c.text).unwrap(), "{}", c.text);
            }
            for c in pair.mis.candidates() {
                prop_assert!(!oracle.is_valid(&c.text).unwrap(), "{}", c.text);
            }
            prop_assert!(pair.trace.len() <= small_budget().max_total_mutations + 1);
        }
    }
}

fn json_tset() -> TestSet {
    TestSet::from_candidates(
        Role::Tset,
        [
            r#"{"a":[1,2,{"b":null}],"c":"text"}"#,
            r#"[true,false,"x",12.5]"#,
            r#"{"nested":{"deeper":{"k":"v"}}}"#,
        ]
        .into_iter()
        .map(seed),
    )
}

#[test]
fn step2_is_deterministic_per_seed() {
    let ops = MutatorSet::preset("chars").unwrap();
    let oracle = ValidityOracle::json();
    for mode in MODES {
        let a = run_step2(&json_tset(), &ops, &oracle, &small_budget(), mode, 42, 0).unwrap();
        let b = run_step2(&json_tset(), &ops, &oracle, &small_budget(), mode, 42, 0).unwrap();
        let texts = |s: &TestSet| s.strings().map(str::to_owned).collect::<Vec<_>>();
        assert_eq!(texts(&a.mvs), texts(&b.mvs));
        assert_eq!(texts(&a.mis), texts(&b.mis));
        let c = run_step2(&json_tset(), &ops, &oracle, &small_budget(), mode, 43, 0).unwrap();
        assert_ne!(texts(&a.mis), texts(&c.mis));
    }
}

#[test]
fn advance_while_valid_only_holds_on_the_invalid_side() {
    let ops = MutatorSet::preset("chars").unwrap();
    let oracle = ValidityOracle::json();
    let mut rng = derive(5, Stream::Custom(3), 0);
    let pair = property_switch_search(
        0,
        &seed(r#"{"key":"a longer string value","n":12345}"#),
        &ops,
        &oracle,
        &small_budget(),
        WalkMode::AdvanceWhileValid,
        &mut rng,
    )
    .unwrap();
    // The next entry always descends from the latest valid entry, or from
    // the invalid entry the walk most recently switched to.
    let mut current = 0;
    for (i, e) in pair.trace.iter().enumerate().skip(1) {
        assert_eq!(e.parent, Some(current), "entry {i}");
        let switched = e.valid != pair.trace[current].valid;
        if e.valid || switched {
            current = i;
        }
    }
}
