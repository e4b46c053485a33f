use boundseek::calendar::DateSyntax;
use boundseek::distance::{
    day_distance, levenshtein, metric_by_name, min_dist_to_set, msid, ncd, set_min_distances,
    Compressor, MetricSettings,
};
use boundseek::METRIC_NAMES;
use proptest::prelude::*;

fn dp(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, y) in b.iter().enumerate() {
            cur.push(
                (prev[j] + usize::from(x != y))
                    .min(prev[j + 1] + 1)
                    .min(cur[j] + 1),
            );
        }
        prev = cur;
    }
    prev[b.len()]
}

fn short_text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[ab0-9é日-]{0,12}",
        "[0-9]{1,4}-[0-9]{1,2}-[0-9]{1,2}",
        "\\PC{0,40}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn levenshtein_is_a_metric(a in short_text(), b in short_text(), c in short_text()) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(ab == 0, a == b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
    }

    #[test]
    fn levenshtein_matches_dp(a in short_text(), b in short_text()) {
        prop_assert_eq!(levenshtein(&a, &b), dp(&a, &b));
    }

    #[test]
    fn ncd_stays_in_range(a in short_text(), b in short_text()) {
        for c in [Compressor::default(), Compressor::Zlib { level: 9 }] {
            let d = ncd(&a, &b, c).unwrap();
            prop_assert!((0.0..=1.1).contains(&d), "{} {}", c, d);
        }
    }

    #[test]
    fn domain_metrics_are_symmetric(a in short_text(), b in short_text()) {
        let syntax = DateSyntax::default();
        prop_assert_eq!(day_distance(&a, &b, &syntax, 1e6), day_distance(&b, &a, &syntax, 1e6));
        prop_assert_eq!(day_distance(&a, &a, &syntax, 1e6), 0.0);
        prop_assert_eq!(msid(&a, &b, 1e6), msid(&b, &a, 1e6));
        prop_assert_eq!(msid(&a, &a, 1e6), 0.0);
    }

    #[test]
    fn batched_min_distances_match_pairwise_minimum(
        from in prop::collection::vec(short_text(), 1..6),
        to in prop::collection::vec(short_text(), 1..8),
    ) {
        let from: Vec<&str> = from.iter().map(String::as_str).collect();
        let to: Vec<&str> = to.iter().map(String::as_str).collect();
        for name in METRIC_NAMES {
            let m = metric_by_name(name, &MetricSettings::default()).unwrap();
            let batched = set_min_distances(&from, &to, m.as_ref()).unwrap();
            for (a, got) in from.iter().zip(batched) {
                let brute = to
                    .iter()
                    .map(|b| m.eval(a, b).unwrap())
                    .fold(f64::INFINITY, f64::min);
                prop_assert_eq!(got, brute, "{}", name);
                prop_assert_eq!(got, min_dist_to_set(a, to.iter().copied(), m.as_ref()).unwrap());
            }
        }
    }
}

#[test]
fn empty_sets_are_rejected() {
    let m = metric_by_name("levenshtein", &MetricSettings::default()).unwrap();
    assert!(set_min_distances(&[], &["a"], m.as_ref()).is_err());
    assert!(set_min_distances(&["a"], &[], m.as_ref()).is_err());
    assert_eq!(min_dist_to_set("a", [], m.as_ref()).unwrap(), f64::INFINITY);
}

#[test]
fn day_distance_is_exact_for_calendar_dates() {
    let syntax = DateSyntax::default();
    assert_eq!(day_distance("2020-02-28", "2020-03-01", &syntax, 1e6), 2.0);
    assert_eq!(day_distance("1999-12-31", "2000-01-01", &syntax, 1e6), 1.0);
    assert_eq!(day_distance("abc", "2000-01-01", &syntax, 1e6), 1e6);
}

#[test]
fn ncd_orders_related_before_unrelated() {
    let c = Compressor::default();
    let base = r#"{"name":"boundary","values":[1,2,3,4,5],"nested":{"flag":true}}"#;
    let near = r#"{"name":"boundary","values":[1,2,3,4,5],"nested":{"flag":false}}"#;
    let far = "<root><x>unrelated text with other words</x></root>";
    assert!(ncd(base, near, c).unwrap() < ncd(base, far, c).unwrap());
}
