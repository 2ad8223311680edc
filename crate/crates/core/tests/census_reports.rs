use std::collections::BTreeSet;

use cayley_machines::cayley::{generate_all, CayleyPerm};
use cayley_machines::census::{
    classify_sigma, count_sortable, tortoise_formula, tortoise_refined, verify_class, witness_non_class, Machine,
    SequenceReport,
};
use cayley_machines::dyck::{encode, LabeledDyckPath};
use cayley_machines::pattern::{contains, downward_closure_violations, minimal_non_members};
use cayley_machines::stack::{is_popstack_sortable, is_sigma_sortable, Event, Popstack, SortTrace};

fn p(s: &str) -> CayleyPerm {
    s.parse().unwrap()
}

fn without_timing(mut r: SequenceReport) -> SequenceReport {
    r.elapsed = Default::default();
    r
}

#[test]
fn counts_do_not_depend_on_thread_count() {
    for machine in ["sigma-machine 21", "sigma-machine 11", "popstack tortoise"] {
        let m: Machine = machine.parse().unwrap();
        let one = without_timing(count_sortable(&m, 6, 1).unwrap());
        let four = without_timing(count_sortable(&m, 6, 4).unwrap());
        assert_eq!(one, four, "{machine}");
        assert_eq!(one.to_csv(), four.to_csv());
        assert!(one.invariants_hold());
    }
}

#[test]
fn eleven_machine_counts_agree_with_231_avoiders() {
    let r = count_sortable(&Machine::sigma(p("11")).unwrap(), 6, 0).unwrap();
    let p231 = p("231");
    for (n, c) in r.counts {
        let avoiders = generate_all(n).unwrap().filter(|q| !contains(q, &p231)).count() as u64;
        assert_eq!(c, avoiders, "n = {n}");
    }
}

#[test]
fn refined_tortoise_counts_match_the_formula() {
    for n in 1..=7 {
        let found = tortoise_refined(n).unwrap();
        for k in 1..=n {
            assert_eq!(
                found.get(&k).copied().unwrap_or(0),
                tortoise_formula(n, k),
                "n={n} k={k}"
            );
        }
        assert_eq!(found.values().sum::<u64>(), 3u64.pow(n as u32 - 1));
    }
}

#[test]
fn only_321_is_a_class_among_length_three() {
    let classes: Vec<CayleyPerm> = generate_all(3)
        .unwrap()
        .filter(|s| classify_sigma(s).unwrap().predicted_is_class)
        .collect();
    assert_eq!(classes, vec![p("321")]);
}

#[test]
fn every_non_class_witness_validates() {
    for sigma in (2..=4).flat_map(|n| generate_all(n).unwrap()) {
        let v = classify_sigma(&sigma).unwrap();
        if v.predicted_is_class {
            assert!(v.witness.is_none());
            continue;
        }
        let w = v.witness.expect("non-class verdicts carry a witness");
        assert!(contains(&w.beta, &w.alpha), "{sigma}");
        assert!(is_sigma_sortable(&w.beta, &sigma).unwrap(), "{sigma}");
        assert!(!is_sigma_sortable(&w.alpha, &sigma).unwrap(), "{sigma}");
    }
}

#[test]
fn witnesses_reproduce_the_closure_search() {
    let member = |q: &CayleyPerm| is_sigma_sortable(q, &p("11")).unwrap();
    let violations = downward_closure_violations(member, 4).unwrap();
    assert!(violations.contains(&(p("3132"), p("132"))));

    let member = |q: &CayleyPerm| is_sigma_sortable(q, &p("21")).unwrap();
    let violations = downward_closure_violations(member, 5).unwrap();
    assert!(violations.contains(&(p("34241"), p("3241"))));
    assert!(violations.contains(&(p("35241"), p("3241"))));
    assert!(!violations.iter().any(|(_, a)| *a == p("132")));

    let w = witness_non_class(&p("21")).unwrap();
    assert!(violations.contains(&(w.beta, w.alpha)));
}

#[test]
fn class_bases_from_the_search() {
    let member = |q: &CayleyPerm| is_sigma_sortable(q, &p("321")).unwrap();
    assert_eq!(minimal_non_members(member, 5).unwrap(), vec![p("123"), p("132")]);
    let member = |q: &CayleyPerm| is_sigma_sortable(q, &p("12")).unwrap();
    assert_eq!(minimal_non_members(member, 5).unwrap(), vec![p("213")]);
    let member = |q: &CayleyPerm| is_popstack_sortable(q, Popstack::Tortoise);
    assert_eq!(
        minimal_non_members(member, 4).unwrap(),
        vec![p("211"), p("221"), p("231"), p("312")]
    );
}

#[test]
fn class_predictions_hold_on_the_panel() {
    for sigma in (2..=3).flat_map(|n| generate_all(n).unwrap()) {
        let v = verify_class(&sigma, 5).unwrap();
        assert!(v.equality_holds, "{sigma}: {:?}", v.counterexample);
    }
}

#[test]
fn minimal_non_members_are_an_antichain() {
    let member = |q: &CayleyPerm| is_sigma_sortable(q, &p("4231")).unwrap();
    let basis = minimal_non_members(member, 5).unwrap();
    let set: BTreeSet<_> = basis.iter().collect();
    for a in &basis {
        for b in &basis {
            if a != b {
                assert!(!contains(a, b), "{a} contains {b}");
            }
        }
    }
    assert_eq!(set.len(), basis.len());
}

#[test]
fn serde_shapes() {
    let perm = p("231");
    assert_eq!(serde_json::to_string(&perm).unwrap(), "[2,3,1]");
    assert!(serde_json::from_str::<CayleyPerm>("[1,3]").is_err());

    let trace = SortTrace {
        events: vec![Event::Push(1), Event::Pop(1)],
        output: p("1").into(),
    };
    let json = serde_json::to_value(&trace).unwrap();
    assert_eq!(json["events"][0]["op"], "push");
    assert_eq!(json["events"][1]["value"], 1);
    assert_eq!(serde_json::from_value::<SortTrace>(json).unwrap(), trace);

    let path = encode(&p("42132"), &p("11")).unwrap();
    let back: LabeledDyckPath = serde_json::from_str(&serde_json::to_string(&path).unwrap()).unwrap();
    assert_eq!(back, path);

    let verdict = classify_sigma(&p("21")).unwrap();
    let json = serde_json::to_value(&verdict).unwrap();
    assert_eq!(json["predicted_is_class"], false);
    assert_eq!(json["witness"]["beta"], serde_json::json!([3, 5, 2, 4, 1]));

    let report = count_sortable(&Machine::Popstack(Popstack::Hare), 3, 1).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["counts"]["3"], 11);
}

#[test]
fn refined_report_serializes() {
    let report = count_sortable(&Machine::Popstack(Popstack::Tortoise), 3, 1).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["refined"]["3"]["2"], 4);
    let back: SequenceReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, report);
}
