use cayley_machines::cayley::{fubini, generate_all, hat, normalize, reverse, CayleyPerm};
use cayley_machines::pattern::{contains, contains_mesh, contains_word, patterns_of, CayleyMeshPattern};
use proptest::prelude::*;

/// Brute force over all of `[1..=n]^n`, kept deliberately naive.
fn cayley_by_filtering(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let total = (n as u64).pow(n as u32);
    for code in 0..total.max(1) {
        let mut w = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            w.push((c % n as u64) as u32 + 1);
            c /= n as u64;
        }
        w.reverse();
        let max = w.iter().copied().max().unwrap_or(0);
        if (1..=max).all(|v| w.contains(&v)) {
            out.push(w);
        }
    }
    out.sort();
    out.dedup();
    out
}

fn universe(max_len: usize) -> Vec<CayleyPerm> {
    (0..=max_len).flat_map(|n| generate_all(n).unwrap()).collect()
}

#[test]
fn generation_matches_filtered_words() {
    for n in 0..=6 {
        let generated: Vec<Vec<u32>> = generate_all(n).unwrap().map(Vec::from).collect();
        assert_eq!(generated, cayley_by_filtering(n), "n = {n}");
    }
}

#[test]
fn generation_counts_are_fubini() {
    let expected = [1u64, 1, 3, 13, 75, 541, 4683, 47293, 545835];
    for (n, &e) in expected.iter().enumerate() {
        assert_eq!(fubini(n), e);
        assert_eq!(generate_all(n).unwrap().count() as u64, e, "n = {n}");
    }
}

#[test]
fn reverse_and_hat_are_involutions() {
    for p in universe(5) {
        assert_eq!(reverse(&reverse(&p)), p);
        if p.len() >= 2 {
            assert_eq!(hat(&hat(&p).unwrap()).unwrap(), p);
        }
    }
}

#[test]
fn containment_is_reflexive_and_transitive() {
    let all = universe(5);
    let by_len: Vec<Vec<&CayleyPerm>> = (0..=5).map(|n| all.iter().filter(|p| p.len() == n).collect()).collect();
    for p in &all {
        assert!(contains(p, p));
    }
    // transitivity through the patterns of each text, which are exactly the
    // permutations it contains
    for text in by_len[5].iter().step_by(7) {
        let pats = patterns_of(text);
        for mid in &pats {
            for small in patterns_of(mid) {
                assert!(pats.contains(&small), "{text} > {mid} > {small}");
                assert!(contains(text, &small));
            }
        }
        for q in &all {
            assert_eq!(contains(text, q), pats.contains(q), "{text} vs {q}");
        }
    }
}

#[test]
fn containment_fails_on_larger_patterns() {
    let all = universe(4);
    for t in &all {
        for p in &all {
            if p.max_value() > t.max_value() || p.len() > t.len() {
                assert!(!contains(t, p), "{t} {p}");
            }
        }
    }
}

#[test]
fn unshaded_mesh_is_classical_containment() {
    let all = universe(4);
    let texts = universe(5);
    for tau in all.iter().filter(|p| !p.is_empty()) {
        let mp = CayleyMeshPattern::classical(tau.clone());
        for t in texts.iter().step_by(3) {
            assert_eq!(contains_mesh(t, &mp), contains(t, tau), "{t} vs {tau}");
        }
    }
}

#[test]
fn avoiding_21_means_weakly_increasing() {
    let desc: CayleyPerm = "21".parse().unwrap();
    for p in universe(7) {
        if !contains(&p, &desc) {
            assert!(p.is_weakly_increasing(), "{p}");
        }
    }
}

#[test]
fn mesh_z_and_w_on_paper_examples() {
    let z = CayleyMeshPattern::cayley_z();
    let w = CayleyMeshPattern::west_w();
    let p = |s: &str| s.parse::<CayleyPerm>().unwrap();
    assert!(contains_mesh(&p("3241"), &z));
    assert!(!contains_mesh(&p("35241"), &z));
    assert!(!contains_mesh(&p("34241"), &z));
    assert!(contains_mesh(&p("34241"), &w));
    assert!(!contains_mesh(&p("35241"), &w));
    assert_eq!(z.to_string().parse::<CayleyMeshPattern>().unwrap(), z);
}

proptest! {
    #[test]
    fn normalize_is_idempotent(w in prop::collection::vec(1u32..20, 0..10)) {
        let once = normalize(&w);
        prop_assert_eq!(normalize(once.letters()), once.clone());
        prop_assert_eq!(once.len(), w.len());
    }

    #[test]
    fn normalize_keeps_pairwise_order(w in prop::collection::vec(1u32..20, 0..10)) {
        let n = normalize(&w);
        let v = n.letters();
        for i in 0..w.len() {
            for j in 0..w.len() {
                prop_assert_eq!(w[i].cmp(&w[j]), v[i].cmp(&v[j]));
            }
        }
    }

    #[test]
    fn word_containment_matches_normalized(
        w in prop::collection::vec(1u32..8, 0..8),
        pat in prop::collection::vec(1u32..4, 0..4),
    ) {
        let text = normalize(&w);
        let pn = normalize(&pat);
        prop_assert_eq!(contains_word(&w, &pat), contains(&text, &pn));
    }

    #[test]
    fn text_form_round_trips(w in prop::collection::vec(1u32..30, 0..10)) {
        let p = normalize(&w);
        prop_assert_eq!(p.to_string().parse::<CayleyPerm>().unwrap(), p);
    }
}
