use std::collections::HashSet;

use hyperdyn::symbolic::{metric_distance, SequencePrefix, SymbolWord, TransitionMatrix};
use proptest::prelude::*;

fn valid_matrices(m: usize) -> Vec<TransitionMatrix> {
    (0u32..1 << (m * m))
        .filter_map(|bits| {
            let rows: Vec<Vec<u8>> = (0..m).map(|i| (0..m).map(|j| ((bits >> (i * m + j)) & 1) as u8).collect()).collect();
            TransitionMatrix::from_rows(&rows).ok()
        })
        .collect()
}

fn brute_mul(x: &[Vec<bool>], y: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let m = x.len();
    (0..m).map(|i| (0..m).map(|j| (0..m).any(|k| x[i][k] && y[k][j])).collect()).collect()
}

/// Least `k ≤ (m−1)²+1` with `A^k > 0`, by repeated naive products.
fn brute_index(a: &TransitionMatrix) -> Option<usize> {
    let m = a.size();
    let base: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| a.get(i, j)).collect()).collect();
    let mut p = base.clone();
    for k in 1..=(m - 1) * (m - 1) + 1 {
        if p.iter().flatten().all(|&v| v) {
            return Some(k);
        }
        p = brute_mul(&p, &base);
    }
    None
}

fn brute_words(a: &TransitionMatrix, len: usize) -> Vec<Vec<u8>> {
    let m = a.size() as u8;
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<u8>| {
                (0..m).filter_map(move |s| {
                    if w.last().is_none_or(|&l| a.get(l as usize, s as usize)) {
                        let mut v = w.clone();
                        v.push(s);
                        Some(v)
                    } else {
                        None
                    }
                })
            })
            .collect();
    }
    out
}

#[test]
fn eventual_positivity_matches_brute_powers_exhaustively() {
    for m in 2..=3 {
        let all = valid_matrices(m);
        assert!(!all.is_empty());
        for a in &all {
            let ep = a.is_eventually_positive();
            let oracle = brute_index(a);
            assert_eq!(ep.eventually_positive, oracle.is_some(), "{:?}", a.rows());
            assert_eq!(ep.index, oracle, "{:?}", a.rows());
        }
    }
}

#[test]
fn enumeration_matches_brute_and_shift_lands_one_shorter() {
    for m in 2..=3 {
        for a in valid_matrices(m) {
            for len in 1..=5 {
                let words = a.enumerate_allowable(len, 1 << 20).unwrap();
                let brute = brute_words(&a, len);
                assert_eq!(words.iter().map(|w| w.0.clone()).collect::<Vec<_>>(), brute);
                assert_eq!(a.count_allowable(len), brute.len() as u128);
                if len >= 2 {
                    let shorter: HashSet<SymbolWord> = a.enumerate_allowable(len - 1, 1 << 20).unwrap().into_iter().collect();
                    assert!(words.iter().all(|w| shorter.contains(&w.shifted())));
                }
            }
        }
    }
}

fn matrix4() -> impl Strategy<Value = TransitionMatrix> {
    proptest::collection::vec(proptest::collection::vec(0u8..=1, 4), 4)
        .prop_filter_map("row and column sums", |rows| TransitionMatrix::from_rows(&rows).ok())
}

fn prefix_triple(l: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>)> {
    let v = || proptest::collection::vec(0u8..3, l);
    (v(), v(), v())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eventual_positivity_sampled_four_symbols(a in matrix4()) {
        let ep = a.is_eventually_positive();
        prop_assert_eq!(ep.index, brute_index(&a));
    }

    #[test]
    fn metric_axioms((x, y, z) in (2usize..40).prop_flat_map(prefix_triple)) {
        let l = x.len();
        let (a, b, c) = (SequencePrefix::new(x.clone()).unwrap(), SequencePrefix::new(y).unwrap(), SequencePrefix::new(z).unwrap());
        let (ab, ab_hi) = metric_distance(&a, &b).unwrap();
        let (ba, _) = metric_distance(&b, &a).unwrap();
        let (bc, _) = metric_distance(&b, &c).unwrap();
        let (ac, _) = metric_distance(&a, &c).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(metric_distance(&a, &a).unwrap().0, 0.0);
        prop_assert!(ac <= ab + bc + 2f64.powi(2 - l as i32));
        prop_assert!(ab <= ab_hi && ab_hi - ab == 2f64.powi(1 - l as i32));
        let (sab, _) = metric_distance(&a.shift().unwrap(), &b.shift().unwrap()).unwrap();
        prop_assert!(sab <= 2.0 * ab_hi);
        let shifted = a.shift().unwrap();
        prop_assert_eq!(shifted.symbols(), &x[1..]);
    }
}

#[test]
fn metric_examples() {
    let p = |v: Vec<u8>| SequencePrefix::new(v).unwrap();
    let mut b = vec![0u8; 20];
    b[0] = 1;
    assert_eq!(metric_distance(&p(vec![0; 20]), &p(b)).unwrap().0, 1.0);
    let (lo, _) = metric_distance(&p(vec![0; 60]), &p(vec![1; 60])).unwrap();
    assert!((lo - 2.0).abs() < 1e-15);
    assert!(metric_distance(&p(vec![0; 3]), &p(vec![0; 4])).is_err());
    assert!(p(vec![1]).shift().is_err());
}
