use std::collections::BTreeSet;

use choquet::game::LimitPredicate;
use choquet::solver::{enumerate_topologies, sample_topologies, solve, sweep_predicates, verify_winning, Witness};
use choquet::strategy::Stationary;
use choquet::topology::{bits, full_mask, Space};
use choquet::Side;
use proptest::prelude::*;

/// Preorders on n points, counted directly: every finite topology is the
/// Alexandrov topology of its specialization preorder.
fn preorder_count(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    (0u64..1 << pairs.len())
        .filter(|sel| {
            let rel = |a: usize, b: usize| a == b || pairs.iter().position(|&p| p == (a, b)).is_some_and(|k| sel >> k & 1 == 1);
            (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(rel(a, b) && rel(b, c)) || rel(a, c))))
        })
        .count()
}

/// Backward induction over opens ordered by size. Staying at `V` is only
/// a win when `Q(V)`.
fn oracle(space: &Space, q: &LimitPredicate) -> Vec<(u64, bool)> {
    let mut basics = space.masks();
    let top = full_mask(space.size().unwrap());
    if !basics.contains(&top) {
        basics.push(top);
    }
    basics.sort_by_key(|m| (m.count_ones(), *m));
    basics.dedup();
    let catalog: BTreeSet<u64> = space.masks().into_iter().collect();
    let mut win: Vec<(u64, bool)> = Vec::new();
    for &v in &basics {
        let won = |w: u64| win.iter().any(|&(o, b)| o == w && b);
        let ok = catalog.iter().filter(|&&u| u & !v == 0).all(|&u| {
            bits(u).all(|x| {
                let smaller = catalog.iter().any(|&r| r != v && r & !u == 0 && r >> x & 1 == 1 && won(r));
                smaller || (u == v && q.holds(v))
            })
        });
        win.push((v, ok));
    }
    win
}

#[test]
fn topology_counts_match_preorder_counts() {
    for n in 1..=4 {
        assert_eq!(enumerate_topologies(n).unwrap().len(), preorder_count(n), "n = {n}");
    }
}

#[test]
fn solver_matches_backward_induction_on_three_points() {
    for s in enumerate_topologies(3).unwrap() {
        for q in sweep_predicates(&s, 7) {
            let r = solve(&s, &q).unwrap();
            let o = oracle(&s, &q);
            for (v, side) in &r.per_open {
                let expect = o.iter().find(|(w, _)| w == v).unwrap().1;
                assert_eq!(*side == Side::Nonempty, expect, "{} {} at {v:b}", s.name, q.describe(&s));
            }
            assert!(r.certified && r.determined);
        }
    }
}

#[test]
fn solver_matches_backward_induction_on_sampled_four_points() {
    for s in sample_topologies(4, 40, 3).unwrap() {
        for q in sweep_predicates(&s, 11).into_iter().take(40) {
            let r = solve(&s, &q).unwrap();
            let root = oracle(&s, &q).last().unwrap().1;
            assert_eq!(r.winner == Side::Nonempty, root);
        }
    }
}

#[test]
fn copycat_wins_exactly_when_every_open_is_good() {
    for s in enumerate_topologies(3).unwrap() {
        for q in sweep_predicates(&s, 5) {
            let all = s.opens().iter().all(|&o| q.holds(o));
            let got = verify_winning(&s, &q, Witness::Nonempty(&Stationary::copycat())).unwrap();
            assert_eq!(got, all, "{} {}", s.name, q.describe(&s));
        }
    }
}

proptest! {
    #[test]
    fn exactly_one_side_wins(t in 0usize..355, pick in any::<u64>()) {
        let s = &enumerate_topologies(4).unwrap()[t];
        let opens = s.opens();
        let q = LimitPredicate::Set(opens.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).map(|(_, &o)| o).collect());
        let r = solve(s, &q).unwrap();
        prop_assert!(r.determined);
        prop_assert!(r.certified);
        prop_assert_eq!(r.nonempty.is_some(), r.winner == Side::Nonempty);
    }
}
