// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

mod common;

use common::*;
use gedmine_core::{
    find_cover, mine_dependencies, rank_ged, rank_report, DepMinerConfig, Ged, GedError, GedStats, GraphPattern,
    Literal, RankConfig, RuleGraph,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lit(v: &str) -> Literal {
    Literal::constant("x", "a", v).unwrap()
}

fn other(v: &str) -> Literal {
    Literal::constant("x", "b", v).unwrap()
}

fn rule(x: Vec<Literal>, y: Vec<Literal>) -> Ged {
    let q = GraphPattern::new(&[("x", "t")], &[]).unwrap();
    Ged::new(q, x, y).unwrap()
}

fn with_stats(support: usize, matches: usize, k: usize, n: usize) -> Ged {
    let mut g = rule(vec![lit("1")], vec![other("1")]);
    g.stats = GedStats { support, matches, k, n };
    g
}

#[test]
fn triangle_drops_the_transitive_edge() {
    let (x, y, z) = (vec![lit("x")], vec![lit("y")], vec![lit("z")]);
    let xy = rule(x.clone(), y.clone());
    let yz = rule(y.clone(), z.clone());
    let xz = rule(x.clone(), z.clone());
    for order in [
        vec![xy.clone(), yz.clone(), xz.clone()],
        vec![xz.clone(), xy.clone(), yz.clone()],
        vec![yz.clone(), xz.clone(), xy.clone()],
    ] {
        let cover = find_cover(&order);
        assert_eq!(cover.len(), 2);
        assert!(cover.contains(&xy) && cover.contains(&yz));
    }
}

#[test]
fn unrelated_rules_are_unchanged() {
    let rules = vec![
        rule(vec![lit("1")], vec![lit("2")]),
        rule(vec![lit("3")], vec![lit("4")]),
        rule(vec![other("5")], vec![other("6")]),
    ];
    let mut cover = find_cover(&rules);
    let mut want = rules.clone();
    cover.sort_by_key(|r| r.to_string());
    want.sort_by_key(|r| r.to_string());
    assert_eq!(cover, want);
}

#[test]
fn chain_reduces_to_its_spine() {
    let s = |v: &str| vec![lit(v)];
    let spine = vec![rule(s("x"), s("y")), rule(s("y"), s("z")), rule(s("z"), s("w"))];
    let mut all = spine.clone();
    all.push(rule(s("x"), s("z")));
    all.push(rule(s("x"), s("w")));
    let mut cover = find_cover(&all);
    cover.sort_by_key(|r| r.to_string());
    let mut want = spine;
    want.sort_by_key(|r| r.to_string());
    assert_eq!(cover, want);
}

#[test]
fn rules_of_different_patterns_never_interact() {
    let q1 = GraphPattern::new(&[("x", "t")], &[]).unwrap();
    let q2 = GraphPattern::new(&[("x", "u")], &[]).unwrap();
    let r = |q: &GraphPattern, a: &str, b: &str| Ged::new(q.clone(), vec![lit(a)], vec![lit(b)]).unwrap();
    let rules = vec![r(&q1, "x", "y"), r(&q2, "y", "z"), r(&q1, "x", "z")];
    assert_eq!(find_cover(&rules).len(), 3);
}

#[test]
fn closed_form_ranks() {
    let r = with_stats(4, 4, 1, 8);
    assert!((rank_ged(&r, &RankConfig::new(1.0).unwrap()).unwrap() - 0.0).abs() < 1e-12);
    let r = with_stats(3, 7, 2, 8);
    assert!((rank_ged(&r, &RankConfig::new(0.0).unwrap()).unwrap() - 0.25).abs() < 1e-12);
    let r = with_stats(2, 4, 2, 8);
    assert!((rank_ged(&r, &RankConfig::new(0.5).unwrap()).unwrap() - 0.375).abs() < 1e-12);
}

#[test]
fn rank_errors_and_config_bounds() {
    let cfg = RankConfig::default();
    assert!(matches!(rank_ged(&with_stats(0, 0, 1, 2), &cfg), Err(GedError::UndefinedRank(_))));
    assert!(matches!(rank_ged(&with_stats(1, 1, 0, 0), &cfg), Err(GedError::UndefinedRank(_))));
    assert!(RankConfig::new(-0.1).is_err());
    assert!(RankConfig::new(1.1).is_err());
}

#[test]
fn report_orders_and_truncates() {
    let cfg = RankConfig::new(0.0).unwrap();
    let low = with_stats(1, 1, 1, 10);
    let high = with_stats(1, 1, 3, 10);
    let out = rank_report(&[high.clone(), low.clone()], &cfg, 1).unwrap();
    assert_eq!(out.len(), 1);
    assert!((out[0].rank.unwrap() - 0.1).abs() < 1e-12);
    assert!(rank_report(&[low.clone()], &cfg, 0).unwrap().is_empty());

    let mut small = rule(vec![lit("1")], vec![other("1")]);
    small.stats = GedStats { support: 1, matches: 1, k: 2, n: 4 };
    let mut big = rule(vec![lit("1"), Literal::constant("x", "c", "1").unwrap()], vec![other("1")]);
    big.stats = small.stats;
    let out = rank_report(&[big, small.clone()], &cfg, 2).unwrap();
    assert_eq!(out[0].literal_count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_is_bounded_and_monotone(
        matches in 1usize..1000,
        support_frac in 0.0f64..=1.0,
        n in 1usize..50,
        k_frac in 0.0f64..=1.0,
        alpha in 0.0f64..=1.0,
    ) {
        let support = (support_frac * matches as f64) as usize;
        let k = (k_frac * n as f64) as usize;
        let cfg = RankConfig::new(alpha).unwrap();
        let r = rank_ged(&with_stats(support, matches, k, n), &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
        if support < matches {
            let r2 = rank_ged(&with_stats(support + 1, matches, k, n), &cfg).unwrap();
            prop_assert!(r2 <= r + 1e-15);
        }
    }

    #[test]
    fn cover_is_minimal_equivalent_and_order_independent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_table(&mut rng, 6, 30);
        let sigma = mine_dependencies(&t, &DepMinerConfig { prune: false, ..DepMinerConfig::default() });
        let cover = find_cover(&sigma);
        prop_assert!(cover.len() <= sigma.len());
        let full = RuleGraph::build(&cover);
        for r in &cover {
            prop_assert!(!full.implies(r, true), "{} is implied by the rest", r);
        }
        for r in &sigma {
            prop_assert!(full.implies(r, false), "{} is lost", r);
        }
        let mut shuffled = sigma.clone();
        shuffled.shuffle(&mut rng);
        prop_assert_eq!(find_cover(&shuffled), cover);
    }
}
