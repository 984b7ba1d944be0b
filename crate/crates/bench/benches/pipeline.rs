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

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gedmine_bench::{synthetic_graph, SyntheticSpec};
use gedmine_core::matcher::find_matches;
use gedmine_core::{
    build_pseudo_relation, detect_communities, discover, mine_dependencies, DepMinerConfig, DiscoveryConfig,
    GraphPattern, MatchOptions,
};

fn small() -> SyntheticSpec {
    SyntheticSpec {
        nodes: 2_000,
        edges: 6_000,
        ..SyntheticSpec::default()
    }
}

fn path_pattern() -> GraphPattern {
    GraphPattern::new(
        &[("x", "L0"), ("y", "L1"), ("z", "L2")],
        &[("x", "r01", "y"), ("y", "r12", "z")],
    )
    .expect("valid pattern")
}

fn communities(c: &mut Criterion) {
    let g = synthetic_graph(&small());
    c.bench_function("communities/2k", |b| b.iter(|| detect_communities(black_box(&g), 0.05, 0)));
}

fn matching(c: &mut Criterion) {
    let g = synthetic_graph(&SyntheticSpec::default());
    let q = path_pattern();
    c.bench_function("match/path3/10k", |b| {
        b.iter(|| find_matches(black_box(&q), black_box(&g), MatchOptions::default()))
    });
}

fn dependencies(c: &mut Criterion) {
    let g = synthetic_graph(&small());
    let q = path_pattern();
    let m = find_matches(&q, &g, MatchOptions::default());
    let t = build_pseudo_relation(&q, &m, &g, None);
    let cfg = DepMinerConfig {
        max_lhs_size: 2,
        ..DepMinerConfig::default()
    };
    c.bench_function("dependencies/path3/2k", |b| b.iter(|| mine_dependencies(black_box(&t), &cfg)));
}

fn end_to_end(c: &mut Criterion) {
    let g = synthetic_graph(&SyntheticSpec {
        nodes: 500,
        edges: 1_500,
        ..SyntheticSpec::default()
    });
    let cfg = DiscoveryConfig {
        gamma: 0.05,
        tau: 5,
        max_pattern_nodes: 3,
        max_lhs_size: 2,
        ..DiscoveryConfig::default()
    };
    let mut group = c.benchmark_group("discover");
    group.sample_size(10);
    group.bench_function("500", |b| b.iter(|| discover(black_box(&g), &cfg, None).expect("valid config")));
    group.finish();
}

criterion_group!(benches, communities, matching, dependencies, end_to_end);
criterion_main!(benches);
