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

//! Frequent pattern mining under minimum-image-based (MNI) support, and
//! reduction of the mined set to patterns not embeddable in one another.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::graph::{LabelTable, PropertyGraph, Sym, Topology};
use crate::pattern::{CanonicalCode, GraphPattern};
use crate::search::{self, CompiledPattern, Search, SearchOptions};

const ISOMORPHIC: SearchOptions = SearchOptions {
    injective: true,
    induced: false,
    exact_labels: false,
};

/// All injective embeddings of a pattern, with the image set of each
/// variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsomorphismSet {
    /// Sorted; `mappings[i][v]` is the node bound to variable `v`.
    pub mappings: Vec<Vec<u32>>,
    /// `images[v]` is `M(v)`, ascending.
    pub images: Vec<Vec<u32>>,
}

impl IsomorphismSet {
    fn from_mappings(mappings: Vec<Vec<u32>>, vars: usize) -> Self {
        let mut images = vec![BTreeSet::new(); vars];
        for m in &mappings {
            for (v, &n) in m.iter().enumerate() {
                images[v].insert(n);
            }
        }
        IsomorphismSet {
            mappings,
            images: images.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }

    /// Minimum image count over variables; zero without embeddings.
    pub fn mni(&self) -> usize {
        if self.mappings.is_empty() {
            return 0;
        }
        self.images.iter().map(Vec::len).min().unwrap_or(0)
    }
}

/// Injective, label-compatible, edge-preserving maps of `query` into
/// `target`. With `induced`, edges between mapped nodes must also be
/// present in the query.
pub fn subgraph_isomorphisms(query: &GraphPattern, target: &PropertyGraph, induced: bool) -> IsomorphismSet {
    let q = query.compile(target.label_table());
    let opts = SearchOptions { induced, ..ISOMORPHIC };
    let mappings = search::all_embeddings(&q, target.topology(), opts);
    IsomorphismSet::from_mappings(mappings, q.var_count())
}

/// True if `small` has a (non-induced) injective embedding into `large`.
pub fn embeds_into(small: &GraphPattern, large: &GraphPattern) -> bool {
    let (table, topo) = large.as_target();
    search::exists(&small.compile(&table), &topo, ISOMORPHIC)
}

/// MNI support of `q` in `g`.
pub fn mni_support(q: &GraphPattern, g: &PropertyGraph) -> usize {
    mni(&q.compile(g.label_table()), g.topology(), 0)
}

/// MNI of `q` in `g`. Gives up as soon as some variable provably has fewer
/// than `threshold` images, returning a value below `threshold`; otherwise
/// the result is exact.
pub(crate) fn mni(q: &CompiledPattern, g: &Topology, threshold: usize) -> usize {
    let n = q.var_count();
    if n == 0 {
        return 0;
    }
    let searches: Vec<Search> = (0..n).map(|v| Search::new(q, g, ISOMORPHIC, Some(v))).collect();
    let candidates: Vec<Vec<u32>> = searches.iter().map(|s| s.root_candidates()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (candidates[v].len(), v));
    if candidates[order[0]].len() < threshold {
        return candidates[order[0]].len();
    }
    // (variable, node) pairs known to lie in some embedding
    let mut valid: Vec<HashSet<u32>> = vec![HashSet::new(); n];
    let mut best = usize::MAX;
    for &v in &order {
        let cands = &candidates[v];
        let mut remaining = cands.len();
        for &u in cands {
            remaining -= 1;
            if !valid[v].contains(&u) {
                let mut found: Option<Vec<u32>> = None;
                let _ = searches[v].run_from(&[u], &mut |b: &[u32]| {
                    found = Some(b.to_vec());
                    ControlFlow::Break(())
                });
                if let Some(b) = found {
                    for (w, &x) in b.iter().enumerate() {
                        valid[w].insert(x);
                    }
                }
            }
            if valid[v].len() + remaining < threshold {
                return valid[v].len() + remaining;
            }
        }
        best = best.min(valid[v].len());
    }
    best
}

/// A pattern that met the support threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequentPattern {
    /// In canonical form.
    pub pattern: GraphPattern,
    /// Highest MNI support among the communities it was found in.
    pub support: usize,
    /// Communities where the pattern is frequent, ascending.
    pub communities: Vec<u32>,
}

/// Patterns with MNI support of at least `tau` in `c`, grown edge by edge
/// from frequent single-edge seeds. Patterns have at most
/// `max_pattern_nodes` variables. Results are sorted by canonical code.
pub fn mine_frequent_patterns(c: &PropertyGraph, tau: usize, max_pattern_nodes: usize) -> Vec<FrequentPattern> {
    mine_topology(c.topology(), c.label_table(), tau, max_pattern_nodes)
        .into_iter()
        .map(|(pattern, support)| FrequentPattern {
            pattern,
            support,
            communities: vec![0],
        })
        .collect()
}

type Triple = (Sym, Sym, Sym, bool);

pub(crate) fn mine_topology(
    g: &Topology,
    labels: &LabelTable,
    tau: usize,
    max_pattern_nodes: usize,
) -> Vec<(GraphPattern, usize)> {
    let tau = tau.max(1);
    if max_pattern_nodes == 0 || tau > g.node_count() {
        return Vec::new();
    }
    let triples: BTreeSet<Triple> = g
        .edges()
        .map(|(s, l, d)| (g.label(s), l, g.label(d), s == d))
        .collect();
    let mut seeds = Vec::new();
    for &(ls, le, ld, self_loop) in &triples {
        let (s, e, d) = (labels.name(ls), labels.name(le), labels.name(ld));
        let p = if self_loop {
            GraphPattern::new(&[("v0", s)], &[("v0", e, "v0")])
        } else if max_pattern_nodes >= 2 {
            GraphPattern::new(&[("v0", s), ("v1", d)], &[("v0", e, "v1")])
        } else {
            continue;
        };
        seeds.push(p.expect("seed patterns are connected").canonical_form());
    }

    let mut seen: HashSet<CanonicalCode> = HashSet::new();
    let seeds: Vec<GraphPattern> = seeds
        .into_iter()
        .filter(|p| seen.insert(p.canonical_code()))
        .collect();
    let mut frequent: BTreeMap<CanonicalCode, (GraphPattern, usize)> = BTreeMap::new();
    let mut level = evaluate(seeds, g, labels, tau);
    let frequent_triples: Vec<(String, String, String, bool)> = level
        .iter()
        .map(|(p, _)| {
            let e = &p.edges()[0];
            let l = p.node_labels();
            (l[e.src].clone(), e.label.clone(), l[e.dst].clone(), e.src == e.dst)
        })
        .collect();

    while !level.is_empty() {
        for (p, s) in &level {
            frequent.insert(p.canonical_code(), (p.clone(), *s));
        }
        let mut candidates = Vec::new();
        for (p, _) in &level {
            for ext in extensions(p, &frequent_triples, max_pattern_nodes) {
                let ext = ext.canonical_form();
                let code = ext.canonical_code();
                if !seen.insert(code) {
                    continue;
                }
                // every connected one-edge-smaller subpattern must be frequent
                let closed = (0..ext.size_edges()).all(|i| match ext.without_edge(i) {
                    Some(sub) => frequent.contains_key(&sub.canonical_code()),
                    None => true,
                });
                if closed {
                    candidates.push(ext);
                }
            }
        }
        level = evaluate(candidates, g, labels, tau);
    }
    frequent.into_values().collect()
}

fn evaluate(candidates: Vec<GraphPattern>, g: &Topology, labels: &LabelTable, tau: usize) -> Vec<(GraphPattern, usize)> {
    candidates
        .into_par_iter()
        .filter_map(|p| {
            let support = mni(&p.compile(labels), g, tau);
            (support >= tau).then_some((p, support))
        })
        .collect()
}

fn extensions(p: &GraphPattern, triples: &[(String, String, String, bool)], max_nodes: usize) -> Vec<GraphPattern> {
    let labels = p.node_labels();
    let n = p.size_nodes();
    let present: HashSet<(usize, &str, usize)> = p.edges().iter().map(|e| (e.src, e.label.as_str(), e.dst)).collect();
    let mut out = Vec::new();
    for (ls, le, ld, self_loop) in triples {
        for v in 0..n {
            if *self_loop {
                if labels[v] == *ls && !present.contains(&(v, le.as_str(), v)) {
                    out.push(p.with_edge(v, le, v, None));
                }
                continue;
            }
            if labels[v] == *ls {
                if n < max_nodes {
                    out.push(p.with_edge(v, le, n, Some(ld)));
                }
                for u in 0..n {
                    if u != v && labels[u] == *ld && !present.contains(&(v, le.as_str(), u)) {
                        out.push(p.with_edge(v, le, u, None));
                    }
                }
            }
            if labels[v] == *ld && n < max_nodes {
                out.push(p.with_edge(n, le, v, Some(ls)));
            }
        }
    }
    out
}

/// Drops every pattern that embeds into a larger (or earlier-sorted equal
/// size) pattern. Patterns are first merged by canonical form, then sorted
/// by descending edge count, descending node count and canonical code.
pub fn reduce_patterns(patterns: &[FrequentPattern]) -> Vec<GraphPattern> {
    let mut unique: HashMap<CanonicalCode, &GraphPattern> = HashMap::new();
    for fp in patterns {
        unique.entry(fp.pattern.canonical_code()).or_insert(&fp.pattern);
    }
    let mut sorted: Vec<(CanonicalCode, &GraphPattern)> = unique.into_iter().collect();
    sorted.sort_by(|(ca, a), (cb, b)| {
        b.size_edges()
            .cmp(&a.size_edges())
            .then(b.size_nodes().cmp(&a.size_nodes()))
            .then(ca.cmp(cb))
    });
    let mut tagged = vec![false; sorted.len()];
    for i in 0..sorted.len() {
        if tagged[i] {
            continue;
        }
        let (table, topo) = sorted[i].1.as_target();
        for j in i + 1..sorted.len() {
            if !tagged[j] && search::exists(&sorted[j].1.compile(&table), &topo, ISOMORPHIC) {
                tagged[j] = true;
            }
        }
    }
    sorted
        .into_iter()
        .zip(tagged)
        .filter(|(_, t)| !t)
        .map(|((_, p), _)| p.clone())
        .collect()
}
