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

//! Minimal cover of a rule set and interestingness ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::depminer::Ged;
use crate::error::{GedError, Result};
use crate::literal::Literal;

type LiteralSet = Vec<Literal>;

/// Rules of one pattern as a graph over literal sets: each rule `X -> Y`
/// is an edge from node `X` to node `Y`.
#[derive(Clone, Debug, Default)]
struct PatternGroup {
    nodes: Vec<LiteralSet>,
    index: HashMap<LiteralSet, usize>,
    /// `(from, to) -> rule`.
    edges: BTreeMap<(usize, usize), Ged>,
    /// `(to, from)` for every edge.
    reverse: BTreeSet<(usize, usize)>,
}

impl PatternGroup {
    fn node(&mut self, set: &LiteralSet) -> usize {
        if let Some(&i) = self.index.get(set) {
            return i;
        }
        self.nodes.push(set.clone());
        self.index.insert(set.clone(), self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a, b))
    }

    fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((a, 0)..(a + 1, 0)).map(|(&(_, b), _)| b)
    }

    fn predecessors(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.reverse.range((b, 0)..(b + 1, 0)).map(|&(_, a)| a)
    }

    fn remove(&mut self, e: (usize, usize)) {
        self.edges.remove(&e);
        self.reverse.remove(&(e.1, e.0));
    }

    /// Inserts `x -> y` unless it is already present or already implied by
    /// a triangle; removes edges the new one makes transitive.
    fn insert(&mut self, x: usize, y: usize, rule: Ged) {
        if x == y || self.has(x, y) {
            return;
        }
        if self.successors(x).any(|z| self.has(z, y)) {
            return;
        }
        let drop_forward: Vec<(usize, usize)> = self
            .successors(y)
            .filter(|&z| self.has(x, z))
            .map(|z| (x, z))
            .collect();
        let drop_backward: Vec<(usize, usize)> = self
            .predecessors(x)
            .filter(|&w| self.has(w, y))
            .map(|w| (w, y))
            .collect();
        for e in drop_forward.into_iter().chain(drop_backward) {
            self.remove(e);
        }
        self.edges.insert((x, y), rule);
        self.reverse.insert((y, x));
    }

    /// Whether `to` is reachable from `from` without using edge `skip`.
    fn reachable_without(&self, from: usize, to: usize, skip: (usize, usize)) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(a) = stack.pop() {
            for b in self.successors(a) {
                if (a, b) == skip || seen[b] {
                    continue;
                }
                if b == to {
                    return true;
                }
                seen[b] = true;
                stack.push(b);
            }
        }
        false
    }

    /// Drops, in edge order, every edge whose target stays reachable.
    fn reduce(&mut self) {
        let keys: Vec<(usize, usize)> = self.edges.keys().copied().collect();
        for e in keys {
            if self.reachable_without(e.0, e.1, e) {
                self.remove(e);
            }
        }
    }
}

/// Rules grouped by pattern, each group a graph over literal sets.
#[derive(Clone, Debug, Default)]
pub struct RuleGraph {
    groups: BTreeMap<String, PatternGroup>,
}

fn pattern_key(g: &Ged) -> String {
    serde_json::to_string(&g.pattern).expect("patterns serialize")
}

fn rule_key(g: &Ged) -> (String, LiteralSet, LiteralSet) {
    (pattern_key(g), g.lhs.clone(), g.rhs.clone())
}

impl RuleGraph {
    /// Inserts the rules in canonical `(pattern, lhs, rhs)` order, pruning
    /// transitive edges as triangles close.
    pub fn build(sigma: &[Ged]) -> Self {
        let mut sorted: Vec<&Ged> = sigma.iter().collect();
        sorted.sort_by_cached_key(|g| rule_key(g));
        let mut rg = RuleGraph::default();
        for g in sorted {
            let group = rg.groups.entry(pattern_key(g)).or_default();
            let x = group.node(&g.lhs);
            let y = group.node(&g.rhs);
            group.insert(x, y, g.clone());
        }
        rg
    }

    /// Removes every remaining edge implied by a path of other edges.
    pub fn reduce(&mut self) {
        for g in self.groups.values_mut() {
            g.reduce();
        }
    }

    pub fn rules(&self) -> Vec<Ged> {
        self.groups
            .values()
            .flat_map(|g| g.edges.values().cloned())
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.groups.values().map(|g| g.edges.len()).sum()
    }

    /// Whether `rule`'s right-hand side is reachable from its left-hand
    /// side through the graph's edges. With `excluding_itself` the rule's
    /// own edge is not used.
    pub fn implies(&self, rule: &Ged, excluding_itself: bool) -> bool {
        let Some(group) = self.groups.get(&pattern_key(rule)) else {
            return false;
        };
        let (Some(&x), Some(&y)) = (group.index.get(&rule.lhs), group.index.get(&rule.rhs)) else {
            return false;
        };
        let skip = if excluding_itself { (x, y) } else { (usize::MAX, usize::MAX) };
        x == y || group.reachable_without(x, y, skip)
    }
}

/// A subset of `sigma` from which every rule of `sigma` follows by
/// transitivity and in which no rule follows from the others. Output is
/// sorted by pattern, then left- and right-hand side.
pub fn find_cover(sigma: &[Ged]) -> Vec<Ged> {
    let mut rg = RuleGraph::build(sigma);
    rg.reduce();
    let mut out = rg.rules();
    out.sort_by_cached_key(rule_key);
    out
}

/// Trade-off between persistence and complexity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankConfig {
    pub alpha: f64,
}

impl RankConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(GedError::Config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(RankConfig { alpha })
    }
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { alpha: 0.5 }
    }
}

/// `alpha * (1 - support / matches) + (1 - alpha) * k / n`. Lower is more
/// interesting.
pub fn rank_ged(phi: &Ged, cfg: &RankConfig) -> Result<f64> {
    let s = &phi.stats;
    if s.matches == 0 {
        return Err(GedError::UndefinedRank("rule has no matches".to_string()));
    }
    if s.n == 0 {
        return Err(GedError::UndefinedRank("match table has no columns".to_string()));
    }
    let persistence = s.support as f64 / s.matches as f64;
    Ok(cfg.alpha * (1.0 - persistence) + (1.0 - cfg.alpha) * (s.k as f64 / s.n as f64))
}

/// Ranks every rule, sorts ascending by rank (then fewer literals, then
/// serialized form) and keeps the first `top_k`.
pub fn rank_report(sigma_c: &[Ged], cfg: &RankConfig, top_k: usize) -> Result<Vec<Ged>> {
    let mut ranked: Vec<(Ged, String)> = sigma_c
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.rank = Some(rank_ged(&g, cfg)?);
            let key = serde_json::to_string(&(&g.pattern, &g.lhs, &g.rhs)).expect("rules serialize");
            Ok((g, key))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|(a, ka), (b, kb)| {
        a.rank
            .partial_cmp(&b.rank)
            .unwrap_or(Ordering::Equal)
            .then(a.literal_count().cmp(&b.literal_count()))
            .then_with(|| ka.cmp(kb))
    });
    ranked.truncate(top_k);
    Ok(ranked.into_iter().map(|(g, _)| g).collect())
}

/// Literal-set closure of `x` under `rules` (all of the same pattern):
/// repeatedly adds `Y` whenever some rule `Z -> Y` has `Z` inside the set.
pub fn literal_closure(x: &[Literal], rules: &[Ged]) -> BTreeSet<Literal> {
    let mut closure: BTreeSet<Literal> = x.iter().cloned().collect();
    loop {
        let before = closure.len();
        for r in rules {
            if r.lhs.iter().all(|l| closure.contains(l)) {
                closure.extend(r.rhs.iter().cloned());
            }
        }
        if closure.len() == before {
            return closure;
        }
    }
}
