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

//! Level-wise search of the literal-set lattice over a match table.
//!
//! A dependency `X -> w` holds on the table iff `pi(X) = pi(X + w)`. Nodes
//! are literal sets with non-empty partitions in which no two literals
//! touch the same column. Level `i + 1` is built by joining level-`i` nodes
//! that share their first `i - 1` literals.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discovery::Mode;
use crate::error::{GedError, Result};
use crate::graph::PropertyGraph;
use crate::literal::{is_trivial, Literal};
use crate::matcher::{find_matches, Match, MatchOptions, MatchTable, Preprocessing};
use crate::partition::Partition;
use crate::pattern::GraphPattern;

/// Counts behind a rule's rank.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GedStats {
    /// Rows covered by `pi(X + Y)`.
    pub support: usize,
    /// Rows of the match table.
    pub matches: usize,
    /// Distinct columns referenced by `X + Y`.
    pub k: usize,
    /// Columns of the match table.
    pub n: usize,
}

/// A dependency `(Q, X -> Y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ged {
    pub pattern: GraphPattern,
    pub lhs: Vec<Literal>,
    pub rhs: Vec<Literal>,
    #[serde(default)]
    pub stats: GedStats,
    /// Set once ranked; lower is more interesting.
    #[serde(default)]
    pub rank: Option<f64>,
}

impl Ged {
    /// Validates and normalizes (sorts, dedups) the literal sets.
    pub fn new(pattern: GraphPattern, mut lhs: Vec<Literal>, mut rhs: Vec<Literal>) -> Result<Self> {
        lhs.sort();
        lhs.dedup();
        rhs.sort();
        rhs.dedup();
        if rhs.is_empty() {
            return Err(GedError::InvalidPattern("rule has an empty right-hand side".to_string()));
        }
        if rhs.iter().any(|w| lhs.contains(w)) {
            return Err(GedError::InvalidPattern("rule sides overlap".to_string()));
        }
        for l in lhs.iter().chain(&rhs) {
            l.check_variables(&pattern)?;
        }
        Ok(Ged {
            pattern,
            lhs,
            rhs,
            stats: GedStats::default(),
            rank: None,
        })
    }

    pub fn literal_count(&self) -> usize {
        self.lhs.len() + self.rhs.len()
    }

    pub fn mentions_id(&self) -> bool {
        self.lhs.iter().chain(&self.rhs).any(Literal::is_id)
    }
}

impl std::fmt::Display for Ged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = |ls: &[Literal]| ls.iter().map(ToString::to_string).collect::<Vec<_>>().join(" & ");
        write!(f, "{} : {{{}}} -> {{{}}}", self.pattern, side(&self.lhs), side(&self.rhs))
    }
}

/// A literal set with its partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeNode {
    /// Sorted.
    pub literals: Vec<Literal>,
    pub partition: Partition,
}

impl LatticeNode {
    pub fn level(&self) -> usize {
        self.literals.len()
    }
}

#[derive(Clone, Debug)]
pub struct DepMinerConfig {
    /// Most frequent values per column turned into constant literals.
    pub top_k_constants: usize,
    /// Largest left-hand side searched.
    pub max_lhs_size: usize,
    pub mode: Mode,
    /// Report only left-minimal rules. Without it every valid rule found
    /// in the lattice is reported.
    pub prune: bool,
    pub preprocessing: Option<Preprocessing>,
}

impl Default for DepMinerConfig {
    fn default() -> Self {
        DepMinerConfig {
            top_k_constants: 5,
            max_lhs_size: 3,
            mode: Mode::Ged,
            prune: true,
            preprocessing: None,
        }
    }
}

/// Partition of a single literal: rows satisfying it, grouped by the value
/// the literal equates.
pub fn literal_partition(l: &Literal, t: &MatchTable) -> Result<Partition> {
    let rows = t.row_count();
    Ok(match l {
        Literal::Constant { var, attr, value } => {
            let col = t.column_cells(t.column_index(var, attr)?);
            match t.value_id(value) {
                Some(id) => Partition::from_keys(col.iter().map(|&c| (c == Some(id)).then_some(()))),
                None => Partition::empty(rows),
            }
        }
        Literal::Variable {
            var,
            attr,
            other_var,
            other_attr,
        } => {
            let a = t.column_cells(t.column_index(var, attr)?);
            let b = t.column_cells(t.column_index(other_var, other_attr)?);
            equal_cells(a, b)
        }
        Literal::Id { var, other_var } => {
            let a = t.column_cells(t.column_index(var, crate::graph::ID_ATTRIBUTE)?);
            let b = t.column_cells(t.column_index(other_var, crate::graph::ID_ATTRIBUTE)?);
            equal_cells(a, b)
        }
    })
}

fn equal_cells(a: &[Option<u32>], b: &[Option<u32>]) -> Partition {
    Partition::from_keys(a.iter().zip(b).map(|(x, y)| match (x, y) {
        (Some(x), Some(y)) if x == y => Some(*x),
        _ => None,
    }))
}

/// `pi(X)`: the intersection of the literals' partitions; every row for
/// the empty set.
pub fn partition_of(x: &[Literal], t: &MatchTable) -> Result<Partition> {
    let mut p = Partition::all(t.row_count());
    for l in x {
        p = p.intersect(&literal_partition(l, t)?);
    }
    Ok(p)
}

/// Candidate literals of one table with their partitions and the columns
/// they touch, sorted by literal.
struct Universe {
    literals: Vec<Literal>,
    partitions: Vec<Partition>,
    columns: Vec<Vec<usize>>,
}

fn build_universe(t: &MatchTable, cfg: &DepMinerConfig) -> Universe {
    let q = t.pattern();
    let vars = q.variables();
    let labels = q.node_labels();
    let cols = t.columns();
    let mut found: Vec<(Literal, Vec<usize>)> = Vec::new();

    for (ci, c) in cols.iter().enumerate() {
        if c.is_id() {
            continue;
        }
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &cell in t.column_cells(ci).iter().flatten() {
            *counts.entry(cell).or_default() += 1;
        }
        let mut ranked: Vec<(u32, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| t.value(a.0).cmp(t.value(b.0))));
        for (v, _) in ranked.into_iter().take(cfg.top_k_constants) {
            if let Ok(l) = Literal::constant(&vars[c.var], &c.attr, t.value(v)) {
                found.push((l, vec![ci]));
            }
        }
    }

    let pair_ok = |a: usize, b: usize| {
        cfg.preprocessing
            .as_ref()
            .is_none_or(|p| p.pair_allowed(&labels[a], &labels[b]))
    };
    for (i, a) in cols.iter().enumerate() {
        for (j, b) in cols.iter().enumerate().skip(i + 1) {
            if a.var == b.var || !pair_ok(a.var, b.var) {
                continue;
            }
            let lit = match (a.is_id(), b.is_id()) {
                (true, true) if cfg.mode != Mode::Gfd => Literal::id(&vars[a.var], &vars[b.var]),
                (false, false) => Literal::variable(&vars[a.var], &a.attr, &vars[b.var], &b.attr),
                _ => continue,
            };
            if let Ok(l) = lit {
                found.push((l, vec![i, j]));
            }
        }
    }

    found.sort_by(|a, b| a.0.cmp(&b.0));
    found.dedup_by(|a, b| a.0 == b.0);
    let parts: Vec<Partition> = found
        .par_iter()
        .map(|(l, _)| literal_partition(l, t).expect("literal built from table columns"))
        .collect();
    let mut u = Universe {
        literals: Vec::new(),
        partitions: Vec::new(),
        columns: Vec::new(),
    };
    for ((l, c), p) in found.into_iter().zip(parts) {
        if !p.is_empty() {
            u.literals.push(l);
            u.partitions.push(p);
            u.columns.push(c);
        }
    }
    u
}

/// Level-1 lattice nodes: one per candidate literal with a non-empty
/// partition.
pub fn generate_level1(t: &MatchTable, cfg: &DepMinerConfig) -> Vec<LatticeNode> {
    let u = build_universe(t, cfg);
    u.literals
        .into_iter()
        .zip(u.partitions)
        .map(|(l, partition)| LatticeNode {
            literals: vec![l],
            partition,
        })
        .collect()
}

/// Joins every pair of level-`i` nodes into permissible level-`i + 1`
/// nodes: exactly one more literal, no column constrained twice, a
/// non-empty partition. Output is deduplicated and sorted.
pub fn generate_next_level(nodes: &[LatticeNode]) -> Vec<LatticeNode> {
    let mut seen: HashSet<Vec<Literal>> = HashSet::new();
    let mut out = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let union: BTreeSet<&Literal> = a.literals.iter().chain(&b.literals).collect();
            if union.len() != a.level() + 1 {
                continue;
            }
            let mut slots = HashSet::new();
            if !union.iter().flat_map(|l| l.slots()).all(|s| slots.insert(s)) {
                continue;
            }
            let literals: Vec<Literal> = union.into_iter().cloned().collect();
            if seen.contains(&literals) {
                continue;
            }
            let partition = a.partition.intersect(&b.partition);
            if partition.is_empty() {
                continue;
            }
            seen.insert(literals.clone());
            out.push(LatticeNode { literals, partition });
        }
    }
    out.sort_by(|a, b| a.literals.cmp(&b.literals));
    out
}

fn columns_of(literals: &[&Literal], t: &MatchTable) -> usize {
    let mut cols = HashSet::new();
    for l in literals {
        for (var, attr) in l.slots() {
            if let Ok(c) = t.column_index(var, attr) {
                cols.insert(c);
            }
        }
    }
    cols.len()
}

fn make_ged(t: &MatchTable, lhs: Vec<Literal>, rhs: Vec<Literal>, support: usize) -> Ged {
    let all: Vec<&Literal> = lhs.iter().chain(&rhs).collect();
    let k = columns_of(&all, t);
    Ged {
        pattern: t.pattern().clone(),
        lhs,
        rhs,
        stats: GedStats {
            support,
            matches: t.row_count(),
            k,
            n: t.column_count(),
        },
        rank: None,
    }
}

/// For every `X` among `lhs_nodes` and `Y` among `rhs_nodes` with `X` a
/// proper subset of `Y` and `pi(X) = pi(Y)`, emits `X -> Y \ X`. A node of
/// `rhs_nodes` yields at most one rule; it is dropped from the pool once
/// used.
pub fn validate_dependencies(lhs_nodes: &[LatticeNode], rhs_nodes: &[LatticeNode], t: &MatchTable) -> Vec<Ged> {
    let mut pool: Vec<bool> = vec![true; rhs_nodes.len()];
    let mut out = Vec::new();
    for x in lhs_nodes {
        for (j, y) in rhs_nodes.iter().enumerate() {
            if !pool[j] || y.level() != x.level() + 1 || !x.literals.iter().all(|l| y.literals.contains(l)) {
                continue;
            }
            if x.partition == y.partition {
                let rhs: Vec<Literal> = y.literals.iter().filter(|l| !x.literals.contains(l)).cloned().collect();
                out.push(make_ged(t, x.literals.clone(), rhs, y.partition.covered_rows()));
                pool[j] = false;
            }
        }
    }
    out
}

/// Result of a lattice search.
#[derive(Clone, Debug, Default)]
pub struct DependencyMining {
    pub rules: Vec<Ged>,
    /// `X -> w` candidates checked.
    pub candidates: usize,
    /// Lattice nodes materialized, over all levels.
    pub nodes: usize,
}

/// Left-minimal, non-trivial dependencies `X -> w` of the table, sorted by
/// `(lhs, rhs)`.
pub fn mine_dependencies(t: &MatchTable, cfg: &DepMinerConfig) -> Vec<Ged> {
    mine_dependencies_detailed(t, cfg).rules
}

struct Node {
    lits: Vec<u32>,
    part: Partition,
}

pub fn mine_dependencies_detailed(t: &MatchTable, cfg: &DepMinerConfig) -> DependencyMining {
    let rows = t.row_count();
    let mut result = DependencyMining::default();
    if rows == 0 || t.column_count() == 0 {
        return result;
    }
    let u = build_universe(t, cfg);
    let max_lhs = cfg.max_lhs_size.min(t.column_count().saturating_sub(1));
    let rhs_ok = |w: u32| cfg.mode != Mode::Gkey || u.literals[w as usize].is_id();

    // determined sets: literals implied by some subset of the node's literals
    let mut det_prev: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
    let empty = Partition::all(rows);
    let mut det_empty = Vec::new();
    let mut level: Vec<Node> = Vec::with_capacity(u.literals.len());
    for (i, p) in u.partitions.iter().enumerate() {
        result.candidates += 1;
        if empty.same_as_refinement(p) {
            det_empty.push(i as u32);
            if rhs_ok(i as u32) {
                result.rules.push(make_ged(t, Vec::new(), vec![u.literals[i].clone()], p.covered_rows()));
            }
        }
        level.push(Node {
            lits: vec![i as u32],
            part: p.clone(),
        });
    }
    det_prev.insert(Vec::new(), det_empty);
    result.nodes = level.len();

    for _ in 1..=max_lhs {
        if level.is_empty() {
            break;
        }
        // strict determined set of each current node: union over its subsets
        let det_strict: Vec<Vec<u32>> = level
            .par_iter()
            .map(|n| {
                let mut d: BTreeSet<u32> = BTreeSet::new();
                for skip in 0..n.lits.len() {
                    let sub: Vec<u32> = n
                        .lits
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &l)| l)
                        .collect();
                    if let Some(s) = det_prev.get(&sub) {
                        d.extend(s);
                    }
                }
                d.into_iter().collect()
            })
            .collect();
        let index: HashMap<&[u32], usize> = level.iter().enumerate().map(|(i, n)| (n.lits.as_slice(), i)).collect();

        let next = join_level(&level, &u);
        result.nodes += next.len();

        // (lhs node, rhs literal, valid, minimal) for every candidate
        let checks: Vec<Vec<(usize, u32, bool)>> = next
            .par_iter()
            .map(|y| {
                let mut out = Vec::with_capacity(y.lits.len());
                for skip in 0..y.lits.len() {
                    let x: Vec<u32> = y
                        .lits
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &l)| l)
                        .collect();
                    let xi = index[x.as_slice()];
                    out.push((xi, y.lits[skip], level[xi].part.same_as_refinement(&y.part)));
                }
                out
            })
            .collect();

        let mut det_now: Vec<Vec<u32>> = det_strict.clone();
        for (y, cands) in next.iter().zip(&checks) {
            for &(xi, w, valid) in cands {
                result.candidates += 1;
                if !valid {
                    continue;
                }
                let minimal = det_strict[xi].binary_search(&w).is_err();
                det_now[xi].push(w);
                if (minimal || !cfg.prune) && rhs_ok(w) {
                    let lhs: Vec<Literal> = level[xi].lits.iter().map(|&l| u.literals[l as usize].clone()).collect();
                    let rhs = u.literals[w as usize].clone();
                    if !is_trivial(&lhs, &rhs) {
                        result.rules.push(make_ged(t, lhs, vec![rhs], y.part.covered_rows()));
                    }
                }
            }
        }
        det_prev = level
            .into_iter()
            .zip(det_now)
            .map(|(n, mut d)| {
                d.sort_unstable();
                d.dedup();
                (n.lits, d)
            })
            .collect();
        level = next;
    }
    result
        .rules
        .sort_by(|a, b| a.lhs.cmp(&b.lhs).then_with(|| a.rhs.cmp(&b.rhs)));
    result
}

/// Prefix join of a sorted level.
fn join_level(level: &[Node], u: &Universe) -> Vec<Node> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=level.len() {
        let prefix_differs = |a: &Node, b: &Node| a.lits[..a.lits.len() - 1] != b.lits[..b.lits.len() - 1];
        if i == level.len() || prefix_differs(&level[i], &level[start]) {
            groups.push((start, i));
            start = i;
        }
    }
    let rows = level.first().map_or(0, |n| n.part.total_rows());
    let mut next: Vec<Node> = groups
        .par_iter()
        .map_init(
            || vec![u32::MAX; rows],
            |scratch, &(lo, hi)| {
                let mut out = Vec::new();
                for a in lo..hi {
                    let used: HashSet<usize> = level[a]
                        .lits
                        .iter()
                        .flat_map(|&l| u.columns[l as usize].iter().copied())
                        .collect();
                    for b in a + 1..hi {
                        let last = *level[b].lits.last().expect("non-empty node");
                        if u.columns[last as usize].iter().any(|c| used.contains(c)) {
                            continue;
                        }
                        let part = level[a].part.intersect_with(&level[b].part, scratch);
                        if part.is_empty() {
                            continue;
                        }
                        let mut lits = level[a].lits.clone();
                        lits.push(last);
                        out.push(Node { lits, part });
                    }
                }
                out
            },
        )
        .flatten()
        .collect();
    next.sort_by(|a, b| a.lits.cmp(&b.lits));
    next
}

/// Outcome of checking one rule against a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Satisfaction {
    pub holds: bool,
    /// Matches satisfying the left-hand side but not the right-hand side.
    pub violations: Vec<Match>,
}

/// Checks `phi` on every homomorphic match of its pattern in `g`.
pub fn check_satisfaction(phi: &Ged, g: &PropertyGraph) -> Satisfaction {
    check_satisfaction_with(
        phi,
        g,
        MatchOptions {
            injective: false,
            orbit_dedup: false,
        },
    )
}

/// As [`check_satisfaction`] with explicit matching semantics.
pub fn check_satisfaction_with(phi: &Ged, g: &PropertyGraph, opts: MatchOptions) -> Satisfaction {
    let q = &phi.pattern;
    let violations: Vec<Match> = find_matches(q, g, opts)
        .into_par_iter()
        .filter(|m| {
            phi.lhs.iter().all(|l| l.holds(q, g, &m.binding)) && !phi.rhs.iter().all(|l| l.holds(q, g, &m.binding))
        })
        .collect();
    Satisfaction {
        holds: violations.is_empty(),
        violations,
    }
}
