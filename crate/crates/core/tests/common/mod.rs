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

//! Random instances and brute-force oracles shared by the integration and
//! acceptance tests. The oracles only use the public data model and never
//! call into the code under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gedmine_core::matcher::Column;
use gedmine_core::{labels_match, load_graph_files, GraphPattern, Literal, MatchTable, NodeRecord, PropertyGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/running_example")
}

pub fn fixture_graph() -> PropertyGraph {
    let d = fixture_dir();
    load_graph_files(&d.join("nodes.csv"), &d.join("edges.csv")).expect("fixture loads")
}

/// The fixture with `creator` attributes on products, one of them
/// inconsistent with its company's name.
pub fn fixture_creator_graph() -> PropertyGraph {
    let d = fixture_dir();
    load_graph_files(&d.join("nodes_creator.csv"), &d.join("edges.csv")).expect("fixture loads")
}

pub const NODE_LABELS: [&str; 3] = ["A", "B", "C"];
pub const EDGE_LABELS: [&str; 2] = ["p", "q"];

/// A random graph with up to `max_nodes` nodes over `labels` node labels,
/// two edge labels and attributes `a`, `b` from a domain of three values,
/// each missing with some probability.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize, labels: usize) -> PropertyGraph {
    let n = rng.gen_range(1..=max_nodes);
    let density = rng.gen_range(0.05..0.4);
    let nodes = (0..n)
        .map(|v| {
            let mut attributes = Vec::new();
            for a in ["a", "b"] {
                if rng.gen_bool(0.85) {
                    attributes.push((a.to_string(), format!("{}", rng.gen_range(0..3))));
                }
            }
            NodeRecord {
                id: format!("n{v}"),
                label: NODE_LABELS[rng.gen_range(0..labels)].to_string(),
                attributes,
            }
        })
        .collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for d in 0..n {
            if s != d && rng.gen_bool(density) {
                let l = EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())];
                edges.push((format!("n{s}"), l.to_string(), format!("n{d}")));
            }
        }
    }
    PropertyGraph::from_records(nodes, edges).expect("generated graph is consistent")
}

/// A random weakly connected pattern with up to `max_vars` variables.
/// Labels are occasionally the wildcard.
pub fn random_pattern<R: Rng>(rng: &mut R, max_vars: usize, labels: usize) -> GraphPattern {
    let k = rng.gen_range(1..=max_vars);
    let vars: Vec<String> = (0..k).map(|i| format!("v{i}")).collect();
    let node_label = |rng: &mut R| {
        if rng.gen_bool(0.15) {
            "*".to_string()
        } else {
            NODE_LABELS[rng.gen_range(0..labels)].to_string()
        }
    };
    let edge_label = |rng: &mut R| {
        if rng.gen_bool(0.15) {
            "*".to_string()
        } else {
            EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())].to_string()
        }
    };
    let nodes: Vec<(String, String)> = vars.iter().map(|v| (v.clone(), node_label(rng))).collect();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    for i in 1..k {
        let j = rng.gen_range(0..i);
        let l = edge_label(rng);
        if rng.gen_bool(0.5) {
            edges.push((vars[i].clone(), l, vars[j].clone()));
        } else {
            edges.push((vars[j].clone(), l, vars[i].clone()));
        }
    }
    if k > 1 && rng.gen_bool(0.3) {
        let a = rng.gen_range(0..k);
        let b = rng.gen_range(0..k);
        if a != b {
            edges.push((vars[a].clone(), edge_label(rng), vars[b].clone()));
        }
    }
    let n: Vec<(&str, &str)> = nodes.iter().map(|(v, l)| (v.as_str(), l.as_str())).collect();
    let e: Vec<(&str, &str, &str)> = edges.iter().map(|(s, l, d)| (s.as_str(), l.as_str(), d.as_str())).collect();
    GraphPattern::new(&n, &e).expect("generated pattern is valid")
}

fn node_label_ok(q: &GraphPattern, g: &PropertyGraph, v: usize, n: u32) -> bool {
    labels_match(&q.node_labels()[v], g.node_label(n))
}

fn edges_ok(q: &GraphPattern, g: &PropertyGraph, b: &[u32]) -> bool {
    q.edges().iter().all(|e| {
        g.edges()
            .any(|(s, l, d)| s == b[e.src] && d == b[e.dst] && labels_match(&e.label, l))
    })
}

/// Every map from variables to nodes, filtered by the homomorphism
/// conditions (and injectivity when asked).
pub fn brute_force_matches(q: &GraphPattern, g: &PropertyGraph, injective: bool) -> BTreeSet<Vec<u32>> {
    let k = q.size_nodes();
    let n = g.node_count() as u32;
    let mut out = BTreeSet::new();
    if n == 0 {
        return out;
    }
    let mut b = vec![0u32; k];
    loop {
        let labels = (0..k).all(|v| node_label_ok(q, g, v, b[v]));
        let distinct = !injective || b.iter().collect::<BTreeSet<_>>().len() == k;
        if labels && distinct && edges_ok(q, g, &b) {
            out.insert(b.clone());
        }
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            b[i] += 1;
            if b[i] < n {
                break;
            }
            b[i] = 0;
            i += 1;
        }
    }
}

/// Variable permutations that preserve labels and the edge set.
pub fn brute_force_automorphisms(q: &GraphPattern) -> Vec<Vec<usize>> {
    let k = q.size_nodes();
    let edges: BTreeSet<(usize, &str, usize)> = q.edges().iter().map(|e| (e.src, e.label.as_str(), e.dst)).collect();
    let mut out = Vec::new();
    for p in permutations(k) {
        let labels = (0..k).all(|v| q.node_labels()[v] == q.node_labels()[p[v]]);
        let mapped: BTreeSet<(usize, &str, usize)> = edges.iter().map(|&(s, l, d)| (p[s], l, p[d])).collect();
        if labels && mapped == edges {
            out.push(p);
        }
    }
    out
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in 0..k {
            if !prefix.contains(&i) {
                prefix.push(i);
                go(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), k, &mut out);
    out
}

/// Keeps the lexicographically smallest binding of each automorphism orbit.
pub fn orbit_representatives(q: &GraphPattern, all: &BTreeSet<Vec<u32>>) -> BTreeSet<Vec<u32>> {
    let autos = brute_force_automorphisms(q);
    all.iter()
        .filter(|b| {
            autos.iter().all(|p| {
                let image: Vec<u32> = (0..b.len()).map(|v| b[p[v]]).collect();
                image >= **b
            })
        })
        .cloned()
        .collect()
}

/// Matches as external id tuples, for comparing across graphs.
pub fn id_tuples(g: &PropertyGraph, bindings: impl IntoIterator<Item = Vec<u32>>) -> BTreeSet<Vec<String>> {
    bindings
        .into_iter()
        .map(|b| b.iter().map(|&v| g.node_id(v).to_string()).collect())
        .collect()
}

/// MNI over all injective embeddings, enumerated exhaustively.
pub fn brute_force_mni(q: &GraphPattern, g: &PropertyGraph) -> usize {
    let maps = brute_force_matches(q, g, true);
    if maps.is_empty() {
        return 0;
    }
    (0..q.size_nodes())
        .map(|v| maps.iter().map(|m| m[v]).collect::<BTreeSet<_>>().len())
        .min()
        .unwrap_or(0)
}

/// Adds one edge between existing variables, or to a fresh variable.
pub fn extend_by_edge<R: Rng>(rng: &mut R, q: &GraphPattern, labels: usize) -> GraphPattern {
    let vars = q.variables();
    let mut nodes: Vec<(String, String)> = vars.iter().cloned().zip(q.node_labels().iter().cloned()).collect();
    let mut edges: Vec<(String, String, String)> = q
        .edges()
        .iter()
        .map(|e| (vars[e.src].clone(), e.label.clone(), vars[e.dst].clone()))
        .collect();
    let l = EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())].to_string();
    let a = vars[rng.gen_range(0..vars.len())].clone();
    let b = if vars.len() > 1 && rng.gen_bool(0.5) {
        let others: Vec<&String> = vars.iter().filter(|v| **v != a).collect();
        (*others.choose(rng).unwrap()).clone()
    } else {
        let fresh = format!("v{}", vars.len());
        nodes.push((fresh.clone(), NODE_LABELS[rng.gen_range(0..labels)].to_string()));
        fresh
    };
    if rng.gen_bool(0.5) {
        edges.push((a, l, b));
    } else {
        edges.push((b, l, a));
    }
    let n: Vec<(&str, &str)> = nodes.iter().map(|(v, l)| (v.as_str(), l.as_str())).collect();
    let e: Vec<(&str, &str, &str)> = edges.iter().map(|(s, l, d)| (s.as_str(), l.as_str(), d.as_str())).collect();
    GraphPattern::new(&n, &e).expect("extension is valid")
}

/// A random match table: two or three variables, up to `max_cols`
/// columns drawn from `id`, `a`, `b`, `c` per variable, values from a
/// small domain with occasional gaps.
pub fn random_table<R: Rng>(rng: &mut R, max_cols: usize, max_rows: usize) -> MatchTable {
    let k = rng.gen_range(2..=3);
    let vars: Vec<String> = (0..k).map(|i| format!("v{i}")).collect();
    let nodes: Vec<(&str, &str)> = vars.iter().map(|v| (v.as_str(), "t")).collect();
    let edges: Vec<(&str, &str, &str)> = (1..k).map(|i| (vars[0].as_str(), "e", vars[i].as_str())).collect();
    let q = GraphPattern::new(&nodes, &edges).expect("star pattern");
    let mut all: Vec<Column> = Vec::new();
    for v in 0..k {
        for a in ["id", "a", "b", "c"] {
            all.push(Column {
                var: v,
                attr: a.to_string(),
            });
        }
    }
    all.shuffle(rng);
    let ncols = rng.gen_range(1..=max_cols);
    let mut columns: Vec<Column> = all.into_iter().take(ncols).collect();
    columns.sort_by(|a, b| (a.var, &a.attr).cmp(&(b.var, &b.attr)));
    let rows = rng.gen_range(1..=max_rows);
    let domain = rng.gen_range(1..=4);
    let id_domain = rng.gen_range(1..=rows.min(6));
    let cells = columns
        .iter()
        .map(|c| {
            (0..rows)
                .map(|_| {
                    if c.attr == "id" {
                        Some(format!("n{}", rng.gen_range(0..id_domain)))
                    } else if rng.gen_bool(0.1) {
                        None
                    } else {
                        Some(format!("{}", rng.gen_range(0..domain)))
                    }
                })
                .collect()
        })
        .collect();
    MatchTable::from_columns(q, columns, cells).expect("generated table is consistent")
}

/// Row-scan view of a table: cell strings by (variable, attribute).
pub struct RowScan {
    pub vars: Vec<String>,
    pub columns: Vec<(String, String)>,
    pub cells: BTreeMap<(String, String), Vec<Option<String>>>,
    pub rows: usize,
}

impl RowScan {
    pub fn new(t: &MatchTable) -> Self {
        let vars = t.pattern().variables().to_vec();
        let mut cells = BTreeMap::new();
        let mut columns = Vec::new();
        for (ci, c) in t.columns().iter().enumerate() {
            let key = (vars[c.var].clone(), c.attr.clone());
            columns.push(key.clone());
            cells.insert(key, (0..t.row_count()).map(|r| t.cell(ci, r).map(str::to_string)).collect());
        }
        RowScan {
            vars,
            columns,
            cells,
            rows: t.row_count(),
        }
    }

    fn cell(&self, var: &str, attr: &str, row: usize) -> Option<&str> {
        self.cells.get(&(var.to_string(), attr.to_string()))?[row].as_deref()
    }

    /// The value a literal equates on a row, if the row satisfies it.
    pub fn value(&self, l: &Literal, row: usize) -> Option<String> {
        match l {
            Literal::Constant { var, attr, value } => {
                (self.cell(var, attr, row)? == value).then(|| value.clone())
            }
            Literal::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => {
                let a = self.cell(var, attr, row)?;
                (a == self.cell(other_var, other_attr, row)?).then(|| a.to_string())
            }
            Literal::Id { var, other_var } => {
                let a = self.cell(var, "id", row)?;
                (a == self.cell(other_var, "id", row)?).then(|| a.to_string())
            }
        }
    }

    /// Rows satisfying every literal of `x`, keyed by the tuple of values
    /// the literals equate.
    pub fn blocks(&self, x: &[Literal]) -> BTreeMap<Vec<String>, Vec<usize>> {
        let mut out: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
        'rows: for r in 0..self.rows {
            let mut key = Vec::new();
            for l in x {
                match self.value(l, r) {
                    Some(v) => key.push(v),
                    None => continue 'rows,
                }
            }
            out.entry(key).or_default().push(r);
        }
        out
    }

    /// `x -> w` holds when some row satisfies `x` and every block of `x`
    /// sits inside one value class of `w`.
    pub fn holds(&self, x: &[Literal], w: &Literal) -> bool {
        let blocks = self.blocks(x);
        !blocks.is_empty()
            && blocks.values().all(|rows| {
                let first = self.value(w, rows[0]);
                first.is_some() && rows.iter().all(|&r| self.value(w, r) == first)
            })
    }

    /// Candidate literals: the `top_k` most frequent values of every
    /// non-id column (ties by value), equalities between non-id columns of
    /// distinct variables and, unless `with_ids` is false, between id
    /// columns of distinct variables. Literals no row satisfies are left
    /// out.
    pub fn universe(&self, top_k: usize, with_ids: bool) -> Vec<Literal> {
        let mut out = Vec::new();
        for (var, attr) in &self.columns {
            if attr == "id" {
                continue;
            }
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for c in self.cells[&(var.clone(), attr.clone())].iter().flatten() {
                *counts.entry(c).or_default() += 1;
            }
            let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            for (v, _) in ranked.into_iter().take(top_k) {
                out.push(Literal::constant(var, attr, v).unwrap());
            }
        }
        for (i, (va, aa)) in self.columns.iter().enumerate() {
            for (vb, ab) in &self.columns[i + 1..] {
                if va == vb {
                    continue;
                }
                let l = match (aa == "id", ab == "id") {
                    (true, true) if with_ids => Literal::id(va, vb).unwrap(),
                    (false, false) => Literal::variable(va, aa, vb, ab).unwrap(),
                    _ => continue,
                };
                out.push(l);
            }
        }
        out.sort();
        out.dedup();
        out.retain(|l| (0..self.rows).any(|r| self.value(l, r).is_some()));
        out
    }
}

/// The (variable, attribute) slots a literal constrains.
pub fn slots(l: &Literal) -> Vec<(String, String)> {
    match l {
        Literal::Constant { var, attr, .. } => vec![(var.clone(), attr.clone())],
        Literal::Variable {
            var,
            attr,
            other_var,
            other_attr,
        } => vec![(var.clone(), attr.clone()), (other_var.clone(), other_attr.clone())],
        Literal::Id { var, other_var } => vec![(var.clone(), "id".to_string()), (other_var.clone(), "id".to_string())],
    }
}

fn disjoint(ls: &[&Literal]) -> bool {
    let mut seen = BTreeSet::new();
    ls.iter().flat_map(|l| slots(l)).all(|s| seen.insert(s))
}

/// Whether equality reasoning over `x` alone already yields `w`.
pub fn trivially_follows(x: &[Literal], w: &Literal) -> bool {
    if x.contains(w) {
        return true;
    }
    // union-find over slots and constants
    let mut parent: BTreeMap<String, String> = BTreeMap::new();
    fn find(p: &mut BTreeMap<String, String>, a: &str) -> String {
        let next = p.get(a).cloned().unwrap_or_else(|| a.to_string());
        if next == a {
            return next;
        }
        let root = find(p, &next);
        p.insert(a.to_string(), root.clone());
        root
    }
    let key = |l: &Literal| -> (String, String) {
        match l {
            Literal::Constant { var, attr, value } => (format!("{var}.{attr}"), format!("={value}")),
            Literal::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => (format!("{var}.{attr}"), format!("{other_var}.{other_attr}")),
            Literal::Id { var, other_var } => (format!("{var}.id"), format!("{other_var}.id")),
        }
    };
    for l in x {
        let (a, b) = key(l);
        let ra = find(&mut parent, &a);
        let rb = find(&mut parent, &b);
        parent.insert(ra, rb);
    }
    let (a, b) = key(w);
    find(&mut parent, &a) == find(&mut parent, &b)
}

/// Every valid, non-trivial, left-minimal `X -> w` with `X` and `X + w`
/// column-disjoint and `|X| <= max_lhs`, by exhaustive enumeration.
pub fn oracle_rules(t: &MatchTable, top_k: usize, max_lhs: usize, with_ids: bool) -> Vec<(Vec<Literal>, Literal)> {
    let scan = RowScan::new(t);
    let universe = scan.universe(top_k, with_ids);
    let max_lhs = max_lhs.min(scan.columns.len().saturating_sub(1));
    let mut subsets: Vec<Vec<&Literal>> = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_lhs {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&i| i + 1);
            for i in start..universe.len() {
                let mut n = s.clone();
                n.push(i);
                let ls: Vec<&Literal> = n.iter().map(|&j| &universe[j]).collect();
                if disjoint(&ls) {
                    subsets.push(ls);
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    let valid = |x: &[&Literal], w: &Literal| {
        let owned: Vec<Literal> = x.iter().map(|l| (*l).clone()).collect();
        scan.holds(&owned, w)
    };
    let mut out = Vec::new();
    for x in &subsets {
        for w in &universe {
            let mut all = x.clone();
            all.push(w);
            if x.contains(&w) || !disjoint(&all) {
                continue;
            }
            let owned: Vec<Literal> = x.iter().map(|l| (*l).clone()).collect();
            if trivially_follows(&owned, w) || !valid(x, w) {
                continue;
            }
            let minimal = (0..x.len()).all(|drop| {
                let sub: Vec<&Literal> = x.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, l)| *l).collect();
                !valid(&sub, w)
            });
            if minimal {
                out.push((owned, w.clone()));
            }
        }
    }
    out
}

/// Closure of `x` under single-right-hand-side rules.
pub fn closure(x: &[Literal], rules: &[(Vec<Literal>, Literal)]) -> BTreeSet<Literal> {
    let mut c: BTreeSet<Literal> = x.iter().cloned().collect();
    loop {
        let before = c.len();
        for (lhs, w) in rules {
            if lhs.iter().all(|l| c.contains(l)) {
                c.insert(w.clone());
            }
        }
        if c.len() == before {
            return c;
        }
    }
}

/// `l` with variables renamed through `rename`.
pub fn rename_literal(l: &Literal, rename: &dyn Fn(&str) -> String) -> Literal {
    match l {
        Literal::Constant { var, attr, value } => Literal::constant(&rename(var), attr, value).unwrap(),
        Literal::Variable {
            var,
            attr,
            other_var,
            other_attr,
        } => Literal::variable(&rename(var), attr, &rename(other_var), other_attr).unwrap(),
        Literal::Id { var, other_var } => Literal::id(&rename(var), &rename(other_var)).unwrap(),
    }
}

/// Whether `rule` is `expected_lhs -> expected_rhs` over `q`, up to a
/// renaming of variables that maps `q` onto the rule's pattern. The rule
/// may carry more right-hand-side literals.
pub fn is_rule_up_to_renaming(
    rule: &gedmine_core::Ged,
    q: &GraphPattern,
    expected_lhs: &[Literal],
    expected_rhs: &[Literal],
) -> bool {
    let p = &rule.pattern;
    if p.size_nodes() != q.size_nodes() || p.size_edges() != q.size_edges() {
        return false;
    }
    let q_edges: BTreeSet<(usize, &str, usize)> = q.edges().iter().map(|e| (e.src, e.label.as_str(), e.dst)).collect();
    let p_edges: BTreeSet<(usize, &str, usize)> = p.edges().iter().map(|e| (e.src, e.label.as_str(), e.dst)).collect();
    permutations(q.size_nodes()).into_iter().any(|sigma| {
        let labels = (0..sigma.len()).all(|v| q.node_labels()[v] == p.node_labels()[sigma[v]]);
        let edges: BTreeSet<(usize, &str, usize)> = q_edges.iter().map(|&(s, l, d)| (sigma[s], l, sigma[d])).collect();
        if !labels || edges != p_edges {
            return false;
        }
        let rename = |v: &str| p.variables()[sigma[q.var_index(v).unwrap()]].clone();
        let lhs: BTreeSet<Literal> = expected_lhs.iter().map(|l| rename_literal(l, &rename)).collect();
        let got: BTreeSet<Literal> = rule.lhs.iter().cloned().collect();
        lhs == got
            && expected_rhs
                .iter()
                .all(|l| rule.rhs.contains(&rename_literal(l, &rename)))
    })
}
