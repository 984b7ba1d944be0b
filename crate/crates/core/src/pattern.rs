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

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GedError, Result};
use crate::graph::{LabelTable, Topology};
use crate::search::{self, CompiledPattern, SearchOptions};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternEdge {
    pub src: usize,
    pub label: String,
    pub dst: usize,
}

/// A weakly connected, directed, labeled graph pattern `Q[u]`. Variables
/// are identified by name; node and edge labels may be the wildcard `*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternDoc", into = "PatternDoc")]
pub struct GraphPattern {
    variables: Vec<String>,
    labels: Vec<String>,
    edges: Vec<PatternEdge>,
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    nodes: Vec<PatternNodeDoc>,
    edges: Vec<PatternEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct PatternNodeDoc {
    var: String,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct PatternEdgeDoc {
    src: String,
    label: String,
    dst: String,
}

impl TryFrom<PatternDoc> for GraphPattern {
    type Error = GedError;

    fn try_from(doc: PatternDoc) -> Result<Self> {
        let nodes: Vec<(&str, &str)> = doc
            .nodes
            .iter()
            .map(|n| (n.var.as_str(), n.label.as_str()))
            .collect();
        let edges: Vec<(&str, &str, &str)> = doc
            .edges
            .iter()
            .map(|e| (e.src.as_str(), e.label.as_str(), e.dst.as_str()))
            .collect();
        GraphPattern::new(&nodes, &edges)
    }
}

impl From<GraphPattern> for PatternDoc {
    fn from(p: GraphPattern) -> Self {
        PatternDoc {
            nodes: p
                .variables
                .iter()
                .zip(&p.labels)
                .map(|(v, l)| PatternNodeDoc {
                    var: v.clone(),
                    label: l.clone(),
                })
                .collect(),
            edges: p
                .edges
                .iter()
                .map(|e| PatternEdgeDoc {
                    src: p.variables[e.src].clone(),
                    label: e.label.clone(),
                    dst: p.variables[e.dst].clone(),
                })
                .collect(),
        }
    }
}

/// Isomorphism-invariant key of a pattern. Two patterns have equal codes
/// iff they are isomorphic (with exact label equality).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    labels: Vec<String>,
    edges: Vec<(usize, String, usize)>,
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.join(","))?;
        for (s, l, d) in &self.edges {
            write!(f, ";{s}-{l}->{d}")?;
        }
        Ok(())
    }
}

impl GraphPattern {
    /// Builds a pattern from `(variable, label)` nodes and
    /// `(src variable, label, dst variable)` edges.
    pub fn new(nodes: &[(&str, &str)], edges: &[(&str, &str, &str)]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(GedError::InvalidPattern("pattern has no variables".into()));
        }
        let variables: Vec<String> = nodes.iter().map(|(v, _)| v.to_string()).collect();
        for (i, v) in variables.iter().enumerate() {
            if v.is_empty() || variables[..i].contains(v) {
                return Err(GedError::InvalidPattern(format!("bad or repeated variable `{v}`")));
            }
        }
        let labels = nodes.iter().map(|(_, l)| l.to_string()).collect();
        let lookup = |name: &str| {
            variables
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| GedError::InvalidPattern(format!("edge uses unknown variable `{name}`")))
        };
        let mut es = Vec::with_capacity(edges.len());
        for &(s, l, d) in edges {
            es.push(PatternEdge {
                src: lookup(s)?,
                label: l.to_string(),
                dst: lookup(d)?,
            });
        }
        let p = GraphPattern::from_parts(variables, labels, es);
        if !p.is_connected() {
            return Err(GedError::InvalidPattern("pattern is not weakly connected".into()));
        }
        Ok(p)
    }

    pub(crate) fn from_parts(variables: Vec<String>, labels: Vec<String>, mut edges: Vec<PatternEdge>) -> Self {
        edges.sort();
        edges.dedup();
        GraphPattern {
            variables,
            labels,
            edges,
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn node_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[PatternEdge] {
        &self.edges
    }

    pub fn size_nodes(&self) -> usize {
        self.variables.len()
    }

    pub fn size_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.variables.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                let other = if e.src == v {
                    e.dst
                } else if e.dst == v {
                    e.src
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub(crate) fn compile(&self, table: &LabelTable) -> CompiledPattern {
        CompiledPattern {
            labels: self.labels.iter().map(|l| table.resolve(l)).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.src, table.resolve(&e.label), e.dst))
                .collect(),
        }
    }

    /// The pattern as a target graph, with its own label table.
    pub(crate) fn as_target(&self) -> (LabelTable, Topology) {
        let mut table = LabelTable::default();
        let labels = self.labels.iter().map(|l| table.intern(l)).collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.src as u32, table.intern(&e.label), e.dst as u32))
            .collect();
        (table, Topology::new(labels, edges))
    }

    /// Variable ordering key that is invariant under isomorphism.
    fn invariant(&self, v: usize) -> (String, usize, usize, Vec<(bool, String, String)>) {
        let mut around = Vec::new();
        let (mut outd, mut ind) = (0, 0);
        for e in &self.edges {
            if e.src == v {
                outd += 1;
                around.push((true, e.label.clone(), self.labels[e.dst].clone()));
            }
            if e.dst == v {
                ind += 1;
                around.push((false, e.label.clone(), self.labels[e.src].clone()));
            }
        }
        around.sort();
        (self.labels[v].clone(), outd, ind, around)
    }

    /// Canonical variable order and the resulting code. The order lists
    /// variables by canonical position.
    fn canonical(&self) -> (Vec<usize>, CanonicalCode) {
        let n = self.variables.len();
        let keys: Vec<_> = (0..n).map(|v| self.invariant(v)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        // groups of positions with equal invariants are permuted exhaustively
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || keys[order[i]] != keys[order[start]] {
                groups.push((start, i));
                start = i;
            }
        }
        let labels: Vec<String> = order.iter().map(|&v| self.labels[v].clone()).collect();
        let mut best: Option<(Vec<(usize, String, usize)>, Vec<usize>)> = None;
        let mut current = order.clone();
        self.permute_groups(&groups, 0, &mut current, &mut best);
        let (edges, order) = best.expect("at least one ordering");
        (order, CanonicalCode { labels, edges })
    }

    fn permute_groups(
        &self,
        groups: &[(usize, usize)],
        g: usize,
        current: &mut Vec<usize>,
        best: &mut Option<(Vec<(usize, String, usize)>, Vec<usize>)>,
    ) {
        if g == groups.len() {
            let mut pos = vec![0; current.len()];
            for (i, &v) in current.iter().enumerate() {
                pos[v] = i;
            }
            let mut edges: Vec<(usize, String, usize)> = self
                .edges
                .iter()
                .map(|e| (pos[e.src], e.label.clone(), pos[e.dst]))
                .collect();
            edges.sort();
            if best.as_ref().is_none_or(|(b, _)| edges < *b) {
                *best = Some((edges, current.clone()));
            }
            return;
        }
        let (lo, hi) = groups[g];
        heap_permutations(current, lo, hi, &mut |cur| self.permute_groups(groups, g + 1, cur, best));
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        self.canonical().1
    }

    /// An isomorphic copy with variables renamed `v0, v1, ...` in canonical
    /// order. Isomorphic patterns yield identical results.
    pub fn canonical_form(&self) -> GraphPattern {
        let (_, code) = self.canonical();
        GraphPattern::from_parts(
            (0..code.labels.len()).map(|i| format!("v{i}")).collect(),
            code.labels.clone(),
            code.edges
                .iter()
                .map(|(s, l, d)| PatternEdge {
                    src: *s,
                    label: l.clone(),
                    dst: *d,
                })
                .collect(),
        )
    }

    /// Label-exact automorphisms, each as a permutation `sigma` with
    /// `sigma[v]` the image of variable `v`. Includes the identity.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let (table, topo) = self.as_target();
        let q = self.compile(&table);
        let opts = SearchOptions {
            injective: true,
            induced: false,
            exact_labels: true,
        };
        search::all_embeddings(&q, &topo, opts)
            .into_iter()
            .map(|m| m.into_iter().map(|x| x as usize).collect())
            .collect()
    }

    /// Distinct edge labels in the pattern.
    pub fn edge_label_set(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.label.as_str()).collect()
    }

    /// The pattern with one extra edge (and possibly one extra variable).
    pub(crate) fn with_edge(&self, src: usize, label: &str, dst: usize, new_label: Option<&str>) -> GraphPattern {
        let mut variables = self.variables.clone();
        let mut labels = self.labels.clone();
        if let Some(l) = new_label {
            variables.push(format!("v{}", variables.len()));
            labels.push(l.to_string());
        }
        let mut edges = self.edges.clone();
        edges.push(PatternEdge {
            src,
            label: label.to_string(),
            dst,
        });
        GraphPattern::from_parts(variables, labels, edges)
    }

    /// The pattern without edge `i`; a variable left isolated is dropped.
    /// `None` if the result would be disconnected or empty.
    pub(crate) fn without_edge(&self, i: usize) -> Option<GraphPattern> {
        let mut edges = self.edges.clone();
        edges.remove(i);
        let n = self.variables.len();
        let mut touched = vec![false; n];
        for e in &edges {
            touched[e.src] = true;
            touched[e.dst] = true;
        }
        if edges.is_empty() {
            return None;
        }
        let keep: Vec<usize> = (0..n).filter(|&v| touched[v]).collect();
        let mut remap = vec![usize::MAX; n];
        for (i, &v) in keep.iter().enumerate() {
            remap[v] = i;
        }
        let p = GraphPattern::from_parts(
            keep.iter().map(|&v| self.variables[v].clone()).collect(),
            keep.iter().map(|&v| self.labels[v].clone()).collect(),
            edges
                .into_iter()
                .map(|e| PatternEdge {
                    src: remap[e.src],
                    label: e.label,
                    dst: remap[e.dst],
                })
                .collect(),
        );
        p.is_connected().then_some(p)
    }
}

/// Calls `f` with every permutation of `v[lo..hi]` (Heap's algorithm).
fn heap_permutations(v: &mut Vec<usize>, lo: usize, hi: usize, f: &mut dyn FnMut(&mut Vec<usize>)) {
    let k = hi - lo;
    let mut c = vec![0usize; k];
    f(v);
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(lo, lo + i);
            } else {
                v.swap(lo + c[i], lo + i);
            }
            f(v);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

impl fmt::Display for GraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let node = |v: usize| format!("{}:{}", self.variables[v], self.labels[v]);
        if self.edges.is_empty() {
            return write!(f, "({})", node(0));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({})-[{}]->({})", node(e.src), e.label, node(e.dst))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> GraphPattern {
        GraphPattern::new(
            &[("x", "company"), ("y", "product"), ("y2", "product")],
            &[("x", "create", "y"), ("x", "create", "y2")],
        )
        .unwrap()
    }

    #[test]
    fn rejects_disconnected_and_unknown() {
        assert!(GraphPattern::new(&[("a", "t"), ("b", "t")], &[]).is_err());
        assert!(GraphPattern::new(&[("a", "t")], &[("a", "e", "z")]).is_err());
        assert!(GraphPattern::new(&[("a", "t"), ("a", "t")], &[]).is_err());
        assert!(GraphPattern::new(&[], &[]).is_err());
        assert!(GraphPattern::new(&[("a", "*")], &[]).is_ok());
    }

    #[test]
    fn canonical_code_ignores_variable_order() {
        let a = q3();
        let b = GraphPattern::new(
            &[("p", "product"), ("c", "company"), ("q", "product")],
            &[("c", "create", "q"), ("c", "create", "p")],
        )
        .unwrap();
        assert_eq!(a.canonical_code(), b.canonical_code());
        assert_eq!(a.canonical_form(), b.canonical_form());
        let c = GraphPattern::new(
            &[("x", "company"), ("y", "product"), ("y2", "product")],
            &[("x", "create", "y"), ("y2", "create", "x")],
        )
        .unwrap();
        assert_ne!(a.canonical_code(), c.canonical_code());
    }

    #[test]
    fn q3_has_swap_automorphism() {
        let mut auts = q3().automorphisms();
        auts.sort();
        assert_eq!(auts, vec![vec![0, 1, 2], vec![0, 2, 1]]);
    }

    #[test]
    fn without_edge_drops_isolated_variable() {
        let p = q3();
        let smaller = p.without_edge(1).unwrap();
        assert_eq!(smaller.size_nodes(), 2);
        assert_eq!(smaller.size_edges(), 1);
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&q3()).unwrap();
        assert!(s.starts_with(r#"{"nodes":[{"var":"x","label":"company"}"#), "{s}");
        let back: GraphPattern = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q3());
        assert!(serde_json::from_str::<GraphPattern>(r#"{"nodes":[],"edges":[]}"#).is_err());
    }
}
