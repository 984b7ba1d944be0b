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

//! Property graph model: labeled nodes with attribute lists and labeled
//! directed edges, plus the loaders for the two-file tabular format.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{GedError, Result};
use crate::pattern::GraphPattern;

/// The wildcard label. Matches every other label.
pub const WILDCARD: &str = "*";

/// Reserved attribute name for node identity.
pub const ID_ATTRIBUTE: &str = "id";

/// Two labels match when they are equal or either one is the wildcard.
pub fn labels_match(l: &str, l_prime: &str) -> bool {
    l == l_prime || l == WILDCARD || l_prime == WILDCARD
}

/// Interned label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub(crate) u32);

impl Sym {
    pub const WILD: Sym = Sym(0);
    /// A label that does not occur in the table it was resolved against.
    pub(crate) const UNKNOWN: Sym = Sym(u32::MAX);

    #[inline]
    pub(crate) fn matches(self, other: Sym) -> bool {
        self == other || self == Sym::WILD || other == Sym::WILD
    }
}

#[derive(Clone, Debug)]
pub struct LabelTable {
    names: Vec<String>,
    index: HashMap<String, Sym>,
}

impl Default for LabelTable {
    fn default() -> Self {
        let mut index = HashMap::new();
        index.insert(WILDCARD.to_string(), Sym::WILD);
        LabelTable {
            names: vec![WILDCARD.to_string()],
            index,
        }
    }
}

impl LabelTable {
    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = Sym(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), s);
        s
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.index.get(name).copied()
    }

    /// Like [`get`](Self::get) but maps absent labels to a symbol that only
    /// matches wildcards.
    pub(crate) fn resolve(&self, name: &str) -> Sym {
        self.get(name).unwrap_or(Sym::UNKNOWN)
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.0 as usize]
    }
}

/// Label-only view of a directed multigraph. Adjacency lists hold
/// `(neighbour, label)` pairs, sorted and free of duplicates.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    node_labels: Vec<Sym>,
    out: Vec<Vec<(u32, Sym)>>,
    inc: Vec<Vec<(u32, Sym)>>,
    by_label: HashMap<Sym, Vec<u32>>,
    edge_count: usize,
}

impl Topology {
    pub(crate) fn new(node_labels: Vec<Sym>, edges: impl IntoIterator<Item = (u32, Sym, u32)>) -> Self {
        let n = node_labels.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (s, l, d) in edges {
            out[s as usize].push((d, l));
            inc[d as usize].push((s, l));
        }
        let mut edge_count = 0;
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        for list in &out {
            edge_count += list.len();
        }
        let mut by_label: HashMap<Sym, Vec<u32>> = HashMap::new();
        for (v, &l) in node_labels.iter().enumerate() {
            by_label.entry(l).or_default().push(v as u32);
        }
        Topology {
            node_labels,
            out,
            inc,
            by_label,
            edge_count,
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub(crate) fn label(&self, v: u32) -> Sym {
        self.node_labels[v as usize]
    }

    #[inline]
    pub(crate) fn out(&self, v: u32) -> &[(u32, Sym)] {
        &self.out[v as usize]
    }

    #[inline]
    pub(crate) fn inc(&self, v: u32) -> &[(u32, Sym)] {
        &self.inc[v as usize]
    }

    pub(crate) fn edges(&self) -> impl Iterator<Item = (u32, Sym, u32)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, list)| list.iter().map(move |&(d, l)| (s as u32, l, d)))
    }

    /// Labels of the edges `src -> dst`.
    #[inline]
    pub(crate) fn edge_labels(&self, src: u32, dst: u32) -> &[(u32, Sym)] {
        let list = self.out(src);
        let lo = list.partition_point(|&(n, _)| n < dst);
        let hi = lo + list[lo..].partition_point(|&(n, _)| n == dst);
        &list[lo..hi]
    }

    pub(crate) fn has_edge(&self, src: u32, label: Sym, dst: u32) -> bool {
        self.edge_labels(src, dst)
            .iter()
            .any(|&(_, l)| label.matches(l))
    }

    /// Number of nodes whose label matches `label`.
    pub(crate) fn label_frequency(&self, label: Sym) -> usize {
        if label == Sym::WILD {
            return self.node_count();
        }
        let exact = self.by_label.get(&label).map_or(0, Vec::len);
        let wild = self.by_label.get(&Sym::WILD).map_or(0, Vec::len);
        exact + wild
    }

    /// Sorted list of nodes whose label matches `label`.
    pub(crate) fn nodes_matching(&self, label: Sym) -> Vec<u32> {
        if label == Sym::WILD {
            return (0..self.node_count() as u32).collect();
        }
        let mut v: Vec<u32> = self.by_label.get(&label).cloned().unwrap_or_default();
        if label != Sym::WILD {
            if let Some(w) = self.by_label.get(&Sym::WILD) {
                v.extend_from_slice(w);
                v.sort_unstable();
            }
        }
        v
    }

    /// Subgraph induced by `nodes` (given in the caller's order). Node `i`
    /// of the result corresponds to `nodes[i]`.
    pub(crate) fn induced(&self, nodes: &[u32]) -> Topology {
        let mut local = HashMap::with_capacity(nodes.len());
        for (i, &v) in nodes.iter().enumerate() {
            local.insert(v, i as u32);
        }
        let labels = nodes.iter().map(|&v| self.label(v)).collect();
        let mut edges = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            for &(d, l) in self.out(v) {
                if let Some(&j) = local.get(&d) {
                    edges.push((i as u32, l, j));
                }
            }
        }
        Topology::new(labels, edges)
    }
}

/// One node as it appears in the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    pub label: String,
    pub attributes: Vec<(String, String)>,
}

/// Immutable directed property graph. Nodes are addressed by a dense index
/// assigned in load order; the external id is kept alongside.
#[derive(Clone, Debug)]
pub struct PropertyGraph {
    labels: LabelTable,
    ids: Vec<String>,
    id_index: HashMap<String, u32>,
    attributes: Vec<Vec<(String, String)>>,
    topo: Topology,
}

impl PropertyGraph {
    /// Builds a graph from already parsed records. Line numbers in errors
    /// are 1-based positions within the respective input slice.
    pub fn from_records(
        nodes: Vec<NodeRecord>,
        edges: Vec<(String, String, String)>,
    ) -> Result<Self> {
        let mut b = GraphBuilder::default();
        for (i, n) in nodes.into_iter().enumerate() {
            b.add_node(n, i as u64 + 1)?;
        }
        for (i, (s, l, d)) in edges.into_iter().enumerate() {
            b.add_edge(&s, &l, &d, i as u64 + 1)?;
        }
        Ok(b.finish())
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.topo.edge_count()
    }

    pub fn node_id(&self, v: u32) -> &str {
        &self.ids[v as usize]
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.id_index.get(id).copied()
    }

    pub fn node_label(&self, v: u32) -> &str {
        self.labels.name(self.topo.label(v))
    }

    pub fn attributes(&self, v: u32) -> &[(String, String)] {
        &self.attributes[v as usize]
    }

    pub fn attribute(&self, v: u32, name: &str) -> Option<&str> {
        self.attributes[v as usize]
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, val)| val.as_str())
    }

    pub fn node(&self, v: u32) -> NodeRecord {
        NodeRecord {
            id: self.node_id(v).to_string(),
            label: self.node_label(v).to_string(),
            attributes: self.attributes(v).to_vec(),
        }
    }

    /// All edges as `(source index, label, target index)`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, &str, u32)> + '_ {
        self.topo.edges().map(|(s, l, d)| (s, self.labels.name(l), d))
    }

    /// Edge triples by external id, sorted.
    pub fn edge_triples(&self) -> Vec<(String, String, String)> {
        let mut v: Vec<_> = self
            .edges()
            .map(|(s, l, d)| {
                (
                    self.node_id(s).to_string(),
                    l.to_string(),
                    self.node_id(d).to_string(),
                )
            })
            .collect();
        v.sort();
        v
    }

    pub fn nodes_with_label(&self, label: &str) -> Vec<u32> {
        self.topo.nodes_matching(self.labels.resolve(label))
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn label_table(&self) -> &LabelTable {
        &self.labels
    }

    /// Subgraph induced by `nodes`; node order follows ascending index.
    pub fn induced_subgraph(&self, nodes: &[u32]) -> PropertyGraph {
        let mut keep = vec![false; self.node_count()];
        for &v in nodes {
            keep[v as usize] = true;
        }
        self.restrict(&keep, |_| true)
    }

    /// Copies the nodes in `keep` (in ascending index order) together with
    /// the edges among them that satisfy `keep_edge`.
    fn restrict(&self, keep: &[bool], keep_edge: impl Fn(&str) -> bool) -> PropertyGraph {
        let mut b = GraphBuilder::default();
        for v in 0..self.node_count() as u32 {
            if keep[v as usize] {
                // ids are unique in self, so this cannot fail
                let _ = b.add_node(self.node(v), 0);
            }
        }
        for (s, l, d) in self.edges() {
            if keep[s as usize] && keep[d as usize] && keep_edge(l) {
                let _ = b.add_edge(self.node_id(s), l, self.node_id(d), 0);
            }
        }
        b.finish()
    }
}

#[derive(Default)]
struct GraphBuilder {
    labels: LabelTable,
    ids: Vec<String>,
    id_index: HashMap<String, u32>,
    attributes: Vec<Vec<(String, String)>>,
    node_labels: Vec<Sym>,
    edges: Vec<(u32, Sym, u32)>,
}

impl GraphBuilder {
    fn add_node(&mut self, node: NodeRecord, line: u64) -> Result<()> {
        if self.id_index.contains_key(&node.id) {
            return Err(GedError::DuplicateNode { line, id: node.id });
        }
        for (i, (k, _)) in node.attributes.iter().enumerate() {
            if k == ID_ATTRIBUTE {
                return Err(GedError::parse("nodes", line, "attribute name `id` is reserved"));
            }
            if node.attributes[..i].iter().any(|(k2, _)| k2 == k) {
                return Err(GedError::parse(
                    "nodes",
                    line,
                    format!("attribute `{k}` given twice for node `{}`", node.id),
                ));
            }
        }
        let ix = self.ids.len() as u32;
        self.id_index.insert(node.id.clone(), ix);
        self.ids.push(node.id);
        self.node_labels.push(self.labels.intern(&node.label));
        self.attributes.push(node.attributes);
        Ok(())
    }

    fn add_edge(&mut self, src: &str, label: &str, dst: &str, line: u64) -> Result<()> {
        let s = *self.id_index.get(src).ok_or_else(|| GedError::DanglingEdge {
            line,
            id: src.to_string(),
        })?;
        let d = *self.id_index.get(dst).ok_or_else(|| GedError::DanglingEdge {
            line,
            id: dst.to_string(),
        })?;
        let l = self.labels.intern(label);
        self.edges.push((s, l, d));
        Ok(())
    }

    fn finish(self) -> PropertyGraph {
        PropertyGraph {
            topo: Topology::new(self.node_labels, self.edges),
            labels: self.labels,
            ids: self.ids,
            id_index: self.id_index,
            attributes: self.attributes,
        }
    }
}

fn csv_reader<R: Read>(source: R, delimiter: u8) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .from_reader(source)
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn csv_error(source_name: &str, e: csv::Error) -> GedError {
    let line = e.position().map_or(0, |p| p.line());
    GedError::parse(source_name, line, e.to_string())
}

fn parse_attribute_cells(cells: &[&str], line: u64) -> Result<Vec<(String, String)>> {
    let cells: Vec<&str> = cells.iter().copied().filter(|c| !c.is_empty()).collect();
    if cells.len() == 1 && cells[0].trim_start().starts_with('{') {
        let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(cells[0])
            .map_err(|e| GedError::parse("nodes", line, format!("bad attribute object: {e}")))?;
        let mut out = Vec::with_capacity(obj.len());
        for (k, v) in obj {
            let value = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => {
                    return Err(GedError::parse(
                        "nodes",
                        line,
                        format!("attribute `{k}` must be a scalar, got {other}"),
                    ))
                }
            };
            out.push((k, value));
        }
        return Ok(out);
    }
    cells
        .iter()
        .map(|cell| match cell.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(GedError::parse(
                "nodes",
                line,
                format!("attribute cell `{cell}` is not of the form key=value"),
            )),
        })
        .collect()
}

/// Reads nodes and edges from comma-separated sources. See the README for
/// the exact format.
pub fn load_graph<N: Read, E: Read>(node_source: N, edge_source: E) -> Result<PropertyGraph> {
    load_graph_with_delimiter(node_source, edge_source, b',')
}

pub fn load_graph_with_delimiter<N: Read, E: Read>(
    node_source: N,
    edge_source: E,
    delimiter: u8,
) -> Result<PropertyGraph> {
    let mut b = GraphBuilder::default();

    let mut rdr = csv_reader(node_source, delimiter);
    let mut records = rdr.records();
    if let Some(header) = records.next() {
        let header = header.map_err(|e| csv_error("nodes", e))?;
        let line = record_line(&header);
        let cols: Vec<&str> = header.iter().map(str::trim).collect();
        let has_attrs = match cols.as_slice() {
            ["id", "label"] => false,
            ["id", "label", "attrs"] => true,
            _ => {
                return Err(GedError::parse(
                    "nodes",
                    line,
                    format!("expected header `id,label[,attrs]`, found `{}`", cols.join(",")),
                ))
            }
        };
        for rec in records {
            let rec = rec.map_err(|e| csv_error("nodes", e))?;
            let line = record_line(&rec);
            if rec.len() < 2 {
                return Err(GedError::parse("nodes", line, "expected at least `id,label`"));
            }
            let cells: Vec<&str> = rec.iter().collect();
            if !has_attrs && cells[2..].iter().any(|c| !c.is_empty()) {
                return Err(GedError::parse(
                    "nodes",
                    line,
                    "undeclared column: header has no `attrs` column",
                ));
            }
            let (id, label) = (cells[0], cells[1]);
            if id.is_empty() || label.is_empty() {
                return Err(GedError::parse("nodes", line, "empty id or label"));
            }
            let attributes = parse_attribute_cells(&cells[2..], line)?;
            b.add_node(
                NodeRecord {
                    id: id.to_string(),
                    label: label.to_string(),
                    attributes,
                },
                line,
            )?;
        }
    }

    let mut rdr = csv_reader(edge_source, delimiter);
    let mut records = rdr.records();
    if let Some(header) = records.next() {
        let header = header.map_err(|e| csv_error("edges", e))?;
        let cols: Vec<&str> = header.iter().map(str::trim).collect();
        if cols != ["src", "label", "dst"] {
            return Err(GedError::parse(
                "edges",
                record_line(&header),
                format!("expected header `src,label,dst`, found `{}`", cols.join(",")),
            ));
        }
        for rec in records {
            let rec = rec.map_err(|e| csv_error("edges", e))?;
            let line = record_line(&rec);
            if rec.len() != 3 {
                return Err(GedError::parse(
                    "edges",
                    line,
                    format!("expected 3 columns, found {}", rec.len()),
                ));
            }
            if rec[1].is_empty() {
                return Err(GedError::parse("edges", line, "empty edge label"));
            }
            b.add_edge(&rec[0], &rec[1], &rec[2], line)?;
        }
    }

    Ok(b.finish())
}

pub fn load_graph_files(nodes: &Path, edges: &Path) -> Result<PropertyGraph> {
    let delimiter = match nodes.extension().and_then(|e| e.to_str()) {
        Some("tsv") => b'\t',
        _ => b',',
    };
    load_graph_with_delimiter(
        BufReader::new(File::open(nodes)?),
        BufReader::new(File::open(edges)?),
        delimiter,
    )
}

/// Per-node and per-edge keep masks for the graph simplified w.r.t. `q`.
pub(crate) fn filter_masks(
    topo: &Topology,
    labels: &LabelTable,
    q: &GraphPattern,
) -> (Vec<bool>, impl Fn(Sym) -> bool) {
    let node_syms: Vec<Sym> = q.node_labels().iter().map(|l| labels.resolve(l)).collect();
    let edge_syms: Vec<Sym> = q.edges().iter().map(|e| labels.resolve(&e.label)).collect();
    let mut keep: Vec<bool> = (0..topo.node_count() as u32)
        .map(|v| node_syms.iter().any(|s| s.matches(topo.label(v))))
        .collect();
    let edge_ok = move |l: Sym| edge_syms.iter().any(|s| s.matches(l));
    if !q.edges().is_empty() {
        let mut touched = vec![false; keep.len()];
        for (s, l, d) in topo.edges() {
            if keep[s as usize] && keep[d as usize] && edge_ok(l) {
                touched[s as usize] = true;
                touched[d as usize] = true;
            }
        }
        for (k, t) in keep.iter_mut().zip(touched) {
            *k &= t;
        }
    }
    (keep, edge_ok)
}

/// Drops nodes and edges whose labels match nothing in `q`, then nodes left
/// without incident edges (only when `q` has edges). Matches of `q` are the
/// same in the result as in `g`.
pub fn filter_graph(g: &PropertyGraph, q: &GraphPattern) -> PropertyGraph {
    let (keep, edge_ok) = filter_masks(&g.topo, &g.labels, q);
    g.restrict(&keep, |l| edge_ok(g.labels.resolve(l)))
}
