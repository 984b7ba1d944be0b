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

//! Pattern matching over the full graph and the pseudo-relation (match
//! table) built from the matches.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::ops::ControlFlow;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{GedError, Result};
use crate::graph::{filter_masks, labels_match, PropertyGraph, Topology, ID_ATTRIBUTE};
use crate::pattern::GraphPattern;
use crate::search::{Search, SearchOptions};

/// Roots handed to one worker at a time.
const ROOT_CHUNK: usize = 64;

/// A binding of every pattern variable (by position) to a node index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub binding: Vec<u32>,
}

impl Match {
    /// External node ids of the binding.
    pub fn ids<'g>(&self, g: &'g PropertyGraph) -> Vec<&'g str> {
        self.binding.iter().map(|&v| g.node_id(v)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchOptions {
    /// Distinct variables must bind distinct nodes (isomorphic matching).
    pub injective: bool,
    /// Report one representative per orbit of the pattern's automorphism
    /// group: the binding that is smallest under variable permutation.
    pub orbit_dedup: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            injective: false,
            orbit_dedup: true,
        }
    }
}

/// Homomorphic matches of `q` in `g`, one per automorphism orbit.
pub fn homomorphic_matches(q: &GraphPattern, g: &PropertyGraph) -> Vec<Match> {
    find_matches(q, g, MatchOptions::default())
}

/// Matches of `q` in `g`, sorted by binding.
///
/// `g` is first simplified with respect to `q`; the search then binds one
/// variable at a time, intersecting the adjacency lists of all bound
/// neighbours. Work is split across threads by the first variable's
/// candidates.
pub fn find_matches(q: &GraphPattern, g: &PropertyGraph, opts: MatchOptions) -> Vec<Match> {
    let (keep, edge_ok) = filter_masks(g.topology(), g.label_table(), q);
    let nodes: Vec<u32> = (0..g.node_count() as u32).filter(|&v| keep[v as usize]).collect();
    let mut local = vec![u32::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let topo = g.topology();
    let labels = nodes.iter().map(|&v| topo.label(v)).collect();
    let edges: Vec<_> = topo
        .edges()
        .filter(|&(s, l, d)| keep[s as usize] && keep[d as usize] && edge_ok(l))
        .map(|(s, l, d)| (local[s as usize], l, local[d as usize]))
        .collect();
    let filtered = Topology::new(labels, edges);

    let compiled = q.compile(g.label_table());
    let search = Search::new(
        &compiled,
        &filtered,
        SearchOptions {
            injective: opts.injective,
            induced: false,
            exact_labels: false,
        },
        None,
    );
    let roots = search.root_candidates();
    let mut bindings: Vec<Vec<u32>> = roots
        .par_chunks(ROOT_CHUNK)
        .flat_map_iter(|chunk| {
            let mut out = Vec::new();
            let _ = search.run_from(chunk, &mut |b: &[u32]| {
                out.push(b.iter().map(|&x| nodes[x as usize]).collect::<Vec<u32>>());
                ControlFlow::Continue(())
            });
            out
        })
        .collect();
    bindings.par_sort_unstable();

    if opts.orbit_dedup && q.size_nodes() > 1 {
        let autos: Vec<Vec<usize>> = q
            .automorphisms()
            .into_iter()
            .filter(|s| s.iter().enumerate().any(|(i, &x)| i != x))
            .collect();
        if !autos.is_empty() {
            let all: HashSet<&[u32]> = bindings.iter().map(Vec::as_slice).collect();
            let keep: Vec<bool> = bindings
                .par_iter()
                .map(|b| {
                    autos.iter().all(|sigma| {
                        let image: Vec<u32> = sigma.iter().map(|&s| b[s]).collect();
                        image >= *b || !all.contains(image.as_slice())
                    })
                })
                .collect();
            bindings = bindings
                .into_iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(b, _)| b)
                .collect();
        }
    }
    bindings.into_iter().map(|binding| Match { binding }).collect()
}

/// Which attributes to tabulate and which variable pairs may be related by
/// variable or id literals.
///
/// Read from JSON of the form
/// `{"attributes": {"company": ["name"], "*": ["name"]},
///   "variable_pairs": [["company", "product"]]}`.
/// Keys of `attributes` are variable names or node labels (`*` for any
/// label); a variable key takes precedence over its label. Absent keys
/// keep every attribute. Without `variable_pairs` every pair is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preprocessing {
    #[serde(default)]
    pub attributes: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    pub variable_pairs: Option<Vec<(String, String)>>,
}

impl Preprocessing {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GedError::parse("preprocessing", e.line() as u64, e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            GedError::Parse { line, message, .. } => GedError::parse(&path.display().to_string(), line, message),
            other => other,
        })
    }

    fn allowed_attributes(&self, var: &str, label: &str) -> Option<&BTreeSet<String>> {
        self.attributes
            .get(var)
            .or_else(|| self.attributes.get(label))
            .or_else(|| self.attributes.get("*"))
    }

    /// Whether a variable/id literal may relate variables with these labels.
    pub fn pair_allowed(&self, label_a: &str, label_b: &str) -> bool {
        match &self.variable_pairs {
            None => true,
            Some(pairs) => pairs.iter().any(|(a, b)| {
                (labels_match(a, label_a) && labels_match(b, label_b))
                    || (labels_match(a, label_b) && labels_match(b, label_a))
            }),
        }
    }
}

/// A column of the match table: variable index and attribute name. The id
/// column of a variable uses the reserved `id` name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    pub var: usize,
    pub attr: String,
}

impl Column {
    pub fn is_id(&self) -> bool {
        self.attr == ID_ATTRIBUTE
    }
}

/// Pseudo-relation of a pattern's matches: one row per match, one column per
/// retained `(variable, attribute)` plus an id column per variable. Cells
/// hold interned values; `None` marks an absent attribute.
#[derive(Clone, Debug)]
pub struct MatchTable {
    pattern: GraphPattern,
    columns: Vec<Column>,
    /// Column-major cells.
    cells: Vec<Vec<Option<u32>>>,
    values: Vec<String>,
    matches: Vec<Match>,
}

impl MatchTable {
    /// Builds a table directly from string cells, one inner vector per
    /// column. Intended for tests and tools that do not start from a graph.
    pub fn from_columns(pattern: GraphPattern, columns: Vec<Column>, cells: Vec<Vec<Option<String>>>) -> Result<Self> {
        if columns.len() != cells.len() {
            return Err(GedError::Config("one cell vector per column is required".to_string()));
        }
        let rows = cells.first().map_or(0, Vec::len);
        if cells.iter().any(|c| c.len() != rows) {
            return Err(GedError::Config("columns differ in length".to_string()));
        }
        if columns.iter().any(|c| c.var >= pattern.size_nodes()) {
            return Err(GedError::Config("column refers to a missing variable".to_string()));
        }
        let mut pool = ValuePool::default();
        let cells = cells
            .into_iter()
            .map(|col| col.into_iter().map(|v| v.map(|s| pool.intern(&s))).collect())
            .collect();
        Ok(MatchTable {
            pattern,
            columns,
            cells,
            values: pool.values,
            matches: Vec::new(),
        })
    }

    pub fn pattern(&self) -> &GraphPattern {
        &self.pattern
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.cells.first().map_or(self.matches.len(), Vec::len)
    }

    /// Matches behind the rows, when the table was built from a graph.
    pub fn matches(&self) -> &[Match] {
        &self.matches
    }

    /// Column index of `var.attr`, or a schema error.
    pub fn column_index(&self, var: &str, attr: &str) -> Result<usize> {
        let schema = || GedError::Schema {
            var: var.to_string(),
            attr: attr.to_string(),
        };
        let v = self.pattern.var_index(var).ok_or_else(schema)?;
        self.columns
            .iter()
            .position(|c| c.var == v && c.attr == attr)
            .ok_or_else(schema)
    }

    pub(crate) fn column_cells(&self, col: usize) -> &[Option<u32>] {
        &self.cells[col]
    }

    pub fn cell(&self, col: usize, row: usize) -> Option<&str> {
        self.cells[col][row].map(|v| self.values[v as usize].as_str())
    }

    pub(crate) fn value(&self, id: u32) -> &str {
        &self.values[id as usize]
    }

    pub(crate) fn value_id(&self, value: &str) -> Option<u32> {
        self.values.iter().position(|v| v == value).map(|i| i as u32)
    }

    /// Header line names, e.g. `x.id`, `x.name`.
    pub fn header(&self) -> Vec<String> {
        self.columns
            .iter()
            .map(|c| format!("{}.{}", self.pattern.variables()[c.var], c.attr))
            .collect()
    }
}

#[derive(Default)]
struct ValuePool {
    values: Vec<String>,
    index: HashMap<String, u32>,
}

impl ValuePool {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        self.values.push(s.to_string());
        self.index.insert(s.to_string(), self.values.len() as u32 - 1);
        self.values.len() as u32 - 1
    }
}

/// Tabulates `matches` of `q`. Columns per variable: the id column, then the
/// attributes observed on the variable's matched nodes (sorted), restricted
/// by `selection`.
pub fn build_pseudo_relation(
    q: &GraphPattern,
    matches: &[Match],
    g: &PropertyGraph,
    selection: Option<&Preprocessing>,
) -> MatchTable {
    let mut columns = Vec::new();
    for (v, var) in q.variables().iter().enumerate() {
        columns.push(Column {
            var: v,
            attr: ID_ATTRIBUTE.to_string(),
        });
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for m in matches {
            for (a, _) in g.attributes(m.binding[v]) {
                seen.insert(a);
            }
        }
        let allowed = selection.and_then(|p| p.allowed_attributes(var, &q.node_labels()[v]));
        for a in seen {
            if allowed.is_none_or(|set| set.contains(a)) {
                columns.push(Column {
                    var: v,
                    attr: a.to_string(),
                });
            }
        }
    }
    let mut pool = ValuePool::default();
    let cells = columns
        .iter()
        .map(|c| {
            matches
                .iter()
                .map(|m| {
                    let node = m.binding[c.var];
                    if c.is_id() {
                        Some(pool.intern(g.node_id(node)))
                    } else {
                        g.attribute(node, &c.attr).map(|s| pool.intern(s))
                    }
                })
                .collect()
        })
        .collect();
    MatchTable {
        pattern: q.clone(),
        columns,
        cells,
        values: pool.values,
        matches: matches.to_vec(),
    }
}
