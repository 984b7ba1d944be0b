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

//! Seeded synthetic property graphs for benchmarks and scale tests.
//!
//! Nodes are grouped into clusters; most edges stay inside a cluster, so
//! community detection has structure to find. Edge labels are fixed by the
//! endpoint labels. Attribute `a0` is random, `a1` is a function of `a0`,
//! `a2` is random and `a3` is constant within a cluster, so the graphs
//! carry genuine dependencies.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gedmine_core::{NodeRecord, PropertyGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub nodes: usize,
    /// Distinct edges; fewer only when the clusters cannot hold them.
    pub edges: usize,
    pub labels: usize,
    /// At most 4 attributes are generated.
    pub attributes: usize,
    /// Distinct values of the random attributes.
    pub domain: usize,
    pub cluster_size: usize,
    /// Share of edge draws that stay inside a cluster.
    pub locality: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            nodes: 10_000,
            edges: 30_000,
            labels: 3,
            attributes: 4,
            domain: 8,
            cluster_size: 40,
            locality: 0.9,
            seed: 7,
        }
    }
}

pub type EdgeRecord = (String, String, String);

pub fn synthetic_records(spec: &SyntheticSpec) -> (Vec<NodeRecord>, Vec<EdgeRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = spec.labels.max(1);
    let domain = spec.domain.max(1);
    let cluster = spec.cluster_size.max(1);
    let label_of = |v: usize| v % labels;
    let nodes: Vec<NodeRecord> = (0..spec.nodes)
        .map(|v| {
            let a0 = rng.gen_range(0..domain);
            let values = [
                format!("v{a0}"),
                format!("w{}", a0 % 3),
                format!("v{}", rng.gen_range(0..domain)),
                format!("c{}", v / cluster),
            ];
            NodeRecord {
                id: v.to_string(),
                label: format!("L{}", label_of(v)),
                attributes: values
                    .into_iter()
                    .take(spec.attributes.min(4))
                    .enumerate()
                    .map(|(i, val)| (format!("a{i}"), val))
                    .collect(),
            }
        })
        .collect();
    let mut edges = Vec::with_capacity(spec.edges);
    let mut seen = HashSet::with_capacity(spec.edges);
    // bounded so that unreachable targets (tiny clusters, full locality)
    // still terminate
    let mut draws = 0usize;
    let max_draws = spec.edges.saturating_mul(100).saturating_add(1000);
    while edges.len() < spec.edges && spec.nodes > 1 && draws < max_draws {
        draws += 1;
        let s = rng.gen_range(0..spec.nodes);
        let d = if rng.gen_bool(spec.locality.clamp(0.0, 1.0)) {
            let base = s / cluster * cluster;
            let hi = (base + cluster).min(spec.nodes);
            rng.gen_range(base..hi)
        } else {
            rng.gen_range(0..spec.nodes)
        };
        if s == d || !seen.insert((s, d)) {
            continue;
        }
        let label = format!("r{}{}", label_of(s), label_of(d));
        edges.push((s.to_string(), label, d.to_string()));
    }
    (nodes, edges)
}

pub fn synthetic_graph(spec: &SyntheticSpec) -> PropertyGraph {
    let (nodes, edges) = synthetic_records(spec);
    PropertyGraph::from_records(nodes, edges).expect("generated records are consistent")
}

/// Writes the graph as `nodes.csv`-style and `edges.csv`-style files.
pub fn write_csv(spec: &SyntheticSpec, nodes_path: &Path, edges_path: &Path) -> io::Result<()> {
    let (nodes, edges) = synthetic_records(spec);
    let mut w = BufWriter::new(File::create(nodes_path)?);
    writeln!(w, "id,label,attrs")?;
    for n in &nodes {
        write!(w, "{},{}", n.id, n.label)?;
        for (k, v) in &n.attributes {
            write!(w, ",{k}={v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    let mut w = BufWriter::new(File::create(edges_path)?);
    writeln!(w, "src,label,dst")?;
    for (s, l, d) in &edges {
        writeln!(w, "{s},{l},{d}")?;
    }
    w.flush()
}
