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

//! Backtracking embedding search shared by the matcher (homomorphisms),
//! the miner (isomorphisms, MNI) and pattern reduction.
//!
//! Variables are bound one at a time. The candidates for the next variable
//! are obtained by scanning the smallest adjacency list among its already
//! bound neighbours and probing every other bound neighbour, i.e. a
//! generic-join style multiway intersection rather than pairwise joins.

use std::ops::ControlFlow;

use crate::graph::{Sym, Topology};

/// A pattern resolved against a particular label table.
#[derive(Clone, Debug)]
pub(crate) struct CompiledPattern {
    pub labels: Vec<Sym>,
    pub edges: Vec<(usize, Sym, usize)>,
}

impl CompiledPattern {
    pub fn var_count(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct SearchOptions {
    /// Distinct variables must map to distinct nodes.
    pub injective: bool,
    /// Every target edge between mapped nodes must be covered by a pattern
    /// edge (classic induced subgraph isomorphism). Only meaningful with
    /// `injective`.
    pub induced: bool,
    /// Labels must be equal; wildcards only match wildcards.
    pub exact_labels: bool,
}

#[derive(Clone, Copy, Debug)]
enum Dir {
    /// pattern edge bound -> var
    FromBound,
    /// pattern edge var -> bound
    ToBound,
}

#[derive(Clone, Debug)]
struct Step {
    var: usize,
    label: Sym,
    /// Edges to variables bound at earlier steps.
    links: Vec<(usize, Sym, Dir)>,
    self_loops: Vec<Sym>,
}

pub(crate) struct Search<'a> {
    g: &'a Topology,
    opts: SearchOptions,
    steps: Vec<Step>,
    /// Pattern edge labels per ordered variable pair, for the induced check.
    between: Vec<Vec<Vec<Sym>>>,
}

impl<'a> Search<'a> {
    /// Plans a search. When `first` is given that variable is bound first.
    pub fn new(q: &CompiledPattern, g: &'a Topology, opts: SearchOptions, first: Option<usize>) -> Self {
        let n = q.var_count();
        let mut between = vec![vec![Vec::new(); n]; n];
        for &(s, l, d) in &q.edges {
            between[s][d].push(l);
        }
        let freq: Vec<usize> = q.labels.iter().map(|&l| g.label_frequency(l)).collect();
        let mut bound = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut next = first.or_else(|| (0..n).min_by_key(|&v| (freq[v], v)));
        while let Some(v) = next {
            bound[v] = true;
            order.push(v);
            // prefer variables adjacent to the bound set, fewest candidates first
            let linked = |u: usize| {
                q.edges
                    .iter()
                    .filter(|&&(s, _, d)| (s == u && d != u && bound[d]) || (d == u && s != u && bound[s]))
                    .count()
            };
            next = (0..n)
                .filter(|&u| !bound[u])
                .min_by_key(|&u| {
                    let l = linked(u);
                    (l == 0, freq[u], usize::MAX - l, u)
                });
        }
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let steps = order
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut links = Vec::new();
                let mut self_loops = Vec::new();
                for &(s, l, d) in &q.edges {
                    if s == v && d == v {
                        self_loops.push(l);
                    } else if d == v && pos[s] < i {
                        links.push((s, l, Dir::FromBound));
                    } else if s == v && pos[d] < i {
                        links.push((d, l, Dir::ToBound));
                    }
                }
                Step {
                    var: v,
                    label: q.labels[v],
                    links,
                    self_loops,
                }
            })
            .collect();
        Search {
            g,
            opts,
            steps,
            between,
        }
    }

    #[inline]
    fn label_ok(&self, pat: Sym, node: Sym) -> bool {
        if self.opts.exact_labels {
            pat == node
        } else {
            pat.matches(node)
        }
    }

    /// Candidates for the first variable.
    pub fn root_candidates(&self) -> Vec<u32> {
        match self.steps.first() {
            Some(step) => self.unconstrained(step),
            None => Vec::new(),
        }
    }

    fn unconstrained(&self, step: &Step) -> Vec<u32> {
        if self.opts.exact_labels {
            (0..self.g.node_count() as u32)
                .filter(|&v| self.g.label(v) == step.label)
                .collect()
        } else {
            self.g.nodes_matching(step.label)
        }
    }

    /// Visits every embedding. The slice passed to `visit` is indexed by
    /// pattern variable.
    pub fn run<F>(&self, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        let roots = self.root_candidates();
        self.run_from(&roots, visit)
    }

    /// Visits the embeddings whose first variable is bound to one of `roots`.
    pub fn run_from<F>(&self, roots: &[u32], visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        if self.steps.is_empty() {
            return ControlFlow::Continue(());
        }
        let n = self.between.len();
        let mut binding = vec![u32::MAX; n];
        let first = &self.steps[0];
        for &root in roots {
            if !self.accept(first, root, &binding) {
                continue;
            }
            binding[first.var] = root;
            self.extend(1, &mut binding, visit)?;
            binding[first.var] = u32::MAX;
        }
        ControlFlow::Continue(())
    }

    fn extend<F>(&self, depth: usize, binding: &mut Vec<u32>, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        if depth == self.steps.len() {
            return visit(binding);
        }
        let step = &self.steps[depth];
        if step.links.is_empty() {
            for c in self.unconstrained(step) {
                if self.accept(step, c, binding) {
                    binding[step.var] = c;
                    self.extend(depth + 1, binding, visit)?;
                    binding[step.var] = u32::MAX;
                }
            }
            return ControlFlow::Continue(());
        }

        // scan the shortest adjacency list, probe the others
        let adj = |&(b, _, dir): &(usize, Sym, Dir)| -> &[(u32, Sym)] {
            match dir {
                Dir::FromBound => self.g.out(binding[b]),
                Dir::ToBound => self.g.inc(binding[b]),
            }
        };
        let (base_ix, base_link) = step
            .links
            .iter()
            .enumerate()
            .min_by_key(|(_, l)| adj(l).len())
            .expect("links not empty");
        let base = adj(base_link);
        let mut candidates: Vec<u32> = Vec::new();
        let mut last = u32::MAX;
        for &(nbr, l) in base {
            if nbr == last || !base_link.1.matches(l) {
                continue;
            }
            let ok = step.links.iter().enumerate().all(|(i, &(b, pl, dir))| {
                i == base_ix
                    || match dir {
                        Dir::FromBound => self.g.has_edge(binding[b], pl, nbr),
                        Dir::ToBound => self.g.has_edge(nbr, pl, binding[b]),
                    }
            });
            if ok {
                candidates.push(nbr);
                last = nbr;
            }
        }
        for c in candidates {
            if self.accept(step, c, binding) {
                binding[step.var] = c;
                self.extend(depth + 1, binding, visit)?;
                binding[step.var] = u32::MAX;
            }
        }
        ControlFlow::Continue(())
    }

    /// Node label, self loops, injectivity and the induced condition.
    fn accept(&self, step: &Step, c: u32, binding: &[u32]) -> bool {
        if !self.label_ok(step.label, self.g.label(c)) {
            return false;
        }
        if !step.self_loops.iter().all(|&l| self.g.has_edge(c, l, c)) {
            return false;
        }
        if self.opts.injective && binding.contains(&c) {
            return false;
        }
        if self.opts.induced && !self.induced_ok(step.var, c, binding) {
            return false;
        }
        true
    }

    fn induced_ok(&self, v: usize, c: u32, binding: &[u32]) -> bool {
        let covered = |from: usize, to: usize, gl: Sym| {
            self.between[from][to].iter().any(|&pl| self.label_ok(pl, gl))
        };
        for &(_, gl) in self.g.edge_labels(c, c) {
            if !covered(v, v, gl) {
                return false;
            }
        }
        for (b, &bn) in binding.iter().enumerate() {
            if bn == u32::MAX || b == v {
                continue;
            }
            for &(_, gl) in self.g.edge_labels(c, bn) {
                if !covered(v, b, gl) {
                    return false;
                }
            }
            for &(_, gl) in self.g.edge_labels(bn, c) {
                if !covered(b, v, gl) {
                    return false;
                }
            }
        }
        true
    }
}

/// Collects every embedding, sorted.
pub(crate) fn all_embeddings(q: &CompiledPattern, g: &Topology, opts: SearchOptions) -> Vec<Vec<u32>> {
    let search = Search::new(q, g, opts, None);
    let mut out = Vec::new();
    let _ = search.run(&mut |b: &[u32]| {
        out.push(b.to_vec());
        ControlFlow::Continue(())
    });
    out.sort_unstable();
    out
}

/// True if at least one embedding exists.
pub(crate) fn exists(q: &CompiledPattern, g: &Topology, opts: SearchOptions) -> bool {
    let search = Search::new(q, g, opts, None);
    search.run(&mut |_: &[u32]| ControlFlow::Break(())).is_break()
}
