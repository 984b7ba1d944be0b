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

//! Community detection under the Constant Potts Model
//! `H = sum_c [ e_c - gamma * C(n_c, 2) ]`, computed on the undirected
//! projection of the graph.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GedError, Result};
use crate::graph::PropertyGraph;

const MIN_GAIN: f64 = 1e-10;

/// Disjoint communities covering every node of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunityAssignment {
    membership: Vec<u32>,
    communities: Vec<Vec<u32>>,
    gamma: f64,
}

impl CommunityAssignment {
    /// Normalizes community ids so that communities are numbered by their
    /// smallest node index.
    pub fn from_membership(membership: &[u32], gamma: f64) -> Self {
        let mut rename: HashMap<u32, u32> = HashMap::new();
        let mut communities: Vec<Vec<u32>> = Vec::new();
        let membership: Vec<u32> = membership
            .iter()
            .enumerate()
            .map(|(v, &c)| {
                let id = *rename.entry(c).or_insert_with(|| {
                    communities.push(Vec::new());
                    communities.len() as u32 - 1
                });
                communities[id as usize].push(v as u32);
                id
            })
            .collect();
        CommunityAssignment {
            membership,
            communities,
            gamma,
        }
    }

    pub fn singletons(n: usize, gamma: f64) -> Self {
        let m: Vec<u32> = (0..n as u32).collect();
        Self::from_membership(&m, gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn community_of(&self, v: u32) -> u32 {
        self.membership[v as usize]
    }

    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    /// Node indices of every community, ascending within each community.
    pub fn communities(&self) -> &[Vec<u32>] {
        &self.communities
    }
}

/// Undirected weighted graph with node sizes, as used by the optimizers.
/// Self weights hold the edges internal to an aggregated node.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    size: Vec<f64>,
    self_weight: Vec<f64>,
    adj: Vec<Vec<(u32, f64)>>,
}

impl WeightedGraph {
    /// Undirected projection: every directed labeled edge contributes weight
    /// one between its endpoints.
    pub fn from_property_graph(g: &PropertyGraph) -> Self {
        let n = g.node_count();
        let mut maps: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
        let mut self_weight = vec![0.0; n];
        for (s, _, d) in g.edges() {
            if s == d {
                self_weight[s as usize] += 1.0;
            } else {
                *maps[s as usize].entry(d).or_default() += 1.0;
                *maps[d as usize].entry(s).or_default() += 1.0;
            }
        }
        Self::from_maps(vec![1.0; n], self_weight, maps)
    }

    /// Builds a graph from undirected unit edges; used by tests and benches.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut maps: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
        let mut self_weight = vec![0.0; n];
        for &(a, b) in edges {
            if a == b {
                self_weight[a as usize] += 1.0;
            } else {
                *maps[a as usize].entry(b).or_default() += 1.0;
                *maps[b as usize].entry(a).or_default() += 1.0;
            }
        }
        Self::from_maps(vec![1.0; n], self_weight, maps)
    }

    fn from_maps(size: Vec<f64>, self_weight: Vec<f64>, maps: Vec<HashMap<u32, f64>>) -> Self {
        let adj = maps
            .into_iter()
            .map(|m| {
                let mut v: Vec<(u32, f64)> = m.into_iter().collect();
                v.sort_unstable_by_key(|&(n, _)| n);
                v
            })
            .collect();
        WeightedGraph {
            size,
            self_weight,
            adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.size.len()
    }

    /// CPM quality of `membership` on this graph.
    pub fn quality(&self, membership: &[u32], gamma: f64) -> f64 {
        let mut internal: HashMap<u32, f64> = HashMap::new();
        let mut sizes: HashMap<u32, f64> = HashMap::new();
        for v in 0..self.node_count() {
            let c = membership[v];
            *sizes.entry(c).or_default() += self.size[v];
            let mut w = self.self_weight[v];
            for &(u, uw) in &self.adj[v] {
                if (u as usize) > v && membership[u as usize] == c {
                    w += uw;
                }
            }
            *internal.entry(c).or_default() += w;
        }
        sizes
            .iter()
            .map(|(c, &n)| internal.get(c).copied().unwrap_or(0.0) - gamma * n * (n - 1.0) / 2.0)
            .sum()
    }

    fn aggregate(&self, refined: &[u32]) -> (WeightedGraph, usize) {
        let k = refined.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut size = vec![0.0; k];
        let mut self_weight = vec![0.0; k];
        let mut maps: Vec<HashMap<u32, f64>> = vec![HashMap::new(); k];
        for v in 0..self.node_count() {
            let c = refined[v];
            size[c as usize] += self.size[v];
            self_weight[c as usize] += self.self_weight[v];
            for &(u, w) in &self.adj[v] {
                let cu = refined[u as usize];
                if cu == c {
                    if (u as usize) > v {
                        self_weight[c as usize] += w;
                    }
                } else {
                    *maps[c as usize].entry(cu).or_default() += w;
                }
            }
        }
        (WeightedGraph::from_maps(size, self_weight, maps), k)
    }
}

/// Reported for every accepted local move when auditing is enabled.
#[derive(Clone, Copy, Debug)]
pub struct MoveEvent {
    pub gain: f64,
    pub quality_before: f64,
    pub quality_after: f64,
}

/// A CPM optimizer. Downstream code only relies on getting some partition.
pub trait CommunityOptimizer {
    fn optimize(&self, graph: &WeightedGraph, gamma: f64, seed: u64) -> Vec<u32>;
}

/// Leiden: fast local moving, refinement, aggregation.
#[derive(Clone, Debug)]
pub struct Leiden {
    pub max_iterations: usize,
    /// Randomness of the refinement merge choice.
    pub theta: f64,
}

impl Default for Leiden {
    fn default() -> Self {
        Leiden {
            max_iterations: 100,
            theta: 0.01,
        }
    }
}

/// Local moving only, on the original graph. A simple baseline.
#[derive(Clone, Debug)]
pub struct GreedyLocalMoving {
    pub max_iterations: usize,
}

impl Default for GreedyLocalMoving {
    fn default() -> Self {
        GreedyLocalMoving { max_iterations: 100 }
    }
}

impl CommunityOptimizer for GreedyLocalMoving {
    fn optimize(&self, graph: &WeightedGraph, gamma: f64, seed: u64) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut membership: Vec<u32> = (0..graph.node_count() as u32).collect();
        for _ in 0..self.max_iterations {
            if local_moving(graph, &mut membership, gamma, &mut rng, &mut None) == 0 {
                break;
            }
        }
        membership
    }
}

impl CommunityOptimizer for Leiden {
    fn optimize(&self, graph: &WeightedGraph, gamma: f64, seed: u64) -> Vec<u32> {
        self.run_audited(graph, gamma, seed, None)
    }
}

impl Leiden {
    /// Runs the optimizer, calling `audit` after every accepted local move.
    /// Auditing recomputes the full quality around each move, which is slow.
    pub fn run_audited(
        &self,
        graph: &WeightedGraph,
        gamma: f64,
        seed: u64,
        mut audit: Option<&mut dyn FnMut(&MoveEvent)>,
    ) -> Vec<u32> {
        let n = graph.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // original node -> node of the current aggregate graph
        let mut node_of: Vec<u32> = (0..n as u32).collect();
        let mut current = graph.clone();
        let mut membership: Vec<u32> = (0..n as u32).collect();

        for _ in 0..self.max_iterations {
            let moves = local_moving(&current, &mut membership, gamma, &mut rng, &mut audit);
            let communities = count_distinct(&membership);
            if communities == current.node_count() && moves == 0 {
                break;
            }
            let refined = self.refine(&current, &membership, gamma, &mut rng);
            let (aggregate, k) = current.aggregate(&refined);
            // each refined community lies inside one community of `membership`
            let mut next_membership = vec![0u32; k];
            for v in 0..current.node_count() {
                next_membership[refined[v] as usize] = membership[v];
            }
            for x in node_of.iter_mut() {
                *x = refined[*x as usize];
            }
            let stalled = k == current.node_count();
            current = aggregate;
            membership = next_membership;
            if stalled && moves == 0 {
                break;
            }
        }
        node_of.iter().map(|&a| membership[a as usize]).collect()
    }

    /// Splits every community into well-connected subcommunities, merging
    /// singletons only. Returns dense refined ids.
    fn refine(&self, g: &WeightedGraph, membership: &[u32], gamma: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let n = g.node_count();
        let mut refined: Vec<u32> = (0..n as u32).collect();
        let mut r_size: Vec<f64> = g.size.clone();
        let mut singleton = vec![true; n];

        let mut comm_size: HashMap<u32, f64> = HashMap::new();
        let mut members: HashMap<u32, Vec<u32>> = HashMap::new();
        for v in 0..n {
            *comm_size.entry(membership[v]).or_default() += g.size[v];
            members.entry(membership[v]).or_default().push(v as u32);
        }
        // weight from each refined community to the rest of its community
        let mut ext: Vec<f64> = (0..n)
            .map(|v| {
                g.adj[v]
                    .iter()
                    .filter(|&&(u, _)| membership[u as usize] == membership[v])
                    .map(|&(_, w)| w)
                    .sum()
            })
            .collect();

        let mut keys: Vec<u32> = members.keys().copied().collect();
        keys.sort_unstable();
        for c in keys {
            let mut nodes = members[&c].clone();
            let n_c = comm_size[&c];
            nodes.shuffle(rng);
            for &v in &nodes {
                let v = v as usize;
                if !singleton[v] {
                    continue;
                }
                let s_v = g.size[v];
                if ext[v] < gamma * s_v * (n_c - s_v) - MIN_GAIN {
                    continue;
                }
                let mut to_refined: HashMap<u32, f64> = HashMap::new();
                for &(u, w) in &g.adj[v] {
                    if membership[u as usize] == c {
                        *to_refined.entry(refined[u as usize]).or_default() += w;
                    }
                }
                let mut options: Vec<(u32, f64)> = vec![(refined[v], 0.0)];
                let mut targets: Vec<(u32, f64)> = to_refined.into_iter().collect();
                targets.sort_unstable_by_key(|&(t, _)| t);
                for (t, w) in targets {
                    if t == refined[v] {
                        continue;
                    }
                    let n_t = r_size[t as usize];
                    if ext[t as usize] < gamma * n_t * (n_c - n_t) - MIN_GAIN {
                        continue;
                    }
                    let gain = w - gamma * s_v * n_t;
                    if gain >= 0.0 {
                        options.push((t, gain));
                    }
                }
                if options.len() == 1 {
                    continue;
                }
                let best = options.iter().map(|o| o.1).fold(f64::MIN, f64::max);
                let weights: Vec<f64> = options
                    .iter()
                    .map(|&(_, gain)| ((gain - best) / self.theta).exp())
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut pick = rng.gen::<f64>() * total;
                let mut chosen = options[options.len() - 1].0;
                for (o, w) in options.iter().zip(&weights) {
                    if pick < *w {
                        chosen = o.0;
                        break;
                    }
                    pick -= w;
                }
                if chosen == refined[v] {
                    continue;
                }
                let w_vt: f64 = g.adj[v]
                    .iter()
                    .filter(|&&(u, _)| refined[u as usize] == chosen)
                    .map(|&(_, w)| w)
                    .sum();
                let t = chosen as usize;
                ext[t] = ext[t] + ext[v] - 2.0 * w_vt;
                r_size[t] += s_v;
                r_size[v] = 0.0;
                refined[v] = chosen;
                singleton[v] = false;
                singleton[t] = false;
            }
        }
        let m = CommunityAssignment::from_membership(&refined, gamma);
        m.membership
    }
}

fn count_distinct(m: &[u32]) -> usize {
    let mut v = m.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Queue-based local moving. Returns the number of accepted moves.
fn local_moving(
    g: &WeightedGraph,
    membership: &mut [u32],
    gamma: f64,
    rng: &mut ChaCha8Rng,
    audit: &mut Option<&mut dyn FnMut(&MoveEvent)>,
) -> usize {
    let n = g.node_count();
    if n == 0 {
        return 0;
    }
    let mut size: Vec<f64> = vec![0.0; n.max(membership.iter().map(|&c| c as usize + 1).max().unwrap_or(0))];
    for v in 0..n {
        size[membership[v] as usize] += g.size[v];
    }
    let mut empty: Vec<u32> = (0..size.len() as u32).filter(|&c| size[c as usize] == 0.0).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut queue: std::collections::VecDeque<u32> = order.into_iter().collect();
    let mut queued = vec![true; n];
    let mut moves = 0;
    let audited = audit.is_some();
    let mut to_comm: HashMap<u32, f64> = HashMap::new();
    while let Some(v) = queue.pop_front() {
        let v = v as usize;
        queued[v] = false;
        let a = membership[v];
        let s_v = g.size[v];
        to_comm.clear();
        for &(u, w) in &g.adj[v] {
            *to_comm.entry(membership[u as usize]).or_default() += w;
        }
        let w_a = to_comm.get(&a).copied().unwrap_or(0.0);
        let stay = w_a - gamma * s_v * (size[a as usize] - s_v);
        let mut best = (a, 0.0);
        let mut cands: Vec<(u32, f64)> = to_comm.iter().map(|(&c, &w)| (c, w)).collect();
        cands.sort_unstable_by_key(|&(c, _)| c);
        for (b, w_b) in cands {
            if b == a {
                continue;
            }
            let gain = (w_b - gamma * s_v * size[b as usize]) - stay;
            if gain > best.1 {
                best = (b, gain);
            }
        }
        // moving to an empty community
        if -stay > best.1 && size[a as usize] > s_v {
            if let Some(&e) = empty.last() {
                best = (e, -stay);
            }
        }
        if best.0 == a || best.1 <= MIN_GAIN {
            continue;
        }
        let b = best.0;
        let before = if audited { g.quality(membership, gamma) } else { 0.0 };
        if empty.last() == Some(&b) {
            empty.pop();
        }
        size[a as usize] -= s_v;
        size[b as usize] += s_v;
        if size[a as usize] <= 0.0 {
            size[a as usize] = 0.0;
            empty.push(a);
        }
        membership[v] = b;
        moves += 1;
        let after = if audited { g.quality(membership, gamma) } else { 0.0 };
        if let Some(hook) = audit.as_mut() {
            hook(&MoveEvent {
                gain: best.1,
                quality_before: before,
                quality_after: after,
            });
        }
        for &(u, _) in &g.adj[v] {
            if membership[u as usize] != b && !queued[u as usize] {
                queued[u as usize] = true;
                queue.push_back(u);
            }
        }
    }
    moves
}

/// CPM quality `sum_c [ e_c - gamma * C(n_c, 2) ]` of `a` on `g`.
pub fn cpm_quality(g: &PropertyGraph, a: &CommunityAssignment) -> Result<f64> {
    if a.node_count() != g.node_count() {
        return Err(GedError::Assignment(format!(
            "assignment covers {} nodes, graph has {}",
            a.node_count(),
            g.node_count()
        )));
    }
    if !(a.gamma > 0.0) {
        return Err(GedError::Assignment(format!("gamma must be positive, got {}", a.gamma)));
    }
    let mut e_c = vec![0usize; a.len()];
    for (s, _, d) in g.edges() {
        let c = a.community_of(s);
        if c == a.community_of(d) {
            e_c[c as usize] += 1;
        }
    }
    Ok(a
        .communities
        .iter()
        .zip(e_c)
        .map(|(nodes, e)| {
            let n = nodes.len() as f64;
            e as f64 - a.gamma * n * (n - 1.0) / 2.0
        })
        .sum())
}

/// Leiden-CPM communities of `g`. Reproducible for a fixed seed.
pub fn detect_communities(g: &PropertyGraph, gamma: f64, seed: u64) -> CommunityAssignment {
    detect_communities_with(g, gamma, seed, &Leiden::default())
}

pub fn detect_communities_with(
    g: &PropertyGraph,
    gamma: f64,
    seed: u64,
    optimizer: &dyn CommunityOptimizer,
) -> CommunityAssignment {
    let wg = WeightedGraph::from_property_graph(g);
    let membership = optimizer.optimize(&wg, gamma, seed);
    CommunityAssignment::from_membership(&membership, gamma)
}
