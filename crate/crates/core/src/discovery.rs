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

//! The end-to-end discovery pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::detect_communities;
use crate::cover::{find_cover, rank_report, RankConfig};
use crate::depminer::{mine_dependencies_detailed, DepMinerConfig, Ged};
use crate::error::{GedError, Result};
use crate::graph::{load_graph_files, PropertyGraph};
use crate::matcher::{build_pseudo_relation, find_matches, MatchOptions, Preprocessing};
use crate::mining::{mine_topology, reduce_patterns, FrequentPattern};
use crate::pattern::{CanonicalCode, GraphPattern};
use crate::rules_io::serialize_rules;

/// Which dependency class to mine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Unrestricted dependencies over homomorphic matches.
    #[default]
    Ged,
    /// No id literals; isomorphic matches.
    Gfd,
    /// Right-hand sides are single id literals.
    Gkey,
}

impl Mode {
    /// Whether matches must be injective.
    pub fn injective(self) -> bool {
        self == Mode::Gfd
    }
}

impl FromStr for Mode {
    type Err = GedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ged" => Ok(Mode::Ged),
            "gfd" => Ok(Mode::Gfd),
            "gkey" => Ok(Mode::Gkey),
            other => Err(GedError::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ged => "ged",
            Mode::Gfd => "gfd",
            Mode::Gkey => "gkey",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DiscoveryConfig {
    pub gamma: f64,
    pub tau: usize,
    pub alpha: f64,
    pub mode: Mode,
    pub max_pattern_nodes: usize,
    pub max_lhs_size: usize,
    pub top_k_constants: usize,
    pub top_k: usize,
    pub seed: u64,
    pub orbit_dedup: bool,
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub out: Option<PathBuf>,
    pub preprocess: Option<PathBuf>,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            gamma: 1.0,
            tau: 5000,
            alpha: 0.5,
            mode: Mode::Ged,
            max_pattern_nodes: 5,
            max_lhs_size: 3,
            top_k_constants: 5,
            top_k: 20,
            seed: 0,
            orbit_dedup: true,
            nodes: PathBuf::new(),
            edges: PathBuf::new(),
            out: None,
            preprocess: None,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(GedError::Config(m));
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return fail(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.tau == 0 {
            return fail("tau must be at least 1".to_string());
        }
        if self.max_pattern_nodes == 0 {
            return fail("max pattern nodes must be at least 1".to_string());
        }
        RankConfig::new(self.alpha)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DiscoveryCounts {
    pub communities: usize,
    /// Summed over communities, before merging duplicates.
    pub frequent_patterns: usize,
    pub unique_frequent_patterns: usize,
    pub reduced_patterns: usize,
    pub patterns_with_matches: usize,
    /// Parallel to the report's `patterns`.
    pub matches_per_pattern: Vec<usize>,
    pub candidates_validated: usize,
    /// Rules dropped because a match outside the deduplicated table
    /// violates them.
    pub rules_rejected_on_graph: usize,
    pub rules_before_cover: usize,
    pub rules_after_cover: usize,
}

#[derive(Clone, Debug, Default)]
pub struct DiscoveryReport {
    /// Ranked, truncated to the configured top-k.
    pub rules: Vec<Ged>,
    /// The whole cover, unranked.
    pub cover: Vec<Ged>,
    pub patterns: Vec<GraphPattern>,
    pub timings: Vec<StageTiming>,
    pub counts: DiscoveryCounts,
}

/// Loads the configured graph, runs [`discover`] and writes the ranked
/// rules to the output path, if any.
pub fn run_discovery(cfg: &DiscoveryConfig) -> Result<DiscoveryReport> {
    cfg.validate()?;
    let start = Instant::now();
    let g = load_graph_files(&cfg.nodes, &cfg.edges).map_err(|e| e.in_stage("load"))?;
    let pre = cfg
        .preprocess
        .as_deref()
        .map(Preprocessing::from_file)
        .transpose()
        .map_err(|e| e.in_stage("load"))?;
    let load = start.elapsed().as_secs_f64();
    info!("stage=load seconds={load:.3} nodes={} edges={}", g.node_count(), g.edge_count());

    let mut report = discover(&g, cfg, pre.as_ref())?;
    report.timings.insert(0, StageTiming { stage: "load", seconds: load });

    if let Some(path) = &cfg.out {
        let start = Instant::now();
        let file = File::create(path).map_err(|e| GedError::from(e).in_stage("write"))?;
        serialize_rules(&report.rules, BufWriter::new(file)).map_err(|e| e.in_stage("write"))?;
        let seconds = start.elapsed().as_secs_f64();
        info!("stage=write seconds={seconds:.3} rules={}", report.rules.len());
        report.timings.push(StageTiming { stage: "write", seconds });
    }
    Ok(report)
}

/// Runs the pipeline on a loaded graph: communities, frequent patterns per
/// community, pattern reduction, matching, lattice search per pattern,
/// cover and ranking.
pub fn discover(g: &PropertyGraph, cfg: &DiscoveryConfig, pre: Option<&Preprocessing>) -> Result<DiscoveryReport> {
    cfg.validate()?;
    let mut report = DiscoveryReport::default();
    let mut stage_clock = Instant::now();
    let mut lap = |report: &mut DiscoveryReport, stage: &'static str| {
        let seconds = stage_clock.elapsed().as_secs_f64();
        stage_clock = Instant::now();
        report.timings.push(StageTiming { stage, seconds });
        seconds
    };

    let communities = detect_communities(g, cfg.gamma, cfg.seed);
    report.counts.communities = communities.len();
    let s = lap(&mut report, "communities");
    info!("stage=communities seconds={s:.3} communities={}", communities.len());

    let topo = g.topology();
    let min_size = cfg.tau.max(1);
    let mined: Vec<(u32, Vec<(GraphPattern, usize)>)> = communities
        .communities()
        .par_iter()
        .enumerate()
        .filter(|(_, nodes)| nodes.len() >= min_size)
        .map(|(c, nodes)| {
            let sub = topo.induced(nodes);
            (c as u32, mine_topology(&sub, g.label_table(), cfg.tau, cfg.max_pattern_nodes))
        })
        .collect();
    let mut merged: BTreeMap<CanonicalCode, FrequentPattern> = BTreeMap::new();
    for (c, patterns) in mined {
        report.counts.frequent_patterns += patterns.len();
        for (p, support) in patterns {
            let e = merged.entry(p.canonical_code()).or_insert_with(|| FrequentPattern {
                pattern: p,
                support: 0,
                communities: Vec::new(),
            });
            e.support = e.support.max(support);
            e.communities.push(c);
        }
    }
    let frequent: Vec<FrequentPattern> = merged.into_values().collect();
    report.counts.unique_frequent_patterns = frequent.len();
    let s = lap(&mut report, "mining");
    info!(
        "stage=mining seconds={s:.3} frequent={} unique={}",
        report.counts.frequent_patterns,
        frequent.len()
    );

    let reduced = reduce_patterns(&frequent);
    report.counts.reduced_patterns = reduced.len();
    let s = lap(&mut report, "reduction");
    info!("stage=reduction seconds={s:.3} patterns={}", reduced.len());

    let dep_cfg = DepMinerConfig {
        top_k_constants: cfg.top_k_constants,
        max_lhs_size: cfg.max_lhs_size,
        mode: cfg.mode,
        prune: true,
        preprocessing: pre.cloned(),
    };
    let per_pattern: Vec<PatternOutcome> = reduced
        .par_iter()
        .map(|q| mine_pattern(q, g, cfg, &dep_cfg))
        .collect();
    let mut sigma = Vec::new();
    for o in per_pattern {
        report.counts.matches_per_pattern.push(o.matches);
        if o.matches > 0 {
            report.counts.patterns_with_matches += 1;
        }
        report.counts.candidates_validated += o.candidates;
        report.counts.rules_rejected_on_graph += o.rejected;
        sigma.extend(o.rules);
    }
    report.patterns = reduced;
    report.counts.rules_before_cover = sigma.len();
    let s = lap(&mut report, "dependencies");
    info!(
        "stage=dependencies seconds={s:.3} candidates={} rules={} rejected={}",
        report.counts.candidates_validated,
        sigma.len(),
        report.counts.rules_rejected_on_graph
    );

    let cover = find_cover(&sigma);
    report.counts.rules_after_cover = cover.len();
    let rank_cfg = RankConfig::new(cfg.alpha)?;
    report.rules = rank_report(&cover, &rank_cfg, cfg.top_k).map_err(|e| e.in_stage("rank"))?;
    report.cover = cover;
    let s = lap(&mut report, "cover");
    info!(
        "stage=cover seconds={s:.3} before={} after={} reported={}",
        report.counts.rules_before_cover,
        report.counts.rules_after_cover,
        report.rules.len()
    );
    Ok(report)
}

struct PatternOutcome {
    matches: usize,
    candidates: usize,
    rejected: usize,
    rules: Vec<Ged>,
}

fn mine_pattern(q: &GraphPattern, g: &PropertyGraph, cfg: &DiscoveryConfig, dep_cfg: &DepMinerConfig) -> PatternOutcome {
    let opts = MatchOptions {
        injective: cfg.mode.injective(),
        orbit_dedup: cfg.orbit_dedup,
    };
    let matches = find_matches(q, g, opts);
    let table = build_pseudo_relation(q, &matches, g, dep_cfg.preprocessing.as_ref());
    let mined = mine_dependencies_detailed(&table, dep_cfg);
    let mut rules = mined.rules;
    let mut rejected = 0;
    // a rule read off orbit representatives must also hold on the other
    // members of each orbit
    if cfg.orbit_dedup && !rules.is_empty() && q.automorphisms().len() > 1 {
        let all = find_matches(
            q,
            g,
            MatchOptions {
                orbit_dedup: false,
                ..opts
            },
        );
        let before = rules.len();
        rules.retain(|r| {
            all.iter().all(|m| {
                !r.lhs.iter().all(|l| l.holds(q, g, &m.binding)) || r.rhs.iter().all(|l| l.holds(q, g, &m.binding))
            })
        });
        rejected = before - rules.len();
    }
    PatternOutcome {
        matches: matches.len(),
        candidates: mined.candidates,
        rejected,
        rules,
    }
}
