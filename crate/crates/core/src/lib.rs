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

//! Discovery of graph entity dependencies (GEDs) in property graphs.
//!
//! The pipeline splits the graph into dense communities, mines frequent
//! patterns inside each community, reduces them to a subsumption-free set,
//! matches every surviving pattern homomorphically over the whole graph and
//! searches a literal-set lattice over the resulting match table for
//! minimal dependencies. The union of all rules is reduced to a cover and
//! ranked.

pub mod community;
pub mod cover;
pub mod depminer;
pub mod discovery;
pub mod error;
pub mod graph;
pub mod literal;
pub mod matcher;
pub mod mining;
pub mod partition;
pub mod pattern;
pub mod rules_io;
mod search;

pub use community::{cpm_quality, detect_communities, CommunityAssignment};
pub use cover::{find_cover, rank_ged, rank_report, RankConfig, RuleGraph};
pub use depminer::{
    check_satisfaction, mine_dependencies, DepMinerConfig, Ged, GedStats, LatticeNode, Satisfaction,
};
pub use discovery::{discover, run_discovery, DiscoveryConfig, DiscoveryReport, Mode};
pub use error::{GedError, Result};
pub use graph::{filter_graph, labels_match, load_graph, load_graph_files, NodeRecord, PropertyGraph, WILDCARD};
pub use literal::Literal;
pub use matcher::{build_pseudo_relation, homomorphic_matches, Match, MatchOptions, MatchTable, Preprocessing};
pub use mining::{mine_frequent_patterns, mni_support, reduce_patterns, subgraph_isomorphisms, FrequentPattern};
pub use partition::Partition;
pub use pattern::GraphPattern;
pub use rules_io::{parse_rules, serialize_rules};
