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

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gedmine_core::depminer::check_satisfaction_with;
use gedmine_core::matcher::find_matches;
use gedmine_core::{
    build_pseudo_relation, detect_communities, load_graph_files, parse_rules, run_discovery, DiscoveryConfig,
    GedError, GraphPattern, MatchOptions, Mode, Preprocessing, PropertyGraph,
};
use log::info;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Discover graph entity dependencies in a property graph.
#[derive(Parser, Debug)]
#[command(name = "gedmine", version)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine, reduce and rank dependencies; write them as JSON lines.
    Discover(DiscoverArgs),
    /// Check rules from a file against a graph and list violations.
    Validate(ValidateArgs),
    /// Print the match table of a pattern as CSV.
    Match(MatchArgs),
    /// Print the community of every node as CSV.
    Communities(CommunityArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Node file (`id,label[,attrs]`); `.tsv` files are tab separated.
    #[arg(long)]
    nodes: PathBuf,
    /// Edge file (`src,label,dst`).
    #[arg(long)]
    edges: PathBuf,
}

#[derive(Args, Debug)]
struct DiscoverArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Output rule file.
    #[arg(long)]
    out: PathBuf,
    /// Community resolution.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Minimum MNI support of a pattern within a community.
    #[arg(long, default_value_t = 5000)]
    tau: usize,
    /// Weight of persistence against complexity in the rank, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// ged, gfd or gkey.
    #[arg(long, default_value = "ged", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value_t = 5)]
    max_pattern_nodes: usize,
    #[arg(long, default_value_t = 3)]
    max_lhs_size: usize,
    /// Constant literals per column, most frequent values first.
    #[arg(long, default_value_t = 5)]
    top_k_constants: usize,
    /// Rules written after ranking.
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attribute selection and allowed variable pairs (JSON).
    #[arg(long)]
    preprocess: Option<PathBuf>,
    /// Keep every match rather than one per pattern symmetry class.
    #[arg(long)]
    no_orbit_dedup: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Rule file written by `discover`.
    #[arg(long)]
    rules: PathBuf,
    /// Matching semantics: gfd checks isomorphic matches only.
    #[arg(long, default_value = "ged", value_parser = parse_mode)]
    mode: Mode,
}

#[derive(Args, Debug)]
struct MatchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Pattern as JSON: `{"nodes":[{"var","label"}],"edges":[{"src","label","dst"}]}`.
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    preprocess: Option<PathBuf>,
    /// Injective matching.
    #[arg(long)]
    isomorphic: bool,
    #[arg(long)]
    no_orbit_dedup: bool,
    /// Output file; standard output by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CommunityArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: GedError| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "level={} {}", record.level().as_str().to_lowercase(), record.args()))
        .init();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    match panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            let code = match &e {
                GedError::Config(_) => EXIT_USAGE,
                GedError::Stage { source, .. } if matches!(**source, GedError::Config(_)) => EXIT_USAGE,
                e if e.is_data_error() => EXIT_DATA,
                _ => EXIT_INTERNAL,
            };
            ExitCode::from(code)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}

fn run(command: Command) -> Result<(), GedError> {
    match command {
        Command::Discover(a) => discover(a),
        Command::Validate(a) => validate(a),
        Command::Match(a) => match_pattern(a),
        Command::Communities(a) => communities(a),
    }
}

fn load(g: &GraphArgs) -> Result<PropertyGraph, GedError> {
    load_graph_files(&g.nodes, &g.edges).map_err(|e| e.in_stage("load"))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, GedError> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn discover(a: DiscoverArgs) -> Result<(), GedError> {
    let cfg = DiscoveryConfig {
        gamma: a.gamma,
        tau: a.tau,
        alpha: a.alpha,
        mode: a.mode,
        max_pattern_nodes: a.max_pattern_nodes,
        max_lhs_size: a.max_lhs_size,
        top_k_constants: a.top_k_constants,
        top_k: a.top_k,
        seed: a.seed,
        orbit_dedup: !a.no_orbit_dedup,
        nodes: a.graph.nodes,
        edges: a.graph.edges,
        out: Some(a.out),
        preprocess: a.preprocess,
    };
    let report = run_discovery(&cfg)?;
    let c = &report.counts;
    info!(
        "summary communities={} frequent_patterns={} reduced_patterns={} patterns_with_matches={} candidates={} rules_before_cover={} rules_after_cover={} rules_written={}",
        c.communities,
        c.frequent_patterns,
        c.reduced_patterns,
        c.patterns_with_matches,
        c.candidates_validated,
        c.rules_before_cover,
        c.rules_after_cover,
        report.rules.len()
    );
    let total: f64 = report.timings.iter().map(|t| t.seconds).sum();
    info!("summary seconds={total:.3}");
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), GedError> {
    let g = load(&a.graph)?;
    let rules = parse_rules(BufReader::new(File::open(&a.rules)?)).map_err(|e| e.in_stage("rules"))?;
    let opts = MatchOptions {
        injective: a.mode.injective(),
        orbit_dedup: false,
    };
    let mut out = sink(None)?;
    let mut failing = 0;
    for (i, r) in rules.iter().enumerate() {
        let s = check_satisfaction_with(r, &g, opts);
        if !s.holds {
            failing += 1;
        }
        writeln!(out, "rule={} holds={} violations={} rule_text={}", i + 1, s.holds, s.violations.len(), r)?;
        for m in &s.violations {
            let binding: Vec<String> = r
                .pattern
                .variables()
                .iter()
                .zip(m.ids(&g))
                .map(|(v, id)| format!("{v}={id}"))
                .collect();
            writeln!(out, "  violation {}", binding.join(" "))?;
        }
    }
    out.flush()?;
    info!("summary rules={} failing={failing}", rules.len());
    Ok(())
}

fn match_pattern(a: MatchArgs) -> Result<(), GedError> {
    let g = load(&a.graph)?;
    let text = fs::read_to_string(&a.pattern)?;
    let q: GraphPattern = serde_json::from_str(&text).map_err(|e| {
        GedError::InvalidPattern(format!("{}: {e}", a.pattern.display()))
    })?;
    let pre = a.preprocess.as_deref().map(Preprocessing::from_file).transpose()?;
    let matches = find_matches(
        &q,
        &g,
        MatchOptions {
            injective: a.isomorphic,
            orbit_dedup: !a.no_orbit_dedup,
        },
    );
    let table = build_pseudo_relation(&q, &matches, &g, pre.as_ref());
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    let csv_err = |e: csv::Error| GedError::Io(io::Error::other(e));
    w.write_record(table.header()).map_err(csv_err)?;
    for row in 0..table.row_count() {
        let cells = (0..table.column_count()).map(|c| table.cell(c, row).unwrap_or(""));
        w.write_record(cells).map_err(csv_err)?;
    }
    w.flush()?;
    info!("summary matches={}", table.row_count());
    Ok(())
}

fn communities(a: CommunityArgs) -> Result<(), GedError> {
    if !(a.gamma.is_finite() && a.gamma > 0.0) {
        return Err(GedError::Config(format!("gamma must be positive, got {}", a.gamma)));
    }
    let g = load(&a.graph)?;
    let assignment = detect_communities(&g, a.gamma, a.seed);
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    let csv_err = |e: csv::Error| GedError::Io(io::Error::other(e));
    w.write_record(["id", "community"]).map_err(csv_err)?;
    for v in 0..g.node_count() as u32 {
        w.write_record([g.node_id(v), &assignment.community_of(v).to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    info!("summary communities={}", assignment.len());
    Ok(())
}
