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

//! Writes a synthetic graph: `generate <nodes.csv> <edges.csv> [nodes] [edges] [seed]`.

use std::env;
use std::path::Path;
use std::process::ExitCode;

use gedmine_bench::{write_csv, SyntheticSpec};

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    if args.len() < 2 {
        eprintln!("usage: generate <nodes.csv> <edges.csv> [nodes] [edges] [seed]");
        return ExitCode::from(1);
    }
    let mut spec = SyntheticSpec::default();
    let num = |i: usize, default: u64| args.get(i).map_or(Ok(default), |s| s.parse::<u64>());
    match (num(2, spec.nodes as u64), num(3, spec.edges as u64), num(4, spec.seed)) {
        (Ok(n), Ok(e), Ok(s)) => {
            spec.nodes = n as usize;
            spec.edges = e as usize;
            spec.seed = s;
        }
        _ => {
            eprintln!("error: sizes and seed must be non-negative integers");
            return ExitCode::from(1);
        }
    }
    if let Err(e) = write_csv(&spec, Path::new(&args[0]), Path::new(&args[1])) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
