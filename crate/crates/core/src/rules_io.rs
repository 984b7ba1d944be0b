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

//! Rule files: one JSON object per line.

use std::io::{BufRead, BufReader, Read, Write};

use crate::depminer::Ged;
use crate::error::{GedError, Result};

/// Writes one line per rule and returns the number written.
pub fn serialize_rules<W: Write>(rules: &[Ged], mut sink: W) -> Result<usize> {
    for r in rules {
        serde_json::to_writer(&mut sink, r).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(rules.len())
}

/// Reads rules written by [`serialize_rules`]. Blank lines are skipped.
pub fn parse_rules<R: Read>(source: R) -> Result<Vec<Ged>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let lineno = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Ged = serde_json::from_str(&line).map_err(|e| GedError::parse("rules", lineno, e.to_string()))?;
        let mut rule = Ged::new(raw.pattern, raw.lhs, raw.rhs)
            .map_err(|e| GedError::parse("rules", lineno, e.to_string()))?;
        rule.stats = raw.stats;
        rule.rank = raw.rank;
        out.push(rule);
    }
    Ok(out)
}
