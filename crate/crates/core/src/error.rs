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

use thiserror::Error;

pub type Result<T, E = GedError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GedError {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("edge on line {line} references missing node id `{id}`")]
    DanglingEdge { line: u64, id: String },

    #[error("duplicate node id `{id}` on line {line}")]
    DuplicateNode { line: u64, id: String },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("community assignment does not match graph: {0}")]
    Assignment(String),

    #[error("unknown column {var}.{attr} in match table")]
    Schema { var: String, attr: String },

    #[error("rank undefined: {0}")]
    UndefinedRank(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<GedError>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl GedError {
    pub(crate) fn parse(source_name: &str, line: u64, message: impl Into<String>) -> Self {
        GedError::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        GedError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by the input data or files rather than by the
    /// configuration.
    pub fn is_data_error(&self) -> bool {
        if let GedError::Stage { source, .. } = self {
            return source.is_data_error();
        }
        matches!(
            self,
            GedError::Parse { .. }
                | GedError::DanglingEdge { .. }
                | GedError::DuplicateNode { .. }
                | GedError::InvalidPattern(_)
                | GedError::Schema { .. }
                | GedError::Io(_)
        )
    }
}
