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

//! Literals over pattern variables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GedError, Result};
use crate::graph::{PropertyGraph, ID_ATTRIBUTE};
use crate::pattern::GraphPattern;

/// `x.A = c`, `x.A = y.B` or `x.id = y.id`.
///
/// Variable and id literals are stored with their two sides in canonical
/// order, so `x.A = y.B` and `y.B = x.A` are the same value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawLiteral")]
pub enum Literal {
    Constant {
        var: String,
        attr: String,
        value: String,
    },
    Variable {
        var: String,
        attr: String,
        other_var: String,
        other_attr: String,
    },
    Id {
        var: String,
        other_var: String,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawLiteral {
    Constant {
        var: String,
        attr: String,
        value: String,
    },
    Variable {
        var: String,
        attr: String,
        other_var: String,
        other_attr: String,
    },
    Id {
        var: String,
        other_var: String,
    },
}

impl TryFrom<RawLiteral> for Literal {
    type Error = GedError;

    fn try_from(raw: RawLiteral) -> Result<Self> {
        match raw {
            RawLiteral::Constant { var, attr, value } => Literal::constant(&var, &attr, &value),
            RawLiteral::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => Literal::variable(&var, &attr, &other_var, &other_attr),
            RawLiteral::Id { var, other_var } => Literal::id(&var, &other_var),
        }
    }
}

fn check_attr(attr: &str) -> Result<()> {
    if attr == ID_ATTRIBUTE {
        return Err(GedError::InvalidPattern(
            "the id attribute may only appear in id literals".to_string(),
        ));
    }
    Ok(())
}

impl Literal {
    pub fn constant(var: &str, attr: &str, value: &str) -> Result<Self> {
        check_attr(attr)?;
        Ok(Literal::Constant {
            var: var.to_string(),
            attr: attr.to_string(),
            value: value.to_string(),
        })
    }

    pub fn variable(var: &str, attr: &str, other_var: &str, other_attr: &str) -> Result<Self> {
        check_attr(attr)?;
        check_attr(other_attr)?;
        if var == other_var && attr == other_attr {
            return Err(GedError::InvalidPattern(format!("literal {var}.{attr} = {var}.{attr} is trivial")));
        }
        let (a, b) = if (var, attr) <= (other_var, other_attr) {
            ((var, attr), (other_var, other_attr))
        } else {
            ((other_var, other_attr), (var, attr))
        };
        Ok(Literal::Variable {
            var: a.0.to_string(),
            attr: a.1.to_string(),
            other_var: b.0.to_string(),
            other_attr: b.1.to_string(),
        })
    }

    pub fn id(var: &str, other_var: &str) -> Result<Self> {
        if var == other_var {
            return Err(GedError::InvalidPattern(format!("literal {var}.id = {var}.id is trivial")));
        }
        let (a, b) = if var <= other_var { (var, other_var) } else { (other_var, var) };
        Ok(Literal::Id {
            var: a.to_string(),
            other_var: b.to_string(),
        })
    }

    pub fn is_id(&self) -> bool {
        matches!(self, Literal::Id { .. })
    }

    /// The `(variable, attribute)` slots the literal constrains; id literals
    /// constrain the id attribute of both variables.
    pub fn slots(&self) -> Vec<(&str, &str)> {
        match self {
            Literal::Constant { var, attr, .. } => vec![(var, attr)],
            Literal::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => vec![(var, attr), (other_var, other_attr)],
            Literal::Id { var, other_var } => vec![(var, ID_ATTRIBUTE), (other_var, ID_ATTRIBUTE)],
        }
    }

    /// Fails if the literal mentions a variable `q` does not have.
    pub fn check_variables(&self, q: &GraphPattern) -> Result<()> {
        for (var, attr) in self.slots() {
            if q.var_index(var).is_none() {
                return Err(GedError::Schema {
                    var: var.to_string(),
                    attr: attr.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Evaluates the literal on a binding of `q`'s variables to nodes of
    /// `g`. Missing attributes make the literal false.
    pub fn holds(&self, q: &GraphPattern, g: &PropertyGraph, binding: &[u32]) -> bool {
        let node = |var: &str| q.var_index(var).map(|i| binding[i]);
        match self {
            Literal::Constant { var, attr, value } => {
                node(var).and_then(|v| g.attribute(v, attr)) == Some(value.as_str())
            }
            Literal::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => {
                let a = node(var).and_then(|v| g.attribute(v, attr));
                let b = node(other_var).and_then(|v| g.attribute(v, other_attr));
                a.is_some() && a == b
            }
            Literal::Id { var, other_var } => match (node(var), node(other_var)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Constant { var, attr, value } => write!(f, "{var}.{attr}={value:?}"),
            Literal::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => write!(f, "{var}.{attr}={other_var}.{other_attr}"),
            Literal::Id { var, other_var } => write!(f, "{var}.id={other_var}.id"),
        }
    }
}

/// True if `rhs` follows from `lhs` by reflexivity, symmetry and
/// transitivity of equality alone.
pub fn is_trivial(lhs: &[Literal], rhs: &Literal) -> bool {
    if lhs.contains(rhs) {
        return true;
    }
    // union-find over terms: slots and constants
    let mut terms: Vec<String> = Vec::new();
    let index = |t: String, terms: &mut Vec<String>| -> usize {
        match terms.iter().position(|x| *x == t) {
            Some(i) => i,
            None => {
                terms.push(t);
                terms.len() - 1
            }
        }
    };
    let sides = |l: &Literal| -> (String, String) {
        match l {
            Literal::Constant { var, attr, value } => (format!("s:{var}.{attr}"), format!("c:{value}")),
            Literal::Variable {
                var,
                attr,
                other_var,
                other_attr,
            } => (format!("s:{var}.{attr}"), format!("s:{other_var}.{other_attr}")),
            Literal::Id { var, other_var } => (format!("s:{var}.id"), format!("s:{other_var}.id")),
        }
    };
    let mut pairs = Vec::new();
    for l in lhs {
        let (a, b) = sides(l);
        pairs.push((index(a, &mut terms), index(b, &mut terms)));
    }
    let (a, b) = sides(rhs);
    let (ra, rb) = (index(a, &mut terms), index(b, &mut terms));
    let mut parent: Vec<usize> = (0..terms.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (a, b) in pairs {
        let (x, y) = (find(&mut parent, a), find(&mut parent, b));
        parent[x] = y;
    }
    find(&mut parent, ra) == find(&mut parent, rb)
}
