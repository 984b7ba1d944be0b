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

//! Partitions of match-table rows into equivalence classes.

use std::collections::HashMap;
use std::hash::Hash;

/// Disjoint, non-empty blocks of row ids. Rows outside every block do not
/// satisfy the literal set the partition belongs to.
///
/// Blocks are stored contiguously; rows within a block ascend and blocks
/// are ordered by their first row, so two partitions are equal exactly when
/// they group the same rows the same way.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    rows: Vec<u32>,
    offsets: Vec<u32>,
    total_rows: usize,
}

impl Partition {
    /// No rows satisfy.
    pub fn empty(total_rows: usize) -> Self {
        Partition {
            rows: Vec::new(),
            offsets: vec![0],
            total_rows,
        }
    }

    /// One block holding every row: the partition of the empty literal set.
    pub fn all(total_rows: usize) -> Self {
        if total_rows == 0 {
            return Self::empty(0);
        }
        Partition {
            rows: (0..total_rows as u32).collect(),
            offsets: vec![0, total_rows as u32],
            total_rows,
        }
    }

    /// Groups rows by key; rows with `None` fall outside every block.
    pub fn from_keys<K, I>(keys: I) -> Self
    where
        K: Eq + Hash,
        I: IntoIterator<Item = Option<K>>,
    {
        let mut block_of: HashMap<K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut total_rows = 0;
        for (row, key) in keys.into_iter().enumerate() {
            total_rows = row + 1;
            if let Some(k) = key {
                let b = *block_of.entry(k).or_insert_with(|| {
                    blocks.push(Vec::new());
                    blocks.len() - 1
                });
                blocks[b].push(row as u32);
            }
        }
        Self::from_sorted_blocks(blocks, total_rows)
    }

    /// Builds a partition from explicit blocks. Blocks may be given in any
    /// order; empty blocks are dropped.
    pub fn from_blocks(mut blocks: Vec<Vec<u32>>, total_rows: usize) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
            b.dedup();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_unstable_by_key(|b| b[0]);
        Self::from_sorted_blocks(blocks, total_rows)
    }

    fn from_sorted_blocks(blocks: Vec<Vec<u32>>, total_rows: usize) -> Self {
        let mut rows = Vec::with_capacity(blocks.iter().map(Vec::len).sum());
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in blocks {
            rows.extend_from_slice(&b);
            offsets.push(rows.len() as u32);
        }
        Partition {
            rows,
            offsets,
            total_rows,
        }
    }

    pub fn total_rows(&self) -> usize {
        self.total_rows
    }

    pub fn block_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Rows lying in some block.
    pub fn covered_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn block(&self, i: usize) -> &[u32] {
        &self.rows[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.block_count()).map(move |i| self.block(i))
    }

    /// Blocks as owned vectors, for inspection and tests.
    pub fn to_blocks(&self) -> Vec<Vec<u32>> {
        self.blocks().map(<[u32]>::to_vec).collect()
    }

    /// Block-wise intersection: rows are together iff they are together in
    /// both partitions.
    pub fn intersect(&self, other: &Partition) -> Partition {
        let mut scratch = vec![u32::MAX; self.total_rows.max(other.total_rows)];
        self.intersect_with(other, &mut scratch)
    }

    /// As [`Partition::intersect`], reusing `scratch`, which must hold at
    /// least `total_rows` entries set to `u32::MAX` and is left that way.
    pub fn intersect_with(&self, other: &Partition, scratch: &mut [u32]) -> Partition {
        let (small, large) = if self.covered_rows() <= other.covered_rows() {
            (self, other)
        } else {
            (other, self)
        };
        for (i, b) in small.blocks().enumerate() {
            for &r in b {
                scratch[r as usize] = i as u32;
            }
        }
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut local: HashMap<u32, usize> = HashMap::new();
        for b in large.blocks() {
            local.clear();
            for &r in b {
                let s = scratch[r as usize];
                if s == u32::MAX {
                    continue;
                }
                let slot = *local.entry(s).or_insert_with(|| {
                    blocks.push(Vec::new());
                    blocks.len() - 1
                });
                blocks[slot].push(r);
            }
        }
        for b in small.blocks() {
            for &r in b {
                scratch[r as usize] = u32::MAX;
            }
        }
        // rows within each block ascend already; order blocks by first row
        blocks.sort_unstable_by_key(|b| b[0]);
        Self::from_sorted_blocks(blocks, self.total_rows.max(other.total_rows))
    }

    /// For `refined` obtained by intersecting `self` with something: true
    /// when the intersection changed nothing.
    pub fn same_as_refinement(&self, refined: &Partition) -> bool {
        self.covered_rows() == refined.covered_rows() && self.block_count() == refined.block_count()
    }
}
