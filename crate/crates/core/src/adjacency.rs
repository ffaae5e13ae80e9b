//! Undirected simple graphs over `0..size`.
//!
//! Graphs up to [`DENSE_LIMIT`] nodes are stored as a packed bit matrix;
//! larger ones as sorted neighbor lists. Both representations expose the same
//! queries and compare equal when they hold the same edge set.

use crate::error::{Error, Result};

pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub enum Adjacency {
    Dense {
        size: usize,
        words: usize,
        bits: Vec<u64>,
        edges: usize,
    },
    Sparse {
        size: usize,
        neighbors: Vec<Vec<u32>>,
        edges: usize,
    },
}

impl Adjacency {
    pub fn empty(size: usize) -> Self {
        if size <= DENSE_LIMIT {
            let words = size.div_ceil(64);
            Adjacency::Dense {
                size,
                words,
                bits: vec![0; words * size],
                edges: 0,
            }
        } else {
            Adjacency::Sparse {
                size,
                neighbors: vec![Vec::new(); size],
                edges: 0,
            }
        }
    }

    /// Builds a graph from an edge list. Rejects self-loops and out-of-range
    /// endpoints; duplicate edges are merged.
    pub fn from_edges(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = Adjacency::empty(size);
        for &(a, b) in edges {
            if a >= size || b >= size {
                return Err(Error::Shape(format!(
                    "edge ({a}, {b}) out of range for {size} nodes"
                )));
            }
            if a == b {
                return Err(Error::Shape(format!("self-loop at node {a}")));
            }
            adj.insert(a, b);
        }
        adj.finish();
        Ok(adj)
    }

    pub fn size(&self) -> usize {
        match self {
            Adjacency::Dense { size, .. } | Adjacency::Sparse { size, .. } => *size,
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            Adjacency::Dense { edges, .. } | Adjacency::Sparse { edges, .. } => *edges,
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        match self {
            Adjacency::Dense { words, bits, .. } => bits[a * words + b / 64] >> (b % 64) & 1 == 1,
            Adjacency::Sparse { neighbors, .. } => neighbors[a].binary_search(&(b as u32)).is_ok(),
        }
    }

    /// Inserts an edge. Sparse neighbor lists are left unsorted until
    /// [`Adjacency::finish`] runs.
    pub(crate) fn insert(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        match self {
            Adjacency::Dense {
                words, bits, edges, ..
            } => {
                let w = a * *words + b / 64;
                if bits[w] >> (b % 64) & 1 == 0 {
                    bits[w] |= 1 << (b % 64);
                    bits[b * *words + a / 64] |= 1 << (a % 64);
                    *edges += 1;
                }
            }
            Adjacency::Sparse {
                neighbors, edges, ..
            } => {
                neighbors[a].push(b as u32);
                neighbors[b].push(a as u32);
                *edges += 1;
            }
        }
    }

    pub(crate) fn finish(&mut self) {
        if let Adjacency::Sparse {
            neighbors, edges, ..
        } = self
        {
            let mut total = 0;
            for list in neighbors.iter_mut() {
                list.sort_unstable();
                list.dedup();
                total += list.len();
            }
            *edges = total / 2;
        }
    }

    /// Neighbors of `a` in increasing order.
    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        match self {
            Adjacency::Dense {
                size, words, bits, ..
            } => {
                let row = &bits[a * words..(a + 1) * words];
                let mut out = Vec::new();
                for (w, &word) in row.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let bit = word.trailing_zeros() as usize;
                        let node = w * 64 + bit;
                        if node < *size {
                            out.push(node);
                        }
                        word &= word - 1;
                    }
                }
                out
            }
            Adjacency::Sparse { neighbors, .. } => {
                neighbors[a].iter().map(|&x| x as usize).collect()
            }
        }
    }

    pub fn degree(&self, a: usize) -> usize {
        match self {
            Adjacency::Dense { words, bits, .. } => bits[a * words..(a + 1) * words]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum(),
            Adjacency::Sparse { neighbors, .. } => neighbors[a].len(),
        }
    }

    /// All edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for a in 0..self.size() {
            for b in self.neighbors(a) {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Neighbor lists for every node; the form used by the search kernels.
    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        (0..self.size()).map(|a| self.neighbors(a)).collect()
    }

    /// Number of edges whose endpoints carry different labels.
    pub fn cut_size(&self, label: &[bool]) -> usize {
        let mut cut = 0;
        for a in 0..self.size() {
            for b in self.neighbors(a) {
                if a < b && label[a] != label[b] {
                    cut += 1;
                }
            }
        }
        cut
    }

    pub fn is_symmetric_without_loops(&self) -> bool {
        (0..self.size()).all(|a| {
            self.neighbors(a)
                .into_iter()
                .all(|b| b != a && self.has_edge(b, a))
        })
    }

    /// Same graph with nodes relabeled: node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Adjacency {
        let edges: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (perm[a], perm[b]))
            .collect();
        Adjacency::from_edges(self.size(), &edges).expect("permutation keeps edges valid")
    }
}

impl PartialEq for Adjacency {
    fn eq(&self, other: &Self) -> bool {
        self.size() == other.size()
            && self.edge_count() == other.edge_count()
            && self.edges() == other.edges()
    }
}

impl Eq for Adjacency {}
