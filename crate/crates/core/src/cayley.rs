//! Cayley graphs `Cay(G, T ∪ T⁻¹)` with right multiplication, stored as a
//! dense neighbour table.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modq::{GroupClosure, ModMatrix};

/// A `2|T|`-regular multigraph. Row `v` lists `v·t_1, ..., v·t_k` followed by
/// `v·t_1⁻¹, ..., v·t_k⁻¹`.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    n: usize,
    degree: usize,
    adjacency: Vec<u32>,
}

impl CayleyGraph {
    /// Build from the right actions of the generators (each a permutation
    /// of `0..n`).
    pub fn from_permutations(n: usize, actions: &[Vec<u32>]) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::Overflow("Cayley graph vertex count"));
        }
        let k = actions.len();
        let degree = 2 * k;
        let mut adjacency = vec![0u32; n * degree];
        for (j, f) in actions.iter().enumerate() {
            if f.len() != n {
                return Err(Error::Precondition(
                    "generator action has the wrong length".into(),
                ));
            }
            let mut hit = vec![false; n];
            for (v, &w) in f.iter().enumerate() {
                let w = w as usize;
                if w >= n || std::mem::replace(&mut hit[w], true) {
                    return Err(Error::Precondition(
                        "generator action is not a permutation".into(),
                    ));
                }
                adjacency[v * degree + j] = w as u32;
                adjacency[w * degree + k + j] = v as u32;
            }
        }
        Ok(CayleyGraph {
            n,
            degree,
            adjacency,
        })
    }

    /// Cayley graph of a closure with generating multiset `t`.
    pub fn from_group(group: &GroupClosure, t: &[ModMatrix], exec: Exec) -> Result<Self> {
        let n = group.order();
        let k = t.len();
        let degree = 2 * k;
        let mut adjacency = vec![0u32; n * degree];
        for (j, g) in t.iter().enumerate() {
            let f = group
                .right_action(g, exec)
                .map_err(|_| Error::Precondition(format!("generator {j} is outside the group")))?;
            for (v, &w) in f.iter().enumerate() {
                adjacency[v * degree + j] = w;
                adjacency[w as usize * degree + k + j] = v as u32;
            }
        }
        Ok(CayleyGraph {
            n,
            degree,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.adjacency[v * self.degree..(v + 1) * self.degree]
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut count = 1;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbours(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    queue.push_back(w as usize);
                }
            }
        }
        count == self.n
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64], exec: Exec) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let d = self.degree;
        let adj = &self.adjacency;
        exec.fill(y, |v| {
            adj[v * d..(v + 1) * d].iter().map(|&w| x[w as usize]).sum()
        });
    }

    /// Multiplicity of the edge `v → w`.
    pub fn edge_multiplicity(&self, v: usize, w: usize) -> usize {
        self.neighbours(v)
            .iter()
            .filter(|&&u| u as usize == w)
            .count()
    }
}
