//! Rauzy classes: closure of a permutation pair under top and bottom moves.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{Letter, MoveKind, PermutationPair};

pub const DEFAULT_MAX_VERTICES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RauzyArrow {
    pub source: usize,
    pub target: usize,
    pub kind: MoveKind,
    pub winner: Letter,
    pub loser: Letter,
}

/// A Rauzy class with vertices sorted lexicographically by (top, bottom).
/// Arrow `2 * v` is the top move out of vertex `v`, arrow `2 * v + 1` the
/// bottom move.
#[derive(Debug, Clone)]
pub struct RauzyClass {
    vertices: Vec<PermutationPair>,
    arrows: Vec<RauzyArrow>,
    root: usize,
}

impl RauzyClass {
    pub fn build(root: &PermutationPair) -> Result<Self> {
        Self::build_capped(root, DEFAULT_MAX_VERTICES)
    }

    pub fn build_capped(root: &PermutationPair, max_vertices: usize) -> Result<Self> {
        if !root.is_irreducible() {
            return Err(Error::Precondition("root permutation is reducible".into()));
        }
        if root.is_degenerate() {
            return Err(Error::Precondition("root permutation is degenerate".into()));
        }
        let mut seen: HashMap<PermutationPair, ()> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(root.clone(), ());
        queue.push_back(root.clone());
        while let Some(v) = queue.pop_front() {
            for kind in MoveKind::BOTH {
                let m = v.apply_move(kind);
                if !seen.contains_key(&m.target) {
                    if seen.len() >= max_vertices {
                        return Err(Error::CapExceeded {
                            what: "Rauzy class vertex count",
                            cap: max_vertices,
                        });
                    }
                    seen.insert(m.target.clone(), ());
                    queue.push_back(m.target);
                }
            }
        }
        let mut vertices: Vec<PermutationPair> = seen.into_keys().collect();
        vertices.sort();
        let index: HashMap<&PermutationPair, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut arrows = Vec::with_capacity(2 * vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            for kind in MoveKind::BOTH {
                let m = v.apply_move(kind);
                arrows.push(RauzyArrow {
                    source: i,
                    target: index[&m.target],
                    kind,
                    winner: m.winner,
                    loser: m.loser,
                });
            }
        }
        let root = index[root];
        Ok(RauzyClass {
            vertices,
            arrows,
            root,
        })
    }

    pub fn vertices(&self) -> &[PermutationPair] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[RauzyArrow] {
        &self.arrows
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_pair(&self) -> &PermutationPair {
        &self.vertices[self.root]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, pi: &PermutationPair) -> Option<usize> {
        self.vertices.binary_search(pi).ok()
    }

    pub fn arrow(&self, vertex: usize, kind: MoveKind) -> &RauzyArrow {
        &self.arrows[2 * vertex + kind as usize]
    }

    /// Same class, different base vertex.
    pub fn rerooted(&self, root: usize) -> Self {
        assert!(root < self.len());
        RauzyClass {
            root,
            ..self.clone()
        }
    }

    /// Every closed walk of length `1..=max_len` based at the root, as arrow
    /// index sequences, in lexicographic order of the move choices.
    pub fn loops_up_to(&self, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk(self.root, max_len, &mut path, &mut out);
        out
    }

    fn walk(&self, at: usize, budget: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if budget == 0 {
            return;
        }
        for kind in MoveKind::BOTH {
            let idx = 2 * at + kind as usize;
            path.push(idx);
            let next = self.arrows[idx].target;
            if next == self.root {
                out.push(path.clone());
            }
            self.walk(next, budget - 1, path, out);
            path.pop();
        }
    }

    /// Loops at the root that generate the same group as all loops at the
    /// root: for every arrow `u -> v`, the loop `P(root, u) · arrow · P(v, root)`
    /// with `P` shortest directed paths chosen by breadth-first search
    /// (top move explored first). Returned in arrow order.
    pub fn loop_generators(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        // forward tree from the root
        let mut to: Vec<Option<usize>> = vec![None; n];
        let mut visited = vec![false; n];
        visited[self.root] = true;
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            for kind in MoveKind::BOTH {
                let idx = 2 * u + kind as usize;
                let v = self.arrows[idx].target;
                if !visited[v] {
                    visited[v] = true;
                    to[v] = Some(idx);
                    queue.push_back(v);
                }
            }
        }
        // backward tree into the root
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (idx, a) in self.arrows.iter().enumerate() {
            incoming[a.target].push(idx);
        }
        let mut back: Vec<Option<usize>> = vec![None; n];
        let mut visited = vec![false; n];
        visited[self.root] = true;
        let mut queue = VecDeque::from([self.root]);
        while let Some(v) = queue.pop_front() {
            for &idx in &incoming[v] {
                let u = self.arrows[idx].source;
                if !visited[u] {
                    visited[u] = true;
                    back[u] = Some(idx);
                    queue.push_back(u);
                }
            }
        }
        let path_to = |mut v: usize| {
            let mut p = Vec::new();
            while let Some(idx) = to[v] {
                p.push(idx);
                v = self.arrows[idx].source;
            }
            p.reverse();
            p
        };
        let path_back = |mut u: usize| {
            let mut p = Vec::new();
            while let Some(idx) = back[u] {
                p.push(idx);
                u = self.arrows[idx].target;
            }
            p
        };
        self.arrows
            .iter()
            .enumerate()
            .map(|(idx, a)| {
                let mut w = path_to(a.source);
                w.push(idx);
                w.extend(path_back(a.target));
                w
            })
            .collect()
    }

    /// True when `word` is a directed walk starting and ending at the root.
    pub fn is_root_loop(&self, word: &[usize]) -> bool {
        let mut at = self.root;
        for &idx in word {
            match self.arrows.get(idx) {
                Some(a) if a.source == at => at = a.target,
                _ => return false,
            }
        }
        at == self.root
    }
}
