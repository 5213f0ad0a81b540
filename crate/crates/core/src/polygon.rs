//! Corner combinatorics of the suspension polygon `P_π`.
//!
//! Vertices are numbered counter-clockwise starting at the origin:
//! `B_0, B_1, ..., B_d, T_{d-1}, ..., T_1`, where `B_m` (resp. `T_k`) is the
//! endpoint of the `m`-th bottom (resp. `k`-th top) edge. `B_0 = T_0` and
//! `B_d = T_d`. Each letter labels one top and one bottom edge, glued by a
//! translation.

use serde::Serialize;

use crate::geom::{self, Pt};
use crate::perm::{Letter, PermutationPair};

/// Vertex index of `T_k`.
pub fn top_vertex(d: usize, k: usize) -> usize {
    match k {
        0 => 0,
        k if k == d => d,
        k => 2 * d - k,
    }
}

/// Vertex index of `B_m`.
pub fn bottom_vertex(_d: usize, m: usize) -> usize {
    m
}

/// Canonical integer suspension data: `λ = 1`, `τ_α = π_b(α) - π_t(α)`.
pub fn canonical_zeta(pi: &PermutationPair) -> Vec<Pt> {
    let pt = pi.top_positions();
    let pb = pi.bottom_positions();
    (0..pi.d())
        .map(|a| [1, pb[a] as i64 - pt[a] as i64])
        .collect()
}

/// Vertex coordinates in counter-clockwise order for edge vectors `zeta`.
pub fn polygon_vertices(pi: &PermutationPair, zeta: &[Pt]) -> Vec<Pt> {
    let d = pi.d();
    let mut v = vec![[0, 0]; 2 * d];
    let mut acc = [0, 0];
    for (m, l) in pi.bottom().iter().enumerate() {
        acc = geom::add(acc, zeta[l.index()]);
        v[bottom_vertex(d, m + 1)] = acc;
    }
    let mut acc = [0, 0];
    for (k, l) in pi.top().iter().enumerate().take(d - 1) {
        acc = geom::add(acc, zeta[l.index()]);
        v[top_vertex(d, k + 1)] = acc;
    }
    v
}

/// The two copies of an edge: `(start, end)` vertex indices, oriented along
/// the edge vector `ζ_α` (left to right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeCopies {
    pub top: (usize, usize),
    pub bottom: (usize, usize),
}

pub fn edge_copies(pi: &PermutationPair) -> Vec<EdgeCopies> {
    let d = pi.d();
    let pt = pi.top_positions();
    let pb = pi.bottom_positions();
    (0..d)
        .map(|a| EdgeCopies {
            top: (top_vertex(d, pt[a] - 1), top_vertex(d, pt[a])),
            bottom: (bottom_vertex(d, pb[a] - 1), bottom_vertex(d, pb[a])),
        })
        .collect()
}

/// Identification of polygon corners into singularities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Corners {
    /// Singularity id of every vertex, numbered by first appearance in
    /// counter-clockwise vertex order.
    pub singularity: Vec<usize>,
    /// Cone angle of each singularity divided by `2π`.
    pub cone_orders: Vec<u32>,
    /// `(left, right)` endpoint singularity of every letter's edge.
    pub endpoints: Vec<(usize, usize)>,
}

impl Corners {
    pub fn of(pi: &PermutationPair) -> Self {
        let d = pi.d();
        let copies = edge_copies(pi);
        let mut parent: Vec<usize> = (0..2 * d).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut x = x;
            while p[x] != r {
                let nx = p[x];
                p[x] = r;
                x = nx;
            }
            r
        }
        for c in &copies {
            for (a, b) in [(c.top.0, c.bottom.0), (c.top.1, c.bottom.1)] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut id_of_root = vec![usize::MAX; 2 * d];
        let mut singularity = vec![0; 2 * d];
        let mut s = 0;
        for v in 0..2 * d {
            let r = find(&mut parent, v);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = s;
                s += 1;
            }
            singularity[v] = id_of_root[r];
        }

        // Cone angles: the corner sectors around a singularity chain into a
        // cover of the full cone, so counting the sectors whose half-open
        // angular range contains a fixed reference direction counts turns.
        let verts = polygon_vertices(pi, &canonical_zeta(pi));
        let n = 2 * d;
        let reference: Pt = [-1, 0];
        let mut cone_orders = vec![0u32; s];
        for v in 0..n {
            let out = geom::sub(verts[(v + 1) % n], verts[v]);
            let inn = geom::sub(verts[(v + n - 1) % n], verts[v]);
            if geom::in_half_open_sector(out, inn, reference) {
                cone_orders[singularity[v]] += 1;
            }
        }
        let endpoints = copies
            .iter()
            .map(|c| (singularity[c.bottom.0], singularity[c.bottom.1]))
            .collect();
        Corners {
            singularity,
            cone_orders,
            endpoints,
        }
    }

    pub fn count(&self) -> usize {
        self.cone_orders.len()
    }

    pub fn endpoints_of(&self, l: Letter) -> (usize, usize) {
        self.endpoints[l.index()]
    }
}

/// Genus and cone orders of the stratum a permutation pair represents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumSignature {
    pub genus: usize,
    /// Cone orders per singularity id.
    pub cone_orders: Vec<u32>,
    pub singularity_count: usize,
}

impl StratumSignature {
    pub fn of(pi: &PermutationPair) -> Self {
        let corners = Corners::of(pi);
        let s = corners.count();
        let genus = (pi.d() + 1 - s) / 2;
        StratumSignature {
            genus,
            cone_orders: corners.cone_orders,
            singularity_count: s,
        }
    }

    /// Cone orders sorted in decreasing order.
    pub fn sorted_orders(&self) -> Vec<u32> {
        let mut v = self.cone_orders.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// `Σ(κ - 1) = 2g - 2` and `d = 2g + s - 1`.
    pub fn is_consistent(&self, d: usize) -> bool {
        let excess: i64 = self.cone_orders.iter().map(|&k| k as i64 - 1).sum();
        excess == 2 * self.genus as i64 - 2 && d == 2 * self.genus + self.singularity_count - 1
    }

    /// `H(k_1 - 1, ..., k_s - 1)` notation.
    pub fn label(&self) -> String {
        let zs: Vec<String> = self
            .sorted_orders()
            .iter()
            .map(|k| (k - 1).to_string())
            .collect();
        format!("H({})", zs.join(","))
    }
}
