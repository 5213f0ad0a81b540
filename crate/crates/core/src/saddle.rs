//! Saddle connection enumeration by planar unfolding.
//!
//! From every polygon corner we sweep the directions of its sector. A node of
//! the search is a translated copy of the polygon together with an open
//! window of directions whose rays all enter the copy through the same side.
//! Directions towards copy vertices split the window; a direction whose ray
//! first meets a vertex is a saddle connection, and every maximal run of
//! directions between such hits leaves the copy through one side and becomes
//! a child window in the glued neighbour. Copies whose exit side is farther
//! than `L` are pruned. All predicates are exact integer arithmetic.

use std::cmp::Ordering;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geom::{self, Frac, Pt};
use crate::surface::{Side, SuspensionSurface, Q};

pub const DEFAULT_MAX_NODES: usize = 50_000_000;

/// A directed saddle connection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SaddleConnection {
    /// Exact holonomy vector.
    pub holonomy: (Q, Q),
    /// Holonomy multiplied by the surface's common denominator.
    pub scaled_holonomy: Pt,
    pub start: usize,
    pub end: usize,
    /// Polygon corners the connection leaves and arrives at.
    pub start_corner: usize,
    pub end_corner: usize,
    /// Sides crossed in order, as `(letter, sign)`, `+1` when leaving a copy
    /// through its top side.
    pub crossings: Vec<(usize, i8)>,
    /// Relative homology class in `Z^A`.
    pub class: Vec<i64>,
}

impl SaddleConnection {
    /// Squared Euclidean length.
    pub fn length2(&self) -> Q {
        self.holonomy.0 * self.holonomy.0 + self.holonomy.1 * self.holonomy.1
    }

    /// `Σ n_α ζ_α` equals the holonomy.
    pub fn holonomy_consistent(&self, s: &SuspensionSurface) -> bool {
        s.holonomy_of(&self.class) == self.holonomy
    }

    /// `δ(class) = z_end - z_start`.
    pub fn boundary_consistent(&self, s: &SuspensionSurface) -> bool {
        s.boundary().apply(&self.class) == s.boundary().chain(self.start, self.end)
    }

    fn order_key(&self, other: &Self) -> Ordering {
        geom::angle_cmp(self.scaled_holonomy, other.scaled_holonomy)
            .then_with(|| {
                geom::norm2(self.scaled_holonomy).cmp(&geom::norm2(other.scaled_holonomy))
            })
            .then_with(|| self.start.cmp(&other.start))
            .then_with(|| self.end.cmp(&other.end))
            .then_with(|| self.class.cmp(&other.class))
            .then_with(|| self.crossings.cmp(&other.crossings))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    pub max_nodes: usize,
    pub exec: Exec,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            max_nodes: DEFAULT_MAX_NODES,
            exec: Exec::default(),
        }
    }
}

struct Node {
    offset: Pt,
    lo: Pt,
    hi: Pt,
    entry: Option<usize>,
    acc: Vec<i64>,
    crossings: Vec<(usize, i8)>,
}

#[derive(Debug, Clone, Copy)]
enum Hit {
    Vertex(usize),
    Side(usize),
}

struct Search<'a> {
    s: &'a SuspensionSurface,
    corner: usize,
    origin: Pt,
    /// `(L · scale)²` as a fraction.
    limit2: Frac,
    max_nodes: usize,
    nodes: usize,
    out: Vec<SaddleConnection>,
}

impl Search<'_> {
    fn copy_vertex(&self, offset: Pt, j: usize) -> Pt {
        geom::add(self.s.vertices()[j], offset)
    }

    fn side_segment(&self, offset: Pt, i: usize) -> (Pt, Pt) {
        let side = self.s.sides()[i];
        (
            self.copy_vertex(offset, side.from),
            self.copy_vertex(offset, side.to),
        )
    }

    fn within(&self, h: Pt) -> bool {
        Frac::new(geom::norm2(h), 1) <= self.limit2
    }

    /// First boundary contact of the ray `origin + t·u` after it enters the
    /// copy.
    fn first_hit(&self, node: &Node, u: Pt) -> Hit {
        let entry_s = match node.entry {
            Some(e) => {
                let (p, q) = self.side_segment(node.offset, e);
                geom::ray_crosses_segment_interior(self.origin, u, p, q)
                    .expect("ray crosses its entry side")
            }
            None => Frac::zero(),
        };
        let mut best: Option<(Frac, Hit)> = None;
        let mut consider = |t: Frac, h: Hit| {
            if t > entry_s && best.as_ref().map_or(true, |(b, _)| t < *b) {
                best = Some((t, h));
            }
        };
        let n = self.s.vertices().len();
        for i in 0..n {
            if Some(i) == node.entry {
                continue;
            }
            let (p, q) = self.side_segment(node.offset, i);
            if let Some(t) = geom::ray_crosses_segment_interior(self.origin, u, p, q) {
                consider(t, Hit::Side(i));
            }
        }
        for j in 0..n {
            let w = self.copy_vertex(node.offset, j);
            if let Some(t) = geom::ray_through_point(self.origin, u, w) {
                consider(t, Hit::Vertex(j));
            }
        }
        best.expect("a ray inside the polygon meets its boundary").1
    }

    fn emit(&mut self, node: &Node, j: usize) {
        let w = self.copy_vertex(node.offset, j);
        let h = geom::sub(w, self.origin);
        if !self.within(h) {
            return;
        }
        let class: Vec<i64> = node
            .acc
            .iter()
            .zip(self.s.position(j))
            .map(|(a, p)| a + p)
            .collect();
        let scale = self.s.scale();
        self.out.push(SaddleConnection {
            holonomy: (Ratio::new(h[0], scale), Ratio::new(h[1], scale)),
            scaled_holonomy: h,
            start: self.s.singularity_of_vertex(self.corner),
            end: self.s.singularity_of_vertex(j),
            start_corner: self.corner,
            end_corner: j,
            crossings: node.crossings.clone(),
            class,
        });
    }

    fn child(&self, node: &Node, lo: Pt, hi: Pt, exit: usize) -> Option<Node> {
        let (p, q) = self.side_segment(node.offset, exit);
        if geom::dist2_point_segment(self.origin, p, q) > self.limit2 {
            return None;
        }
        let side = self.s.sides()[exit];
        let partner = self.s.sides()[side.partner];
        let v = self.s.vertices();
        let offset = geom::add(node.offset, geom::sub(v[side.left], v[partner.left]));
        let acc = node
            .acc
            .iter()
            .zip(
                self.s
                    .position(side.left)
                    .iter()
                    .zip(self.s.position(partner.left)),
            )
            .map(|(a, (x, y))| a + x - y)
            .collect();
        let mut crossings = node.crossings.clone();
        crossings.push((side.letter, if side.side == Side::Top { 1 } else { -1 }));
        Some(Node {
            offset,
            lo,
            hi,
            entry: Some(side.partner),
            acc,
            crossings,
        })
    }

    fn expand(&mut self, node: Node, stack: &mut Vec<Node>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::CapExceeded {
                what: "saddle connection search nodes",
                cap: self.max_nodes,
            });
        }
        let n = self.s.vertices().len();
        let mut dirs: Vec<Pt> = (0..n)
            .map(|j| geom::sub(self.copy_vertex(node.offset, j), self.origin))
            .filter(|&u| u != [0, 0] && geom::in_open_sector(node.lo, node.hi, u))
            .collect();
        if node.entry.is_none() {
            // keep every elementary interval of the root sector below a half turn
            let o = node.lo;
            for u in [[-o[1], o[0]], [-o[0], -o[1]], [o[1], -o[0]]] {
                if geom::in_open_sector(node.lo, node.hi, u) {
                    dirs.push(u);
                }
            }
        }
        let lo = node.lo;
        dirs.sort_by(|a, b| geom::angle_cmp_from(lo, *a, *b));
        dirs.dedup_by(|a, b| geom::same_direction(*a, *b));

        let mut bounds = Vec::with_capacity(dirs.len() + 2);
        bounds.push(node.lo);
        bounds.extend_from_slice(&dirs);
        bounds.push(node.hi);
        let exit_of = |k: usize, this: &Self| -> usize {
            let rep = geom::add(bounds[k], bounds[k + 1]);
            match this.first_hit(&node, rep) {
                Hit::Side(i) => i,
                Hit::Vertex(_) => {
                    unreachable!("open interval between critical directions hit a vertex")
                }
            }
        };
        let mut run_lo = node.lo;
        let mut run_exit = exit_of(0, self);
        let mut children = Vec::new();
        for (k, &u) in dirs.iter().enumerate() {
            match self.first_hit(&node, u) {
                Hit::Vertex(j) => {
                    self.emit(&node, j);
                    children.push((run_lo, u, run_exit));
                    run_lo = u;
                    run_exit = exit_of(k + 1, self);
                }
                Hit::Side(i) => debug_assert_eq!(i, run_exit),
            }
        }
        children.push((run_lo, node.hi, run_exit));
        for (a, b, f) in children {
            if let Some(c) = self.child(&node, a, b, f) {
                stack.push(c);
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<(Vec<SaddleConnection>, usize)> {
        let v = self.s.vertices();
        let n = v.len();
        let c = self.corner;
        let out_dir = geom::sub(v[(c + 1) % n], v[c]);
        let in_dir = geom::sub(v[(c + n - 1) % n], v[c]);
        // the side leaving this corner counter-clockwise
        let side = self.s.sides()[c];
        if self.within(out_dir) {
            let class: Vec<i64> = self
                .s
                .position((c + 1) % n)
                .iter()
                .zip(self.s.position(c))
                .map(|(a, b)| a - b)
                .collect();
            let scale = self.s.scale();
            debug_assert_eq!(side.from, c);
            self.out.push(SaddleConnection {
                holonomy: (Ratio::new(out_dir[0], scale), Ratio::new(out_dir[1], scale)),
                scaled_holonomy: out_dir,
                start: self.s.singularity_of_vertex(c),
                end: self.s.singularity_of_vertex((c + 1) % n),
                start_corner: c,
                end_corner: (c + 1) % n,
                crossings: Vec::new(),
                class,
            });
        }
        let root = Node {
            offset: [0, 0],
            lo: out_dir,
            hi: in_dir,
            entry: None,
            acc: self.s.position(c).iter().map(|x| -x).collect(),
            crossings: Vec::new(),
        };
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            self.expand(node, &mut stack)?;
        }
        Ok((self.out, self.nodes))
    }
}

/// Relative class of a path that leaves corner `start_corner`, crosses the
/// given sides and stops at corner `end_corner`.
///
/// Each crossing continues the path in the glued copy, adding the difference
/// of the two copies' corner potentials.
pub fn homology_class(
    s: &SuspensionSurface,
    start_corner: usize,
    end_corner: usize,
    crossings: &[(usize, i8)],
) -> Vec<i64> {
    let d = s.d();
    let mut shift = vec![vec![0i64; d]; d];
    for side in s.sides().iter().filter(|x| x.side == Side::Top) {
        let partner = s.sides()[side.partner];
        for (k, v) in shift[side.letter].iter_mut().enumerate() {
            *v = s.position(side.left)[k] - s.position(partner.left)[k];
        }
    }
    let mut class: Vec<i64> = s
        .position(end_corner)
        .iter()
        .zip(s.position(start_corner))
        .map(|(a, b)| a - b)
        .collect();
    for &(letter, sign) in crossings {
        for (c, v) in class.iter_mut().zip(&shift[letter]) {
            *c += sign as i64 * v;
        }
    }
    class
}

/// Pairs of connections with equal holonomy but different relative classes.
/// Generic surfaces have none; square-tiled ones may.
pub fn holonomy_collisions(
    records: &[SaddleConnection],
) -> Vec<(&SaddleConnection, &SaddleConnection)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let mut j = i + 1;
        while j < records.len() && records[j].scaled_holonomy == records[i].scaled_holonomy {
            j += 1;
        }
        for a in i..j {
            for b in a + 1..j {
                if records[a].class != records[b].class {
                    out.push((&records[a], &records[b]));
                }
            }
        }
        i = j;
    }
    out
}

/// All directed saddle connections of length at most `length`, sorted by
/// angle, then length, then endpoints and class.
pub fn enumerate(
    s: &SuspensionSurface,
    length: Q,
    opts: EnumerationOptions,
) -> Result<Vec<SaddleConnection>> {
    if length <= Q::from_integer(0) {
        return Err(Error::Precondition("length bound must be positive".into()));
    }
    let scale = s.scale() as i128;
    let (a, b) = (*length.numer() as i128, *length.denom() as i128);
    let limit2 = Frac::new(a * a * scale * scale, b * b);
    // keep every coordinate of the unfolding inside the exact range
    let reach = (a * scale) / b + 1;
    let span: i64 = s
        .vertices()
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(0);
    if reach + 4 * span as i128 >= crate::surface::COORD_LIMIT as i128 {
        return Err(Error::Overflow("unfolding coordinates"));
    }
    let corners: Vec<usize> = (0..s.vertices().len()).collect();
    let results = opts.exec.map(&corners, |&c| {
        Search {
            s,
            corner: c,
            origin: s.vertices()[c],
            limit2,
            max_nodes: opts.max_nodes,
            nodes: 0,
            out: Vec::new(),
        }
        .run()
    });
    let mut out = Vec::new();
    let mut nodes = 0usize;
    for r in results {
        let (v, k) = r?;
        nodes += k;
        out.extend(v);
    }
    if nodes > opts.max_nodes {
        return Err(Error::CapExceeded {
            what: "saddle connection search nodes",
            cap: opts.max_nodes,
        });
    }
    out.sort_by(|a, b| a.order_key(b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::PermutationPair;

    fn canonical(s: &str) -> SuspensionSurface {
        SuspensionSurface::canonical(&PermutationPair::parse(s).unwrap().1).unwrap()
    }

    #[test]
    fn edges_are_connections() {
        let s = canonical("A B C D\nD C B A");
        let sc = enumerate(&s, Q::from_integer(4), EnumerationOptions::default()).unwrap();
        for (a, z) in s.scaled_zeta().iter().enumerate() {
            let mut e = vec![0; 4];
            e[a] = 1;
            assert!(sc.iter().any(|c| c.scaled_holonomy == *z && c.class == e));
        }
    }

    #[test]
    fn short_bound_gives_nothing() {
        let s = canonical("A B C D\nD C B A");
        assert!(enumerate(&s, Q::new(1, 2), EnumerationOptions::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn orientation_symmetry_and_laws() {
        for p in [
            "A B C D\nD C B A",
            "A B C D E\nD C B E A",
            "A B C D\nB D A C",
        ] {
            let s = canonical(p);
            let sc = enumerate(&s, Q::from_integer(12), EnumerationOptions::default()).unwrap();
            let mut fwd: Vec<(Pt, usize, usize)> = sc
                .iter()
                .map(|c| (c.scaled_holonomy, c.start, c.end))
                .collect();
            let mut rev: Vec<(Pt, usize, usize)> = sc
                .iter()
                .map(|c| {
                    (
                        [-c.scaled_holonomy[0], -c.scaled_holonomy[1]],
                        c.end,
                        c.start,
                    )
                })
                .collect();
            fwd.sort();
            rev.sort();
            assert_eq!(fwd, rev);
            assert!(sc
                .iter()
                .all(|c| c.holonomy_consistent(&s) && c.boundary_consistent(&s)));
            for c in &sc {
                assert_eq!(
                    homology_class(&s, c.start_corner, c.end_corner, &c.crossings),
                    c.class
                );
            }
        }
    }

    #[test]
    fn strategies_agree() {
        let s = canonical("A B C D E\nD C B E A");
        let a = enumerate(
            &s,
            Q::from_integer(15),
            EnumerationOptions {
                exec: Exec::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let b = enumerate(
            &s,
            Q::from_integer(15),
            EnumerationOptions {
                exec: Exec::Parallel,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn node_cap() {
        let s = canonical("A B C D\nD C B A");
        let r = enumerate(
            &s,
            Q::from_integer(30),
            EnumerationOptions {
                max_nodes: 10,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }
}
