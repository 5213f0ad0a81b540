//! Suspension translation surfaces over a permutation pair.

use num_integer::Integer;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{self, Pt};
use crate::homology::BoundaryMap;
use crate::perm::PermutationPair;
use crate::polygon::{self, Corners, EdgeCopies};

pub type Q = Ratio<i64>;

/// Coordinates of scaled polygons must stay below this bound so every
/// predicate fits in `i128`.
pub const COORD_LIMIT: i64 = 1 << 30;

/// Which copy of an edge a polygon side is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Top,
    Bottom,
}

/// One side of the polygon, listed counter-clockwise from vertex `from` to
/// vertex `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolygonSide {
    pub from: usize,
    pub to: usize,
    pub letter: usize,
    pub side: Side,
    /// Vertex at the start of this copy in the direction of `ζ`.
    pub left: usize,
    /// Index of the glued side.
    pub partner: usize,
}

/// A suspension surface with exact rational data `ζ_α = (λ_α, τ_α)`.
///
/// Internally every coordinate is multiplied by the common denominator
/// `scale` so all geometry is integral.
#[derive(Debug, Clone)]
pub struct SuspensionSurface {
    pi: PermutationPair,
    lambda: Vec<Q>,
    tau: Vec<Q>,
    scale: i64,
    zeta: Vec<Pt>,
    vertices: Vec<Pt>,
    sides: Vec<PolygonSide>,
    corners: Corners,
    boundary: BoundaryMap,
    positions: Vec<Vec<i64>>,
}

impl SuspensionSurface {
    /// `λ_α = 1`, `τ_α = π_b(α) - π_t(α)`.
    pub fn canonical(pi: &PermutationPair) -> Result<Self> {
        let zeta = polygon::canonical_zeta(pi);
        let lambda = zeta.iter().map(|z| Q::from_integer(z[0])).collect();
        let tau = zeta.iter().map(|z| Q::from_integer(z[1])).collect();
        Self::new(pi, lambda, tau)
    }

    /// Surface with the given data; rejects data violating the suspension
    /// inequalities.
    pub fn new(pi: &PermutationPair, lambda: Vec<Q>, tau: Vec<Q>) -> Result<Self> {
        let d = pi.d();
        if !pi.is_irreducible() {
            return Err(Error::Precondition("permutation pair is reducible".into()));
        }
        if lambda.len() != d || tau.len() != d {
            return Err(Error::Precondition(format!(
                "expected {d} lengths and heights"
            )));
        }
        check_admissible(pi, &lambda, &tau)?;
        let scale = lambda
            .iter()
            .chain(&tau)
            .fold(1i64, |acc, x| acc.lcm(x.denom()));
        let to_int = |x: &Q| -> Result<i64> {
            let v = (*x * Q::from_integer(scale)).to_integer();
            if v.abs() >= COORD_LIMIT / (4 * d as i64) {
                return Err(Error::Overflow("suspension coordinates"));
            }
            Ok(v)
        };
        let zeta: Vec<Pt> = (0..d)
            .map(|a| Ok([to_int(&lambda[a])?, to_int(&tau[a])?]))
            .collect::<Result<_>>()?;
        let vertices = polygon::polygon_vertices(pi, &zeta);
        if !is_simple(&vertices) {
            return Err(Error::Inadmissible(
                "suspension polygon is not simple".into(),
            ));
        }
        let sides = polygon_sides(pi);
        let corners = Corners::of(pi);
        let boundary = BoundaryMap::of(pi);
        let positions = vertex_positions(pi);
        Ok(SuspensionSurface {
            pi: pi.clone(),
            lambda,
            tau,
            scale,
            zeta,
            vertices,
            sides,
            corners,
            boundary,
            positions,
        })
    }

    /// Seeded random admissible data with common denominator `denominator`:
    /// `λ_α ∈ [1, 2)` and `τ = τ_canonical + ε` with `|ε_α| < 1/d`.
    pub fn random(pi: &PermutationPair, seed: u64, denominator: i64) -> Result<Self> {
        if denominator < 2 {
            return Err(Error::Precondition("denominator must be at least 2".into()));
        }
        let d = pi.d();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let canonical = polygon::canonical_zeta(pi);
        let bound = (denominator - 1) / (d as i64);
        let lambda = (0..d)
            .map(|_| Q::new(denominator + rng.gen_range(0..denominator), denominator))
            .collect();
        let tau = (0..d)
            .map(|a| {
                Q::new(
                    canonical[a][1] * denominator + rng.gen_range(-bound..=bound),
                    denominator,
                )
            })
            .collect();
        Self::new(pi, lambda, tau)
    }

    pub fn pi(&self) -> &PermutationPair {
        &self.pi
    }

    pub fn d(&self) -> usize {
        self.pi.d()
    }

    pub fn lambda(&self) -> &[Q] {
        &self.lambda
    }

    pub fn tau(&self) -> &[Q] {
        &self.tau
    }

    /// `ζ_α` as exact rationals.
    pub fn edge_vector(&self, letter: usize) -> (Q, Q) {
        (self.lambda[letter], self.tau[letter])
    }

    /// Common denominator of the data.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Scaled integral edge vectors.
    pub fn scaled_zeta(&self) -> &[Pt] {
        &self.zeta
    }

    /// Scaled integral polygon vertices, counter-clockwise.
    pub fn vertices(&self) -> &[Pt] {
        &self.vertices
    }

    pub fn sides(&self) -> &[PolygonSide] {
        &self.sides
    }

    pub fn corners(&self) -> &Corners {
        &self.corners
    }

    pub fn boundary(&self) -> &BoundaryMap {
        &self.boundary
    }

    pub fn singularity_of_vertex(&self, v: usize) -> usize {
        self.corners.singularity[v]
    }

    pub fn singularity_count(&self) -> usize {
        self.corners.count()
    }

    /// Class in `Z^A` of a path inside the polygon from vertex `0` to `v`.
    pub fn position(&self, v: usize) -> &[i64] {
        &self.positions[v]
    }

    /// `Σ n_α ζ_α` in scaled integer coordinates.
    pub fn scaled_holonomy_of(&self, class: &[i64]) -> [i128; 2] {
        let mut h = [0i128; 2];
        for (n, z) in class.iter().zip(&self.zeta) {
            h[0] += *n as i128 * z[0] as i128;
            h[1] += *n as i128 * z[1] as i128;
        }
        h
    }

    /// `Σ n_α ζ_α` as exact rationals.
    pub fn holonomy_of(&self, class: &[i64]) -> (Q, Q) {
        class
            .iter()
            .enumerate()
            .fold((Q::from_integer(0), Q::from_integer(0)), |acc, (a, &n)| {
                (acc.0 + self.lambda[a] * n, acc.1 + self.tau[a] * n)
            })
    }
}

/// Top partial sums of `τ` over proper prefixes must be positive and bottom
/// ones negative; lengths must be positive.
pub fn check_admissible(pi: &PermutationPair, lambda: &[Q], tau: &[Q]) -> Result<()> {
    let zero = Q::from_integer(0);
    if let Some(a) = lambda.iter().position(|l| *l <= zero) {
        return Err(Error::Inadmissible(format!(
            "length of letter {} is not positive",
            a + 1
        )));
    }
    let d = pi.d();
    let mut sum = zero;
    for (k, l) in pi.top().iter().enumerate().take(d - 1) {
        sum += tau[l.index()];
        if sum <= zero {
            return Err(Error::Inadmissible(format!(
                "top partial sum over positions 1..{} is {sum}, not > 0",
                k + 1
            )));
        }
    }
    let mut sum = zero;
    for (k, l) in pi.bottom().iter().enumerate().take(d - 1) {
        sum += tau[l.index()];
        if sum >= zero {
            return Err(Error::Inadmissible(format!(
                "bottom partial sum over positions 1..{} is {sum}, not < 0",
                k + 1
            )));
        }
    }
    Ok(())
}

fn is_simple(v: &[Pt]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if geom::segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    // adjacent sides may only share their common vertex
    (0..n).all(|i| {
        let a = geom::sub(v[(i + 1) % n], v[i]);
        let b = geom::sub(v[(i + 2) % n], v[(i + 1) % n]);
        !(geom::cross(a, b) == 0 && geom::dot(a, b) < 0)
    })
}

fn polygon_sides(pi: &PermutationPair) -> Vec<PolygonSide> {
    let d = pi.d();
    let copies: Vec<EdgeCopies> = polygon::edge_copies(pi);
    let n = 2 * d;
    let mut sides = Vec::with_capacity(n);
    for i in 0..n {
        let (from, to) = (i, (i + 1) % n);
        let (letter, side) = if i < d {
            (pi.bottom()[i].index(), Side::Bottom)
        } else {
            // side d + j runs from T_{d-j} to T_{d-j-1}
            (pi.top()[2 * d - i - 1].index(), Side::Top)
        };
        let c = copies[letter];
        let left = match side {
            Side::Bottom => c.bottom.0,
            Side::Top => c.top.0,
        };
        sides.push(PolygonSide {
            from,
            to,
            letter,
            side,
            left,
            partner: 0,
        });
    }
    for i in 0..n {
        let p = (0..n)
            .find(|&j| j != i && sides[j].letter == sides[i].letter)
            .expect("every letter labels two sides");
        sides[i].partner = p;
    }
    sides
}

fn vertex_positions(pi: &PermutationPair) -> Vec<Vec<i64>> {
    let d = pi.d();
    let mut pos = vec![vec![0i64; d]; 2 * d];
    let mut acc = vec![0i64; d];
    for (m, l) in pi.bottom().iter().enumerate() {
        acc[l.index()] += 1;
        pos[polygon::bottom_vertex(d, m + 1)] = acc.clone();
    }
    let mut acc = vec![0i64; d];
    for (k, l) in pi.top().iter().enumerate().take(d - 1) {
        acc[l.index()] += 1;
        pos[polygon::top_vertex(d, k + 1)] = acc.clone();
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(s: &str) -> PermutationPair {
        PermutationPair::parse(s).unwrap().1
    }

    #[test]
    fn canonical_data() {
        let s = SuspensionSurface::canonical(&pair("A B C D\nD C B A")).unwrap();
        assert_eq!(s.scaled_zeta(), &[[1, 3], [1, 1], [1, -1], [1, -3]]);
        assert_eq!(s.scale(), 1);
        let s = SuspensionSurface::canonical(&pair("A B C D\nB D A C")).unwrap();
        let taus: Vec<i64> = s.tau().iter().map(|t| t.to_integer()).collect();
        assert_eq!(taus, vec![2, -1, 1, -2]);
        assert!(s.lambda().iter().all(|l| *l == Q::from_integer(1)));
    }

    #[test]
    fn sides_are_glued_by_translation() {
        let s = SuspensionSurface::canonical(&pair("A B C D E\nE D C B A")).unwrap();
        let v = s.vertices();
        for (i, side) in s.sides().iter().enumerate() {
            let p = s.sides()[side.partner];
            assert_eq!(p.partner, i);
            let a = geom::sub(v[side.to], v[side.from]);
            let b = geom::sub(v[p.to], v[p.from]);
            assert_eq!(a, [-b[0], -b[1]]);
            let z = s.scaled_zeta()[side.letter];
            let along = if side.side == Side::Bottom {
                a
            } else {
                [-a[0], -a[1]]
            };
            assert_eq!(along, z);
            assert_eq!(geom::sub(v[side.left], v[0]), {
                let h = s.scaled_holonomy_of(s.position(side.left));
                [h[0] as i64, h[1] as i64]
            });
        }
    }

    #[test]
    fn rejects_inadmissible_data() {
        let pi = pair("A B C D\nD C B A");
        let one = vec![Q::from_integer(1); 4];
        let zero = vec![Q::from_integer(0); 4];
        assert!(matches!(
            SuspensionSurface::new(&pi, one.clone(), zero),
            Err(Error::Inadmissible(_))
        ));
        let scaled: Vec<Q> = [3, 1, -1, -3].iter().map(|&t| Q::new(t * 5, 7)).collect();
        assert!(SuspensionSurface::new(&pi, one, scaled).is_ok());
    }

    #[test]
    fn random_data_is_admissible_and_seeded() {
        let pi = pair("A B C D E\nD C B E A");
        let a = SuspensionSurface::random(&pi, 7, 101).unwrap();
        let b = SuspensionSurface::random(&pi, 7, 101).unwrap();
        assert_eq!(a.tau(), b.tau());
        assert_eq!(a.lambda(), b.lambda());
        assert_ne!(
            a.tau(),
            SuspensionSurface::random(&pi, 8, 101).unwrap().tau()
        );
    }
}
