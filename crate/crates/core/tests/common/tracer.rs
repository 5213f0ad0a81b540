//! Direction-by-direction separatrix tracer used as an enumeration oracle.
//!
//! Works on surfaces whose edge vectors are integral, so every saddle
//! connection is an integer multiple of a primitive direction. For each
//! corner and each primitive direction `(p, q)` with `p² + q² ≤ L²` pointing
//! into the corner, it walks the straight line through the polygon,
//! teleporting across glued sides, until it hits a vertex or runs past `L`.

use num_integer::Integer;
use num_rational::Ratio;

type R = Ratio<i128>;
type V = (R, R);

struct Seg {
    a: V,
    b: V,
    /// Translation carrying this side onto its glued partner.
    shift: V,
    partner: usize,
}

pub struct Tracer {
    vertices: Vec<V>,
    sides: Vec<Seg>,
    singularity: Vec<usize>,
}

fn r(x: i64) -> R {
    R::from_integer(x as i128)
}

fn sub(a: V, b: V) -> V {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: V, b: V) -> R {
    a.0 * b.1 - a.1 * b.0
}

/// Whether the counter-clockwise angle from `base` to `u` is smaller than the
/// one from `base` to `v`.
fn angle_before(base: V, u: V, v: V) -> bool {
    let zero = R::from_integer(0);
    let half = |w: V| {
        let c = cross(base, w);
        if c > zero || (c == zero && base.0 * w.0 + base.1 * w.1 > zero) {
            0
        } else {
            1
        }
    };
    let (hu, hv) = (half(u), half(v));
    if hu != hv {
        return hu < hv;
    }
    if cross(base, u) == zero && hu == 0 {
        return cross(base, v) != zero || base.0 * v.0 + base.1 * v.1 <= zero;
    }
    cross(u, v) > zero
}

impl Tracer {
    /// `top` and `bottom` list letter indices; `zeta` holds integer edge
    /// vectors.
    pub fn new(top: &[usize], bottom: &[usize], zeta: &[(i64, i64)]) -> Self {
        let d = top.len();
        let walk = |row: &[usize]| {
            let mut pts = vec![(r(0), r(0))];
            for &a in row {
                let (x, y) = *pts.last().unwrap();
                pts.push((x + r(zeta[a].0), y + r(zeta[a].1)));
            }
            pts
        };
        let bot = walk(bottom);
        let tp = walk(top);
        // counter-clockwise: bottom row left to right, then top row back
        let index_of_top = |k: usize| if k == 0 || k == d { k } else { 2 * d - k };
        let mut vertices = bot.clone();
        for k in (1..d).rev() {
            vertices.push(tp[k]);
        }

        let mut parent: Vec<usize> = (0..2 * d).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let root = find(p, p[x]);
                p[x] = root;
            }
            p[x]
        }
        let mut sides = Vec::new();
        let mut bottom_side = vec![0; d];
        let mut top_side = vec![0; d];
        for (k, &a) in bottom.iter().enumerate() {
            bottom_side[a] = sides.len();
            sides.push(Seg {
                a: bot[k],
                b: bot[k + 1],
                shift: (r(0), r(0)),
                partner: 0,
            });
        }
        for (k, &a) in top.iter().enumerate() {
            top_side[a] = sides.len();
            sides.push(Seg {
                a: tp[k],
                b: tp[k + 1],
                shift: (r(0), r(0)),
                partner: 0,
            });
        }
        for a in 0..d {
            let (bs, ts) = (bottom_side[a], top_side[a]);
            let shift = sub(sides[ts].a, sides[bs].a);
            sides[bs].shift = shift;
            sides[bs].partner = ts;
            sides[ts].shift = (-shift.0, -shift.1);
            sides[ts].partner = bs;
            let kb = bottom.iter().position(|&x| x == a).unwrap();
            let kt = top.iter().position(|&x| x == a).unwrap();
            for (u, v) in [(kb, index_of_top(kt)), (kb + 1, index_of_top(kt + 1))] {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru.max(rv)] = ru.min(rv);
            }
        }
        let mut label = vec![usize::MAX; 2 * d];
        let mut singularity = vec![0; 2 * d];
        let mut next = 0;
        for v in 0..2 * d {
            let root = find(&mut parent, v);
            if label[root] == usize::MAX {
                label[root] = next;
                next += 1;
            }
            singularity[v] = label[root];
        }
        Tracer {
            vertices,
            sides,
            singularity,
        }
    }

    /// Follows the ray from vertex `c` in direction `u`. Returns the end
    /// vertex and the travelled parameter if a vertex is reached before `t`
    /// exceeds `t_max`.
    fn shoot(&self, c: usize, u: V, t_max2: R) -> Option<(usize, R)> {
        let mut p = self.vertices[c];
        let mut skip: Option<usize> = None;
        let mut total = R::from_integer(0);
        loop {
            let mut best: Option<(R, Result<usize, usize>)> = None;
            for (j, w) in self.vertices.iter().enumerate() {
                let dv = sub(*w, p);
                if cross(u, dv) != R::from_integer(0) {
                    continue;
                }
                let t = if u.0 != R::from_integer(0) {
                    dv.0 / u.0
                } else {
                    dv.1 / u.1
                };
                if t > R::from_integer(0) && best.as_ref().map_or(true, |b| t < b.0) {
                    best = Some((t, Err(j)));
                }
            }
            for (i, s) in self.sides.iter().enumerate() {
                if Some(i) == skip {
                    continue;
                }
                let e = sub(s.b, s.a);
                let den = cross(u, e);
                if den == R::from_integer(0) {
                    continue;
                }
                let w = sub(s.a, p);
                let t = cross(w, e) / den;
                let sp = cross(w, u) / den;
                let (zero, one) = (R::from_integer(0), R::from_integer(1));
                if t > zero && sp > zero && sp < one && best.as_ref().map_or(true, |b| t < b.0) {
                    best = Some((t, Ok(i)));
                }
            }
            let (t, hit) = best.expect("ray leaves the polygon");
            total += t;
            if total * total > t_max2 {
                return None;
            }
            match hit {
                Err(j) => return Some((j, total)),
                Ok(i) => {
                    let s = &self.sides[i];
                    p = (p.0 + t * u.0 + s.shift.0, p.1 + t * u.1 + s.shift.1);
                    skip = Some(s.partner);
                }
            }
        }
    }

    /// Multiset of `(holonomy, start singularity, end singularity)` of all
    /// directed saddle connections of length at most `l`, sorted.
    pub fn connections(&self, l: i64) -> Vec<((i64, i64), usize, usize)> {
        let n = self.vertices.len();
        let mut out = Vec::new();
        for c in 0..n {
            let fwd = sub(self.vertices[(c + 1) % n], self.vertices[c]);
            let back = sub(self.vertices[(c + n - 1) % n], self.vertices[c]);
            for x in -l..=l {
                for y in -l..=l {
                    if x * x + y * y > l * l || x.gcd(&y) != 1 {
                        continue;
                    }
                    let u = (r(x), r(y));
                    // directions in [fwd, back) measured counter-clockwise
                    if !angle_before(fwd, u, back) {
                        continue;
                    }
                    let along_fwd = cross(fwd, u) == R::from_integer(0)
                        && fwd.0 * u.0 + fwd.1 * u.1 > R::from_integer(0);
                    let t_max2 =
                        R::from_integer((l * l) as i128) / R::from_integer((x * x + y * y) as i128);
                    let hit = if along_fwd {
                        let t = if fwd.0 != R::from_integer(0) {
                            fwd.0 / u.0
                        } else {
                            fwd.1 / u.1
                        };
                        (t * t <= t_max2).then_some(((c + 1) % n, t))
                    } else {
                        self.shoot(c, u, t_max2)
                    };
                    if let Some((j, t)) = hit {
                        assert!(t.is_integer());
                        let k = t.to_integer() as i64;
                        out.push(((k * x, k * y), self.singularity[c], self.singularity[j]));
                    }
                }
            }
        }
        out.sort();
        out
    }
}
