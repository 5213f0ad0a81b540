//! Exact integer plane geometry. Coordinates are `i64`; every predicate is
//! evaluated in `i128` so no rounding ever enters a decision.

use std::cmp::Ordering;

pub type Pt = [i64; 2];

#[inline]
pub fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Pt, b: Pt) -> Pt {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn cross(a: Pt, b: Pt) -> i128 {
    a[0] as i128 * b[1] as i128 - a[1] as i128 * b[0] as i128
}

#[inline]
pub fn dot(a: Pt, b: Pt) -> i128 {
    a[0] as i128 * b[0] as i128 + a[1] as i128 * b[1] as i128
}

#[inline]
pub fn norm2(a: Pt) -> i128 {
    dot(a, a)
}

/// Which half-turn the counter-clockwise angle from `base` to `u` lies in:
/// 0 for `[0, π)`, 1 for `[π, 2π)`.
#[inline]
fn half_from(base: Pt, u: Pt) -> u8 {
    let c = cross(base, u);
    if c > 0 || (c == 0 && dot(base, u) > 0) {
        0
    } else {
        1
    }
}

/// Compare the counter-clockwise angles from `base` to `u` and to `v`, both
/// taken in `[0, 2π)`. Parallel vectors with the same direction compare equal.
pub fn angle_cmp_from(base: Pt, u: Pt, v: Pt) -> Ordering {
    let (hu, hv) = (half_from(base, u), half_from(base, v));
    if hu != hv {
        return hu.cmp(&hv);
    }
    0.cmp(&cross(u, v))
}

/// Angle from the positive x-axis, as an ordering key.
pub fn angle_cmp(u: Pt, v: Pt) -> Ordering {
    angle_cmp_from([1, 0], u, v)
}

#[inline]
pub fn same_direction(u: Pt, v: Pt) -> bool {
    cross(u, v) == 0 && dot(u, v) > 0
}

/// `u` strictly inside the counter-clockwise open sector from `lo` to `hi`
/// (`lo != hi` as directions; a full turn when they coincide).
pub fn in_open_sector(lo: Pt, hi: Pt, u: Pt) -> bool {
    if same_direction(lo, u) {
        return false;
    }
    if same_direction(lo, hi) {
        return true;
    }
    angle_cmp_from(lo, u, hi) == Ordering::Less
}

/// `u` in the half-open sector `(lo, hi]`.
pub fn in_half_open_sector(lo: Pt, hi: Pt, u: Pt) -> bool {
    !same_direction(lo, u) && angle_cmp_from(lo, u, hi) != Ordering::Greater
}

/// Exact rational `num / den` with positive denominator, compared by cross
/// multiplication.
#[derive(Debug, Clone, Copy)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub fn new(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        if den < 0 {
            Frac {
                num: -num,
                den: -den,
            }
        } else {
            Frac { num, den }
        }
    }

    pub fn zero() -> Self {
        Frac { num: 0, den: 1 }
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Parameter `s` at which the ray `origin + s * dir` crosses segment
/// `[p, q]` at a point strictly inside the segment, if it does so
/// transversally and with `s > 0`.
pub fn ray_crosses_segment_interior(origin: Pt, dir: Pt, p: Pt, q: Pt) -> Option<Frac> {
    let dp = cross(dir, sub(p, origin));
    let dq = cross(dir, sub(q, origin));
    if dp == 0 || dq == 0 || (dp > 0) == (dq > 0) {
        return None;
    }
    let e = sub(q, p);
    let s = Frac::new(cross(sub(p, origin), e), cross(dir, e));
    (s.num > 0).then_some(s)
}

/// Parameter of `w` on the ray `origin + s * dir` when `w` lies on it with
/// `s > 0`.
pub fn ray_through_point(origin: Pt, dir: Pt, w: Pt) -> Option<Frac> {
    let v = sub(w, origin);
    if cross(dir, v) != 0 {
        return None;
    }
    let dt = dot(dir, v);
    (dt > 0).then(|| Frac::new(dt, norm2(dir)))
}

/// Squared distance from `c` to segment `[p, q]` as a fraction.
pub fn dist2_point_segment(c: Pt, p: Pt, q: Pt) -> Frac {
    let e = sub(q, p);
    let v = sub(c, p);
    let t = dot(v, e);
    let ee = norm2(e);
    if t <= 0 {
        return Frac::new(norm2(v), 1);
    }
    if t >= ee {
        return Frac::new(norm2(sub(c, q)), 1);
    }
    let cr = cross(e, v);
    Frac::new(cr * cr, ee)
}

/// Proper or improper intersection of closed segments.
pub fn segments_intersect(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let o = |p: Pt, q: Pt, r: Pt| cross(sub(q, p), sub(r, p)).signum();
    let on = |p: Pt, q: Pt, r: Pt| {
        r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    let (o1, o2, o3, o4) = (o(a, b, c), o(a, b, d), o(c, d, a), o(c, d, b));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on(a, b, c))
        || (o2 == 0 && on(a, b, d))
        || (o3 == 0 && on(c, d, a))
        || (o4 == 0 && on(c, d, b))
}
