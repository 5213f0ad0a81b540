mod common;

use common::tracer::Tracer;
use common::{pair, H11, H2};
use flatcount_core::saddle::{self, EnumerationOptions};
use flatcount_core::surface::{SuspensionSurface, Q};

fn compare(text: &str, l: i64) {
    let pi = pair(text);
    let s = SuspensionSurface::canonical(&pi).unwrap();
    assert_eq!(s.scale(), 1);
    let zeta: Vec<(i64, i64)> = s.scaled_zeta().iter().map(|z| (z[0], z[1])).collect();
    let top: Vec<usize> = pi.top().iter().map(|a| a.index()).collect();
    let bottom: Vec<usize> = pi.bottom().iter().map(|a| a.index()).collect();
    let expected = Tracer::new(&top, &bottom, &zeta).connections(l);

    let found = saddle::enumerate(&s, Q::from_integer(l), EnumerationOptions::default()).unwrap();
    let mut got: Vec<((i64, i64), usize, usize)> = found
        .iter()
        .map(|c| ((c.scaled_holonomy[0], c.scaled_holonomy[1]), c.start, c.end))
        .collect();
    got.sort();
    assert!(!expected.is_empty());
    let count = |v: &[((i64, i64), usize, usize)], x| v.iter().filter(|y| **y == x).count();
    let missing: Vec<_> = expected
        .iter()
        .filter(|&&x| count(&got, x) < count(&expected, x))
        .collect();
    let extra: Vec<_> = got
        .iter()
        .filter(|&&x| count(&got, x) > count(&expected, x))
        .collect();
    assert!(
        missing.is_empty() && extra.is_empty(),
        "missing {missing:?}, extra {extra:?}"
    );
    assert_eq!(got.len(), expected.len());
}

#[test]
fn matches_tracer_on_h2() {
    compare(H2, 20);
}

#[test]
fn matches_tracer_on_h11() {
    compare(H11, 14);
}

#[test]
fn matches_tracer_on_other_h2_permutation() {
    compare("A B C D\nB D A C", 14);
}

#[test]
fn output_is_sorted_by_angle_then_length() {
    use flatcount_core::geom;
    use std::cmp::Ordering;
    let s = SuspensionSurface::canonical(&pair(H11)).unwrap();
    let found = saddle::enumerate(&s, Q::from_integer(10), EnumerationOptions::default()).unwrap();
    for w in found.windows(2) {
        let (a, b) = (w[0].scaled_holonomy, w[1].scaled_holonomy);
        match geom::angle_cmp(a, b) {
            Ordering::Less => {}
            Ordering::Equal => assert!(geom::norm2(a) <= geom::norm2(b)),
            Ordering::Greater => panic!("out of order: {a:?} before {b:?}"),
        }
    }
    assert!(found.iter().all(|c| c.length2() <= Q::from_integer(100)));
}

#[test]
fn collisions_share_holonomy_but_not_class() {
    let s = SuspensionSurface::canonical(&pair(H2)).unwrap();
    let found = saddle::enumerate(&s, Q::from_integer(12), EnumerationOptions::default()).unwrap();
    assert!(saddle::holonomy_collisions(&found)
        .iter()
        .all(|(a, b)| a.scaled_holonomy == b.scaled_holonomy && a.class != b.class));
}
