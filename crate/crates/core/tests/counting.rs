mod common;

use common::{pair, H11, H2};
use flatcount_core::counting::{self, count_by_class, count_records};
use flatcount_core::saddle::{self, EnumerationOptions};
use flatcount_core::surface::{SuspensionSurface, Q};
use flatcount_core::Exec;

fn grid(ls: &[i64]) -> Vec<Q> {
    ls.iter().map(|&l| Q::from_integer(l)).collect()
}

#[test]
fn nothing_below_the_shortest_connection() {
    let s = SuspensionSurface::canonical(&pair(H2)).unwrap();
    let lengths = vec![Q::new(1, 4), Q::new(1, 2), Q::from_integer(1)];
    let r = count_by_class(&s, &lengths, 3, (0, 0), EnumerationOptions::default()).unwrap();
    assert!(r.totals.iter().all(|&t| t == 0));
    assert!(r.classes.iter().all(|c| c.counts.iter().all(|&n| n == 0)));
    assert!(counting::report_trend(&r).is_err());
}

#[test]
fn classes_partition_the_endpoint_total() {
    let s = SuspensionSurface::canonical(&pair(H11)).unwrap();
    let lengths = grid(&[10, 20, 40]);
    let records =
        saddle::enumerate(&s, Q::from_integer(40), EnumerationOptions::default()).unwrap();
    for endpoints in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let r = count_records(&s, &records, &lengths, 3, endpoints, Exec::default()).unwrap();
        assert!(r.orbit_agrees(), "{endpoints:?}");
        for k in 0..lengths.len() {
            let sum: u64 = r.classes.iter().map(|c| c.counts[k]).sum::<u64>() + r.outside[k];
            assert_eq!(sum, r.totals[k]);
            let direct = records
                .iter()
                .filter(|c| (c.start, c.end) == endpoints && c.length2() <= lengths[k] * lengths[k])
                .count() as u64;
            assert_eq!(direct, r.totals[k]);
        }
        for c in &r.classes {
            assert!(c.counts.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn reversed_endpoints_have_equal_totals() {
    let s = SuspensionSurface::canonical(&pair(H11)).unwrap();
    let lengths = grid(&[15, 30]);
    let a = count_by_class(&s, &lengths, 3, (0, 1), EnumerationOptions::default()).unwrap();
    let b = count_by_class(&s, &lengths, 3, (1, 0), EnumerationOptions::default()).unwrap();
    assert_eq!(a.totals, b.totals);
    assert_eq!(a.orbit_size, 81);
}

#[test]
fn distinct_endpoints_never_leave_the_coset() {
    let s = SuspensionSurface::random(&pair(H11), 11, 6).unwrap();
    let r = count_by_class(
        &s,
        &grid(&[8, 16]),
        5,
        (0, 1),
        EnumerationOptions::default(),
    )
    .unwrap();
    assert_eq!(r.orbit_size, 625);
    assert!(r.outside.iter().all(|&n| n == 0));
}

#[test]
fn rejects_bad_inputs() {
    let s = SuspensionSurface::canonical(&pair(H2)).unwrap();
    let opts = EnumerationOptions::default();
    assert!(count_by_class(&s, &grid(&[5, 10]), 4, (0, 0), opts).is_err());
    assert!(count_by_class(&s, &grid(&[10, 5]), 3, (0, 0), opts).is_err());
    assert!(count_by_class(&s, &grid(&[5, 10]), 3, (0, 1), opts).is_err());
}

#[test]
fn lattice_oracle_approaches_the_closed_form() {
    let mut errors = Vec::new();
    for l in [500, 1000, 2000] {
        let counts = counting::lattice_counts(l, 3, Exec::default()).unwrap();
        let target = counting::lattice_prediction(l as f64, 3);
        let worst = counts
            .values()
            .map(|&n| (n as f64 / target - 1.0).abs())
            .fold(0.0, f64::max);
        errors.push(worst);
    }
    assert!(errors.iter().all(|&e| e < 0.02), "{errors:?}");
    assert!(errors[2] < errors[0]);
}
