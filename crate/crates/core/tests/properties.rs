mod common;

use common::{pair, H11, H2};
use flatcount_core::counting::lattice_counts;
use flatcount_core::homology::{loop_matrix, select_convention, BoundaryMap, HomologyFrame};
use flatcount_core::intmat::IntMatrix;
use flatcount_core::modq::{self, loop_generators_mod_q, unimodular_count};
use flatcount_core::polygon::StratumSignature;
use flatcount_core::saddle::{self, EnumerationOptions};
use flatcount_core::surface::{check_admissible, SuspensionSurface, Q};
use flatcount_core::{Exec, MoveKind, PermutationPair, RauzyClass};
use proptest::prelude::*;

fn class_of(text: &str) -> RauzyClass {
    RauzyClass::build(&pair(text)).unwrap()
}

fn any_vertex() -> impl Strategy<Value = PermutationPair> {
    let h11 = class_of(H11).vertices().to_vec();
    let h2 = class_of(H2).vertices().to_vec();
    prop_oneof![proptest::sample::select(h11), proptest::sample::select(h2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_is_linear(pi in any_vertex(), x in prop::collection::vec(-50i64..50, 5), y in prop::collection::vec(-50i64..50, 5), a in -5i64..5, b in -5i64..5) {
        let d = pi.d();
        let delta = BoundaryMap::of(&pi);
        let (x, y) = (&x[..d], &y[..d]);
        let combo: Vec<i64> = x.iter().zip(y).map(|(u, v)| a * u + b * v).collect();
        let lhs = delta.apply(&combo);
        let rhs: Vec<i64> = delta.apply(x).iter().zip(delta.apply(y)).map(|(u, v)| a * u + b * v).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn moves_only_relocate_the_loser(pi in any_vertex(), top in any::<bool>()) {
        let kind = if top { MoveKind::Top } else { MoveKind::Bottom };
        let m = pi.apply_move(kind);
        let (fixed_before, fixed_after, moved_before, moved_after) = if top {
            (pi.top(), m.target.top(), pi.bottom(), m.target.bottom())
        } else {
            (pi.bottom(), m.target.bottom(), pi.top(), m.target.top())
        };
        prop_assert_eq!(fixed_before, fixed_after);
        let strip = |row: &[flatcount_core::Letter]| row.iter().copied().filter(|&l| l != m.loser).collect::<Vec<_>>();
        prop_assert_eq!(strip(moved_before), strip(moved_after));
        let at = moved_after.iter().position(|&l| l == m.winner).unwrap();
        prop_assert_eq!(moved_after[at + 1], m.loser);
    }

    #[test]
    fn scaling_heights_keeps_admissibility(seed in 0u64..1000, num in 1i64..20, den in 1i64..20, shift in -3i64..3) {
        let pi = pair(H11);
        let s = SuspensionSurface::random(&pi, seed, 7).unwrap();
        let lambda = s.lambda().to_vec();
        // push one height around so both outcomes occur
        let mut tau = s.tau().to_vec();
        tau[0] += Q::from_integer(shift);
        let c = Q::new(num, den);
        let scaled: Vec<Q> = tau.iter().map(|t| t * c).collect();
        prop_assert_eq!(check_admissible(&pi, &lambda, &tau).is_ok(), check_admissible(&pi, &lambda, &scaled).is_ok());
    }

    #[test]
    fn random_surfaces_obey_homology_laws(seed in 0u64..10_000, h11 in any::<bool>()) {
        let pi = pair(if h11 { H11 } else { H2 });
        let s = SuspensionSurface::random(&pi, seed, 5).unwrap();
        let records = saddle::enumerate(&s, Q::from_integer(6), EnumerationOptions::default()).unwrap();
        prop_assert!(!records.is_empty());
        for c in &records {
            prop_assert!(c.holonomy_consistent(&s));
            prop_assert!(c.boundary_consistent(&s));
            prop_assert_eq!(saddle::homology_class(&s, c.start_corner, c.end_corner, &c.crossings), c.class.clone());
        }
    }

    #[test]
    fn unimodular_orbit_is_everything(coords in prop::collection::vec(0u32..3, 4)) {
        prop_assume!(coords.iter().any(|&x| x != 0));
        let class = class_of(H2);
        let frame = HomologyFrame::new(class.root_pair()).unwrap();
        let conv = select_convention(&class).unwrap();
        let gens = loop_generators_mod_q(&class, &frame, flatcount_core::homology::Block::Absolute, conv, 3).unwrap();
        prop_assert_eq!(modq::orbit(&gens, &coords).len() as u128, unimodular_count(2, 3));
    }

    #[test]
    fn lattice_residues_partition_the_disk(l in 0i64..120, q in prop::sample::select(vec![3i64, 5, 7, 9, 15])) {
        let by_residue = lattice_counts(l, q, Exec::Parallel).unwrap();
        let total = lattice_counts(l, 1, Exec::Sequential).unwrap()[&(0, 0)];
        prop_assert_eq!(by_residue.values().sum::<u64>(), total);
        prop_assert_eq!(by_residue.len() as u128, unimodular_count(1, q as u64));
    }

    #[test]
    fn kernel_columns_are_annihilated(rows in prop::collection::vec(prop::collection::vec(-4i64..4, 5), 1..4)) {
        let m = IntMatrix::from_rows(&rows);
        let k = m.integer_kernel().unwrap();
        prop_assert_eq!(k.cols() + m.rank(), 5);
        prop_assert!(m.mul(&k).unwrap().is_zero());
    }
}

#[test]
fn signature_is_constant_on_a_class() {
    for text in [H2, H11, "A B C D E F\nF E D C B A"] {
        let class = class_of(text);
        let first = StratumSignature::of(class.root_pair());
        for v in class.vertices() {
            let s = StratumSignature::of(v);
            assert_eq!(s.genus, first.genus);
            assert_eq!(s.sorted_orders(), first.sorted_orders());
            assert!(s.is_consistent(v.d()));
        }
    }
}

#[test]
fn short_loops_fix_the_boundary() {
    let class = class_of(H11);
    let frame = HomologyFrame::new(class.root_pair()).unwrap();
    let conv = select_convention(&class).unwrap();
    for w in class.loops_up_to(8) {
        let m = loop_matrix(&class, &w, conv).unwrap();
        assert!(frame.preserves_boundary(&m).unwrap());
        assert!(frame.preserves_form_on_kernel(&m).unwrap());
    }
}
