//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::tracer::Tracer;
use common::{pair, H11, H2};
use flatcount_core::cayley::CayleyGraph;
use flatcount_core::counting::{self, count_by_class};
use flatcount_core::homology::{
    check_convention, select_convention, ArrowConvention, Block, HomologyFrame,
};
use flatcount_core::modq::{
    self, loop_generators_mod_q, unimodular_count, unimodular_count_by_enumeration, RauzyGroup,
};
use flatcount_core::pipeline::{run, ExperimentConfig};
use flatcount_core::saddle::{self, EnumerationOptions};
use flatcount_core::spectrum::{gap_report, second_eigenvalue, EigenOptions};
use flatcount_core::surface::{SuspensionSurface, Q};
use flatcount_core::{Exec, RauzyClass};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const CAP: usize = 20_000_000;

fn strong_approximation() -> Outcome {
    let h2 = RauzyClass::build(&pair(H2)).map_err(err)?;
    let a = RauzyGroup::build(&h2, 3, Block::Absolute, CAP, Exec::default()).map_err(err)?;
    let a = a.closure.order();
    let h11 = RauzyClass::build(&pair(H11)).map_err(err)?;
    let b = RauzyGroup::build(&h11, 3, Block::Sigma, CAP, Exec::default()).map_err(err)?;
    let b = b.closure.order();
    ensure(
        a == 51840 && b == 4_199_040,
        format!("|G(3)| = {a} for H(2), |G_σ(3)| = {b} for H(1,1)"),
    )
}

fn unimodular_counts() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (g, q) in [(2, 3), (2, 9), (2, 15), (3, 3)] {
        let n = unimodular_count_by_enumeration(g, q);
        ok &= n as u128 == unimodular_count(g, q);
        parts.push(format!("(g={g}, q={q}) {n}"));
    }
    ensure(ok, parts.join(", "))
}

fn transitivity() -> Outcome {
    let h2 = RauzyClass::build(&pair(H2)).map_err(err)?;
    let g = RauzyGroup::build(&h2, 3, Block::Absolute, CAP, Exec::default()).map_err(err)?;
    let unimodular = g.closure.orbit(&[1, 0, 0, 0]).len();

    let h11 = RauzyClass::build(&pair(H11)).map_err(err)?;
    let frame = HomologyFrame::new(h11.root_pair()).map_err(err)?;
    let conv = select_convention(&h11).map_err(err)?;
    let gens = loop_generators_mod_q(&h11, &frame, Block::FullRelative, conv, 3).map_err(err)?;
    let lift = frame.lift(&frame.sigma).map_err(err)?;
    let v: Vec<u32> = lift.iter().map(|x| x.rem_euclid(3) as u32).collect();
    let coset = modq::orbit(&gens, &v).len();
    ensure(
        unimodular == 80 && coset == 81,
        format!("unimodular orbit {unimodular}, σ-lift orbit {coset}"),
    )
}

fn loop_invariants() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, text) in [("H(2)", H2), ("H(1,1)", H11)] {
        let class = RauzyClass::build(&pair(text)).map_err(err)?;
        let frame = HomologyFrame::new(class.root_pair()).map_err(err)?;
        let loops = class.loops_up_to(12);
        let passing: Vec<ArrowConvention> = ArrowConvention::ALL
            .into_iter()
            .filter(|&c| {
                check_convention(&class, &frame, &loops, c)
                    .map(|r| r.passed())
                    .unwrap_or(false)
            })
            .collect();
        let selected = select_convention(&class).ok();
        ok &= selected.is_some_and(|c| passing.contains(&c));
        parts.push(format!(
            "{name}: {} loops, passing {passing:?}",
            loops.len()
        ));
    }
    ensure(ok, parts.join("; "))
}

fn expansion() -> Outcome {
    let five: Vec<u32> = (0..5).map(|v| (v + 1) % 5).collect();
    let cycle = CayleyGraph::from_permutations(5, &[five]).map_err(err)?;
    let c5 = second_eigenvalue(&cycle, EigenOptions::default())
        .map_err(err)?
        .lambda2;
    let exact = 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos();
    let mut ok = (c5 - exact).abs() <= 1e-6;
    let mut parts = vec![format!("5-cycle λ₂ = {c5:.9}")];

    let class = RauzyClass::build(&pair(H2)).map_err(err)?;
    let report = gap_report(
        &class,
        &[3, 5],
        Block::Absolute,
        CAP,
        EigenOptions::default(),
    )
    .map_err(err)?;
    for r in &report.rows {
        ok &= r.connected && r.lambda2 <= r.degree as f64 - 0.1 && r.residual <= 1e-6;
        parts.push(format!(
            "q={} |G|={} degree {} λ₂ = {:.6} residual {:.1e}",
            r.q, r.order, r.degree, r.lambda2, r.residual
        ));
    }
    ensure(ok, parts.join("; "))
}

fn completeness() -> Outcome {
    let pi = pair(H2);
    let s = SuspensionSurface::canonical(&pi).map_err(err)?;
    let records =
        saddle::enumerate(&s, Q::from_integer(20), EnumerationOptions::default()).map_err(err)?;
    let mut ours: Vec<((i64, i64), usize, usize)> = records
        .iter()
        .map(|c| ((c.scaled_holonomy[0], c.scaled_holonomy[1]), c.start, c.end))
        .collect();
    ours.sort();
    let top: Vec<usize> = pi.top().iter().map(|l| l.index()).collect();
    let bottom: Vec<usize> = pi.bottom().iter().map(|l| l.index()).collect();
    if s.scale() != 1 {
        return Err("canonical surface is not integral".into());
    }
    let zeta: Vec<(i64, i64)> = s.scaled_zeta().iter().map(|z| (z[0], z[1])).collect();
    let traced = Tracer::new(&top, &bottom, &zeta).connections(20);
    ensure(
        ours == traced,
        format!("{} records, tracer {}", ours.len(), traced.len()),
    )
}

fn homology_laws() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, text) in [("H(2)", H2), ("H(1,1)", H11)] {
        let s = SuspensionSurface::canonical(&pair(text)).map_err(err)?;
        let records = saddle::enumerate(&s, Q::from_integer(100), EnumerationOptions::default())
            .map_err(err)?;
        let bad = records
            .iter()
            .filter(|c| !c.holonomy_consistent(&s) || !c.boundary_consistent(&s))
            .count();
        ok &= bad == 0 && !records.is_empty();
        parts.push(format!(
            "{name}: {} connections, {bad} violations",
            records.len()
        ));
    }
    ensure(ok, parts.join("; "))
}

fn lattice() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for q in [3i64, 5] {
        let counts = counting::lattice_counts(2000, q, Exec::default()).map_err(err)?;
        let target = counting::lattice_prediction(2000.0, q as u64);
        let min = *counts.values().min().unwrap() as f64;
        let max = *counts.values().max().unwrap() as f64;
        let worst = counts
            .values()
            .map(|&n| (n as f64 / target - 1.0).abs())
            .fold(0.0, f64::max);
        ok &= counts.len() as u128 == unimodular_count(1, q as u64)
            && worst < 0.02
            && max / min - 1.0 < 0.05;
        parts.push(format!(
            "q={q}: {} residues, worst {:.4}%, spread {:.4}%",
            counts.len(),
            100.0 * worst,
            100.0 * (max / min - 1.0)
        ));
    }
    ensure(ok, parts.join("; "))
}

fn trend() -> Outcome {
    let s = SuspensionSurface::canonical(&pair(H11)).map_err(err)?;
    let grid: Vec<Q> = [50, 100, 200].iter().map(|&l| Q::from_integer(l)).collect();
    let r = count_by_class(&s, &grid, 3, (0, 1), EnumerationOptions::default()).map_err(err)?;
    let t = counting::report_trend(&r).map_err(err)?;
    let band = counting::masur_band(&r);
    let decreasing = r.deviation.first() > r.deviation.last();
    ensure(
        r.orbit_agrees() && t.exponent > 0.0 && decreasing && band < 2.0,
        format!(
            "orbit {}, deviation {:?}, b = {:.4}, N/L² band {:.4}",
            r.orbit_size,
            r.deviation
                .iter()
                .map(|d| format!("{d:.4}"))
                .collect::<Vec<_>>(),
            t.exponent,
            band
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(err)?;
    let dirs = [tmp.path().join("first"), tmp.path().join("second")];
    for d in &dirs {
        let text = format!(
            "permutation = \"A B C D\\nD C B A\"\nq = [3]\nlengths = [25, 50, 100]\noutput_dir = {:?}\ndeterministic = true\nseed = 7\n",
            d.display()
        );
        let cfg = ExperimentConfig::from_toml(&text).map_err(err)?;
        run(&cfg, Exec::default()).map_err(err)?;
    }
    let mut names: Vec<_> = std::fs::read_dir(&dirs[0])
        .map_err(err)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    names.sort();
    let mut differing = Vec::new();
    for n in &names {
        let a = std::fs::read(dirs[0].join(n)).map_err(err)?;
        let b = std::fs::read(dirs[1].join(n)).map_err(err)?;
        if a != b {
            differing.push(n.to_string_lossy().into_owned());
        }
    }
    ensure(
        differing.is_empty() && names.len() == 5,
        format!("{} files compared, differing {differing:?}", names.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("strong approximation", strong_approximation),
        ("unimodular counts", unimodular_counts),
        ("orbit transitivity", transitivity),
        ("loop invariants", loop_invariants),
        ("expansion", expansion),
        ("enumerator completeness", completeness),
        ("homology laws", homology_laws),
        ("lattice residues", lattice),
        ("equidistribution trend", trend),
        ("determinism", determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
