//! Saddle connection statistics by homology class mod `q`.

use std::f64::consts::PI;

use hashbrown::HashMap;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::homology::{select_convention, Block, HomologyFrame};
use crate::modq::{self, loop_generators_mod_q, unimodular_count};
use crate::rauzy::RauzyClass;
use crate::saddle::{self, EnumerationOptions, SaddleConnection};
use crate::surface::{SuspensionSurface, Q};

/// Counts of one class `ξ` along the length grid.
#[derive(Debug, Clone, Serialize)]
pub struct ClassCounts {
    pub id: usize,
    /// `ξ` reduced mod `q` in `Z^A`.
    pub residue: Vec<u32>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub q: u32,
    pub lengths: Vec<Q>,
    pub endpoints: (usize, usize),
    pub genus: usize,
    /// Size of the orbit of `ξ` under the loop group, computed by breadth
    /// first search.
    pub orbit_size: usize,
    /// The closed form the orbit size should equal.
    pub predicted_orbit_size: u128,
    /// One entry per class of the orbit, ordered by first appearance.
    pub classes: Vec<ClassCounts>,
    /// Connections from `z₁` to `z₂` at each length.
    pub totals: Vec<u64>,
    /// Connections from `z₁` to `z₂` whose class lies outside the orbit.
    pub outside: Vec<u64>,
    /// All connections at each length, regardless of endpoints.
    pub all_totals: Vec<u64>,
    /// Orbit classes never reached at the largest length.
    pub unattained: usize,
    /// `max_ξ |N(L,ξ)·|orbit|/N(L) - 1|` over attained classes.
    pub deviation: Vec<f64>,
}

impl CountReport {
    pub fn orbit_agrees(&self) -> bool {
        self.orbit_size as u128 == self.predicted_orbit_size
    }

    /// `|N(L,ξ)·|orbit|/N(L) - 1|` for one class.
    pub fn class_deviation(&self, class: usize, k: usize) -> f64 {
        if self.totals[k] == 0 {
            return 0.0;
        }
        let n = self.classes[class].counts[k] as f64;
        (n * self.orbit_size as f64 / self.totals[k] as f64 - 1.0).abs()
    }
}

/// Orbit of the base class `ξ₀` of the endpoint pair in `Z_q^A`: a lift of
/// `z₂ - z₁` when the endpoints differ, otherwise a primitive absolute class.
fn class_orbit(
    s: &SuspensionSurface,
    q: u32,
    endpoints: (usize, usize),
) -> Result<(HomologyFrame, Vec<Vec<u32>>, u128)> {
    let pi = s.pi();
    let class = RauzyClass::build(pi)?;
    let frame = HomologyFrame::new(pi)?;
    let conv = select_convention(&class)?;
    let gens = loop_generators_mod_q(&class, &frame, Block::FullRelative, conv, q)?;
    let (z1, z2) = endpoints;
    let (base, predicted) = if z1 != z2 {
        let chain = frame.boundary.chain(z1, z2);
        (frame.lift(&chain)?, (q as u128).pow(2 * frame.genus as u32))
    } else {
        (
            frame.kernel.column(0),
            unimodular_count(frame.genus as u32, q as u64),
        )
    };
    let base: Vec<u32> = base.iter().map(|x| x.rem_euclid(q as i64) as u32).collect();
    let orbit = modq::orbit(&gens, &base);
    Ok((frame, orbit, predicted))
}

/// Buckets the directed connections from `z₁` to `z₂` by class mod `q` at each
/// length of the grid.
pub fn count_by_class(
    s: &SuspensionSurface,
    lengths: &[Q],
    q: u32,
    endpoints: (usize, usize),
    opts: EnumerationOptions,
) -> Result<CountReport> {
    let &l_max = lengths
        .iter()
        .max()
        .ok_or_else(|| Error::Precondition("empty length grid".into()))?;
    let records = saddle::enumerate(s, l_max, opts)?;
    count_records(s, &records, lengths, q, endpoints, opts.exec)
}

/// [`count_by_class`] on an already enumerated list covering the grid.
pub fn count_records(
    s: &SuspensionSurface,
    records: &[SaddleConnection],
    lengths: &[Q],
    q: u32,
    endpoints: (usize, usize),
    exec: Exec,
) -> Result<CountReport> {
    if q < 3 || q % 2 == 0 {
        return Err(Error::Precondition(format!(
            "q must be odd and at least 3, got {q}"
        )));
    }
    if lengths.windows(2).any(|w| w[0] >= w[1])
        || lengths.first().is_some_and(|l| *l <= Q::from_integer(0))
    {
        return Err(Error::Precondition(
            "length grid must be positive and increasing".into(),
        ));
    }
    let k = s.singularity_count();
    if endpoints.0 >= k || endpoints.1 >= k {
        return Err(Error::Precondition(format!(
            "the surface has {k} singularities"
        )));
    }
    let (frame, orbit, predicted) = class_orbit(s, q, endpoints)?;
    let index: HashMap<&[u32], usize> = orbit
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();

    let squares: Vec<Q> = lengths.iter().map(|l| l * l).collect();
    let first_length = |c: &SaddleConnection| squares.iter().position(|l2| c.length2() <= *l2);
    let bucket: Vec<Option<(usize, Option<usize>)>> = exec.map(records, |c| {
        let slot = first_length(c)?;
        if (c.start, c.end) != endpoints {
            return Some((slot, None));
        }
        let r: Vec<u32> = c
            .class
            .iter()
            .map(|x| x.rem_euclid(q as i64) as u32)
            .collect();
        Some((
            slot,
            Some(index.get(r.as_slice()).copied().unwrap_or(usize::MAX)),
        ))
    });

    let n = lengths.len();
    let mut classes: Vec<ClassCounts> = orbit
        .iter()
        .enumerate()
        .map(|(id, r)| ClassCounts {
            id,
            residue: r.clone(),
            counts: vec![0; n],
        })
        .collect();
    let mut totals = vec![0u64; n];
    let mut outside = vec![0u64; n];
    let mut all_totals = vec![0u64; n];
    // counts are bucketed by first grid length, then made cumulative
    for (slot, cls) in bucket.into_iter().flatten() {
        all_totals[slot] += 1;
        match cls {
            None => {}
            Some(usize::MAX) => {
                totals[slot] += 1;
                outside[slot] += 1;
            }
            Some(i) => {
                totals[slot] += 1;
                classes[i].counts[slot] += 1;
            }
        }
    }
    let cumulate = |v: &mut Vec<u64>| {
        for i in 1..v.len() {
            v[i] += v[i - 1];
        }
    };
    cumulate(&mut totals);
    cumulate(&mut outside);
    cumulate(&mut all_totals);
    for c in &mut classes {
        cumulate(&mut c.counts);
    }
    let unattained = classes
        .iter()
        .filter(|c| c.counts.last() == Some(&0))
        .count();
    let mut report = CountReport {
        q,
        lengths: lengths.to_vec(),
        endpoints,
        genus: frame.genus,
        orbit_size: orbit.len(),
        predicted_orbit_size: predicted,
        classes,
        totals,
        outside,
        all_totals,
        unattained,
        deviation: Vec::new(),
    };
    report.deviation = (0..n)
        .map(|k| {
            (0..report.classes.len())
                .filter(|&i| report.classes[i].counts[n - 1] > 0)
                .map(|i| report.class_deviation(i, k))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(report)
}

/// Power-law fit `deviation ≈ A·L^{-b}`.
#[derive(Debug, Clone, Serialize)]
pub struct TrendVerdict {
    pub exponent: f64,
    pub prefactor: f64,
    pub first: f64,
    pub last: f64,
    pub pass: bool,
}

/// Floor applied to zero deviations before taking logarithms.
const DEVIATION_FLOOR: f64 = 1e-12;

/// Least squares fit of `log deviation` against `log L`; passes when the
/// decay exponent is positive and the deviation drops from the first grid
/// point to the last.
pub fn equidistribution_trend(lengths: &[f64], deviation: &[f64]) -> Result<TrendVerdict> {
    if lengths.len() != deviation.len() {
        return Err(Error::Precondition(
            "grid and deviation lengths differ".into(),
        ));
    }
    if lengths.len() < 3 {
        return Err(Error::Precondition(
            "need at least three grid points".into(),
        ));
    }
    let (lo, hi) = (lengths[0], lengths[lengths.len() - 1]);
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(Error::Precondition(
            "grid must span a factor of at least 4".into(),
        ));
    }
    let xs: Vec<f64> = lengths.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = deviation
        .iter()
        .map(|d| d.max(DEVIATION_FLOOR).ln())
        .collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let first = deviation[0];
    let last = deviation[deviation.len() - 1];
    let exponent = -slope;
    Ok(TrendVerdict {
        exponent,
        prefactor: (my - slope * mx).exp(),
        first,
        last,
        pass: exponent > 0.0 && last < first,
    })
}

/// Trend test on a report's grid.
pub fn report_trend(report: &CountReport) -> Result<TrendVerdict> {
    if report.totals.iter().all(|&t| t == 0) {
        return Err(Error::Precondition(
            "no connections between the chosen endpoints".into(),
        ));
    }
    let ls: Vec<f64> = report.lengths.iter().map(q_to_f64).collect();
    equidistribution_trend(&ls, &report.deviation)
}

/// `ĉ = N(L) / (π L²)`.
pub fn empirical_sv_constant(count: u64, length: f64) -> f64 {
    count as f64 / (PI * length * length)
}

/// `ĉ` at the largest grid length of a report, for the endpoint-restricted
/// count.
pub fn report_sv_constant(report: &CountReport) -> f64 {
    let l = report.lengths.last().map(q_to_f64).unwrap_or(f64::NAN);
    empirical_sv_constant(report.totals.last().copied().unwrap_or(0), l)
}

/// `N(L)/L²` of all connections at every grid length.
pub fn quadratic_ratios(report: &CountReport) -> Vec<f64> {
    report
        .lengths
        .iter()
        .zip(&report.all_totals)
        .map(|(l, &n)| n as f64 / q_to_f64(l).powi(2))
        .collect()
}

/// `max / min` of [`quadratic_ratios`].
pub fn masur_band(report: &CountReport) -> f64 {
    let r = quadratic_ratios(report);
    let max = r.iter().copied().fold(f64::MIN, f64::max);
    let min = r.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

pub fn q_to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn residue_coprime(a: i64, b: i64, q: i64) -> bool {
    a.gcd(&b).gcd(&q) == 1
}

/// Primitive `(x, y)` with `x ≡ a`, `y ≡ b (mod q)` and `x² + y² ≤ L²`.
pub fn lattice_oracle(l: i64, q: i64, residue: (i64, i64), exec: Exec) -> Result<u64> {
    let (a, b) = (residue.0.rem_euclid(q), residue.1.rem_euclid(q));
    if !residue_coprime(a, b, q) {
        return Err(Error::Precondition(format!(
            "residue ({a}, {b}) shares a factor with {q} and holds no primitive vector"
        )));
    }
    Ok(lattice_counts(l, q, exec)?
        .get(&(a, b))
        .copied()
        .unwrap_or(0))
}

/// Primitive vector counts in the disk of radius `L`, bucketed by residue mod
/// `q`.
pub fn lattice_counts(l: i64, q: i64, exec: Exec) -> Result<HashMap<(i64, i64), u64>> {
    if l < 0 || q < 1 {
        return Err(Error::Precondition("need L ≥ 0 and q ≥ 1".into()));
    }
    let rows = exec.map_range((2 * l + 1) as usize, |i| {
        let x = i as i64 - l;
        let span = ((l * l - x * x) as f64).sqrt() as i64 + 1;
        let mut buckets = vec![0u64; (q * q) as usize];
        for y in -span..=span {
            if x * x + y * y <= l * l && x.gcd(&y) == 1 {
                buckets[(x.rem_euclid(q) * q + y.rem_euclid(q)) as usize] += 1;
            }
        }
        buckets
    });
    let mut out = HashMap::new();
    for a in 0..q {
        for b in 0..q {
            let n: u64 = rows.iter().map(|r| r[(a * q + b) as usize]).sum();
            if n > 0 || residue_coprime(a, b, q) {
                out.insert((a, b), n);
            }
        }
    }
    Ok(out)
}

/// `π L² / (ζ(2) · q² ∏_{p|q}(1 - p⁻²))`.
pub fn lattice_prediction(l: f64, q: u64) -> f64 {
    let zeta2 = PI * PI / 6.0;
    PI * l * l / (zeta2 * unimodular_count(1, q) as f64)
}
