//! Second adjacency eigenvalue of Cayley graphs by restarted Lanczos on the
//! orthogonal complement of the constants, certified by the true residual.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cayley::CayleyGraph;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::homology::Block;
use crate::modq::RauzyGroup;
use crate::rauzy::RauzyClass;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_MATVECS: usize = 10_000;

/// Lanczos steps per restart cycle.
const CYCLE: usize = 60;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_matvecs: usize,
    pub seed: u64,
    /// Use fixed-chunk reductions so results are bitwise reproducible across
    /// thread counts.
    pub deterministic: bool,
    pub exec: Exec,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: DEFAULT_TOL,
            max_matvecs: DEFAULT_MAX_MATVECS,
            seed: 0,
            deterministic: true,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenResult {
    pub lambda2: f64,
    pub residual: f64,
    pub matvecs: usize,
}

struct Ops<'a> {
    graph: &'a CayleyGraph,
    opts: EigenOptions,
    matvecs: usize,
}

impl Ops<'_> {
    fn sum<F: Fn(usize) -> f64 + Sync + Send>(&self, n: usize, f: F) -> f64 {
        if self.opts.deterministic {
            self.opts.exec.sum_fixed(n, f)
        } else {
            self.opts.exec.sum_fast(n, f)
        }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.sum(a.len(), |i| a[i] * b[i])
    }

    fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if self.matvecs >= self.opts.max_matvecs {
            return Err(Error::NonConvergence {
                iterations: self.matvecs,
                residual: f64::NAN,
            });
        }
        self.matvecs += 1;
        self.graph.apply(x, y, self.opts.exec);
        Ok(())
    }
}

fn subtract_mean(ops: &Ops, a: &mut [f64]) {
    let n = a.len();
    let mean = ops.sum(n, |i| a[i]) / n as f64;
    ops.opts.exec.update(a, |_, x| *x -= mean);
}

fn scale(ops: &Ops, a: &mut [f64], s: f64) {
    ops.opts.exec.update(a, |_, x| *x *= s);
}

/// Runs `m` Lanczos steps from the unit vector `v0`. When `coeffs` is given,
/// also accumulates `Σ coeffs[j] v_j` into `out`. Returns the tridiagonal
/// coefficients `(alpha, beta)`; the run stops early on an invariant
/// subspace.
fn lanczos_pass(
    ops: &mut Ops,
    v0: &[f64],
    m: usize,
    coeffs: Option<(&[f64], &mut [f64])>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = v0.len();
    let mut v_prev = vec![0.0; n];
    let mut v = v0.to_vec();
    let mut w = vec![0.0; n];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut coeffs = coeffs;
    for j in 0..m {
        if let Some((c, out)) = coeffs.as_mut() {
            let cj = c[j];
            ops.opts.exec.update(out, |i, o| *o += cj * v[i]);
        }
        ops.apply(&v, &mut w)?;
        let a = ops.dot(&w, &v);
        alpha.push(a);
        if j + 1 == m {
            break;
        }
        let b_prev = beta.last().copied().unwrap_or(0.0);
        {
            let (vp, vv) = (&v_prev, &v);
            ops.opts
                .exec
                .update(&mut w, |i, x| *x -= a * vv[i] + b_prev * vp[i]);
        }
        subtract_mean(ops, &mut w);
        let b = ops.norm(&w);
        if b <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        beta.push(b);
        std::mem::swap(&mut v_prev, &mut v);
        let inv = 1.0 / b;
        ops.opts.exec.fill(&mut v, |i| w[i] * inv);
    }
    Ok((alpha, beta))
}

fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    (
        theta,
        eig.eigenvectors.column(idx).iter().copied().collect(),
    )
}

/// Largest adjacency eigenvalue on the complement of the constants.
pub fn second_eigenvalue(graph: &CayleyGraph, opts: EigenOptions) -> Result<EigenResult> {
    let n = graph.vertex_count();
    if n < 2 {
        return Err(Error::Precondition(
            "graph needs at least two vertices".into(),
        ));
    }
    let mut ops = Ops {
        graph,
        opts,
        matvecs: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    subtract_mean(&ops, &mut x);
    let nx = ops.norm(&x);
    scale(&ops, &mut x, 1.0 / nx);
    let mut last_residual = f64::INFINITY;
    let mut ax = vec![0.0; n];
    loop {
        let m = CYCLE.min(n - 1);
        let run = lanczos_pass(&mut ops, &x, m, None);
        let (alpha, beta) = match run {
            Ok(ab) => ab,
            Err(_) => break,
        };
        let (_, s) = top_ritz(&alpha, &beta);
        let mut y = vec![0.0; n];
        if lanczos_pass(&mut ops, &x, alpha.len(), Some((&s, &mut y))).is_err() {
            break;
        }
        subtract_mean(&ops, &mut y);
        let ny = ops.norm(&y);
        scale(&ops, &mut y, 1.0 / ny);
        if ops.apply(&y, &mut ax).is_err() {
            break;
        }
        let rq = ops.dot(&ax, &y);
        let residual = ops.sum(n, |i| (ax[i] - rq * y[i]).powi(2)).sqrt();
        last_residual = residual;
        if residual <= opts.tol {
            return Ok(EigenResult {
                lambda2: rq,
                residual,
                matvecs: ops.matvecs,
            });
        }
        x = y;
    }
    Err(Error::NonConvergence {
        iterations: ops.matvecs,
        residual: last_residual,
    })
}

/// One row of a spectral gap table.
#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub q: u32,
    pub order: usize,
    pub degree: usize,
    pub lambda2: f64,
    pub gap: f64,
    pub residual: f64,
    pub connected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    /// Set when the gap at the last modulus is below half the gap at the
    /// first.
    pub shrinking: bool,
}

/// `λ₂` and `degree - λ₂` of `Cay(G(q), T ∪ T⁻¹)` for each modulus, with `T`
/// the loop generators of the class root.
pub fn gap_report(
    class: &RauzyClass,
    qs: &[u32],
    block: Block,
    max_elements: usize,
    opts: EigenOptions,
) -> Result<GapReport> {
    let mut rows = Vec::with_capacity(qs.len());
    for &q in qs {
        let group = RauzyGroup::build(class, q, block, max_elements, opts.exec)?;
        let graph = CayleyGraph::from_group(&group.closure, &group.generators, opts.exec)?;
        drop(group);
        let connected = graph.is_connected();
        let eig = second_eigenvalue(&graph, opts)?;
        rows.push(GapRow {
            q,
            order: graph.vertex_count(),
            degree: graph.degree(),
            lambda2: eig.lambda2,
            gap: graph.degree() as f64 - eig.lambda2,
            residual: eig.residual,
            connected,
        });
    }
    let shrinking = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.gap < 0.5 * a.gap,
        _ => false,
    };
    Ok(GapReport { rows, shrinking })
}
