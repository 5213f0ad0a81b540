//! Relative homology `Z^A` of a suspension surface: boundary map, intersection
//! form, Rauzy-Veech loop matrices and their restrictions to absolute homology
//! and to `δ⁻¹(Z σ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::perm::{Letter, PermutationPair};
use crate::polygon::Corners;
use crate::rauzy::{RauzyArrow, RauzyClass};

/// `δ : Z^A → Z^s`, `δ(e_α) = z(right end of α) - z(left end of α)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundaryMap {
    pub singularity_count: usize,
    /// `(left, right)` endpoint singularity per letter.
    pub endpoints: Vec<(usize, usize)>,
}

impl BoundaryMap {
    pub fn of(pi: &PermutationPair) -> Self {
        let c = Corners::of(pi);
        BoundaryMap {
            singularity_count: c.count(),
            endpoints: c.endpoints,
        }
    }

    pub fn d(&self) -> usize {
        self.endpoints.len()
    }

    /// `s × d` matrix of `δ`.
    pub fn matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.singularity_count, self.d());
        for (a, &(l, r)) in self.endpoints.iter().enumerate() {
            m[(r, a)] += 1;
            m[(l, a)] -= 1;
        }
        m
    }

    pub fn column(&self, l: Letter) -> Vec<i64> {
        let mut v = vec![0; self.singularity_count];
        let (a, b) = self.endpoints[l.index()];
        v[b] += 1;
        v[a] -= 1;
        v
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.d());
        let mut v = vec![0; self.singularity_count];
        for (&c, &(l, r)) in x.iter().zip(&self.endpoints) {
            v[r] += c;
            v[l] -= c;
        }
        v
    }

    /// `δ(x) mod q`, entries in `0..q`.
    pub fn apply_mod(&self, x: &[i64], q: u64) -> Vec<i64> {
        self.apply(x)
            .into_iter()
            .map(|v| v.rem_euclid(q as i64))
            .collect()
    }

    /// The reduced 0-chain `z_end - z_start`.
    pub fn chain(&self, start: usize, end: usize) -> Vec<i64> {
        let mut v = vec![0; self.singularity_count];
        v[end] += 1;
        v[start] -= 1;
        v
    }
}

/// `Ω_{αβ} = [π_t(β) < π_t(α)] - [π_b(β) < π_b(α)]`.
///
/// For `a ∈ Z^A` the absolute class `Ωᵀ a` pairs with any `y ∈ ker δ` as
/// `∩(Ωᵀ a, y) = a · y`.
pub fn intersection_matrix(pi: &PermutationPair) -> IntMatrix {
    let d = pi.d();
    let pt = pi.top_positions();
    let pb = pi.bottom_positions();
    let mut m = IntMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            m[(a, b)] = (pt[b] < pt[a]) as i64 - (pb[b] < pb[a]) as i64;
        }
    }
    m
}

/// Which elementary matrix represents a Rauzy arrow with winner `w` and
/// loser `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowConvention {
    /// `I + E_{w,l}`: `e_l ↦ e_l + e_w`.
    WinnerLoser,
    /// `I + E_{l,w}`: `e_w ↦ e_w + e_l`.
    LoserWinner,
}

impl ArrowConvention {
    pub const ALL: [ArrowConvention; 2] =
        [ArrowConvention::WinnerLoser, ArrowConvention::LoserWinner];
}

pub fn arrow_matrix(d: usize, arrow: &RauzyArrow, conv: ArrowConvention) -> IntMatrix {
    let mut m = IntMatrix::identity(d);
    let (w, l) = (arrow.winner.index(), arrow.loser.index());
    match conv {
        ArrowConvention::WinnerLoser => m[(w, l)] += 1,
        ArrowConvention::LoserWinner => m[(l, w)] += 1,
    }
    m
}

/// Inverse of [`arrow_matrix`].
pub fn arrow_matrix_inverse(d: usize, arrow: &RauzyArrow, conv: ArrowConvention) -> IntMatrix {
    let mut m = arrow_matrix(d, arrow, conv);
    let (w, l) = (arrow.winner.index(), arrow.loser.index());
    match conv {
        ArrowConvention::WinnerLoser => m[(w, l)] = -1,
        ArrowConvention::LoserWinner => m[(l, w)] = -1,
    }
    m
}

/// `C_k ⋯ C_1` for the arrows `a_1, ..., a_k` of a walk (first arrow acts
/// first). Rejects words that are not closed walks at the class root.
pub fn loop_matrix(class: &RauzyClass, word: &[usize], conv: ArrowConvention) -> Result<IntMatrix> {
    if !class.is_root_loop(word) {
        return Err(Error::Precondition(
            "arrow word is not a loop at the class root".into(),
        ));
    }
    let d = class.root_pair().d();
    let mut m = IntMatrix::identity(d);
    for &idx in word {
        m = arrow_matrix(d, &class.arrows()[idx], conv).mul(&m)?;
    }
    Ok(m)
}

/// Inverse of [`loop_matrix`], computed over the integers.
pub fn loop_matrix_inverse(
    class: &RauzyClass,
    word: &[usize],
    conv: ArrowConvention,
) -> Result<IntMatrix> {
    if !class.is_root_loop(word) {
        return Err(Error::Precondition(
            "arrow word is not a loop at the class root".into(),
        ));
    }
    let d = class.root_pair().d();
    let mut m = IntMatrix::identity(d);
    for &idx in word {
        m = m.mul(&arrow_matrix_inverse(d, &class.arrows()[idx], conv))?;
    }
    Ok(m)
}

/// Representation selected for group computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    /// Action on `Z^A`.
    FullRelative,
    /// Action on `ker δ`.
    Absolute,
    /// Action on `δ⁻¹(Z σ) = ker δ ⊕ Z ω`.
    Sigma,
}

/// Homological data of one permutation pair.
#[derive(Debug, Clone)]
pub struct HomologyFrame {
    pub pi: PermutationPair,
    pub genus: usize,
    pub boundary: BoundaryMap,
    /// `Ω` on `Z^A`.
    pub form: IntMatrix,
    /// Columns: a Z-basis of `ker δ` (`d × 2g`).
    pub kernel: IntMatrix,
    /// Intersection form on the kernel basis (`2g × 2g`).
    pub gram: IntMatrix,
    /// `σ = z_0 - z_1`, or zero with one singularity.
    pub sigma: Vec<i64>,
    /// A lift `ω` with `δ(ω) = σ` (`None` when `σ = 0`).
    pub sigma_lift: Option<Vec<i64>>,
}

impl HomologyFrame {
    pub fn new(pi: &PermutationPair) -> Result<Self> {
        let boundary = BoundaryMap::of(pi);
        let s = boundary.singularity_count;
        let d = pi.d();
        if (d + 1) < s || (d + 1 - s) % 2 != 0 {
            return Err(Error::Precondition("inconsistent singularity count".into()));
        }
        let genus = (d + 1 - s) / 2;
        let form = intersection_matrix(pi);
        let kernel = boundary.matrix().integer_kernel()?;
        if kernel.cols() != 2 * genus {
            return Err(Error::Precondition(format!(
                "ker δ has rank {} but 2g = {}",
                kernel.cols(),
                2 * genus
            )));
        }
        let gram = gram_matrix(&form, &kernel)?;
        let mut sigma = vec![0; s];
        if s >= 2 {
            sigma[0] = 1;
            sigma[1] = -1;
        }
        let sigma_lift = if s >= 2 {
            Some(find_lift(&boundary, &sigma)?)
        } else {
            None
        };
        Ok(HomologyFrame {
            pi: pi.clone(),
            genus,
            boundary,
            form,
            kernel,
            gram,
            sigma,
            sigma_lift,
        })
    }

    pub fn d(&self) -> usize {
        self.pi.d()
    }

    /// An integral `x` with `δ(x) = chain`.
    pub fn lift(&self, chain: &[i64]) -> Result<Vec<i64>> {
        find_lift(&self.boundary, chain)
    }

    pub fn sigma_is_zero(&self) -> bool {
        self.sigma.iter().all(|&x| x == 0)
    }

    /// Basis matrix (`d × n`) of the chosen representation.
    pub fn basis(&self, block: Block) -> Result<IntMatrix> {
        match block {
            Block::FullRelative => Ok(IntMatrix::identity(self.d())),
            Block::Absolute => Ok(self.kernel.clone()),
            Block::Sigma => {
                let lift = self.sigma_lift.as_ref().ok_or_else(|| {
                    Error::Precondition("sigma block needs at least two singularities".into())
                })?;
                let mut cols: Vec<Vec<i64>> = (0..self.kernel.cols())
                    .map(|j| self.kernel.column(j))
                    .collect();
                cols.push(lift.clone());
                Ok(IntMatrix::from_columns(self.d(), &cols))
            }
        }
    }

    /// Matrix of `m` (acting on `Z^A`) in the basis of `block`. Fails when the
    /// block is not invariant under `m`.
    pub fn restrict(&self, m: &IntMatrix, block: Block) -> Result<IntMatrix> {
        let b = self.basis(block)?;
        restrict_to(&b, m)
    }

    /// Coordinates of `x ∈ Z^A` in the basis of `block`, when `x` lies in it.
    pub fn coordinates(&self, x: &[i64], block: Block) -> Result<Option<Vec<i64>>> {
        Ok(self.basis(block)?.solve_integer(x))
    }

    /// Check `δ M = δ` over the integers.
    pub fn preserves_boundary(&self, m: &IntMatrix) -> Result<bool> {
        Ok(self.boundary.matrix().mul(m)? == self.boundary.matrix())
    }

    /// Check that `M` maps `ker δ` to itself and preserves the intersection
    /// form there: with `M K = K R`, `Rᵀ J R = J`.
    pub fn preserves_form_on_kernel(&self, m: &IntMatrix) -> Result<bool> {
        let r = match restrict_to(&self.kernel, m) {
            Ok(r) => r,
            Err(Error::Precondition(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(r.transpose().mul(&self.gram)?.mul(&r)? == self.gram)
    }
}

fn restrict_to(b: &IntMatrix, m: &IntMatrix) -> Result<IntMatrix> {
    let image = m.mul(b)?;
    let cols: Vec<Vec<i64>> = (0..b.cols())
        .map(|j| {
            b.solve_integer(&image.column(j))
                .ok_or_else(|| Error::Precondition("subspace is not invariant".into()))
        })
        .collect::<Result<_>>()?;
    Ok(IntMatrix::from_columns(b.cols(), &cols))
}

/// `J = Aᵀ K` where `Ωᵀ A = K`, validated to be an integral unimodular
/// antisymmetric form.
fn gram_matrix(form: &IntMatrix, kernel: &IntMatrix) -> Result<IntMatrix> {
    let ot = form.transpose();
    let n = kernel.cols();
    let mut j = IntMatrix::zeros(n, n);
    for a in 0..n {
        let coeffs = ot
            .solve_rational_any(&kernel.column(a))
            .ok_or_else(|| Error::Precondition("kernel vector outside the image of Ωᵀ".into()))?;
        for b in 0..n {
            let v: num_rational::Ratio<i128> = coeffs
                .iter()
                .zip(kernel.column(b))
                .map(|(c, y)| *c * num_rational::Ratio::from_integer(y as i128))
                .sum();
            if !v.is_integer() {
                return Err(Error::Precondition(
                    "non-integral intersection number".into(),
                ));
            }
            j[(a, b)] = v.to_integer() as i64;
        }
    }
    if j.transpose() != j.neg() || j.det()?.abs() != 1 {
        return Err(Error::Precondition(
            "intersection form is not unimodular symplectic".into(),
        ));
    }
    Ok(j)
}

/// First letter with `δ(e_α) = σ`, else the negative of one with `-σ`, else
/// any integer solution.
fn find_lift(boundary: &BoundaryMap, sigma: &[i64]) -> Result<Vec<i64>> {
    let d = boundary.d();
    let neg: Vec<i64> = sigma.iter().map(|x| -x).collect();
    for (sign, target) in [(1, sigma), (-1, &neg[..])] {
        if let Some(a) = (0..d).find(|&a| boundary.column(Letter(a as u8)) == target) {
            let mut v = vec![0; d];
            v[a] = sign;
            return Ok(v);
        }
    }
    // general case: a spanning set of columns with an integral solution
    let m = boundary.matrix();
    for a in 0..d {
        for b in a + 1..d {
            let sub = IntMatrix::from_columns(m.rows(), &[m.column(a), m.column(b)]);
            if let Some(c) = sub.solve_integer(sigma) {
                let mut v = vec![0; d];
                v[a] = c[0];
                v[b] = c[1];
                return Ok(v);
            }
        }
    }
    Err(Error::Precondition("no integral lift of σ".into()))
}

/// Outcome of checking every loop generator under one convention.
#[derive(Debug, Clone, Serialize)]
pub struct ConventionCheck {
    pub convention: ArrowConvention,
    pub loops_checked: usize,
    pub boundary_failures: usize,
    pub form_failures: usize,
}

impl ConventionCheck {
    pub fn passed(&self) -> bool {
        self.boundary_failures == 0 && self.form_failures == 0
    }
}

pub fn check_convention(
    class: &RauzyClass,
    frame: &HomologyFrame,
    loops: &[Vec<usize>],
    conv: ArrowConvention,
) -> Result<ConventionCheck> {
    let mut out = ConventionCheck {
        convention: conv,
        loops_checked: 0,
        boundary_failures: 0,
        form_failures: 0,
    };
    for w in loops {
        let m = loop_matrix(class, w, conv)?;
        out.loops_checked += 1;
        if !frame.preserves_boundary(&m)? {
            out.boundary_failures += 1;
        }
        if !frame.preserves_form_on_kernel(&m)? {
            out.form_failures += 1;
        }
    }
    Ok(out)
}

/// The first convention under which every loop generator preserves `δ` and
/// the intersection form on `ker δ`.
pub fn select_convention(class: &RauzyClass) -> Result<ArrowConvention> {
    let frame = HomologyFrame::new(class.root_pair())?;
    let loops = class.loop_generators();
    for conv in ArrowConvention::ALL {
        if check_convention(class, &frame, &loops, conv)?.passed() {
            return Ok(conv);
        }
    }
    Err(Error::Precondition(
        "no arrow convention satisfies the loop invariants".into(),
    ))
}
