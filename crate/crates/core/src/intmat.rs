//! Dense integer matrices with overflow-checked arithmetic, integer kernels
//! and exact rational solves.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};

/// Row-major `rows × cols` integer matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self[(r, c)] == (r == c) as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    acc += self[(i, k)] as i128 * other[(k, j)] as i128;
                }
                out[(i, j)] = i64::try_from(acc).map_err(|_| Error::Overflow("matrix product"))?;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let acc: i128 = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as i128 * b as i128)
                    .sum();
                i64::try_from(acc).map_err(|_| Error::Overflow("matrix-vector product"))
            })
            .collect()
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    /// Entries reduced into `0..q`.
    pub fn reduce(&self, q: u64) -> Vec<u32> {
        self.data
            .iter()
            .map(|&x| x.rem_euclid(q as i64) as u32)
            .collect()
    }

    /// Determinant of a square matrix by fraction-free elimination.
    pub fn det(&self) -> Result<i64> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|r| self.row(r).iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[i][j]
                        .checked_mul(a[k][k])
                        .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                        .ok_or(Error::Overflow("determinant"))?;
                    a[i][j] = v / prev;
                }
            }
            prev = a[k][k];
        }
        i64::try_from(sign * a[n - 1][n - 1]).map_err(|_| Error::Overflow("determinant"))
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut a = to_ratios(self);
        echelon(&mut a, self.cols).len()
    }

    /// A basis of the integer kernel `{x ∈ Z^cols : A x = 0}`, returned as the
    /// columns of a `cols × k` matrix, in Hermite normal form (as rows of the
    /// transpose) so the result is canonical.
    pub fn integer_kernel(&self) -> Result<IntMatrix> {
        let (m, n) = (self.rows, self.cols);
        let mut a: Vec<Vec<i128>> = (0..m)
            .map(|r| self.row(r).iter().map(|&x| x as i128).collect())
            .collect();
        let mut u: Vec<Vec<i128>> = (0..n)
            .map(|r| (0..n).map(|c| (r == c) as i128).collect())
            .collect();
        // column operations on `a`, mirrored on `u`
        let col_op =
            |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, f: i128| {
                for row in a.iter_mut() {
                    row[dst] -= f * row[src];
                }
                for row in u.iter_mut() {
                    row[dst] -= f * row[src];
                }
            };
        let swap = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, i: usize, j: usize| {
            for row in a.iter_mut() {
                row.swap(i, j);
            }
            for row in u.iter_mut() {
                row.swap(i, j);
            }
        };
        let mut p = 0;
        for r in 0..m {
            if p == n {
                break;
            }
            loop {
                // smallest nonzero entry in row r among columns p..n
                let piv = (p..n)
                    .filter(|&c| a[r][c] != 0)
                    .min_by_key(|&c| a[r][c].abs());
                let Some(piv) = piv else { break };
                swap(&mut a, &mut u, p, piv);
                let mut done = true;
                for c in p + 1..n {
                    if a[r][c] != 0 {
                        let f = a[r][c].div_euclid(a[r][p]);
                        col_op(&mut a, &mut u, c, p, f);
                        if a[r][c] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    p += 1;
                    break;
                }
            }
            if u.iter().flatten().any(|x| x.abs() > i64::MAX as i128 / 4) {
                return Err(Error::Overflow("integer kernel"));
            }
        }
        // columns p..n of u span the kernel; bring their transpose into HNF
        let mut basis: Vec<Vec<i128>> = (p..n).map(|c| (0..n).map(|r| u[r][c]).collect()).collect();
        hermite_rows(&mut basis);
        let cols: Vec<Vec<i64>> = basis
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&x| i64::try_from(x).map_err(|_| Error::Overflow("integer kernel")))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(IntMatrix::from_columns(n, &cols))
    }

    /// Exact solution `c` of `self · c = v` over the rationals, when it exists
    /// and the columns of `self` are independent.
    pub fn solve_rational(&self, v: &[i64]) -> Option<Vec<Ratio<i128>>> {
        self.solve_rational_impl(v, true)
    }

    /// A rational solution of `self · c = v` when the system is consistent,
    /// with free variables set to zero.
    pub fn solve_rational_any(&self, v: &[i64]) -> Option<Vec<Ratio<i128>>> {
        self.solve_rational_impl(v, false)
    }

    fn solve_rational_impl(&self, v: &[i64], unique: bool) -> Option<Vec<Ratio<i128>>> {
        assert_eq!(v.len(), self.rows);
        let n = self.cols;
        let mut aug: Vec<Vec<Ratio<i128>>> = (0..self.rows)
            .map(|r| {
                let mut row: Vec<Ratio<i128>> = self
                    .row(r)
                    .iter()
                    .map(|&x| Ratio::from_integer(x as i128))
                    .collect();
                row.push(Ratio::from_integer(v[r] as i128));
                row
            })
            .collect();
        let pivots = echelon(&mut aug, n);
        if unique && pivots.len() != n {
            return None;
        }
        // inconsistent if a zero row has nonzero right-hand side
        if aug[pivots.len()..].iter().any(|row| !row[n].is_zero()) {
            return None;
        }
        let mut x = vec![Ratio::zero(); n];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = aug[i][n];
        }
        Some(x)
    }

    /// Integer solution of `self · c = v`, when the rational solution exists
    /// and is integral.
    pub fn solve_integer(&self, v: &[i64]) -> Option<Vec<i64>> {
        self.solve_rational(v)?
            .into_iter()
            .map(|r| {
                r.is_integer()
                    .then(|| i64::try_from(r.to_integer()).ok())
                    .flatten()
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (r, c): (usize, usize)) -> &i64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut i64 {
        &mut self.data[r * self.cols + c]
    }
}

fn to_ratios(m: &IntMatrix) -> Vec<Vec<Ratio<i128>>> {
    (0..m.rows)
        .map(|r| {
            m.row(r)
                .iter()
                .map(|&x| Ratio::from_integer(x as i128))
                .collect()
        })
        .collect()
}

/// Reduced row echelon form over the first `ncols` columns. Returns pivot
/// columns.
fn echelon(a: &mut [Vec<Ratio<i128>>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c];
                let (src, dst) = if i < r {
                    let (lo, hi) = a.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = a.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= f * *s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Row Hermite normal form in place (rows of full rank stay, zero rows are
/// dropped).
fn hermite_rows(rows: &mut Vec<Vec<i128>>) {
    let n = rows.first().map_or(0, |r| r.len());
    let mut out: Vec<Vec<i128>> = Vec::new();
    let mut pending = std::mem::take(rows);
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (0..pending.len()).filter(|&i| pending[i][c] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    let mut row = pending.remove(i);
                    if row[c] < 0 {
                        row.iter_mut().for_each(|x| *x = -*x);
                    }
                    out.push(row);
                }
                break;
            }
            let &m = nz.iter().min_by_key(|&&i| pending[i][c].abs()).unwrap();
            for &i in &nz {
                if i != m {
                    let f = pending[i][c].div_euclid(pending[m][c]);
                    let src = pending[m].clone();
                    for (d, s) in pending[i].iter_mut().zip(&src) {
                        *d -= f * s;
                    }
                }
            }
        }
    }
    // reduce entries above pivots
    for i in 0..out.len() {
        let c = out[i].iter().position(|&x| x != 0).unwrap();
        for k in 0..i {
            let f = out[k][c].div_euclid(out[i][c]);
            if f != 0 {
                let src = out[i].clone();
                for (d, s) in out[k].iter_mut().zip(&src) {
                    *d -= f * s;
                }
            }
        }
    }
    *rows = out;
}
