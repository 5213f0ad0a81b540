//! Matrix groups over `Z/q`: closure by breadth-first search, orbits, group
//! orders, and the strong approximation certificate for Rauzy-Veech groups.

use std::hash::{BuildHasher, Hasher};

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::homology::{loop_matrix, select_convention, ArrowConvention, Block, HomologyFrame};
use crate::intmat::IntMatrix;
use crate::rauzy::RauzyClass;

pub const DEFAULT_MAX_ELEMENTS: usize = 10_000_000;

/// Frontier elements expanded per batch during closure.
const BATCH: usize = 1 << 16;

/// `n × n` matrix over `Z/q`, row-major with entries in `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ModMatrix {
    pub n: usize,
    pub q: u32,
    pub data: Vec<u32>,
}

impl ModMatrix {
    pub fn identity(n: usize, q: u32) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1 % q;
        }
        ModMatrix { n, q, data }
    }

    pub fn from_int(m: &IntMatrix, q: u32) -> Self {
        assert!(m.is_square());
        ModMatrix {
            n: m.rows(),
            q,
            data: m.reduce(q as u64),
        }
    }

    pub fn from_rows(rows: &[Vec<i64>], q: u32) -> Self {
        Self::from_int(&IntMatrix::from_rows(rows), q)
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.n + c]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, self.q)
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!((self.n, self.q), (other.n, other.q));
        let (n, q) = (self.n, self.q as u64);
        let mut data = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: u64 = (0..n)
                    .map(|k| self.get(i, k) as u64 * other.get(k, j) as u64)
                    .sum();
                data[i * n + j] = (s % q) as u32;
            }
        }
        ModMatrix { n, q: self.q, data }
    }

    /// Column action `M v`.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        let q = self.q as u64;
        (0..self.n)
            .map(|i| {
                let s: u64 = (0..self.n)
                    .map(|k| self.get(i, k) as u64 * v[k] as u64)
                    .sum();
                (s % q) as u32
            })
            .collect()
    }

    /// Reduction to a divisor `q1` of `q`.
    pub fn reduce(&self, q1: u32) -> ModMatrix {
        assert_eq!(self.q % q1, 0);
        ModMatrix {
            n: self.n,
            q: q1,
            data: self.data.iter().map(|x| x % q1).collect(),
        }
    }
}

/// Packs an `n × n` matrix mod `q` into a `u128`, one base-`q` row index per
/// fixed-width bit field.
#[derive(Debug, Clone, Copy)]
struct Codec {
    n: usize,
    q: u32,
    row_count: usize,
    row_bits: u32,
}

impl Codec {
    fn new(n: usize, q: u32) -> Result<Self> {
        let row_count = (q as u128)
            .checked_pow(n as u32)
            .filter(|&c| c <= u32::MAX as u128)
            .ok_or(Error::Overflow("row encoding"))?;
        let row_bits = 128 - (row_count - 1).leading_zeros();
        if n as u32 * row_bits.max(1) > 128 {
            return Err(Error::Overflow("matrix encoding"));
        }
        Ok(Codec {
            n,
            q,
            row_count: row_count as usize,
            row_bits: row_bits.max(1),
        })
    }

    fn row_index(&self, row: &[u32]) -> u32 {
        row.iter().fold(0u32, |acc, &x| acc * self.q + x)
    }

    fn row_of(&self, mut idx: u32) -> Vec<u32> {
        let mut row = vec![0; self.n];
        for k in (0..self.n).rev() {
            row[k] = idx % self.q;
            idx /= self.q;
        }
        row
    }

    fn encode(&self, m: &ModMatrix) -> u128 {
        (0..self.n).fold(0u128, |key, r| {
            key | (self.row_index(&m.data[r * self.n..(r + 1) * self.n]) as u128)
                << (r as u32 * self.row_bits)
        })
    }

    #[inline]
    fn field(&self, key: u128, r: usize) -> u32 {
        ((key >> (r as u32 * self.row_bits)) & ((1u128 << self.row_bits) - 1)) as u32
    }

    fn decode(&self, key: u128) -> ModMatrix {
        let mut data = Vec::with_capacity(self.n * self.n);
        for r in 0..self.n {
            data.extend(self.row_of(self.field(key, r)));
        }
        ModMatrix {
            n: self.n,
            q: self.q,
            data,
        }
    }

    /// `table[i]` is the row index of `row_i · g`.
    fn right_table(&self, g: &ModMatrix) -> Vec<u32> {
        (0..self.row_count as u32)
            .map(|i| {
                let row = self.row_of(i);
                let q = self.q as u64;
                let prod: Vec<u32> = (0..self.n)
                    .map(|c| {
                        ((0..self.n)
                            .map(|k| row[k] as u64 * g.get(k, c) as u64)
                            .sum::<u64>()
                            % q) as u32
                    })
                    .collect();
                self.row_index(&prod)
            })
            .collect()
    }

    #[inline]
    fn right_mul(&self, key: u128, table: &[u32]) -> u128 {
        (0..self.n).fold(0u128, |out, r| {
            out | (table[self.field(key, r) as usize] as u128) << (r as u32 * self.row_bits)
        })
    }
}

#[inline]
fn hash_key(k: u128) -> u64 {
    let mut h = FxBuildHasher.build_hasher();
    h.write_u128(k);
    h.finish()
}

/// The finite group generated by a list of invertible matrices mod `q`.
///
/// Elements are stored in breadth-first order from the identity, each with
/// the generator word that first reached it.
pub struct GroupClosure {
    q: u32,
    n: usize,
    codec: Codec,
    generators: Vec<ModMatrix>,
    tables: Vec<Vec<u32>>,
    elements: Vec<u128>,
    parent: Vec<u32>,
    via: Vec<u16>,
    index: HashTable<u32>,
}

impl std::fmt::Debug for GroupClosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupClosure")
            .field("q", &self.q)
            .field("n", &self.n)
            .field("generators", &self.generators.len())
            .field("order", &self.elements.len())
            .finish()
    }
}

impl GroupClosure {
    /// Closure under right multiplication by the generators. In a finite
    /// group the monoid generated by a set equals the group it generates, so
    /// inverses need not be adjoined.
    pub fn generate(
        generators: &[ModMatrix],
        n: usize,
        q: u32,
        max_elements: usize,
        exec: Exec,
    ) -> Result<Self> {
        if q < 2 {
            return Err(Error::Precondition("modulus must be at least 2".into()));
        }
        if generators.len() > u16::MAX as usize {
            return Err(Error::Precondition("too many generators".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.n != n || g.q != q) {
            return Err(Error::Precondition(format!(
                "generator of size {} mod {} in a {n}x{n} mod {q} closure",
                g.n, g.q
            )));
        }
        let codec = Codec::new(n, q)?;
        let tables: Vec<Vec<u32>> = generators.iter().map(|g| codec.right_table(g)).collect();
        let mut gc = GroupClosure {
            q,
            n,
            codec,
            generators: generators.to_vec(),
            tables,
            elements: Vec::new(),
            parent: Vec::new(),
            via: Vec::new(),
            index: HashTable::new(),
        };
        gc.insert(
            codec.encode(&ModMatrix::identity(n, q)),
            u32::MAX,
            u16::MAX,
            max_elements,
        )?;
        let mut lo = 0;
        while lo < gc.elements.len() {
            let hi = gc.elements.len();
            let mut start = lo;
            while start < hi {
                let end = (start + BATCH).min(hi);
                let ng = gc.tables.len();
                let products = {
                    let elements = &gc.elements;
                    let tables = &gc.tables;
                    exec.map_range((end - start) * ng, |i| {
                        let (e, g) = (start + i / ng, i % ng);
                        codec.right_mul(elements[e], &tables[g])
                    })
                };
                for (i, key) in products.into_iter().enumerate() {
                    gc.insert(key, (start + i / ng) as u32, (i % ng) as u16, max_elements)?;
                }
                start = end;
            }
            lo = hi;
        }
        Ok(gc)
    }

    fn insert(&mut self, key: u128, parent: u32, via: u16, cap: usize) -> Result<()> {
        let h = hash_key(key);
        let elements = &self.elements;
        if self
            .index
            .find(h, |&i| elements[i as usize] == key)
            .is_some()
        {
            return Ok(());
        }
        if self.elements.len() >= cap || self.elements.len() >= u32::MAX as usize {
            return Err(Error::CapExceeded {
                what: "group closure element count",
                cap,
            });
        }
        let idx = self.elements.len() as u32;
        self.elements.push(key);
        self.parent.push(parent);
        self.via.push(via);
        let elements = &self.elements;
        self.index
            .insert_unique(h, idx, |&i| hash_key(elements[i as usize]));
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[ModMatrix] {
        &self.generators
    }

    pub fn element(&self, i: usize) -> ModMatrix {
        self.codec.decode(self.elements[i])
    }

    pub fn index_of(&self, m: &ModMatrix) -> Option<usize> {
        if m.n != self.n || m.q != self.q {
            return None;
        }
        let key = self.codec.encode(m);
        self.find_key(key)
    }

    #[inline]
    fn find_key(&self, key: u128) -> Option<usize> {
        self.index
            .find(hash_key(key), |&i| self.elements[i as usize] == key)
            .map(|&i| i as usize)
    }

    pub fn contains(&self, m: &ModMatrix) -> bool {
        self.index_of(m).is_some()
    }

    /// Generator indices `[g_1, ..., g_k]` with `element(i) = g_1 ⋯ g_k`.
    pub fn word(&self, mut i: usize) -> Vec<usize> {
        let mut w = Vec::new();
        while self.parent[i] != u32::MAX {
            w.push(self.via[i] as usize);
            i = self.parent[i] as usize;
        }
        w.reverse();
        w
    }

    /// For every element `x`, the index of `x · t`. `t` must lie in the group.
    pub fn right_action(&self, t: &ModMatrix, exec: Exec) -> Result<Vec<u32>> {
        if !self.contains(t) {
            return Err(Error::Precondition("element is not in the group".into()));
        }
        let table = self.codec.right_table(t);
        let mut out = vec![0u32; self.order()];
        exec.fill(&mut out, |i| {
            let key = self.codec.right_mul(self.elements[i], &table);
            self.find_key(key).expect("closed under multiplication") as u32
        });
        Ok(out)
    }

    /// Orbit of a column vector under `v ↦ g v`, in breadth-first order.
    pub fn orbit(&self, v: &[u32]) -> Vec<Vec<u32>> {
        assert_eq!(v.len(), self.n);
        let v: Vec<u32> = v.iter().map(|x| x % self.q).collect();
        orbit(&self.generators, &v)
    }

    /// `(|orbit|, |stabiliser|)`; the stabiliser size follows from the
    /// orbit-stabiliser theorem.
    pub fn orbit_stabilizer(&self, v: &[u32]) -> (usize, usize) {
        let o = self.orbit(v).len();
        (o, self.order() / o)
    }

    pub fn iter(&self) -> impl Iterator<Item = ModMatrix> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }
}

/// Orbit of `v` under the group generated by `generators` (finite, so the
/// monoid orbit is the group orbit), in breadth-first order.
pub fn orbit(generators: &[ModMatrix], v: &[u32]) -> Vec<Vec<u32>> {
    let q = generators.first().map_or(u32::MAX, |g| g.q);
    let v: Vec<u32> = v.iter().map(|x| x % q).collect();
    let mut seen = hashbrown::HashSet::new();
    seen.insert(v.clone());
    let mut out = vec![v];
    let mut i = 0;
    while i < out.len() {
        for g in generators {
            let w = g.apply(&out[i]);
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        i += 1;
    }
    out
}

/// Prime factorisation `[(p, e)]` of `q`.
pub fn factorize(mut q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= q {
        let mut e = 0;
        while q % p == 0 {
            q /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if q > 1 {
        out.push((q, 1));
    }
    out
}

/// `|Sp_{2g}(Z/q)|`: `p^{g²} ∏ (p^{2i} - 1)` per prime, lifted to `p^e` by
/// the factor `p^{(e-1) g(2g+1)}`, multiplied over the factorisation of `q`.
pub fn symplectic_order(g: u32, q: u64) -> Option<u128> {
    let mut total: u128 = 1;
    for (p, e) in factorize(q) {
        let p = p as u128;
        let mut f = p.checked_pow(g * g)?;
        for i in 1..=g {
            f = f.checked_mul(p.checked_pow(2 * i)? - 1)?;
        }
        f = f.checked_mul(p.checked_pow((e - 1) * g * (2 * g + 1))?)?;
        total = total.checked_mul(f)?;
    }
    Some(total)
}

/// `|Z_q^{2g} ⋊ Sp_{2g}(Z/q)| = q^{2g} |Sp_{2g}(Z/q)|`.
pub fn affine_symplectic_order(g: u32, q: u64) -> Option<u128> {
    (q as u128)
        .checked_pow(2 * g)?
        .checked_mul(symplectic_order(g, q)?)
}

/// Number of unimodular vectors in `(Z/q)^{2g}`: `∏_{p^e ∥ q} (p^{2ge} - p^{2g(e-1)})`.
pub fn unimodular_count(g: u32, q: u64) -> u128 {
    factorize(q)
        .into_iter()
        .map(|(p, e)| {
            let p = p as u128;
            p.pow(2 * g * e) - p.pow(2 * g * (e - 1))
        })
        .product()
}

/// Direct enumeration: vectors of `(Z/q)^{2g}` whose coordinates generate
/// the unit ideal.
pub fn unimodular_count_by_enumeration(g: u32, q: u64) -> u64 {
    let n = 2 * g as usize;
    let total = q.pow(n as u32);
    let mut count = 0;
    for mut idx in 0..total {
        let mut acc = q;
        for _ in 0..n {
            acc = num_integer::gcd(acc, idx % q);
            idx /= q;
        }
        if acc == 1 {
            count += 1;
        }
    }
    count
}

/// Semidirect coordinates of a `σ`-block element `m` relative to the lift
/// `omega` (coordinates in the `[K | ω]` basis, last entry `1`):
/// `(m ω - ω, m|_{ker δ})`.
pub fn decompose_element(m: &ModMatrix, omega: &[u32]) -> Result<(Vec<u32>, ModMatrix)> {
    let n = m.n;
    if omega.len() != n || omega[n - 1] % m.q != 1 {
        return Err(Error::Precondition("ω does not lift σ".into()));
    }
    if (0..n - 1).any(|c| m.get(n - 1, c) != 0) || m.get(n - 1, n - 1) != 1 % m.q {
        return Err(Error::Precondition(
            "matrix does not fix the σ coset".into(),
        ));
    }
    let mo = m.apply(omega);
    let translation: Vec<u32> = (0..n - 1)
        .map(|i| (mo[i] + m.q - omega[i] % m.q) % m.q)
        .collect();
    let k = n - 1;
    let mut data = Vec::with_capacity(k * k);
    for r in 0..k {
        data.extend_from_slice(&m.data[r * n..r * n + k]);
    }
    Ok((translation, ModMatrix { n: k, q: m.q, data }))
}

/// `(a_1, g_1)(a_2, g_2) = (a_1 + g_1 a_2, g_1 g_2)`.
pub fn twisted_product(
    x: &(Vec<u32>, ModMatrix),
    y: &(Vec<u32>, ModMatrix),
) -> (Vec<u32>, ModMatrix) {
    let q = x.1.q;
    let ga = x.1.apply(&y.0);
    let a = x.0.iter().zip(ga).map(|(a, b)| (a + b) % q).collect();
    (a, x.1.mul(&y.1))
}

/// The loop generators of a class as matrices mod `q` in the chosen
/// representation, deduplicated in first-occurrence order with the identity
/// removed.
pub fn loop_generators_mod_q(
    class: &RauzyClass,
    frame: &HomologyFrame,
    block: Block,
    conv: ArrowConvention,
    q: u32,
) -> Result<Vec<ModMatrix>> {
    let mut out: Vec<ModMatrix> = Vec::new();
    let mut seen = hashbrown::HashSet::new();
    for w in class.loop_generators() {
        let m = loop_matrix(class, &w, conv)?;
        let r = ModMatrix::from_int(&frame.restrict(&m, block)?, q);
        if !r.is_identity() && seen.insert(r.clone()) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Machine-checkable comparison of a closure order with the predicted order
/// of the full group.
#[derive(Debug, Clone, Serialize)]
pub struct StrongApproxReport {
    pub class_root: String,
    pub q: u32,
    pub block: Block,
    pub genus: usize,
    pub sigma: Vec<i64>,
    pub convention: ArrowConvention,
    pub generator_count: usize,
    pub predicted_order: Option<u128>,
    pub closure_order: usize,
    pub pass: bool,
}

/// Predicted `|G_σ(q)|` for a representation.
pub fn predicted_order(frame: &HomologyFrame, block: Block, q: u32) -> Option<u128> {
    let g = frame.genus as u32;
    let s = frame.boundary.singularity_count;
    match block {
        Block::Absolute => symplectic_order(g, q as u64),
        Block::Sigma => affine_symplectic_order(g, q as u64),
        Block::FullRelative if s == 1 => symplectic_order(g, q as u64),
        Block::FullRelative if s == 2 => affine_symplectic_order(g, q as u64),
        Block::FullRelative => None,
    }
}

/// Closure of the loop generators at the class root together with the frame,
/// generators and convention it was built from.
pub struct RauzyGroup {
    pub frame: HomologyFrame,
    pub convention: ArrowConvention,
    pub block: Block,
    pub generators: Vec<ModMatrix>,
    pub closure: GroupClosure,
}

impl RauzyGroup {
    pub fn build(
        class: &RauzyClass,
        q: u32,
        block: Block,
        max_elements: usize,
        exec: Exec,
    ) -> Result<Self> {
        if q < 3 || q % 2 == 0 {
            return Err(Error::Precondition(format!(
                "q must be odd and at least 3, got {q}"
            )));
        }
        let frame = HomologyFrame::new(class.root_pair())?;
        let convention = select_convention(class)?;
        let generators = loop_generators_mod_q(class, &frame, block, convention, q)?;
        let n = frame.basis(block)?.cols();
        let closure = GroupClosure::generate(&generators, n, q, max_elements, exec)?;
        Ok(RauzyGroup {
            frame,
            convention,
            block,
            generators,
            closure,
        })
    }

    pub fn report(
        &self,
        class: &RauzyClass,
        alphabet: &crate::perm::Alphabet,
    ) -> StrongApproxReport {
        let predicted = predicted_order(&self.frame, self.block, self.closure.modulus());
        StrongApproxReport {
            class_root: class.root_pair().format(alphabet),
            q: self.closure.modulus(),
            block: self.block,
            genus: self.frame.genus,
            sigma: self.frame.sigma.clone(),
            convention: self.convention,
            generator_count: self.generators.len(),
            predicted_order: predicted,
            closure_order: self.closure.order(),
            pass: predicted == Some(self.closure.order() as u128),
        }
    }
}

/// Strong approximation certificate: closure order against the predicted
/// order of `G_σ(q)`.
pub fn strong_approximation(
    class: &RauzyClass,
    alphabet: &crate::perm::Alphabet,
    q: u32,
    block: Block,
    max_elements: usize,
    exec: Exec,
) -> Result<StrongApproxReport> {
    Ok(RauzyGroup::build(class, q, block, max_elements, exec)?.report(class, alphabet))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl2(q: u32) -> Vec<ModMatrix> {
        vec![
            ModMatrix::from_rows(&[vec![1, 1], vec![0, 1]], q),
            ModMatrix::from_rows(&[vec![1, 0], vec![1, 1]], q),
        ]
    }

    #[test]
    fn sl2_orders() {
        for (q, order) in [(3, 24), (5, 120), (9, 648), (15, 2880)] {
            let g = GroupClosure::generate(&sl2(q), 2, q, 1 << 20, Exec::default()).unwrap();
            assert_eq!(g.order(), order);
            assert_eq!(symplectic_order(1, q as u64), Some(order as u128));
        }
    }

    #[test]
    fn trivial_generators() {
        let g = GroupClosure::generate(&[ModMatrix::identity(3, 7)], 3, 7, 10, Exec::Sequential)
            .unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.element(0).is_identity());
        let g = GroupClosure::generate(&[], 2, 5, 10, Exec::Sequential).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn words_reproduce_elements() {
        let gens = sl2(5);
        let g = GroupClosure::generate(&gens, 2, 5, 1000, Exec::Sequential).unwrap();
        for i in 0..g.order() {
            let m = g
                .word(i)
                .iter()
                .fold(ModMatrix::identity(2, 5), |acc, &k| acc.mul(&gens[k]));
            assert_eq!(m, g.element(i));
            assert_eq!(g.index_of(&m), Some(i));
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            GroupClosure::generate(&sl2(5), 2, 5, 100, Exec::Sequential),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn orders_and_counts() {
        assert_eq!(symplectic_order(2, 3), Some(51_840));
        assert_eq!(symplectic_order(2, 5), Some(9_360_000));
        assert_eq!(affine_symplectic_order(2, 3), Some(4_199_040));
        assert_eq!(unimodular_count(2, 3), 80);
        assert_eq!(unimodular_count(2, 9), 6480);
        assert_eq!(unimodular_count(2, 15), 49_920);
        assert_eq!(unimodular_count(3, 3), 728);
        assert_eq!(unimodular_count_by_enumeration(2, 9), 6480);
        assert_eq!(factorize(45), vec![(3, 2), (5, 1)]);
    }

    #[test]
    fn right_action_is_a_permutation() {
        let g = GroupClosure::generate(&sl2(3), 2, 3, 100, Exec::Parallel).unwrap();
        let t = g.generators()[0].clone();
        let mut a = g.right_action(&t, Exec::Parallel).unwrap();
        assert_eq!(a, g.right_action(&t, Exec::Sequential).unwrap());
        a.sort_unstable();
        assert_eq!(a, (0..g.order() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn orbit_stabilizer_on_sl2() {
        let g = GroupClosure::generate(&sl2(5), 2, 5, 1000, Exec::Sequential).unwrap();
        assert_eq!(g.orbit_stabilizer(&[0, 0]), (1, 120));
        assert_eq!(g.orbit_stabilizer(&[1, 0]), (24, 5));
    }
}
