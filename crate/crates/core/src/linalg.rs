//! Exact linear algebra over `F_p` and `Z/p^r`: echelon forms, ranks, kernels, Smith and
//! antisymmetric Smith normal forms, divisor profiles, module kernels and isolation tests.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::Zpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation needs a field but the ring is {0}")]
    NotAField(String),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("rings differ: {0} vs {1}")]
    RingMismatch(String, String),
}

/// Dense matrix with entries in `Z/p^r`, stored row-major as canonical residues.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    ring: Zpr,
    data: Vec<u64>,
}

/// A matrix over a prime field (`r = 1`).
pub type FieldMatrix = ModMatrix;
/// A matrix over `Z/p^r`.
pub type RingMatrix = ModMatrix;

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize, ring: Zpr) -> Self {
        ModMatrix { rows, cols, ring, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, ring: Zpr) -> Self {
        let mut m = Self::zeros(n, n, ring);
        for i in 0..n {
            m.data[i * n + i] = 1 % ring.modulus();
        }
        m
    }

    /// Builds a matrix from signed integers, reducing each entry.
    pub fn from_i64(rows: usize, cols: usize, ring: Zpr, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        let data = entries.iter().map(|&v| ring.from_i64(v)).collect();
        ModMatrix { rows, cols, ring, data }
    }

    /// Builds a matrix from residues, reducing each entry.
    pub fn from_raw(rows: usize, cols: usize, ring: Zpr, entries: Vec<u64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        let m = ring.modulus();
        let data = entries.into_iter().map(|v| v % m).collect();
        ModMatrix { rows, cols, ring, data }
    }

    pub fn from_rows(ring: Zpr, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend(r.iter().map(|&v| v % ring.modulus()));
        }
        ModMatrix { rows: rows.len(), cols, ring, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn ring(&self) -> Zpr {
        self.ring
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.ring.modulus();
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.ring);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &ModMatrix) -> Result<ModMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(self.cols, other.rows));
        }
        if self.ring != other.ring {
            return Err(LinalgError::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        let z = self.ring;
        let mut out = Self::zeros(self.rows, other.cols, z);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = z.add(out.data[idx], z.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: u64) -> ModMatrix {
        let z = self.ring;
        let data = self.data.iter().map(|&v| z.mul(v, c % z.modulus())).collect();
        ModMatrix { data, ..*self }
    }

    pub fn add(&self, other: &ModMatrix) -> Result<ModMatrix, LinalgError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::DimensionMismatch(self.rows * self.cols, other.rows * other.cols));
        }
        let z = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| z.add(a, b)).collect();
        Ok(ModMatrix { data, ..*self })
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let z = self.ring;
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(0, |acc, (&a, &b)| z.add(acc, z.mul(a, b)))
            })
            .collect()
    }

    /// Exact antisymmetry: `M^T = -M` with zero diagonal.
    pub fn is_antisymmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let z = self.ring;
        (0..self.rows).all(|i| {
            self.get(i, i) == 0 && (0..i).all(|j| self.get(i, j) == z.neg(self.get(j, i)))
        })
    }

    /// Reduces every entry to level `t` (the same prime).
    pub fn reduce_to(&self, t: u32) -> ModMatrix {
        let ring = self.ring.with_level(t).expect("valid level");
        let m = ring.modulus();
        let data = self.data.iter().map(|&v| v % m).collect();
        ModMatrix { rows: self.rows, cols: self.cols, ring, data }
    }

    /// Reinterprets the residues at a higher level (canonical representatives are kept).
    pub fn lift_to(&self, t: u32) -> ModMatrix {
        let ring = self.ring.with_level(t).expect("valid level");
        ModMatrix { rows: self.rows, cols: self.cols, ring, data: self.data.clone() }
    }
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {}", self.rows, self.cols, self.ring)?;
        for i in 0..self.rows {
            let row: Vec<i64> = self.row(i).iter().map(|&v| self.ring.to_signed(v)).collect();
            writeln!(f, "  {:?}", row)?;
        }
        Ok(())
    }
}

/// Row-reduces a row-major buffer over a prime field to reduced echelon form in place and
/// returns the pivot columns.
pub fn rref_in_place(data: &mut [u64], rows: usize, cols: usize, f: &Zpr) -> Vec<usize> {
    debug_assert!(f.is_field());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                data.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = f.unit_inverse(data[r * cols + c]).expect("nonzero pivot");
        for j in c..cols {
            data[r * cols + j] = f.mul(data[r * cols + j], inv);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = data[i * cols + c];
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let v = f.mul(factor, data[r * cols + j]);
                data[i * cols + j] = f.sub(data[i * cols + j], v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over a small prime field of a `u32` buffer (destroyed). Intended for hot loops.
pub fn rank_small(buf: &mut [u32], rows: usize, cols: usize, p: u32) -> usize {
    let p64 = p as u64;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| buf[i * cols + c] != 0) else {
            continue;
        };
        if pr != r {
            for j in c..cols {
                buf.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = small_inverse(buf[r * cols + c], p);
        for j in c..cols {
            buf[r * cols + j] = ((buf[r * cols + j] as u64 * inv as u64) % p64) as u32;
        }
        for i in r + 1..rows {
            let factor = buf[i * cols + c] as u64;
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let v = (factor * buf[r * cols + j] as u64) % p64;
                buf[i * cols + j] = ((buf[i * cols + j] as u64 + p64 - v) % p64) as u32;
            }
        }
        r += 1;
    }
    r
}

#[inline]
fn small_inverse(a: u32, p: u32) -> u32 {
    let (p, mut b, mut e, mut acc) = (p as u64, a as u64, p as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc as u32
}

/// A subspace of `F_p^n` in canonical reduced row echelon form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    p: u64,
    basis: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Subspace {
    /// The span of arbitrary vectors (reduced mod p).
    pub fn span(ambient: usize, p: u64, vectors: &[Vec<u64>]) -> Self {
        let f = Zpr::field(p).expect("odd prime");
        let mut data = Vec::with_capacity(vectors.len() * ambient);
        for v in vectors {
            assert_eq!(v.len(), ambient, "vector length differs from ambient dimension");
            data.extend(v.iter().map(|&x| x % p));
        }
        let rows = vectors.len();
        let pivots = rref_in_place(&mut data, rows, ambient, &f);
        let basis = (0..pivots.len()).map(|i| data[i * ambient..(i + 1) * ambient].to_vec()).collect();
        Subspace { ambient, p, basis, pivots }
    }

    pub fn zero(ambient: usize, p: u64) -> Self {
        Subspace { ambient, p, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize, p: u64) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1;
                v
            })
            .collect();
        Subspace { ambient, p, basis, pivots: (0..ambient).collect() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Coordinates of `v` in the echelon basis, or `None` if `v` is not in the subspace.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        let f = Zpr::field(self.p).expect("odd prime");
        let c: Vec<u64> = self.pivots.iter().map(|&j| v[j] % self.p).collect();
        let mut w: Vec<u64> = v.iter().map(|&x| x % self.p).collect();
        for (ci, b) in c.iter().zip(&self.basis) {
            for (wj, &bj) in w.iter_mut().zip(b) {
                *wj = f.sub(*wj, f.mul(*ci, bj));
            }
        }
        w.iter().all(|&x| x == 0).then_some(c)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|b| other.contains(b))
    }

    /// The vector `sum c_i basis_i`.
    pub fn combination(&self, c: &[u64]) -> Vec<u64> {
        let f = Zpr::field(self.p).expect("odd prime");
        let mut v = vec![0; self.ambient];
        for (ci, b) in c.iter().zip(&self.basis) {
            if *ci == 0 {
                continue;
            }
            for (vj, &bj) in v.iter_mut().zip(b) {
                *vj = f.add(*vj, f.mul(*ci, bj));
            }
        }
        v
    }
}

/// Canonical subspace equality.
pub fn subspace_equal(a: &Subspace, b: &Subspace) -> Result<bool, LinalgError> {
    if a.ambient != b.ambient {
        return Err(LinalgError::DimensionMismatch(a.ambient, b.ambient));
    }
    Ok(a.basis == b.basis)
}

/// Rank and canonical kernel `{v : M v = 0}` over a prime field.
pub fn rank_and_kernel(m: &FieldMatrix) -> Result<(usize, Subspace), LinalgError> {
    let f = m.ring;
    if !f.is_field() {
        return Err(LinalgError::NotAField(f.to_string()));
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut data = m.data.clone();
    let pivots = rref_in_place(&mut data, rows, cols, &f);
    let rank = pivots.len();
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut kernel = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0; cols];
        v[free] = 1;
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = f.neg(data[i * cols + free]);
        }
        kernel.push(v);
    }
    Ok((rank, Subspace::span(cols, f.p(), &kernel)))
}

/// Rank over a prime field.
pub fn rank(m: &FieldMatrix) -> Result<usize, LinalgError> {
    Ok(rank_and_kernel(m)?.0)
}

/// Output of [`smith_normal_form`]: `U M V = D` with `D` diagonal, `D_ii = p^{e_i}`.
#[derive(Debug, Clone)]
pub struct Snf {
    /// Exponents `e_1 <= e_2 <= ...`, one per diagonal slot (`min(rows, cols)` of them);
    /// a zero diagonal entry has exponent `r`.
    pub exponents: Vec<u32>,
    pub u: RingMatrix,
    pub v: RingMatrix,
    pub d: RingMatrix,
}

fn min_valuation_entry(a: &[u64], cols: usize, rows_from: usize, rows_to: usize, cols_from: usize, z: &Zpr) -> Option<(usize, usize, u32)> {
    let mut best: Option<(usize, usize, u32)> = None;
    for i in rows_from..rows_to {
        for j in cols_from..cols {
            let x = a[i * cols + j];
            if x == 0 {
                continue;
            }
            let v = z.valuation(x);
            if best.map_or(true, |(_, _, bv)| v < bv) {
                best = Some((i, j, v));
                if v == 0 {
                    return best;
                }
            }
        }
    }
    best
}

/// Smith normal form over `Z/p^r` with exact transforms.
pub fn smith_normal_form(m: &RingMatrix) -> Snf {
    let z = m.ring;
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut u = ModMatrix::identity(rows, z).data;
    let mut v = ModMatrix::identity(cols, z).data;
    let n = rows.min(cols);
    let mut exponents = vec![z.level(); n];
    for t in 0..n {
        let Some((pi, pj, val)) = min_valuation_entry(&a, cols, t, rows, t, &z) else {
            break;
        };
        exponents[t] = val;
        if pi != t {
            for j in 0..cols {
                a.swap(pi * cols + j, t * cols + j);
            }
            for j in 0..rows {
                u.swap(pi * rows + j, t * rows + j);
            }
        }
        if pj != t {
            for i in 0..rows {
                a.swap(i * cols + pj, i * cols + t);
            }
            for i in 0..cols {
                v.swap(i * cols + pj, i * cols + t);
            }
        }
        // Normalise the pivot to exactly p^val.
        let (_, unit) = z.split(a[t * cols + t]);
        let uinv = z.unit_inverse(unit % z.modulus()).expect("unit part");
        for j in 0..cols {
            a[t * cols + j] = z.mul(a[t * cols + j], uinv);
        }
        for j in 0..rows {
            u[t * rows + j] = z.mul(u[t * rows + j], uinv);
        }
        let piv = a[t * cols + t];
        debug_assert_eq!(piv, z.p_pow(val));
        for i in t + 1..rows {
            let x = a[i * cols + t];
            if x == 0 {
                continue;
            }
            let q = x / piv;
            for j in t..cols {
                a[i * cols + j] = z.sub(a[i * cols + j], z.mul(q, a[t * cols + j]));
            }
            for j in 0..rows {
                u[i * rows + j] = z.sub(u[i * rows + j], z.mul(q, u[t * rows + j]));
            }
        }
        for j in t + 1..cols {
            let x = a[t * cols + j];
            if x == 0 {
                continue;
            }
            let q = x / piv;
            for i in t..rows {
                a[i * cols + j] = z.sub(a[i * cols + j], z.mul(q, a[i * cols + t]));
            }
            for i in 0..cols {
                v[i * cols + j] = z.sub(v[i * cols + j], z.mul(q, v[i * cols + t]));
            }
        }
    }
    Snf {
        exponents,
        u: ModMatrix { rows, cols: rows, ring: z, data: u },
        v: ModMatrix { rows: cols, cols, ring: z, data: v },
        d: ModMatrix { rows, cols, ring: z, data: a },
    }
}

/// Only the SNF exponents, computed in place on a scratch buffer.
pub fn snf_exponents_in_place(a: &mut [u64], rows: usize, cols: usize, z: &Zpr, out: &mut Vec<u32>) {
    out.clear();
    let n = rows.min(cols);
    for t in 0..n {
        let Some((pi, pj, val)) = min_valuation_entry(a, cols, t, rows, t, z) else {
            out.resize(n, z.level());
            return;
        };
        out.push(val);
        if pi != t {
            for j in t..cols {
                a.swap(pi * cols + j, t * cols + j);
            }
        }
        if pj != t {
            for i in t..rows {
                a.swap(i * cols + pj, i * cols + t);
            }
        }
        let (_, unit) = z.split(a[t * cols + t]);
        let uinv = z.unit_inverse(unit % z.modulus()).expect("unit part");
        for j in t..cols {
            a[t * cols + j] = z.mul(a[t * cols + j], uinv);
        }
        let piv = a[t * cols + t];
        for i in t + 1..rows {
            let x = a[i * cols + t];
            if x == 0 {
                continue;
            }
            let q = x / piv;
            for j in t..cols {
                a[i * cols + j] = z.sub(a[i * cols + j], z.mul(q, a[t * cols + j]));
            }
        }
        // Column clearing does not change the remaining block: row t is p^val e_t plus
        // entries that are multiples of the pivot, and the other rows have zero in column t.
    }
}

/// Truncated elementary divisor exponents of an antisymmetric matrix, paired.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorProfile {
    pub exponents: Vec<u32>,
    pub odd_slot: bool,
}

impl DivisorProfile {
    /// Number of exponents equal to zero (unit pairs).
    pub fn unit_pairs(&self) -> usize {
        self.exponents.iter().filter(|&&e| e == 0).count()
    }
}

impl fmt::Display for DivisorProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")?;
        if self.odd_slot {
            write!(f, "+odd")?;
        }
        Ok(())
    }
}

/// Result of [`antisymmetric_snf`]: `S^T M S` is block diagonal.
#[derive(Debug, Clone)]
pub struct Asnf {
    pub profile: DivisorProfile,
    pub s: RingMatrix,
    pub normal_form: RingMatrix,
}

/// Antisymmetric elimination on a scratch buffer; returns the paired exponents.
/// When `s` is given, column operations are mirrored into it so that `S^T M S` is the result.
fn asnf_core(a: &mut [u64], n: usize, z: &Zpr, mut s: Option<&mut [u64]>) -> Vec<u32> {
    let h = n / 2;
    let mut exps = vec![z.level(); h];
    // Simultaneous row/column swap.
    fn swap_rc(a: &mut [u64], n: usize, x: usize, y: usize, s: &mut Option<&mut [u64]>) {
        if x == y {
            return;
        }
        for j in 0..n {
            a.swap(x * n + j, y * n + j);
        }
        for i in 0..n {
            a.swap(i * n + x, i * n + y);
        }
        if let Some(s) = s.as_deref_mut() {
            for i in 0..n {
                s.swap(i * n + x, i * n + y);
            }
        }
    }
    // col_l -= c * col_k and row_l -= c * row_k.
    fn sub_rc(a: &mut [u64], n: usize, l: usize, k: usize, c: u64, z: &Zpr, s: &mut Option<&mut [u64]>) {
        if c == 0 {
            return;
        }
        for i in 0..n {
            a[i * n + l] = z.sub(a[i * n + l], z.mul(c, a[i * n + k]));
        }
        for j in 0..n {
            a[l * n + j] = z.sub(a[l * n + j], z.mul(c, a[k * n + j]));
        }
        if let Some(s) = s.as_deref_mut() {
            for i in 0..n {
                s[i * n + l] = z.sub(s[i * n + l], z.mul(c, s[i * n + k]));
            }
        }
    }
    for (k, exp) in exps.iter_mut().enumerate() {
        let b = 2 * k;
        let Some((i, j, val)) = min_valuation_entry(a, n, b, n, b, z) else {
            break;
        };
        *exp = val;
        // (i, j) lies strictly above the diagonal by the row-major tie-break.
        debug_assert!(i < j);
        swap_rc(a, n, b, i, &mut s);
        let j = if j == b { i } else { j };
        swap_rc(a, n, b + 1, j, &mut s);
        // Scale row/column b+1 so that the pivot is exactly p^val.
        let (_, unit) = z.split(a[b * n + b + 1]);
        let uinv = z.unit_inverse(unit % z.modulus()).expect("unit part");
        for t in 0..n {
            a[t * n + b + 1] = z.mul(a[t * n + b + 1], uinv);
        }
        for t in 0..n {
            a[(b + 1) * n + t] = z.mul(a[(b + 1) * n + t], uinv);
        }
        if let Some(s) = s.as_deref_mut() {
            for t in 0..n {
                s[t * n + b + 1] = z.mul(s[t * n + b + 1], uinv);
            }
        }
        let piv = a[b * n + b + 1];
        for l in b + 2..n {
            let alpha = a[b * n + l] / piv;
            sub_rc(a, n, l, b + 1, alpha, z, &mut s);
            let beta = z.neg(a[(b + 1) * n + l] / piv);
            sub_rc(a, n, l, b, beta, z, &mut s);
        }
    }
    exps
}

fn check_antisymmetric(m: &RingMatrix) -> Result<(), LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::NotSquare(m.rows, m.cols));
    }
    if !m.is_antisymmetric() {
        return Err(LinalgError::NotAntisymmetric);
    }
    Ok(())
}

/// Antisymmetric Smith normal form by congruence.
pub fn antisymmetric_snf(m: &RingMatrix) -> Result<Asnf, LinalgError> {
    check_antisymmetric(m)?;
    let n = m.rows;
    let z = m.ring;
    let mut a = m.data.clone();
    let mut s = ModMatrix::identity(n, z).data;
    let exponents = asnf_core(&mut a, n, &z, Some(&mut s));
    Ok(Asnf {
        profile: DivisorProfile { exponents, odd_slot: n % 2 == 1 },
        s: ModMatrix { rows: n, cols: n, ring: z, data: s },
        normal_form: ModMatrix { rows: n, cols: n, ring: z, data: a },
    })
}

/// The block-diagonal matrix with blocks `[[0, p^e], [-p^e, 0]]` for a profile.
pub fn asnf_block_form(profile: &DivisorProfile, z: Zpr) -> RingMatrix {
    let n = 2 * profile.exponents.len() + usize::from(profile.odd_slot);
    let mut out = ModMatrix::zeros(n, n, z);
    for (k, &e) in profile.exponents.iter().enumerate() {
        let pe = z.p_pow(e);
        out.set(2 * k, 2 * k + 1, pe);
        out.set(2 * k + 1, 2 * k, z.neg(pe));
    }
    out
}

/// Profile of an antisymmetric matrix (exponents clamped at `r`).
pub fn divisor_profile(m: &RingMatrix) -> Result<DivisorProfile, LinalgError> {
    check_antisymmetric(m)?;
    let mut a = m.data.clone();
    let z = m.ring;
    let mut exponents = asnf_core(&mut a, m.rows, &z, None);
    for e in exponents.iter_mut() {
        *e = (*e).min(z.level());
    }
    Ok(DivisorProfile { exponents, odd_slot: m.rows % 2 == 1 })
}

/// Profile from a scratch buffer without any checks; used in enumeration loops.
pub fn divisor_profile_in_place(a: &mut [u64], n: usize, z: &Zpr) -> Vec<u32> {
    asnf_core(a, n, z, None)
}

/// Generators (as rows) of `{v : M v = 0}` over `Z/p^r`.
pub fn module_kernel(m: &RingMatrix) -> RingMatrix {
    let z = m.ring;
    let r = z.level();
    let snf = smith_normal_form(m);
    let cols = m.cols;
    let mut gens = Vec::new();
    for i in 0..cols {
        let e = snf.exponents.get(i).copied().unwrap_or(r);
        let scale = z.p_pow(r - e.min(r));
        if scale == 0 {
            continue;
        }
        let g: Vec<u64> = (0..cols).map(|row| z.mul(scale, snf.v.get(row, i))).collect();
        gens.push(g);
    }
    ModMatrix::from_rows(z, cols, &gens)
}

/// Whether the row span of `gens` is a direct summand: every nonzero invariant factor is a unit.
pub fn is_isolated(gens: &RingMatrix) -> bool {
    let r = gens.ring.level();
    if gens.rows == 0 {
        return true;
    }
    smith_normal_form(gens).exponents.iter().all(|&e| e == 0 || e == r)
}

/// Isolation test for an integer generator matrix: every nonzero invariant factor is prime to `p`.
pub fn is_isolated_integer(gens: &[Vec<i64>], p: u64) -> bool {
    // The rank over Q and over F_p agree iff every nonzero invariant factor is a p-unit.
    let rows: Vec<Vec<BigInt>> = gens.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let rank_q = rank_over_q(&rows);
    let f = Zpr::field(p).expect("odd prime");
    let cols = gens.first().map_or(0, |r| r.len());
    let mut data: Vec<u64> = gens.iter().flat_map(|r| r.iter().map(|&x| f.from_i64(x))).collect();
    let rank_p = rref_in_place(&mut data, gens.len(), cols, &f).len();
    rank_q == rank_p
}

fn rank_over_q(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(pr, r);
        for i in r + 1..nrows {
            if m[i][c].is_zero() {
                continue;
            }
            let (a, b) = (m[r][c].clone(), m[i][c].clone());
            for j in c..ncols {
                m[i][j] = &a * &m[i][j] - &b * &m[r][j];
            }
        }
        r += 1;
        if r == nrows {
            break;
        }
    }
    r
}

/// Exact determinant of a square integer matrix by fraction-free (Bareiss) elimination.
pub fn det_bareiss(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(sw) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, sw);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}
