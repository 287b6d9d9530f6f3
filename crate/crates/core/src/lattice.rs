//! Lie lattices given by integer structure constants, their commutator matrices, and the
//! built-in `sl_2`, `sl_3`, `sl_4` lattices with matrix models.

use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;
use thiserror::Error;

use crate::arith::Zpr;
use crate::linalg::{self, det_bareiss, rank_and_kernel, LinalgError, ModMatrix, RingMatrix, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("structure constants are not antisymmetric at ({i},{j},{h})")]
    NotAntisymmetric { i: usize, j: usize, h: usize },
    #[error("Jacobi identity fails for basis triple ({i},{j},{k})")]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("matrix has nonzero trace")]
    NonZeroTrace,
    #[error("subspace is not closed under the bracket")]
    NotSubalgebra,
    #[error("vectors are linearly dependent")]
    DependentBasis,
    #[error("expected {expected} coordinates, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("sl_{0} is not built in (n must be 2, 3 or 4)")]
    Unsupported(usize),
    #[error("structure constant table: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A Lie lattice: `[b_i, b_j] = sum_h lambda_{ij}^h b_h` with integer constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieLattice {
    name: String,
    d: usize,
    lambda: Vec<i64>,
}

impl LieLattice {
    /// Validates antisymmetry and the Jacobi identity over the integers.
    pub fn new(name: impl Into<String>, d: usize, lambda: Vec<i64>) -> Result<Self, LatticeError> {
        if lambda.len() != d * d * d {
            return Err(LatticeError::BadLength { expected: d * d * d, got: lambda.len() });
        }
        let l = LieLattice { name: name.into(), d, lambda };
        l.check_antisymmetry()?;
        l.check_jacobi()?;
        Ok(l)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `h = floor(d/2)`, the number of elementary-divisor pairs.
    pub fn h(&self) -> usize {
        self.d / 2
    }

    #[inline]
    pub fn constant(&self, i: usize, j: usize, h: usize) -> i64 {
        self.lambda[(i * self.d + j) * self.d + h]
    }

    pub fn constants(&self) -> &[i64] {
        &self.lambda
    }

    fn check_antisymmetry(&self) -> Result<(), LatticeError> {
        let d = self.d;
        for i in 0..d {
            for j in 0..d {
                for h in 0..d {
                    if self.constant(i, j, h) != -self.constant(j, i, h) {
                        return Err(LatticeError::NotAntisymmetric { i, j, h });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_jacobi(&self) -> Result<(), LatticeError> {
        let d = self.d;
        let basis = |i: usize| {
            let mut v = vec![0i64; d];
            v[i] = 1;
            v
        };
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let (bi, bj, bk) = (basis(i), basis(j), basis(k));
                    let t1 = self.bracket(&self.bracket(&bi, &bj), &bk);
                    let t2 = self.bracket(&self.bracket(&bj, &bk), &bi);
                    let t3 = self.bracket(&self.bracket(&bk, &bi), &bj);
                    if (0..d).any(|h| t1[h] + t2[h] + t3[h] != 0) {
                        return Err(LatticeError::Jacobi { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    /// Integer bracket of coordinate vectors.
    pub fn bracket(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let d = self.d;
        let mut out = vec![0i64; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for (h, o) in out.iter_mut().enumerate() {
                    *o += x[i] * y[j] * self.lambda[base + h];
                }
            }
        }
        out
    }

    /// Bracket of residue vectors in `Z/p^r`.
    pub fn bracket_mod(&self, x: &[u64], y: &[u64], z: &Zpr) -> Vec<u64> {
        let d = self.d;
        let mut out = vec![0u64; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0 {
                    continue;
                }
                let c = z.mul(x[i], y[j]);
                let base = (i * d + j) * d;
                for (h, o) in out.iter_mut().enumerate() {
                    let l = self.lambda[base + h];
                    if l != 0 {
                        *o = z.add(*o, z.mul(c, z.from_i64(l)));
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad(x)` on coordinates: column `j` holds `[x, b_j]`.
    pub fn ad_matrix(&self, x: &[u64], z: Zpr) -> RingMatrix {
        let d = self.d;
        let mut m = ModMatrix::zeros(d, d, z);
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                let base = (i * d + j) * d;
                for h in 0..d {
                    let l = self.lambda[base + h];
                    if l != 0 {
                        let cur = m.get(h, j);
                        m.set(h, j, z.add(cur, z.mul(x[i], z.from_i64(l))));
                    }
                }
            }
        }
        m
    }

    /// Plain-text table, one line `i j h lambda` (1-based) per nonzero constant.
    pub fn to_table(&self) -> String {
        let d = self.d;
        let mut s = String::new();
        let _ = writeln!(s, "# {} d={}", self.name, d);
        for i in 0..d {
            for j in 0..d {
                for h in 0..d {
                    let l = self.constant(i, j, h);
                    if l != 0 {
                        let _ = writeln!(s, "{} {} {} {}", i + 1, j + 1, h + 1, l);
                    }
                }
            }
        }
        s
    }

    /// Parses the format of [`LieLattice::to_table`]; `#` starts a comment.
    pub fn from_table(name: impl Into<String>, d: usize, text: &str) -> Result<Self, LatticeError> {
        let mut lambda = vec![0i64; d * d * d];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(LatticeError::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            }
            let idx: Vec<usize> = fields[..3]
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| LatticeError::Parse(format!("line {}: {e}", lineno + 1)))?;
            if idx.iter().any(|&k| k == 0 || k > d) {
                return Err(LatticeError::Parse(format!("line {}: index out of range", lineno + 1)));
            }
            let val: i64 = fields[3]
                .parse()
                .map_err(|e| LatticeError::Parse(format!("line {}: {e}", lineno + 1)))?;
            lambda[((idx[0] - 1) * d + idx[1] - 1) * d + idx[2] - 1] = val;
        }
        LieLattice::new(name, d, lambda)
    }
}

/// Antisymmetric matrix of integer linear forms: entry `(i,j)` is `sum_h forms[i,j,h] Y_h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFormMatrix {
    d: usize,
    forms: Vec<i64>,
}

impl LinearFormMatrix {
    pub fn new(d: usize, forms: Vec<i64>) -> Result<Self, LatticeError> {
        if forms.len() != d * d * d {
            return Err(LatticeError::BadLength { expected: d * d * d, got: forms.len() });
        }
        Ok(LinearFormMatrix { d, forms })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Coefficient vector of entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> &[i64] {
        let base = (i * self.d + j) * self.d;
        &self.forms[base..base + self.d]
    }

    pub fn is_antisymmetric(&self) -> bool {
        let d = self.d;
        (0..d).all(|i| {
            (0..d).all(|j| (0..d).all(|h| self.entry(i, j)[h] == -self.entry(j, i)[h]))
        })
    }

    /// Numeric matrix `R(w)` over `Z/p^r`.
    pub fn evaluate(&self, w: &[u64], z: Zpr) -> RingMatrix {
        let mut buf = vec![0u64; self.d * self.d];
        self.evaluate_into(w, &z, &mut buf);
        ModMatrix::from_raw(self.d, self.d, z, buf)
    }

    pub fn evaluate_into(&self, w: &[u64], z: &Zpr, buf: &mut [u64]) {
        let d = self.d;
        assert_eq!(w.len(), d);
        let ws: Vec<i128> = w.iter().map(|&x| x as i128).collect();
        for i in 0..d {
            buf[i * d + i] = 0;
            for j in i + 1..d {
                let e = self.entry(i, j);
                let mut acc: i128 = 0;
                for h in 0..d {
                    if e[h] != 0 {
                        acc += e[h] as i128 * ws[h];
                    }
                }
                let v = z.from_i128(acc);
                buf[i * d + j] = v;
                buf[j * d + i] = z.neg(v);
            }
        }
    }

    /// `R(w)` over a small prime field into a `u32` buffer.
    pub fn evaluate_small(&self, w: &[u32], p: u32, buf: &mut [u32]) {
        let d = self.d;
        for i in 0..d {
            buf[i * d + i] = 0;
            for j in i + 1..d {
                let e = self.entry(i, j);
                let mut acc: i64 = 0;
                for h in 0..d {
                    if e[h] != 0 {
                        acc += e[h] * w[h] as i64;
                    }
                }
                let v = acc.rem_euclid(p as i64) as u32;
                buf[i * d + j] = v;
                buf[j * d + i] = (p - v) % p;
            }
        }
    }
}

/// The commutator matrix `R` of a lattice.
pub fn commutator_matrix(l: &LieLattice) -> LinearFormMatrix {
    LinearFormMatrix { d: l.d, forms: l.lambda.clone() }
}

/// `R(w)` for a commutator matrix.
pub fn evaluate(r: &LinearFormMatrix, w: &[u64], z: Zpr) -> RingMatrix {
    r.evaluate(w, z)
}

/// A basis element of the matrix model of `sl_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasisKind {
    /// `e_kk - e_{k+1,k+1}` (0-based `k`).
    Cartan(usize),
    /// Matrix unit `e_ij` (0-based).
    Unit(usize, usize),
}

/// The ordered basis of `sl_n` used throughout.
#[derive(Debug, Clone)]
pub struct SlBasis {
    n: usize,
    kinds: Vec<BasisKind>,
}

impl SlBasis {
    pub fn new(n: usize) -> Result<Self, LatticeError> {
        let kinds = match n {
            2 => vec![BasisKind::Unit(0, 1), BasisKind::Cartan(0), BasisKind::Unit(1, 0)],
            3 | 4 => {
                let mut k: Vec<BasisKind> = (0..n - 1).map(BasisKind::Cartan).collect();
                for height in 1..n {
                    for i in 0..n - height {
                        k.push(BasisKind::Unit(i, i + height));
                    }
                }
                for height in 1..n {
                    for i in 0..n - height {
                        k.push(BasisKind::Unit(i + height, i));
                    }
                }
                k
            }
            _ => return Err(LatticeError::Unsupported(n)),
        };
        Ok(SlBasis { n, kinds })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.kinds.len()
    }

    /// Basis element `b_k` as an `n x n` integer matrix (row-major).
    pub fn matrix(&self, k: usize) -> Vec<i64> {
        let n = self.n;
        let mut m = vec![0i64; n * n];
        match self.kinds[k] {
            BasisKind::Cartan(c) => {
                m[c * n + c] = 1;
                m[(c + 1) * n + c + 1] = -1;
            }
            BasisKind::Unit(i, j) => m[i * n + j] = 1,
        }
        m
    }

    /// Human-readable label (`h12`, `e13`, `f31`; `e`, `h`, `f` for `sl_2`).
    pub fn label(&self, k: usize) -> String {
        if self.n == 2 {
            return ["e", "h", "f"][k].to_string();
        }
        match self.kinds[k] {
            BasisKind::Cartan(c) => format!("h{}{}", c + 1, c + 2),
            BasisKind::Unit(i, j) if i < j => format!("e{}{}", i + 1, j + 1),
            BasisKind::Unit(i, j) => format!("f{}{}", i + 1, j + 1),
        }
    }

    /// Coordinates of a traceless matrix with entries in `Z/p^r` (or integers via `z = None`).
    pub fn coords_mod(&self, m: &[u64], z: &Zpr) -> Result<Vec<u64>, LatticeError> {
        let n = self.n;
        let tr = (0..n).fold(0u64, |acc, i| z.add(acc, m[i * n + i] % z.modulus()));
        if tr != 0 {
            return Err(LatticeError::NonZeroTrace);
        }
        Ok(self
            .kinds
            .iter()
            .map(|k| match *k {
                BasisKind::Cartan(c) => (0..=c).fold(0u64, |acc, i| z.add(acc, m[i * n + i] % z.modulus())),
                BasisKind::Unit(i, j) => m[i * n + j] % z.modulus(),
            })
            .collect())
    }

    pub fn coords_int(&self, m: &[i64]) -> Result<Vec<i64>, LatticeError> {
        let n = self.n;
        if (0..n).map(|i| m[i * n + i]).sum::<i64>() != 0 {
            return Err(LatticeError::NonZeroTrace);
        }
        Ok(self
            .kinds
            .iter()
            .map(|k| match *k {
                BasisKind::Cartan(c) => (0..=c).map(|i| m[i * n + i]).sum(),
                BasisKind::Unit(i, j) => m[i * n + j],
            })
            .collect())
    }

    /// The matrix `sum_k v_k b_k` over `Z/p^r`.
    pub fn element_mod(&self, v: &[u64], z: &Zpr) -> Result<Vec<u64>, LatticeError> {
        if v.len() != self.dim() {
            return Err(LatticeError::BadLength { expected: self.dim(), got: v.len() });
        }
        let n = self.n;
        let mut m = vec![0u64; n * n];
        for (k, &c) in v.iter().enumerate() {
            let c = c % z.modulus();
            match self.kinds[k] {
                BasisKind::Cartan(t) => {
                    m[t * n + t] = z.add(m[t * n + t], c);
                    m[(t + 1) * n + t + 1] = z.sub(m[(t + 1) * n + t + 1], c);
                }
                BasisKind::Unit(i, j) => m[i * n + j] = z.add(m[i * n + j], c),
            }
        }
        Ok(m)
    }

    /// Structure constants from matrix commutators.
    pub fn structure_constants(&self) -> Vec<i64> {
        let d = self.dim();
        let n = self.n;
        let mats: Vec<Vec<i64>> = (0..d).map(|k| self.matrix(k)).collect();
        let mut lambda = vec![0i64; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let c = int_commutator(&mats[i], &mats[j], n);
                let v = self.coords_int(&c).expect("commutators are traceless");
                lambda[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(&v);
            }
        }
        lambda
    }

    /// Gram matrix of the trace form `tr(b_i b_j)`.
    pub fn trace_gram(&self) -> Vec<Vec<i64>> {
        let d = self.dim();
        let n = self.n;
        let mats: Vec<Vec<i64>> = (0..d).map(|k| self.matrix(k)).collect();
        (0..d)
            .map(|i| (0..d).map(|j| int_trace_product(&mats[i], &mats[j], n)).collect())
            .collect()
    }
}

fn int_commutator(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
    let mut c = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j] - b[i * n + k] * a[k * n + j];
            }
            c[i * n + j] = s;
        }
    }
    c
}

fn int_trace_product(a: &[i64], b: &[i64], n: usize) -> i64 {
    let mut s = 0;
    for i in 0..n {
        for k in 0..n {
            s += a[i * n + k] * b[k * n + i];
        }
    }
    s
}

/// The built-in `sl_n` lattice (`n` in 2..=4).
pub fn build_sl(n: usize) -> Result<LieLattice, LatticeError> {
    let basis = SlBasis::new(n)?;
    LieLattice::new(format!("sl{n}"), basis.dim(), basis.structure_constants())
}

/// Shared `sl_4` lattice.
pub fn sl4() -> &'static LieLattice {
    static L: OnceLock<LieLattice> = OnceLock::new();
    L.get_or_init(|| build_sl(4).expect("sl4 is a Lie lattice"))
}

/// Shared `sl_4` basis.
pub fn sl4_basis() -> &'static SlBasis {
    static B: OnceLock<SlBasis> = OnceLock::new();
    B.get_or_init(|| SlBasis::new(4).expect("sl4 basis"))
}

/// The Killing form matrix `8 tr(b_i b_j)` of `sl_4`.
pub fn killing_matrix() -> Vec<Vec<i64>> {
    sl4_basis()
        .trace_gram()
        .into_iter()
        .map(|row| row.into_iter().map(|x| 8 * x).collect())
        .collect()
}

/// Exact determinant of the Killing matrix.
pub fn killing_determinant() -> BigInt {
    let m: Vec<Vec<BigInt>> = killing_matrix()
        .into_iter()
        .map(|row| row.into_iter().map(BigInt::from).collect())
        .collect();
    det_bareiss(&m)
}

/// A traceless `4 x 4` matrix over `Z/p^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sl4Element {
    m: [u64; 16],
    ring: Zpr,
}

impl Sl4Element {
    pub fn new(entries: [i64; 16], ring: Zpr) -> Result<Self, LatticeError> {
        let mut m = [0u64; 16];
        for (d, s) in m.iter_mut().zip(entries) {
            *d = ring.from_i64(s);
        }
        Self::from_raw(m, ring)
    }

    pub fn from_raw(mut m: [u64; 16], ring: Zpr) -> Result<Self, LatticeError> {
        for v in m.iter_mut() {
            *v %= ring.modulus();
        }
        let tr = (0..4).fold(0, |acc, i| ring.add(acc, m[i * 5]));
        if tr != 0 {
            return Err(LatticeError::NonZeroTrace);
        }
        Ok(Sl4Element { m, ring })
    }

    pub fn zero(ring: Zpr) -> Self {
        Sl4Element { m: [0; 16], ring }
    }

    /// Matrix unit `e_ij` with 1-based indices `i != j`.
    pub fn unit(i: usize, j: usize, ring: Zpr) -> Self {
        assert!(i != j && (1..=4).contains(&i) && (1..=4).contains(&j));
        let mut m = [0u64; 16];
        m[(i - 1) * 4 + j - 1] = 1 % ring.modulus();
        Sl4Element { m, ring }
    }

    pub fn ring(&self) -> Zpr {
        self.ring
    }

    /// Entry with 0-based indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.m[i * 4 + j]
    }

    pub fn entries(&self) -> &[u64; 16] {
        &self.m
    }

    pub fn signed_entries(&self) -> [i64; 16] {
        let mut out = [0i64; 16];
        for (o, &v) in out.iter_mut().zip(&self.m) {
            *o = self.ring.to_signed(v);
        }
        out
    }

    pub fn coords(&self) -> Vec<u64> {
        sl4_basis().coords_mod(&self.m, &self.ring).expect("traceless by construction")
    }

    pub fn from_coords(v: &[u64], ring: Zpr) -> Result<Self, LatticeError> {
        let m = sl4_basis().element_mod(v, &ring)?;
        let mut a = [0u64; 16];
        a.copy_from_slice(&m);
        Ok(Sl4Element { m: a, ring })
    }

    pub fn transpose(&self) -> Self {
        let mut t = [0u64; 16];
        for i in 0..4 {
            for j in 0..4 {
                t[j * 4 + i] = self.m[i * 4 + j];
            }
        }
        Sl4Element { m: t, ring: self.ring }
    }

    fn mat_mul(&self, other: &Self) -> [u64; 16] {
        let z = &self.ring;
        let mut c = [0u64; 16];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0;
                for k in 0..4 {
                    s = z.add(s, z.mul(self.m[i * 4 + k], other.m[k * 4 + j]));
                }
                c[i * 4 + j] = s;
            }
        }
        c
    }

    pub fn bracket(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        let a = self.mat_mul(other);
        let b = other.mat_mul(self);
        let mut m = [0u64; 16];
        for k in 0..16 {
            m[k] = self.ring.sub(a[k], b[k]);
        }
        Sl4Element { m, ring: self.ring }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        let mut m = [0u64; 16];
        for k in 0..16 {
            m[k] = self.ring.add(self.m[k], other.m[k]);
        }
        Sl4Element { m, ring: self.ring }
    }

    pub fn scale(&self, c: u64) -> Self {
        let mut m = self.m;
        for v in m.iter_mut() {
            *v = self.ring.mul(*v, c % self.ring.modulus());
        }
        Sl4Element { m, ring: self.ring }
    }

    /// Reduction to level `t`.
    pub fn reduce(&self, t: u32) -> Result<Self, LatticeError> {
        let ring = self.ring.with_level(t).map_err(|_| LatticeError::NonZeroTrace)?;
        let mut m = self.m;
        for v in m.iter_mut() {
            *v %= ring.modulus();
        }
        Ok(Sl4Element { m, ring })
    }

    /// Same representatives viewed at level `t >= r`; the result is traceless only if the
    /// integer trace of the representatives vanishes mod `p^t`.
    pub fn lift_representatives(&self, t: u32) -> Result<Self, LatticeError> {
        let ring = self.ring.with_level(t).map_err(|_| LatticeError::NonZeroTrace)?;
        Self::from_raw(self.m, ring)
    }

    /// Centralizer over the residue field as a subspace of coordinates.
    pub fn centralizer(&self) -> Subspace {
        let f = self.ring.residue_field();
        let x = self.reduce(1).expect("level 1");
        centralizer_subspace(sl4(), &x.coords(), f)
    }

    /// Generators of the centralizer module over `Z/p^r`.
    pub fn centralizer_module(&self) -> RingMatrix {
        centralizer_module(sl4(), &self.coords(), self.ring)
    }
}

/// The transpose anti-automorphism.
pub fn transpose_twist(x: &Sl4Element) -> Sl4Element {
    x.transpose()
}

/// Trace-dual coordinates `w_h = tr(b_h x)`.
pub fn dual_coords(x: &Sl4Element) -> Vec<u64> {
    let z = x.ring;
    let basis = sl4_basis();
    (0..basis.dim())
        .map(|h| {
            let b = basis.matrix(h);
            let mut s = 0u64;
            for i in 0..4 {
                for k in 0..4 {
                    if b[i * 4 + k] != 0 {
                        s = z.add(s, z.mul(z.from_i64(b[i * 4 + k]), x.get(k, i)));
                    }
                }
            }
            s
        })
        .collect()
}

/// Kernel of the commutator matrix against the centralizer, for one `x` over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeCheck {
    /// `ker R(coords(x^T)) = C(x)`.
    pub literal: bool,
    /// `ker R(dual_coords(x)) = C(x)`, with `dual_coords` the trace pairing.
    pub dual: bool,
}

pub fn kernel_centralizer_bridge(x: &Sl4Element) -> BridgeCheck {
    let f = x.ring();
    let r = commutator_matrix(sl4());
    let c = x.centralizer();
    let ker = |w: &[u64]| rank_and_kernel(&r.evaluate(w, f)).expect("field").1;
    BridgeCheck { literal: ker(&x.transpose().coords()) == c, dual: ker(&dual_coords(x)) == c }
}

/// Centralizer `ker ad(x)` over a prime field.
pub fn centralizer_subspace(l: &LieLattice, x: &[u64], f: Zpr) -> Subspace {
    let ad = l.ad_matrix(x, f);
    rank_and_kernel(&ad).expect("field").1
}

/// Generators of the centralizer module over `Z/p^r`.
pub fn centralizer_module(l: &LieLattice, x: &[u64], z: Zpr) -> RingMatrix {
    linalg::module_kernel(&l.ad_matrix(x, z))
}

/// Dimension of the span of all brackets of a bracket-closed subspace.
pub fn derived_dim(l: &LieLattice, s: &Subspace) -> Result<usize, LatticeError> {
    Ok(derived_subalgebra(l, s)?.dim())
}

/// `[S, S]` for a bracket-closed subspace.
pub fn derived_subalgebra(l: &LieLattice, s: &Subspace) -> Result<Subspace, LatticeError> {
    let f = Zpr::field(s.prime()).expect("odd prime");
    let b = s.basis();
    let mut brackets = Vec::new();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let c = l.bracket_mod(&b[i], &b[j], &f);
            if !s.contains(&c) {
                return Err(LatticeError::NotSubalgebra);
            }
            brackets.push(c);
        }
    }
    Ok(Subspace::span(l.dim(), s.prime(), &brackets))
}

/// Structure constants (mod `p`, as signed residues) of the span of `basis`, with respect to
/// that basis in the given order.
pub fn structure_in_basis(l: &LieLattice, basis: &[Vec<u64>], p: u64) -> Result<LinearFormMatrix, LatticeError> {
    let f = Zpr::field(p).expect("odd prime");
    let k = basis.len();
    let span = Subspace::span(l.dim(), p, basis);
    if span.dim() != k {
        return Err(LatticeError::DependentBasis);
    }
    // Change of basis from echelon coordinates to the given basis.
    let to_echelon: Vec<Vec<u64>> = basis.iter().map(|b| span.coordinates(b).expect("in span")).collect();
    // Solve c * to_echelon = e for each echelon coordinate vector e.
    let m = ModMatrix::from_rows(f, k, &to_echelon).transpose();
    let mut forms = vec![0i64; k * k * k];
    for i in 0..k {
        for j in 0..k {
            let c = l.bracket_mod(&basis[i], &basis[j], &f);
            let e = span.coordinates(&c).ok_or(LatticeError::NotSubalgebra)?;
            let sol = solve_square(&m, &e, &f);
            for h in 0..k {
                forms[(i * k + j) * k + h] = f.to_signed(sol[h]);
            }
        }
    }
    LinearFormMatrix::new(k, forms)
}

fn solve_square(m: &ModMatrix, rhs: &[u64], f: &Zpr) -> Vec<u64> {
    let k = m.rows();
    let cols = k + 1;
    let mut aug = vec![0u64; k * cols];
    for i in 0..k {
        for j in 0..k {
            aug[i * cols + j] = m.get(i, j);
        }
        aug[i * cols + k] = rhs[i];
    }
    let piv = linalg::rref_in_place(&mut aug, k, cols, f);
    debug_assert_eq!(piv.len(), k);
    (0..k).map(|i| aug[i * cols + k]).collect()
}

/// Commutator matrix of a bracket-closed subspace in its canonical echelon basis.
pub fn subalgebra_commutator_matrix(l: &LieLattice, s: &Subspace) -> Result<LinearFormMatrix, LatticeError> {
    structure_in_basis(l, s.basis(), s.prime())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> Zpr {
        Zpr::field(p).unwrap()
    }

    fn random_sl4(ring: Zpr, rng: &mut ChaCha8Rng) -> Sl4Element {
        let v: Vec<u64> = (0..15).map(|_| rng.gen_range(0..ring.modulus())).collect();
        Sl4Element::from_coords(&v, ring).unwrap()
    }

    #[test]
    fn sl2_commutator_matrix() {
        let l = build_sl(2).unwrap();
        assert_eq!(l.dim(), 3);
        let r = commutator_matrix(&l);
        // [[0,-2Y1,Y2],[2Y1,0,-2Y3],[-Y2,2Y3,0]] with Y = (Y1, Y2, Y3) for (e, h, f).
        assert_eq!(r.entry(0, 1), &[-2, 0, 0]);
        assert_eq!(r.entry(0, 2), &[0, 1, 0]);
        assert_eq!(r.entry(1, 2), &[0, 0, -2]);
        assert!(r.is_antisymmetric());
        let m = r.evaluate(&[0, 1, 0], f(3));
        assert_eq!(m, ModMatrix::from_i64(3, 3, f(3), &[0, 0, 1, 0, 0, 0, -1, 0, 0]));
        let (rk, ker) = rank_and_kernel(&m).unwrap();
        assert_eq!((rk, ker.dim()), (2, 1));
    }

    #[test]
    fn sl2_profiles() {
        let r = commutator_matrix(&build_sl(2).unwrap());
        let z2 = Zpr::new(3, 2).unwrap();
        let p = linalg::divisor_profile(&r.evaluate(&[0, 1, 0], z2)).unwrap();
        assert_eq!((p.exponents.clone(), p.odd_slot), (vec![0], true));
        let p = linalg::divisor_profile(&r.evaluate(&[0, 3, 0], z2)).unwrap();
        assert_eq!((p.exponents.clone(), p.odd_slot), (vec![1], true));
        let p = linalg::divisor_profile(&r.evaluate(&[0, 0, 0], z2)).unwrap();
        assert_eq!(p.exponents, vec![2]);
    }

    #[test]
    fn sl4_basics() {
        let l = sl4();
        assert_eq!((l.dim(), l.h()), (15, 7));
        let b = sl4_basis();
        let labels: Vec<String> = (0..15).map(|k| b.label(k)).collect();
        assert_eq!(
            labels,
            ["h12", "h23", "h34", "e12", "e23", "e34", "e13", "e24", "e14", "f21", "f32", "f43", "f31", "f42", "f41"]
        );
        // [e12, f21] = h12.
        let mut expect = vec![0i64; 15];
        expect[0] = 1;
        assert_eq!(commutator_matrix(l).entry(3, 9), expect.as_slice());
        for i in 0..15 {
            assert!(commutator_matrix(l).entry(i, i).iter().all(|&x| x == 0));
        }
        let sl3 = build_sl(3).unwrap();
        assert_eq!(sl3.dim(), 8);
        assert!(matches!(build_sl(5), Err(LatticeError::Unsupported(5))));
    }

    #[test]
    fn killing_form() {
        let k = killing_matrix();
        assert_eq!(k[0][0], 16);
        assert_eq!(k[0][1], -8);
        assert_eq!(k[8][14], 8);
        let expected = BigInt::from(8).pow(15) * 4;
        assert_eq!(killing_determinant(), expected);
    }

    #[test]
    fn coordinates() {
        let z = f(3);
        let h12 = Sl4Element::new([1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], z).unwrap();
        let mut e0 = vec![0u64; 15];
        e0[0] = 1;
        assert_eq!(h12.coords(), e0);
        let x = Sl4Element::unit(1, 2, z).add(&Sl4Element::unit(3, 4, z));
        let mut e = vec![0u64; 15];
        e[3] = 1;
        e[5] = 1;
        assert_eq!(x.coords(), e);
        assert_eq!(
            Sl4Element::new([1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], Zpr::field(5).unwrap()),
            Err(LatticeError::NonZeroTrace)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r3 = Zpr::new(3, 3).unwrap();
        for _ in 0..1000 {
            let x = random_sl4(r3, &mut rng);
            assert_eq!(Sl4Element::from_coords(&x.coords(), r3).unwrap(), x);
        }
    }

    #[test]
    fn transpose_is_anti_automorphism() {
        let z = f(5);
        assert_eq!(transpose_twist(&Sl4Element::unit(1, 2, z)), Sl4Element::unit(2, 1, z));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = random_sl4(z, &mut rng);
            let y = random_sl4(z, &mut rng);
            assert_eq!(transpose_twist(&transpose_twist(&x)), x);
            assert_eq!(transpose_twist(&x.bracket(&y)), transpose_twist(&y).bracket(&transpose_twist(&x)));
        }
    }

    #[test]
    fn coordinate_bracket_matches_matrix_bracket() {
        let z = Zpr::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = random_sl4(z, &mut rng);
            let y = random_sl4(z, &mut rng);
            assert_eq!(sl4().bracket_mod(&x.coords(), &y.coords(), &z), x.bracket(&y).coords());
        }
    }

    #[test]
    fn table_round_trip() {
        for n in 2..=4 {
            let l = build_sl(n).unwrap();
            let back = LieLattice::from_table(l.name(), l.dim(), &l.to_table()).unwrap();
            assert_eq!(back, l);
        }
        let bad = "1 2 3 1\n";
        assert!(matches!(LieLattice::from_table("x", 3, bad), Err(LatticeError::NotAntisymmetric { .. })));
    }

    #[test]
    fn jacobi_violation_detected() {
        // [b1,b2] = b3, [b1,b3] = b2, [b2,b3] = b2 fails Jacobi (b1 acts nontrivially).
        let text = "1 2 3 1\n2 1 3 -1\n1 3 2 1\n3 1 2 -1\n2 3 2 1\n3 2 2 -1\n";
        assert!(matches!(LieLattice::from_table("bad", 3, text), Err(LatticeError::Jacobi { .. })));
    }

    #[test]
    fn centralizer_and_derived_examples() {
        let z3 = f(3);
        assert_eq!(Sl4Element::zero(z3).centralizer(), Subspace::full(15, 3));
        let full = Subspace::full(15, 3);
        assert_eq!(derived_dim(sl4(), &full).unwrap(), 15);
        // N22 representative e12 + e34.
        let x = Sl4Element::unit(1, 2, z3).add(&Sl4Element::unit(3, 4, z3));
        let c = x.centralizer();
        assert_eq!(c.dim(), 7);
        assert_eq!(derived_dim(sl4(), &c).unwrap(), 6);
        // A regular nilpotent has an abelian centralizer.
        let reg = Sl4Element::unit(1, 2, z3).add(&Sl4Element::unit(2, 3, z3)).add(&Sl4Element::unit(3, 4, z3));
        let c = reg.centralizer();
        assert_eq!(c.dim(), 3);
        assert_eq!(derived_dim(sl4(), &c).unwrap(), 0);
        let abelian = subalgebra_commutator_matrix(sl4(), &c).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| abelian.entry(i, j).iter().all(|&v| v == 0))));
        // Not closed: span{e12, f21}.
        let s = Subspace::span(15, 3, &[Sl4Element::unit(1, 2, z3).coords(), Sl4Element::unit(2, 1, z3).coords()]);
        assert_eq!(derived_dim(sl4(), &s), Err(LatticeError::NotSubalgebra));
    }

    #[test]
    fn full_algebra_commutator_matrix_is_ambient() {
        let full = Subspace::full(15, 5);
        let r = subalgebra_commutator_matrix(sl4(), &full).unwrap();
        let amb = commutator_matrix(sl4());
        for i in 0..15 {
            for j in 0..15 {
                let a: Vec<i64> = amb.entry(i, j).iter().map(|&x| x.rem_euclid(5)).collect();
                let b: Vec<i64> = r.entry(i, j).iter().map(|&x| x.rem_euclid(5)).collect();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn subalgebra_rank_bounded_by_noncentral_part() {
        let z = f(5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = random_sl4(z, &mut rng);
            let s = x.centralizer();
            let r = subalgebra_commutator_matrix(sl4(), &s).unwrap();
            let center = {
                let mut rows = Vec::new();
                for b in s.basis() {
                    rows.push(b.clone());
                }
                // Center of S: elements of S commuting with all of S.
                let k = s.dim();
                let mut eqs = ModMatrix::zeros(k * 15, k, z);
                for (col, bi) in s.basis().iter().enumerate() {
                    for (blk, bj) in s.basis().iter().enumerate() {
                        let c = sl4().bracket_mod(bi, bj, &z);
                        for h in 0..15 {
                            eqs.set(blk * 15 + h, col, c[h]);
                        }
                    }
                }
                rank_and_kernel(&eqs).unwrap().1.dim()
            };
            for _ in 0..5 {
                let w: Vec<u64> = (0..s.dim()).map(|_| rng.gen_range(0..5)).collect();
                let rk = linalg::rank(&r.evaluate(&w, z)).unwrap();
                assert!(rk <= s.dim() - center);
            }
        }
    }
}
