//! Centralizer classes of `sl_4(F_q)`.
//!
//! Classification goes through the characteristic polynomial and the ranks of powers of
//! `f(x)` for each irreducible factor `f`: these give the Jordan data of `x`, hence the
//! dimension of its centralizer in `gl_4` and all the finer labels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::Zpr;
use crate::lattice::Sl4Element;
use crate::linalg::rank_small;
use crate::ratfunc::{rat, QtPoly, RatFuncError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("centralizer dimension {0} does not occur in sl4")]
    UnexpectedDimension(usize),
    #[error("classification needs a prime field, got {0}")]
    NotAField(String),
    #[error("exhaustive census over F_{q} has {points} points; only q = 3 is supported")]
    TooLarge { q: u64, points: u128 },
    #[error("unknown class name {0:?}")]
    UnknownClass(String),
    #[error("class table line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error(transparent)]
    Poly(#[from] RatFuncError),
}

/// Centralizer classes (the `Sub` class collects the five subtypes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Zero,
    Reg,
    Sub,
    S22Diag,
    S22Non,
    N22,
    D211,
    N211,
}

impl Class {
    /// The nonzero classes, by increasing centralizer dimension.
    pub const NONZERO: [Class; 7] =
        [Class::Reg, Class::Sub, Class::S22Diag, Class::S22Non, Class::N22, Class::D211, Class::N211];

    pub fn name(self) -> &'static str {
        match self {
            Class::Zero => "Zero",
            Class::Reg => "Reg",
            Class::Sub => "Sub",
            Class::S22Diag => "S22Diag",
            Class::S22Non => "S22Non",
            Class::N22 => "N22",
            Class::D211 => "D211",
            Class::N211 => "N211",
        }
    }

    /// Dimension of the centralizer in `sl_4`.
    pub fn centralizer_dim(self) -> usize {
        match self {
            Class::Zero => 15,
            Class::Reg => 3,
            Class::Sub => 5,
            Class::S22Diag | Class::S22Non | Class::N22 => 7,
            Class::D211 | Class::N211 => 9,
        }
    }

    /// Dimension of the derived algebra of the centralizer.
    pub fn derived_dim(self) -> usize {
        match self {
            Class::Zero => 15,
            Class::Reg => 0,
            Class::Sub => 3,
            Class::S22Diag | Class::S22Non | Class::N22 => 6,
            Class::D211 | Class::N211 => 8,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = ClassifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Class::Zero]
            .into_iter()
            .chain(Class::NONZERO)
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ClassifyError::UnknownClass(s.to_string()))
    }
}

/// Refinement of `Sub` by Jordan type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubType {
    /// Nilpotent with blocks `[3, 1]`.
    N31,
    /// `a` semisimple of multiplicity 2 and a `2 x 2` Jordan block at `-a`.
    T31TwoEV,
    /// Blocks `[2, 1]` at `a` and a simple eigenvalue `-3a`.
    T31ThreeEV,
    /// Semisimple, split, multiplicities `(2, 1, 1)`.
    Diag31,
    /// Semisimple double eigenvalue plus an irreducible quadratic factor.
    NonJor31,
}

impl SubType {
    pub const ALL: [SubType; 5] =
        [SubType::N31, SubType::T31TwoEV, SubType::T31ThreeEV, SubType::Diag31, SubType::NonJor31];

    pub fn name(self) -> &'static str {
        match self {
            SubType::N31 => "N31",
            SubType::T31TwoEV => "T31TwoEV",
            SubType::T31ThreeEV => "T31ThreeEV",
            SubType::Diag31 => "Diag31",
            SubType::NonJor31 => "NonJor31",
        }
    }
}

impl FromStr for SubType {
    type Err = ClassifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubType::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ClassifyError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel {
    pub class: Class,
    pub subtype: Option<SubType>,
}

impl ClassLabel {
    pub const fn plain(class: Class) -> Self {
        ClassLabel { class, subtype: None }
    }

    pub const fn sub(subtype: SubType) -> Self {
        ClassLabel { class: Class::Sub, subtype: Some(subtype) }
    }

    /// All labels produced by [`classify`].
    pub fn all() -> Vec<ClassLabel> {
        let mut v = vec![ClassLabel::plain(Class::Zero), ClassLabel::plain(Class::Reg)];
        v.extend(SubType::ALL.map(ClassLabel::sub));
        v.extend(
            [Class::S22Diag, Class::S22Non, Class::N22, Class::D211, Class::N211].map(ClassLabel::plain),
        );
        v
    }

    fn index(self) -> usize {
        match (self.class, self.subtype) {
            (Class::Zero, _) => 0,
            (Class::Reg, _) => 1,
            (Class::Sub, Some(s)) => 2 + s as usize,
            (Class::Sub, None) => 2,
            (Class::S22Diag, _) => 7,
            (Class::S22Non, _) => 8,
            (Class::N22, _) => 9,
            (Class::D211, _) => 10,
            (Class::N211, _) => 11,
        }
    }
}

const NUM_LABELS: usize = 12;

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subtype {
            Some(s) => write!(f, "{}/{}", self.class, s.name()),
            None => write!(f, "{}", self.class),
        }
    }
}

/// Partition type of an affine cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    P31,
    P22,
    P211,
}

/// The cross-section matrices `C_[3,1](a, b)`, `C_[2,2](a)`, `C_[2,1,1](a)`.
pub fn cross_section(part: Partition, params: &[i64], ring: Zpr) -> Sl4Element {
    let a = params.first().copied().unwrap_or(0);
    let m: [i64; 16] = match part {
        Partition::P31 => {
            let b = params.get(1).copied().unwrap_or(0);
            [a, 0, 0, 0, 0, a, 1, 0, 0, 0, -a, 1, 0, 0, b, -a]
        }
        Partition::P22 => [0, 1, 0, 0, a, 0, 0, 0, 0, 0, 0, 1, 0, 0, a, 0],
        Partition::P211 => [3 * a, 1, 0, 0, 0, -a, 0, 0, 0, 0, -a, 0, 0, 0, 0, -a],
    };
    Sl4Element::new(m, ring).expect("cross-sections are traceless")
}

/// Monic polynomial over `F_p` of degree at most 4, coefficients low to high.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolyOverFq {
    p: u64,
    coeffs: Vec<u64>,
}

impl PolyOverFq {
    /// Monic polynomial from the non-leading coefficients (low to high).
    pub fn monic(p: u64, lower: &[i64]) -> Self {
        let mut coeffs: Vec<u64> = lower.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
        coeffs.push(1);
        PolyOverFq { p, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut c = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % self.p;
            }
        }
        PolyOverFq { p: self.p, coeffs: c }
    }

    /// Division by a monic polynomial: `(quotient, remainder)`.
    pub fn divrem(&self, d: &Self) -> (Self, Vec<u64>) {
        let p = self.p;
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        if self.degree() < dd {
            return (PolyOverFq { p, coeffs: vec![1] }, r);
        }
        let mut q = vec![0u64; self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = r[k + dd];
            q[k] = c;
            if c != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = (r[k + j] + p - c * dc % p) % p;
                }
            }
        }
        r.truncate(dd);
        (PolyOverFq { p, coeffs: q }, r)
    }

    pub fn divides(&self, f: &Self) -> bool {
        f.divrem(self).1.iter().all(|&c| c == 0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % self.p)
    }

    /// `f(x)` for a `4 x 4` matrix.
    pub fn eval_matrix(&self, x: &Sl4Element) -> [u64; 16] {
        let p = self.p;
        let m = x.entries();
        let mut acc = [0u64; 16];
        for &c in self.coeffs.iter().rev() {
            let mut next = [0u64; 16];
            for i in 0..4 {
                for j in 0..4 {
                    let mut s = 0;
                    for k in 0..4 {
                        s += acc[i * 4 + k] * m[k * 4 + j] % p;
                    }
                    next[i * 4 + j] = s % p;
                }
                next[i * 5] = (next[i * 5] + c) % p;
            }
            acc = next;
        }
        acc
    }
}

impl fmt::Display for PolyOverFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "X")?,
                (1, c) => write!(f, "{c}X")?,
                (k, 1) => write!(f, "X^{k}")?,
                (k, c) => write!(f, "{c}X^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn field_of(x: &Sl4Element) -> Result<u64, ClassifyError> {
    let z = x.ring();
    if !z.is_field() {
        return Err(ClassifyError::NotAField(z.to_string()));
    }
    Ok(z.p())
}

fn small_entries(x: &Sl4Element) -> [u32; 16] {
    let mut m = [0u32; 16];
    for (d, s) in m.iter_mut().zip(x.entries()) {
        *d = *s as u32;
    }
    m
}

/// Characteristic polynomial coefficients `[c0, c1, c2, c3]` of `X^4 + c3 X^3 + ...`,
/// from sums of principal minors (division free).
fn char_coeffs(m: &[u32; 16], p: u32) -> [u32; 4] {
    let a = |i: usize, j: usize| m[i * 4 + j] as i64;
    let p = p as i64;
    let tr: i64 = (0..4).map(|i| a(i, i)).sum();
    let mut e2 = 0i64;
    for i in 0..4 {
        for j in i + 1..4 {
            e2 += a(i, i) * a(j, j) - a(i, j) * a(j, i);
        }
    }
    let det3 = |r: [usize; 3]| {
        let b = |i: usize, j: usize| a(r[i], r[j]);
        b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0))
    };
    let e3 = det3([1, 2, 3]) + det3([0, 2, 3]) + det3([0, 1, 3]) + det3([0, 1, 2]);
    // Leibniz expansion of the 4 x 4 determinant.
    let mut det = 0i64;
    const PERMS: [[usize; 4]; 24] = [
        [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
        [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
        [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
        [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
    ];
    for s in PERMS {
        let mut inv = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if s[i] > s[j] {
                    inv += 1;
                }
            }
        }
        let prod = a(0, s[0]) * a(1, s[1]) % p * a(2, s[2]) % p * a(3, s[3]) % p;
        det += if inv % 2 == 0 { prod } else { -prod };
    }
    [det, -e3, e2, -tr].map(|c| c.rem_euclid(p) as u32)
}

/// Characteristic polynomial `det(X - x)`.
pub fn char_poly(x: &Sl4Element) -> Result<PolyOverFq, ClassifyError> {
    let p = field_of(x)?;
    let c = char_coeffs(&small_entries(x), p as u32);
    Ok(PolyOverFq::monic(p, &c.map(|v| v as i64)))
}

/// Minimal polynomial: the least-degree monic divisor of the characteristic polynomial
/// that annihilates `x`.
pub fn min_poly(x: &Sl4Element) -> Result<PolyOverFq, ClassifyError> {
    let chi = char_poly(x)?;
    let factors = factor_small(&chi);
    // All monic divisors: products over sub-multisets of the factor list.
    let mut divisors: Vec<PolyOverFq> = vec![PolyOverFq::monic(chi.p, &[])];
    let mut grouped: Vec<(PolyOverFq, usize)> = Vec::new();
    for f in factors {
        match grouped.iter_mut().find(|(g, _)| *g == f) {
            Some(entry) => entry.1 += 1,
            None => grouped.push((f, 1)),
        }
    }
    for (f, m) in &grouped {
        let mut next = Vec::new();
        for d in &divisors {
            let mut acc = d.clone();
            next.push(acc.clone());
            for _ in 0..*m {
                acc = acc.mul(f);
                next.push(acc.clone());
            }
        }
        divisors = next;
    }
    divisors.sort_by_key(|d| (d.degree(), d.coeffs.clone()));
    Ok(divisors
        .into_iter()
        .find(|d| d.degree() > 0 && d.eval_matrix(x).iter().all(|&v| v == 0))
        .unwrap_or(chi))
}

/// Factorization into monic irreducibles (with multiplicity), by exhaustive search for
/// divisors of degree 1 and 2.
pub fn factor_small(f: &PolyOverFq) -> Vec<PolyOverFq> {
    assert!(f.degree() <= 4, "factor_small handles degree at most 4");
    let p = f.p;
    let mut rest = f.clone();
    let mut out = Vec::new();
    'outer: while rest.degree() > 0 {
        for a in 0..p {
            if rest.eval(a) == 0 {
                let lin = PolyOverFq { p, coeffs: vec![(p - a) % p, 1] };
                rest = rest.divrem(&lin).0;
                out.push(lin);
                continue 'outer;
            }
        }
        if rest.degree() <= 3 {
            out.push(rest);
            break;
        }
        for c0 in 0..p {
            for c1 in 0..p {
                let quad = PolyOverFq { p, coeffs: vec![c0, c1, 1] };
                if quad.divides(&rest) {
                    rest = rest.divrem(&quad).0;
                    out.push(quad);
                    continue 'outer;
                }
            }
        }
        out.push(rest);
        break;
    }
    out.sort();
    out
}

/// The primary part of `x` attached to one irreducible factor `f` of its characteristic
/// polynomial: `conjugate[j]` is the number of Jordan blocks of size `> j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryPart {
    pub factor: Vec<u32>,
    pub multiplicity: usize,
    pub conjugate: Vec<usize>,
}

impl PrimaryPart {
    pub fn degree(&self) -> usize {
        self.factor.len() - 1
    }

    /// The eigenvalue, for a linear factor.
    pub fn root(&self, p: u32) -> Option<u32> {
        (self.degree() == 1).then(|| (p - self.factor[0]) % p)
    }

    pub fn is_semisimple(&self) -> bool {
        self.conjugate.len() == 1
    }
}

fn mat_mul_small(a: &[u32; 16], b: &[u32; 16], p: u32) -> [u32; 16] {
    let mut c = [0u32; 16];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0u32;
            for k in 0..4 {
                s += a[i * 4 + k] * b[k * 4 + j];
            }
            c[i * 4 + j] = s % p;
        }
    }
    c
}

fn rank4(m: &[u32; 16], p: u32) -> usize {
    let mut buf = *m;
    rank_small(&mut buf, 4, 4, p)
}

fn eval_poly_small(f: &[u32], m: &[u32; 16], p: u32) -> [u32; 16] {
    let mut acc = [0u32; 16];
    for &c in f.iter().rev() {
        acc = mat_mul_small(&acc, m, p);
        for i in 0..4 {
            acc[i * 5] = (acc[i * 5] + c) % p;
        }
    }
    acc
}

/// Irreducible factors of a monic quartic, grouped with multiplicities (`p` small).
fn factor_quartic(c: [u32; 4], p: u32) -> Vec<(Vec<u32>, usize)> {
    let mut rest: Vec<u32> = vec![c[0], c[1], c[2], c[3], 1];
    let mut out: Vec<(Vec<u32>, usize)> = Vec::new();
    let push = |f: Vec<u32>, out: &mut Vec<(Vec<u32>, usize)>| match out.iter_mut().find(|(g, _)| *g == f) {
        Some(e) => e.1 += 1,
        None => out.push((f, 1)),
    };
    let eval = |f: &[u32], a: u32| f.iter().rev().fold(0u32, |acc, &k| (acc * a + k) % p);
    let mut a = 0;
    while a < p && rest.len() > 1 {
        if eval(&rest, a) == 0 {
            // Synthetic division by X - a.
            let n = rest.len() - 1;
            let mut q = vec![0u32; n];
            let mut carry = 0u32;
            for k in (0..n).rev() {
                carry = (rest[k + 1] + carry * a) % p;
                q[k] = carry;
            }
            rest = q;
            push(vec![(p - a) % p, 1], &mut out);
        } else {
            a += 1;
        }
    }
    match rest.len() - 1 {
        0 => {}
        2 | 3 => push(rest, &mut out),
        _ => {
            // No roots: irreducible, or a product of two irreducible quadratics.
            let mut found = None;
            'search: for c0 in 0..p {
                for c1 in 0..p {
                    // (X^2 + c1 X + c0)(X^2 + d1 X + d0) = rest.
                    let d1 = (rest[3] + p - c1) % p;
                    let d0 = (rest[2] + 2 * p - c0 - c1 * d1 % p) % p;
                    if (c1 * d0 + c0 * d1) % p == rest[1] && c0 * d0 % p == rest[0] {
                        found = Some((vec![c0, c1, 1], vec![d0, d1, 1]));
                        break 'search;
                    }
                }
            }
            match found {
                Some((f, g)) => {
                    push(f, &mut out);
                    push(g, &mut out);
                }
                None => push(rest, &mut out),
            }
        }
    }
    out
}

/// Jordan data of a matrix over `F_p` given as small residues.
pub fn primary_parts(m: &[u32; 16], p: u32) -> Vec<PrimaryPart> {
    let c = char_coeffs(m, p);
    factor_quartic(c, p)
        .into_iter()
        .map(|(f, mult)| {
            let deg = f.len() - 1;
            let fx = eval_poly_small(&f, m, p);
            let mut prev_rank = 4;
            let mut power = fx;
            let mut conjugate = Vec::new();
            for j in 1..=mult {
                if j > 1 {
                    power = mat_mul_small(&power, &fx, p);
                }
                let r = rank4(&power, p);
                let s = (prev_rank - r) / deg;
                if s == 0 {
                    break;
                }
                conjugate.push(s);
                prev_rank = r;
            }
            PrimaryPart { factor: f, multiplicity: mult, conjugate }
        })
        .collect()
}

/// Dimension of the centralizer in `gl_4` from Jordan data.
pub fn gl_centralizer_dim(parts: &[PrimaryPart]) -> usize {
    parts.iter().map(|pp| pp.degree() * pp.conjugate.iter().map(|s| s * s).sum::<usize>()).sum()
}

/// Classification of a matrix with entries in `[0, p)`.
pub fn classify_raw(m: &[u32; 16], p: u32) -> Result<ClassLabel, ClassifyError> {
    let parts = primary_parts(m, p);
    let k = gl_centralizer_dim(&parts) - 1;
    let nilpotent = parts.len() == 1 && parts[0].factor == [0, 1];
    let has_quadratic = parts.iter().any(|pp| pp.degree() == 2);
    Ok(match k {
        15 => ClassLabel::plain(Class::Zero),
        3 => ClassLabel::plain(Class::Reg),
        5 => {
            let st = if nilpotent {
                SubType::N31
            } else if has_quadratic {
                SubType::NonJor31
            } else if parts.len() == 3 {
                SubType::Diag31
            } else if parts.iter().any(|pp| pp.multiplicity == 3) {
                SubType::T31ThreeEV
            } else if parts.len() == 2 {
                SubType::T31TwoEV
            } else {
                return Err(ClassifyError::UnexpectedDimension(k));
            };
            ClassLabel::sub(st)
        }
        7 => ClassLabel::plain(if nilpotent {
            Class::N22
        } else if has_quadratic {
            Class::S22Non
        } else {
            Class::S22Diag
        }),
        9 => ClassLabel::plain(if nilpotent { Class::N211 } else { Class::D211 }),
        k => return Err(ClassifyError::UnexpectedDimension(k)),
    })
}

/// Centralizer class of an element of `sl_4(F_p)`.
pub fn classify(x: &Sl4Element) -> Result<ClassLabel, ClassifyError> {
    let p = field_of(x)?;
    classify_raw(&small_entries(x), p as u32)
}

/// `x^4 = 0`.
pub fn is_nilpotent(x: &Sl4Element) -> bool {
    let x2 = x.entries();
    let z = x.ring();
    let mul = |a: &[u64; 16], b: &[u64; 16]| {
        let mut c = [0u64; 16];
        for i in 0..4 {
            for j in 0..4 {
                c[i * 4 + j] = (0..4).fold(0, |s, k| z.add(s, z.mul(a[i * 4 + k], b[k * 4 + j])));
            }
        }
        c
    };
    let sq = mul(x2, x2);
    mul(&sq, &sq).iter().all(|&v| v == 0)
}

/// Matrix entries of the element with `sl_4` coordinates `c` (small field residues).
#[inline]
pub fn matrix_from_coords_small(c: &[u32; 15], p: u32) -> [u32; 16] {
    let mut m = [0u32; 16];
    m[0] = c[0];
    m[5] = (c[1] + p - c[0]) % p;
    m[10] = (c[2] + p - c[1]) % p;
    m[15] = (p - c[2]) % p;
    // Off-diagonal order: x12 x23 x34 x13 x24 x14 x21 x32 x43 x31 x42 x41.
    const POS: [usize; 12] = [1, 6, 11, 2, 7, 3, 4, 9, 14, 8, 13, 12];
    for (k, &pos) in POS.iter().enumerate() {
        m[pos] = c[3 + k];
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensusMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

/// Per-label element counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub q: u64,
    pub mode: CensusMode,
    pub counts: BTreeMap<ClassLabel, u64>,
    /// Number of points examined (including zero).
    pub points: u64,
}

impl Census {
    pub fn count(&self, l: ClassLabel) -> u64 {
        self.counts.get(&l).copied().unwrap_or(0)
    }

    pub fn class_count(&self, c: Class) -> u64 {
        self.counts.iter().filter(|(l, _)| l.class == c).map(|(_, n)| n).sum()
    }

    /// Sum over nonzero labels.
    pub fn nonzero_total(&self) -> u64 {
        self.counts.iter().filter(|(l, _)| l.class != Class::Zero).map(|(_, n)| n).sum()
    }
}

fn tally_to_map(t: [u64; NUM_LABELS]) -> BTreeMap<ClassLabel, u64> {
    ClassLabel::all().into_iter().map(|l| (l, t[l.index()])).filter(|(_, n)| *n > 0).collect()
}

fn add_tallies(mut a: [u64; NUM_LABELS], b: [u64; NUM_LABELS]) -> [u64; NUM_LABELS] {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Classification census of `sl_4(F_q)`. Exhaustive mode is limited to `q = 3`; sampled mode
/// is deterministic for a given seed, whatever the number of worker threads.
pub fn census(q: u64, mode: CensusMode) -> Result<Census, ClassifyError> {
    Zpr::field(q).map_err(|e| ClassifyError::NotAField(e.to_string()))?;
    let p = q as u32;
    let tally = match mode {
        CensusMode::Exhaustive => {
            if q != 3 {
                return Err(ClassifyError::TooLarge { q, points: (q as u128).pow(15) });
            }
            const OUTER: usize = 5;
            let outer = q.pow(OUTER as u32);
            (0..outer)
                .into_par_iter()
                .map(|hi| {
                    let mut c = [0u32; 15];
                    let mut h = hi;
                    for slot in c.iter_mut().skip(15 - OUTER) {
                        *slot = (h % q) as u32;
                        h /= q;
                    }
                    let mut t = [0u64; NUM_LABELS];
                    loop {
                        let m = matrix_from_coords_small(&c, p);
                        let l = classify_raw(&m, p).expect("every element classifies");
                        t[l.index()] += 1;
                        // Odometer over the inner coordinates.
                        let mut k = 0;
                        while k < 15 - OUTER {
                            c[k] += 1;
                            if c[k] < p {
                                break;
                            }
                            c[k] = 0;
                            k += 1;
                        }
                        if k == 15 - OUTER {
                            break;
                        }
                    }
                    t
                })
                .reduce(|| [0u64; NUM_LABELS], add_tallies)
        }
        CensusMode::Sampled { samples, seed } => {
            const BLOCK: u64 = 4096;
            let blocks = samples.div_ceil(BLOCK);
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                    let n = BLOCK.min(samples - b * BLOCK);
                    let mut t = [0u64; NUM_LABELS];
                    let mut c = [0u32; 15];
                    for _ in 0..n {
                        for v in c.iter_mut() {
                            *v = rng.gen_range(0..p);
                        }
                        let m = matrix_from_coords_small(&c, p);
                        t[classify_raw(&m, p).expect("classifies").index()] += 1;
                    }
                    t
                })
                .reduce(|| [0u64; NUM_LABELS], add_tallies)
        }
    };
    let points = tally.iter().sum();
    Ok(Census { q, mode, counts: tally_to_map(tally), points })
}

/// One nonzero class with its table data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub class: Class,
    pub centralizer_dim: usize,
    pub derived_dim: usize,
    pub cardinality: QtPoly,
}

/// Cardinalities and transition polynomials of the centralizer classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTable {
    rows: Vec<ClassRow>,
    subtypes: Vec<(SubType, QtPoly)>,
    jumps: BTreeMap<(Class, Class), QtPoly>,
}

const CLASS_TABLE: &str = include_str!("../data/class_table.txt");

impl ClassTable {
    pub fn parse(text: &str) -> Result<Self, ClassifyError> {
        let mut rows = Vec::new();
        let mut subtypes = Vec::new();
        let mut jumps = BTreeMap::new();
        let mut pending_sum = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ClassifyError::Table { line: n + 1, msg: msg.to_string() };
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "class" if f.len() == 5 => {
                    let class: Class = f[1].parse()?;
                    let dc = f[2].parse().map_err(|_| err("bad dimension"))?;
                    let dd = f[3].parse().map_err(|_| err("bad dimension"))?;
                    let card = if f[4] == "-" {
                        pending_sum.push(rows.len());
                        QtPoly::zero()
                    } else {
                        QtPoly::parse(f[4])?
                    };
                    rows.push(ClassRow { class, centralizer_dim: dc, derived_dim: dd, cardinality: card });
                }
                "subtype" if f.len() == 3 => subtypes.push((f[1].parse()?, QtPoly::parse(f[2])?)),
                "jump" if f.len() == 4 => {
                    jumps.insert((f[1].parse()?, f[2].parse()?), QtPoly::parse(f[3])?);
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        let sub_total = subtypes.iter().fold(QtPoly::zero(), |acc, (_, c)| &acc + c);
        for i in pending_sum {
            rows[i].cardinality = sub_total.clone();
        }
        Ok(ClassTable { rows, subtypes, jumps })
    }

    pub fn rows(&self) -> &[ClassRow] {
        &self.rows
    }

    pub fn row(&self, c: Class) -> Option<&ClassRow> {
        self.rows.iter().find(|r| r.class == c)
    }

    pub fn cardinality(&self, c: Class) -> QtPoly {
        self.row(c).map(|r| r.cardinality.clone()).unwrap_or_else(QtPoly::zero)
    }

    pub fn subtypes(&self) -> &[(SubType, QtPoly)] {
        &self.subtypes
    }

    pub fn subtype_cardinality(&self, s: SubType) -> QtPoly {
        self.subtypes.iter().find(|(t, _)| *t == s).map(|(_, c)| c.clone()).unwrap_or_else(QtPoly::zero)
    }

    pub fn label_cardinality(&self, l: ClassLabel) -> QtPoly {
        match l.subtype {
            Some(s) => self.subtype_cardinality(s),
            None if l.class == Class::Zero => QtPoly::one(),
            None => self.cardinality(l.class),
        }
    }

    /// `tau(from -> to)`; unlisted pairs are zero.
    pub fn transition(&self, from: Class, to: Class) -> QtPoly {
        self.jumps.get(&(from, to)).cloned().unwrap_or_else(QtPoly::zero)
    }

    pub fn jumps(&self) -> &BTreeMap<(Class, Class), QtPoly> {
        &self.jumps
    }
}

/// The table shipped in `data/class_table.txt`.
pub fn class_table() -> &'static ClassTable {
    static T: OnceLock<ClassTable> = OnceLock::new();
    T.get_or_init(|| ClassTable::parse(CLASS_TABLE).expect("bundled class table parses"))
}

/// Census rows `class,subtype,count,polynomial,polynomial_at_q,match`. For sampled censuses
/// the expected column is the predicted count `sample_size * |c| / q^15` and `match` is
/// left empty. Returns the CSV text and whether every exhaustive row matched.
pub fn census_csv(c: &Census, table: &ClassTable) -> (String, bool) {
    let mut out = String::from("class,subtype,count,polynomial,polynomial_at_q,match\n");
    let mut all = true;
    let qn = c.q as i64;
    for l in ClassLabel::all().into_iter().filter(|l| l.class != Class::Zero) {
        let poly = table.label_cardinality(l);
        let at_q = poly.eval_q(qn);
        let count = c.count(l);
        let (expected, verdict) = match c.mode {
            CensusMode::Exhaustive => {
                let ok = at_q == rat(count as i64);
                all &= ok;
                (at_q.to_string(), ok.to_string())
            }
            CensusMode::Sampled { samples, .. } => {
                let e = at_q * rat(samples as i64) / BigRational::from_integer(BigInt::from(c.q).pow(15));
                (format!("{:.1}", e.to_f64().unwrap_or(f64::NAN)), String::new())
            }
        };
        let sub = l.subtype.map(|s| s.name()).unwrap_or("");
        out.push_str(&format!("{},{},{},\"{}\",{},{}\n", l.class, sub, count, poly, expected, verdict));
    }
    if let CensusMode::Exhaustive = c.mode {
        all &= c.nonzero_total() as u128 == (c.q as u128).pow(15) - 1;
    }
    (out, all)
}

/// Exact check that the cardinality polynomials add up to `q^15 - 1`.
pub fn cardinalities_partition(table: &ClassTable) -> bool {
    let total = Class::NONZERO.iter().fold(QtPoly::zero(), |acc, &c| &acc + &table.cardinality(c));
    let target = &QtPoly::monomial(rat(1), 15, 0) - &QtPoly::one();
    (&total - &target).is_zero()
}

/// Conjugation by a random product of elementary and diagonal matrices.
pub fn random_gl_conjugate<R: Rng + ?Sized>(x: &Sl4Element, rng: &mut R) -> Sl4Element {
    let z = x.ring();
    let p = z.p();
    let mut m = *x.entries();
    for _ in 0..12 {
        let i = rng.gen_range(0..4);
        let j = rng.gen_range(0..4);
        if i == j {
            // Scale row i by d and column i by 1/d.
            let d = rng.gen_range(1..p);
            let di = z.unit_inverse(d).unwrap();
            for k in 0..4 {
                m[i * 4 + k] = z.mul(m[i * 4 + k], d);
                m[k * 4 + i] = z.mul(m[k * 4 + i], di);
            }
        } else {
            // g = 1 + c e_ij: row_i += c row_j, then column_j -= c column_i.
            let c = rng.gen_range(1..p);
            for k in 0..4 {
                m[i * 4 + k] = z.add(m[i * 4 + k], z.mul(c, m[j * 4 + k]));
            }
            for k in 0..4 {
                m[k * 4 + j] = z.sub(m[k * 4 + j], z.mul(c, m[k * 4 + i]));
            }
        }
    }
    Sl4Element::from_raw(m, z).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{derived_dim, sl4, structure_in_basis, transpose_twist};
    use crate::linalg::Subspace;

    fn f(p: u64) -> Zpr {
        Zpr::field(p).unwrap()
    }

    fn is_sq(a: i64, p: u64) -> bool {
        f(p).is_square_mod_p(f(p).from_i64(a))
    }

    fn random_element(p: u64, rng: &mut ChaCha8Rng) -> Sl4Element {
        let v: Vec<u64> = (0..15).map(|_| rng.gen_range(0..p)).collect();
        Sl4Element::from_coords(&v, f(p)).unwrap()
    }

    #[test]
    fn cross_section_examples() {
        let z = f(5);
        assert_eq!(cross_section(Partition::P22, &[0], z), Sl4Element::unit(1, 2, z).add(&Sl4Element::unit(3, 4, z)));
        let c = cross_section(Partition::P211, &[2], z);
        assert_eq!([c.get(0, 0), c.get(1, 1), c.get(2, 2), c.get(3, 3), c.get(0, 1)], [1, 3, 3, 3, 1]);
        for a in 0..5i64 {
            for b in 0..5i64 {
                let x = cross_section(Partition::P31, &[a, b], z);
                let chi = char_poly(&x).unwrap();
                let lin = PolyOverFq::monic(5, &[-a]);
                // The (4,3) entry enters the quadratic factor with a minus sign.
                let quad = PolyOverFq::monic(5, &[a * a - b, 2 * a]);
                assert_eq!(chi, lin.mul(&lin).mul(&quad));
                assert_eq!(min_poly(&x).unwrap(), lin.mul(&quad), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn polynomial_examples() {
        let z = f(7);
        let zero = Sl4Element::zero(z);
        assert_eq!(char_poly(&zero).unwrap(), PolyOverFq::monic(7, &[0, 0, 0, 0]));
        assert_eq!(min_poly(&zero).unwrap(), PolyOverFq::monic(7, &[0]));
        // X^2 - 3 is irreducible mod 7; X^2 - 4 splits.
        assert_eq!(factor_small(&PolyOverFq::monic(7, &[-3, 0])).len(), 1);
        assert_eq!(
            factor_small(&PolyOverFq::monic(7, &[-4, 0])),
            vec![PolyOverFq::monic(7, &[2]), PolyOverFq::monic(7, &[5])]
        );
        assert_eq!(factor_small(&PolyOverFq::monic(7, &[0, 0, 0, 0])), vec![PolyOverFq::monic(7, &[0]); 4]);
        // (X^2 - 3)^2 = X^4 - 6 X^2 + 9.
        let sq = factor_small(&PolyOverFq::monic(7, &[9, 0, -6, 0]));
        assert_eq!(sq, vec![PolyOverFq::monic(7, &[-3, 0]); 2]);
        assert_eq!(PolyOverFq::monic(7, &[1, 0, 2]).to_string(), "X^3 + 2X^2 + 1");
    }

    #[test]
    fn factorization_multiplies_back() {
        for p in [3u64, 5, 7] {
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            for _ in 0..500 {
                let lower: Vec<i64> = (0..4).map(|_| rng.gen_range(0..p as i64)).collect();
                let poly = PolyOverFq::monic(p, &lower);
                let fs = factor_small(&poly);
                let prod = fs.iter().fold(PolyOverFq::monic(p, &[]), |acc, g| acc.mul(g));
                assert_eq!(prod, poly);
                for g in &fs {
                    if g.degree() >= 2 {
                        assert!((0..p).all(|a| g.eval(a) != 0));
                    }
                }
            }
        }
    }

    #[test]
    fn classify_examples() {
        for p in [3u64, 5, 7] {
            let z = f(p);
            for a in 1..p as i64 {
                let expected = if is_sq(a, p) { Class::S22Diag } else { Class::S22Non };
                assert_eq!(classify(&cross_section(Partition::P22, &[a], z)).unwrap(), ClassLabel::plain(expected));
            }
            assert_eq!(classify(&cross_section(Partition::P211, &[0], z)).unwrap(), ClassLabel::plain(Class::N211));
            assert_eq!(classify(&Sl4Element::zero(z)).unwrap(), ClassLabel::plain(Class::Zero));
        }
        assert!(matches!(classify(&Sl4Element::zero(Zpr::new(3, 2).unwrap())), Err(ClassifyError::NotAField(_))));
    }

    /// Exhaustive over parameters: the class of each cross-section point matches the
    /// case conditions of the class tables.
    #[test]
    fn cross_sections_match_case_conditions() {
        for p in [3u64, 5, 7] {
            let z = f(p);
            let pi = p as i64;
            for a in 0..pi {
                let l = classify(&cross_section(Partition::P22, &[a], z)).unwrap();
                let want = if a == 0 {
                    Class::N22
                } else if is_sq(a, p) {
                    Class::S22Diag
                } else {
                    Class::S22Non
                };
                assert_eq!(l, ClassLabel::plain(want));
                let l = classify(&cross_section(Partition::P211, &[a], z)).unwrap();
                assert_eq!(l, ClassLabel::plain(if a == 0 { Class::N211 } else { Class::D211 }));
                for b in 0..pi {
                    let l = classify(&cross_section(Partition::P31, &[a, b], z)).unwrap();
                    // The table's conditions are phrased through the quadratic factor
                    // X^2 + 2aX + a^2 + beta, where beta is minus the (4,3) entry.
                    let beta = (-b).rem_euclid(pi);
                    let want = if a == 0 && beta == 0 {
                        SubType::N31
                    } else if beta == 0 {
                        SubType::T31TwoEV
                    } else if beta == (-4 * a * a).rem_euclid(pi) {
                        SubType::T31ThreeEV
                    } else if is_sq(-beta, p) {
                        SubType::Diag31
                    } else {
                        SubType::NonJor31
                    };
                    assert_eq!(l, ClassLabel::sub(want), "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn classification_is_conjugation_and_transpose_invariant() {
        for p in [3u64, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(10 + p);
            // Bias toward small classes by also drawing cross-section points.
            for n in 0..10_000 {
                let x = if n % 4 == 0 {
                    let part = [Partition::P31, Partition::P22, Partition::P211][rng.gen_range(0..3)];
                    let a = rng.gen_range(0..p as i64);
                    let b = rng.gen_range(0..p as i64);
                    cross_section(part, &[a, b], f(p))
                } else {
                    random_element(p, &mut rng)
                };
                let l = classify(&x).unwrap();
                assert_eq!(classify(&random_gl_conjugate(&x, &mut rng)).unwrap(), l);
                assert_eq!(classify(&transpose_twist(&x)).unwrap(), l);
            }
        }
    }

    #[test]
    fn dimensions_agree_with_centralizer() {
        for p in [3u64, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(20 + p);
            for n in 0..100_000 {
                let x = if n % 8 == 0 {
                    let part = [Partition::P31, Partition::P22, Partition::P211][rng.gen_range(0..3)];
                    let y = cross_section(part, &[rng.gen_range(0..p as i64), rng.gen_range(0..p as i64)], f(p));
                    random_gl_conjugate(&y, &mut rng)
                } else {
                    random_element(p, &mut rng)
                };
                let l = classify(&x).unwrap();
                let c = x.centralizer();
                assert_eq!(c.dim(), l.class.centralizer_dim());
                if n % 10 == 0 || l.class != Class::Reg {
                    assert_eq!(derived_dim(sl4(), &c).unwrap(), l.class.derived_dim(), "{l}");
                }
            }
        }
    }

    #[test]
    fn nilpotency_test_agrees_with_char_poly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5000 {
            let x = random_gl_conjugate(&cross_section(Partition::P211, &[rng.gen_range(0..2)], f(3)), &mut rng);
            let nil = char_poly(&x).unwrap() == PolyOverFq::monic(3, &[0, 0, 0, 0]);
            assert_eq!(is_nilpotent(&x), nil);
        }
    }

    #[test]
    fn min_poly_divides_char_poly_and_annihilates() {
        for p in [3u64, 5, 7] {
            let mut rng = ChaCha8Rng::seed_from_u64(40 + p);
            for n in 0..2000 {
                let x = if n % 2 == 0 {
                    random_element(p, &mut rng)
                } else {
                    let part = [Partition::P31, Partition::P22, Partition::P211][rng.gen_range(0..3)];
                    cross_section(part, &[rng.gen_range(0..p as i64), rng.gen_range(0..p as i64)], f(p))
                };
                let chi = char_poly(&x).unwrap();
                let mu = min_poly(&x).unwrap();
                assert!(mu.divides(&chi));
                assert!(mu.eval_matrix(&x).iter().all(|&v| v == 0));
                assert!(chi.eval_matrix(&x).iter().all(|&v| v == 0));
                assert_eq!(chi.coeffs()[3], 0, "traceless");
            }
        }
    }

    #[test]
    fn table_data() {
        let t = class_table();
        let dims: Vec<(Class, usize, usize)> =
            t.rows().iter().map(|r| (r.class, r.centralizer_dim, r.derived_dim)).collect();
        for (c, dc, dd) in dims {
            assert_eq!((dc, dd), (c.centralizer_dim(), c.derived_dim()));
        }
        assert!(cardinalities_partition(t));
        assert_eq!(t.transition(Class::Sub, Class::Reg), QtPoly::parse("q^3-1").unwrap());
        assert_eq!(t.transition(Class::N211, Class::Reg), QtPoly::parse("q^8-q^5-q^4-q^3+2q^2").unwrap());
        assert!(t.transition(Class::S22Non, Class::Sub).is_zero());
        assert_eq!(t.cardinality(Class::N211).eval_q(3), rat(1040));
        assert_eq!(t.cardinality(Class::S22Non).eval_q(3), rat(4212));
        // Transitions out of a class, weighted by the target's size, never exceed the size of
        // the centralizer locus. Sanity: every listed polynomial is nonnegative at q = 3, 5, 7.
        for poly in t.jumps().values() {
            for q in [3, 5, 7] {
                assert!(poly.eval_q(q) > rat(0));
            }
        }
    }

    #[test]
    fn sampled_census_is_deterministic() {
        let mode = CensusMode::Sampled { samples: 20_000, seed: 7 };
        let a = census(5, mode).unwrap();
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| census(5, mode).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.points, 20_000);
        assert!(matches!(census(5, CensusMode::Exhaustive), Err(ClassifyError::TooLarge { .. })));
    }

    /// Structure constants of the N31 centralizer in the basis
    /// e14, e21, e24, e23+e34, -3e11+e22+e33+e44.
    #[test]
    fn n31_centralizer_commutator_matrix() {
        let z = f(7);
        let e = |i, j| Sl4Element::unit(i, j, z);
        let d = Sl4Element::new([-3, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1], z).unwrap();
        let basis: Vec<Sl4Element> = vec![e(1, 4), e(2, 1), e(2, 4), e(2, 3).add(&e(3, 4)), d];
        let x = cross_section(Partition::P31, &[0, 0], z);
        let cent = x.centralizer();
        let coords: Vec<Vec<u64>> = basis.iter().map(|b| b.coords()).collect();
        assert_eq!(Subspace::span(15, 7, &coords), cent);
        let r = structure_in_basis(sl4(), &coords, 7).unwrap();
        let form = |pairs: &[(i64, usize)]| {
            let mut v = vec![0i64; 5];
            for &(c, k) in pairs {
                v[k] = c;
            }
            v
        };
        let expected: [[Vec<i64>; 5]; 5] = [
            [form(&[]), form(&[(-1, 2)]), form(&[]), form(&[]), form(&[(4, 0)])],
            [form(&[(1, 2)]), form(&[]), form(&[]), form(&[]), form(&[(-4, 1)])],
            [form(&[]), form(&[]), form(&[]), form(&[]), form(&[])],
            [form(&[]), form(&[]), form(&[]), form(&[]), form(&[])],
            [form(&[(-4, 0)]), form(&[(4, 1)]), form(&[]), form(&[]), form(&[])],
        ];
        for i in 0..5 {
            for j in 0..5 {
                let got: Vec<i64> = r.entry(i, j).iter().map(|v| v.rem_euclid(7)).collect();
                let want: Vec<i64> = expected[i][j].iter().map(|v| v.rem_euclid(7)).collect();
                assert_eq!(got, want, "entry ({i},{j})");
            }
        }
    }

    /// Structure constants of the N211 centralizer in the basis
    /// e13, e14, e32, e42, e12, e43, e34, e33-e44, e11+e22-e33-e44.
    #[test]
    fn n211_centralizer_commutator_matrix() {
        let p = 7;
        let z = f(p);
        let e = |i, j| Sl4Element::unit(i, j, z);
        let h = Sl4Element::new([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1], z).unwrap();
        let k = Sl4Element::new([1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1], z).unwrap();
        let basis = [e(1, 3), e(1, 4), e(3, 2), e(4, 2), e(1, 2), e(4, 3), e(3, 4), h, k];
        let coords: Vec<Vec<u64>> = basis.iter().map(|b| b.coords()).collect();
        let cent = cross_section(Partition::P211, &[0], z).centralizer();
        assert_eq!(Subspace::span(15, p, &coords), cent);
        let r = structure_in_basis(sl4(), &coords, p).unwrap();
        // Rows as (coefficient, Y-index) lists.
        type F = &'static [(i64, usize)];
        let rows: [[F; 9]; 9] = [
            [&[], &[], &[(1, 4)], &[], &[], &[], &[(1, 1)], &[(1, 0)], &[(-2, 0)]],
            [&[], &[], &[], &[(1, 4)], &[], &[(1, 0)], &[], &[(-1, 1)], &[(-2, 1)]],
            [&[(-1, 4)], &[], &[], &[], &[], &[(-1, 3)], &[], &[(-1, 2)], &[(2, 2)]],
            [&[], &[(-1, 4)], &[], &[], &[], &[], &[(-1, 2)], &[(1, 3)], &[(2, 3)]],
            [&[], &[], &[], &[], &[], &[], &[], &[], &[]],
            [&[], &[(-1, 0)], &[(1, 3)], &[], &[], &[], &[(-1, 7)], &[(2, 5)], &[]],
            [&[(-1, 1)], &[], &[], &[(1, 2)], &[], &[(1, 7)], &[], &[(-2, 6)], &[]],
            [&[(-1, 0)], &[(1, 1)], &[(1, 2)], &[(-1, 3)], &[], &[(-2, 5)], &[(2, 6)], &[], &[]],
            [&[(2, 0)], &[(2, 1)], &[(-2, 2)], &[(-2, 3)], &[], &[], &[], &[], &[]],
        ];
        for i in 0..9 {
            for j in 0..9 {
                let mut want = vec![0i64; 9];
                for &(c, idx) in rows[i][j] {
                    want[idx] = c.rem_euclid(p as i64);
                }
                let got: Vec<i64> = r.entry(i, j).iter().map(|v| v.rem_euclid(p as i64)).collect();
                assert_eq!(got, want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn n22_centralizer_basis() {
        let z = f(5);
        let e = |i, j| Sl4Element::unit(i, j, z);
        let h = Sl4Element::new([1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1], z).unwrap();
        let basis = [
            e(1, 3).add(&e(2, 4)),
            e(3, 1).add(&e(4, 2)),
            h,
            e(1, 2).add(&e(3, 4).scale(4)),
            e(1, 4),
            e(3, 2),
            e(1, 2).add(&e(3, 4)),
        ];
        let coords: Vec<Vec<u64>> = basis.iter().map(|b| b.coords()).collect();
        let cent = cross_section(Partition::P22, &[0], z).centralizer();
        assert_eq!(Subspace::span(15, 5, &coords), cent);
        assert_eq!(derived_dim(sl4(), &cent).unwrap(), 6);
    }
}
