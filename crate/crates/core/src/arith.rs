//! Modular arithmetic in prime fields `F_p` and residue rings `Z/p^r` for odd primes `p`.
//!
//! The hot loops elsewhere in the crate work on raw `u64` residues together with a [`Zpr`]
//! context; [`FieldElem`] and [`RingElem`] are the value types used at API boundaries.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{value} is not a unit modulo {modulus}")]
    NotUnit { value: u64, modulus: u64 },
    #[error("level {t} is outside 1..={r}")]
    BadLevel { t: u32, r: u32 },
    #[error("{0} is not an odd prime")]
    BadPrime(u64),
    #[error("p^r does not fit the working integer width (p = {p}, r = {r})")]
    Overflow { p: u64, r: u32 },
}

/// Largest modulus accepted; keeps `a + b` from overflowing `u64`.
const MAX_MODULUS: u64 = 1 << 62;

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The residue ring `Z/p^r` (`r = 1` is the prime field).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zpr {
    p: u64,
    r: u32,
    m: u64,
}

impl Zpr {
    pub fn new(p: u64, r: u32) -> Result<Self, ArithError> {
        if p == 2 || !is_prime(p) {
            return Err(ArithError::BadPrime(p));
        }
        if r == 0 {
            return Err(ArithError::BadLevel { t: 0, r: 0 });
        }
        let mut m: u64 = 1;
        for _ in 0..r {
            m = m
                .checked_mul(p)
                .filter(|&v| v <= MAX_MODULUS)
                .ok_or(ArithError::Overflow { p, r })?;
        }
        Ok(Zpr { p, r, m })
    }

    pub fn field(p: u64) -> Result<Self, ArithError> {
        Self::new(p, 1)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.r
    }

    /// `p^r`.
    #[inline]
    pub fn modulus(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn is_field(&self) -> bool {
        self.r == 1
    }

    /// Same prime at another level.
    pub fn with_level(&self, t: u32) -> Result<Zpr, ArithError> {
        Zpr::new(self.p, t)
    }

    /// The residue field of this ring.
    pub fn residue_field(&self) -> Zpr {
        Zpr { p: self.p, r: 1, m: self.p }
    }

    #[inline]
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.m as i64) as u64
    }

    #[inline]
    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.m as i128) as u64
    }

    /// Signed representative in `(-m/2, m/2]`.
    #[inline]
    pub fn to_signed(&self, a: u64) -> i64 {
        if a > self.m / 2 {
            a as i64 - self.m as i64
        } else {
            a as i64
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.m <= u32::MAX as u64 {
            a * b % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// `p^k` as an element (zero once `k >= r`).
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.r {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// Largest `v <= r` with `p^v | a`; `v(0) = r`.
    #[inline]
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.r;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit via the extended Euclidean algorithm.
    pub fn unit_inverse(&self, a: u64) -> Result<u64, ArithError> {
        if a == 0 {
            return Err(ArithError::ZeroInverse);
        }
        let (mut old_r, mut r) = (a as i128, self.m as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        if old_r != 1 {
            return Err(ArithError::NotUnit { value: a, modulus: self.m });
        }
        Ok(old_s.rem_euclid(self.m as i128) as u64)
    }

    /// Splits `a != 0` as `p^v * u` with `u` a unit; returns `(v, u)`.
    /// The unit is only determined modulo `p^(r-v)`; the representative returned is `a / p^v`.
    pub fn split(&self, a: u64) -> (u32, u64) {
        let v = self.valuation(a);
        if v >= self.r {
            return (self.r, 0);
        }
        (v, a / self.p.pow(v))
    }

    /// Euler's criterion in the residue field; zero counts as a square.
    pub fn is_square_mod_p(&self, a: u64) -> bool {
        let a = a % self.p;
        if a == 0 {
            return true;
        }
        let f = self.residue_field();
        f.pow(a, (self.p - 1) / 2) == 1
    }

    /// Reduces a residue of this ring to level `t`.
    pub fn reduce_to(&self, a: u64, t: u32) -> Result<u64, ArithError> {
        if t < 1 || t > self.r {
            return Err(ArithError::BadLevel { t, r: self.r });
        }
        Ok(a % self.p.pow(t))
    }
}

impl fmt::Display for Zpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "Z/{}^{}", self.p, self.r)
        }
    }
}

/// An element of `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    p: u64,
}

impl FieldElem {
    pub fn new(value: i64, p: u64) -> Result<Self, ArithError> {
        let f = Zpr::field(p)?;
        Ok(FieldElem { value: f.from_i64(value), p })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn ctx(&self) -> Zpr {
        Zpr { p: self.p, r: 1, m: self.p }
    }

    pub fn inverse(&self) -> Result<FieldElem, ArithError> {
        field_inverse(*self)
    }

    pub fn is_square(&self) -> bool {
        is_square(*self)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

/// Inverse in `F_p`.
pub fn field_inverse(a: FieldElem) -> Result<FieldElem, ArithError> {
    let inv = a.ctx().unit_inverse(a.value)?;
    Ok(FieldElem { value: inv, p: a.p })
}

/// Whether `a` is a square in `F_p` (Euler's criterion).
pub fn is_square(a: FieldElem) -> bool {
    a.ctx().is_square_mod_p(a.value)
}

fn same_field(a: &FieldElem, b: &FieldElem) {
    assert_eq!(a.p, b.p, "field elements with different moduli");
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        same_field(&self, &rhs);
        FieldElem { value: self.ctx().add(self.value, rhs.value), p: self.p }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: FieldElem) -> FieldElem {
        same_field(&self, &rhs);
        FieldElem { value: self.ctx().sub(self.value, rhs.value), p: self.p }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        same_field(&self, &rhs);
        FieldElem { value: self.ctx().mul(self.value, rhs.value), p: self.p }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { value: self.ctx().neg(self.value), p: self.p }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.p)
    }
}

/// An element of `Z/p^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingElem {
    value: u64,
    ring: Zpr,
}

impl RingElem {
    pub fn new(value: i64, p: u64, level: u32) -> Result<Self, ArithError> {
        let ring = Zpr::new(p, level)?;
        Ok(RingElem { value: ring.from_i64(value), ring })
    }

    pub fn from_raw(value: u64, ring: Zpr) -> Self {
        RingElem { value: value % ring.modulus(), ring }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> Zpr {
        self.ring
    }

    pub fn level(&self) -> u32 {
        self.ring.level()
    }

    pub fn prime(&self) -> u64 {
        self.ring.p()
    }
}

/// `v_p(x)` with the convention `v(0 mod p^r) = r`.
pub fn valuation(x: RingElem) -> u32 {
    x.ring.valuation(x.value)
}

/// Reduction `Z/p^r -> Z/p^t`.
pub fn reduce_level(x: RingElem, t: u32) -> Result<RingElem, ArithError> {
    let value = x.ring.reduce_to(x.value, t)?;
    Ok(RingElem { value, ring: x.ring.with_level(t)? })
}

fn same_ring(a: &RingElem, b: &RingElem) {
    assert_eq!(a.ring, b.ring, "ring elements from different rings");
}

impl Add for RingElem {
    type Output = RingElem;
    fn add(self, rhs: RingElem) -> RingElem {
        same_ring(&self, &rhs);
        RingElem { value: self.ring.add(self.value, rhs.value), ring: self.ring }
    }
}

impl Sub for RingElem {
    type Output = RingElem;
    fn sub(self, rhs: RingElem) -> RingElem {
        same_ring(&self, &rhs);
        RingElem { value: self.ring.sub(self.value, rhs.value), ring: self.ring }
    }
}

impl Mul for RingElem {
    type Output = RingElem;
    fn mul(self, rhs: RingElem) -> RingElem {
        same_ring(&self, &rhs);
        RingElem { value: self.ring.mul(self.value, rhs.value), ring: self.ring }
    }
}

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { value: self.ring.neg(self.value), ring: self.ring }
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.ring.modulus())
    }
}
