//! Poincaré series assembled from kernel-class data, the `SL_4` zeta function and its closed
//! form, abscissae, and brute-force oracles for the counts behind the series.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::Zpr;
use crate::classify::{class_table, cross_section, random_gl_conjugate, Class, Partition};
use crate::lattice::{commutator_matrix, derived_dim, dual_coords, sl4, LatticeError, LieLattice, Sl4Element};
use crate::linalg::{
    antisymmetric_snf, divisor_profile, divisor_profile_in_place, module_kernel, rank_and_kernel, rref_in_place,
    is_isolated, smith_normal_form, ModMatrix, Subspace,
};
use crate::ratfunc::{rat, QtPoly, QtRational, RatFuncError};
use crate::scan::{par_fold_points, point_count};
use crate::transitions::{chain_count, TransitionError};

/// Brute-force enumerations beyond this many points are refused.
pub const MAX_POINTS: u128 = 60_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZetaError {
    #[error("class {name}: centralizer dimension {dc} does not fit ambient dimension {d}")]
    BadClass { name: String, dc: usize, d: usize },
    #[error("index set and exponent vector differ in length or are not increasing")]
    BadIndexSet,
    #[error("enumeration of {points} points exceeds the limit of {limit}")]
    TooLarge { points: u128, limit: u128 },
    #[error("theorem data: line {line}: {msg}")]
    Data { line: usize, msg: String },
    #[error("no nonzero class")]
    NoClasses,
    #[error(transparent)]
    RatFunc(#[from] RatFuncError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// A kernel class: centralizer dimension `d_c`, derived dimension `d'_c`, and cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelClass {
    pub name: String,
    pub dc: usize,
    pub dprime: usize,
    pub cardinality: QtPoly,
}

/// Class data of a commutator matrix of size `d`, with `h = floor(d/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelClassData {
    pub d: usize,
    pub h: usize,
    pub classes: Vec<KernelClass>,
    /// `tau(c -> c')` by class index, from the larger centralizer to the smaller.
    pub transitions: BTreeMap<(usize, usize), QtPoly>,
    /// Exact `|C_S|` for particular chains, overriding the product of transitions.
    pub chain_weights: BTreeMap<Vec<usize>, QtPoly>,
}

impl KernelClassData {
    pub fn new(d: usize, classes: Vec<KernelClass>) -> Result<Self, ZetaError> {
        for c in &classes {
            if c.dc >= d || (d - c.dc) % 2 != 0 || c.dprime > c.dc {
                return Err(ZetaError::BadClass { name: c.name.clone(), dc: c.dc, d });
            }
        }
        Ok(KernelClassData { d, h: d / 2, classes, transitions: BTreeMap::new(), chain_weights: BTreeMap::new() })
    }

    /// The index `i` with `d_c = d - 2(h - i)`.
    pub fn index_of(&self, c: usize) -> usize {
        self.h - (self.d - self.classes[c].dc) / 2
    }

    pub fn transition(&self, from: usize, to: usize) -> QtPoly {
        self.transitions.get(&(from, to)).cloned().unwrap_or_else(QtPoly::zero)
    }

    /// All nonempty chains of classes with strictly decreasing `d_c`, largest first.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.classes.len()).collect();
        order.sort_by_key(|&c| std::cmp::Reverse(self.classes[c].dc));
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = order.iter().map(|&c| vec![c]).collect();
        while let Some(chain) = stack.pop() {
            let last = *chain.last().expect("nonempty");
            for &c in &order {
                if self.classes[c].dc < self.classes[last].dc {
                    let mut next = chain.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
            out.push(chain);
        }
        out.sort();
        out
    }

    /// `|C_S| = |c_1| prod tau(c_j -> c_{j+1})` unless overridden.
    pub fn chain_weight(&self, chain: &[usize]) -> QtPoly {
        if let Some(w) = self.chain_weights.get(chain) {
            return w.clone();
        }
        let mut w = self.classes[chain[0]].cardinality.clone();
        for pair in chain.windows(2) {
            w = &w * &self.transition(pair[0], pair[1]);
        }
        w
    }

    /// Index set of a chain in increasing order.
    pub fn index_set(&self, chain: &[usize]) -> Vec<usize> {
        let mut i: Vec<usize> = chain.iter().map(|&c| self.index_of(c)).collect();
        i.sort();
        i
    }

    /// `(d - d'_c, (d - d_c)/2)`: exponents of `X_c = q^a t^b`.
    pub fn x_exponents(&self, c: usize) -> (i64, i64) {
        let k = &self.classes[c];
        ((self.d - k.dprime) as i64, ((self.d - k.dc) / 2) as i64)
    }
}

/// One summand of the assembled series.
#[derive(Debug, Clone)]
pub struct SeriesTerm {
    pub indices: Vec<usize>,
    pub classes: Vec<String>,
    pub weight: QtPoly,
    pub term: QtRational,
}

fn term_for_chain(data: &KernelClassData, chain: &[usize]) -> Result<SeriesTerm, ZetaError> {
    let weight = data.chain_weight(chain);
    let last = *chain.last().expect("nonempty");
    let (a_last, _) = data.x_exponents(last);
    let mut num = weight.shift(-a_last, 0);
    let mut den = QtPoly::one();
    for &c in chain {
        let (a, b) = data.x_exponents(c);
        num = num.shift(a, b);
        den = &den * &crate::ratfunc::one_minus(1, a, b);
    }
    Ok(SeriesTerm {
        indices: data.index_set(chain),
        classes: chain.iter().map(|&c| data.classes[c].name.clone()).collect(),
        weight,
        term: QtRational::new(num, den)?,
    })
}

/// Every chain with a nonzero weight, as a separate rational term.
pub fn series_terms(data: &KernelClassData) -> Result<Vec<SeriesTerm>, ZetaError> {
    data.chains()
        .into_iter()
        .filter(|ch| !data.chain_weight(ch).is_zero())
        .map(|ch| term_for_chain(data, &ch))
        .collect()
}

/// The Poincaré series in `q` and `t = q^{-s}`, over the common denominator
/// `prod (1 - X_c)` taken over distinct `X_c`. The empty chain contributes 1.
pub fn assemble_poincare(data: &KernelClassData) -> Result<QtRational, ZetaError> {
    let mut factors: Vec<(i64, i64)> = (0..data.classes.len()).map(|c| data.x_exponents(c)).collect();
    factors.sort();
    factors.dedup();
    let den = factors.iter().fold(QtPoly::one(), |acc, &(a, b)| &acc * &crate::ratfunc::one_minus(1, a, b));
    let mut num = den.clone();
    for chain in data.chains() {
        let weight = data.chain_weight(&chain);
        if weight.is_zero() {
            continue;
        }
        let last = *chain.last().expect("nonempty");
        let mut t = weight.shift(-data.x_exponents(last).0, 0);
        let used: Vec<(i64, i64)> = chain.iter().map(|&c| data.x_exponents(c)).collect();
        for &(a, b) in &used {
            t = t.shift(a, b);
        }
        for f in factors.iter().filter(|f| !used.contains(f)) {
            t = &t * &crate::ratfunc::one_minus(1, f.0, f.1);
        }
        num = &num + &t;
    }
    Ok(QtRational::new(num, den)?)
}

/// Class data of `sl_4(F_q)` from the bundled table.
pub fn sl4_class_data() -> KernelClassData {
    let table = class_table();
    let classes: Vec<KernelClass> = Class::NONZERO
        .iter()
        .map(|&c| {
            let row = table.row(c).expect("every nonzero class has a row");
            KernelClass {
                name: c.name().to_string(),
                dc: row.centralizer_dim,
                dprime: row.derived_dim,
                cardinality: row.cardinality.clone(),
            }
        })
        .collect();
    let mut data = KernelClassData::new(15, classes).expect("table dimensions are consistent");
    for (i, &a) in Class::NONZERO.iter().enumerate() {
        for (j, &b) in Class::NONZERO.iter().enumerate() {
            let t = table.transition(a, b);
            if !t.is_zero() {
                data.transitions.insert((i, j), t);
            }
        }
    }
    data
}

/// `q^{15m} P(q, q^{-2} t)`.
pub fn sl4_zeta(m: u32) -> Result<QtRational, ZetaError> {
    let p = assemble_poincare(&sl4_class_data())?;
    let shifted = p.substitute(1, 0, -2, 1)?;
    Ok(shifted.mul_poly(&QtPoly::monomial(rat(1), 15 * m as i64, 0)))
}

/// The closed form `F / G`, with `G` kept as a list of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremB {
    pub f: QtPoly,
    pub g: QtPoly,
    pub g_factors: Vec<QtPoly>,
}

const THEOREM_B: &str = include_str!("../data/theorem_b.txt");

impl TheoremB {
    pub fn parse(text: &str) -> Result<Self, ZetaError> {
        let mut f = QtPoly::zero();
        let mut g_factors = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ZetaError::Data { line: n + 1, msg: msg.to_string() };
            let (kind, rest) = line.split_once(char::is_whitespace).ok_or_else(|| err("missing body"))?;
            match kind {
                "F" => {
                    let (k, poly) = rest.trim().split_once(char::is_whitespace).ok_or_else(|| err("missing coefficient"))?;
                    let k: i64 = k.parse().map_err(|_| err("bad t-exponent"))?;
                    let c = QtPoly::parse(poly)?;
                    if c.t_degree_range().is_some_and(|r| r != (0, 0)) {
                        return Err(err("coefficient must not involve t"));
                    }
                    f = &f + &c.shift(0, k);
                }
                "G" => {
                    for part in split_top_level_products(rest) {
                        g_factors.push(QtPoly::parse(&part)?);
                    }
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        let g = g_factors.iter().fold(QtPoly::one(), |acc, x| &acc * x);
        Ok(TheoremB { f, g, g_factors })
    }

    pub fn as_rational(&self) -> QtRational {
        QtRational::new(self.f.clone(), self.g.clone()).expect("G is nonzero")
    }

    /// `F(1, t) = G(1, t)`.
    pub fn f1_eq_g1(&self) -> bool {
        let at1 = |p: &QtPoly| p.substitute(0, 0, 0, 1).expect("small exponents");
        at1(&self.f) == at1(&self.g)
    }

    /// `F(q, q^2) = 0`.
    pub fn f_vanishes_at_t_q2(&self) -> bool {
        self.f.substitute(1, 0, 2, 0).map(|p| p.is_zero()).unwrap_or(false)
    }

    /// The `s`-values `a/b` at which a factor `1 - c q^a t^b` of `G` vanishes (with `c = 1`).
    pub fn real_poles(&self) -> Vec<BigRational> {
        let mut out = Vec::new();
        for fac in &self.g_factors {
            let terms: Vec<((i64, i64), BigRational)> = fac.terms().map(|(e, c)| (e, c.clone())).collect();
            if terms.len() == 2 && terms.iter().any(|(e, c)| *e == (0, 0) && c.is_one()) {
                if let Some(((a, b), c)) = terms.iter().find(|(e, _)| *e != (0, 0)) {
                    if *c == -rat(1) && *b != 0 {
                        out.push(BigRational::new(BigInt::from(*a), BigInt::from(*b)));
                    }
                }
            }
        }
        out.sort();
        out
    }
}

fn split_top_level_products(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == '*' && depth == 0 {
            parts.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    parts.push(cur);
    parts.into_iter().map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

/// The bundled closed form.
pub fn theorem_b_reference() -> TheoremB {
    TheoremB::parse(THEOREM_B).expect("bundled data parses")
}

/// Verdicts for the `SL_4` identity and the side conditions.
#[derive(Debug, Clone)]
pub struct TheoremBReport {
    pub m: u32,
    pub zeta: QtRational,
    pub theorem_b_match: bool,
    pub f1_eq_g1: bool,
    pub zeta_at_minus2_zero: bool,
    pub reciprocity_f: Option<(i64, i64)>,
    pub reciprocity_g: Option<(i64, i64)>,
    /// `zeta(q -> 1/q, t -> 1/t) = q^{-15m} zeta`.
    pub functional_equation: bool,
}

pub fn check_theorem_b(m: u32) -> Result<TheoremBReport, ZetaError> {
    let zeta = sl4_zeta(m)?;
    let tb = theorem_b_reference();
    let scale = QtPoly::monomial(rat(1), 15 * m as i64, 0);
    let closed = tb.as_rational().mul_poly(&scale);
    let inverted = zeta.substitute(-1, 0, 0, -1)?;
    let functional_equation = inverted.equals(&zeta.mul_poly(&QtPoly::monomial(rat(1), -15 * m as i64, 0)));
    Ok(TheoremBReport {
        m,
        theorem_b_match: zeta.equals(&closed),
        f1_eq_g1: tb.f1_eq_g1(),
        zeta_at_minus2_zero: tb.f_vanishes_at_t_q2(),
        reciprocity_f: tb.f.reciprocity_exponents().ok(),
        reciprocity_g: tb.g.reciprocity_exponents().ok(),
        functional_equation,
        zeta,
    })
}

/// Power series coefficients of `zeta` in `t` up to `degree`; returns them and whether each
/// one is a polynomial in `q` with integer coefficients and nonnegative values at every odd
/// prime below 100.
pub fn series_coefficients_check(zeta: &QtRational, degree: i64) -> Result<(Vec<QtPoly>, bool), ZetaError> {
    let coeffs = zeta.expand_t(degree)?;
    let primes: Vec<i64> = (3..100).filter(|&n| crate::arith::is_prime(n as u64)).collect();
    let ok = coeffs.iter().all(|c| {
        c.has_integer_coefficients()
            && c.q_degree_range().map_or(true, |(lo, _)| lo >= 0)
            && primes.iter().all(|&p| !c.eval_q(p).is_negative())
    });
    Ok((coeffs, ok))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbscissaMode {
    Poincare,
    Group,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Abscissa {
    pub value: BigRational,
    pub attained_by: Vec<String>,
}

/// Poincaré mode: `max 2(d - d'_c)/(d - d_c)`; group mode: `max 2(d_c - d'_c)/(d - d_c)`.
pub fn abscissa(data: &KernelClassData, mode: AbscissaMode) -> Result<Abscissa, ZetaError> {
    let mut best: Option<Abscissa> = None;
    for c in &data.classes {
        let num = match mode {
            AbscissaMode::Poincare => 2 * (data.d - c.dprime) as i64,
            AbscissaMode::Group => 2 * (c.dc - c.dprime) as i64,
        };
        let v = BigRational::new(BigInt::from(num), BigInt::from((data.d - c.dc) as i64));
        match &mut best {
            Some(b) if b.value == v => b.attained_by.push(c.name.clone()),
            Some(b) if b.value > v => {}
            _ => best = Some(Abscissa { value: v, attained_by: vec![c.name.clone()] }),
        }
    }
    best.ok_or(ZetaError::NoClasses)
}

/// Ascending divisor exponents for `(I, r)`: `mu_l` zeros, then `r_l` repeated `mu_{l-1}`
/// times, then `r_l + r_{l-1}` repeated `mu_{l-2}` times, and so on up to `N` repeated
/// `mu_0 = i_1` times, where `mu_j = i_{j+1} - i_j`, `i_0 = 0`, `i_{l+1} = h`.
pub fn target_pattern(h: usize, indices: &[usize], r: &[u32]) -> Result<Vec<u32>, ZetaError> {
    if indices.len() != r.len() || indices.windows(2).any(|w| w[0] >= w[1]) || indices.iter().any(|&i| i >= h) {
        return Err(ZetaError::BadIndexSet);
    }
    let l = indices.len();
    let i_at = |j: usize| if j == 0 { 0 } else if j == l + 1 { h } else { indices[j - 1] };
    let mu = |j: usize| i_at(j + 1) - i_at(j);
    let mut out = vec![0u32; mu(l)];
    let mut acc = 0u32;
    for j in (0..l).rev() {
        acc += r[j];
        out.extend(std::iter::repeat(acc).take(mu(j)));
    }
    Ok(out)
}

/// Calls `f(v, weight)` on one representative of each orbit of primitive vectors in
/// `(Z/p^n)^d` under unit scaling (the last unit coordinate is 1), with the orbit size.
fn fold_primitive_orbits<T, I, F, M>(p: u64, n: u32, d: usize, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(&mut T, &[u64], u64) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let modulus = p.pow(n);
    let units = modulus - modulus / p;
    let tail_radix = modulus / p;
    let mut acc = init();
    for lead in 0..d {
        let tail = d - lead - 1;
        let part = par_fold_points(
            modulus,
            lead,
            &init,
            |a: &mut T, head: &[u64]| {
                let mut v = vec![0u64; d];
                v[..lead].copy_from_slice(head);
                v[lead] = 1;
                let mut t = vec![0u64; tail];
                loop {
                    for (k, &x) in t.iter().enumerate() {
                        v[lead + 1 + k] = x * p;
                    }
                    fold(a, &v, units);
                    let mut k = 0;
                    while k < tail {
                        t[k] += 1;
                        if t[k] < tail_radix {
                            break;
                        }
                        t[k] = 0;
                        k += 1;
                    }
                    if k == tail {
                        break;
                    }
                }
            },
            &merge,
        );
        acc = merge(acc, part);
    }
    acc
}

fn primitive_orbit_count(p: u64, n: u32, d: usize) -> u128 {
    let m = p.pow(n) as u128;
    (0..d).map(|lead| m.pow(lead as u32) * (m / p as u128).pow((d - lead - 1) as u32)).sum()
}

/// Histogram of (clamped, ascending) divisor profiles over primitive `w` mod `p^n`.
pub fn profile_histogram(l: &LieLattice, p: u64, n: u32) -> Result<BTreeMap<Vec<u32>, u128>, ZetaError> {
    let z = Zpr::new(p, n).map_err(|_| ZetaError::BadIndexSet)?;
    let d = l.dim();
    let cost = primitive_orbit_count(p, n, d);
    if cost > MAX_POINTS {
        return Err(ZetaError::TooLarge { points: cost, limit: MAX_POINTS });
    }
    let r = commutator_matrix(l);
    Ok(fold_primitive_orbits(
        p,
        n,
        d,
        || (BTreeMap::<Vec<u32>, u128>::new(), vec![0u64; d * d]),
        |(hist, buf), v, weight| {
            r.evaluate_into(v, &z, buf);
            let mut e = divisor_profile_in_place(buf, d, &z);
            for x in e.iter_mut() {
                *x = (*x).min(n);
            }
            *hist.entry(e).or_default() += weight as u128;
        },
        |mut a, b| {
            for (k, v) in b.0 {
                *a.0.entry(k).or_default() += v;
            }
            a
        },
    )
    .0)
}

/// `|N_{I,r}|`: primitive `w` mod `p^N`, `N = sum r`, with profile [`target_pattern`].
pub fn bruteforce_counts(l: &LieLattice, p: u64, indices: &[usize], r: &[u32]) -> Result<u128, ZetaError> {
    let target = target_pattern(l.dim() / 2, indices, r)?;
    if indices.is_empty() {
        return Ok(1);
    }
    let n: u32 = r.iter().sum();
    Ok(profile_histogram(l, p, n)?.get(&target).copied().unwrap_or(0))
}

/// Series prediction for `(I, r)` at `q = p`:
/// `sum_S |C_S| p^{(d - d'_{c(i_1)})(r_1 - 1)} prod_{j >= 2} p^{(d - d'_{c(i_j)}) r_j}`.
pub fn predicted_count(data: &KernelClassData, p: u64, indices: &[usize], r: &[u32]) -> Result<BigRational, ZetaError> {
    target_pattern(data.h, indices, r)?;
    if indices.is_empty() {
        return Ok(rat(1));
    }
    let mut total = BigRational::zero();
    for chain in data.chains() {
        if data.index_set(&chain) != indices {
            continue;
        }
        let w = data.chain_weight(&chain).eval_q(p as i64);
        let mut e: i64 = 0;
        for (j, (&i, &rj)) in indices.iter().zip(r).enumerate() {
            let c = *chain.iter().find(|&&c| data.index_of(c) == i).expect("index present");
            let a = data.x_exponents(c).0;
            e += a * if j == 0 { rj as i64 - 1 } else { rj as i64 };
        }
        total += w * BigRational::from_integer(BigInt::from(p).pow(e as u32));
    }
    Ok(total)
}

/// Kernel classes of `l` over `F_p` keyed by `(dim ker, dim [ker, ker])`, with exact chain
/// weights computed by enumeration (no homogeneity assumption).
pub fn on_the_fly_class_data(l: &LieLattice, p: u64) -> Result<KernelClassData, ZetaError> {
    let f = Zpr::field(p).map_err(|_| ZetaError::BadIndexSet)?;
    let d = l.dim();
    if point_count(p, d) > MAX_POINTS {
        return Err(ZetaError::TooLarge { points: point_count(p, d), limit: MAX_POINTS });
    }
    let r = commutator_matrix(l);
    // Every nonzero w with its kernel.
    let kernels: Vec<((usize, usize), Subspace)> = par_fold_points(
        p,
        d,
        Vec::new,
        |acc, w| {
            if w.iter().all(|&x| x == 0) {
                return;
            }
            let (_, ker) = rank_and_kernel(&r.evaluate(w, f)).expect("field");
            let dd = derived_dim(l, &ker).expect("kernels are subalgebras");
            acc.push(((ker.dim(), dd), ker));
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let mut keys: Vec<(usize, usize)> = kernels.iter().map(|(k, _)| *k).collect();
    keys.sort();
    keys.dedup();
    let classes: Vec<KernelClass> = keys
        .iter()
        .map(|&(dc, dd)| KernelClass {
            name: format!("k{dc}d{dd}"),
            dc,
            dprime: dd,
            cardinality: QtPoly::from_int(kernels.iter().filter(|(k, _)| *k == (dc, dd)).count() as i64),
        })
        .collect();
    let mut data = KernelClassData::new(d, classes)?;
    for chain in data.chains() {
        if chain.len() == 1 {
            continue;
        }
        let top = keys[chain[0]];
        let dims: Vec<usize> = chain[1..].iter().map(|&c| keys[c].0).collect();
        let wanted: Vec<(usize, usize)> = chain[1..].iter().map(|&c| keys[c]).collect();
        let accept = |remaining: usize, k2: &Subspace| {
            let key = wanted[wanted.len() - remaining];
            k2.dim() == key.0 && derived_dim(l, k2).ok() == Some(key.1)
        };
        let mut total = 0u128;
        for (_, ker) in kernels.iter().filter(|(k, _)| *k == top) {
            total += chain_count(l, ker, &dims, accept)?;
        }
        data.chain_weights.insert(chain, QtPoly::from_int(total as i64));
    }
    Ok(data)
}

/// One `(I, r)` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub indices: Vec<usize>,
    pub r: Vec<u32>,
    pub brute: u128,
    pub predicted: BigRational,
}

impl OracleRow {
    pub fn ok(&self) -> bool {
        BigRational::from_integer(BigInt::from(self.brute)) == self.predicted
    }
}

/// All `(I, r)` with `1 <= N <= nmax` for which some chain has index set `I` or the brute
/// force finds points, plus the empty set.
pub fn oracle_table(l: &LieLattice, data: &KernelClassData, p: u64, nmax: u32) -> Result<Vec<OracleRow>, ZetaError> {
    let h = data.h;
    let mut rows = vec![OracleRow { indices: vec![], r: vec![], brute: 1, predicted: rat(1) }];
    for n in 1..=nmax {
        let hist = profile_histogram(l, p, n)?;
        for mask in 1u32..(1 << h) {
            let indices: Vec<usize> = (0..h).filter(|i| mask & (1 << i) != 0).collect();
            for r in compositions(n, indices.len()) {
                let target = target_pattern(h, &indices, &r)?;
                let brute = hist.get(&target).copied().unwrap_or(0);
                let predicted = predicted_count(data, p, &indices, &r)?;
                if brute == 0 && predicted.is_zero() {
                    continue;
                }
                rows.push(OracleRow { indices: indices.clone(), r, brute, predicted });
            }
        }
        // Every primitive point must fall under some (I, r) of total N.
        let covered: u128 = rows.iter().filter(|row| row.r.iter().sum::<u32>() == n).map(|row| row.brute).sum();
        let total: u128 = hist.values().sum();
        if covered != total {
            rows.push(OracleRow { indices: vec![usize::MAX], r: vec![n], brute: total - covered, predicted: rat(0) });
        }
    }
    Ok(rows)
}

/// Ordered compositions of `n` into `k` positive parts.
pub fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Whether an ascending profile at level `r` only has exponents `0` and `r`.
pub fn is_clamped(exponents: &[u32], r: u32) -> bool {
    exponents.iter().all(|&e| e == 0 || e >= r)
}

/// Lift counts for one point `x` at level `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftCount {
    pub clamped: bool,
    /// `p^{d - rk Z}` with `Z` the isolator of `[V, V]`, `V` the kernel module at level `r`.
    pub predicted: Option<u64>,
    /// Exact count from the linearized condition on the non-unit block. Only meaningful when
    /// `clamped`; otherwise the level `r` data has intermediate divisors and this is left at 0.
    pub actual: u64,
}

impl LiftCount {
    pub fn agrees(&self) -> bool {
        !self.clamped || self.predicted == Some(self.actual)
    }
}

fn max_count(e: &[u32], level: u32) -> usize {
    e.iter().filter(|&&x| x >= level).count()
}

/// Rank-preserving lifts of `x` (residues mod `p^r`) counted by enumerating all `p^d` lifts.
pub fn rank_preserving_lifts_brute(l: &LieLattice, x: &[u64], ring: Zpr) -> u64 {
    let r = ring.level();
    let up = ring.with_level(r + 1).expect("level");
    let d = l.dim();
    let rm = commutator_matrix(l);
    let base = divisor_profile(&rm.evaluate(x, ring)).expect("antisymmetric");
    let want = max_count(&base.exponents, r);
    let pr = ring.modulus();
    par_fold_points(
        ring.p(),
        d,
        || (0u64, vec![0u64; d], vec![0u64; d * d]),
        |(n, y, buf), z| {
            for k in 0..d {
                y[k] = (x[k] + pr * z[k]) % up.modulus();
            }
            rm.evaluate_into(y, &up, buf);
            let e = divisor_profile_in_place(buf, d, &up);
            if max_count(&e, r + 1) == want {
                *n += 1;
            }
        },
        |a, b| (a.0 + b.0, a.1, a.2),
    )
    .0
}

/// Rank-preserving lifts of `x` at level `r`, counted through the block decomposition of the
/// level `r + 1` normal form: a lift `x + p^r z` keeps all maximal divisors exactly when
/// `B + (z([s_i, s_j]))_{i,j in J} = 0 mod p`, where `J` indexes the non-unit blocks, `s_i` are
/// the corresponding transform columns and `B` is the non-unit block divided by `p^r`.
pub fn rank_preserving_lifts(l: &LieLattice, x: &[u64], ring: Zpr) -> LiftCount {
    let r = ring.level();
    let p = ring.p();
    let up = ring.with_level(r + 1).expect("level");
    let f = ring.residue_field();
    let d = l.dim();
    let rm = commutator_matrix(l);
    let base = divisor_profile(&rm.evaluate(x, ring)).expect("antisymmetric");
    let clamped = is_clamped(&base.exponents, r);
    if !clamped {
        return LiftCount { clamped, predicted: None, actual: 0 };
    }
    let asnf = antisymmetric_snf(&rm.evaluate(x, up)).expect("antisymmetric");
    let mut j_idx = Vec::new();
    for (k, &e) in asnf.profile.exponents.iter().enumerate() {
        if e > 0 {
            j_idx.extend([2 * k, 2 * k + 1]);
        }
    }
    if d % 2 == 1 {
        j_idx.push(d - 1);
    }
    let pr = ring.modulus();
    let cols: Vec<Vec<u64>> =
        j_idx.iter().map(|&c| (0..d).map(|row| asnf.s.get(row, c) % p).collect()).collect();
    // One equation per pair i < j in J: sum_h z_h [s_i, s_j]_h = -B_ij.
    let mut rows = Vec::new();
    for a in 0..j_idx.len() {
        for b in a + 1..j_idx.len() {
            let br = l.bracket_mod(&cols[a], &cols[b], &f);
            let nf = asnf.normal_form.get(j_idx[a], j_idx[b]);
            debug_assert_eq!(nf % pr, 0);
            let bij = (nf / pr) % p;
            let mut row = br;
            row.push(f.neg(bij));
            rows.push(row);
        }
    }
    let actual = if rows.is_empty() {
        p.pow(d as u32)
    } else {
        let n = rows.len();
        let mut data: Vec<u64> = rows.concat();
        let piv = rref_in_place(&mut data, n, d + 1, &f);
        if piv.contains(&d) {
            0
        } else {
            p.pow((d - piv.len()) as u32)
        }
    };
    let predicted = Some({
        let v = module_kernel(&rm.evaluate(x, ring));
        let gens = v.row_vecs();
        let mut brackets = Vec::new();
        for a in 0..gens.len() {
            for b in a + 1..gens.len() {
                brackets.push(l.bracket_mod(&gens[a], &gens[b], &ring));
            }
        }
        let rk_z = if brackets.is_empty() {
            0
        } else {
            let m = ModMatrix::from_rows(ring, d, &brackets);
            smith_normal_form(&m).exponents.iter().filter(|&&e| e < r).count()
        };
        p.pow((d - rk_z) as u32)
    });
    LiftCount { clamped, predicted, actual }
}

/// Summary of a lift-law scan.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LiftLawReport {
    /// Points examined (weighted by unit-scaling orbit size).
    pub points: u128,
    pub clamped: u128,
    pub agree: u128,
    /// A few disagreeing points: `(x, predicted, actual)`.
    pub examples: Vec<(Vec<u64>, Option<u64>, u64)>,
}

impl LiftLawReport {
    pub fn holds(&self) -> bool {
        self.clamped == self.agree
    }

    fn merge(mut self, o: Self) -> Self {
        self.points += o.points;
        self.clamped += o.clamped;
        self.agree += o.agree;
        self.examples.extend(o.examples);
        self.examples.sort();
        self.examples.truncate(5);
        self
    }

    fn record(&mut self, x: &[u64], c: &LiftCount, weight: u128) {
        self.points += weight;
        if c.clamped {
            self.clamped += weight;
            if c.agrees() {
                self.agree += weight;
            } else if self.examples.len() < 5 {
                self.examples.push((x.to_vec(), c.predicted, c.actual));
            }
        }
    }
}

/// Every `x` mod `p^r` (primitive points up to unit scaling, the rest one by one).
pub fn lift_law_exhaustive(l: &LieLattice, p: u64, r: u32) -> Result<LiftLawReport, ZetaError> {
    let ring = Zpr::new(p, r).map_err(|_| ZetaError::BadIndexSet)?;
    let d = l.dim();
    let cost = primitive_orbit_count(p, r, d) + point_count(p, (r as usize - 1) * d);
    if cost > MAX_POINTS {
        return Err(ZetaError::TooLarge { points: cost, limit: MAX_POINTS });
    }
    let prim = fold_primitive_orbits(
        p,
        r,
        d,
        LiftLawReport::default,
        |rep, x, w| rep.record(x, &rank_preserving_lifts(l, x, ring), w as u128),
        LiftLawReport::merge,
    );
    // Non-primitive points p * y, y mod p^{r-1}.
    let rest = par_fold_points(
        p.pow(r - 1),
        d,
        LiftLawReport::default,
        |rep, y| {
            let x: Vec<u64> = y.iter().map(|&v| v * p).collect();
            rep.record(&x, &rank_preserving_lifts(l, &x, ring), 1);
        },
        LiftLawReport::merge,
    );
    Ok(prim.merge(rest))
}

/// Clamped points where the linearized count and the brute-force count differ.
pub fn lift_counter_disagreements(l: &LieLattice, ring: Zpr, points: &[Vec<u64>]) -> Vec<Vec<u64>> {
    points
        .iter()
        .filter(|x| {
            let c = rank_preserving_lifts(l, x, ring);
            c.clamped && c.actual != rank_preserving_lifts_brute(l, x, ring)
        })
        .cloned()
        .collect()
}

/// Centralizer dimensions of the nonzero rank loci of `sl_4`.
pub const SL4_LOCI: [usize; 4] = [3, 5, 7, 9];

/// A point `w = dual_coords(x)` at `level` whose commutator-matrix profile is clamped with
/// kernel dimension `dc`, built by conjugating a cross-section element with random integer
/// parameters. Returns `None` if no attempt produced a clamped profile.
pub fn rank_exact_sl4_point<R: Rng + ?Sized>(p: u64, level: u32, dc: usize, rng: &mut R) -> Option<Vec<u64>> {
    let z = Zpr::new(p, level).ok()?;
    let rm = commutator_matrix(sl4());
    for _ in 0..64 {
        let mut param = || rng.gen_range(0..z.modulus()) as i64;
        let x = match dc {
            3 => {
                let mut m = [0i64; 16];
                for e in m.iter_mut() {
                    *e = param();
                }
                m[15] = -(m[0] + m[5] + m[10]);
                Sl4Element::new(m, z).ok()?
            }
            5 => cross_section(Partition::P31, &[param(), param()], z),
            7 => cross_section(Partition::P22, &[param()], z),
            9 => cross_section(Partition::P211, &[param()], z),
            _ => return None,
        };
        let x = random_gl_conjugate(&x, rng);
        let w = dual_coords(&x);
        let e = divisor_profile(&rm.evaluate(&w, z)).ok()?.exponents;
        let kernel = 15 - 2 * e.iter().filter(|&&v| v == 0).count();
        if is_clamped(&e, level) && kernel == dc {
            return Some(w);
        }
    }
    None
}

/// The lift law on `count` sampled `sl_4` points at `p`, spread over levels 1 and 2 and over
/// the four rank loci.
pub fn sl4_lift_law_sample(p: u64, count: usize, seed: u64) -> LiftLawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LiftLawReport::default();
    for k in 0..count {
        let level = 1 + (k % 2) as u32;
        let dc = SL4_LOCI[(k / 2) % 4];
        let Some(w) = rank_exact_sl4_point(p, level, dc, &mut rng) else { continue };
        let ring = Zpr::new(p, level).expect("odd prime");
        rep.record(&w, &rank_preserving_lifts(sl4(), &w, ring), 1);
    }
    rep
}

/// Isolation of `[V, V]` for `V` the kernel module at rank-exact points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IsolationReport {
    /// Points checked per centralizer dimension.
    pub checked: BTreeMap<usize, usize>,
    /// Points per centralizer dimension for which no rank-exact point was produced.
    pub missing: BTreeMap<usize, usize>,
    pub failures: Vec<Vec<u64>>,
}

impl IsolationReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty() && self.missing.is_empty()
    }
}

pub fn isolation_check(p: u64, level: u32, per_locus: usize, seed: u64) -> IsolationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Zpr::new(p, level).expect("odd prime");
    let l = sl4();
    let rm = commutator_matrix(l);
    let mut rep = IsolationReport::default();
    for dc in SL4_LOCI {
        for _ in 0..per_locus {
            let Some(w) = rank_exact_sl4_point(p, level, dc, &mut rng) else {
                *rep.missing.entry(dc).or_default() += 1;
                continue;
            };
            let gens = module_kernel(&rm.evaluate(&w, z)).row_vecs();
            let mut br = Vec::new();
            for a in 0..gens.len() {
                for b in a + 1..gens.len() {
                    br.push(l.bracket_mod(&gens[a], &gens[b], &z));
                }
            }
            *rep.checked.entry(dc).or_default() += 1;
            if !br.is_empty() && !is_isolated(&ModMatrix::from_rows(z, 15, &br)) {
                rep.failures.push(w);
            }
        }
    }
    rep
}

/// Integer value of a rational known to be integral.
pub fn as_integer(x: &BigRational) -> Option<i128> {
    x.is_integer().then(|| x.to_integer().to_i128()).flatten()
}
